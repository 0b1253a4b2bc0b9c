import json
import time
import hashlib
from pathlib import Path
from typing import Optional, Any
import logging

logger = logging.getLogger(__name__)


class CacheManager:
    """File-based cache of built graph stages with TTL support."""

    def __init__(self, cache_dir: str = ".cache", ttl_hours: int = 168):
        """
        Initialize cache manager.

        Args:
            cache_dir: Directory to store cache files
            ttl_hours: Time-to-live in hours (default: 168 = 7 days)
        """
        self.cache_dir = Path(cache_dir)
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        self.ttl_seconds = ttl_hours * 3600
        logger.info(f"💾 Stage cache at {cache_dir} (TTL: {ttl_hours}h)")

    @staticmethod
    def stage_key(lattice_payload: dict, mode: str, stage: int) -> str:
        """Key for one graph stage: canonical lattice JSON, build mode and stage."""
        lattice_text = json.dumps(lattice_payload, sort_keys=True, separators=(",", ":"))
        return f"{lattice_text}|{mode}|{stage}"

    def _get_cache_path(self, key: str) -> Path:
        key_hash = hashlib.sha256(key.encode()).hexdigest()
        return self.cache_dir / f"{key_hash}.json"

    def get(self, key: str) -> Optional[dict]:
        """
        Retrieve a cached payload.

        Args:
            key: Cache key

        Returns:
            Cached payload or None if missing, expired or unreadable
        """
        cache_file = self._get_cache_path(key)

        if not cache_file.exists():
            return None

        try:
            file_age = time.time() - cache_file.stat().st_mtime
            if file_age > self.ttl_seconds:
                logger.info(f"🗑️ Cache expired: {cache_file.name[:12]}")
                cache_file.unlink()
                return None

            data = json.loads(cache_file.read_text())
            logger.info(f"✅ Cache hit: {cache_file.name[:12]} (age: {file_age:.0f}s)")
            return data

        except (OSError, json.JSONDecodeError) as e:
            logger.error(f"❌ Cache read error: {e}")
            return None

    def set(self, key: str, value: Any) -> bool:
        """
        Store a JSON-serializable payload.

        Returns:
            True if written, False otherwise
        """
        try:
            cache_file = self._get_cache_path(key)
            cache_file.parent.mkdir(parents=True, exist_ok=True)
            cache_file.write_text(json.dumps(value, separators=(",", ":")))
            logger.info(f"💾 Cached: {cache_file.name[:12]}")
            return True

        except (OSError, TypeError, ValueError) as e:
            logger.error(f"❌ Cache write error: {e}")
            return False

    def delete(self, key: str) -> bool:
        cache_file = self._get_cache_path(key)
        if cache_file.exists():
            cache_file.unlink()
            logger.info(f"🗑️ Cache deleted: {cache_file.name[:12]}")
            return True
        return False

    def clear_all(self) -> int:
        """Clear all cache entries."""
        count = 0
        for cache_file in self.cache_dir.glob("*.json"):
            cache_file.unlink()
            count += 1
        logger.info(f"🗑️ Cleared {count} cache entries")
        return count
