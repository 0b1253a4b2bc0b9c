# ==================== utils/__init__.py ====================

from .cache import CacheManager
from .ref_parser import RefParser

__all__ = ["CacheManager", "RefParser"]
