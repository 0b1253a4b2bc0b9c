
import os
import logging
from dotenv import load_dotenv

load_dotenv()

logger = logging.getLogger(__name__)


class BuildConfig:
    """Configuration for graph construction and artifact caching."""
    
    
    ENV_PREFIX = "LATTAB_"
    
    # Growth is exponential in stages, so both caps matter
    BUDGET_NODES = int(os.getenv("LATTAB_BUDGET_NODES", "1000000"))
    MAX_STAGES = int(os.getenv("LATTAB_MAX_STAGES", "6"))
    
    
    LATTICE_SIZE_BOUND = int(os.getenv("LATTAB_LATTICE_SIZE_BOUND", "64"))
    
    
    ENABLE_CACHE = os.getenv("LATTAB_ENABLE_CACHE", "False").lower() == "true"
    CACHE_DIR = os.getenv("LATTAB_CACHE_DIR", ".cache")
    CACHE_TTL_HOURS = int(os.getenv("LATTAB_CACHE_TTL_HOURS", "168"))  # 7 days
    
    @classmethod
    def env(cls, name: str, fallback: str) -> str:
        """
        Read a prefixed environment variable at call time.
        
        Args:
            name: Variable name without prefix (e.g. "BUDGET_NODES")
            fallback: Value used when the variable is unset
            
        Returns:
            Raw string value
        """
        return os.getenv(f"{cls.ENV_PREFIX}{name}", fallback)
    
    @classmethod
    def validate(cls) -> bool:
        """Validate build configuration."""
        if cls.BUDGET_NODES <= 0:
            logger.error("❌ LATTAB_BUDGET_NODES must be positive")
            return False
        if cls.MAX_STAGES < 0:
            logger.error("❌ LATTAB_MAX_STAGES must not be negative")
            return False
        return True
