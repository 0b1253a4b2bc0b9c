

import os
import logging
from dotenv import load_dotenv

load_dotenv()

logger = logging.getLogger(__name__)


class CheckConfig:
    """Configuration for searches and verification suites."""
    
    # Counted in visited partial assignments, not wall time
    BUDGET_ENDOS = int(os.getenv("LATTAB_BUDGET_ENDOS", "200000"))
    
    # Bell(7) = 877 partitions
    EXHAUSTIVE_BOUND = int(os.getenv("LATTAB_EXHAUSTIVE_BOUND", "7"))
    
    
    CLOSURE_BUDGET = int(os.getenv("LATTAB_CLOSURE_BUDGET", "10000"))
    
    
    # Deepest stage a check suite grows before giving up
    MAX_STAGE = int(os.getenv("LATTAB_MAX_STAGE", "3"))
    
    
    SEED = int(os.getenv("LATTAB_SEED", "0"))
    JOBS = int(os.getenv("LATTAB_JOBS", "1"))
    
    
    LOG_LEVEL = os.getenv("LATTAB_LOG_LEVEL", "INFO").upper()
    
    @classmethod
    def validate(cls) -> bool:
        """Validate check configuration."""
        for name in ("BUDGET_ENDOS", "EXHAUSTIVE_BOUND", "CLOSURE_BUDGET", "JOBS"):
            if getattr(cls, name) <= 0:
                logger.error(f"❌ LATTAB_{name} must be positive")
                return False
        if cls.MAX_STAGE < 0:
            logger.error("❌ LATTAB_MAX_STAGE must not be negative")
            return False
        return True
