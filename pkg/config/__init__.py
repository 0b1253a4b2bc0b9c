

from .build_config import BuildConfig
from .check_config import CheckConfig


__all__ = ["BuildConfig", "CheckConfig"]
