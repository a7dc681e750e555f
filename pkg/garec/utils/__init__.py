# Copyright (c) 2025, GARec contributors
# For license information, please see license.txt

from .log import configure_logging, logger
from .validation import require_in_range, require_positive, throw

__all__ = ["configure_logging", "logger", "require_in_range", "require_positive", "throw"]
