"""
Logger access for the GARec package.

Library modules grab a named logger at import time:

    LOGGER = logger("graph")

and never touch handlers. The command line front-end calls
``configure_logging`` once.
"""

import logging

ROOT_NAME = "garec"

_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def logger(module: str | None = None) -> logging.Logger:
    """Return the ``garec.<module>`` logger (the package root when module is None)."""
    if not module:
        return logging.getLogger(ROOT_NAME)
    if module.startswith(f"{ROOT_NAME}."):
        return logging.getLogger(module)
    return logging.getLogger(f"{ROOT_NAME}.{module}")


def configure_logging(level: int | str = logging.INFO) -> logging.Logger:
    """Attach one stream handler to the package root logger. Safe to call repeatedly."""
    root = logging.getLogger(ROOT_NAME)
    if isinstance(level, str):
        level = logging.getLevelName(level.upper())
    root.setLevel(level)
    if not any(getattr(handler, "_garec", False) for handler in root.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(_FORMAT))
        handler._garec = True
        root.addHandler(handler)
    return root
