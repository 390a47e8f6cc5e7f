"""Logging configuration for GACN."""

import logging
import sys
from typing import Optional

from src.core.config import settings


def setup_logging(level: Optional[str] = None) -> None:
    """Configure logging for the command-line tools.

    Diagnostics go to stderr; stdout carries only machine-readable output.
    """
    log_format = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

    logging.basicConfig(
        level=getattr(logging, (level or settings.log_level).upper()),
        format=log_format,
        handlers=[
            logging.StreamHandler(sys.stderr),
        ],
        force=True,
    )

    # Reduce noise from third-party libraries
    logging.getLogger("torch").setLevel(logging.WARNING)


def get_logger(name: str) -> logging.Logger:
    """Get a logger instance with the given name."""
    return logging.getLogger(name)
