import logging
import sys

from src.core.logging import get_logger, setup_logging


def test_setup_logging_writes_to_stderr():
    setup_logging("debug")
    root = logging.getLogger()
    assert root.level == logging.DEBUG
    assert [h.stream for h in root.handlers] == [sys.stderr]
    assert logging.getLogger("torch").level == logging.WARNING
    assert get_logger("src.graph").getEffectiveLevel() == logging.DEBUG
