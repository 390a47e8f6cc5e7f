"""Exception types shared across GACN modules."""

from pathlib import Path
from typing import Optional


class GacnError(Exception):
    """Base class for every error raised by GACN code."""

    pass


class ConfigurationError(GacnError):
    """Exception raised when a configuration value or combination is invalid."""

    pass


class GraphFormatError(GacnError):
    """Exception raised when an input file cannot be parsed."""

    def __init__(self, message: str, path: Optional[Path] = None, line_number: Optional[int] = None):
        self.path = path
        self.line_number = line_number
        location = ""
        if path is not None:
            location = f"{path}"
            if line_number is not None:
                location += f":{line_number}"
            location += ": "
        super().__init__(f"{location}{message}")


class EmptyGraphError(GacnError):
    """Exception raised when an input file contains no nodes at all."""

    pass


class ContractError(GacnError, ValueError):
    """Exception raised when an operation is called outside its preconditions."""

    pass


class NumericError(GacnError, ArithmeticError):
    """Exception raised when an operation produces NaN or Inf."""

    def __init__(self, op: str, detail: str = ""):
        self.op = op
        message = f"Non-finite result in {op}"
        if detail:
            message += f": {detail}"
        super().__init__(message)


class TrainingError(GacnError):
    """Exception raised when a training phase fails (e.g. non-finite loss)."""

    def __init__(self, phase: str, iteration: int, message: str):
        self.phase = phase
        self.iteration = iteration
        super().__init__(f"{phase} failed at iteration {iteration}: {message}")


class RunDirectoryError(GacnError):
    """Exception raised when a run or dataset directory is missing required files."""

    pass
