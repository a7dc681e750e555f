# Copyright (c) 2025, GARec contributors
# For license information, please see license.txt


class GarecError(Exception):
    """Root of every error raised on purpose by this package."""


class ValidationError(GarecError):
    """Bad argument, configuration value or input invariant."""


class DataFormatError(ValidationError):
    """A rating log line could not be accepted."""

    def __init__(self, message: str, path: str | None = None, line_no: int | None = None):
        self.path = path
        self.line_no = line_no
        if line_no is not None:
            message = f"{path or '<input>'}:{line_no}: {message}"
        super().__init__(message)


class CheckpointError(GarecError):
    """Checkpoint file is foreign, truncated or dimensionally inconsistent."""

    def __init__(self, message: str, expected=None, found=None):
        self.expected = expected
        self.found = found
        super().__init__(message)


class DivergenceError(GarecError):
    """Loss or gradient stopped being finite."""

    def __init__(self, message: str, tensor: str | None = None):
        self.tensor = tensor
        super().__init__(message)
