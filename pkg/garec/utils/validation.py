# Copyright (c) 2025, GARec contributors
# For license information, please see license.txt

from garec.exceptions import ValidationError


def throw(message: str, exc: type[Exception] = ValidationError):
    """Raise ``exc`` with ``message``. Mirrors the one-call error idiom used across the package."""
    raise exc(message)


def require_positive(name: str, value, allow_zero: bool = False):
    """Return value if it is a positive number, otherwise raise a ValidationError naming it."""
    if value is None or (value < 0 if allow_zero else value <= 0):
        bound = ">= 0" if allow_zero else "> 0"
        throw(f"{name} must be {bound}, got {value!r}")
    return value


def require_in_range(
    name: str,
    value,
    low,
    high,
    low_inclusive: bool = True,
    high_inclusive: bool = True,
):
    """Return value if it lies in the given interval.

    Args:
        name: Parameter name used in the error message
        value: Value to check
        low, high: Interval bounds
        low_inclusive, high_inclusive: Whether each bound is closed
    Returns:
        The value, unchanged
    Raises:
        ValidationError if the value falls outside the interval
    """
    if value is None:
        throw(f"{name} must be a number, got None")
    below = value < low if low_inclusive else value <= low
    above = value > high if high_inclusive else value >= high
    if below or above:
        left = "[" if low_inclusive else "("
        right = "]" if high_inclusive else ")"
        throw(f"{name} must lie in {left}{low}, {high}{right}, got {value!r}")
    return value
