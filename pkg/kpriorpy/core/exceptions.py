from typing import Any, List, Tuple, Type, Union

import numpy as np


class InvalidOptionError(Exception):
    """Error raised when an invalid option is passed in"""
    pass


class DomainError(ValueError):
    """Error raised when a numerical routine receives an input outside its domain (eg: NaN or inf)"""
    pass


class DimensionMismatchError(ValueError):
    """Error raised when the shapes of vectors/matrices are inconsistent with each other"""
    pass


class InvalidDataError(ValueError):
    """Error raised when a dataset (or a data file) violates its expected format"""
    pass


class MemorySelectionError(ValueError):
    """Error raised when a memory set cannot be selected from the given data"""
    pass


class NonFiniteObjectiveError(ArithmeticError):
    """Error raised when an objective/gradient oracle returns a non-finite value"""
    pass


class SingularMatrixError(ArithmeticError):
    """Error raised when a matrix that must be inverted is singular"""
    pass


class UnsupportedTaskError(Exception):
    """Error raised when an adaptation method does not support the given adaptation task"""
    pass


class InvalidConfigError(Exception):
    """Error raised when an experiment configuration is invalid"""
    pass


def raise_exception_if_invalid_option(
        option_name: str,
        option_value: Any,
        valid_option_values: List[Any],
    ) -> None:
    """Raises an InvalidOptionError if the `option_value` given is an invalid option; otherwise returns None"""
    if option_value not in valid_option_values:
        raise InvalidOptionError(f"Expected `{option_name}` to be in {valid_option_values}, but got `{option_value}`")
    return None


def raise_exception_if_invalid_type(
        parameter_name: str,
        parameter_value: Any,
        expected_type: Union[Type, Tuple[Type, ...]],
    ) -> None:
    """Raises a TypeError if the `parameter_value` given is not of the type `expected_type`; otherwise returns None"""
    if not isinstance(parameter_value, expected_type):
        raise TypeError(f"Expected `{parameter_name}` to be of type `{expected_type}`, but got type `{type(parameter_value)}`")
    return None


def raise_exception_if_invalid_shape(
        parameter_name: str,
        array: np.ndarray,
        expected_shape: Tuple[Union[int, None], ...],
    ) -> None:
    """
    Raises a DimensionMismatchError if `array` does not have the `expected_shape`; otherwise returns None.
    A `None` entry in `expected_shape` matches any length along that axis.

    >>> raise_exception_if_invalid_shape(parameter_name='w', array=np.zeros(3), expected_shape=(3,)) # Returns None
    >>> raise_exception_if_invalid_shape(parameter_name='X', array=np.zeros((5, 2)), expected_shape=(None, 3)) # Raises
    """
    shape = np.shape(array)
    matches = len(shape) == len(expected_shape) and all(
        expected is None or expected == actual for actual, expected in zip(shape, expected_shape)
    )
    if not matches:
        raise DimensionMismatchError(f"Expected `{parameter_name}` to have shape {expected_shape}, but got shape {shape}")
    return None


def raise_exception_if_non_finite(
        parameter_name: str,
        value: Any,
    ) -> None:
    """Raises a DomainError if `value` (scalar or array) has any NaN/inf entry; otherwise returns None"""
    if not np.all(np.isfinite(value)):
        raise DomainError(f"Expected `{parameter_name}` to be finite, but got {value}")
    return None
