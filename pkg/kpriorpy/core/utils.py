from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from kpriorpy.core.exceptions import raise_exception_if_invalid_type
from kpriorpy.core.type_annotations import Number


def __get_kwarg_as_string(key: Any, value: Any) -> str:
    return f"{key}='{value}'" if isinstance(value, str) else f"{key}={value}"


def create_string_repr(
        *,
        instance: Any,
        kwargs_dict: Optional[Dict[str, Any]] = None,
    ) -> str:
    """
    Writes single-line __str__ representation of a class' instance.

    >>> create_string_repr(instance=FeatureMap(degree=2, input_dim=3), kwargs_dict={'degree': 2, 'input_dim': 3})
    >>> "FeatureMap(degree=2, input_dim=3)"
    """
    kwargs_dict = {} if kwargs_dict is None else kwargs_dict
    class_name = instance.__class__.__name__
    if not kwargs_dict:
        return f"{class_name}()"
    kwargs_dict_as_string = ", ".join(
        [__get_kwarg_as_string(key=key, value=value) for key, value in kwargs_dict.items()]
    )
    return f"{class_name}({kwargs_dict_as_string})"


def integerify_if_possible(number: Number) -> Number:
    """Converts whole numbers represented as floats to integers"""
    return int(number) if int(number) == number else number


def get_timetaken_dictionary(num_seconds: Number) -> Dict[str, Number]:
    """
    Returns dictionary having the keys: ['hours', 'minutes', 'seconds', 'milliseconds'] containing the time elapsed.

    >>> get_timetaken_dictionary(num_seconds=3725.4292) # Returns {'hours': 1, 'minutes': 2, 'seconds': 5, 'milliseconds': 429.2}
    """
    hours, remainder = divmod(num_seconds, 60*60)
    minutes, remainder = divmod(remainder, 60)
    seconds = np.floor(remainder)
    milliseconds = round((remainder - seconds) * 1000, 3)
    dictionary_time_taken = {
        'hours': integerify_if_possible(hours),
        'minutes': integerify_if_possible(minutes),
        'seconds': integerify_if_possible(seconds),
        'milliseconds': integerify_if_possible(milliseconds),
    }
    return dictionary_time_taken


def get_timetaken_fstring(num_seconds: Number) -> str:
    """Returns f-string containing the elapsed time. Eg: '1h 2m 5s 429.2ms'"""
    dict_time_taken = get_timetaken_dictionary(num_seconds=num_seconds)
    dict_unit_shortener = {
        'hours': 'h',
        'minutes': 'm',
        'seconds': 's',
        'milliseconds': 'ms',
    }
    time_taken_fstring = " ".join(
        [f"{value}{dict_unit_shortener[unit]}" for unit, value in dict_time_taken.items() if value != 0]
    ).strip()
    return '0s' if time_taken_fstring == "" else time_taken_fstring


class Partitioner:
    """
    Class for partitioning an index range [0, iterable_length) into contiguous blocks.

    >>> partitioner = Partitioner(iterable_length=10)
    >>> partitioner.sizes_by_num_partitions(num_partitions=3) # Returns [4, 3, 3]
    >>> partitioner.index_ranges_by_num_partitions(num_partitions=3) # Returns [(0, 4), (4, 7), (7, 10)]
    >>> partitioner.index_ranges_by_max_partition_size(max_partition_size=4) # Returns [(0, 4), (4, 8), (8, 10)]
    """

    def __init__(self, iterable_length: int) -> None:
        self.__validate_iterable_length(iterable_length=iterable_length)
        self.__iterable_length = iterable_length

    def __str__(self) -> str:
        return create_string_repr(instance=self, kwargs_dict={'iterable_length': self.__iterable_length})

    def __validate_iterable_length(self, iterable_length: int) -> None:
        raise_exception_if_invalid_type(
            parameter_name='iterable_length',
            parameter_value=iterable_length,
            expected_type=(int, np.integer),
        )
        if iterable_length < 0:
            raise ValueError("The parameter `iterable_length` cannot be < 0")
        return None

    def __validate_positive(self, parameter_name: str, value: int) -> None:
        raise_exception_if_invalid_type(
            parameter_name=parameter_name,
            parameter_value=value,
            expected_type=(int, np.integer),
        )
        if value <= 0:
            raise ValueError(f"The parameter `{parameter_name}` cannot be <= 0")
        return None

    def sizes_by_num_partitions(self, num_partitions: int) -> List[int]:
        """Returns list of sizes of each partition (sizes differ by at most 1, larger partitions first)"""
        self.__validate_positive(parameter_name='num_partitions', value=num_partitions)
        if num_partitions > self.__iterable_length:
            raise ValueError("The parameter `num_partitions` cannot be > length of the iterable")
        min_partition_size, num_residuals = divmod(self.__iterable_length, num_partitions)
        return [min_partition_size + 1] * num_residuals + [min_partition_size] * (num_partitions - num_residuals)

    def sizes_by_max_partition_size(self, max_partition_size: int) -> List[int]:
        """Returns list of sizes of each partition (all full, except possibly the last one)"""
        self.__validate_positive(parameter_name='max_partition_size', value=max_partition_size)
        num_full_partitions, last_partition_size = divmod(self.__iterable_length, max_partition_size)
        if last_partition_size == 0:
            return [max_partition_size] * num_full_partitions
        return [max_partition_size] * num_full_partitions + [last_partition_size]

    def __compute_index_ranges_from_partition_sizes(
            self,
            partition_sizes: List[int],
        ) -> List[Tuple[int, int]]:
        start_indices = [0] + [int(value) for value in np.cumsum(partition_sizes)]
        return [(start_indices[idx], start_indices[idx+1]) for idx in range(len(start_indices) - 1)]

    def index_ranges_by_num_partitions(self, num_partitions: int) -> List[Tuple[int, int]]:
        """Returns list of tuples of (start_index, end_index). The indices are zero-based, end is exclusive."""
        sizes = self.sizes_by_num_partitions(num_partitions=num_partitions)
        return self.__compute_index_ranges_from_partition_sizes(partition_sizes=sizes)

    def index_ranges_by_max_partition_size(self, max_partition_size: int) -> List[Tuple[int, int]]:
        """Returns list of tuples of (start_index, end_index). The indices are zero-based, end is exclusive."""
        sizes = self.sizes_by_max_partition_size(max_partition_size=max_partition_size)
        return self.__compute_index_ranges_from_partition_sizes(partition_sizes=sizes)
