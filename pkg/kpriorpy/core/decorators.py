from typing import Callable
import functools
import logging
import time

from kpriorpy.core.utils import get_timetaken_fstring


def timer(func: Callable) -> Callable:
    """Decorator that logs (at INFO level) the runtime of the decorated function"""
    @functools.wraps(func)
    def wrapper_timer(*args, **kwargs):
        start = time.perf_counter()
        result = func(*args, **kwargs)
        end = time.perf_counter()
        time_taken_in_secs = round(end - start, 3)
        timetaken_fstring = get_timetaken_fstring(num_seconds=time_taken_in_secs)
        logging.getLogger(func.__module__).info(f"Executed {func.__name__!r} in: {timetaken_fstring}")
        return result
    return wrapper_timer
