"""
Seeded randomness for kpriorpy.

Every random draw in the package goes through `get_random_generator`, which returns numpy's
`Generator` backed by the PCG64 bit generator. PCG64 streams are specified by numpy and are
identical across platforms for a given seed, which is what makes memory selection, MLP
initialisation and synthetic data reproducible.
"""

from typing import Union
import hashlib

import numpy as np

from kpriorpy.core.exceptions import raise_exception_if_invalid_type

SEED_MODULUS = 2**63


def get_random_generator(seed: int) -> np.random.Generator:
    """Returns a PCG64-backed `numpy.random.Generator` for the given non-negative integer seed"""
    raise_exception_if_invalid_type(
        parameter_name='seed',
        parameter_value=seed,
        expected_type=(int, np.integer),
    )
    if seed < 0:
        raise ValueError(f"Expected `seed` to be >= 0, but got {seed}")
    return np.random.Generator(np.random.PCG64(int(seed)))


def derive_seed(master_seed: int, *keys: Union[int, str]) -> int:
    """
    Derives a child seed as the first 8 bytes (big-endian) of SHA-256 over "master_seed:key1:key2:...",
    reduced modulo 2**63. Used for per-cell and per-replicate seeds of the benchmark grid.

    >>> derive_seed(0, 3) == derive_seed(0, 3) # True (stable across runs and platforms)
    """
    message = ":".join([str(int(master_seed))] + [str(key) for key in keys])
    digest = hashlib.sha256(message.encode("utf8")).digest()
    return int.from_bytes(digest[:8], byteorder="big") % SEED_MODULUS
