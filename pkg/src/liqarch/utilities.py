"""Miscellaneous helper module for the liqarch package.

Functions
---------
as_finite_array
    Converts a sequence to a 1-d float array, rejecting non-finite values.
splitmix64
    Derives independent sub-seeds from a master seed.
longest_true_run
    Length of the longest run of True values in a boolean sequence.
"""

from typing import Iterable, Type

from numpy import all, asarray, concatenate, diff, flatnonzero, float64, isfinite, ndarray

from liqarch.exceptions import InvalidArgumentError, LiqarchError, NonFiniteError

_MASK64 = (1 << 64) - 1
_GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def as_finite_array(
    values: Iterable[float],
    name: str,
    error: Type[LiqarchError] = NonFiniteError,
) -> ndarray:
    """Converts values to a 1-d numpy.ndarray of float64.

    Parameters
    ----------
    values:
        The numbers to convert.
    name:
        Argument name used in error messages.
    error:
        Exception class raised when a value is NaN or infinite.

    Returns
    -------
    A 1-d numpy.ndarray of float64 (a copy is not guaranteed).
    """
    array = asarray(values, dtype=float64)
    if array.ndim != 1:
        raise InvalidArgumentError(
            f"Argument '{name}' must be 1-d, but had shape {array.shape}."
        )
    if not all(isfinite(array)):
        raise error(f"Argument '{name}' contains NaN or infinite values.")
    return array


def splitmix64(seed: int, index: int) -> int:
    """Derives the sub-seed for stream `index` from a master seed.

    Applies the splitmix64 finalizer to seed + (index + 1) * golden
    gamma, so distinct indices give decorrelated 64-bit seeds and the
    mapping does not depend on how many streams are requested.
    """
    z = (int(seed) + (int(index) + 1) * _GOLDEN_GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def longest_true_run(flags: Iterable[bool]) -> int:
    """Length of the longest run of consecutive True values."""
    values = asarray(list(flags), dtype=bool).astype(int)
    if values.size == 0:
        return 0
    edges = diff(concatenate(([0], values, [0])))
    starts = flatnonzero(edges == 1)
    ends = flatnonzero(edges == -1)
    if starts.size == 0:
        return 0
    return int((ends - starts).max())
