"""Gaussian CDF and the binary-sort encoding of spin words.

Spin words are ordered with the first spin as the least significant bit and
``+1 -> 0``, ``-1 -> 1``, so the all-up word has rank 0 and the all-down word
of length ``L`` has rank ``2**L - 1``.
"""

import math

import numpy as np
from scipy import special

from .errors import DomainError

_SQRT1_2 = 1.0 / math.sqrt(2.0)


def gauss_cdf(x):
    """Standard normal CDF, ``0.5 * erfc(-x / sqrt(2))``.

    Accepts a scalar or an array.  Going through ``erfc`` keeps
    ``gauss_cdf(x) + gauss_cdf(-x) == 1`` at machine precision and avoids the
    cancellation of ``0.5 * (1 + erf(x / sqrt(2)))`` in the lower tail.
    """
    if np.ndim(x) == 0:
        x = float(x)
        if not math.isfinite(x):
            raise DomainError(f"gauss_cdf needs a finite argument, got {x!r}")
        return float(0.5 * special.erfc(-x * _SQRT1_2))
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("gauss_cdf needs finite arguments")
    return 0.5 * special.erfc(-arr * _SQRT1_2)


def _check_spin(s):
    if s not in (1, -1):
        raise DomainError(f"spins must be +1 or -1, got {s!r}")


def spin_rank(word):
    """Binary-sort rank of a spin word (first spin least significant)."""
    word = list(word)
    if not word:
        raise DomainError("spin word must be non-empty")
    rank = 0
    for k, s in enumerate(word):
        _check_spin(s)
        if s == -1:
            rank |= 1 << k
    return rank


def rank_to_spins(rank, length):
    """Inverse of :func:`spin_rank`; returns a tuple of ``+1``/``-1``."""
    if length < 1:
        raise DomainError("length must be >= 1")
    if not 0 <= rank < (1 << length):
        raise DomainError(f"rank {rank} out of range for length {length}")
    return tuple(-1 if (rank >> k) & 1 else 1 for k in range(length))


def spin_table(length):
    """All ``2**length`` words as an int8 array of shape ``(2**length, length)``.

    Row ``r`` is ``rank_to_spins(r, length)``.
    """
    ranks = np.arange(1 << length, dtype=np.int64)
    bits = (ranks[:, None] >> np.arange(length)) & 1
    return (1 - 2 * bits).astype(np.int8)


def xlogx(x):
    """``x * log(x)`` with the continuous extension ``0 * log 0 = 0``."""
    return special.xlogy(x, x)
