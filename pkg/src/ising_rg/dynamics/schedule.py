"""Time-dependent coupling schedules ``t -> K_t`` driving the dynamics toward ``K* = 0``."""

from dataclasses import dataclass
import math

import numpy as np

from ..errors import DomainError
from ..rgflow import rgt_step

KINDS = ("constant", "geometric", "rgt")


@dataclass(frozen=True)
class Schedule:
    """Coupling used at step ``t``: ``constant`` K0, ``geometric`` K0*q**t, or ``rgt`` iterates of the RG map.

    The dilatation attached to step ``t`` is reported as ``2**t``.
    """

    kind: str
    k0: float
    q: float = 0.5

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"schedule kind must be one of {KINDS}, got {self.kind!r}")
        if not (math.isfinite(self.k0) and self.k0 >= 0):
            raise DomainError("schedule K0 must be finite and >= 0")
        if self.kind == "geometric" and not 0 < self.q < 1:
            raise DomainError("geometric schedule needs 0 < q < 1")

    @classmethod
    def constant(cls, k):
        return cls("constant", float(k))

    @classmethod
    def geometric(cls, k0, q=0.5):
        return cls("geometric", float(k0), float(q))

    @classmethod
    def rgt(cls, k0):
        return cls("rgt", float(k0))

    def values(self, T):
        """``(K_0, ..., K_{T-1})``."""
        if T < 0:
            raise DomainError("T must be >= 0")
        if self.kind == "constant":
            return np.full(T, self.k0)
        if self.kind == "geometric":
            return self.k0 * self.q ** np.arange(T, dtype=float)
        out = np.empty(T)
        k = self.k0
        for t in range(T):
            out[t] = k
            k = rgt_step(k)
        return out

    def k_at(self, t):
        return float(self.values(t + 1)[t])

    @staticmethod
    def lambda_at(t):
        return 2.0**t
