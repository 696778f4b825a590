"""Decimation RG map for the zero-field chain and the remainder sequences of its scaling equations.

The coarse-graining map used throughout is ``K' = log(cosh K) / 2`` with
dilatation 2 per step.  Remainders compare the coupling-flowed quantity at
fixed sites with the original quantity at dilated sites ``2**n x``.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import DomainError
from .numerics import xlogx
from .transfer import ObservableFn, observable_constants

_LOG2 = math.log(2.0)


def _log_cosh(K):
    # log cosh K = K + log1p(e^{-2K}) - log 2, stable for large K
    return K + math.log1p(math.exp(-2.0 * K)) - _LOG2


def rgt_step(K):
    """One coarse-graining step ``K -> -log(2 / (e^K + e^-K)) / 2``."""
    if not math.isfinite(K) or K < 0:
        raise DomainError(f"K must be finite and >= 0, got {K!r}")
    if K < 1e-4:
        # log cosh K = K^2/2 - K^4/12 + ...; avoids log1p/exp round-off at tiny K
        return 0.5 * (0.5 * K * K - K**4 / 12.0)
    return 0.5 * _log_cosh(K)


def decimation_oracle(K):
    """Coupling obtained by summing out the middle spin of a three-site segment.

    ``sum_{s2} exp(K s2 (s1 + s3)) = const * exp(K' s1 s3)`` with
    ``K' = log(cosh 2K) / 2``.  This differs from :func:`rgt_step`.
    """
    if not math.isfinite(K) or K < 0:
        raise DomainError(f"K must be finite and >= 0, got {K!r}")
    return 0.5 * _log_cosh(2.0 * K)


@dataclass(frozen=True)
class RgTrajectory:
    k_values: np.ndarray
    dilatation_base: int = 2

    @property
    def dilatations(self):
        return self.dilatation_base ** np.arange(len(self.k_values), dtype=float)


def rg_trajectory(K0, n):
    if n < 0:
        raise DomainError("n must be >= 0")
    rgt_step(K0)  # validates K0
    ks = [float(K0)]
    for _ in range(n):
        ks.append(rgt_step(ks[-1]))
    return RgTrajectory(np.array(ks))


@dataclass(frozen=True)
class RemainderSeries:
    values: np.ndarray
    kind: str
    x1: int
    x2: int
    scaling_factor_z: float = 1.0
    k_values: np.ndarray = field(default=None, repr=False)


def _check_sites(x1, x2, n, z):
    if x1 == x2:
        raise DomainError("x1 and x2 must differ")
    if n < 0:
        raise DomainError("n must be >= 0")
    if not (math.isfinite(z) and z > 0):
        raise DomainError("scaling factor Z must be positive")
    return abs(x2 - x1)


def _tanh_powers(K0, dist, n):
    """``tanh(K_m)^dist`` along the flow and ``tanh(K0)^(2^m dist)`` for m = 0..n."""
    traj = rg_trajectory(K0, n)
    # same expression for both terms so the m = 0 remainder is exactly zero
    flowed = np.array([math.tanh(k) ** float(dist) for k in traj.k_values])
    t0 = math.tanh(K0)
    # float exponent: 2^m * dist would overflow int64 for large m, and the power underflows cleanly to 0
    dilated = np.array([t0 ** (float(2**m) * dist) for m in range(n + 1)])
    return traj, flowed, dilated


def correlation_remainder(K0, x1, x2, n, z=1.0):
    """``S_m = G_{2^m}(x1, x2) - G(2^m x1, 2^m x2) / Z`` for m = 0..n."""
    dist = _check_sites(x1, x2, n, z)
    traj, flowed, dilated = _tanh_powers(K0, dist, n)
    return RemainderSeries(flowed - dilated / z, "correlation", x1, x2, z, traj.k_values)


def _xlogx_difference(u, v, du_minus_dv):
    """``u log u - v log v`` given ``u - v`` computed without cancellation."""
    if du_minus_dv == 0.0:
        return 0.0
    return du_minus_dv * math.log(u) + v * math.log1p(du_minus_dv / v)


def observable_remainders(K0, f, g, x1, x2, n, z=1.0):
    """Remainders ``(O_hat, O_tilde, O)`` of the observable scaling equations, m = 0..n."""
    dist = _check_sites(x1, x2, n, z)
    consts = observable_constants(ObservableFn.coerce(f), ObservableFn.coerce(g))
    traj, flowed, dilated = _tanh_powers(K0, dist, n)
    q0, slope = consts.q_limit, consts.delta_bar / 4.0

    if z == 1.0:
        hat = consts.B / 4.0 * (flowed - dilated)
        tilde = np.array(
            [
                _xlogx_difference(q0 + slope * a, q0 + slope * b, slope * (a - b))
                for a, b in zip(flowed, dilated)
            ]
        )
    else:
        hat = consts.A / 4.0 + consts.B / 4.0 * flowed - (consts.A / 4.0 + consts.B / 4.0 * dilated) / z
        tilde = xlogx(q0 + slope * flowed) - xlogx(q0 + slope * dilated) / z
    kv = traj.k_values
    return (
        RemainderSeries(hat, "observable_hat", x1, x2, z, kv),
        RemainderSeries(tilde, "observable_tilde", x1, x2, z, kv),
        RemainderSeries(hat - tilde, "observable", x1, x2, z, kv),
    )


def decay_rate_fit(series, from_index=0, floor=1e-300):
    """Least-squares slope of ``log|v_m|`` against ``m`` over ``m >= from_index``.

    Entries with ``|v_m| <= floor`` are ignored.  Returns the natural-log rate;
    a geometric sequence ``r**m`` gives ``log r``.
    """
    values = series.values if isinstance(series, RemainderSeries) else np.asarray(series, float)
    idx = np.arange(len(values))
    keep = (idx >= from_index) & (np.abs(values) > floor)
    if keep.sum() < 3:
        raise DomainError("need at least 3 non-negligible entries to fit a decay rate")
    slope, _ = np.polyfit(idx[keep].astype(float), np.log(np.abs(values[keep])), 1)
    return float(slope)


def tail_ratios(series, from_index=0, floor=1e-300):
    """``|v_{m+1} / v_m|`` for ``m >= from_index`` where ``|v_m| > floor``."""
    values = series.values if isinstance(series, RemainderSeries) else np.asarray(series, float)
    out = {}
    for m in range(from_index, len(values) - 1):
        if abs(values[m]) > floor:
            out[m] = float(abs(values[m + 1] / values[m]))
    return out
