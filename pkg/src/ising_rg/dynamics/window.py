"""Single-site kernel, window transition matrices and the K = 0 coefficient iteration.

Window words list the spins ``(x_k - 1, x_k, x_k + 1)`` for ``k = 1..m``
concatenated, in binary-sort order (first spin least significant).  New-spin
words list the ``m`` observed sites in the same order.  Distributions and
matrices are plain float arrays.
"""

from dataclasses import dataclass
import math
from typing import NamedTuple

import numpy as np

from ..errors import DomainError, NumericError, ResourceError
from ..numerics import gauss_cdf, spin_table, xlogx
from ..transfer import ObservableFn, observable_constants

MAX_THETA_SITES = 4
MAX_TRANSFER_DETERMINED_SITES = 8


@dataclass(frozen=True)
class DynamicsParams:
    """Offset ``gamma`` and the standard deviation of the Gaussian noise. ``sign(0)`` is +1."""

    gamma: float = 0.0
    noise_scale: float = 1.0

    def __post_init__(self):
        if not math.isfinite(self.gamma):
            raise DomainError("gamma must be finite")
        if not (math.isfinite(self.noise_scale) and self.noise_scale > 0):
            raise DomainError("noise_scale must be finite and > 0")

    @property
    def drift_c(self):
        """Coefficient of the centre spin in the drift, ``1 - gamma``."""
        return 1.0 - self.gamma

    @property
    def x(self):
        return self.drift_c / self.noise_scale

    @property
    def r(self):
        """Subleading eigenvalue ``Phi(x) - Phi(-x)`` of the single-site K = 0 chain."""
        return gauss_cdf(self.x) - gauss_cdf(-self.x)


def _check_spin(s):
    if s not in (1, -1):
        raise DomainError(f"spins must be +1 or -1, got {s!r}")


def site_update_probability(params, K, left, center, right, new):
    for s in (left, center, right, new):
        _check_spin(s)
    drift = K * (left + right) + params.drift_c * center
    return gauss_cdf(new * drift / params.noise_scale)


def _check_m(m, cap):
    if m < 1:
        raise DomainError("m must be >= 1")
    if m > cap:
        raise ResourceError(f"m = {m} exceeds the cap {cap}")


def build_theta(params, K, m):
    """``2**m x 2**(3m)`` matrix of next-step probabilities of the observed sites given their windows."""
    _check_m(m, MAX_THETA_SITES)
    cols = spin_table(3 * m).astype(float)
    rows = spin_table(m).astype(float)
    theta = np.ones((1 << m, 1 << (3 * m)))
    for k in range(m):
        left, centre, right = cols[:, 3 * k], cols[:, 3 * k + 1], cols[:, 3 * k + 2]
        drift = (K * (left + right) + params.drift_c * centre) / params.noise_scale
        theta *= gauss_cdf(rows[:, k][:, None] * drift[None, :])
    return theta


def build_transfer_determined(params, m):
    """K = 0 transition matrix between observed-site words; the m-fold tensor power of the 2x2 chain."""
    _check_m(m, MAX_TRANSFER_DETERMINED_SITES)
    words = spin_table(m).astype(float)
    out = np.ones((1 << m, 1 << m))
    for k in range(m):
        out *= gauss_cdf(params.x * np.outer(words[:, k], words[:, k]))
    return out


def analytic_spectrum(params, m):
    """Eigenvalues ``r**|S|`` over subsets ``S`` of the sites, sorted descending."""
    r = params.r
    vals = [r ** bin(s).count("1") for s in range(1 << m)]
    return np.sort(np.array(vals))[::-1]


def spectrum_check(M, tol=1e-10):
    """Sorted eigenvalues of a symmetric stochastic matrix; checks top = 1 and a strict gap."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DomainError("matrix must be square")
    try:
        ev = np.linalg.eigvalsh(M)[::-1]
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigensolve failed: {exc}") from exc
    if abs(ev[0] - 1.0) > tol:
        raise NumericError(f"top eigenvalue {ev[0]!r} differs from 1")
    if len(ev) > 1 and not ev[1] < 1.0 - tol:
        raise NumericError("top eigenvalue is not simple")
    return ev


def convergence_horizon(r, eps=1e-10):
    """Smallest ``T`` with ``|r|**T <= eps``; 1 when ``r = 0``."""
    if not 0 < eps < 1:
        raise DomainError("eps must lie in (0, 1)")
    r = abs(r)
    if r >= 1:
        raise DomainError("no horizon without a spectral gap")
    if r == 0:
        return 1
    return max(1, math.ceil(math.log(eps) / math.log(r)))


def coefficient_iteration(coeffs, M, t):
    """Row vector ``coeffs @ M**t``."""
    coeffs = np.asarray(coeffs, dtype=float)
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or coeffs.shape != (M.shape[0],):
        raise DomainError("coefficient vector and matrix dimensions do not match")
    if t < 0:
        raise DomainError("t must be >= 0")
    out = coeffs.copy()
    for _ in range(t):
        out = out @ M
    return out


def new_spin_distribution(theta, window):
    """Law of the observed new spins, ``theta @ window``."""
    theta = np.asarray(theta, dtype=float)
    window = np.asarray(window, dtype=float)
    if window.shape != (theta.shape[1],):
        raise DomainError(f"window must have {theta.shape[1]} entries, got {window.shape}")
    return theta @ window


def observable_from_distribution(coeffs, dist):
    coeffs = np.asarray(coeffs, dtype=float)
    dist = np.asarray(dist, dtype=float)
    if coeffs.shape != dist.shape:
        raise DomainError("coefficients and distribution differ in length")
    return float(coeffs @ dist)


def two_point_table(f, g):
    """``f^2(s_1) g^2(s_2)`` over the four words ``(+,+), (-,+), (+,-), (-,-)``."""
    f = ObservableFn.coerce(f)
    g = ObservableFn.coerce(g)
    return np.array([f.v_plus * g.v_plus, f.v_minus * g.v_plus, f.v_plus * g.v_minus, f.v_minus * g.v_minus])


def _check_table(table):
    table = np.asarray(table, dtype=float)
    n = table.shape[0] if table.ndim == 1 else 0
    if n < 2 or n & (n - 1):
        raise DomainError("observable table length must be a power of two >= 2")
    if np.any(table < 0) or not np.all(np.isfinite(table)):
        raise DomainError("observable table entries must be finite and >= 0")
    return table


def m_point_observable(table, dist):
    """Expectation of the table under a word distribution, or under samples of shape ``(R, m)``."""
    table = _check_table(table)
    m = table.shape[0].bit_length() - 1
    dist = np.asarray(dist)
    if dist.ndim == 2:
        if dist.shape[1] != m:
            raise DomainError(f"samples must have {m} columns")
        ranks = ((dist < 0).astype(np.int64) << np.arange(m)).sum(axis=1)
        return float(np.mean(table[ranks]))
    return observable_from_distribution(table, dist)


class ThetaError(NamedTuple):
    max_abs: float
    frobenius: float
    bound: float

    @property
    def within_bound(self):
        return self.max_abs <= self.bound


def theta_error_bound(params, K, m):
    """Size of ``Theta_K - Theta_0`` against the Lipschitz bound ``2 m K / (scale sqrt(2 pi))``."""
    diff = build_theta(params, K, m) - build_theta(params, 0.0, m)
    c_lip = 2.0 * m / (params.noise_scale * math.sqrt(2.0 * math.pi))
    return ThetaError(float(np.max(np.abs(diff))), float(np.linalg.norm(diff)), c_lip * K)


def decorrelated_limit(f, g):
    """Limits ``(A/4, q log q, A/4 - q log q)`` with ``q = c4_12 c2_12 / 4`` once the spins decorrelate."""
    consts = observable_constants(f, g)
    q = consts.q_limit
    if q <= 0:
        raise DomainError("q must be positive")
    s_hat = consts.A / 4.0
    s_tilde = float(xlogx(q))
    return s_hat, s_tilde, s_hat - s_tilde
