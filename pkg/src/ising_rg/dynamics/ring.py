"""Exact evolution of the full law of a small ring under the synchronous dynamics.

A ring distribution is a float array of length ``2**N`` indexed by the
binary-sort rank of the configuration (site 0 least significant).  Sites are
0-based and periodic.
"""

from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..errors import DomainError, ResourceError
from ..numerics import gauss_cdf, spin_rank, xlogx
from .window import _check_table

MAX_RING_SITES = 14
MIN_RING_SITES = 3


def _ring_size(dist):
    dist = np.asarray(dist, dtype=float)
    n = dist.shape[0] if dist.ndim == 1 else 0
    if n < 2 or n & (n - 1):
        raise DomainError("ring distribution length must be a power of two")
    N = n.bit_length() - 1
    _check_ring_sites(N)
    return dist, N


def _check_ring_sites(N):
    if N < MIN_RING_SITES:
        raise DomainError(f"ring needs at least {MIN_RING_SITES} sites")
    if N > MAX_RING_SITES:
        raise ResourceError(f"exact ring evolution capped at N = {MAX_RING_SITES}, got {N}")


def ring_kernel_table(params, K):
    """``table[l, c, r, n]`` = probability of new spin ``n`` given old ``(l, c, r)``; index 0 <-> +1."""
    s = np.array([1.0, -1.0])
    drift = K * (s[:, None, None] + s[None, None, :]) + params.drift_c * s[None, :, None]
    return gauss_cdf(s[None, None, None, :] * drift[..., None] / params.noise_scale)


def exact_ring_step(params, K, dist, backend=None):
    dist, N = _ring_size(dist)
    return kernels.ring_step(dist, ring_kernel_table(params, K), N, backend=backend)


def ring_gibbs_weights(K, n_sites):
    """Unnormalised weights ``exp(K sum_i s_i s_{i+1})``; they sum to the ring partition function."""
    _check_ring_sites(n_sites)
    if K < 0:
        raise DomainError("K must be >= 0")
    ranks = np.arange(1 << n_sites, dtype=np.int64)
    rotated = (ranks >> 1) | ((ranks & 1) << (n_sites - 1))
    walls = np.bitwise_count(ranks ^ rotated).astype(float)
    return np.exp(K * (n_sites - 2.0 * walls))


def gibbs_initial_distribution(K, n_sites):
    w = ring_gibbs_weights(K, n_sites)
    return w / w.sum()


def point_mass_distribution(spins):
    spins = list(spins)
    _check_ring_sites(len(spins))
    out = np.zeros(1 << len(spins))
    out[spin_rank(spins)] = 1.0
    return out


def site_marginal(dist, sites):
    """Joint law of the spins at ``sites`` (in the given order) in binary-sort order."""
    dist, N = _ring_size(dist)
    sites = [int(s) for s in sites]
    if not sites or any(not 0 <= s < N for s in sites):
        raise DomainError(f"sites must lie in 0..{N - 1}")
    if len(set(sites)) != len(sites):
        raise DomainError("sites must be distinct")
    ranks = np.arange(1 << N, dtype=np.int64)
    key = np.zeros_like(ranks)
    for k, s in enumerate(sites):
        key |= ((ranks >> s) & 1) << k
    return np.bincount(key, weights=dist, minlength=1 << len(sites))


def _ring_distance(a, b, N):
    d = abs(a - b) % N
    return min(d, N - d)


def window_sites(sites, N):
    sites = [int(s) for s in sites]
    for a in range(len(sites)):
        for b in range(a + 1, len(sites)):
            if _ring_distance(sites[a], sites[b], N) < 3:
                raise DomainError("observed sites must be pairwise at ring distance >= 3")
    return [w % N for s in sites for w in (s - 1, s, s + 1)]


def window_marginal(dist, sites):
    """Law of the concatenated windows ``(x_k - 1, x_k, x_k + 1)``, length ``2**(3m)``."""
    dist, N = _ring_size(dist)
    return site_marginal(dist, window_sites(sites, N))


@dataclass(frozen=True)
class EvolveResult:
    """Observables after ``t = 0..T`` steps; ``k_values[t]`` is the coupling of step ``t -> t+1``."""

    times: np.ndarray
    k_values: np.ndarray
    marginals: np.ndarray
    s_hat: np.ndarray
    s_tilde: np.ndarray
    s: np.ndarray
    mean: np.ndarray
    connected: np.ndarray
    limit: tuple
    final: np.ndarray

    @property
    def gap(self):
        return abs(self.s[-1] - self.limit[2])


def observables_from_marginal(table, marginal):
    """``(<F log F>, <F> log <F>, <F>)`` for ``F = table[word]``."""
    mean = float(table @ marginal)
    return float(xlogx(table) @ marginal), float(xlogx(mean)), mean


def connected_from_marginal(marginal):
    """Connected correlation of the first two observed spins."""
    m = marginal.shape[0].bit_length() - 1
    if m < 2:
        return float("nan")
    ranks = np.arange(marginal.shape[0])
    s1 = 1 - 2 * (ranks & 1)
    s2 = 1 - 2 * ((ranks >> 1) & 1)
    return float(marginal @ (s1 * s2) - (marginal @ s1) * (marginal @ s2))


def table_limit(table):
    """Decorrelated limit ``(mean(F log F), mean(F) log mean(F), difference)`` under fair independent spins."""
    s_hat = float(np.mean(xlogx(table)))
    s_tilde = float(xlogx(np.mean(table)))
    return s_hat, s_tilde, s_hat - s_tilde


def exact_ring_evolve(params, schedule, init, T, sites, table, backend=None):
    """Evolve ``init`` for ``T`` steps with ``K_t`` from ``schedule`` and track observables at ``sites``."""
    dist, N = _ring_size(init)
    table = _check_table(table)
    m = table.shape[0].bit_length() - 1
    if len(sites) != m:
        raise DomainError(f"table of length {table.shape[0]} needs {m} sites, got {len(sites)}")
    if T < 0:
        raise DomainError("T must be >= 0")
    ks = schedule.values(T)
    marginals = np.empty((T + 1, 1 << m))
    cur = dist.copy()
    for t in range(T + 1):
        marginals[t] = site_marginal(cur, sites)
        if t < T:
            cur = kernels.ring_step(cur, ring_kernel_table(params, ks[t]), N, backend=backend)
    obs = np.array([observables_from_marginal(table, p) for p in marginals])
    s_hat, s_tilde, mean = obs[:, 0], obs[:, 1], obs[:, 2]
    connected = np.array([connected_from_marginal(p) for p in marginals])
    return EvolveResult(
        times=np.arange(T + 1),
        k_values=ks,
        marginals=marginals,
        s_hat=s_hat,
        s_tilde=s_tilde,
        s=s_hat - s_tilde,
        mean=mean,
        connected=connected,
        limit=table_limit(table),
        final=cur,
    )
