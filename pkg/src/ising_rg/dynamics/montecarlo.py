"""Monte Carlo simulation of the synchronous dynamics on large rings.

Replica ``r`` draws everything from its own stream
``Generator(PCG64(SeedSequence([seed, r])))``: first ``N`` uniforms for the
initial Gibbs sample, then a ``(T, N)`` block of standard normals.  Results
therefore do not depend on the block size or the backend.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .. import kernels
from ..errors import DomainError, ResourceError
from ..numerics import xlogx
from .ring import table_limit
from .window import _check_table

DEFAULT_BLOCK = 256


def _replica_stream(seed, r):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(r)])))


def gibbs_from_uniforms(K, u):
    """Ring Gibbs samples from uniforms ``u`` of shape ``(R, N)`` by sequential conditioning.

    Site 0 is a fair coin.  Site ``k+1`` given site ``k = p`` and site ``0 = a``
    has weight ``exp(K p s) (1 + s a tanh(K)**(N-k-1))``, the last factor
    coming from the transfer matrix of the bonds that close the ring.
    """
    u = np.asarray(u, dtype=float)
    R, N = u.shape
    spins = np.empty((R, N), dtype=np.int8)
    spins[:, 0] = np.where(u[:, 0] < 0.5, 1, -1)
    if K == 0:
        spins[:, 1:] = np.where(u[:, 1:] < 0.5, 1, -1)
        return spins
    log_t = math.log1p(-2.0 / (math.exp(2.0 * K) + 1.0))
    a = spins[:, 0].astype(float)
    for k in range(N - 1):
        n = N - k - 1
        tn = math.exp(n * log_t)
        one_minus = -math.expm1(n * log_t)
        p = spins[:, k].astype(float)
        w_up = np.where(a > 0, 1.0 + tn, one_minus)
        w_down = np.where(a > 0, one_minus, 1.0 + tn)
        with np.errstate(over="ignore", divide="ignore"):
            prob_up = 1.0 / (1.0 + np.exp(-2.0 * K * p) * w_down / w_up)
        spins[:, k + 1] = np.where(u[:, k + 1] < prob_up, 1, -1)
    return spins


def gibbs_sample(K, n_sites, seed):
    """One exact sample of the ring Gibbs measure ``exp(K sum s_i s_{i+1})``."""
    if n_sites < 3:
        raise DomainError("ring needs at least 3 sites")
    if not (math.isfinite(K) and K >= 0):
        raise DomainError("K must be finite and >= 0")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))
    return gibbs_from_uniforms(K, rng.random((1, n_sites)))[0]


def mc_step(params, K, state, noise):
    """Synchronous update of every site; ``noise`` is an array of standard normals or a Generator."""
    state = np.asarray(state, dtype=np.int8)
    N = state.shape[0]
    if N < 3 or not np.all(np.abs(state) == 1):
        raise DomainError("state must be a ring of at least 3 spins in {+1, -1}")
    if isinstance(noise, np.random.Generator):
        noise = noise.standard_normal(N)
    noise = np.asarray(noise, dtype=float).reshape(1, 1, N)
    rec = kernels.sync_run(
        state[None, :], noise, np.array([K]), params.drift_c, params.noise_scale, np.arange(N), np.array([1])
    )
    return rec[0, 0]


@dataclass(frozen=True)
class SimulationResult:
    """Per-checkpoint estimates and standard errors; keys ``s_hat, s_tilde, s, mean, connected``."""

    checkpoints: np.ndarray
    k_values: np.ndarray
    replicas: int
    n_sites: int
    sites: tuple
    estimates: dict = field(repr=False)
    stderr: dict = field(repr=False)
    limit: tuple = ()


def _stderr(x):
    if x.shape[0] < 2:
        return np.full(x.shape[1:], np.nan)
    return np.std(x, axis=0, ddof=1) / math.sqrt(x.shape[0])


def estimate_from_record(record, table):
    """Estimates from observed spins of shape ``(R, n_checkpoints, m)``."""
    R, _, m = record.shape
    ranks = ((record < 0).astype(np.int64) << np.arange(m)).sum(axis=2)
    F = table[ranks]
    FlogF = xlogx(F)
    F_bar = F.mean(axis=0)
    est = {"s_hat": FlogF.mean(axis=0), "mean": F_bar, "s_tilde": xlogx(F_bar)}
    est["s"] = est["s_hat"] - est["s_tilde"]
    with np.errstate(divide="ignore"):
        slope = np.where(F_bar > 0, np.log(np.where(F_bar > 0, F_bar, 1.0)) + 1.0, 0.0)
    se = {"s_hat": _stderr(FlogF), "mean": _stderr(F)}
    se["s_tilde"] = np.abs(slope) * se["mean"]
    se["s"] = _stderr(FlogF - slope * F)
    if m >= 2:
        p1 = record[:, :, 0].astype(float)
        p2 = record[:, :, 1].astype(float)
        m1, m2 = p1.mean(axis=0), p2.mean(axis=0)
        est["connected"] = (p1 * p2).mean(axis=0) - m1 * m2
        se["connected"] = _stderr(p1 * p2 - m2 * p1 - m1 * p2)
    return est, se


def mc_simulate(
    params,
    schedule,
    n_sites,
    T,
    replicas,
    seed,
    sites,
    table,
    checkpoints=None,
    init="gibbs",
    init_k=None,
    block=DEFAULT_BLOCK,
    budget=None,
    backend=None,
):
    """Monte Carlo estimates of the observables at ``sites`` after ``t`` steps for ``t`` in ``checkpoints``.

    ``init`` is ``"gibbs"`` (ring Gibbs measure at ``init_k``, default the
    schedule's first coupling) or a fixed spin configuration.  ``budget``
    caps ``n_sites * T * replicas``.
    """
    table = _check_table(table)
    m = table.shape[0].bit_length() - 1
    sites = tuple(int(s) for s in sites)
    if n_sites < 3:
        raise DomainError("ring needs at least 3 sites")
    if len(sites) != m:
        raise DomainError(f"table of length {table.shape[0]} needs {m} sites, got {len(sites)}")
    if any(not 0 <= s < n_sites for s in sites) or len(set(sites)) != m:
        raise DomainError(f"sites must be distinct and lie in 0..{n_sites - 1}")
    if replicas < 1 or T < 0 or block < 1:
        raise DomainError("need replicas >= 1, T >= 0 and block >= 1")
    if budget is not None and n_sites * max(T, 1) * replicas > budget:
        raise ResourceError(f"N*T*replicas = {n_sites * max(T, 1) * replicas} exceeds the budget {budget}")
    checkpoints = np.arange(T + 1) if checkpoints is None else np.unique(np.asarray(checkpoints, dtype=np.int64))
    if checkpoints.size == 0 or checkpoints[0] < 0 or checkpoints[-1] > T:
        raise DomainError("checkpoints must lie in 0..T")

    ks = schedule.values(T)
    if isinstance(init, str):
        if init != "gibbs":
            raise DomainError(f"unknown initial distribution {init!r}")
        fixed = None
        k_init = schedule.k0 if init_k is None else float(init_k)
    else:
        fixed = np.asarray(init, dtype=np.int8)
        if fixed.shape != (n_sites,) or not np.all(np.abs(fixed) == 1):
            raise DomainError("fixed initial state must have n_sites spins in {+1, -1}")

    records = []
    for start in range(0, replicas, block):
        stop = min(start + block, replicas)
        uniforms = np.empty((stop - start, n_sites))
        noise = np.empty((stop - start, T, n_sites))
        for j, r in enumerate(range(start, stop)):
            rng = _replica_stream(seed, r)
            uniforms[j] = rng.random(n_sites)
            noise[j] = rng.standard_normal((T, n_sites))
        if fixed is None:
            spins = gibbs_from_uniforms(k_init, uniforms)
        else:
            spins = np.broadcast_to(fixed, (stop - start, n_sites))
        records.append(
            kernels.sync_run(
                spins, noise, ks, params.drift_c, params.noise_scale, np.array(sites), checkpoints, backend=backend
            )
        )
    est, se = estimate_from_record(np.concatenate(records, axis=0), table)
    return SimulationResult(
        checkpoints=checkpoints,
        k_values=ks,
        replicas=replicas,
        n_sites=n_sites,
        sites=sites,
        estimates=est,
        stderr=se,
        limit=table_limit(table),
    )
