"""Hot loops of the dynamics: the exact synchronous ring step and the Monte Carlo sweep.

Each kernel exists twice, as a numba ``@njit`` loop and as a pure-numpy
version.  ``ISING_RG_BACKEND=numpy`` forces the numpy path; otherwise numba is
used when it imports.  Both paths consume the same inputs (noise is drawn by
the caller) so Monte Carlo trajectories are identical across backends.
"""

import os

import numpy as np

from .errors import DomainError

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

BACKENDS = ("numba", "numpy")


def resolve_backend(backend=None):
    """Pick the backend: explicit argument, then ``ISING_RG_BACKEND``, then numba if available."""
    if backend is None:
        backend = os.environ.get("ISING_RG_BACKEND", "").strip().lower() or None
    if backend is None:
        return "numba" if HAVE_NUMBA else "numpy"
    if backend not in BACKENDS:
        raise DomainError(f"unknown backend {backend!r}; expected one of {BACKENDS}")
    if backend == "numba" and not HAVE_NUMBA:
        raise DomainError("numba backend requested but numba is not installed")
    return backend


# --- exact ring step ---------------------------------------------------------
#
# kernel[l, c, r, n] is the probability that a site with left/centre/right old
# spins (index 0 <-> +1) takes the new spin n.  The synchronous product kernel
# is applied one site at a time: after processing site i the low bits hold the
# new spins 0..i, the remaining bits the old ones, and two extra slots keep the
# old spin of site i (needed as the left neighbour of i+1) and the old spin of
# site 0 (needed as the right neighbour of site N-1).


def _ring_step_numpy(p, kernel, n_sites):
    N = n_sites
    old = list(range(N))
    new = [N + i for i in range(N)]
    t = p.reshape((2,) * N, order="F")
    labels = old[:]
    for i in range(N):
        left = old[i - 1] if i > 0 else old[N - 1]
        right = old[i + 1] if i < N - 1 else old[0]
        out = [new[i] if lab == old[i] else lab for lab in labels]
        if i == 0:
            out.append(old[0])
        elif i < N - 1:
            if old[i - 1] != old[0]:
                out.remove(old[i - 1])
            out.append(old[i])
        else:
            out = new[:]
        t = np.einsum(t, labels, kernel, [left, old[i], right, new[i]], out)
        labels = out
    return t.reshape(-1, order="F")


if HAVE_NUMBA:

    @njit(cache=True)
    def _ring_step_numba(p, kernel, n_sites):
        N = n_sites
        size = 1 << (N + 2)
        carry_bit = 1 << N
        z_bit = 1 << (N + 1)
        buf = np.zeros(size)
        # site 0: left is old site N-1, right old site 1; store o_0 as carry and z
        for s in range(1 << N):
            v = p[s]
            if v == 0.0:
                continue
            o0 = s & 1
            left = (s >> (N - 1)) & 1
            right = (s >> 1) & 1
            base = (s & ~1) | (o0 * carry_bit) | (o0 * z_bit)
            buf[base] += v * kernel[left, o0, right, 0]
            buf[base | 1] += v * kernel[left, o0, right, 1]
        for i in range(1, N - 1):
            nxt = np.zeros(size)
            bit = 1 << i
            for s in range(size):
                v = buf[s]
                if v == 0.0:
                    continue
                left = (s >> N) & 1
                c = (s >> i) & 1
                right = (s >> (i + 1)) & 1
                base = (s & ~bit & ~carry_bit) | (c * carry_bit)
                nxt[base] += v * kernel[left, c, right, 0]
                nxt[base | bit] += v * kernel[left, c, right, 1]
            buf = nxt
        out = np.zeros(1 << N)
        i = N - 1
        bit = 1 << i
        low = (1 << N) - 1
        for s in range(size):
            v = buf[s]
            if v == 0.0:
                continue
            left = (s >> N) & 1
            c = (s >> i) & 1
            right = (s >> (N + 1)) & 1
            base = s & low & ~bit
            out[base] += v * kernel[left, c, right, 0]
            out[base | bit] += v * kernel[left, c, right, 1]
        return out


def ring_step(p, kernel, n_sites, backend=None):
    """One synchronous step of a ring distribution in binary-sort order (``n_sites >= 3``)."""
    p = np.ascontiguousarray(p, dtype=np.float64)
    kernel = np.ascontiguousarray(kernel, dtype=np.float64)
    if resolve_backend(backend) == "numba":
        return _ring_step_numba(p, kernel, n_sites)
    return _ring_step_numpy(p, kernel, n_sites)


# --- Monte Carlo sweeps ------------------------------------------------------
#
# spins: (R, N) int8 initial states; noise: (R, T, N) standard normals;
# ks: (T,) couplings per step.  Step t maps state t to state t+1 with
# new_i = sign(K_t (s_{i-1} + s_{i+1}) + drift_c s_i + scale xi_i), sign(0) = +1.
# The returned record holds the spins at `sites` after each step in `checkpoints`
# (0 means the initial state).


def _sync_run_numpy(spins, noise, ks, drift_c, scale, sites, checkpoints):
    R = spins.shape[0]
    record = np.empty((R, len(checkpoints), len(sites)), dtype=np.int8)
    s = spins.astype(np.int8, copy=True)
    ck = 0
    if len(checkpoints) and checkpoints[0] == 0:
        record[:, 0, :] = s[:, sites]
        ck = 1
    for t in range(len(ks)):
        nb = (np.roll(s, 1, axis=1) + np.roll(s, -1, axis=1)).astype(np.float64)
        field = ks[t] * nb + drift_c * s + scale * noise[:, t, :]
        s = np.where(field >= 0.0, 1, -1).astype(np.int8)
        if ck < len(checkpoints) and checkpoints[ck] == t + 1:
            record[:, ck, :] = s[:, sites]
            ck += 1
    return record


if HAVE_NUMBA:

    @njit(cache=True)
    def _sync_run_numba(spins, noise, ks, drift_c, scale, sites, checkpoints):
        R, N = spins.shape
        T = ks.shape[0]
        n_ck = checkpoints.shape[0]
        m = sites.shape[0]
        record = np.empty((R, n_ck, m), dtype=np.int8)
        cur = np.empty(N, dtype=np.int8)
        nxt = np.empty(N, dtype=np.int8)
        for rep in range(R):
            for i in range(N):
                cur[i] = spins[rep, i]
            ck = 0
            if n_ck > 0 and checkpoints[0] == 0:
                for k in range(m):
                    record[rep, 0, k] = cur[sites[k]]
                ck = 1
            for t in range(T):
                K = ks[t]
                for i in range(N):
                    nb = float(cur[i - 1 if i > 0 else N - 1] + cur[i + 1 if i < N - 1 else 0])
                    field = K * nb + drift_c * cur[i] + scale * noise[rep, t, i]
                    nxt[i] = 1 if field >= 0.0 else -1
                for i in range(N):
                    cur[i] = nxt[i]
                if ck < n_ck and checkpoints[ck] == t + 1:
                    for k in range(m):
                        record[rep, ck, k] = cur[sites[k]]
                    ck += 1
        return record


def sync_run(spins, noise, ks, drift_c, scale, sites, checkpoints, backend=None):
    """Run synchronous sign-threshold dynamics on a block of replicas; see module notes."""
    spins = np.ascontiguousarray(spins, dtype=np.int8)
    noise = np.ascontiguousarray(noise, dtype=np.float64)
    ks = np.ascontiguousarray(ks, dtype=np.float64)
    sites = np.ascontiguousarray(sites, dtype=np.int64)
    checkpoints = np.ascontiguousarray(checkpoints, dtype=np.int64)
    if resolve_backend(backend) == "numba":
        return _sync_run_numba(spins, noise, ks, float(drift_c), float(scale), sites, checkpoints)
    return _sync_run_numpy(spins, noise, ks, float(drift_c), float(scale), sites, checkpoints)
