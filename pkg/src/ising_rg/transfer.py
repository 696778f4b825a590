"""Transfer-matrix engine for the nearest-neighbour Ising chain.

Closed forms for the spectrum, partition functions, the two-point
correlation, the entropy-like two-point observables on the ring and with
fixed boundary spins, plus brute-force enumeration oracles on small chains.

Observables are specified through the squared values of the site functions:
an :class:`ObservableFn` stores ``f(+1)**2`` and ``f(-1)**2``.  For
``F = f^2(s_i) g^2(s_j)`` the observable pair is ``s_hat = <F log F>`` and
``s_tilde = <F> log <F>``.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import DomainError, ResourceError, UnsupportedRegimeError
from .numerics import xlogx

MAX_ENUMERATION_SITES = 22


@dataclass(frozen=True)
class Coupling:
    """Dimensionless couplings ``K = beta*J`` and ``h = beta*H`` and the offset ``gamma``."""

    K: float
    h: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        for name in ("K", "h", "gamma"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if self.K < 0:
            raise DomainError(f"K must be >= 0, got {self.K}")


@dataclass(frozen=True)
class TransferSpectrum:
    lambda_plus: float
    lambda_minus: float
    angle_phi: float

    @property
    def ratio(self):
        return self.lambda_minus / self.lambda_plus


@dataclass(frozen=True)
class ObservableFn:
    """Squared site function: ``v_plus = f(+1)**2``, ``v_minus = f(-1)**2``."""

    v_plus: float
    v_minus: float

    def __post_init__(self):
        if not (math.isfinite(self.v_plus) and math.isfinite(self.v_minus)):
            raise DomainError("observable values must be finite")
        if self.v_plus < 0 or self.v_minus < 0:
            raise DomainError("squared observable values must be >= 0")
        if self.v_plus + self.v_minus <= 0:
            raise DomainError("observable must not vanish at both spin values")

    @classmethod
    def coerce(cls, obj):
        if isinstance(obj, cls):
            return obj
        v_plus, v_minus = obj
        return cls(float(v_plus), float(v_minus))

    def __call__(self, spin):
        return self.v_plus if spin == 1 else self.v_minus

    def flipped(self):
        return ObservableFn(self.v_minus, self.v_plus)

    def as_array(self):
        """Values indexed by the spin bit (0 for +1, 1 for -1)."""
        return np.array([self.v_plus, self.v_minus])


@dataclass(frozen=True)
class ObservableConstants:
    a: float
    b: float
    c: float
    d: float
    A: float
    B: float
    c2_12: float
    c4_12: float
    delta_bar: float
    delta_hat: float
    delta_tilde: float
    ta: float
    tb: float
    tc: float
    td: float

    @property
    def weights(self):
        """``(a, b, c, d)`` in new-spin binary-sort order."""
        return np.array([self.a, self.b, self.c, self.d])

    @property
    def tilde_weights(self):
        return np.array([self.ta, self.tb, self.tc, self.td])

    @property
    def q_limit(self):
        """``<F>`` between independent fair spins, ``c4_12 * c2_12 / 4``."""
        return self.c4_12 * self.c2_12 / 4.0


@dataclass(frozen=True)
class TwoPointObservable:
    s_hat: float
    s_tilde: float

    @property
    def s(self):
        return self.s_hat - self.s_tilde


@dataclass(frozen=True)
class ObservableOperator:
    """Site-insertion matrices ``C^1..C^4`` and their rotations ``O C O^T``."""

    C: tuple
    C_hat: tuple


@dataclass(frozen=True)
class BoundaryLimitSet:
    """Thermodynamic limits under the four fixed boundary conditions.

    Index ``k`` of ``s_hat``/``s_tilde`` follows the boundary order
    ``(s_0, s_{N+1}) = (+,+), (-,+), (+,-), (-,-)``.  The ``m*``, ``l*`` and
    ``r*`` entries are the ``M``, ``L``, ``R`` products already multiplied by
    ``lambda_plus**-(j+1)`` so they stay finite for far-away sites.
    """

    s_hat: tuple
    s_tilde: tuple
    m11: float
    m21: float
    l11: float
    l21: float
    r11: float
    r21: float
    r_hat_1: float
    r_hat_2: float


BOUNDARIES = ((1, 1), (-1, 1), (1, -1), (-1, -1))


def _require_zero_field(c):
    if c.h != 0:
        raise UnsupportedRegimeError("observables are only available at h = 0")


def transfer_spectrum(c):
    K, h = c.K, c.h
    if h == 0:
        # e^K +- e^-K written through cosh/sinh to keep lambda_minus exact near K = 0
        return TransferSpectrum(2.0 * math.cosh(K), 2.0 * math.sinh(K), -math.pi / 4)
    root = math.sqrt(math.sinh(h) ** 2 + math.exp(-4.0 * K))
    lp = math.exp(K) * (math.cosh(h) + root)
    # cosh h - root = (1 - e^{-4K}) / (cosh h + root), no cancellation
    lm = math.exp(K) * (-math.expm1(-4.0 * K)) / (math.cosh(h) + root)
    phi = 0.5 * math.atan(math.exp(-2.0 * K) / math.sinh(h))
    return TransferSpectrum(lp, lm, phi)


def transfer_matrix(c):
    """Symmetric 2x2 matrix ``exp(K s s' + h (s + s') / 2)``, index 0 <-> +1."""
    K, h = c.K, c.h
    return np.array([[math.exp(K + h), math.exp(-K)], [math.exp(-K), math.exp(K - h)]])


def partition_function(c, N):
    """Periodic-ring partition function ``lambda_+^N + lambda_-^N``."""
    if N < 1:
        raise DomainError("N must be >= 1")
    sp = transfer_spectrum(c)
    return sp.lambda_plus**N + sp.lambda_minus**N


def correlation_two_point(c, d):
    """Connected two-point function ``sin^2(2 phi) (lambda_-/lambda_+)^d`` in the infinite chain."""
    if d < 0:
        raise DomainError("distance must be >= 0")
    sp = transfer_spectrum(c)
    if c.h == 0:
        prefactor = 1.0
    else:
        e4 = math.exp(-4.0 * c.K)
        prefactor = e4 / (math.sinh(c.h) ** 2 + e4)
    return prefactor * sp.ratio**d


def observable_constants(f, g):
    f = ObservableFn.coerce(f)
    g = ObservableFn.coerce(g)
    fp, fm, gp, gm = f.v_plus, f.v_minus, g.v_plus, g.v_minus
    ta, tb, tc, td = fp * gp, fm * gp, fp * gm, fm * gm
    a, b, cc, d = (float(xlogx(v)) for v in (ta, tb, tc, td))
    return ObservableConstants(
        a=a,
        b=b,
        c=cc,
        d=d,
        A=a + b + cc + d,
        B=a - b - cc + d,
        c2_12=gp + gm,
        c4_12=fp + fm,
        delta_bar=(fp - fm) * (gp - gm),
        delta_hat=(float(xlogx(fp)) - float(xlogx(fm))) * (gp - gm),
        delta_tilde=(float(xlogx(gp)) - float(xlogx(gm))) * (fp - fm),
        ta=ta,
        tb=tb,
        tc=tc,
        td=td,
    )


def observable_from_ratio(consts, rho):
    """Ring observables given ``rho = (lambda_-/lambda_+)^d``."""
    s_hat = consts.A / 4.0 + consts.B / 4.0 * rho
    q = consts.q_limit + consts.delta_bar / 4.0 * rho
    return TwoPointObservable(s_hat, float(xlogx(q)))


def two_point_observable(c, f, g, d):
    """Infinite-ring limits of ``<F log F>`` and ``<F> log <F>`` at distance ``d``."""
    _require_zero_field(c)
    if d < 1:
        raise DomainError("distance must be >= 1")
    consts = observable_constants(f, g)
    return observable_from_ratio(consts, transfer_spectrum(c).ratio**d)


def observable_operator(c, f, g):
    _require_zero_field(c)
    f = ObservableFn.coerce(f)
    g = ObservableFn.coerce(g)
    e2, em2 = math.exp(2.0 * c.K), math.exp(-2.0 * c.K)

    def insertion(up, down):
        return np.array([[up * e2 + down * em2, up + down], [up + down, up * em2 + down * e2]])

    C = (
        insertion(float(xlogx(f.v_plus)), float(xlogx(f.v_minus))),
        insertion(g.v_plus, g.v_minus),
        insertion(float(xlogx(g.v_plus)), float(xlogx(g.v_minus))),
        insertion(f.v_plus, f.v_minus),
    )
    C_hat = []
    for Ck in C:
        half_sum = 0.5 * (Ck[0, 0] + Ck[1, 1])
        half_diff = 0.5 * (Ck[0, 0] - Ck[1, 1])
        C_hat.append(
            np.array([[half_sum + Ck[0, 1], -half_diff], [-half_diff, half_sum - Ck[0, 1]]])
        )
    return ObservableOperator(C=C, C_hat=tuple(C_hat))


def free_energy_density(c):
    """Boundary-independent limit ``log(Z_N) / N -> log lambda_+``."""
    return math.log(transfer_spectrum(c).lambda_plus)


def fixed_boundary_partition(c, N, s0, sN1):
    """``<s0| P^(N+1) |sN1>`` for the open chain ``1..N`` with fixed end spins."""
    _require_zero_field(c)
    if N < 1:
        raise DomainError("N must be >= 1")
    for s in (s0, sN1):
        if s not in (1, -1):
            raise DomainError("boundary spins must be +1 or -1")
    sp = transfer_spectrum(c)
    sign = 1.0 if s0 == sN1 else -1.0
    return 0.5 * (sp.lambda_plus ** (N + 1) + sign * sp.lambda_minus ** (N + 1))


def boundary_limit_observables(c, f, g, i, j):
    """``N -> infinity`` observables for the chain ``1..N`` with fixed spins at 0 and N+1."""
    _require_zero_field(c)
    if i < 1 or j <= i:
        raise DomainError("need 1 <= i < j")
    if j - i < 2:
        raise DomainError("need j - i >= 2 so a transfer block separates the insertions")
    sp = transfer_spectrum(c)
    ops = observable_operator(c, f, g)
    C1, C2, C3, C4 = ops.C_hat
    rho = sp.ratio

    def diag(n):
        return np.diag([1.0, rho**n])

    # lambda_+^-(j+1) times the products; the diagonal blocks are normalised by lambda_+
    scale = sp.lambda_plus**-4
    pre, mid = diag(i - 1), diag(j - i - 2)
    M = scale * pre @ C1 @ mid @ C2
    L = scale * pre @ C4 @ mid @ C3
    R = scale * pre @ C4 @ mid @ C2

    hat_plus = float(L[0, 0] - L[1, 0] + M[0, 0] - M[1, 0])
    hat_minus = float(L[0, 0] + L[1, 0] + M[0, 0] + M[1, 0])
    r1 = float(xlogx(R[0, 0] - R[1, 0]))
    r2 = float(xlogx(R[0, 0] + R[1, 0]))
    return BoundaryLimitSet(
        s_hat=(hat_plus, hat_minus, hat_plus, hat_minus),
        s_tilde=(r1, r2, r1, r2),
        m11=float(M[0, 0]),
        m21=float(M[1, 0]),
        l11=float(L[0, 0]),
        l21=float(L[1, 0]),
        r11=float(R[0, 0]),
        r21=float(R[1, 0]),
        r_hat_1=r1,
        r_hat_2=r2,
    )


# --- enumeration oracles -------------------------------------------------------


def _check_enumeration_size(N):
    if N < 1:
        raise DomainError("N must be >= 1")
    if N > MAX_ENUMERATION_SITES:
        raise ResourceError(f"enumeration capped at N = {MAX_ENUMERATION_SITES}, got {N}")


def _ring_counts(N, sites):
    """Integer histogram of ring configurations by (domain walls, down spins, spins at ``sites``).

    Returns ``(counts, walls, downs, site_bits)`` with ``counts`` of shape
    ``(N+1, N+1, 2**len(sites))``.
    """
    ranks = np.arange(1 << N, dtype=np.int64)
    mask = (1 << N) - 1
    rotated = ((ranks >> 1) | ((ranks & 1) << (N - 1))) & mask
    walls = np.bitwise_count(ranks ^ rotated).astype(np.int64)
    downs = np.bitwise_count(ranks).astype(np.int64)
    key = np.zeros_like(ranks)
    for k, site in enumerate(sites):
        key |= ((ranks >> site) & 1) << k
    n_site_states = 1 << len(sites)
    flat = (walls * (N + 1) + downs) * n_site_states + key
    counts = np.bincount(flat, minlength=(N + 1) * (N + 1) * n_site_states)
    return counts.reshape(N + 1, N + 1, n_site_states)


def _ring_energies(c, N):
    walls = np.arange(N + 1)
    downs = np.arange(N + 1)
    bond = c.K * (N - 2 * walls)
    field = c.h * (N - 2 * downs)
    return bond[:, None] + field[None, :]


def brute_force_partition(c, N):
    """Sum of Boltzmann weights over all ``2**N`` periodic configurations."""
    _check_enumeration_size(N)
    if N == 1:
        # a single site bonded to itself
        return math.exp(c.K + c.h) + math.exp(c.K - c.h)
    counts = _ring_counts(N, ())[:, :, 0]
    return float(np.sum(counts * np.exp(_ring_energies(c, N))))


def _site_pair_law(c, N, i, j):
    """Joint law of ``(s_i, s_j)`` (1-based sites) on the ring, indexed by binary sort."""
    _check_enumeration_size(N)
    if not (1 <= i <= N and 1 <= j <= N) or i == j:
        raise DomainError("sites must be distinct and within 1..N")
    if N < 2:
        raise DomainError("need N >= 2")
    counts = _ring_counts(N, (i - 1, j - 1))
    energies = _ring_energies(c, N)
    weights = np.exp(energies - energies.max())
    mass = np.einsum("wds,wd->s", counts.astype(float), weights)
    return mass / mass.sum()


def _observable_from_pair_law(law, f, g):
    f = ObservableFn.coerce(f)
    g = ObservableFn.coerce(g)
    # binary-sort order of (s_i, s_j): (+,+), (-,+), (+,-), (-,-)
    F = np.array([f.v_plus * g.v_plus, f.v_minus * g.v_plus, f.v_plus * g.v_minus, f.v_minus * g.v_minus])
    mean_F = float(law @ F)
    return TwoPointObservable(float(law @ xlogx(F)), float(xlogx(mean_F)))


def finite_ring_observable(c, f, g, i, j, N):
    """Exact ``<F log F>`` and ``<F> log <F>`` on the periodic ring of ``N`` sites."""
    if not 1 <= i < j <= N:
        raise DomainError("need 1 <= i < j <= N")
    return _observable_from_pair_law(_site_pair_law(c, N, i, j), f, g)


def finite_ring_correlation(c, N, i, j, connected=True):
    """``<s_i s_j>`` (minus ``<s_i><s_j>`` when ``connected``) by enumeration."""
    law = _site_pair_law(c, N, i, j)
    spins = np.array([[1, 1], [-1, 1], [1, -1], [-1, -1]])
    prod = float(law @ (spins[:, 0] * spins[:, 1]))
    if not connected:
        return prod
    return prod - float(law @ spins[:, 0]) * float(law @ spins[:, 1])


def _open_chain_walls(N, s0, sN1):
    for s in (s0, sN1):
        if s not in (1, -1):
            raise DomainError("boundary spins must be +1 or -1")
    ranks = np.arange(1 << N, dtype=np.int64)
    inner = np.bitwise_count((ranks ^ (ranks >> 1)) & ((1 << (N - 1)) - 1)).astype(np.int64)
    first = (ranks & 1) ^ (0 if s0 == 1 else 1)
    last = ((ranks >> (N - 1)) & 1) ^ (0 if sN1 == 1 else 1)
    return ranks, inner + first + last


def _open_chain_pair_law(c, N, i, j, s0, sN1):
    _check_enumeration_size(N)
    if not 1 <= i < j <= N:
        raise DomainError("need 1 <= i < j <= N")
    ranks, walls = _open_chain_walls(N, s0, sN1)
    key = ((ranks >> (i - 1)) & 1) | (((ranks >> (j - 1)) & 1) << 1)
    counts = np.bincount(walls * 4 + key, minlength=(N + 2) * 4).reshape(N + 2, 4)
    energy = c.K * ((N + 1) - 2 * np.arange(N + 2))
    mass = counts.T.astype(float) @ np.exp(energy - energy.max())
    return mass / mass.sum()


def finite_open_chain_observable(c, f, g, i, j, N, s0, sN1):
    """Exact observables on the chain ``1..N`` with fixed spins ``s0`` at 0 and ``sN1`` at N+1."""
    _require_zero_field(c)
    return _observable_from_pair_law(_open_chain_pair_law(c, N, i, j, s0, sN1), f, g)


def brute_force_fixed_boundary_partition(c, N, s0, sN1):
    """Enumeration of the open-chain partition function with fixed end spins."""
    _check_enumeration_size(N)
    _, walls = _open_chain_walls(N, s0, sN1)
    counts = np.bincount(walls, minlength=N + 2)
    return float(np.sum(counts * np.exp(c.K * ((N + 1) - 2 * np.arange(N + 2)))))
