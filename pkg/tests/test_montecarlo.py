import math

import numpy as np
import pytest
from scipy import stats

from conftest import PHI_1
from ising_rg.dynamics import (
    DynamicsParams,
    Schedule,
    exact_ring_evolve,
    gibbs_initial_distribution,
    gibbs_sample,
    mc_simulate,
    mc_step,
    two_point_table,
)
from ising_rg.dynamics.montecarlo import estimate_from_record, gibbs_from_uniforms
from ising_rg.errors import DomainError, ResourceError

P0 = DynamicsParams()
TABLE_21 = two_point_table((2, 1), (2, 1))


def _ranks(samples):
    return ((samples < 0).astype(np.int64) << np.arange(samples.shape[1])).sum(axis=1)


def test_gibbs_k0_uniform():
    u = np.random.default_rng(11).random((100_000, 8))
    counts = np.bincount(_ranks(gibbs_from_uniforms(0.0, u)), minlength=256)
    assert stats.chisquare(counts).pvalue > 1e-3


@pytest.mark.parametrize("K", [0.4, 1.5])
def test_gibbs_matches_exact_law(K):
    N = 6
    u = np.random.default_rng(5).random((200_000, N))
    counts = np.bincount(_ranks(gibbs_from_uniforms(K, u)), minlength=1 << N)
    expected = gibbs_initial_distribution(K, N) * len(u)
    assert stats.chisquare(counts, expected).pvalue > 1e-3


def test_gibbs_pair_correlation_n64():
    N, K, R = 64, 1.0, 100_000
    u = np.random.default_rng(21).random((R, N))
    s = gibbs_from_uniforms(K, u).astype(float)
    pairs = (s * np.roll(s, -1, axis=1)).mean(axis=1)
    t = math.tanh(K)
    exact = (t + t ** (N - 1)) / (1 + t**N)
    assert abs(pairs.mean() - exact) <= 3 * pairs.std(ddof=1) / math.sqrt(R)


def test_gibbs_sample_determinism():
    a = gibbs_sample(0.8, 32, 1234)
    b = gibbs_sample(0.8, 32, 1234)
    assert np.array_equal(a, b)
    assert a.shape == (32,) and set(np.unique(a)) <= {-1, 1}
    assert not np.array_equal(a, gibbs_sample(0.8, 32, 1235))
    with pytest.raises(DomainError):
        gibbs_sample(0.8, 2, 0)


def test_mc_step_noise_dominated_is_fair():
    rng = np.random.default_rng(3)
    state = np.ones(100, dtype=np.int8)
    ups = sum(int((mc_step(DynamicsParams(gamma=1.0), 0.0, state, rng) > 0).sum()) for _ in range(1000))
    n = 100_000
    assert abs(ups / n - 0.5) <= 3 * math.sqrt(0.25 / n)


def test_mc_step_flip_frequency():
    rng = np.random.default_rng(8)
    state = gibbs_sample(0.0, 100, 1)
    flips, n = 0, 0
    for _ in range(1000):
        new = mc_step(P0, 0.0, state, rng)
        flips += int((new != state).sum())
        n += state.size
        state = new
    p = 1 - PHI_1
    assert abs(flips / n - p) <= 3 * math.sqrt(p * (1 - p) / n)


def test_mc_step_sign_at_zero_and_determinism():
    state = np.array([1, -1, 1, -1, -1], dtype=np.int8)
    assert np.all(mc_step(DynamicsParams(gamma=1.0), 0.0, state, np.zeros(5)) == 1)
    a = mc_step(P0, 0.4, state, np.random.default_rng(0))
    b = mc_step(P0, 0.4, state, np.random.default_rng(0))
    assert np.array_equal(a, b)
    with pytest.raises(DomainError):
        mc_step(P0, 0.4, np.array([1, 0, 1]), np.zeros(3))


def test_simulate_trivial_table_exact_zero():
    res = mc_simulate(P0, Schedule.geometric(0.5), 32, 10, 50, 1, [3, 9], two_point_table((1, 1), (1, 1)))
    assert np.all(res.estimates["s"] == 0)
    assert np.all(res.stderr["s"] == 0)


def test_simulate_backends_and_blocks_agree(backend):
    ref = mc_simulate(P0, Schedule.geometric(0.5), 40, 15, 300, 99, [5, 12], TABLE_21, backend="numpy", block=300)
    res = mc_simulate(P0, Schedule.geometric(0.5), 40, 15, 300, 99, [5, 12], TABLE_21, block=37)
    for key in ref.estimates:
        assert np.array_equal(ref.estimates[key], res.estimates[key])
        assert np.array_equal(ref.stderr[key], res.stderr[key])


def test_simulate_seed_changes_result():
    a = mc_simulate(P0, Schedule.constant(0.2), 20, 5, 100, 1, [0, 5], TABLE_21)
    b = mc_simulate(P0, Schedule.constant(0.2), 20, 5, 100, 2, [0, 5], TABLE_21)
    assert not np.array_equal(a.estimates["s_hat"], b.estimates["s_hat"])


def test_simulate_agrees_with_exact_ring():
    N, T, sites = 10, 6, [1, 4]
    sched = Schedule.geometric(0.8, 0.5)
    exact = exact_ring_evolve(P0, sched, gibbs_initial_distribution(0.8, N), T, sites, TABLE_21)
    mc = mc_simulate(P0, sched, N, T, 40_000, 2024, sites, TABLE_21, checkpoints=[0, 2, 6])
    for k, t in enumerate(mc.checkpoints):
        for key in ("s_hat", "s", "connected"):
            ref = getattr(exact, key)[t]
            assert abs(mc.estimates[key][k] - ref) <= 3 * mc.stderr[key][k], (key, t)


def test_simulate_point_mass_start():
    res = mc_simulate(P0, Schedule.constant(0.0), 16, 3, 20, 0, [2, 7], TABLE_21, checkpoints=[0], init=np.ones(16))
    assert res.estimates["s_hat"][0] == pytest.approx(4 * math.log(4))


def test_estimators_standard_errors():
    rng = np.random.default_rng(1)
    record = np.where(rng.random((500, 1, 2)) < 0.6, 1, -1).astype(np.int8)
    est, se = estimate_from_record(record, TABLE_21)
    F = TABLE_21[_ranks(record[:, 0, :])]
    assert est["s_hat"][0] == pytest.approx(np.mean(F * np.log(F)))
    assert se["s_hat"][0] == pytest.approx(np.std(F * np.log(F), ddof=1) / math.sqrt(500))
    assert est["s_tilde"][0] == pytest.approx(F.mean() * math.log(F.mean()))
    s1, s2 = record[:, 0, 0].astype(float), record[:, 0, 1].astype(float)
    assert est["connected"][0] == pytest.approx(np.mean(s1 * s2) - s1.mean() * s2.mean())


def test_simulate_validation():
    with pytest.raises(ResourceError):
        mc_simulate(P0, Schedule.constant(0.1), 100, 10, 100, 0, [1, 5], TABLE_21, budget=1000)
    with pytest.raises(DomainError):
        mc_simulate(P0, Schedule.constant(0.1), 10, 10, 10, 0, [1, 10], TABLE_21)
    with pytest.raises(DomainError):
        mc_simulate(P0, Schedule.constant(0.1), 10, 10, 10, 0, [1, 1], TABLE_21)
    with pytest.raises(DomainError):
        mc_simulate(P0, Schedule.constant(0.1), 10, 10, 10, 0, [1], TABLE_21)
    with pytest.raises(DomainError):
        mc_simulate(P0, Schedule.constant(0.1), 10, 10, 10, 0, [1, 4], TABLE_21, checkpoints=[11])
