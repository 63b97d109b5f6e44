import numpy as np
import pytest

from gibbs_sampling import RandomWalkProposal, hpd_interval, metropolis_hastings


def test_hpd_of_uniform_grid():
    assert hpd_interval(np.arange(1.0, 101.0), 0.95) == (1.0, 95.0)
    lo, hi = hpd_interval(np.arange(1.0, 101.0)[::-1], 0.5)
    assert hi - lo == 49.0


def test_hpd_is_shortest_for_skewed_samples(rng):
    x = rng.exponential(1.0, 20000)
    lo, hi = hpd_interval(x, 0.9)
    # for the exponential the shortest 90% interval starts at 0 and ends at -log(0.1)
    assert lo < 0.01
    assert hi == pytest.approx(-np.log(0.1), abs=0.08)
    q_lo, q_hi = np.quantile(x, [0.05, 0.95])
    assert hi - lo < q_hi - q_lo


def test_hpd_edge_cases():
    assert hpd_interval([2.5], 0.95) == (2.5, 2.5)
    with pytest.raises(ValueError):
        hpd_interval([], 0.95)
    with pytest.raises(ValueError):
        hpd_interval([1.0, 2.0], 1.5)


def test_metropolis_hastings_samples_a_normal_target(rng):
    proposal = RandomWalkProposal(np.eye(1))

    def log_target(x):
        return -0.5*float(x @ x)

    x = np.zeros(1)
    lt = log_target(x)
    samples = np.empty(20000)
    accepted = 0
    for i in range(samples.size):
        x, acc, lt = metropolis_hastings(x, lt, log_target, proposal, rng)
        samples[i] = x[0]
        accepted += acc
    assert abs(samples.mean()) < 0.1
    assert samples.var() == pytest.approx(1.0, abs=0.15)
    assert 0.5 < accepted/samples.size < 0.9


def test_non_finite_candidates_are_rejected(rng):
    proposal = RandomWalkProposal(0.04*np.eye(2))
    x = np.array([0.5, 0.3])
    for log_target in (lambda y: -np.inf, lambda y: np.nan):
        nxt, accepted, lt = metropolis_hastings(x, -1.0, log_target, proposal, rng)
        assert not accepted
        assert nxt is x
        assert lt == -1.0


def test_uphill_moves_are_accepted(rng):
    proposal = RandomWalkProposal(np.eye(2))
    for _ in range(20):
        nxt, accepted, lt = metropolis_hastings(np.zeros(2), -1e9, lambda y: 0.0, proposal, rng)
        assert accepted
        assert lt == 0.0
