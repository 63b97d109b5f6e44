"""Metropolis-Hastings kernel and posterior interval routines"""
import math

import numpy as np

from stochastics import factor_psd


class RandomWalkProposal(object):
    """
    Multivariate normal random walk q(x'|x) = N(x, cov). Symmetric, so its
    log-density terms cancel in the acceptance ratio.
    """
    symmetric = True

    def __init__(self, cov):
        self.cov = np.atleast_2d(np.asarray(cov, dtype=float))
        self.factor = factor_psd(self.cov)

    def draw(self, x, rng):
        x = np.atleast_1d(x)
        return x + self.factor.lower @ rng.standard_normal(x.size)

    def log_density(self, to, frm):
        return 0.0


def metropolis_hastings(x, log_target_x, log_target, proposal, rng):
    """
    One Metropolis-Hastings transition from `x`:

    accept x' ~ q(.|x) with probability
    min{1, exp(L(x') - L(x) + log q(x|x') - log q(x'|x))}.

    Returns (next state, accepted, log target at next state). A candidate whose
    log target is not finite is rejected.
    """
    candidate = proposal.draw(x, rng)
    log_target_c = log_target(candidate)
    u = rng.random()
    if not np.isfinite(log_target_c):
        return x, False, log_target_x
    dl = log_target_c - log_target_x
    if not proposal.symmetric:
        dl += proposal.log_density(x, candidate) - proposal.log_density(candidate, x)
    if dl < 0. and u > math.exp(dl):
        return x, False, log_target_x
    return candidate, True, log_target_c


def hpd_interval(samples, prob=0.95):
    """Shortest interval containing ceil(prob*N) of the sorted samples."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    n = x.size
    if n == 0:
        raise ValueError("HPD interval of an empty sample")
    if not 0. < prob < 1.:
        raise ValueError(f"HPD probability must lie in (0, 1), got {prob}")
    k = min(n, max(1, math.ceil(prob*n)))
    widths = x[k - 1:] - x[:n - k + 1]
    i = int(np.argmin(widths))
    return float(x[i]), float(x[i + k - 1])
