"""
Route choice layer: utilities from past route costs, logit probabilities with a
non-choice probability pi, the block diagonal route choice matrix P_t and the
multinomial-like route flow covariance.
"""
from dataclasses import dataclass

import numpy as np
from scipy.linalg import block_diag
from scipy.special import logsumexp

from od_errors import InsufficientHistoryError

DEFAULT_PI = 0.01
LEVEL_FLOOR = 1.0


class CostHistory(object):
    """
    Route cost vectors c_t for days t = first..last, where first = 1 - r
    covers the pre-sample memory window.
    """
    def __init__(self, costs, first):
        self.costs = np.atleast_2d(np.asarray(costs, dtype=float))
        self.first = int(first)
        if np.any(self.costs <= 0.0):
            raise ValueError("route costs must be positive")

    @property
    def last(self):
        return self.first + self.costs.shape[0] - 1

    @property
    def n_routes(self):
        return self.costs.shape[1]

    def cost(self, t):
        if t < self.first or t > self.last:
            raise InsufficientHistoryError(t)
        return self.costs[t - self.first]

    def window(self, t, r):
        """Rows c_{t-1}, ..., c_{t-r}."""
        return np.array([self.cost(t - s) for s in range(1, r + 1)])

    def truncated(self, first):
        """History with the days before `first` dropped."""
        return CostHistory(self.costs[first - self.first:], first)


@dataclass
class ChoiceStructure:
    probabilities: list
    P: np.ndarray
    pi: float

    @property
    def route_probabilities(self):
        return np.concatenate(self.probabilities)


def utilities(phi, history, t):
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    return -phi @ history.window(t, phi.size)


def utility_series(phi, history, T):
    """Utilities u_t for t = 1..T as a T x K array."""
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    r = phi.size
    if history.first > 1 - r:
        raise InsufficientHistoryError(history.first - 1)
    if history.last < T - 1:
        raise InsufficientHistoryError(T - 1)
    u = np.zeros((T, history.n_routes))
    for s in range(1, r + 1):
        start = 1 - s - history.first
        u -= phi[s - 1]*history.costs[start:start + T]
    return u


def logit_probabilities(u, pi=DEFAULT_PI):
    u = np.asarray(u, dtype=float)
    if not 0.0 < pi < 1.0:
        raise ValueError(f"non-choice probability must lie in (0, 1), got {pi}")
    return (1.0 - pi)*np.exp(u - logsumexp(u))


def choice_probabilities(u, route_set, pi=DEFAULT_PI):
    """Per OD pair logit over the last axis of `u` (routes in global order)."""
    u = np.asarray(u, dtype=float)
    p = np.empty_like(u)
    for sl in route_set.pair_slices():
        block = u[..., sl]
        p[..., sl] = (1.0 - pi)*np.exp(block - logsumexp(block, axis=-1, keepdims=True))
    return p


def route_choice_matrix(p, route_set):
    """Block diagonal K x n matrix P_t from route probabilities in global order."""
    P = np.zeros((route_set.n_routes, route_set.n_pairs))
    P[np.arange(route_set.n_routes), route_set.route_pairs()] = p
    return P


def choice_structure(phi, history, pi, route_set, t):
    u = utilities(phi, history, t)
    probabilities = [logit_probabilities(u[sl], pi) for sl in route_set.pair_slices()]
    P = route_choice_matrix(np.concatenate(probabilities), route_set)
    return ChoiceStructure(probabilities, P, pi)


def route_flow_covariance(level, p):
    p = np.asarray(p, dtype=float)
    return float(level)*(np.diag(p) - np.outer(p, p))


def route_flow_covariance_blocks(levels, p, route_set, floor=None):
    """
    Sigma^y_t = blockdiag_j level_j (diag(p_j) - p_j p_j^T). With `floor` set the
    levels are max(level_j, floor), as used when levels come from estimated means.
    """
    levels = np.asarray(levels, dtype=float)
    if floor is not None:
        levels = np.maximum(levels, floor)
    return block_diag(*[route_flow_covariance(level, p[sl])
                        for level, sl in zip(levels, route_set.pair_slices())])
