"""
Synthetic day-to-day data: mean OD flows follow a bounded random walk,
realized flows split over routes by a logit model on remembered route costs,
BPR travel times feed back into the next days' costs, and link counts are
observed with noise.
"""
from dataclasses import dataclass, field
import logging

import numpy as np

from network import free_flow_costs, incidence_matrix, route_costs
from route_choice import (DEFAULT_PI, CostHistory, logit_probabilities, route_choice_matrix,
                          route_flow_covariance_blocks, utilities)
from stochastics import mvn_sample

logger = logging.getLogger("od_dlm.simulator")

BOUNDS_MODES = ('clamp', 'reflect')


@dataclass
class SimulationConfig:
    n_pairs: int = 4
    theta0: np.ndarray = None
    W: np.ndarray = None
    sigma_x: np.ndarray = None
    sigma_z: np.ndarray = None
    phi: np.ndarray = None
    pi: float = DEFAULT_PI
    T: int = 100
    bounds: tuple = (10.0, 100.0)
    bounds_mode: str = 'clamp'
    seed: int = 0

    def __post_init__(self):
        n = self.n_pairs
        if self.theta0 is None:
            self.theta0 = np.full(n, 50.0)
        if self.W is None:
            self.W = 10.0*np.eye(n)
        if self.sigma_x is None:
            self.sigma_x = np.eye(n)
        if self.phi is None:
            self.phi = np.array([0.5, 0.3])
        self.theta0 = np.atleast_1d(np.asarray(self.theta0, dtype=float))
        self.W = np.atleast_2d(np.asarray(self.W, dtype=float))
        self.sigma_x = np.atleast_2d(np.asarray(self.sigma_x, dtype=float))
        self.phi = np.atleast_1d(np.asarray(self.phi, dtype=float))
        if self.sigma_z is not None:
            self.sigma_z = np.atleast_2d(np.asarray(self.sigma_z, dtype=float))
        lo, hi = self.bounds
        if not lo < hi:
            raise ValueError(f"demand bounds must satisfy lo < hi, got [{lo}, {hi}]")
        if self.T < 1:
            raise ValueError("number of days T must be at least 1")
        if self.bounds_mode not in BOUNDS_MODES:
            raise ValueError(f"unknown bounds mode '{self.bounds_mode}', expected one of {', '.join(BOUNDS_MODES)}")
        if not 0.0 < self.pi < 1.0:
            raise ValueError(f"non-choice probability must lie in (0, 1), got {self.pi}")
        for name in ('W', 'sigma_x'):
            if getattr(self, name).shape != (n, n):
                raise ValueError(f"{name} must be {n}x{n}")
            if np.linalg.eigvalsh(getattr(self, name))[0] < -1e-10*max(np.trace(getattr(self, name)), 1.0):
                raise ValueError(f"{name} is not positive semi-definite")
        if self.theta0.size != n:
            raise ValueError(f"theta0 must have {n} entries")

    @property
    def r(self):
        return self.phi.size

    def sigma_z_for(self, n_links):
        if self.sigma_z is None:
            return np.eye(n_links)
        if self.sigma_z.shape != (n_links, n_links):
            raise ValueError(f"Sigma^z must be {n_links}x{n_links}")
        return self.sigma_z


@dataclass
class SyntheticDataset:
    """
    Series for t = 1..T at row t-1; `costs` covers t = 1-r..T. Observation
    directories carry only `z` and `costs`: the other series and `config` are None.
    """
    theta: np.ndarray
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    costs: np.ndarray
    r: int
    clamps: dict = field(default_factory=dict)
    config: SimulationConfig = None

    @property
    def T(self):
        return self.z.shape[0]


def _bound(theta, lo, hi, mode, clamps):
    below = theta < lo
    above = theta > hi
    clamps['theta_low'] += int(np.count_nonzero(below))
    clamps['theta_high'] += int(np.count_nonzero(above))
    if mode == 'reflect':
        width = hi - lo
        # fold into [lo, hi] by reflection at both walls
        s = np.mod(theta - lo, 2.0*width)
        return lo + np.where(s > width, 2.0*width - s, s)
    return np.clip(theta, lo, hi)


def _nonnegative(v, key, clamps):
    neg = v < 0.0
    clamps[key] += int(np.count_nonzero(neg))
    return np.where(neg, 0.0, v)


def generate(config, network, route_set, rng):
    incidence = incidence_matrix(route_set, network)
    delta = incidence.full
    n_links = delta.shape[0]
    n = route_set.n_pairs
    if config.theta0.size != n:
        raise ValueError(f"configuration has {config.theta0.size} OD pairs, network has {n}")
    sigma_z = config.sigma_z_for(n_links)
    r, T = config.r, config.T
    lo, hi = config.bounds

    clamps = dict(theta_low=0, theta_high=0, x=0, y=0, z=0)
    c_free = free_flow_costs(network, route_set, incidence)
    costs = np.empty((T + r, route_set.n_routes))
    costs[:r] = c_free

    theta_s = np.empty((T, n))
    x_s = np.empty((T, n))
    y_s = np.empty((T, route_set.n_routes))
    z_s = np.empty((T, n_links))

    theta = config.theta0
    for t in range(1, T + 1):
        theta = _bound(mvn_sample(theta, config.W, rng), lo, hi, config.bounds_mode, clamps)
        x = _nonnegative(mvn_sample(theta, config.sigma_x, rng), 'x', clamps)

        history = CostHistory(costs[:t - 1 + r], 1 - r)
        u = utilities(config.phi, history, t)
        p = np.concatenate([logit_probabilities(u[sl], config.pi) for sl in route_set.pair_slices()])
        P = route_choice_matrix(p, route_set)
        sigma_y = route_flow_covariance_blocks(x, p, route_set)
        y = _nonnegative(mvn_sample(P @ x, sigma_y, rng), 'y', clamps)

        volumes = delta @ y
        costs[t - 1 + r] = route_costs(network, route_set, volumes, incidence)
        z = _nonnegative(mvn_sample(volumes, sigma_z, rng), 'z', clamps)

        theta_s[t - 1], x_s[t - 1], y_s[t - 1], z_s[t - 1] = theta, x, y, z

    logger.info("simulated %d days: clamp counts %s", T, clamps)
    return SyntheticDataset(theta_s, x_s, y_s, z_s, costs, r, clamps, config)


def replay_costs(dataset):
    return CostHistory(dataset.costs, 1 - dataset.r)
