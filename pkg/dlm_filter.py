"""
Forward recurrences of the dynamic linear model for mean OD flows.

The state theta_t evolves as a random walk (system matrix G_t = I); link counts
z_t = F_t theta_t + nu_t with F_t = Delta P_t and
V_t = F_t Sigma^x F_t^T + Delta Sigma^y_t Delta^T + Sigma^z.
"""
from dataclasses import dataclass, field
import logging

import numpy as np

from od_errors import FilterError, NotPSDError
from route_choice import (DEFAULT_PI, LEVEL_FLOOR, choice_probabilities, route_choice_matrix,
                          route_flow_covariance_blocks, utility_series)
from stochastics import factor_psd, mvn_logpdf, symmetrize

logger = logging.getLogger("od_dlm.dlm_filter")


@dataclass(frozen=True)
class Evolution:
    """Either an explicit evolution matrix W or a discount factor delta."""
    W: np.ndarray = None
    discount: float = None

    def __post_init__(self):
        if (self.W is None) == (self.discount is None):
            raise ValueError("specify exactly one of the evolution matrix W and the discount factor")
        if self.discount is not None and not 0.0 < self.discount <= 1.0:
            raise ValueError(f"discount factor must lie in (0, 1], got {self.discount}")

    def prior_covariance(self, C):
        if self.discount is not None:
            return C/self.discount
        return C + self.W

    def __str__(self):
        if self.discount is not None:
            return f"discount {self.discount:g}"
        return "explicit W"


@dataclass
class ModelParams:
    sigma_x: np.ndarray
    sigma_z: np.ndarray
    evolution: Evolution
    m0: np.ndarray
    C0: np.ndarray
    pi: float = DEFAULT_PI
    r: int = 2
    observed_links: tuple = ()
    level_floor: float = LEVEL_FLOOR

    def __post_init__(self):
        n = np.asarray(self.m0).size
        self.m0 = np.asarray(self.m0, dtype=float).reshape(n)
        self.C0 = np.asarray(self.C0, dtype=float)
        self.sigma_x = np.asarray(self.sigma_x, dtype=float)
        self.sigma_z = np.asarray(self.sigma_z, dtype=float)
        m = len(self.observed_links)
        if self.C0.shape != (n, n) or self.sigma_x.shape != (n, n):
            raise ValueError(f"prior and Sigma^x must be {n}x{n} for {n} OD pairs")
        if self.sigma_z.shape != (m, m):
            raise ValueError(f"Sigma^z must be {m}x{m} for {m} observed links")
        if self.evolution.W is not None and np.shape(self.evolution.W) != (n, n):
            raise ValueError(f"evolution matrix must be {n}x{n}")
        if self.r < 1:
            raise ValueError("memory length r must be at least 1")
        if not 0.0 < self.pi < 1.0:
            raise ValueError(f"non-choice probability must lie in (0, 1), got {self.pi}")


@dataclass
class FilterState:
    """Moments for t = 1..T stored at index t-1."""
    m0: np.ndarray
    C0: np.ndarray
    m_bar: list = field(default_factory=list)
    C_bar: list = field(default_factory=list)
    f: list = field(default_factory=list)
    Q: list = field(default_factory=list)
    m: list = field(default_factory=list)
    C: list = field(default_factory=list)

    @property
    def T(self):
        return len(self.m)

    def append(self, m_bar, C_bar, f, Q, m, C):
        self.m_bar.append(m_bar)
        self.C_bar.append(C_bar)
        self.f.append(f)
        self.Q.append(Q)
        self.m.append(m)
        self.C.append(C)

    def log_likelihood(self, observations):
        """Sum of one-step forecast log-densities log N(z_t; f_t, Q_t)."""
        return sum(mvn_logpdf(z, f, symmetrize(Q)) for z, f, Q in zip(observations, self.f, self.Q))


def predict(m, C, evolution):
    return np.array(m, dtype=float), symmetrize(evolution.prior_covariance(np.asarray(C, dtype=float)))


def assemble_observation(P, delta_selected, sigma_x, sigma_y, sigma_z):
    P = np.atleast_2d(P)
    delta_selected = np.atleast_2d(delta_selected)
    if delta_selected.shape[1] != P.shape[0]:
        raise ValueError(f"incidence has {delta_selected.shape[1]} routes but P_t has {P.shape[0]}")
    F = delta_selected @ P
    V = F @ np.atleast_2d(sigma_x) @ F.T + delta_selected @ np.atleast_2d(sigma_y) @ delta_selected.T \
        + np.atleast_2d(sigma_z)
    return F, symmetrize(V)


def forecast(m_bar, C_bar, F, V):
    F = np.atleast_2d(F)
    return F @ m_bar, symmetrize(F @ C_bar @ F.T + V)


def update(m_bar, C_bar, F, V, z, t=None):
    F = np.atleast_2d(F)
    f, Q = forecast(m_bar, C_bar, F, V)
    return _posterior(m_bar, C_bar, F, f, Q, z, t)


def _posterior(m_bar, C_bar, F, f, Q, z, t):
    try:
        factor = factor_psd(Q)
    except NotPSDError as e:
        raise FilterError(f"t={t}: one-step forecast covariance: {e}", t=t) from e
    if factor.degenerate:
        raise FilterError(f"t={t}: one-step forecast covariance is zero", t=t)
    # A = C_bar F^T Q^-1 = (Q^-1 F C_bar)^T
    A = factor.solve(F @ C_bar).T
    m = m_bar + A @ (np.atleast_1d(z) - f)
    C = symmetrize(C_bar - A @ Q @ A.T)
    return m, C


def forward_filter(observations, observation_model, m0, C0, evolution):
    """
    Runs predict, observation assembly, forecast and update for t = 1..T.
    `observation_model(t, m_bar)` returns (F_t, V_t).
    """
    state = FilterState(np.asarray(m0, dtype=float), np.asarray(C0, dtype=float))
    m, C = state.m0, state.C0
    for t, z in enumerate(observations, start=1):
        m_bar, C_bar = predict(m, C, evolution)
        F, V = observation_model(t, m_bar)
        f, Q = forecast(m_bar, C_bar, F, V)
        m, C = _posterior(m_bar, C_bar, np.atleast_2d(F), f, Q, z, t)
        state.append(m_bar, C_bar, f, Q, m, C)
    return state


class ObservationModel(object):
    """
    Builds (F_t, V_t) from route choice parameters phi and the route cost
    history; Sigma^y is evaluated at a flow level supplied per call.
    """
    def __init__(self, phi, history, params, route_set, incidence, T):
        self.route_set = route_set
        self.params = params
        self.delta = incidence.full[[incidence.link_ids.index(i) for i in params.observed_links], :]
        u = utility_series(phi, history, T)
        self.p = choice_probabilities(u, route_set, params.pi)

    def choice_matrix(self, t):
        return route_choice_matrix(self.p[t - 1], self.route_set)

    def __call__(self, t, level):
        P = self.choice_matrix(t)
        sigma_y = route_flow_covariance_blocks(level, self.p[t - 1], self.route_set,
                                               floor=self.params.level_floor)
        return assemble_observation(P, self.delta, self.params.sigma_x, sigma_y, self.params.sigma_z)


def filter_pass(observations, history, phi, params, route_set, incidence):
    observations = np.atleast_2d(np.asarray(observations, dtype=float))
    T = observations.shape[0]
    if observations.shape[1] != len(params.observed_links):
        raise ValueError(f"observations have {observations.shape[1]} columns "
                         f"for {len(params.observed_links)} observed links")
    model = ObservationModel(phi, history, params, route_set, incidence, T)
    return forward_filter(observations, model, params.m0, params.C0, params.evolution)
