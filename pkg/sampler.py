"""
Joint posterior sampling of mean OD flows theta_{1:T} and route choice
sensitivities phi: a Gibbs sampler alternating forward filtering backward
sampling (FFBS) for theta with a Metropolis-Hastings step for phi.
"""
from dataclasses import dataclass
import logging

import numpy as np

from dlm_filter import filter_pass
from gibbs_sampling import RandomWalkProposal, hpd_interval, metropolis_hastings
from od_errors import FilterError, NotPSDError, NumericalError, SamplerError
from route_choice import choice_probabilities, utility_series
from stochastics import PSDFactor, RngStream, factor_psd, mvn_logpdf_batch, mvn_sample, sqrt_psd, symmetrize

logger = logging.getLogger("od_dlm.sampler")

PHI_PRIORS = ('flat', 'nonnegative', 'monotone')


@dataclass
class McmcConfig:
    iterations: int = 10000
    burn_in: int = 2000
    proposal_cov: np.ndarray = None
    phi0: np.ndarray = None
    theta0_mean: float = 100.0
    theta0_var: float = 100.0
    seed: int = 0
    stream: int = 1
    thin: int = 1
    theta_thin: int = 10
    phi_prior: str = 'flat'
    report_every: int = 1000

    def __post_init__(self):
        if self.phi0 is None:
            self.phi0 = np.ones(2)
        self.phi0 = np.atleast_1d(np.asarray(self.phi0, dtype=float))
        if self.proposal_cov is None:
            self.proposal_cov = 0.04*np.eye(self.phi0.size)
        self.proposal_cov = np.atleast_2d(np.asarray(self.proposal_cov, dtype=float))
        if self.iterations < 1:
            raise ValueError("number of MCMC iterations must be positive")
        if not 0 <= self.burn_in < self.iterations:
            raise ValueError("burn-in must be non-negative and smaller than the number of iterations")
        if self.thin < 1 or self.theta_thin < 1:
            raise ValueError("thinning factors must be positive")
        if self.proposal_cov.shape != (self.phi0.size, self.phi0.size):
            raise ValueError(f"proposal covariance must be {self.phi0.size}x{self.phi0.size}")
        if self.phi_prior not in PHI_PRIORS:
            raise ValueError(f"unknown phi prior '{self.phi_prior}', expected one of {', '.join(PHI_PRIORS)}")

    @property
    def r(self):
        return self.phi0.size

    def keeps(self, iteration, thin):
        return iteration > self.burn_in and (iteration - self.burn_in - 1) % thin == 0


@dataclass
class EstimationProblem:
    """Observed link volumes, route cost history and the fixed model quantities."""
    observations: np.ndarray
    history: object
    params: object
    route_set: object
    incidence: object

    def __post_init__(self):
        self.observations = np.atleast_2d(np.asarray(self.observations, dtype=float))
        self.delta = self.incidence.full[[self.incidence.link_ids.index(i)
                                          for i in self.params.observed_links], :]
        self.route_pairs = self.route_set.route_pairs()
        self.pair_indicator = np.zeros((self.route_set.n_routes, self.route_set.n_pairs))
        self.pair_indicator[np.arange(self.route_set.n_routes), self.route_pairs] = 1.0

    @property
    def T(self):
        return self.observations.shape[0]

    @property
    def n(self):
        return self.route_set.n_pairs


@dataclass
class Trace:
    phi: np.ndarray
    phi_iterations: np.ndarray
    log_posterior: np.ndarray
    accepted: np.ndarray
    theta: np.ndarray
    theta_iterations: np.ndarray
    theta_sum: np.ndarray
    theta_count: int
    chains: int = 1

    @property
    def n_accepted(self):
        return int(np.count_nonzero(self.accepted))

    @property
    def n_rejected(self):
        return int(self.accepted.size - self.n_accepted)

    @property
    def acceptance_rate(self):
        return self.n_accepted/self.accepted.size if self.accepted.size else 0.0

    @property
    def theta_mean(self):
        return self.theta_sum/self.theta_count

    @classmethod
    def merge(cls, traces):
        """Pools independent chains; per-iteration records are concatenated."""
        traces = list(traces)
        return cls(phi=np.concatenate([t.phi for t in traces]),
                   phi_iterations=np.concatenate([t.phi_iterations for t in traces]),
                   log_posterior=np.concatenate([t.log_posterior for t in traces]),
                   accepted=np.concatenate([t.accepted for t in traces]),
                   theta=np.concatenate([t.theta for t in traces]),
                   theta_iterations=np.concatenate([t.theta_iterations for t in traces]),
                   theta_sum=sum(t.theta_sum for t in traces),
                   theta_count=sum(t.theta_count for t in traces),
                   chains=sum(t.chains for t in traces))


@dataclass
class PosteriorSummary:
    phi_mean: np.ndarray
    phi_hpd: list
    acceptance_rate: float
    theta_mean: np.ndarray
    theta_hpd: np.ndarray = None
    mse: float = None
    samples: int = 0
    prob: float = 0.95


def ffbs(state, rng):
    T = state.T
    theta = np.empty((T, state.m[0].size))
    try:
        theta[T - 1] = mvn_sample(state.m[T - 1], symmetrize(state.C[T - 1]), rng)
    except NotPSDError as e:
        raise FilterError(f"t={T}: posterior covariance: {e}", t=T) from e
    for t in range(T - 2, -1, -1):
        C = state.C[t]
        C_bar_next = state.C_bar[t + 1]
        try:
            factor = factor_psd(C_bar_next)
        except NotPSDError as e:
            raise FilterError(f"t={t + 2}: prior covariance: {e}", t=t + 2) from e
        if factor.degenerate:
            B = np.zeros_like(C)
        else:
            # B_t = C_t C_bar_{t+1}^-1
            B = factor.solve(C).T
        h = state.m[t] + B @ (theta[t + 1] - state.m_bar[t + 1])
        # the smoothing identity needs C_bar_{t+1} here
        H = symmetrize(C - B @ C_bar_next @ B.T)
        try:
            theta[t] = mvn_sample(h, H, rng)
        except NotPSDError:
            try:
                S = sqrt_psd(H, 1e-8*max(np.trace(C), 1e-300))
            except NotPSDError as e:
                raise FilterError(f"t={t + 1}: backward covariance: {e}", t=t + 1) from e
            theta[t] = mvn_sample(h, None, rng, factor=PSDFactor(S, 0.0))
    return theta


def log_likelihood_phi(phi, theta, observations, history, params, route_set, incidence):
    return _log_likelihood(phi, theta, EstimationProblem(observations, history, params, route_set, incidence))


def _log_likelihood(phi, theta, problem):
    """
    sum_t log N(z_t; F_t(phi) theta_t, V_t(phi, theta_t)), where the route flow
    covariance in V_t is evaluated at max(theta_jt, floor).
    """
    params = problem.params
    T = problem.T
    theta = np.asarray(theta, dtype=float)
    p = choice_probabilities(utility_series(phi, problem.history, T), problem.route_set, params.pi)
    D = problem.delta
    F = np.einsum('ik,tk,kj->tij', D, p, problem.pair_indicator)
    levels = np.maximum(theta, params.level_floor)
    weights = levels[:, problem.route_pairs]*p
    # Delta Sigma^y Delta^T = Delta diag(level*p) Delta^T - F diag(level) F^T
    route_term = np.einsum('ik,tk,lk->til', D, weights, D) - np.einsum('tij,tj,tlj->til', F, levels, F)
    V = np.einsum('tij,jk,tlk->til', F, params.sigma_x, F) + route_term + params.sigma_z
    V = 0.5*(V + np.swapaxes(V, 1, 2))
    mean = np.einsum('tij,tj->ti', F, theta)
    return mvn_logpdf_batch(problem.observations, mean, V)


def log_prior_phi(phi, kind='flat'):
    if kind == 'flat':
        return 0.0
    if np.any(phi < 0.0):
        return -np.inf
    if kind == 'monotone' and np.any(np.diff(phi) > 0.0):
        return -np.inf
    return 0.0


def log_posterior_phi(phi, theta, problem, prior='flat'):
    lp = log_prior_phi(phi, prior)
    if not np.isfinite(lp):
        return -np.inf
    try:
        ll = _log_likelihood(phi, theta, problem)
    except (NumericalError, FloatingPointError, np.linalg.LinAlgError):
        return -np.inf
    return ll + lp if np.isfinite(ll) else -np.inf


def mh_step(phi, theta, problem, proposal, rng, prior='flat', log_target_phi=None):
    """
    Metropolis-Hastings update of phi given theta_{1:T}. Returns
    (next phi, accepted flag, log posterior at next phi).
    """
    def log_target(x):
        return log_posterior_phi(x, theta, problem, prior)

    if log_target_phi is None:
        log_target_phi = log_target(phi)
    return metropolis_hastings(np.asarray(phi, dtype=float), log_target_phi, log_target, proposal, rng)


def gibbs_run(config, problem, rng=None):
    if config.r != problem.params.r:
        raise ValueError(f"phi has {config.r} components but the memory length is {problem.params.r}")
    if rng is None:
        rng = RngStream(config.seed, config.stream).generator()
    T, n = problem.T, problem.n
    proposal = RandomWalkProposal(config.proposal_cov)

    phi = config.phi0.copy()
    # FFBS does not condition on theta^(0); the draw fixes the starting point of the stream
    theta = config.theta0_mean + np.sqrt(config.theta0_var)*rng.standard_normal((T, n))

    phi_samples, phi_iterations = [], []
    theta_samples, theta_iterations = [], []
    theta_sum = np.zeros((T, n))
    theta_count = 0
    log_post = np.empty(config.iterations)
    accepted = np.zeros(config.iterations, dtype=bool)

    for i in range(1, config.iterations + 1):
        try:
            state = filter_pass(problem.observations, problem.history, phi, problem.params,
                                problem.route_set, problem.incidence)
            theta = ffbs(state, rng)
        except NumericalError as e:
            raise SamplerError(f"iteration {i}: {e}", iteration=i) from e
        phi, acc, lp = mh_step(phi, theta, problem, proposal, rng, prior=config.phi_prior)
        log_post[i - 1] = lp
        accepted[i - 1] = acc

        if i > config.burn_in:
            theta_sum += theta
            theta_count += 1
        if config.keeps(i, config.thin):
            phi_samples.append(phi.copy())
            phi_iterations.append(i)
        if config.keeps(i, config.theta_thin):
            theta_samples.append(theta.copy())
            theta_iterations.append(i)

        if config.report_every and i % config.report_every == 0:
            logger.info("iteration %d/%d: acceptance rate %.3f, phi = %s", i, config.iterations,
                        np.count_nonzero(accepted[:i])/i, np.array2string(phi, precision=4))

    return Trace(phi=np.array(phi_samples).reshape(-1, config.r),
                 phi_iterations=np.array(phi_iterations, dtype=int),
                 log_posterior=log_post,
                 accepted=accepted,
                 theta=np.array(theta_samples).reshape(-1, T, n),
                 theta_iterations=np.array(theta_iterations, dtype=int),
                 theta_sum=theta_sum,
                 theta_count=theta_count)


def mse(theta_hat, truth):
    theta_hat = np.asarray(theta_hat, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if theta_hat.shape != truth.shape:
        raise ValueError(f"estimate has shape {theta_hat.shape} but truth has shape {truth.shape}")
    return float(np.mean((theta_hat - truth)**2))


def posterior_summary(trace, truth=None, prob=0.95):
    if trace.phi.shape[0] == 0:
        raise ValueError("empty trace")
    phi_hpd = [hpd_interval(trace.phi[:, k], prob) for k in range(trace.phi.shape[1])]
    theta_hpd = None
    if trace.theta.shape[0] > 0:
        T, n = trace.theta.shape[1:]
        theta_hpd = np.array([[hpd_interval(trace.theta[:, t, j], prob) for j in range(n)]
                              for t in range(T)])
    theta_mean = trace.theta_mean
    return PosteriorSummary(phi_mean=trace.phi.mean(axis=0),
                            phi_hpd=phi_hpd,
                            acceptance_rate=trace.acceptance_rate,
                            theta_mean=theta_mean,
                            theta_hpd=theta_hpd,
                            mse=None if truth is None else mse(theta_mean, truth),
                            samples=trace.phi.shape[0],
                            prob=prob)
