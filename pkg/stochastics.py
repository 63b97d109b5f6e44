"""
Seeded random streams, Gaussian sampling and log-densities, and the jittered
Cholesky factorization used for every covariance matrix in the package.

Random streams use numpy's PCG64 bit generator seeded through a SeedSequence
whose spawn key is the stream id, so (seed, stream) pins the draw sequence.
"""
from dataclasses import dataclass
import logging

import numpy as np
from scipy.linalg import cholesky, eigh, eigvalsh, solve_triangular, LinAlgError

from od_errors import NotPSDError

logger = logging.getLogger("od_dlm.stochastics")

# jitter levels tried in turn, relative to the trace
JITTER_LADDER = (0.0, 1e-12, 1e-10, 1e-8)


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream: int = 0

    def generator(self):
        seq = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream),))
        return np.random.Generator(np.random.PCG64(seq))


def rng_stream(seed, stream=0):
    return RngStream(seed, stream).generator()


@dataclass
class PSDFactor:
    """Lower triangular L with L L^T = M + jitter*I"""
    lower: np.ndarray
    jitter: float

    @property
    def degenerate(self):
        return not np.all(np.diag(self.lower) > 0.0)

    def solve(self, b):
        """Solves (M + jitter*I) x = b."""
        y = solve_triangular(self.lower, b, lower=True, check_finite=False)
        return solve_triangular(self.lower.T, y, lower=False, check_finite=False)

    def logdet(self):
        return 2.0*np.sum(np.log(np.diag(self.lower)))


def symmetrize(M):
    return 0.5*(M + M.T)


def factor_psd(M):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"covariance matrix must be square, got shape {M.shape}")
    scale = max(abs(M).max(initial=0.0), 1.0)
    if not np.allclose(M, M.T, rtol=1e-12, atol=1e-12*scale):
        raise ValueError("covariance matrix is not symmetric")
    M = symmetrize(M)
    d = M.shape[0]
    if not np.any(M):
        return PSDFactor(np.zeros_like(M), 0.0)

    tr = np.trace(M)
    for level in JITTER_LADDER:
        eps = level*tr
        if level > 0.0 and eps <= 0.0:
            break
        try:
            L = cholesky(M + eps*np.eye(d), lower=True, check_finite=False)
        except LinAlgError:
            continue
        if eps > 0.0:
            logger.debug("factor_psd: applied jitter %g to a %dx%d matrix", eps, d, d)
        return PSDFactor(L, eps)

    min_eig = float(eigvalsh(M)[0])
    raise NotPSDError(f"matrix is not positive semi-definite (min eigenvalue {min_eig:g})",
                      min_eigenvalue=min_eig)


def mvn_sample(mean, cov, rng, factor=None):
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    if factor is None:
        cov = np.atleast_2d(np.asarray(cov, dtype=float))
        if cov.shape != (mean.size, mean.size):
            raise ValueError(f"mean has dimension {mean.size} but covariance has shape {cov.shape}")
        factor = factor_psd(cov)
    xi = rng.standard_normal(mean.size)
    return mean + factor.lower @ xi


def mvn_logpdf(x, mean, cov, factor=None):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    if x.shape != mean.shape:
        raise ValueError(f"point has shape {x.shape} but mean has shape {mean.shape}")
    if factor is None:
        factor = factor_psd(cov)
    if factor.degenerate:
        raise NotPSDError("log-density of a degenerate normal distribution", min_eigenvalue=0.0)
    e = solve_triangular(factor.lower, x - mean, lower=True, check_finite=False)
    d = x.size
    return -0.5*(d*np.log(2.0*np.pi) + factor.logdet() + e @ e)


def mvn_logpdf_batch(x, mean, cov):
    """
    Sum over rows of log N(x_t; mean_t, cov_t) for stacked (T, d) points and
    (T, d, d) covariances. Falls back to the jittered per-row path when a
    plain Cholesky factorization fails.
    """
    x = np.asarray(x, dtype=float)
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    try:
        L = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        return float(sum(mvn_logpdf(xt, mt, symmetrize(ct)) for xt, mt, ct in zip(x, mean, cov)))
    e = np.linalg.solve(L, (x - mean)[..., None])[..., 0]
    d = x.shape[-1]
    logdet = 2.0*np.log(np.diagonal(L, axis1=-2, axis2=-1)).sum()
    return float(-0.5*(x.shape[0]*d*np.log(2.0*np.pi) + logdet + np.sum(e*e)))


def sqrt_psd(M, tolerance):
    """
    Square root S with S S^T = M after clipping eigenvalues in [-tolerance, 0)
    to zero; used when round-off leaves a covariance marginally indefinite.
    """
    w, U = eigh(symmetrize(np.asarray(M, dtype=float)))
    if w[0] < -tolerance:
        raise NotPSDError(f"matrix is not positive semi-definite (min eigenvalue {w[0]:g})",
                          min_eigenvalue=float(w[0]))
    return U*np.sqrt(np.clip(w, 0.0, None))
