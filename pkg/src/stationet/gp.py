"""Exact Gaussian-process regression, the infinite-width reference model."""
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import CholeskyError, InputError
from .kernels import gram

JITTER_LADDER = (0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6)


@dataclass(frozen=True)
class GpPosterior:
    kernel: object
    train_x: np.ndarray
    train_y: np.ndarray
    noise_var: float
    chol: np.ndarray
    alpha: np.ndarray
    jitter: float
    log_marginal_likelihood: float


def _as_matrix(X):
    X = np.asarray(X, dtype=np.float64)
    return X[:, None] if X.ndim == 1 else X


def gp_fit(kernel, X, y, noise_var):
    """Condition a zero-mean GP on noisy observations ``y`` at ``X``."""
    X = _as_matrix(X)
    y = np.asarray(y, dtype=np.float64).ravel()
    if not noise_var > 0:
        raise InputError("noise_var must be positive")
    if X.shape[0] < 1 or X.shape[0] != y.shape[0]:
        raise InputError("need at least one training point and matching targets")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise InputError("training data must be finite")
    K = gram(kernel, X)
    n = X.shape[0]
    for jitter in JITTER_LADDER:
        try:
            L = linalg.cholesky(K + (noise_var + jitter * kernel.variance) * np.eye(n), lower=True)
            break
        except linalg.LinAlgError:
            continue
    else:
        raise CholeskyError("Cholesky of K + noise*I failed even with jitter 1e-6; "
                            "increase noise_var or check the kernel")
    alpha = linalg.cho_solve((L, True), y)
    lml = (-0.5 * y @ alpha - np.sum(np.log(np.diag(L))) - 0.5 * n * np.log(2.0 * np.pi))
    return GpPosterior(kernel, X, y, float(noise_var), L, alpha, jitter, float(lml))


def gp_predict(post, X_star):
    """Latent predictive mean and variance at ``X_star``."""
    Xs = _as_matrix(X_star)
    if Xs.shape[1] != post.train_x.shape[1]:
        raise InputError(f"dimension mismatch: {Xs.shape[1]} vs {post.train_x.shape[1]}")
    Ks = gram(post.kernel, post.train_x, Xs)
    mean = Ks.T @ post.alpha
    v = linalg.solve_triangular(post.chol, Ks, lower=True)
    if post.kernel.stationary:
        prior_var = np.full(Xs.shape[0], post.kernel.variance)
    else:
        prior_var = np.array([gram(post.kernel, x[None, :])[0, 0] for x in Xs])
    var = prior_var - np.sum(v * v, axis=0)
    return mean, np.maximum(var, 0.0)
