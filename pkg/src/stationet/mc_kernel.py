"""Monte-Carlo estimates of the infinite-width covariance of a random layer.

A random network with ``K`` hidden units draws weights ``w_k`` from the
weight prior and biases ``b_k ~ Uniform(-pi, pi)`` (no bias for
``sincos``), and estimates

    k_hat(x, x') = 1/K sum_k sigma(w_k . x + b_k) sigma(w_k . x' + b_k).

Multi-dimensional weights are drawn coordinatewise from the 1-D prior.
"""
from dataclasses import dataclass

import numpy as np

from . import _backend
from .activations import ActivationKind, as_kind
from .errors import InputError
from .kernels import gram, kernel_of_distance
from .spectral import WeightPrior, kernel_for_prior, wiener_khinchin_numeric


@dataclass(frozen=True)
class McConfig:
    activation: ActivationKind
    prior: WeightPrior
    hidden_units: int = 5000
    seed: int = 0
    input_dim: int = 1

    def __post_init__(self):
        object.__setattr__(self, "activation", as_kind(self.activation))
        if not self.activation.periodic:
            raise InputError(f"{self.activation.value} is not a periodic activation")
        if self.hidden_units < 1 or self.input_dim < 1:
            raise InputError("hidden_units and input_dim must be positive")


def draw_network(cfg, rng=None):
    """Weights ``(K, d)`` and biases ``(K,)`` of one random layer."""
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    W = cfg.prior.sample((cfg.hidden_units, cfg.input_dim), rng)
    if cfg.activation.uses_bias:
        b = rng.uniform(-np.pi, np.pi, cfg.hidden_units)
    else:
        b = np.zeros(cfg.hidden_units)
    return W, b


def _points(X, d):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim <= 1:
        X = X.reshape(-1, 1) if d == 1 else X.reshape(1, -1)
    if X.shape[1] != d:
        raise InputError(f"expected inputs of dimension {d}, got {X.shape[1]}")
    return X


def features(cfg, X, network=None):
    """Hidden-unit activations ``Phi`` of shape ``(n, K)``."""
    X = _points(X, cfg.input_dim)
    W, b = draw_network(cfg) if network is None else network
    _, A, _ = _backend.hidden_layer(cfg.activation.code, X, W, b, 1.0, False)
    return A


def mc_gram(cfg, X, network=None):
    """Gram matrix ``Phi Phi^T / K`` of a single random network."""
    Phi = features(cfg, X, network)
    G = Phi @ Phi.T / cfg.hidden_units
    return 0.5 * (G + G.T)


def mc_kernel_estimate(cfg, x, x_prime):
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    xp = np.atleast_1d(np.asarray(x_prime, dtype=np.float64))
    if x.shape != (cfg.input_dim,) or xp.shape != (cfg.input_dim,):
        raise InputError(f"points must have dimension {cfg.input_dim}")
    Phi = features(cfg, np.stack([x, xp]))
    return float(np.mean(Phi[0] * Phi[1]))


def _repeat_rng(seed, repeat, K):
    return np.random.default_rng([seed, repeat, K])


def convergence_sweep(activation, prior, kernel, Ks, grid, repeats=5, seed=0):
    """Mean absolute Gram error against the closed-form kernel for each K.

    Returns a list of dict rows with keys K, mae_mean, mae_std, mae_median.
    """
    Ks = list(Ks)
    grid = np.asarray(grid, dtype=np.float64)
    if not Ks or grid.size == 0:
        raise InputError("Ks and grid must be non-empty")
    if repeats < 1:
        raise InputError("repeats must be positive")
    X = grid.reshape(grid.shape[0], -1)
    target = gram(kernel, X)
    rows = []
    for K in Ks:
        cfg = McConfig(activation, prior, int(K), seed, X.shape[1])
        maes = []
        for rep in range(repeats):
            net = draw_network(cfg, _repeat_rng(seed, rep, int(K)))
            G = mc_gram(cfg, X, net) / cfg.activation.mixture_normalizer
            maes.append(np.mean(np.abs(G - target)))
        maes = np.array(maes)
        rows.append({"K": int(K), "mae_mean": float(maes.mean()),
                     "mae_std": float(maes.std(ddof=1)) if repeats > 1 else 0.0,
                     "mae_median": float(np.median(maes))})
    return rows


def mc_verify(cfg, r_grid, normalize=True):
    """Per-distance comparison of the MC kernel ``k_hat(0, r)`` with the dual kernel.

    Piecewise-linear activations are divided by their mixture normalizer
    when ``normalize`` is set.
    """
    if cfg.input_dim != 1:
        raise InputError("mc_verify works on one-dimensional inputs")
    r = np.asarray(r_grid, dtype=np.float64)
    pts = np.concatenate([[0.0], r])
    Phi = features(cfg, pts)
    k_mc = Phi[1:] @ Phi[0] / cfg.hidden_units
    if normalize:
        k_mc = k_mc / cfg.activation.mixture_normalizer
    k_closed = kernel_of_distance(kernel_for_prior(cfg.prior), np.abs(r))
    return [{"r": float(ri), "kappa_mc": float(a), "kappa_closed": float(c),
             "abs_err": float(abs(a - c))} for ri, a, c in zip(r, k_mc, k_closed)]


def mixture_kernel(prior, r, terms):
    """Normalized harmonic mixture ``sum_k l_k^-4 k(l_k r) / sum_k l_k^-4``, ``l_k = 2k+1``.

    The base kernel is evaluated by quadrature of the weight prior.
    """
    lam = 2.0 * np.arange(terms) + 1.0
    weights = lam**-4.0
    vals = np.array([wiener_khinchin_numeric(prior, lk * r) for lk in lam])
    return float(np.dot(weights, vals) / weights.sum())


def triangle_truncation_error(prior, r_grid, terms=100):
    """Error of keeping only the first harmonic of the triangle-wave kernel."""
    if terms < 1:
        raise InputError("terms must be at least 1")
    rows = []
    for r in np.asarray(r_grid, dtype=np.float64):
        k1 = mixture_kernel(prior, r, 1)
        kn = mixture_kernel(prior, r, terms)
        rows.append({"r": float(r), "kappa_1": k1, "kappa_n": kn, "abs_diff": abs(k1 - kn)})
    return rows
