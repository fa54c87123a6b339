"""Single-hidden-layer Bayesian neural network with a stationary model layer.

Forward pass::

    Z = X (W / ell)^T + b,    b = 2 pi sigmoid(b_hat) - pi
    f = sigma(Z) V^T / sqrt(K) + v0

``W`` carries the weight prior at unit lengthscale; the lengthscale enters
as a divisor of the frequencies.  The readout is scaled by ``1/sqrt(K)`` so
``V`` keeps a standard normal prior and the prior output variance does not
depend on the width.

The loss is the negative log joint: data likelihood (Gaussian with noise
std ``s`` for regression, softmax cross-entropy for classification), weight
prior, uniform bias prior pushed through the sigmoid link (its log-Jacobian
included), standard normal readout prior, and Gamma hyperpriors on ``ell``
and ``s``, both parameterized on the log scale.
"""
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
from scipy import special

from . import _backend
from .activations import as_kind
from .errors import InputError, NumericalError
from .hmc import HmcConfig, hmc_sample

LOG_2PI = np.log(2.0 * np.pi)


class TaskKind(str, Enum):
    REGRESSION = "regression"
    CLASSIFICATION = "classification"


@dataclass(frozen=True)
class TaskSpec:
    kind: TaskKind
    X: np.ndarray
    y: np.ndarray
    classes: int = 1

    def __post_init__(self):
        kind = TaskKind(self.kind)
        X = np.asarray(self.X, dtype=np.float64)
        if X.ndim == 1:
            X = X[:, None]
        y = np.asarray(self.y)
        if y.shape[0] != X.shape[0]:
            raise InputError("X and y lengths differ")
        if not np.all(np.isfinite(X)):
            raise InputError("inputs must be finite")
        if kind is TaskKind.CLASSIFICATION:
            y = y.astype(np.int64)
            if self.classes < 2 or y.min() < 0 or y.max() >= self.classes:
                raise InputError(f"class labels must lie in [0, {self.classes})")
        else:
            y = y.astype(np.float64).ravel()
            if not np.all(np.isfinite(y)):
                raise InputError("regression targets must be finite")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        if kind is TaskKind.REGRESSION:
            object.__setattr__(self, "classes", 1)

    @classmethod
    def regression(cls, X, y):
        return cls(TaskKind.REGRESSION, X, y)

    @classmethod
    def classification(cls, X, y, classes=None):
        y = np.asarray(y)
        return cls(TaskKind.CLASSIFICATION, X, y, int(y.max()) + 1 if classes is None else classes)

    @property
    def outputs(self):
        return self.classes


@dataclass(frozen=True)
class Hyperpriors:
    """Gamma(shape, rate) priors on the lengthscale and the noise std."""

    ell_shape: float = 2.0
    ell_rate: float = 0.5
    s_shape: float = 0.5
    s_rate: float = 1.0


@dataclass
class BnnParams:
    W: np.ndarray        # (K, d)
    b_hat: np.ndarray    # (K,)
    V: np.ndarray        # (c, K)
    v0: np.ndarray       # (c,)
    log_ell: float = 0.0
    log_s: float = 0.0

    @property
    def K(self):
        return self.W.shape[0]

    @property
    def bias(self):
        return 2.0 * np.pi * special.expit(self.b_hat) - np.pi

    @property
    def ell(self):
        return float(np.exp(self.log_ell))

    @property
    def s(self):
        return float(np.exp(self.log_s))

    def to_vector(self):
        return np.concatenate([self.W.ravel(), self.b_hat, self.V.ravel(), self.v0,
                               [self.log_ell, self.log_s]])

    def from_vector(self, theta):
        """New params with this instance's shapes and values from ``theta``."""
        K, d = self.W.shape
        c = self.V.shape[0]
        i = 0
        W = theta[i:i + K * d].reshape(K, d); i += K * d
        b_hat = theta[i:i + K]; i += K
        V = theta[i:i + c * K].reshape(c, K); i += c * K
        v0 = theta[i:i + c]; i += c
        return BnnParams(W.copy(), b_hat.copy(), V.copy(), v0.copy(),
                         float(theta[i]), float(theta[i + 1]))

    def copy(self):
        return self.from_vector(self.to_vector())


def bnn_init(seed, d, K, c, activation, prior, lengthscale=1.0, noise_std=1.0):
    """Draw initial parameters from the priors.

    Biases are uniform on (-pi, pi) through the inverse link; readout
    weights are standard normal (the 1/sqrt(K) scaling lives in the
    forward pass, giving effective N(0, 1/K) output weights).
    """
    if K < 1 or d < 1 or c < 1:
        raise InputError("d, K and c must be positive")
    as_kind(activation)
    rng = np.random.default_rng(seed)
    W = prior.sample((K, d), rng)
    u = rng.uniform(0.0, 1.0, K)
    b_hat = special.logit(np.clip(u, 1e-12, 1.0 - 1e-12))
    V = rng.standard_normal((c, K))
    v0 = np.zeros(c)
    return BnnParams(W, b_hat, V, v0, float(np.log(lengthscale)), float(np.log(noise_std)))


def _forward(params, code, X, with_grad):
    inv_ell = 1.0 / params.ell
    Z, A, dA = _backend.hidden_layer(code, X, params.W, params.bias, inv_ell, with_grad)
    F = A @ params.V.T / np.sqrt(params.K) + params.v0
    return Z, A, dA, F


def bnn_forward(params, activation, X):
    """Network outputs of shape ``(n, c)``."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[1] != params.W.shape[1]:
        raise InputError(f"expected {params.W.shape[1]} input features, got {X.shape[1]}")
    return _forward(params, as_kind(activation).code, X, False)[3]


def _log_softmax(F):
    m = F.max(axis=1, keepdims=True)
    shifted = F - m
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def _gamma_neg_log(x, log_x, shape, rate):
    # -log Gamma(x | shape, rate) - log x   (density of log x)
    return -(shape * np.log(rate) - special.gammaln(shape) + shape * log_x - rate * x)


def _terms(params, task, activation, prior, hyper, with_grad):
    code = as_kind(activation).code
    Z, A, dA, F = _forward(params, code, task.X, with_grad)
    n = task.X.shape[0]
    if task.kind is TaskKind.REGRESSION:
        s = params.s
        resid = task.y - F[:, 0]
        data = n * (0.5 * LOG_2PI + params.log_s) + 0.5 * np.sum(resid**2) / s**2
        noise = _gamma_neg_log(s, params.log_s, hyper.s_shape, hyper.s_rate)
        logp = None
    else:
        logp = _log_softmax(F)
        data = -np.sum(logp[np.arange(n), task.y])
        noise = 0.0
    sig = special.expit(params.b_hat)
    terms = {
        "data": float(data),
        "weights": float(-np.sum(prior.log_pdf(params.W))),
        # uniform density 1/(2 pi) times link Jacobian 2 pi sig (1 - sig)
        "bias": float(-np.sum(np.log(sig) + np.log1p(-sig))),
        "readout": float(0.5 * np.sum(params.V**2) + 0.5 * np.sum(params.v0**2)
                         + 0.5 * (params.V.size + params.v0.size) * LOG_2PI),
        "lengthscale": float(_gamma_neg_log(params.ell, params.log_ell, hyper.ell_shape, hyper.ell_rate)),
        "noise": float(noise),
    }
    return terms, (Z, A, dA, F, sig, logp)


def loss_terms(params, task, activation, prior, hyperpriors=None):
    """The individual negative-log terms of the joint, by name."""
    with np.errstate(all="ignore"):  # non-finite terms are reported by name instead
        return _terms(params, task, activation, prior, hyperpriors or Hyperpriors(), False)[0]


def _check_finite(terms):
    bad = [k for k, v in terms.items() if not np.isfinite(v)]
    if bad:
        raise NumericalError(f"non-finite loss term(s): {', '.join(bad)}")


def neg_log_joint(params, task, activation, prior, hyperpriors=None):
    terms = loss_terms(params, task, activation, prior, hyperpriors)
    _check_finite(terms)
    return sum(terms.values())


def neg_log_joint_grad(params, task, activation, prior, hyperpriors=None, return_loss=False):
    """Gradient of :func:`neg_log_joint`, as a :class:`BnnParams`."""
    hyper = hyperpriors or Hyperpriors()
    with np.errstate(all="ignore"):
        terms, (Z, A, dA, F, sig, logp) = _terms(params, task, activation, prior, hyper, True)
    _check_finite(terms)
    n, K = A.shape
    rootK = np.sqrt(K)
    ell = params.ell

    if task.kind is TaskKind.REGRESSION:
        s2 = params.s**2
        resid = task.y - F[:, 0]
        G = (-resid / s2)[:, None]
        g_log_s = n - np.sum(resid**2) / s2 + (hyper.s_rate * params.s - hyper.s_shape)
    else:
        G = np.exp(logp)
        G[np.arange(n), task.y] -= 1.0
        g_log_s = 0.0

    gV = G.T @ A / rootK + params.V
    gv0 = G.sum(axis=0) + params.v0
    dZ = (G @ params.V / rootK) * dA
    gW = dZ.T @ task.X / ell + prior.grad_neg_log_pdf(params.W)
    db = dZ.sum(axis=0)
    gb_hat = db * 2.0 * np.pi * sig * (1.0 - sig) + (2.0 * sig - 1.0)
    # d Z / d log_ell = -(Z - b)
    g_log_ell = -np.sum(dZ * (Z - params.bias)) + (hyper.ell_rate * ell - hyper.ell_shape)

    grad = BnnParams(gW, gb_hat, gV, gv0, float(g_log_ell), float(g_log_s))
    if return_loss:
        return sum(terms.values()), grad
    return grad


def _free(params, task):
    """Sampled coordinates; classification has no noise parameter to move."""
    v = params.to_vector()
    return v[:-1] if task.kind is TaskKind.CLASSIFICATION else v


def _unfree(template, theta, task):
    if task.kind is TaskKind.CLASSIFICATION:
        theta = np.append(theta, template.log_s)
    return template.from_vector(theta)


def _potential(template, task, activation, prior, hyper):
    def potential(theta):
        p = _unfree(template, theta, task)
        with np.errstate(all="ignore"):
            try:
                U, g = neg_log_joint_grad(p, task, activation, prior, hyper, return_loss=True)
            except (ArithmeticError, NumericalError):
                return np.inf, np.zeros_like(theta)
        gv = _free(g, task)
        if not np.isfinite(U) or not np.all(np.isfinite(gv)):
            return np.inf, np.zeros_like(theta)
        return U, gv

    return potential


@dataclass
class MapResult:
    params: BnnParams
    trace: list = field(default_factory=list)


def map_fit(init, task, activation, prior, step=1e-3, iters=1000, hyperpriors=None,
            grow=1.2, max_halvings=40):
    """Gradient descent with backtracking on the negative log joint.

    A step is accepted only if it does not increase the loss, so the trace
    is non-increasing.  After an accepted step the step size grows by
    ``grow``; on rejection it halves.
    """
    if not step > 0:
        raise InputError("step must be positive")
    hyper = hyperpriors or Hyperpriors()
    potential = _potential(init, task, activation, prior, hyper)
    theta = _free(init, task)
    U, g = potential(theta)
    if not np.isfinite(U):
        raise NumericalError("loss is not finite at the initial parameters")
    trace = [float(U)]
    for _ in range(iters):
        for _ in range(max_halvings):
            cand = theta - step * g
            Uc, gc = potential(cand)
            if np.isfinite(Uc) and Uc <= U:
                theta, U, g = cand, Uc, gc
                step *= grow
                break
            step *= 0.5
        else:
            break  # no descent direction at machine precision
        trace.append(float(U))
    return MapResult(_unfree(init, theta, task), trace)


class Provenance(str, Enum):
    MAP = "map"
    HMC = "hmc"


@dataclass
class PosteriorSamples:
    draws: list
    provenance: Provenance
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.draws:
            raise InputError("posterior samples must be non-empty")
        shape = [p.to_vector().shape for p in self.draws]
        if len(set(shape)) != 1:
            raise InputError("posterior draws differ in shape")

    @classmethod
    def from_map(cls, params):
        return cls([params], Provenance.MAP)


def hmc_sample_bnn(task, activation, prior, hmc_cfg, hidden_units=30, hyperpriors=None,
                   lengthscale_init=1.0, thin=1):
    """Posterior draws of the network by HMC, one prior draw per chain as start."""
    hyper = hyperpriors or Hyperpriors()
    d = task.X.shape[1]
    template = bnn_init(hmc_cfg.seed, d, hidden_units, task.outputs, activation, prior,
                        lengthscale_init)
    starts = np.stack([
        _free(bnn_init(hmc_cfg.seed + 1000 + c, d, hidden_units, task.outputs, activation,
                       prior, lengthscale_init), task)
        for c in range(hmc_cfg.chains)])
    potential = _potential(template, task, activation, prior, hyper)
    chains = hmc_sample(potential, starts, hmc_cfg)
    draws = [_unfree(template, t, task) for ch in chains for t in ch.draws[::thin]]
    info = {"chains": hmc_cfg.chains, "warmup": hmc_cfg.warmup, "iters": hmc_cfg.iters,
            "accept_rate": [ch.accept_rate for ch in chains],
            "step_size": [ch.step_size for ch in chains],
            "divergent": [ch.divergent for ch in chains]}
    return PosteriorSamples(draws, Provenance.HMC, info)


def predictive(samples, activation, X_star, task_kind, y=None):
    """Reduce posterior draws to per-point predictive summaries.

    Classification: ``probs`` (mean softmax), ``mean`` (probability of the
    last class for binary tasks, else the argmax class), ``entropy`` of the
    mean probabilities, ``marginal_variance`` (across-draw variance of
    class probabilities averaged over classes).
    Regression: ``mean``, ``variance`` (across-draw variance plus mean
    noise variance), ``latent_variance`` (across-draw variance of f) and
    ``layer_variance`` (the same for f minus the output bias).  With targets ``y`` both add per-point ``nlpd``.
    """
    kind = TaskKind(task_kind)
    X_star = np.asarray(X_star, dtype=np.float64)
    if X_star.ndim == 1:
        X_star = X_star[:, None]
    F = np.stack([bnn_forward(p, activation, X_star) for p in samples.draws])  # (S, n, c)
    out = {}
    if kind is TaskKind.CLASSIFICATION:
        P = special.softmax(F, axis=2)
        probs = P.mean(axis=0)
        out["probs"] = probs
        out["mean"] = probs[:, -1] if probs.shape[1] == 2 else probs.argmax(axis=1).astype(float)
        out["entropy"] = -np.sum(special.xlogy(probs, probs), axis=1)
        out["marginal_variance"] = P.var(axis=0).mean(axis=1)
        out["variance"] = out["marginal_variance"]
        if y is not None:
            y = np.asarray(y, dtype=np.int64)
            out["nlpd"] = -np.log(probs[np.arange(len(y)), y])
    else:
        f = F[:, :, 0]
        s2 = np.array([p.s**2 for p in samples.draws])
        out["mean"] = f.mean(axis=0)
        out["variance"] = f.var(axis=0) + s2.mean()
        out["latent_variance"] = f.var(axis=0)
        # hidden-layer term alone; its prior is the stationary kernel
        v0 = np.array([p.v0[0] for p in samples.draws])
        out["layer_variance"] = (f - v0[:, None]).var(axis=0)
        out["entropy"] = 0.5 * np.log(2.0 * np.pi * np.e * out["variance"])
        if y is not None:
            y = np.asarray(y, dtype=np.float64).ravel()
            logp = (-0.5 * LOG_2PI - 0.5 * np.log(s2)[:, None]
                    - 0.5 * (y[None, :] - f) ** 2 / s2[:, None])
            out["nlpd"] = -(special.logsumexp(logp, axis=0) - np.log(f.shape[0]))
    return out
