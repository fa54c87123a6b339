"""Closed-form covariance functions and Gram matrices.

Stationary families (Matern with half-integer smoothness, RBF, Exponential)
are evaluated through the polynomial-times-exponential closed form

    k(r) = var * exp(-a) * p! / (2p)! * sum_i (p+i)! / (i! (p-i)!) * (2a)^(p-i),
    a = sqrt(2 nu) r / ell,  nu = p + 1/2,

so no Bessel function is needed.  The locally stationary Matern multiplies
the stationary kernel by a Gaussian envelope ``exp(-|x|^2 / (2 sigma_m^2))``
on each argument.  ``arccos`` (orders 0 and 1) and ``sigmoid_nn`` are the
classic non-stationary baselines; both augment inputs with a constant 1.
"""
from dataclasses import asdict, dataclass
from math import factorial, inf

import numpy as np

from .errors import InputError

STATIONARY = ("matern", "rbf", "exponential")
FAMILIES = STATIONARY + ("arccos", "sigmoid_nn", "local_matern")
SUPPORTED_NU = (0.5, 1.5, 2.5, 3.5)


@dataclass(frozen=True)
class KernelSpec:
    family: str
    nu: float = 1.5
    lengthscale: float = 1.0
    variance: float = 1.0
    order: int = 1          # arccos only
    sigma0: float = 1.0     # sigmoid_nn bias-weight std
    sigma: float = 1.0      # sigmoid_nn input-weight std
    sigma_m: float = 1.0    # local_matern envelope width

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InputError(f"unknown kernel family {self.family!r}")
        if not (self.lengthscale > 0 and np.isfinite(self.lengthscale)):
            raise InputError("lengthscale must be positive")
        if not (self.variance > 0 and np.isfinite(self.variance)):
            raise InputError("variance must be positive")
        if self.family in ("matern", "local_matern") and self.nu not in SUPPORTED_NU:
            raise InputError(f"unsupported smoothness nu={self.nu}; supported: {SUPPORTED_NU}")
        if self.family == "arccos" and self.order not in (0, 1):
            raise InputError("arccos order must be 0 or 1")
        if self.family == "sigmoid_nn" and not (self.sigma0 > 0 and self.sigma > 0):
            raise InputError("sigmoid_nn weight scales must be positive")
        if self.family == "local_matern" and not self.sigma_m > 0:
            raise InputError("sigma_m must be positive")

    @property
    def stationary(self):
        return self.family in STATIONARY

    @property
    def smoothness(self):
        """Matern smoothness, with inf for RBF."""
        if self.family == "rbf":
            return inf
        if self.family == "exponential":
            return 0.5
        return self.nu

    @classmethod
    def matern(cls, nu, lengthscale=1.0, variance=1.0):
        return cls("matern", nu=nu, lengthscale=lengthscale, variance=variance)

    @classmethod
    def rbf(cls, lengthscale=1.0, variance=1.0):
        return cls("rbf", lengthscale=lengthscale, variance=variance)

    @classmethod
    def exponential(cls, lengthscale=1.0, variance=1.0):
        return cls("exponential", lengthscale=lengthscale, variance=variance)

    @classmethod
    def local_matern(cls, nu, sigma_m, lengthscale=1.0, variance=1.0):
        return cls("local_matern", nu=nu, sigma_m=sigma_m, lengthscale=lengthscale, variance=variance)

    def to_record(self):
        return {k: v for k, v in asdict(self).items()}

    @classmethod
    def from_record(cls, rec):
        """Build from a flat key-value mapping (strings allowed)."""
        kw = {"family": str(rec["family"]).lower()}
        for key, conv in (("nu", _parse_nu), ("lengthscale", float), ("variance", float),
                          ("order", int), ("sigma0", float), ("sigma", float),
                          ("sigma_m", float)):
            if key in rec and rec[key] not in (None, ""):
                kw[key] = conv(rec[key])
        return cls(**kw)


def _parse_nu(value):
    if isinstance(value, str) and "/" in value:
        num, den = value.split("/")
        return float(num) / float(den)
    return float(value)


def matern_half_integer(r, nu):
    """Unit-variance, unit-lengthscale Matern at distances ``r >= 0``."""
    p = int(round(nu - 0.5))
    if nu not in SUPPORTED_NU:
        raise InputError(f"unsupported smoothness nu={nu}")
    a = np.sqrt(2.0 * nu) * np.asarray(r, dtype=np.float64)
    poly = np.zeros_like(a)
    for i in range(p + 1):
        coef = factorial(p + i) / (factorial(i) * factorial(p - i))
        poly = poly + coef * (2.0 * a) ** (p - i)
    return np.exp(-a) * poly * factorial(p) / factorial(2 * p)


def _stationary_of_distance(spec, r):
    s = np.asarray(r, dtype=np.float64) / spec.lengthscale
    if spec.family == "rbf":
        k = np.exp(-0.5 * s * s)
    elif spec.family == "exponential":
        k = np.exp(-s)
    else:
        k = matern_half_integer(s, spec.nu)
    return spec.variance * k


def kernel_of_distance(spec, r):
    """Stationary kernel as a function of the distance ``r``."""
    if not spec.stationary:
        raise InputError(f"{spec.family} is not stationary")
    return _stationary_of_distance(spec, r)


def _arccos(order, X, X2):
    Xa = np.concatenate([np.ones(X.shape[:-1] + (1,)), X], axis=-1)
    X2a = np.concatenate([np.ones(X2.shape[:-1] + (1,)), X2], axis=-1)
    n1 = np.linalg.norm(Xa, axis=-1)[:, None]
    n2 = np.linalg.norm(X2a, axis=-1)[None, :]
    norms = n1 * n2
    cos = np.clip((Xa @ X2a.T) / norms, -1.0, 1.0)
    theta = np.arccos(cos)
    if order == 0:
        return (np.pi - theta) / np.pi
    return norms * (np.sin(theta) + (np.pi - theta) * cos) / np.pi


def _sigmoid_nn(spec, X, X2):
    # scale both sides by the weight std so the cross term is bitwise symmetric
    s = np.concatenate([[spec.sigma0], np.full(X.shape[-1], spec.sigma)])
    Xa = np.concatenate([np.ones((X.shape[0], 1)), X], axis=1) * s
    X2a = np.concatenate([np.ones((X2.shape[0], 1)), X2], axis=1) * s
    cross = 2.0 * (Xa @ X2a.T)
    d1 = 1.0 + 2.0 * np.sum(Xa * Xa, axis=1)
    d2 = 1.0 + 2.0 * np.sum(X2a * X2a, axis=1)
    arg = np.clip(cross / np.sqrt(d1[:, None] * d2[None, :]), -1.0, 1.0)
    return (2.0 / np.pi) * np.arcsin(arg)


def _as_points(X, name):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 0:
        X = X.reshape(1, 1)
    elif X.ndim == 1:
        X = X[:, None]
    elif X.ndim != 2:
        raise InputError(f"{name} must be a matrix of points")
    if not np.all(np.isfinite(X)):
        raise InputError(f"{name} contains non-finite values")
    return X


def gram(spec, X, X_prime=None):
    """Gram matrix ``G[i, j] = k(X[i], X_prime[j])``.

    1-D arrays are read as n points in one dimension.
    """
    X = _as_points(X, "X")
    X2 = X if X_prime is None else _as_points(X_prime, "X_prime")
    if X.shape[1] != X2.shape[1]:
        raise InputError(f"dimension mismatch: {X.shape[1]} vs {X2.shape[1]}")
    fam = spec.family
    if fam in STATIONARY or fam == "local_matern":
        # explicit differences keep the result exactly symmetric and shift-invariant
        r = np.sqrt(np.sum((X[:, None, :] - X2[None, :, :]) ** 2, axis=-1))
        if fam == "local_matern":
            base = spec.variance * matern_half_integer(r / spec.lengthscale, spec.nu)
            e1 = np.exp(-np.sum(X * X, axis=1) / (2.0 * spec.sigma_m**2))
            e2 = np.exp(-np.sum(X2 * X2, axis=1) / (2.0 * spec.sigma_m**2))
            return base * (e1[:, None] * e2[None, :])
        return _stationary_of_distance(spec, r)
    if fam == "arccos":
        return spec.variance * _arccos(spec.order, X, X2)
    return spec.variance * _sigmoid_nn(spec, X, X2)


def kernel_eval(spec, x, x_prime):
    """Kernel value for a single pair of points (scalars or vectors)."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    xp = np.atleast_1d(np.asarray(x_prime, dtype=np.float64))
    if x.ndim != 1 or xp.ndim != 1:
        raise InputError("kernel_eval takes two single points")
    if x.shape != xp.shape:
        raise InputError(f"dimension mismatch: {x.shape[0]} vs {xp.shape[0]}")
    return float(gram(spec, x[None, :], xp[None, :])[0, 0])
