"""Weight priors as spectral densities of stationary kernels.

A symmetric weight prior ``p(w)`` on the hidden-layer frequencies induces,
through a periodic activation, the stationary kernel

    k(r) = integral p(w) cos(w r) dw,

so ``p = S / (2 pi)`` where ``S`` is the kernel's spectral density.
Student-t with ``2 nu`` degrees of freedom is dual to Matern-nu; the
Cauchy (``nu = 1/2``) and Normal (``nu -> inf``) priors are the
Exponential and RBF cases.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import InputError, QuadratureError

PRIOR_FAMILIES = ("normal", "cauchy", "student_t")


@dataclass(frozen=True)
class WeightPrior:
    family: str
    dof: float = 3.0
    scale: float = 1.0

    def __post_init__(self):
        if self.family not in PRIOR_FAMILIES:
            raise InputError(f"unknown prior family {self.family!r}")
        if not (self.scale > 0 and np.isfinite(self.scale)):
            raise InputError("prior scale must be positive")
        if self.family == "student_t" and not self.dof > 0:
            raise InputError("student_t dof must be positive")

    @property
    def effective_dof(self):
        """Student-t degrees of freedom, 1 for Cauchy and inf for Normal."""
        return {"normal": np.inf, "cauchy": 1.0}.get(self.family, self.dof)

    def log_pdf(self, w):
        w = np.asarray(w, dtype=np.float64)
        if not np.all(np.isfinite(w)):
            raise InputError("weights must be finite")
        z = w / self.scale
        if self.family == "normal":
            lp = -0.5 * z * z - 0.5 * np.log(2.0 * np.pi)
        else:
            u = self.effective_dof
            lp = (special.gammaln(0.5 * (u + 1.0)) - special.gammaln(0.5 * u)
                  - 0.5 * np.log(u * np.pi) - 0.5 * (u + 1.0) * np.log1p(z * z / u))
        return lp - np.log(self.scale)

    def grad_neg_log_pdf(self, w):
        """Derivative of ``-log p(w)`` with respect to ``w``."""
        w = np.asarray(w, dtype=np.float64)
        s2 = self.scale**2
        if self.family == "normal":
            return w / s2
        u = self.effective_dof
        return (u + 1.0) * w / (u * s2 + w * w)

    def sample(self, size, rng):
        """Draw from the prior with an explicit ``numpy.random.Generator``."""
        if self.family == "normal":
            z = rng.standard_normal(size)
        elif self.family == "cauchy":
            z = np.tan(np.pi * (rng.random(size) - 0.5))
        else:
            g = rng.standard_normal(size)
            chi2 = rng.chisquare(self.dof, size)
            z = g / np.sqrt(chi2 / self.dof)
        return self.scale * z

    def scalar_pdf(self):
        """A plain-float density callable, cheap enough for quadrature callbacks."""
        scale = self.scale
        if self.family == "normal":
            c = 1.0 / (math.sqrt(2.0 * math.pi) * scale)
            return lambda w: c * math.exp(-0.5 * (w / scale) ** 2)
        u = self.effective_dof
        c = math.exp(math.lgamma(0.5 * (u + 1.0)) - math.lgamma(0.5 * u)) / (math.sqrt(u * math.pi) * scale)
        e = -0.5 * (u + 1.0)
        return lambda w: c * (1.0 + (w / scale) ** 2 / u) ** e

    def cdf(self, w):
        z = np.asarray(w, dtype=np.float64) / self.scale
        if self.family == "normal":
            return special.ndtr(z)
        return special.stdtr(self.effective_dof, z)

    def to_record(self):
        return {"prior.family": self.family, "prior.dof": self.dof, "prior.scale": self.scale}

    @classmethod
    def from_record(cls, rec):
        kw = {"family": str(rec.get("prior.family", "normal")).lower().replace("-", "_")}
        if kw["family"] in ("t", "studentt", "student"):
            kw["family"] = "student_t"
        if rec.get("prior.dof") not in (None, ""):
            kw["dof"] = float(rec["prior.dof"])
        if rec.get("prior.scale") not in (None, ""):
            kw["scale"] = float(rec["prior.scale"])
        return cls(**kw)


def prior_log_pdf(prior, w):
    return float(prior.log_pdf(w)) if np.ndim(w) == 0 else prior.log_pdf(w)


def prior_sample(prior, seed, n):
    """``n`` i.i.d. draws, reproducible from ``seed``."""
    if n < 1:
        raise InputError("n must be at least 1")
    return prior.sample(n, np.random.default_rng(seed))


def matern_spectral_density(nu, w):
    """Spectral density of the unit Matern-nu kernel in one dimension."""
    if not nu > 0:
        raise InputError("nu must be positive")
    w = np.asarray(w, dtype=np.float64)
    log_c = (np.log(2.0) + 0.5 * np.log(np.pi) + special.gammaln(nu + 0.5)
             - special.gammaln(nu) + nu * np.log(2.0 * nu))
    return np.exp(log_c - (nu + 0.5) * np.log(2.0 * nu + w * w))


def prior_for_kernel(spec):
    """Weight prior whose spectral pairing yields ``spec`` (unit variance)."""
    scale = 1.0 / spec.lengthscale
    if spec.family == "rbf":
        return WeightPrior("normal", scale=scale)
    if spec.family == "exponential" or (spec.family == "matern" and spec.nu == 0.5):
        return WeightPrior("cauchy", dof=1.0, scale=scale)
    if spec.family == "matern":
        return WeightPrior("student_t", dof=2.0 * spec.nu, scale=scale)
    raise InputError(f"{spec.family} kernel has no dual weight prior")


def kernel_for_prior(prior, variance=1.0):
    """Inverse of :func:`prior_for_kernel` for the half-integer cases."""
    from .kernels import KernelSpec

    ell = 1.0 / prior.scale
    if prior.family == "normal":
        return KernelSpec.rbf(ell, variance)
    if prior.effective_dof == 1.0:
        return KernelSpec.exponential(ell, variance)
    return KernelSpec.matern(prior.effective_dof / 2.0, ell, variance)


def wiener_khinchin_numeric(prior, r, epsabs=1e-10):
    """Stationary kernel ``integral p(w) cos(w r) dw`` by adaptive quadrature.

    Uses QUADPACK's Fourier-integral routine on ``[0, inf)`` so heavy
    (Cauchy) tails are handled without truncation.
    """
    r = abs(float(r))
    if not np.isfinite(r):
        raise InputError("r must be finite")

    pdf = prior.scalar_pdf()
    with np.errstate(all="ignore"):
        if r == 0.0:
            val, err = integrate.quad(pdf, 0.0, np.inf, epsabs=epsabs, limit=200)
        else:
            val, err = integrate.quad(pdf, 0.0, np.inf, weight="cos", wvar=r,
                                      epsabs=epsabs, limlst=200, limit=200)
    if not np.isfinite(val) or err > 1e-7:
        raise QuadratureError(f"quadrature did not converge at r={r} (error estimate {err:.2e})")
    return 2.0 * val
