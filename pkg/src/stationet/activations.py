"""Periodic activation functions and their (sub)derivatives.

All periodic kinds have period 2*pi and are scaled so that, under a
Uniform(-pi, pi) bias, their first harmonic matches ``sqrt(2) * sin``:

* ``sin``      -- ``sqrt(2) sin(x)``
* ``sincos``   -- ``sin(x) + cos(x)``, meant to be used without a bias
* ``triangle`` -- triangle wave with slope ``+-pi / (2 sqrt(2))``
* ``prelu``    -- periodic ReLU, ``pi/4`` times the sum of two triangle
  waves a quarter period apart
* ``relu``     -- non-periodic baseline

At kinks the gradient is the left derivative.
"""
from enum import Enum

import numpy as np

from . import _backend
from .errors import InputError


class ActivationKind(str, Enum):
    SIN = "sin"
    SINCOS = "sincos"
    TRIANGLE = "triangle"
    PRELU = "prelu"
    RELU = "relu"

    @property
    def code(self):
        return _CODES[self]

    @property
    def periodic(self):
        return self is not ActivationKind.RELU

    @property
    def uses_bias(self):
        """Whether the infinite-width construction integrates over a bias."""
        return self is not ActivationKind.SINCOS

    @property
    def mixture_normalizer(self):
        """Prior variance ``E[sigma(w x + b)^2]`` relative to the first harmonic.

        The piecewise-linear waves carry all odd harmonics with weights
        ``lambda_k^-4``; their kernel at r=0 is ``sum (2k+1)^-4 = pi^4 / 96``.
        """
        if self in (ActivationKind.TRIANGLE, ActivationKind.PRELU):
            return np.pi**4 / 96.0
        return 1.0


_CODES = {
    ActivationKind.SIN: 0,
    ActivationKind.SINCOS: 1,
    ActivationKind.TRIANGLE: 2,
    ActivationKind.PRELU: 3,
    ActivationKind.RELU: 4,
}


def as_kind(kind):
    if isinstance(kind, ActivationKind):
        return kind
    try:
        return ActivationKind(str(kind).lower())
    except ValueError:
        names = ", ".join(k.value for k in ActivationKind)
        raise InputError(f"unknown activation {kind!r}; expected one of {names}") from None


def _scalar_or_array(x, out):
    return float(out) if np.ndim(x) == 0 else out


def activate(kind, x):
    """Evaluate the activation elementwise; scalars in, scalar out."""
    kind = as_kind(kind)
    arr = np.asarray(x, dtype=np.float64)
    return _scalar_or_array(x, _backend.activate(kind.code, arr))


def activate_grad(kind, x):
    kind = as_kind(kind)
    arr = np.asarray(x, dtype=np.float64)
    return _scalar_or_array(x, _backend.activate_grad(kind.code, arr))


def kink_distance(kind, x):
    """Distance from ``x`` to the nearest non-differentiable point of ``kind``.

    Infinite for the smooth activations.
    """
    kind = as_kind(kind)
    x = np.asarray(x, dtype=np.float64)
    if kind in (ActivationKind.SIN, ActivationKind.SINCOS):
        return np.full(x.shape, np.inf)
    if kind is ActivationKind.RELU:
        return np.abs(x)
    # triangle kinks at pi*(m - 1/2); periodic ReLU adds the quarter-shifted set
    step = np.pi if kind is ActivationKind.TRIANGLE else 0.5 * np.pi
    offset = 0.5 * np.pi
    u = np.mod(x - offset, step)
    return np.minimum(u, step - u)
