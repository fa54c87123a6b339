"""Pure numpy implementation of the hot kernels.

Mirrors the signatures of the compiled ``_core`` module exactly; used when
the extension is unavailable or ``STATIONET_PURE_PYTHON`` is set.
"""
import numpy as np

SIN, SINCOS, TRIANGLE, PRELU, RELU = 0, 1, 2, 3, 4

SQRT2 = np.sqrt(2.0)
TRI_SCALE = np.pi / (2.0 * SQRT2)
PRELU_SCALE = np.pi / 4.0


def _tri(z):
    # unit-slope triangle wave with amplitude pi/2 and period 2*pi
    m = np.floor(z / np.pi + 0.5)
    return (z - np.pi * m) * (1.0 - 2.0 * np.mod(m, 2.0))


def _tri_slope(z):
    # left derivative at the kinks
    t = z / np.pi + 0.5
    m = np.floor(t)
    m = np.where(t == m, m - 1.0, m)
    return 1.0 - 2.0 * np.mod(m, 2.0)


def activate(code, z):
    z = np.asarray(z, dtype=np.float64)
    if code == SIN:
        return SQRT2 * np.sin(z)
    if code == SINCOS:
        return np.sin(z) + np.cos(z)
    if code == TRIANGLE:
        return TRI_SCALE * _tri(z)
    if code == PRELU:
        return PRELU_SCALE * (_tri(z + 0.5 * np.pi) + _tri(z))
    if code == RELU:
        return np.maximum(z, 0.0)
    raise ValueError(f"unknown activation code {code}")


def activate_grad(code, z):
    z = np.asarray(z, dtype=np.float64)
    if code == SIN:
        return SQRT2 * np.cos(z)
    if code == SINCOS:
        return np.cos(z) - np.sin(z)
    if code == TRIANGLE:
        return TRI_SCALE * _tri_slope(z)
    if code == PRELU:
        return PRELU_SCALE * (_tri_slope(z + 0.5 * np.pi) + _tri_slope(z))
    if code == RELU:
        return (z > 0.0).astype(np.float64)
    raise ValueError(f"unknown activation code {code}")


def hidden_layer(code, X, W, b, inv_ell, with_grad=True):
    """Pre-activations, activations and activation slopes of one layer.

    ``Z = inv_ell * X @ W.T + b``; returns ``(Z, A, dA)`` with ``dA`` None
    when ``with_grad`` is false.
    """
    Z = (X @ W.T) * inv_ell + b
    A = activate(code, Z)
    dA = activate_grad(code, Z) if with_grad else None
    return Z, A, dA
