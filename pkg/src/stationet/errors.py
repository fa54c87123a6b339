"""Exception hierarchy.

Every error carries a short ``category`` string; the CLI prints it as the
machine-parsable first token of its one-line failure message.
"""


class StationetError(Exception):
    category = "error"


class InputError(StationetError, ValueError):
    """Invalid argument: non-finite input, shape mismatch, unsupported option."""

    category = "input"


class ConfigError(InputError):
    category = "config"


class NumericalError(StationetError, ArithmeticError):
    """A numerical routine failed (factorization, quadrature, divergent loss)."""

    category = "numerical"


class CholeskyError(NumericalError):
    category = "cholesky"


class QuadratureError(NumericalError):
    category = "quadrature"


class SamplingError(NumericalError):
    category = "sampling"
