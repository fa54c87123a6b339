"""Periodic activation functions, stationary kernels and their finite networks.

The compiled hidden-layer core is used when available; ``backend`` names
the implementation in use ("cython" or "python").  Set the environment
variable ``STATIONET_PURE_PYTHON=1`` before import to force the numpy path.
"""
from . import _backend
from .activations import ActivationKind, activate, activate_grad, as_kind, kink_distance
from .bnn import (BnnParams, Hyperpriors, MapResult, PosteriorSamples, Provenance, TaskKind,
                  TaskSpec, bnn_forward, bnn_init, hmc_sample_bnn, loss_terms, map_fit,
                  neg_log_joint, neg_log_joint_grad, predictive)
from .data import banana, read_csv, toy_regression_1d, write_csv
from .errors import (CholeskyError, ConfigError, InputError, NumericalError, QuadratureError,
                     SamplingError, StationetError)
from .gp import GpPosterior, gp_fit, gp_predict
from .hmc import ChainResult, HmcConfig, hmc_sample
from .kernels import KernelSpec, gram, kernel_eval, kernel_of_distance, matern_half_integer
from .mc_kernel import (McConfig, convergence_sweep, draw_network, features, mc_gram,
                        mc_kernel_estimate, mc_verify, mixture_kernel, triangle_truncation_error)
from .spectral import (WeightPrior, kernel_for_prior, matern_spectral_density, prior_for_kernel,
                       prior_log_pdf, prior_sample, wiener_khinchin_numeric)

backend = _backend.NAME
__version__ = "0.1.0"
