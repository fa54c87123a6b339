"""Fixed-length Hamiltonian Monte Carlo with dual-averaging step-size warmup.

The target is given by a function returning ``(U, grad U)`` for the
potential ``U = -log density``.  Unit mass matrix.  The step size is tuned
during warmup toward ``target_accept`` and then frozen; every iteration
jitters it uniformly by +-10% so fixed trajectory lengths cannot resonate
with periodic orbits.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, SamplingError

DIVERGENCE_ENERGY = 1000.0


@dataclass
class HmcConfig:
    chains: int = 1
    warmup: int = 500
    iters: int = 1000
    leapfrog_steps: int = 32
    seed: int = 0
    target_accept: float = 0.8
    init_step: float = 0.0    # 0 picks one heuristically
    max_divergent_frac: float = 0.1

    def __post_init__(self):
        if self.warmup < 100:
            raise InputError("warmup must be at least 100 iterations")
        if self.chains < 1 or self.iters < 1 or self.leapfrog_steps < 1:
            raise InputError("chains, iters and leapfrog_steps must be positive")


@dataclass
class ChainResult:
    draws: np.ndarray            # (iters, dim)
    accept_rate: float           # mean Metropolis acceptance probability after warmup
    step_size: float
    divergent: int
    potentials: np.ndarray = field(repr=False)


def _leapfrog(potential, theta, p, grad, eps, steps):
    p = p - 0.5 * eps * grad
    for i in range(steps):
        theta = theta + eps * p
        U, grad = potential(theta)
        if not np.isfinite(U):
            return theta, p, U, grad
        if i < steps - 1:
            p = p - eps * grad
    p = p - 0.5 * eps * grad
    return theta, p, U, grad


def _initial_step(potential, theta, U, grad, rng):
    eps = 1.0
    p = rng.standard_normal(theta.shape)
    H0 = U + 0.5 * p @ p

    def log_ratio(e):
        _, p1, U1, _ = _leapfrog(potential, theta, p, grad, e, 1)
        H1 = U1 + 0.5 * p1 @ p1
        return H0 - H1 if np.isfinite(H1) else -np.inf

    direction = 1.0 if log_ratio(eps) > np.log(0.5) else -1.0
    for _ in range(60):
        if direction * log_ratio(eps) <= direction * np.log(0.5):
            break
        eps *= 2.0**direction
    return eps


def run_chain(potential, theta0, cfg, rng):
    theta = np.array(theta0, dtype=np.float64)
    U, grad = potential(theta)
    if not np.isfinite(U):
        raise SamplingError("initial point has non-finite potential")
    eps = cfg.init_step if cfg.init_step > 0 else _initial_step(potential, theta, U, grad, rng)

    # dual averaging (gamma=0.05, t0=10, kappa=0.75)
    mu = np.log(10.0 * eps)
    h_bar, log_eps_bar = 0.0, 0.0
    total = cfg.warmup + cfg.iters
    draws = np.empty((cfg.iters, theta.size))
    pots = np.empty(cfg.iters)
    acc_sum, divergent = 0.0, 0

    for it in range(total):
        warm = it < cfg.warmup
        step = eps * rng.uniform(0.9, 1.1)
        p0 = rng.standard_normal(theta.shape)
        H0 = U + 0.5 * p0 @ p0
        th1, p1, U1, g1 = _leapfrog(potential, theta, p0, grad, step, cfg.leapfrog_steps)
        H1 = U1 + 0.5 * p1 @ p1 if np.isfinite(U1) else np.inf
        dH = H1 - H0
        accept_prob = float(np.exp(min(0.0, -dH))) if np.isfinite(dH) else 0.0
        if rng.random() < accept_prob:
            theta, U, grad = th1, U1, g1
        if warm:
            m = it + 1
            h_bar = (1.0 - 1.0 / (m + 10.0)) * h_bar + (cfg.target_accept - accept_prob) / (m + 10.0)
            log_eps = mu - np.sqrt(m) / 0.05 * h_bar
            eta = m**-0.75
            log_eps_bar = eta * log_eps + (1.0 - eta) * log_eps_bar
            eps = np.exp(log_eps)
            if it == cfg.warmup - 1:
                eps = np.exp(log_eps_bar)
        else:
            k = it - cfg.warmup
            draws[k] = theta
            pots[k] = U
            acc_sum += accept_prob
            if not np.isfinite(dH) or dH > DIVERGENCE_ENERGY:
                divergent += 1

    return ChainResult(draws, acc_sum / cfg.iters, float(eps), divergent, pots)


def hmc_sample(potential, theta0, cfg):
    """Run ``cfg.chains`` independent chains; chain ``c`` is seeded ``seed + c``.

    ``theta0`` is either one starting point or a sequence with one per chain.
    """
    theta0 = np.asarray(theta0, dtype=np.float64)
    starts = theta0 if theta0.ndim == 2 else np.tile(theta0, (cfg.chains, 1))
    if starts.shape[0] != cfg.chains:
        raise InputError("need one starting point per chain")
    results = []
    for c in range(cfg.chains):
        rng = np.random.default_rng(cfg.seed + c)
        res = run_chain(potential, starts[c], cfg, rng)
        if res.divergent > cfg.max_divergent_frac * cfg.iters:
            raise SamplingError(f"chain {c}: {res.divergent}/{cfg.iters} divergent transitions "
                                f"after warmup (step size {res.step_size:.3g})")
        results.append(res)
    return results
