import numpy as np
import pytest

from stationet import HmcConfig, InputError, SamplingError, hmc_sample


def gaussian(var):
    var = np.asarray(var, dtype=float)

    def potential(theta):
        return 0.5 * np.sum(theta**2 / var), theta / var

    return potential


def test_one_dimensional_variance_four():
    (res,) = hmc_sample(gaussian([4.0]), np.zeros(1), HmcConfig(warmup=500, iters=10_000, seed=3))
    assert 3.6 <= res.draws[:, 0].var() <= 4.4
    assert 0.6 <= res.accept_rate <= 0.95


def test_two_dimensional_standard_gaussian():
    (res,) = hmc_sample(gaussian([1.0, 1.0]), np.array([2.0, -2.0]),
                        HmcConfig(warmup=500, iters=5000, seed=1))
    assert np.all(np.abs(res.draws.mean(axis=0)) <= 0.08)
    np.testing.assert_allclose(np.cov(res.draws.T), np.eye(2), atol=0.12)
    assert res.divergent == 0
    assert res.draws.shape == (5000, 2) and res.potentials.shape == (5000,)


def test_chains_deterministic_and_distinct():
    cfg = HmcConfig(chains=2, warmup=100, iters=200, seed=7)
    a = hmc_sample(gaussian([1.0, 2.0]), np.zeros(2), cfg)
    b = hmc_sample(gaussian([1.0, 2.0]), np.zeros(2), cfg)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x.draws, y.draws)
    assert not np.array_equal(a[0].draws, a[1].draws)
    # chain c uses seed + c, so chain 1 here equals chain 0 of a run seeded 8
    (c,) = hmc_sample(gaussian([1.0, 2.0]), np.zeros(2), HmcConfig(warmup=100, iters=200, seed=8))
    np.testing.assert_array_equal(a[1].draws, c.draws)


def test_per_chain_starts():
    starts = np.array([[5.0], [-5.0]])
    res = hmc_sample(gaussian([1.0]), starts, HmcConfig(chains=2, warmup=100, iters=50))
    assert len(res) == 2
    with pytest.raises(InputError):
        hmc_sample(gaussian([1.0]), np.zeros((3, 1)), HmcConfig(chains=2))


def test_fixed_step_overrides_heuristic():
    (res,) = hmc_sample(gaussian([1.0]), np.zeros(1),
                        HmcConfig(warmup=100, iters=100, init_step=0.3))
    assert res.step_size > 0


def test_persistent_divergence_is_a_sampling_failure():
    # half of all evaluations blow up, so no step size can avoid divergence
    noise = np.random.default_rng(0)

    def cliff(theta):
        if noise.random() < 0.5:
            return np.inf, np.zeros(1)
        return 0.5 * theta[0] ** 2, theta.copy()

    with pytest.raises(SamplingError, match="divergent"):
        hmc_sample(cliff, np.zeros(1), HmcConfig(warmup=100, iters=100, init_step=0.1))


def test_non_finite_start_rejected():
    with pytest.raises(SamplingError, match="initial point"):
        hmc_sample(lambda t: (np.inf, np.zeros_like(t)), np.zeros(1), HmcConfig(warmup=100, iters=10))


def test_config_validation():
    with pytest.raises(InputError):
        HmcConfig(warmup=50)
    with pytest.raises(InputError):
        HmcConfig(chains=0)
    with pytest.raises(InputError):
        HmcConfig(leapfrog_steps=0)
