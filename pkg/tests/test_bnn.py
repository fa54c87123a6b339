import numpy as np
import pytest
from scipy import special

from stationet import (ActivationKind, BnnParams, HmcConfig, Hyperpriors, InputError, MapResult,
                       NumericalError, PosteriorSamples, Provenance, TaskKind, TaskSpec,
                       WeightPrior, activate, banana, bnn_forward, bnn_init, hmc_sample_bnn,
                       kink_distance, loss_terms, map_fit, neg_log_joint, neg_log_joint_grad,
                       predictive)

NORMAL = WeightPrior("normal")
T3 = WeightPrior("student_t", dof=3.0)
LOG_SQRT_2PI = 0.5 * np.log(2 * np.pi)


def reg_task(n=12, seed=0, d=1):
    rng = np.random.default_rng(seed)
    X = rng.uniform(-2, 2, (n, d))
    return TaskSpec.regression(X, np.sin(X[:, 0]) + 0.1 * rng.standard_normal(n))


def cls_task(n=12, seed=0, d=2, c=2):
    rng = np.random.default_rng(seed)
    return TaskSpec.classification(rng.normal(size=(n, d)), rng.integers(0, c, n), c)


# -- initialization ---------------------------------------------------------------

def test_init_moments_and_ranges():
    p = bnn_init(0, 1, 2000, 1, "sin", NORMAL)
    assert p.W.var() == pytest.approx(1.0, rel=0.05)
    assert np.all(np.abs(p.bias) < np.pi)
    # effective output weights V / sqrt(K) have variance 1/K
    assert (p.V / np.sqrt(p.K)).var() == pytest.approx(1 / 2000, rel=0.10)
    assert p.ell == 1.0 and p.K == 2000


def test_init_deterministic_and_validated():
    a, b = bnn_init(5, 2, 10, 3, "triangle", T3), bnn_init(5, 2, 10, 3, "triangle", T3)
    np.testing.assert_array_equal(a.to_vector(), b.to_vector())
    assert bnn_init(0, 1, 3, 1, "sin", NORMAL, lengthscale=5.0).ell == pytest.approx(5.0)
    with pytest.raises(InputError):
        bnn_init(0, 1, 0, 1, "sin", NORMAL)
    with pytest.raises(InputError):
        bnn_init(0, 1, 3, 1, "tanh", NORMAL)


def test_vector_round_trip():
    p = bnn_init(1, 2, 4, 3, "sin", NORMAL)
    q = p.from_vector(p.to_vector())
    np.testing.assert_array_equal(q.to_vector(), p.to_vector())
    assert q.W.shape == (4, 2) and q.V.shape == (3, 4) and q.v0.shape == (3,)


# -- forward ------------------------------------------------------------------------

def test_forward_zero_readout():
    p = bnn_init(0, 2, 7, 3, "prelu", T3)
    p.V[:] = 0.0
    np.testing.assert_array_equal(bnn_forward(p, "prelu", np.ones((4, 2))), 0.0)


def test_forward_single_unit():
    # b_hat = 0 gives b = 2 pi * 0.5 - pi = 0
    p = BnnParams(np.array([[1.0]]), np.array([0.0]), np.array([[1.0]]), np.array([0.0]))
    assert bnn_forward(p, "sin", [np.pi / 2])[0, 0] == pytest.approx(np.sqrt(2), abs=1e-15)


def test_forward_lengthscale_divides_frequency():
    p = bnn_init(3, 1, 5, 1, "sin", NORMAL, lengthscale=2.0)
    q = p.copy()
    q.W = p.W / 2.0
    q.log_ell = 0.0
    x = np.linspace(-1, 1, 7)
    np.testing.assert_allclose(bnn_forward(p, "sin", x), bnn_forward(q, "sin", x), atol=1e-14)


def test_forward_sin_bound():
    p = bnn_init(4, 1, 50, 2, "sin", T3)
    p.v0[:] = [0.3, -0.2]
    F = bnn_forward(p, "sin", np.linspace(-20, 20, 401))
    bound = np.abs(p.V).sum(axis=1) * np.sqrt(2) / np.sqrt(p.K) + np.abs(p.v0)
    assert np.all(np.abs(F) <= bound)


def test_forward_shape_mismatch():
    with pytest.raises(InputError):
        bnn_forward(bnn_init(0, 2, 3, 1, "sin", NORMAL), "sin", np.zeros((4, 3)))


def test_wide_network_prior_covariance():
    f = np.array([bnn_forward(bnn_init(s, 1, 2000, 1, "sin", NORMAL), "sin", [0.0, 1.0])[:, 0]
                  for s in range(300)])
    # v0 initializes at zero, so the covariance is the RBF kernel
    assert np.cov(f.T)[0, 1] == pytest.approx(np.exp(-0.5), abs=0.15)


# -- loss ----------------------------------------------------------------------------

def test_regression_exact_fit_loss_is_prior_terms():
    p = bnn_init(0, 1, 6, 1, "sin", T3)
    X = np.linspace(-1, 1, 9)[:, None]
    task = TaskSpec.regression(X, bnn_forward(p, "sin", X)[:, 0])
    terms = loss_terms(p, task, "sin", T3)
    assert terms["data"] == pytest.approx(9 * LOG_SQRT_2PI, abs=1e-12)
    assert neg_log_joint(p, task, "sin", T3) == pytest.approx(sum(terms.values()))


def test_classification_equal_logits():
    p = bnn_init(0, 2, 5, 2, "sin", NORMAL)
    p.V[:] = 0.0
    task = cls_task(10)
    assert loss_terms(p, task, "sin", NORMAL)["data"] == pytest.approx(10 * np.log(2), abs=1e-12)
    assert loss_terms(p, task, "sin", NORMAL)["noise"] == 0.0


def test_quadratic_part_scales_with_residual_squared():
    p = bnn_init(1, 1, 6, 1, "sin", NORMAL)
    X = np.linspace(-1, 1, 9)[:, None]
    f = bnn_forward(p, "sin", X)[:, 0]
    r = np.random.default_rng(0).normal(size=9)
    d1 = loss_terms(p, TaskSpec.regression(X, f + r), "sin", NORMAL)["data"] - 9 * LOG_SQRT_2PI
    d2 = loss_terms(p, TaskSpec.regression(X, f + 2 * r), "sin", NORMAL)["data"] - 9 * LOG_SQRT_2PI
    assert d2 == pytest.approx(4 * d1, rel=1e-12)


def test_prior_terms_against_direct_formulas():
    hyper = Hyperpriors()
    p = bnn_init(2, 2, 4, 1, "sin", T3, lengthscale=1.7, noise_std=0.4)
    terms = loss_terms(p, reg_task(d=2), "sin", T3)
    sig = special.expit(p.b_hat)
    # uniform bias density 1/(2 pi) times the link Jacobian 2 pi sig (1 - sig)
    assert terms["bias"] == pytest.approx(-np.sum(np.log(sig * (1 - sig))), abs=1e-12)
    from scipy import stats
    assert terms["weights"] == pytest.approx(-stats.t(3).logpdf(p.W).sum(), abs=1e-10)
    ell_density = stats.gamma(hyper.ell_shape, scale=1 / hyper.ell_rate).logpdf(p.ell) + p.log_ell
    assert terms["lengthscale"] == pytest.approx(-ell_density, abs=1e-12)
    s_density = stats.gamma(hyper.s_shape, scale=1 / hyper.s_rate).logpdf(p.s) + p.log_s
    assert terms["noise"] == pytest.approx(-s_density, abs=1e-12)


def test_non_finite_loss_names_component():
    p = bnn_init(0, 1, 3, 1, "sin", NORMAL)
    p.log_s = -800.0  # s underflows to zero
    with pytest.raises(NumericalError, match="data"):
        neg_log_joint(p, reg_task(), "sin", NORMAL)
    with pytest.raises(NumericalError, match="data"):
        neg_log_joint_grad(p, reg_task(), "sin", NORMAL)


# -- gradient -------------------------------------------------------------------------

def finite_difference(p, task, act, prior, h=1e-5):
    theta = p.to_vector()
    g = np.empty_like(theta)
    for i in range(theta.size):
        e = np.zeros_like(theta)
        e[i] = h
        g[i] = (neg_log_joint(p.from_vector(theta + e), task, act, prior)
                - neg_log_joint(p.from_vector(theta - e), task, act, prior)) / (2 * h)
    return g


def relative_error(a, b):
    return np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-6)


def kink_free(p, task, act, margin=1e-3):
    Z = task.X @ (p.W / p.ell).T + p.bias
    return np.all(kink_distance(act, Z) > margin)


@pytest.mark.parametrize("act", list(ActivationKind))
@pytest.mark.parametrize("kind", ["regression", "classification"])
def test_gradient_matches_finite_differences(act, kind):
    task = reg_task(8, d=2) if kind == "regression" else cls_task(8)
    prior = T3 if act in (ActivationKind.SIN, ActivationKind.PRELU) else NORMAL
    checked = 0
    for seed in range(40):
        p = bnn_init(seed, 2, 5, task.outputs, act, prior, lengthscale=1.3, noise_std=0.5)
        p.v0[:] = np.random.default_rng(seed).normal(size=p.v0.size)
        if not kink_free(p, task, act):
            continue
        g = neg_log_joint_grad(p, task, act, prior).to_vector()
        fd = finite_difference(p, task, act, prior)
        if kind == "classification":
            g, fd = g[:-1], fd[:-1]  # log_s does not enter the classification loss
        assert relative_error(g, fd).max() <= 1e-5
        checked += 1
        if checked == 3:
            break
    assert checked == 3


def test_zero_readout_leaves_only_prior_gradient_on_weights():
    p = bnn_init(0, 2, 5, 1, "sin", T3)
    p.V[:] = 0.0
    g = neg_log_joint_grad(p, reg_task(d=2), "sin", T3)
    np.testing.assert_allclose(g.W, T3.grad_neg_log_pdf(p.W), atol=1e-15)


def test_log_noise_gradient_at_zero_residual():
    hyper = Hyperpriors()
    p = bnn_init(0, 1, 6, 1, "sin", NORMAL, noise_std=0.7)
    X = np.linspace(-1, 1, 9)[:, None]
    task = TaskSpec.regression(X, bnn_forward(p, "sin", X)[:, 0])
    g = neg_log_joint_grad(p, task, "sin", NORMAL)
    assert g.log_s == pytest.approx(9 + hyper.s_rate * p.s - hyper.s_shape, abs=1e-9)


# -- MAP -----------------------------------------------------------------------------

def test_map_fits_sine():
    x = np.linspace(-3, 3, 20)
    task = TaskSpec.regression(x[:, None], np.sin(x))
    init = bnn_init(0, 1, 100, 1, "sin", NORMAL, noise_std=0.1)
    res = map_fit(init, task, "sin", NORMAL, iters=2000)
    pred = bnn_forward(res.params, "sin", x)[:, 0]
    assert np.sqrt(np.mean((pred - np.sin(x)) ** 2)) <= 0.1
    assert all(b <= a for a, b in zip(res.trace, res.trace[1:]))
    assert res.trace[-1] < res.trace[0]


def test_map_zero_iterations_returns_init():
    init = bnn_init(0, 1, 5, 1, "sin", NORMAL)
    res = map_fit(init, reg_task(), "sin", NORMAL, iters=0)
    assert isinstance(res, MapResult) and len(res.trace) == 1
    np.testing.assert_array_equal(res.params.to_vector(), init.to_vector())


def test_map_classification_keeps_noise_fixed():
    init = bnn_init(0, 2, 10, 2, "triangle", NORMAL)
    res = map_fit(init, cls_task(20), "triangle", NORMAL, iters=50)
    assert res.params.log_s == init.log_s
    assert all(b <= a for a, b in zip(res.trace, res.trace[1:]))


def test_map_rejects_bad_step():
    with pytest.raises(InputError):
        map_fit(bnn_init(0, 1, 5, 1, "sin", NORMAL), reg_task(), "sin", NORMAL, step=0.0)


# -- predictive ----------------------------------------------------------------------

def test_map_singleton_has_zero_marginal_variance():
    p = bnn_init(0, 2, 5, 2, "sin", NORMAL)
    s = PosteriorSamples.from_map(p)
    assert s.provenance is Provenance.MAP
    out = predictive(s, "sin", np.random.default_rng(0).normal(size=(6, 2)), "classification")
    np.testing.assert_array_equal(out["marginal_variance"], 0.0)


def test_equal_probabilities_entropy_log2():
    p = bnn_init(0, 2, 5, 2, "sin", NORMAL)
    p.V[:] = 0.0
    out = predictive(PosteriorSamples.from_map(p), "sin", np.zeros((3, 2)), "classification")
    np.testing.assert_allclose(out["entropy"], np.log(2), atol=1e-15)


def test_entropy_invariant_to_logit_shift():
    p = bnn_init(1, 2, 5, 3, "sin", NORMAL)
    X = np.random.default_rng(1).normal(size=(5, 2))
    q = p.copy()
    q.v0 = q.v0 + 7.3
    e1 = predictive(PosteriorSamples.from_map(p), "sin", X, "classification")["entropy"]
    e2 = predictive(PosteriorSamples.from_map(q), "sin", X, "classification")["entropy"]
    np.testing.assert_allclose(e1, e2, atol=1e-12)


def test_regression_predictive_reduction():
    draws = [bnn_init(s, 1, 5, 1, "sin", NORMAL, noise_std=0.2 + 0.1 * s) for s in range(4)]
    X = np.linspace(-1, 1, 5)
    y = np.cos(X)
    out = predictive(PosteriorSamples(draws, Provenance.HMC), "sin", X, "regression", y=y)
    F = np.array([bnn_forward(p, "sin", X)[:, 0] for p in draws])
    s2 = np.array([p.s**2 for p in draws])
    np.testing.assert_allclose(out["mean"], F.mean(0), atol=1e-14)
    np.testing.assert_allclose(out["variance"], F.var(0) + s2.mean(), atol=1e-14)
    dens = np.mean(np.exp(-0.5 * (y - F) ** 2 / s2[:, None]) / np.sqrt(2 * np.pi * s2[:, None]), 0)
    np.testing.assert_allclose(out["nlpd"], -np.log(dens), atol=1e-12)
    v0 = np.array([p.v0[0] for p in draws])
    np.testing.assert_allclose(out["layer_variance"], (F - v0[:, None]).var(0), atol=1e-14)


def test_classification_predictive_reduction():
    draws = [bnn_init(s, 2, 5, 3, "sin", NORMAL) for s in range(4)]
    X = np.random.default_rng(2).normal(size=(5, 2))
    y = np.array([0, 1, 2, 1, 0])
    out = predictive(PosteriorSamples(draws, Provenance.HMC), "sin", X, "classification", y=y)
    P = np.array([special.softmax(bnn_forward(p, "sin", X), axis=1) for p in draws])
    probs = P.mean(0)
    np.testing.assert_allclose(out["probs"], probs, atol=1e-14)
    np.testing.assert_allclose(out["marginal_variance"], P.var(0).mean(1), atol=1e-14)
    np.testing.assert_allclose(out["entropy"], -np.sum(probs * np.log(probs), 1), atol=1e-14)
    np.testing.assert_allclose(out["nlpd"], -np.log(probs[np.arange(5), y]), atol=1e-14)


def test_posterior_samples_validation():
    with pytest.raises(InputError):
        PosteriorSamples([], Provenance.HMC)
    with pytest.raises(InputError):
        PosteriorSamples([bnn_init(0, 1, 3, 1, "sin", NORMAL), bnn_init(0, 1, 4, 1, "sin", NORMAL)],
                         Provenance.HMC)


def test_task_validation():
    with pytest.raises(InputError):
        TaskSpec.classification(np.zeros((3, 1)), [0, 1, 2], classes=2)
    with pytest.raises(InputError):
        TaskSpec.regression(np.zeros((3, 1)), [0.0, np.nan, 1.0])
    with pytest.raises(InputError):
        TaskSpec.regression(np.zeros((3, 1)), [0.0, 1.0])
    assert TaskSpec.regression(np.zeros(3), np.zeros(3)).X.shape == (3, 1)


# -- HMC -------------------------------------------------------------------------------

def test_hmc_banana_short_run():
    X, y = banana(40, 0.1, seed=0)
    task = TaskSpec.classification(X, y)
    cfg = HmcConfig(chains=1, warmup=150, iters=200, seed=0)
    samples = hmc_sample_bnn(task, "sin", T3, cfg, hidden_units=30)
    assert samples.provenance is Provenance.HMC and len(samples.draws) == 200
    assert 0.6 <= samples.info["accept_rate"][0] <= 0.95
    out = predictive(samples, "sin", X, TaskKind.CLASSIFICATION)
    assert np.mean(out["probs"].argmax(1) == y) >= 0.9
    for p in samples.draws:
        assert np.all(np.abs(p.bias) < np.pi)
        assert p.log_s == 0.0


def test_hmc_regression_deterministic():
    task = reg_task(10)
    cfg = HmcConfig(chains=2, warmup=100, iters=30, seed=4, leapfrog_steps=8)
    a = hmc_sample_bnn(task, "sincos", NORMAL, cfg, hidden_units=6, thin=3)
    b = hmc_sample_bnn(task, "sincos", NORMAL, cfg, hidden_units=6, thin=3)
    assert len(a.draws) == 20
    for p, q in zip(a.draws, b.draws):
        np.testing.assert_array_equal(p.to_vector(), q.to_vector())
