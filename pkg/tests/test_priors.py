import numpy as np
import pytest
from scipy import integrate, stats

from lfads.exceptions import PosteriorWidthError, PriorError
from lfads.priors import (
    AutoregressiveMultivariateNormal,
    GaussianPosterior,
    MultivariateNormal,
    MultivariateStudentT,
    kl_gaussian_diag,
    kl_sampled,
    make_posterior,
    sample,
)
from lfads.tensor import Tensor, check_gradients, reduce_sum


def posterior(mean, logvar):
    return GaussianPosterior(Tensor(np.asarray(mean, dtype=float)), Tensor(np.asarray(logvar, dtype=float)))


def test_make_posterior_splits_and_clamps():
    raw = Tensor(np.array([[0.5, -1.0, 20.0, -30.0]]))
    post = make_posterior(raw)
    np.testing.assert_array_equal(post.mean.data, [[0.5, -1.0]])
    np.testing.assert_array_equal(post.logvar.data, [[16.0, -16.0]])
    with pytest.raises(PosteriorWidthError):
        make_posterior(Tensor(np.zeros((2, 3))))


def test_sample_modes(rng):
    post = posterior([[1.0, 2.0]], [[0.0, 0.0]])
    assert sample(post, deterministic=True) is post.mean
    with pytest.raises(PriorError):
        sample(post)
    draws = np.stack([sample(post, rng).data for _ in range(2000)])
    np.testing.assert_allclose(draws.mean(axis=0), [[1.0, 2.0]], atol=0.1)


def test_gaussian_kl_closed_form():
    prior = MultivariateNormal(mean=0.5, variance=0.1).build(3)
    mean = np.array([[0.1, -0.3, 1.2], [0.0, 0.0, 0.0]])
    logvar = np.array([[-1.0, 0.3, -2.0], [0.0, -0.5, 0.5]])
    kl = kl_gaussian_diag(posterior(mean, logvar), prior).data

    var_q, var_p = np.exp(logvar), 0.1
    expected = 0.5 * np.sum(var_q / var_p + (mean - 0.5) ** 2 / var_p - 1.0 + np.log(var_p) - logvar, axis=1)
    np.testing.assert_allclose(kl, expected, rtol=1e-12)


def test_gaussian_kl_of_identical_distributions_is_zero():
    prior = MultivariateNormal(mean=0.0, variance=0.1).build(2)
    post = posterior([[0.0, 0.0]], [[np.log(0.1), np.log(0.1)]])
    assert kl_gaussian_diag(post, prior).item() == pytest.approx(0.0, abs=1e-12)


def test_sampled_kl_matches_analytic(rng):
    n = 100000
    for _ in range(10):
        prior = MultivariateNormal(mean=0.0, variance=float(rng.uniform(0.1, 1.0))).build(3)
        mean = np.tile(rng.normal(0.0, 0.5, size=(1, 3)), (n, 1))
        logvar = np.tile(rng.normal(-0.5, 0.5, size=(1, 3)), (n, 1))
        post = posterior(mean, logvar)
        estimates = kl_sampled(post, prior, sample(post, rng)).data
        analytic = kl_gaussian_diag(posterior(mean[:1], logvar[:1]), prior).item()
        stderr = estimates.std() / np.sqrt(n)
        assert abs(estimates.mean() - analytic) < 4.0 * stderr


def test_analytic_kl_needs_gaussian_prior():
    prior = MultivariateStudentT().build(2)
    with pytest.raises(PriorError):
        kl_gaussian_diag(posterior([[0.0, 0.0]], [[0.0, 0.0]]), prior)


def test_normal_prior_normalizes():
    prior = MultivariateNormal(mean=0.3, variance=0.2).build(1)
    density = lambda x: float(np.exp(prior.log_prob(Tensor(np.array([[x]]))).item()))
    total, _ = integrate.quad(density, -np.inf, np.inf)
    assert total == pytest.approx(1.0, abs=1e-7)


def test_student_t_matches_scipy():
    prior = MultivariateStudentT(df=4.0, loc=0.5, scale=2.0).build(3)
    x = np.array([[0.0, 1.0, -3.0], [10.0, 0.5, 2.0]])
    expected = stats.t.logpdf(x, df=4.0, loc=0.5, scale=2.0).sum(axis=1)
    np.testing.assert_allclose(prior.log_prob(Tensor(x)).data, expected, rtol=1e-10)
    assert prior.df == pytest.approx(4.0)


def test_student_t_normalizes():
    prior = MultivariateStudentT(df=3.0, scale=0.7).build(1)
    density = lambda x: float(np.exp(prior.log_prob(Tensor(np.array([[x]]))).item()))
    total, _ = integrate.quad(density, -np.inf, np.inf)
    assert total == pytest.approx(1.0, abs=1e-6)


def test_student_t_sequence_input():
    prior = MultivariateStudentT(df=5.0).build(2)
    x = np.random.default_rng(0).standard_normal((3, 4, 2))
    expected = stats.t.logpdf(x, df=5.0).sum(axis=(1, 2))
    np.testing.assert_allclose(prior.log_prob(Tensor(x)).data, expected, rtol=1e-10)


def test_autoregressive_matches_gaussian_process():
    tau, variance, steps = 4.0, 0.3, 6
    prior = AutoregressiveMultivariateNormal(tau=tau, variance=variance).build(2)
    phi = np.exp(-1.0 / tau)
    np.testing.assert_allclose(prior.phi().data, phi)

    lags = np.abs(np.subtract.outer(np.arange(steps), np.arange(steps)))
    cov = variance * phi ** lags
    x = np.random.default_rng(1).standard_normal((2, steps, 2))
    expected = [
        sum(stats.multivariate_normal.logpdf(x[b, :, d], cov=cov) for d in range(2))
        for b in range(2)
    ]
    np.testing.assert_allclose(prior.log_prob(Tensor(x)).data, expected, rtol=1e-10)


def test_autoregressive_needs_sequences():
    prior = AutoregressiveMultivariateNormal().build(2)
    with pytest.raises(PriorError):
        prior.log_prob(Tensor(np.zeros(2)))
    with pytest.raises(PriorError):
        prior.log_prob(Tensor(np.zeros((2, 3, 4, 2))))
    np.testing.assert_array_equal(prior.mean().data, [0.0, 0.0])


def test_unbatched_latent_gives_scalar():
    x = np.random.default_rng(5).standard_normal((3, 2))
    ar = AutoregressiveMultivariateNormal().build(2)
    single = ar.log_prob(Tensor(x))
    assert single.shape == ()
    np.testing.assert_allclose(single.data, ar.log_prob(Tensor(x[None])).data[0], rtol=1e-12)

    cauchy = MultivariateStudentT(df=1.0).build(1)
    value = cauchy.log_prob(Tensor(np.zeros(1)))
    assert value.shape == ()
    np.testing.assert_allclose(value.data, -np.log(np.pi), rtol=1e-12)

    normal = MultivariateNormal(variance=0.5).build(2)
    value = normal.log_prob(Tensor(x[0]))
    assert value.shape == ()
    np.testing.assert_allclose(value.data, normal.log_prob(Tensor(x[:1])).data[0], rtol=1e-12)


def test_prior_build_rules():
    prior = MultivariateNormal()
    with pytest.raises(PriorError):
        prior.mean()
    prior.build(3)
    assert prior.build(3) is prior
    with pytest.raises(PriorError):
        prior.build(4)
    with pytest.raises(PriorError):
        MultivariateNormal().build(0)
    with pytest.raises(ValueError):
        MultivariateNormal(variance=0.0)


def test_trainable_parameters():
    assert set(MultivariateNormal().build(2).parameters()) == {"logvar"}
    assert set(MultivariateNormal(trainable_mean=True).build(2).parameters()) == {"mean", "logvar"}
    assert set(AutoregressiveMultivariateNormal().build(2).parameters()) == {"logtau", "logvar"}
    assert set(MultivariateStudentT().build(2).parameters()) == {"logscale"}


def test_non_finite_latent_rejected():
    prior = MultivariateNormal().build(1)
    with pytest.raises(PriorError):
        prior.log_prob(Tensor(np.array([[np.nan]])))


@pytest.mark.parametrize("prior", [
    MultivariateNormal(trainable_mean=True),
    AutoregressiveMultivariateNormal(tau=3.0),
    MultivariateStudentT(df=6.0, trainable_df=True, trainable_loc=True),
])
def test_prior_gradients(prior):
    prior.build(2)
    x = Tensor(np.random.default_rng(2).standard_normal((3, 5, 2)), requires_grad=True)
    params = dict(prior.parameters(), x=x)
    report = check_gradients(lambda: reduce_sum(prior.log_prob(x)), params, max_coords=None)
    assert report.max_error < 1e-5, report.worst()
