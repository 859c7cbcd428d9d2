"""Gradient surrogates: per-coordinate fits and the gradient posterior."""

import numpy as np
import pytest

from src.protocols.bo_schema import FitConfig, KernelSpec
from src.protocols.errors import DimensionMismatch, FactorizationFailed
from src.surrogates.gp import fit, posterior
from src.surrogates.gradient import PosteriorGradient, fit_gradient_models, posterior_gradient


def quick_config(**kwargs) -> FitConfig:
    return FitConfig(restarts=2, max_iters=40, **kwargs)


class TestFitGradientModels:
    """One independent model per gradient column."""

    def test_one_dimension_reduces_to_single_fit(self, rng):
        X = rng.uniform(size=(8, 1))
        g = np.cos(4 * X[:, 0])
        surrogate = fit_gradient_models(X, g[:, None], quick_config(), seeds=[3])
        single = fit(X, g, quick_config(), rng=np.random.default_rng(3))
        Q = rng.uniform(size=(5, 1))
        assert surrogate.dim == 1
        assert surrogate.models[0].kernel == single.kernel
        pg = posterior_gradient(surrogate, Q)
        mu, var = posterior(single, Q)
        assert np.array_equal(pg.mean[:, 0], mu) and np.array_equal(pg.var_diag[:, 0], var)

    def test_column_permutation_permutes_models(self, rng):
        X = rng.uniform(size=(10, 3))
        G = np.column_stack([np.sin(3 * X[:, 0]), X[:, 1] ** 2, np.exp(X[:, 2])])
        perm = [2, 0, 1]
        kernel = KernelSpec(lengthscales=[0.4])
        cfg = FitConfig(ard=False, fixed_hyperparams=kernel)
        a = fit_gradient_models(X, G, cfg)
        b = fit_gradient_models(X, G[:, perm], cfg)
        Q = rng.uniform(size=(4, 3))
        assert np.allclose(posterior_gradient(a, Q).mean[:, perm], posterior_gradient(b, Q).mean, atol=1e-12)

    def test_constant_column(self, rng):
        X = rng.uniform(size=(12, 2))
        G = np.column_stack([np.full(12, 2.5), X[:, 0]])
        surrogate = fit_gradient_models(X, G, quick_config())
        pg = posterior_gradient(surrogate, rng.uniform(size=(6, 2)))
        assert np.allclose(pg.mean[:, 0], 2.5, atol=1e-5), "constant gradient column must be reproduced"

    def test_thread_pool_matches_sequential(self, rng):
        X = rng.uniform(size=(10, 3))
        G = rng.standard_normal((10, 3))
        a = fit_gradient_models(X, G, quick_config(), seeds=[5, 6, 7], max_workers=1)
        b = fit_gradient_models(X, G, quick_config(), seeds=[5, 6, 7], max_workers=3)
        for ma, mb in zip(a.models, b.models):
            assert ma.kernel == mb.kernel, "fits must not depend on execution order"

    def test_shape_checks(self, rng):
        X = rng.uniform(size=(5, 2))
        with pytest.raises(DimensionMismatch):
            fit_gradient_models(X, rng.standard_normal((5, 3)), quick_config())
        with pytest.raises(DimensionMismatch):
            fit_gradient_models(X, rng.standard_normal((5, 2)), quick_config(), seeds=[1])

    def test_failure_reports_dimension(self, monkeypatch, rng):
        import src.surrogates.gradient as gradient_module

        real_fit = gradient_module.fit

        def failing_fit(X, y, cfg, bounds=None, rng=None):
            if np.allclose(y, 7.0):
                raise FactorizationFailed(cfg.max_jitter)
            return real_fit(X, y, cfg, bounds=bounds, rng=rng)

        monkeypatch.setattr(gradient_module, "fit", failing_fit)
        X = rng.uniform(size=(6, 3))
        G = np.column_stack([X[:, 0], np.full(6, 7.0), X[:, 2]])
        with pytest.raises(FactorizationFailed) as exc:
            fit_gradient_models(X, G, quick_config())
        assert exc.value.dimension == 1


class TestPosteriorGradient:
    """Coordinate-wise posterior."""

    def test_interpolates_training_gradients(self, rng):
        X = rng.uniform(size=(8, 2))
        G = np.column_stack([np.sin(2 * X[:, 0]), X[:, 0] * X[:, 1]])
        kernel = KernelSpec(lengthscales=[0.5])
        surrogate = fit_gradient_models(X, G, FitConfig(ard=False, noise=0.0, fixed_hyperparams=kernel))
        for i in range(8):
            pg = posterior_gradient(surrogate, X[i])
            assert np.allclose(pg.mean, G[i], atol=1e-6)
            assert np.all(pg.var_diag <= 1e-8)

    def test_prior_reversion_far_from_data(self, rng):
        X = rng.uniform(size=(6, 2))
        G = rng.standard_normal((6, 2))
        kernel = KernelSpec(lengthscales=[0.2], outputscale=1.3)
        cfg = FitConfig(ard=False, standardize_outputs=False, fixed_hyperparams=kernel)
        pg = posterior_gradient(fit_gradient_models(X, G, cfg), np.array([100.0, -100.0]))
        assert np.allclose(pg.mean, 0.0, atol=1e-6)
        assert np.allclose(pg.var_diag, 1.3, atol=1e-6)

    def test_identical_columns_agree(self, rng):
        X = rng.uniform(size=(9, 3))
        col = np.sin(5 * X[:, 0]) + X[:, 2]
        G = np.column_stack([col, col, col])
        surrogate = fit_gradient_models(X, G, quick_config(), seeds=[42, 42, 42])
        pg = posterior_gradient(surrogate, rng.uniform(size=3))
        assert np.allclose(pg.mean, pg.mean[0], atol=1e-10)
        assert np.allclose(pg.var_diag, pg.var_diag[0], atol=1e-10)

    def test_batch_shapes(self, rng):
        X = rng.uniform(size=(6, 4))
        surrogate = fit_gradient_models(X, rng.standard_normal((6, 4)), quick_config())
        assert posterior_gradient(surrogate, rng.uniform(size=(3, 4))).mean.shape == (3, 4)
        assert posterior_gradient(surrogate, rng.uniform(size=4)).mean.shape == (4,)
        with pytest.raises(DimensionMismatch):
            posterior_gradient(surrogate, rng.uniform(size=3))

    def test_negative_variance_rejected(self):
        with pytest.raises(ValueError):
            PosteriorGradient.of([0.0, 1.0], [1.0, -0.1])
