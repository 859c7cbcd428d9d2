"""Raw pool, Boltzmann restarts and bounded refinement."""

import numpy as np
import pytest
from scipy import stats

from src.optimizer import (
    boltzmann_indices,
    boltzmann_restarts,
    draw_raw_pool,
    draw_sobol,
    fd_gradient,
    optimize_acquisition,
    refine,
    sobol_engine,
)
from src.protocols.bo_schema import OptSpec
from src.protocols.errors import NonFiniteAcquisition


def peak(center):
    c = np.asarray(center, dtype=float)

    def acq(X):
        return -np.sum((np.atleast_2d(X) - c) ** 2, axis=1)

    return acq


class CountingAcquisition:
    """Quadratic acquisition that records prepare_pool calls."""

    def __init__(self, center):
        self.inner = peak(center)
        self.prepared = []

    def prepare_pool(self, X):
        self.prepared.append(X.shape[0])

    def __call__(self, X):
        return self.inner(X)


class TestSobol:
    """Scrambled Sobol draws."""

    def test_pool_inside_box(self):
        spec = OptSpec(raw_samples=64, num_restarts=4, lower=[-2.0, 0.0, 5.0], upper=[2.0, 1.0, 10.0])
        pool = draw_raw_pool(spec, seed=0)
        assert pool.shape == (64, 3)
        assert np.all(pool >= spec.lower) and np.all(pool <= spec.upper)

    def test_pool_deterministic(self):
        spec = OptSpec.unit_cube(2, raw_samples=32, num_restarts=2)
        assert np.array_equal(draw_raw_pool(spec, seed=5), draw_raw_pool(spec, seed=5))
        assert not np.array_equal(draw_raw_pool(spec, seed=5), draw_raw_pool(spec, seed=6))

    def test_engine_continues_sequence(self):
        whole = draw_sobol(sobol_engine(3, 11), 16, np.zeros(3), np.ones(3))
        engine = sobol_engine(3, 11)
        first = draw_sobol(engine, 10, np.zeros(3), np.ones(3))
        rest = draw_sobol(engine, 6, np.zeros(3), np.ones(3))
        assert np.array_equal(np.vstack([first, rest]), whole), "successive draws continue one sequence"


class TestBoltzmann:
    """Restart selection from pool values."""

    def test_distinct_indices(self, rng):
        idx = boltzmann_indices(rng.standard_normal(100), 10, seed=1)
        assert len(set(idx.tolist())) == 10

    def test_all_points_when_k_covers_pool(self):
        assert np.array_equal(boltzmann_indices([3.0, 1.0, 2.0], 3, seed=0), [0, 1, 2])

    def test_nonfinite_values_never_chosen(self):
        values = np.array([1.0, np.nan, 0.5, -np.inf, 2.0])
        for seed in range(20):
            idx = boltzmann_indices(values, 3, seed=seed)
            assert not set(idx.tolist()) & {1, 3}

    def test_single_draw_follows_softmax_of_zscores(self):
        values = np.array([0.0, 1.0, 2.0, 3.0])
        z = (values - values.mean()) / values.std()
        p_top = np.exp(z[3]) / np.exp(z).sum()
        hits = sum(int(boltzmann_indices(values, 1, seed=s)[0] == 3) for s in range(4000))
        assert hits / 4000 == pytest.approx(p_top, abs=0.03)

    def test_equal_values_select_uniformly(self):
        values = np.full(10, 0.7)
        rng = np.random.Generator(np.random.Philox(77))
        counts = np.bincount([boltzmann_indices(values, 1, seed=rng)[0] for _ in range(100_000)], minlength=10)
        result = stats.chisquare(counts)
        assert result.pvalue > 0.001, f"selection not uniform on equal values: {counts}"

    def test_restart_points_come_from_pool(self, rng):
        pool = rng.uniform(size=(20, 2))
        starts = boltzmann_restarts(pool, rng.standard_normal(20), 5, seed=2)
        assert starts.shape == (5, 2)
        for s in starts:
            assert any(np.array_equal(s, p) for p in pool)
        with pytest.raises(ValueError):
            boltzmann_restarts(pool, rng.standard_normal(20), 21, seed=2)


class TestRefine:
    """Bounded L-BFGS-B ascent."""

    def test_reaches_interior_peak(self):
        spec = OptSpec.unit_cube(2, raw_samples=8, num_restarts=1)
        x, value = refine([0.1, 0.9], peak([0.3, 0.6]), spec)
        assert np.allclose(x, [0.3, 0.6], atol=1e-3)
        assert value >= peak([0.3, 0.6])(np.array([[0.1, 0.9]]))[0]

    def test_stays_in_box(self):
        spec = OptSpec(raw_samples=8, num_restarts=1, lower=[0.0, 0.0], upper=[1.0, 1.0])
        x, _ = refine([0.5, 0.5], peak([3.0, -2.0]), spec)
        assert np.allclose(x, [1.0, 0.0], atol=1e-6)

    def test_constant_acquisition_keeps_start(self):
        spec = OptSpec.unit_cube(3, raw_samples=8, num_restarts=1)
        start = np.array([0.25, 0.5, 0.75])
        x, value = refine(start, lambda X: np.full(len(np.atleast_2d(X)), 2.0), spec)
        assert np.array_equal(x, start), "nothing to climb, so the start is returned"
        assert value == 2.0

    def test_coordinate_sum_reaches_upper_corner(self):
        spec = OptSpec.unit_cube(4, raw_samples=8, num_restarts=1)
        x, value = refine([0.2, 0.4, 0.6, 0.8], lambda X: np.sum(np.atleast_2d(X), axis=1), spec)
        assert np.allclose(x, np.ones(4), atol=1e-6), f"stopped at {x}"
        assert value == pytest.approx(4.0, abs=4e-6)

    def test_nonfinite_start_raises(self):
        spec = OptSpec.unit_cube(1, raw_samples=4, num_restarts=1)
        with pytest.raises(NonFiniteAcquisition):
            refine([0.5], lambda X: np.full(len(X), np.nan), spec)


class TestOptimizeAcquisition:
    """End-to-end inner optimization."""

    def test_never_worse_than_pool(self):
        spec = OptSpec.unit_cube(3, raw_samples=128, num_restarts=4)
        acq = peak([0.2, 0.7, 0.4])
        x, diag = optimize_acquisition(acq, spec, seed=3)
        assert diag.best_value >= diag.pool_best_value
        assert np.allclose(x, [0.2, 0.7, 0.4], atol=1e-3)
        assert len(diag.start_indices) == 4

    def test_prepare_pool_called_once(self):
        spec = OptSpec.unit_cube(2, raw_samples=16, num_restarts=2)
        acq = CountingAcquisition([0.5, 0.5])
        optimize_acquisition(acq, spec, seed=0)
        assert acq.prepared == [16]

    def test_deterministic(self):
        spec = OptSpec.unit_cube(2, raw_samples=32, num_restarts=3)
        a, _ = optimize_acquisition(peak([0.9, 0.1]), spec, seed=8)
        b, _ = optimize_acquisition(peak([0.9, 0.1]), spec, seed=8)
        assert np.array_equal(a, b)

    def test_all_nonfinite_pool_raises(self):
        spec = OptSpec.unit_cube(2, raw_samples=8, num_restarts=2)
        with pytest.raises(NonFiniteAcquisition):
            optimize_acquisition(lambda X: np.full(len(X), np.inf), spec, seed=0)


class TestFiniteDifferences:
    """Central and one-sided stencils."""

    def test_quadratic_gradient(self):
        grad = fd_gradient(lambda x: float(x @ x), np.array([0.5, -1.0]), 1e-6)
        assert np.allclose(grad, [1.0, -2.0], atol=1e-6)

    def test_one_sided_at_bound(self):
        grad = fd_gradient(lambda x: float(x[0] ** 2), np.array([1.0]), 1e-6, lower=np.array([0.0]),
                           upper=np.array([1.0]))
        assert grad[0] == pytest.approx(2.0, abs=1e-4)
