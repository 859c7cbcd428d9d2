"""Standard-normal utilities, EI and log-EI."""

import math

import numpy as np
import pytest

from src.acquisition.gaussian import ei, inverse_mills, log_ei, normal_pdf_cdf
from src.protocols.errors import DegenerateVariance


class TestNormalPdfCdf:
    """Gaussian constants and the Mills ratio."""

    def test_at_zero(self):
        pdf, cdf, log_cdf, mills = normal_pdf_cdf(0.0)
        assert pdf == pytest.approx(0.398942, abs=1e-6)
        assert cdf == 0.5
        assert log_cdf == pytest.approx(math.log(0.5))
        assert mills == pytest.approx(0.797885, abs=1e-6)

    def test_mills_vanishes_in_left_tail(self):
        assert inverse_mills(-40.0) < 1e-300
        assert inverse_mills(-10.0) < 1e-20

    def test_mills_asymptote(self):
        ratio = inverse_mills(10.0) / 10.0
        assert 1.0 < ratio < 1.011

    def test_mills_continuous_at_log_switch(self):
        below, above = inverse_mills(5.0 - 1e-9), inverse_mills(5.0 + 1e-9)
        assert above == pytest.approx(below, rel=1e-7)

    def test_mills_finite_far_right(self):
        for z in (8.0, 40.0, 1e3):
            m = inverse_mills(z)
            assert np.isfinite(m) and m >= z


class TestEI:
    """Closed-form expected improvement."""

    def test_unit_case(self):
        assert ei(1.0, 1.0, 0.0) == pytest.approx(1.083316, abs=1e-6)

    def test_zero_sigma(self):
        assert ei(0.5, 0.0, 0.5) == 0.0
        assert ei(0.7, 0.0, 0.5) == pytest.approx(0.2)
        assert ei(0.3, 0.0, 0.5) == 0.0

    def test_deep_tail(self):
        assert 0.0 <= ei(-10.0, 1.0, 0.0) <= 1e-20

    def test_monotone_in_mu(self):
        mus = np.linspace(-5, 5, 201)
        values = ei(mus, 1.3, 0.2)
        assert np.all(values >= 0.0)
        assert np.all(np.diff(values) >= 0.0)

    def test_monotone_in_sigma_below_best(self):
        sigmas = np.linspace(0.0, 4.0, 101)
        values = ei(-0.5, sigmas, 0.0)
        assert np.all(np.diff(values) >= 0.0)

    def test_matches_monte_carlo(self):
        g = np.random.Generator(np.random.Philox(5))
        samples = g.normal(1.0, 1.0, 2_000_000)
        mc = float(np.mean(np.maximum(samples, 0.0)))
        assert ei(1.0, 1.0, 0.0) == pytest.approx(mc, abs=3e-3)


class TestLogEI:
    """Stable log-EI."""

    def test_unit_case(self):
        # ei(1, 1, 0) = phi(1) + Phi(1) = 1.0833155
        assert log_ei(1.0, 1.0, 0.0) == pytest.approx(float(np.log(ei(1.0, 1.0, 0.0))), abs=1e-12)
        assert log_ei(1.0, 1.0, 0.0) == pytest.approx(0.0800262, abs=1e-6)

    def test_agrees_with_ei(self):
        diffs = np.linspace(-30.0, 5.0, 400)
        sigmas = np.full_like(diffs, 0.8)
        direct = ei(diffs, sigmas, 0.0)
        mask = direct > 1e-30
        assert np.allclose(np.exp(log_ei(diffs[mask], sigmas[mask], 0.0)), direct[mask], rtol=1e-6)

    def test_deep_tail_is_finite(self):
        for diff in (-40.0, -500.0, -5e3, -1e6):
            value = log_ei(diff, 1.0, 0.0)
            assert np.isfinite(value), f"log_ei not finite at {diff}"

    def test_monotone_in_mu(self):
        mus = np.concatenate([np.linspace(-3e3, -900.0, 50), np.linspace(-900.0, -9.0, 200),
                              np.linspace(-9.0, 5.0, 200)])
        values = log_ei(mus, 1.0, 0.0)
        assert np.all(np.diff(values) >= -1e-12)

    def test_zero_sigma_raises(self):
        with pytest.raises(DegenerateVariance):
            log_ei(0.0, 0.0, 0.0)
