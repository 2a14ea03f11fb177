import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eprlab.errors import ConfigurationError, InvalidModelError
from eprlab.models import (ComplexField, LhvModelSpec, SetupOffset, furry_probability,
                           joint_outcome_table, kracklauer_normalized, lhv_coincidence_probability,
                           lhv_correlation, model_probability, phase_linked_integral,
                           phase_linked_probability)
from eprlab.polarization import conditional_probability
from eprlab.quadrature import QuadratureSettings

Q512 = QuadratureSettings(512)
phases = st.floats(min_value=-2 * math.pi, max_value=2 * math.pi, allow_nan=False)


def brute_lhv(a, b, n=400_000):
    """Midpoint-grid average of A*B over a uniform hidden variable."""
    lam = (np.arange(n) + 0.5) * (2 * math.pi / n)
    A = np.sign(np.cos(2 * (a - lam)))
    B = -np.sign(np.cos(2 * (b - lam)))
    return float(np.mean(A * B))


def brute_furry(d, n=200_000):
    x = (np.arange(n) + 0.5) * (2 * math.pi / n)
    return float(np.sum(np.cos(x) ** 2 * np.cos(x - d) ** 2) * (2 * math.pi / n) / (4 * math.pi))


class TestPhaseLinked:
    @pytest.mark.parametrize("a,b,phi0,expected", [
        (0, 0, 0, 0.0),
        (0, math.pi / 4, 0, 0.25),
        (0, 0, math.pi / 2, 0.5),
    ])
    def test_closed_form(self, a, b, phi0, expected):
        assert phase_linked_probability(a, b, SetupOffset(phi0)) == pytest.approx(expected, abs=1e-15)

    @pytest.mark.parametrize("a,b,expected", [(0, math.pi / 4, 0.25), (0, 0, 0.0)])
    def test_quadrature_examples(self, a, b, expected):
        assert phase_linked_integral(a, b, 0.0, Q512).real == pytest.approx(expected, abs=1e-9)

    def test_oracle_agreement_random(self, rng):
        for a, b, p in rng.uniform(-math.pi, math.pi, (100, 3)):
            got = phase_linked_integral(a, b, p, Q512).real
            assert abs(got - phase_linked_probability(a, b, p)) < 1e-9

    def test_imaginary_diagnostic(self):
        res = phase_linked_integral(0.2, 0.9, 0.0, Q512)
        # |product| = 1 so the real and imaginary shares always add to one half
        assert res.real + res.imag == pytest.approx(0.5, abs=1e-12)
        assert abs(res.raw) == pytest.approx(2 * math.pi, rel=1e-12)

    def test_node_minimum(self):
        with pytest.raises(ConfigurationError):
            phase_linked_integral(0, 1, 0, QuadratureSettings(8))

    def test_complex_field_quarter_shift(self):
        x, a = 0.7, 0.2
        f1 = complex(ComplexField.first_photon(x, a))
        f2 = complex(ComplexField.second_photon(x, a))
        # swapping sin and cos is multiplication by i times the conjugate
        assert f2 == pytest.approx(1j * f1.conjugate())


class TestKracklauer:
    @pytest.mark.parametrize("phi,expected", [(math.pi / 2, 0.5), (0.0, 0.0), (math.pi / 6, 0.125)])
    def test_values(self, phi, expected):
        assert kracklauer_normalized(phi, Q512) == pytest.approx(expected, abs=1e-9)

    def test_grid(self):
        for phi in np.linspace(0, 2 * math.pi, 64):
            assert abs(kracklauer_normalized(phi, Q512) - 0.5 * math.sin(phi) ** 2) < 1e-9


class TestFurry:
    def test_against_midpoint_oracle(self):
        for d in (0.0, 0.3, math.pi / 4, math.pi / 2, 2.5):
            assert furry_probability(0.0, d, Q512) == pytest.approx(brute_furry(d), abs=1e-9)

    def test_extremes(self):
        # (1/8)(1 +- 1/2)
        assert furry_probability(0.0, 0.0, Q512) == pytest.approx(0.1875, abs=1e-12)
        assert furry_probability(0.0, math.pi / 2, Q512) == pytest.approx(0.0625, abs=1e-12)

    def test_visibility_contrast(self):
        grid = np.linspace(0, math.pi, 181)
        furry = [furry_probability(0.0, d, Q512) for d in grid]
        phase = [phase_linked_probability(0.0, d) for d in grid]
        vis = lambda v: (max(v) - min(v)) / (max(v) + min(v))
        assert vis(furry) == pytest.approx(0.5, abs=1e-6)
        assert vis(phase) == pytest.approx(1.0, abs=1e-6)

    def test_gauss_legendre_rule(self):
        q = QuadratureSettings(64, "gauss-legendre")
        assert furry_probability(0.0, 0.3, q) == pytest.approx(brute_furry(0.3), abs=1e-9)


class TestLhv:
    def test_equal_settings(self):
        for a in (0.0, 0.4, 2.2):
            assert lhv_correlation(a, a) == -1.0

    def test_quarter_turn(self):
        assert lhv_correlation(math.pi / 4, 0.0) == pytest.approx(0.0, abs=1e-12)
        assert brute_lhv(math.pi / 4, 0.0) == pytest.approx(0.0, abs=1e-4)

    def test_against_grid_oracle(self, rng):
        for a, b in rng.uniform(0, math.pi, (20, 2)):
            assert lhv_correlation(a, b) == pytest.approx(brute_lhv(a, b), abs=1e-4)

    def test_piecewise_linear_in_difference(self):
        deltas = np.linspace(0.0, math.pi / 2, 41)
        e = np.array([lhv_correlation(0.1, 0.1 + d) for d in deltas])
        slope, icpt = np.polyfit(deltas, e, 1)
        assert np.max(np.abs(e - (slope * deltas + icpt))) < 1e-9
        assert slope == pytest.approx(4 / math.pi, rel=1e-9)
        brute = np.array([brute_lhv(0.1, 0.1 + d) for d in deltas[::8]])
        assert np.max(np.abs(brute - e[::8])) < 1e-4

    @given(st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi))
    @settings(max_examples=50, deadline=None)
    def test_bounded(self, a, b):
        assert -1.0 <= lhv_correlation(a, b) <= 1.0

    def test_density_not_normalized(self):
        spec = LhvModelSpec(density=lambda lam: np.full(np.shape(lam), 1.0 / math.pi))
        with pytest.raises(InvalidModelError):
            lhv_correlation(0.0, 0.3, spec)

    def test_responses_must_be_signs(self):
        spec = LhvModelSpec(response_a=lambda s, lam: np.cos(lam - s))
        with pytest.raises(InvalidModelError):
            lhv_correlation(0.0, 0.3, spec)

    def test_nonuniform_density(self):
        # density (1 + cos lam) / (2 pi) on [0, 2 pi), checked against a midpoint grid
        dens = lambda lam: (1 + np.cos(lam)) / (2 * math.pi)
        spec = LhvModelSpec(density=dens)
        n = 400_000
        lam = (np.arange(n) + 0.5) * (2 * math.pi / n)
        a, b = 0.3, 1.0
        ref = np.sum(dens(lam) * np.sign(np.cos(2 * (a - lam))) * -np.sign(np.cos(2 * (b - lam)))) * 2 * math.pi / n
        assert lhv_correlation(a, b, spec) == pytest.approx(ref, abs=1e-4)

    def test_coincidence_probability(self):
        assert lhv_coincidence_probability(0.0, 0.0) == pytest.approx(0.0, abs=1e-15)
        assert lhv_coincidence_probability(0.0, math.pi / 2) == pytest.approx(0.5, abs=1e-12)


class TestJointTable:
    @pytest.mark.parametrize("d,expected", [(0.0, (0, 0.5, 0.5, 0)), (math.pi / 2, (0.5, 0, 0, 0.5))])
    def test_values(self, d, expected):
        assert joint_outcome_table(0.0, d, 0.0).as_tuple() == pytest.approx(expected, abs=1e-15)

    @given(phases, phases, phases)
    def test_normalized_no_signaling(self, a, b, p):
        t = joint_outcome_table(a, b, p)
        assert min(t.as_tuple()) >= 0.0
        assert sum(t.as_tuple()) == pytest.approx(1.0, abs=1e-12)
        assert t.marginal_1 == pytest.approx(0.5, abs=1e-12)
        assert t.marginal_2 == pytest.approx(0.5, abs=1e-12)
        assert t.pp == pytest.approx(phase_linked_probability(a, b, p), abs=1e-15)


class TestShiftInvariance:
    @pytest.mark.parametrize("model", ["single-photon", "phase-linked", "furry", "lhv"])
    def test_common_rotation(self, model, rng):
        for a, b, d in rng.uniform(-math.pi, math.pi, (10, 3)):
            p0 = model_probability(model, a, b, 0.3, Q512)
            p1 = model_probability(model, a + d, b + d, 0.3, Q512)
            assert p1 == pytest.approx(p0, abs=1e-9)

    def test_factor_of_two(self, rng):
        for a, b in rng.uniform(-math.pi, math.pi, (1000, 2)):
            assert abs(conditional_probability(a, b) - 2 * phase_linked_probability(a, b, 0.0)) < 1e-12
