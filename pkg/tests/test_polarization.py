import math

import pytest
from hypothesis import given, settings, strategies as st

from eprlab.errors import InvalidInputError
from eprlab.polarization import (Angle, CascadeSpec, FieldAmplitude, apply_polarizer,
                                 cascade_intensity_fraction, conditional_probability, normalize_axis)

angles = st.floats(min_value=-20.0, max_value=20.0, allow_nan=False, allow_infinity=False)


def chain(magnitude, initial, stages):
    f = FieldAmplitude(magnitude, Angle(initial))
    for s in stages:
        f = apply_polarizer(f, Angle(s))
    return f


class TestAngle:
    @given(angles)
    def test_normalized_range(self, x):
        assert 0.0 <= Angle(x).radians < math.pi

    @given(angles)
    def test_idempotent(self, x):
        assert normalize_axis(normalize_axis(x)) == normalize_axis(x)

    def test_axis_symmetry(self):
        assert Angle(0.3) == Angle(0.3 + math.pi)
        assert hash(Angle(-math.pi / 2)) == hash(Angle(math.pi / 2))

    def test_rejects_nan(self):
        with pytest.raises(InvalidInputError):
            Angle(float("nan"))


class TestApplyPolarizer:
    def test_identity(self):
        out = apply_polarizer(FieldAmplitude(1.0, Angle(0.0)), Angle(0.0))
        assert out.magnitude == 1.0 and out.axis == Angle(0.0)

    def test_crossed_extinguish(self):
        out = apply_polarizer(FieldAmplitude(1.0, Angle(0.0)), Angle(math.pi / 2))
        assert out.magnitude == pytest.approx(0.0, abs=1e-16)
        assert out.axis == Angle(math.pi / 2)

    @pytest.mark.parametrize("alpha,beta", [(0.3, 1.1), (1.2, -0.4), (2.0, 2.9)])
    def test_two_stage_reduced_and_rotated(self, alpha, beta):
        e0 = 3.7
        out = chain(e0, 0.0, [alpha, beta])
        assert out.magnitude == pytest.approx(e0 * abs(math.cos(alpha) * math.cos(beta - alpha)), rel=1e-14)
        assert out.axis == Angle(beta)

    def test_rejects_nonfinite(self):
        with pytest.raises(InvalidInputError):
            FieldAmplitude(float("inf"), Angle(0.0))
        with pytest.raises(InvalidInputError):
            FieldAmplitude(-1.0, Angle(0.0))


class TestCascade:
    def test_crossed_pair(self):
        assert cascade_intensity_fraction(initial_axis=0.0, stages=[0.0, math.pi / 2]) == pytest.approx(0.0, abs=1e-30)

    def test_three_polarizers(self):
        # cos^2(45 deg) * cos^2(45 deg), worked by hand
        assert cascade_intensity_fraction(initial_axis=0.0, stages=[0.0, math.pi / 4, math.pi / 2]) == \
            pytest.approx(0.25, abs=1e-12)

    @pytest.mark.parametrize("alpha", [0.0, 0.4, 1.0, math.pi / 3])
    def test_single_stage_malus(self, alpha):
        assert cascade_intensity_fraction(CascadeSpec(Angle(0.0), (Angle(alpha),))) == \
            pytest.approx(math.cos(alpha) ** 2, abs=1e-15)

    def test_empty_stages(self):
        with pytest.raises(InvalidInputError):
            cascade_intensity_fraction(initial_axis=0.0, stages=[])
        with pytest.raises(InvalidInputError):
            CascadeSpec(Angle(0.0), ())

    @settings(max_examples=200)
    @given(angles, st.lists(angles, min_size=1, max_size=8))
    def test_chain_consistency(self, initial, stages):
        frac = cascade_intensity_fraction(initial_axis=initial, stages=stages)
        assert 0.0 <= frac <= 1.0
        assert frac == pytest.approx(chain(1.0, initial, stages).intensity, rel=1e-12, abs=1e-300)

    @given(angles, st.lists(angles, min_size=1, max_size=8))
    def test_scale_invariance(self, initial, stages):
        frac = cascade_intensity_fraction(initial_axis=initial, stages=stages)
        for m in (1.0, 1e-6, 1e6):
            ratio = chain(m, initial, stages).intensity / (m * m)
            assert ratio == pytest.approx(frac, rel=1e-12, abs=1e-300)


class TestConditionalProbability:
    @pytest.mark.parametrize("a,b,expected", [(0, 0, 0.0), (0, math.pi / 2, 1.0), (0, math.pi / 4, 0.5)])
    def test_values(self, a, b, expected):
        assert conditional_probability(a, b) == pytest.approx(expected, abs=1e-15)

    @given(angles, angles, angles)
    def test_shift_invariance_and_range(self, a, b, d):
        p = conditional_probability(a, b)
        assert 0.0 <= p <= 1.0
        assert conditional_probability(a + d, b + d) == pytest.approx(p, abs=1e-12)

    def test_accepts_angle_objects(self):
        assert conditional_probability(Angle(0.0), Angle(math.pi / 4)) == pytest.approx(0.5)
