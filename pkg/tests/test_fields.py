import json
import math

import numpy as np
import pytest

from sewedflow import (
    CompactSymmetricSet,
    eval_field,
    from_spec,
    make_family,
    mirror_time_reversal,
    poly_system,
    validate_sewed_focus,
)
from sewedflow.analysis import chi
from sewedflow.fields import FAMILIES, heaviside

ALL_BUILTINS = [
    ("finite_time_ck", {"k": 2}),
    ("finite_time_ck", {"k": 3}),
    ("finite_time_cinf", {}),
    ("sewed_centre", {}),
    ("cubic_focus", {}),
    ("centre_focus_sin", {"k": 2}),
]


def build(name, kwargs):
    if name == "eset":
        return make_family("eset", k=2,
                           eset=CompactSymmetricSet.from_spec(points=[0.5]))
    return make_family(name, **kwargs)


def test_heaviside_convention():
    assert heaviside(0.0) == 1.0
    assert heaviside(0.3) == 1.0
    assert heaviside(-0.3) == 0.0


class TestMakeFamily:
    def test_finite_time_k2_branches(self, ck2):
        # -4x^3 for x >= 0, -8x^7 for x < 0 above the line
        assert ck2.upper.Q(0.5, 0.0) == pytest.approx(-0.5, rel=1e-15)
        assert ck2.upper.Q(-0.5, 0.0) == pytest.approx(0.0625, rel=1e-15)
        assert ck2.lower.Q(0.5, 0.0) == pytest.approx(-8 * 0.5 ** 7, rel=1e-15)
        assert ck2.lower.Q(-0.5, 0.0) == pytest.approx(4 * 0.5 ** 3, rel=1e-15)
        assert ck2.smoothness == "C^2"

    def test_finite_time_general_k(self):
        s = make_family("finite_time_ck", k=3)
        x = 0.37
        assert s.upper.Q(x, 0.0) == pytest.approx(-6 * x ** 5, rel=1e-14)
        assert s.upper.Q(-x, 0.0) == pytest.approx(12 * x ** 11, rel=1e-14)

    def test_cinf_branches(self, cinf):
        q = cinf.upper.Q
        assert q(0.0, 0.0) == 0.0
        assert q(-0.5, 0.0) == pytest.approx(16.0 * math.exp(-4.0), rel=1e-14)
        assert q(0.5, 0.0) == pytest.approx(-4.0 * math.exp(-2.0), rel=1e-14)
        # flat tails evaluate cleanly arbitrarily close to the origin
        assert q(1e-8, 0.0) == 0.0
        assert q(-1e-4, 0.0) == 0.0

    def test_unknown_family(self):
        with pytest.raises(ValueError, match="unknown family"):
            make_family("nope")

    def test_k_range_enforced(self):
        with pytest.raises(ValueError):
            make_family("finite_time_ck", k=1)
        with pytest.raises(ValueError):
            make_family("centre_focus_sin", k=1)

    def test_eset_requires_set(self):
        with pytest.raises(ValueError):
            make_family("eset", k=2)

    def test_families_catalogue(self):
        assert set(FAMILIES) == {"finite_time_ck", "finite_time_cinf",
                                 "sewed_centre", "cubic_focus",
                                 "centre_focus_sin", "eset"}


class TestEvalField:
    def test_examples(self, ck2, cubic):
        assert eval_field(ck2, (0.5, 0.0), "upper") == (1.0, -0.5)
        assert eval_field(ck2, (0.0, 0.0), "upper") == (1.0, 0.0)
        p, q = eval_field(cubic, (0.1, 0.0), "upper")
        assert p == 1.0
        assert q == pytest.approx(-0.23, rel=1e-14)

    def test_deterministic(self, sin2):
        a = eval_field(sin2, (0.123456, 0.05), "upper")
        b = eval_field(sin2, (0.123456, 0.05), "upper")
        assert a == b  # bit-for-bit

    def test_bad_side(self, ck2):
        with pytest.raises(ValueError):
            eval_field(ck2, (0.1, 0.0), "sideways")


class TestSharedInvariants:
    @pytest.mark.parametrize("name,kwargs", ALL_BUILTINS + [("eset", {})])
    def test_tangency_and_time_convention(self, name, kwargs):
        s = build(name, kwargs)
        assert s.upper.Q(0.0, 0.0) == 0.0
        assert s.lower.Q(0.0, 0.0) == 0.0
        assert s.upper.P(0.0, 0.0) > 0.0
        assert s.lower.P(0.0, 0.0) < 0.0

    @pytest.mark.parametrize("name,kwargs", ALL_BUILTINS + [("eset", {})])
    def test_vertical_speed_sign(self, name, kwargs):
        # strictly wrong signs never occur; the flat exponential branches
        # underflow to 0.0 below |x| ~ 0.037, so strictness is asserted only
        # where doubles can represent the value
        s = build(name, kwargs)
        for m in np.geomspace(0.1, 1e-4, 16):
            for x in (float(m), -float(m)):
                pu = x * s.upper.Q(x, 0.0)
                pl = x * s.lower.Q(x, 0.0)
                assert pu <= 0.0 and pl <= 0.0
                if abs(x) >= 0.05:
                    assert pu < 0.0 and pl < 0.0

    @pytest.mark.parametrize("name,kwargs", ALL_BUILTINS + [("eset", {})])
    def test_q_ignores_y(self, name, kwargs):
        s = build(name, kwargs)
        assert not s.upper.q_depends_on_y
        for x in (-0.4, -0.05, 0.2, 0.61):
            assert s.upper.Q(x, 0.3) == s.upper.Q(x, -0.1)
            assert s.lower.Q(x, 0.7) == s.lower.Q(x, 0.0)

    @pytest.mark.parametrize("name,kwargs", ALL_BUILTINS + [("eset", {})])
    def test_antiderivative_matches_q(self, name, kwargs):
        s = build(name, kwargs)
        h = 1e-6
        for fld in (s.upper, s.lower):
            A = fld.Q_antiderivative
            assert A is not None
            assert A(0.0) == 0.0
            for x in (-0.61, -0.33, -0.11, 0.09, 0.27, 0.55):
                fd = (A(x + h) - A(x - h)) / (2.0 * h)
                q = fld.Q(x, 0.0)
                assert abs(fd - q) <= 1e-6 * (1.0 + abs(q))


class TestValidation:
    def test_finite_time_flags(self, ck2):
        r = validate_sewed_focus(ck2, 0.5, samples=32)
        assert r.type3_ok and r.sf1_ok and r.sf2_ok and r.no_sliding_ok
        # vertical speed is cubically flat at 0: the strong slope test fails
        assert not r.sf2strong_ok
        assert r.b_plus == 1.0 and r.b_minus == -1.0

    def test_centre_all_flags(self, centre):
        r = validate_sewed_focus(centre, 0.5)
        assert r.all_ok and r.sf2strong_ok

    def test_eset_near_origin_and_window(self, eset_system):
        assert validate_sewed_focus(eset_system, 0.1).sf2_ok
        r = validate_sewed_focus(eset_system, 0.8, samples=64)
        assert r.sf2_ok and r.no_sliding_ok

    def test_strong_implies_weak_on_builtins(self):
        for name, kwargs in ALL_BUILTINS:
            s = build(name, kwargs)
            r = validate_sewed_focus(s, 0.05, samples=16)
            if r.sf2strong_ok:
                assert r.sf2_ok

    def test_parameter_guards(self, ck2):
        with pytest.raises(ValueError):
            validate_sewed_focus(ck2, -0.1)
        with pytest.raises(ValueError):
            validate_sewed_focus(ck2, 0.5, samples=4)


class TestPolySystems:
    def test_quadratic_lower_mirror(self):
        s = poly_system([0.0, -2.0], [0.0, -2.0])
        assert s.upper.Q(0.3, 0.0) == pytest.approx(-0.6, rel=1e-15)
        assert s.upper.Q_antiderivative(0.3) == pytest.approx(-0.09, rel=1e-15)
        assert s.family_tag == "custom_poly"

    def test_empty_coeffs_rejected(self):
        with pytest.raises(ValueError):
            poly_system([], [0.0, -2.0])


class TestJsonSpec:
    def test_family_spec(self):
        s = from_spec('{"family": "finite_time_ck", "k": 2}')
        assert s.family_tag == "finite_time_ck" and s.params["k"] == 2

    def test_eset_spec(self):
        s = from_spec(json.dumps({
            "family": "eset", "k": 2,
            "set": {"points": [0.5], "intervals": [[0.2, 0.3]]},
        }))
        assert s.family_tag == "eset"
        assert s.upper.Q(0.25, 0.0) == pytest.approx(-0.5, rel=1e-12)

    def test_poly_spec(self):
        s = from_spec('{"q_upper_coeffs": [0, -2], "q_lower_coeffs": [0, -2]}')
        assert s.family_tag == "custom_poly"

    def test_mutual_exclusion(self):
        with pytest.raises(ValueError, match="mix"):
            from_spec('{"family": "sewed_centre", "q_upper_coeffs": [0, -2]}')
        with pytest.raises(ValueError):
            from_spec('{"q_upper_coeffs": [0, -2]}')
        with pytest.raises(ValueError):
            from_spec('{}')


class TestTimeReversal:
    def test_convention_preserved(self, cubic):
        rev = mirror_time_reversal(cubic)
        r = validate_sewed_focus(rev, 0.3)
        assert r.sf1_ok and r.sf2_ok and r.type3_ok

    def test_displacement_sign_flips(self, cubic):
        rev = mirror_time_reversal(cubic)
        assert chi(cubic, -0.1) < 0.0 < chi(rev, -0.1)

    def test_antiderivative_consistent(self, cubic):
        rev = mirror_time_reversal(cubic)
        A = rev.upper.Q_antiderivative
        h = 1e-6
        for x in (-0.3, 0.12, 0.4):
            fd = (A(x + h) - A(x - h)) / (2 * h)
            assert fd == pytest.approx(rev.upper.Q(x, 0.0), abs=1e-7)
