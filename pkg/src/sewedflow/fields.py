"""Piecewise planar vector fields with a flat switching line y = 0.

A system is two half-plane fields (P, Q): one governing y > 0, one y < 0.
All built-in families share the sewed-focus time convention

    P_upper(0,0) > 0,   P_lower(0,0) < 0,   Q_upper(0,0) = Q_lower(0,0) = 0,

with x * Q(x, 0) < 0 near the origin on both sides, so every trajectory
crosses the line transversally except at the two invisible quadratic (or
flatter) tangencies glued at the origin.  Each built-in half field carries a
closed-form antiderivative of Q(., 0) so the flow module can work with exact
integral curves.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as _field
from typing import Callable, Optional

import numpy as np

from .eset import CompactSymmetricSet, f_E, f_E_prime

__all__ = [
    "HalfField",
    "PiecewiseSystem",
    "ValidationReport",
    "heaviside",
    "make_family",
    "poly_system",
    "from_spec",
    "eval_field",
    "validate_sewed_focus",
    "mirror_time_reversal",
    "FAMILIES",
]

UPPER = "upper"
LOWER = "lower"


def heaviside(x: float) -> float:
    """Unit step with H(0) = 1."""
    return 1.0 if x >= 0.0 else 0.0


@dataclass(frozen=True)
class HalfField:
    """One half-plane field: horizontal speed P and vertical speed Q.

    ``Q_antiderivative`` is A with A' = Q(., 0) and A(0) = 0, when available
    in closed form.  ``q_depends_on_y`` marks fields whose Q genuinely uses
    the y argument; those are rejected by the exact curve engine.
    """

    P: Callable[[float, float], float]
    Q: Callable[[float, float], float]
    q_depends_on_y: bool = False
    Q_antiderivative: Optional[Callable[[float], float]] = None


@dataclass(frozen=True)
class PiecewiseSystem:
    upper: HalfField
    lower: HalfField
    smoothness: str
    family_tag: str
    params: dict = _field(default_factory=dict)
    window: float = 1.0

    def half(self, side: str) -> HalfField:
        if side == UPPER:
            return self.upper
        if side == LOWER:
            return self.lower
        raise ValueError(f"side must be '{UPPER}' or '{LOWER}', got {side!r}")


@dataclass(frozen=True)
class ValidationReport:
    b_plus: float
    b_minus: float
    type3_ok: bool
    sf1_ok: bool
    sf2_ok: bool
    sf2strong_ok: bool
    no_sliding_ok: bool
    neighbourhood: float

    @property
    def all_ok(self) -> bool:
        return self.type3_ok and self.sf1_ok and self.sf2_ok and self.no_sliding_ok

    def as_dict(self) -> dict:
        return {
            "b_plus": self.b_plus,
            "b_minus": self.b_minus,
            "type3_ok": self.type3_ok,
            "sf1_ok": self.sf1_ok,
            "sf2_ok": self.sf2_ok,
            "sf2strong_ok": self.sf2strong_ok,
            "no_sliding_ok": self.no_sliding_ok,
            "neighbourhood": self.neighbourhood,
        }


def _const(v: float) -> Callable[[float, float], float]:
    return lambda x, y: v


def _exp_neg(a: float) -> float:
    # exp(-a) with a >= 0, returning exactly 0.0 past the underflow threshold
    return math.exp(-a) if a < 745.0 else 0.0


def _mirror_lower(q_upper, a_upper):
    """Lower field obtained from the upper by the (x, t) -> (-x, -t) symmetry."""
    q = lambda x, y: -q_upper(-x, y)
    a = lambda x: a_upper(-x)
    return q, a


# ---------------------------------------------------------------------------
# built-in families
# ---------------------------------------------------------------------------

def _finite_time_ck(k: int, window: float) -> PiecewiseSystem:
    """Finite-time sewed focus of smoothness C^(2k-2).

    Vertical speed above:  -2k x^(2k-1) for x >= 0, -4k x^(4k-1) for x < 0
    (k = 2 gives -4x^3 / -8x^7).  The mismatch of tangency orders on the two
    sides of each tangency makes every half-turn square the crossing
    position, so the total traversal time is a convergent lacunary series.
    """
    if k < 2:
        raise ValueError("finite_time_ck requires k >= 2")
    two_k, four_k = 2 * k, 4 * k

    def q_up(x, y):
        if x >= 0.0:
            return -two_k * x ** (two_k - 1)
        return -four_k * x ** (four_k - 1)

    def a_up(x):
        if x >= 0.0:
            return -(x ** two_k)
        return -(x ** four_k)

    q_lo, a_lo = _mirror_lower(q_up, a_up)
    return PiecewiseSystem(
        upper=HalfField(_const(1.0), q_up, False, a_up),
        lower=HalfField(_const(-1.0), q_lo, False, a_lo),
        smoothness=f"C^{2 * k - 2}",
        family_tag="finite_time_ck",
        params={"k": k},
        window=window,
    )


def _finite_time_cinf(window: float) -> PiecewiseSystem:
    """C-infinity finite-time sewed focus built from flat exponentials.

    Above: Q = -(2/x^3) e^(-1/x^2) for x < 0 and -(1/x^2) e^(-1/x) for x > 0,
    whose integral curves give the same position-squaring half-turns as the
    polynomial family.  The lower field is the (x, t) -> (-x, -t) mirror.
    """

    def q_up(x, y):
        if x == 0.0:
            return 0.0
        if x < 0.0:
            return -(2.0 / x ** 3) * _exp_neg(1.0 / (x * x))
        return -(1.0 / (x * x)) * _exp_neg(1.0 / x)

    def a_up(x):
        if x == 0.0:
            return 0.0
        if x < 0.0:
            return -_exp_neg(1.0 / (x * x))
        return -_exp_neg(1.0 / x)

    q_lo, a_lo = _mirror_lower(q_up, a_up)
    return PiecewiseSystem(
        upper=HalfField(_const(1.0), q_up, False, a_up),
        lower=HalfField(_const(-1.0), q_lo, False, a_lo),
        smoothness="C^inf",
        family_tag="finite_time_cinf",
        params={},
        window=window,
    )


def _infbelow_field() -> HalfField:
    """Lower half field P = -1, Q = -2x: mirror-symmetric parabolic arcs."""
    return HalfField(_const(-1.0), lambda x, y: -2.0 * x, False, lambda x: -(x * x))


def _sewed_centre(window: float) -> PiecewiseSystem:
    up = HalfField(_const(1.0), lambda x, y: -2.0 * x, False, lambda x: -(x * x))
    return PiecewiseSystem(
        upper=up,
        lower=_infbelow_field(),
        smoothness="C^omega",
        family_tag="sewed_centre",
        params={},
        window=window,
    )


def _cubic_focus(window: float) -> PiecewiseSystem:
    """Analytic stable sewed focus: upper Q = -2x - 3x^2 over the parabolic lower field.

    The cubic asymmetry of the upper arcs makes the displacement ~ -x^2, an
    even leading order, so crossings contract like a quadratic map and the
    approach to the origin takes infinite time.
    """
    up = HalfField(_const(1.0), lambda x, y: -2.0 * x - 3.0 * x * x, False,
                   lambda x: -(x * x) - x ** 3)
    return PiecewiseSystem(
        upper=up,
        lower=_infbelow_field(),
        smoothness="C^omega",
        family_tag="cubic_focus",
        params={},
        window=window,
    )


def _centre_focus_sin(k: int, window: float) -> PiecewiseSystem:
    """Sewed centre-focus whose periodic orbits cross the line at x = ±1/n.

    The upper field perturbs the parabolic flow by the odd profile sin(pi*u)
    evaluated at u = 1/x:

        Q = -2x + 2k x^(2k-1) sin(pi/x) - pi x^(2k-2) cos(pi/x)

    so upper arcs launched from (-x0, 0) land back at height
    2 x0^(2k) sin(pi/x0).  That height vanishes exactly at x0 = 1/n for
    integers n; successive such orbits are alternately attracting (n even)
    and repelling (n odd).
    """
    if k < 2:
        raise ValueError("centre_focus_sin requires k >= 2")
    two_k = 2 * k

    def q_up(x, y):
        if x == 0.0:
            return 0.0
        u = math.pi / x
        return (-2.0 * x
                + two_k * x ** (two_k - 1) * math.sin(u)
                - math.pi * x ** (two_k - 2) * math.cos(u))

    def a_up(x):
        if x == 0.0:
            return 0.0
        return -(x * x) + x ** two_k * math.sin(math.pi / x)

    return PiecewiseSystem(
        upper=HalfField(_const(1.0), q_up, False, a_up),
        lower=_infbelow_field(),
        smoothness=f"C^{k}",
        family_tag="centre_focus_sin",
        params={"k": k},
        window=window,
    )


def _eset_family(E: CompactSymmetricSet, k: int, window: float) -> PiecewiseSystem:
    """System whose crossing points lie on periodic orbits exactly on E.

    Upper field Q = -2x + x^2 f'(x) + 2x f(x) with f the smooth odd function
    vanishing exactly on E ∪ {0}; upper arcs from (-x0, 0) return to height
    2 x0^2 f(x0), zero iff x0 is in E.  Lower arcs are mirror parabolas.
    """
    if not isinstance(E, CompactSymmetricSet):
        raise ValueError("eset family needs a CompactSymmetricSet")
    if k < 1:
        raise ValueError("eset family requires k >= 1")
    if E.max_abs >= window:
        raise ValueError("set must sit strictly inside the working window")

    def q_up(x, y):
        return -2.0 * x + x * x * f_E_prime(x, E) + 2.0 * x * f_E(x, E)

    def a_up(x):
        return -(x * x) * (1.0 - f_E(x, E))

    return PiecewiseSystem(
        upper=HalfField(_const(1.0), q_up, False, a_up),
        lower=_infbelow_field(),
        smoothness="C^inf",
        family_tag="eset",
        params={"k": k, "set": E},
        window=window,
    )


FAMILIES = {
    "finite_time_ck": "stable sewed focus reached in finite time, C^(2k-2), param k >= 2",
    "finite_time_cinf": "stable sewed focus reached in finite time, C-infinity",
    "sewed_centre": "every local orbit closed (displacement identically zero)",
    "cubic_focus": "analytic stable sewed focus, quadratic displacement, infinite-time approach",
    "centre_focus_sin": "centre-focus with periodic orbits at x = ±1/n, param k >= 2",
    "eset": "centre-focus with periodic orbits exactly on a prescribed symmetric compact set",
}


def make_family(name: str, k: int | None = None,
                eset: CompactSymmetricSet | None = None,
                window: float = 1.0) -> PiecewiseSystem:
    """Build one of the named piecewise systems."""
    if name == "finite_time_ck":
        return _finite_time_ck(int(k if k is not None else 2), window)
    if name == "finite_time_cinf":
        return _finite_time_cinf(window)
    if name == "sewed_centre":
        return _sewed_centre(window)
    if name == "cubic_focus":
        return _cubic_focus(window)
    if name == "centre_focus_sin":
        return _centre_focus_sin(int(k if k is not None else 2), window)
    if name == "eset":
        if eset is None:
            raise ValueError("eset family needs the target set")
        return _eset_family(eset, int(k if k is not None else 2), window)
    raise ValueError(f"unknown family {name!r}; known: {sorted(FAMILIES)}")


def poly_system(q_upper_coeffs, q_lower_coeffs, window: float = 1.0) -> PiecewiseSystem:
    """Custom system from polynomial Q coefficients (ascending powers), P = ±1."""
    cu = [float(c) for c in q_upper_coeffs]
    cl = [float(c) for c in q_lower_coeffs]
    if not cu or not cl:
        raise ValueError("coefficient lists must be non-empty")

    def _poly(coeffs):
        def q(x, y):
            acc = 0.0
            for c in reversed(coeffs):
                acc = acc * x + c
            return acc
        return q

    def _poly_antiderivative(coeffs):
        ic = [c / (i + 1) for i, c in enumerate(coeffs)]

        def a(x):
            acc = 0.0
            for c in reversed(ic):
                acc = acc * x + c
            return acc * x
        return a

    return PiecewiseSystem(
        upper=HalfField(_const(1.0), _poly(cu), False, _poly_antiderivative(cu)),
        lower=HalfField(_const(-1.0), _poly(cl), False, _poly_antiderivative(cl)),
        smoothness="C^omega",
        family_tag="custom_poly",
        params={"q_upper_coeffs": cu, "q_lower_coeffs": cl},
        window=window,
    )


def from_spec(spec, window: float = 1.0) -> PiecewiseSystem:
    """Build a system from the JSON description used by the command line.

    Schema: ``{"family": name, "k": int, "set": {"points": [...],
    "intervals": [[lo, hi], ...]}}`` or ``{"q_upper_coeffs": [...],
    "q_lower_coeffs": [...]}`` -- the two forms are mutually exclusive.
    """
    if isinstance(spec, str):
        spec = json.loads(spec)
    if not isinstance(spec, dict):
        raise ValueError("system spec must be a JSON object")
    has_family = "family" in spec
    has_coeffs = "q_upper_coeffs" in spec or "q_lower_coeffs" in spec
    if has_family and has_coeffs:
        raise ValueError("spec cannot mix 'family' with coefficient lists")
    if has_coeffs:
        if "q_upper_coeffs" not in spec or "q_lower_coeffs" not in spec:
            raise ValueError("both q_upper_coeffs and q_lower_coeffs are required")
        return poly_system(spec["q_upper_coeffs"], spec["q_lower_coeffs"], window)
    if not has_family:
        raise ValueError("spec needs either 'family' or coefficient lists")
    E = None
    if "set" in spec:
        s = spec["set"]
        E = CompactSymmetricSet.from_spec(points=s.get("points", ()),
                                          intervals=s.get("intervals", ()))
    return make_family(spec["family"], k=spec.get("k"), eset=E, window=window)


def eval_field(system: PiecewiseSystem, point, side: str):
    """Evaluate (dx/dt, dy/dt) of the requested half field at a point.

    The side is explicit so callers control which field to read on y = 0.
    """
    x, y = point
    f = system.half(side)
    return (f.P(x, y), f.Q(x, y))


def validate_sewed_focus(system: PiecewiseSystem, half_width: float,
                         samples: int = 32) -> ValidationReport:
    """Check the sewed-focus conditions by sampling.

    * tangency at the origin: |Q(0,0)| <= 1e-12 on both sides,
    * transversal speeds with the standard time convention:
      P_upper(0,0) > 0 > P_lower(0,0),
    * x Q(x,0) < 0 at log-spaced samples on each side (both fields); a
      sampled exact zero from an underflowed flat branch is not a violation,
    * strong form: symmetric-difference slope of Q(., 0) at 0 below -1e-6
      (a plain finite difference of a cubically flat Q is still negative,
      so resolvability needs a floor),
    * no sliding: both Q's share a sign at every sampled x != 0.

    Failures set flags rather than raising.
    """
    if half_width <= 0.0:
        raise ValueError("half_width must be positive")
    if samples < 8:
        raise ValueError("need at least 8 samples per side")
    up, lo = system.upper, system.lower
    b_plus = up.P(0.0, 0.0)
    b_minus = lo.P(0.0, 0.0)
    type3_ok = abs(up.Q(0.0, 0.0)) <= 1e-12 and abs(lo.Q(0.0, 0.0)) <= 1e-12
    sf1_ok = b_plus > 0.0 and b_minus < 0.0

    # a flat branch (e.g. exp(-1/x^2)) underflows to exactly 0.0 well away
    # from the origin; a sampled zero is indistinguishable from the true
    # tiny value, so only a strictly wrong sign counts as a violation
    xs = np.geomspace(half_width, half_width * 1e-6, samples)
    sf2_ok = True
    no_sliding_ok = True
    for x in xs:
        for s in (x, -x):
            qu = up.Q(s, 0.0)
            ql = lo.Q(s, 0.0)
            if s * qu > 0.0 or s * ql > 0.0:
                sf2_ok = False
            if qu * ql < 0.0:
                no_sliding_ok = False

    h = half_width * 1e-4
    slope_floor = -1e-6
    d_up = (up.Q(h, 0.0) - up.Q(-h, 0.0)) / (2.0 * h)
    d_lo = (lo.Q(h, 0.0) - lo.Q(-h, 0.0)) / (2.0 * h)
    sf2strong_ok = d_up < slope_floor and d_lo < slope_floor

    return ValidationReport(b_plus, b_minus, type3_ok, sf1_ok, sf2_ok,
                            sf2strong_ok, no_sliding_ok, half_width)


def mirror_time_reversal(system: PiecewiseSystem) -> PiecewiseSystem:
    """Conjugate by (x, t) -> (-x, -t).

    Keeps the time convention (upper flow still moves rightwards) while
    reversing orbit orientation, so stable and unstable behaviour swap.
    """

    def flip(fld: HalfField) -> HalfField:
        a = fld.Q_antiderivative
        return HalfField(
            P=lambda x, y, _f=fld: _f.P(-x, y),
            Q=lambda x, y, _f=fld: -_f.Q(-x, y),
            q_depends_on_y=fld.q_depends_on_y,
            Q_antiderivative=(None if a is None else (lambda x, _a=a: _a(-x))),
        )

    return PiecewiseSystem(
        upper=flip(system.upper),
        lower=flip(system.lower),
        smoothness=system.smoothness,
        family_tag=system.family_tag + "_reversed",
        params=dict(system.params),
        window=system.window,
    )
