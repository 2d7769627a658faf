"""Displacement analysis and classification of the singularity.

The displacement function chi(x) is the difference of the two half-return
maps.  Its sign field near the origin decides everything local:

* chi identically zero: every nearby crossing orbit is closed (a centre);
* chi of one sign: crossings spiral one way (a stable focus when negative,
  unstable when positive);
* zeros of chi accumulating at 0 without chi vanishing identically: a
  centre-focus whose zeros mark periodic orbits.

On top of the classification this module estimates the leading even order of
chi for smooth-displacement foci, and decides whether the spiral reaches the
origin in finite or (suspected) infinite time from the contraction profile of
the crossing sequence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as _field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .fields import PiecewiseSystem
from .flow import crossing_sequence, sigma_minus, sigma_plus

__all__ = [
    "STABLE_FOCUS",
    "UNSTABLE_FOCUS",
    "CENTRE",
    "CENTRE_FOCUS",
    "UndeterminedClassification",
    "BadBracketError",
    "ChiProfile",
    "Timing",
    "Classification",
    "chi",
    "sample_chi_profile",
    "sign_propagation_check",
    "classify",
    "periodic_orbit_stability",
    "estimate_chi_order",
    "time_to_origin",
    "harmonic_lower_bound_check",
]

STABLE_FOCUS = "StableFocus"
UNSTABLE_FOCUS = "UnstableFocus"
CENTRE = "Centre"
CENTRE_FOCUS = "CentreFocus"

ORBIT_STABLE = "Stable"
ORBIT_UNSTABLE = "Unstable"
ORBIT_ONE_SIDED = "OneSided"
ORBIT_DEGENERATE = "Degenerate"


class UndeterminedClassification(Exception):
    """Every sampled displacement sits inside numerical noise."""


class BadBracketError(Exception):
    """A stability probe point left the working window."""


def chi(system: PiecewiseSystem, x: float, tol: float = 1e-12) -> float:
    """Displacement sigma_plus(x) - sigma_minus(x)."""
    if x == 0.0:
        raise ValueError("displacement is defined away from the origin")
    return sigma_plus(system, x, tol) - sigma_minus(system, x, tol)


@dataclass(frozen=True)
class ChiProfile:
    grid: tuple[float, ...]
    chi_values: tuple[float, ...]
    zeros: tuple[tuple[float, tuple[float, float]], ...]  # (zero, bracket)
    zero_intervals: tuple[tuple[float, float], ...]
    sign_pattern: tuple[tuple[int, int], ...]  # run-length encoded signs


@dataclass(frozen=True)
class Timing:
    verdict: str  # Finite | InfiniteSuspected | Undetermined
    T: float | None = None
    tail_bound: float | None = None
    alpha: float | None = None
    detail: str = ""

    def as_dict(self) -> dict:
        return {"verdict": self.verdict, "T": self.T,
                "tail_bound": self.tail_bound, "alpha": self.alpha}


@dataclass(frozen=True)
class Classification:
    kind: str
    zeros: tuple[float, ...] = ()
    zero_intervals: tuple[tuple[float, float], ...] = ()
    timing: Timing | None = None
    order: int | None = None
    tolerances: dict = _field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "zeros": list(self.zeros),
            "zero_intervals": [list(iv) for iv in self.zero_intervals],
            "order": self.order,
            "timing": None if self.timing is None else self.timing.as_dict(),
            "tolerances": dict(self.tolerances),
        }


def _log_grid(half_width: float, n_samples: int, decades: float, side: int):
    # outermost sample first; magnitudes decrease toward the origin
    mags = half_width * np.power(10.0, -np.linspace(0.0, decades, n_samples))
    return side * mags


def _rle_signs(values, zero_tol):
    runs: list[tuple[int, int]] = []
    for v in values:
        s = 0 if abs(v) <= zero_tol else (1 if v > 0 else -1)
        if runs and runs[-1][0] == s:
            runs[-1] = (s, runs[-1][1] + 1)
        else:
            runs.append((s, 1))
    return tuple(runs)


def sample_chi_profile(system: PiecewiseSystem, half_width: float,
                       n_samples: int = 257, zero_tol: float = 1e-9,
                       tol: float = 1e-12, decades: float = 3.0,
                       side: int = -1) -> ChiProfile:
    """Sample chi on a log-spaced one-sided grid and locate its zeros.

    Sign-change zeros are refined by bracketed root finding; an isolated
    below-tolerance sample flanked by same-signed neighbours marks a
    tangential zero and is refined by minimizing |chi|.  Runs of three or
    more below-tolerance samples are reported as zero intervals, except the
    run touching the innermost grid point: every contracting profile falls
    below any fixed tolerance close enough to the origin, so that run is
    unresolvable smallness rather than zero-set evidence (it stays visible
    in the sign pattern as a zero run).
    """
    if n_samples < 32:
        raise ValueError("need at least 32 samples")
    if side not in (-1, 1):
        raise ValueError("side must be -1 or +1")
    xs = _log_grid(half_width, n_samples, decades, side)
    cs = np.array([chi(system, float(x), tol) for x in xs])

    below = np.abs(cs) <= zero_tol
    zeros: list[tuple[float, tuple[float, float]]] = []
    intervals: list[tuple[float, float]] = []

    # sign-change zeros between adjacent resolvable samples
    for i in range(len(xs) - 1):
        if below[i] or below[i + 1]:
            continue
        if cs[i] * cs[i + 1] < 0.0:
            a, b = float(xs[i]), float(xs[i + 1])
            lo, hi = (a, b) if a < b else (b, a)
            z = brentq(lambda u: chi(system, u, tol), lo, hi,
                       xtol=max(tol, 1e-14), rtol=4.0 * np.finfo(float).eps,
                       maxiter=200)
            zeros.append((float(z), (lo, hi)))

    # below-tolerance runs: short ones are tangential zeros, long ones intervals
    i = 0
    while i < len(xs):
        if not below[i]:
            i += 1
            continue
        j = i
        while j + 1 < len(xs) and below[j + 1]:
            j += 1
        if j == len(xs) - 1:  # unresolvable core at the innermost samples
            break
        a = float(xs[max(i - 1, 0)])
        b = float(xs[j + 1])
        lo, hi = (a, b) if a < b else (b, a)
        if j - i + 1 >= 3:
            seg = sorted((float(xs[i]), float(xs[j])))
            intervals.append((seg[0], seg[1]))
        else:
            # tangential zero: no sign change to bracket, so minimize |chi|;
            # the below-tolerance grid points themselves are candidates too
            # (a zero can sit exactly on a sample, e.g. at the grid edge)
            res = minimize_scalar(lambda u: abs(chi(system, u, tol)),
                                  bounds=(lo, hi), method="bounded",
                                  options={"xatol": 1e-10})
            cands = [(float(abs(res.fun)), float(res.x))]
            cands += [(float(abs(cs[m])), float(xs[m])) for m in range(i, j + 1)]
            best_val, best_x = min(cands)
            if best_val <= zero_tol:
                zeros.append((best_x, (lo, hi)))
        i = j + 1

    zeros.sort()
    return ChiProfile(
        grid=tuple(float(x) for x in xs),
        chi_values=tuple(float(c) for c in cs),
        zeros=tuple(zeros),
        zero_intervals=tuple(intervals),
        sign_pattern=_rle_signs(cs, zero_tol),
    )


def sign_propagation_check(system: PiecewiseSystem, grid,
                           zero_tol: float = 1e-9, tol: float = 1e-12) -> bool:
    """Does the displacement keep its sign across the lower half-turn?

    For every grid point x < 0 where both chi(x) and chi at the conjugate
    crossing sigma_minus(x) are resolvable, require equal signs.  Decreasing
    half-return maps symmetric about the diagonal force this for a genuine
    focus, so a failure flags either numerics or a sign change between the
    probes.
    """
    for x in grid:
        x = float(x)
        if x >= 0.0:
            raise ValueError("grid must contain negative abscissae")
        c1 = chi(system, x, tol)
        if abs(c1) <= zero_tol:
            continue
        z = sigma_minus(system, x, tol)
        c2 = chi(system, z, tol)
        if abs(c2) <= zero_tol:
            continue
        if c1 * c2 < 0.0:
            return False
    return True


def classify(system: PiecewiseSystem, half_width: float = 0.5,
             n_samples: int = 257, zero_tol: float = 1e-9,
             tol: float = 1e-12, decades: float = 3.0, side: int = -1,
             with_timing: bool = True, max_crossings: int = 200) -> Classification:
    """Decide centre / focus / centre-focus from a sampled displacement profile.

    All samples below tolerance give a centre.  Detected zeros or zero
    intervals give a centre-focus with the zero structure attached.  A
    profile with no zero structure and a constant resolvable sign is a
    focus, stable when the displacement is negative; for foci the
    approach-time verdict is computed from a crossing sequence launched at
    the outer edge of the profile (time-reversed first for the unstable
    case).  Profiles indistinguishable from solver noise raise
    :class:`UndeterminedClassification`.
    """
    profile = sample_chi_profile(system, half_width, n_samples, zero_tol,
                                 tol, decades, side)
    cs = np.array(profile.chi_values)
    xs = np.array(profile.grid)
    below = np.abs(cs) <= zero_tol
    tolerances = {"zero_tol": zero_tol, "crossing_tol": tol,
                  "half_width": half_width, "n_samples": n_samples,
                  "decades": decades}

    if bool(below.all()):
        return Classification(
            kind=CENTRE,
            zero_intervals=(tuple(sorted((float(xs[0]), float(xs[-1])))),),
            tolerances=tolerances,
        )

    resolvable = ~below
    if bool((np.abs(cs[resolvable]) <= 10.0 * tol).all()) and not profile.zeros:
        raise UndeterminedClassification(
            "all resolvable displacements sit within 10x the crossing tolerance")

    if profile.zeros or profile.zero_intervals:
        return Classification(
            kind=CENTRE_FOCUS,
            zeros=tuple(z for z, _b in profile.zeros),
            zero_intervals=profile.zero_intervals,
            tolerances=tolerances,
        )

    signs = np.sign(cs[resolvable])
    if bool((signs == signs[0]).all()):
        kind = STABLE_FOCUS if signs[0] < 0 else UNSTABLE_FOCUS
        timing = None
        if with_timing:
            timing = _focus_timing(system, kind, side * half_width,
                                   max_crossings, tol)
        hi = min(half_width / 2.0, 1e-1)
        order = estimate_chi_order(system, decade_range=(hi * 1e-2, hi), tol=tol)
        return Classification(kind=kind, timing=timing, order=order,
                              tolerances=tolerances)

    raise UndeterminedClassification(
        "mixed displacement signs without a refinable zero")


def _focus_timing(system, kind, x_start, max_crossings, tol):
    from .fields import mirror_time_reversal

    target = system if kind == STABLE_FOCUS else mirror_time_reversal(system)
    try:
        return time_to_origin(target, x_start, max_crossings=max_crossings, tol=tol)
    except Exception as exc:  # timing is advisory inside classify
        return Timing(verdict="Undetermined", detail=f"timing failed: {exc}")


def periodic_orbit_stability(system: PiecewiseSystem, x0: float, h: float,
                             zero_tol: float = 1e-8, tol: float = 1e-12) -> str:
    """Stability of the periodic orbit through (±x0, 0) from nearby displacements.

    One full turn sends a crossing at distance s from the origin to distance
    s + chi(-s), so the orbit attracts its neighbours exactly when chi < 0
    just outside it and chi > 0 just inside.  The opposite pattern repels;
    a vanishing displacement on both probes means the orbit sits inside a
    band of closed orbits (degenerate), on one probe a one-sided case.
    """
    if x0 <= 0.0:
        raise ValueError("x0 must be positive")
    if h <= 0.0:
        raise ValueError("h must be positive")
    if x0 + h >= system.window or x0 - h <= 0.0:
        raise BadBracketError("probe points leave the window or cross the origin")
    on_orbit = chi(system, -x0, tol)
    if abs(on_orbit) > zero_tol:
        raise ValueError(f"chi(-x0) = {on_orbit!r} is not a detected zero")
    c_out = chi(system, -(x0 + h), tol)
    c_in = chi(system, -(x0 - h), tol)
    out_zero = abs(c_out) <= zero_tol
    in_zero = abs(c_in) <= zero_tol
    if out_zero and in_zero:
        return ORBIT_DEGENERATE
    if out_zero or in_zero:
        return ORBIT_ONE_SIDED
    if c_out < 0.0 < c_in:
        return ORBIT_STABLE
    if c_in < 0.0 < c_out:
        return ORBIT_UNSTABLE
    return ORBIT_DEGENERATE


def estimate_chi_order(system: PiecewiseSystem,
                       decade_range: tuple[float, float] = (1e-3, 1e-1),
                       samples_per_decade: int = 8,
                       zero_tol: float = 1e-12,
                       tol: float = 1e-12) -> int | None:
    """Leading even order of the displacement of a smooth-displacement focus.

    Least-squares slope of log|chi| against log|x| over the given decades,
    rounded to the nearest even integer >= 2.  Returns None when the notion
    does not apply: finite-time families (their displacement has a
    sub-quadratic local exponent), centres, or sign-changing profiles.
    """
    if system.family_tag.startswith("finite_time"):
        return None
    lo, hi = decade_range
    if not (0.0 < lo < hi):
        raise ValueError("decade_range must satisfy 0 < lo < hi")
    n = max(4, int(round(samples_per_decade * math.log10(hi / lo))))
    mags = np.geomspace(lo, hi, n)
    vals = np.array([chi(system, -float(m), tol) for m in mags])
    # a power law needs one sign and no zeros anywhere in the fitted range
    if bool((np.abs(vals) <= zero_tol).any()):
        return None
    if bool((vals > 0).any()) and bool((vals < 0).any()):
        return None
    slope = float(np.polyfit(np.log(mags), np.log(np.abs(vals)), 1)[0])
    if slope < 1.5:
        return None
    return max(2, 2 * int(round(slope / 2.0)))


def _fit_contraction_exponent(positions) -> float:
    """Median of log|xi_{r+1}| / log|xi_r| over the trailing crossings."""
    mags = [abs(p) for p in positions if p != 0.0]
    tail = mags[-5:]
    ratios = []
    for a, b in zip(tail, tail[1:]):
        if 0.0 < a < 1.0 and 0.0 < b < 1.0:
            ratios.append(math.log(b) / math.log(a))
    if not ratios:
        return float("nan")
    return float(np.median(ratios))


def time_to_origin(system: PiecewiseSystem, x0: float,
                   max_crossings: int = 64, floor: float = 1e-30,
                   tol: float = 1e-12) -> Timing:
    """Total traversal time verdict for a contracting spiral from (x0, 0).

    Builds the crossing sequence and accumulates arc times.  Superlinear
    contraction (fitted exponent above 1.5 on the trailing crossings) means
    the remaining arcs form a rapidly convergent series: the reported T adds
    a term-by-term extrapolation of that series to the accumulated time, and
    tail_bound carries a cruder geometric upper bound on the same remainder.
    A contraction ratio drifting to 1 with the positive crossings obeying
    the harmonic comparison from below is reported as InfiniteSuspected;
    anything else is Undetermined.
    """
    if abs(x0) >= 1.0:
        raise ValueError("|x0| must be below 1")
    seq = crossing_sequence(system, x0, max_crossings=max_crossings,
                            floor=floor, tol=tol)
    mags = [abs(e.xi) for e in seq.entries]
    if len(mags) < 4:
        return Timing(verdict="Undetermined", detail="too few crossings recorded")
    cumulative = seq.entries[-1].t
    alpha = _fit_contraction_exponent(mags)

    if math.isfinite(alpha) and alpha > 1.5:
        e = mags[-1]
        # remaining time = e + 2 * sum_j e^(alpha^j); terms collapse fast
        tail_sum = 0.0
        expo = alpha
        for _ in range(200):
            term = e ** expo
            if term < 1e-25 or not math.isfinite(term) or term == 0.0:
                break
            tail_sum += term
            expo *= alpha
        tail_estimate = e + 2.0 * tail_sum
        q = e ** (alpha / 2.0)
        crude = e + 2.0 * (e ** alpha) / (1.0 - q) if q < 1.0 else math.inf
        return Timing(verdict="Finite", T=cumulative + tail_estimate,
                      tail_bound=crude, alpha=alpha)

    ratios = [b / a for a, b in zip(mags, mags[1:]) if a > 0.0]
    trailing = ratios[-8:]
    ratio_to_one = bool(trailing) and min(trailing) > 0.85
    harmonic_ok = _harmonic_bound_holds(seq)
    if ratio_to_one and harmonic_ok:
        return Timing(verdict="InfiniteSuspected", alpha=alpha,
                      detail="contraction ratio drifts to 1; harmonic lower bound holds")
    return Timing(verdict="Undetermined", alpha=alpha,
                  detail=f"ratio_to_one={ratio_to_one} harmonic_ok={harmonic_ok}")


def _positive_crossings(seq) -> list[float]:
    return [e.xi for e in seq.entries if e.xi > 0.0]


def _harmonic_bound_holds(seq, N: int | None = None) -> bool:
    ps = _positive_crossings(seq)
    if len(ps) < 3:
        return False
    top = len(ps) - 1 if N is None else min(N, len(ps) - 1)
    x2 = ps[1]
    return all(ps[n] >= x2 / (2.0 * n) for n in range(2, top + 1))


def harmonic_lower_bound_check(system: PiecewiseSystem, x0: float, N: int,
                               tol: float = 1e-12) -> bool:
    """Do the positive crossings dominate the harmonic comparison sequence?

    With x2 the second positive crossing, checks xi(2n) >= x2 / (2n) for
    2 <= n <= N -- the concrete inequality behind the divergence of the
    total approach time for a quadratic-displacement focus.  Requires the
    launch to sit on the contracting side of a focus.
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    probe = chi(system, -abs(x0), tol)
    if probe >= -1e-12:
        raise ValueError("not a contracting focus at this launch scale")
    seq = crossing_sequence(system, x0, max_crossings=2 * N + 4,
                            floor=1e-300, tol=tol)
    ps = _positive_crossings(seq)
    if len(ps) < N + 1:
        raise ValueError(f"sequence too short for N={N}: {len(ps)} positive crossings")
    x2 = ps[1]
    return all(ps[n] >= x2 / (2.0 * n) for n in range(2, N + 1))
