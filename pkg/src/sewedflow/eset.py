"""Symmetric compact subsets of the line and smooth functions vanishing exactly on them.

A :class:`CompactSymmetricSet` stores the positive half of a symmetric compact
set ``E`` (0 excluded) as a finite union of points and closed intervals.  From
the gap structure of its complement we assemble an odd C-infinity function
``f_E`` with zero set exactly ``E ∪ {0}``:

* on every bounded complement gap ``(a - d, a + d)`` a single scaled bump
  ``-sign(a) * d * psi((x - a)/d)`` of one sign,
* on the two unbounded tails beyond ``max(E)`` an odd taper that is flat to
  all orders at the junction and strictly nonzero outside it.

Bump supports are pairwise disjoint and disjoint from ``E ∪ {0}``, so ``f_E``
is exactly zero on the set and exactly one term is active anywhere else.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from functools import lru_cache

__all__ = [
    "CompactSymmetricSet",
    "Gap",
    "GapDecomposition",
    "decompose_gaps",
    "distance_to_E0",
    "g_E",
    "bump_psi",
    "bump_psi_prime",
    "f_E",
    "f_E_prime",
]

# The tail taper exp(-1/(a t)) must vanish to all orders at t = 0 (smooth
# junction at the outer edge M of the set) yet stay well above the 1e-6
# displacement detection floor a few hundredths beyond it.  Its steepness a
# is tied to M: keeping M * a <= 2 bounds (M + t) * taper'(t) + 2 * taper(t)
# below 2 for all t, which is what keeps the vertical speed of the
# prescribed-orbit field single-signed on the tails.
_SHARPNESS_MIN, _SHARPNESS_MAX = 1.0, 8.0

# exp(arg) underflows to zero below roughly exp(-745); skip the call early.
_EXP_UNDERFLOW = 745.0


def _tail_sharpness(M: float) -> float:
    return min(_SHARPNESS_MAX, max(_SHARPNESS_MIN, 2.0 / M))


@dataclass(frozen=True)
class CompactSymmetricSet:
    """Positive half of a symmetric compact set, 0 excluded.

    ``components`` is an ascending tuple of closed components ``(lo, hi)``
    with ``0 < lo <= hi``; a point is stored as ``(p, p)``.  The represented
    set is the symmetric closure ``E = components ∪ (-components)``.
    """

    components: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if not self.components:
            raise ValueError("set must have at least one component")
        prev_hi = 0.0
        for lo, hi in self.components:
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise ValueError("components must be finite")
            if lo <= 0.0:
                raise ValueError("components must be strictly positive (0 is excluded from E)")
            if hi < lo:
                raise ValueError(f"component ({lo}, {hi}) is not ordered")
            if lo <= prev_hi:
                raise ValueError("components must be disjoint and sorted ascending")
            prev_hi = hi

    @classmethod
    def from_spec(cls, points=(), intervals=()) -> "CompactSymmetricSet":
        comps = [(float(p), float(p)) for p in points]
        comps += [(float(lo), float(hi)) for lo, hi in intervals]
        comps.sort()
        return cls(tuple(comps))

    @property
    def max_abs(self) -> float:
        return self.components[-1][1]

    def contains(self, x: float) -> bool:
        """Membership in the full symmetric set E (not including 0)."""
        u = abs(x)
        for lo, hi in self.components:
            if lo <= u <= hi:
                return True
            if u < lo:
                return False
        return False

    def __str__(self) -> str:
        parts = []
        for lo, hi in self.components:
            parts.append(f"{{{lo:g}}}" if lo == hi else f"[{lo:g}, {hi:g}]")
        return "E = " + " ∪ ".join(parts) + " (symmetric closure)"


@dataclass(frozen=True)
class Gap:
    """Bounded open complement interval (center - half_width, center + half_width)."""

    center: float
    half_width: float


@dataclass(frozen=True)
class GapDecomposition:
    """Bounded complement gaps of E ∪ {0} inside (-max(E), max(E)), plus tail start."""

    gaps: tuple[Gap, ...]
    tail_start: float

    @property
    def tails(self) -> tuple[tuple[float, float], tuple[float, float]]:
        """The two unbounded complement components."""
        return ((-math.inf, -self.tail_start), (self.tail_start, math.inf))


@lru_cache(maxsize=64)
def decompose_gaps(E: CompactSymmetricSet) -> GapDecomposition:
    """Enumerate the bounded complement gaps of E ∪ {0}, both signs.

    Endpoint arithmetic is exact: centers and half-widths come straight from
    the stored component endpoints.
    """
    positive: list[Gap] = []
    prev_hi = 0.0  # 0 belongs to E0, so the innermost gap starts at 0
    for lo, hi in E.components:
        if lo > prev_hi:
            positive.append(Gap((prev_hi + lo) / 2.0, (lo - prev_hi) / 2.0))
        prev_hi = hi
    mirrored = [Gap(-g.center, g.half_width) for g in positive]
    gaps = tuple(sorted(mirrored + positive, key=lambda g: g.center))
    return GapDecomposition(gaps=gaps, tail_start=E.max_abs)


@lru_cache(maxsize=64)
def _positive_gap_table(E: CompactSymmetricSet):
    """Sorted (lo, hi, center, half_width) rows for the positive-side gaps."""
    rows = []
    for g in decompose_gaps(E).gaps:
        if g.center > 0.0:
            rows.append((g.center - g.half_width, g.center + g.half_width,
                         g.center, g.half_width))
    rows.sort()
    return rows, [r[0] for r in rows]


def distance_to_E0(x: float, E: CompactSymmetricSet) -> float:
    """Exact minimum distance from x to E ∪ {0}; 0 iff x is in the set."""
    u = abs(x)  # the set is symmetric and contains 0
    d = u
    for lo, hi in E.components:
        if u < lo:
            return min(d, lo - u)
        if u <= hi:
            return 0.0
        d = min(d, u - hi)
    return d


def g_E(x: float, E: CompactSymmetricSet, k: int) -> float:
    """Signed distance-power profile -sign(x) * d(x, E0)^(k+2).

    Continuous and odd with zero set exactly E ∪ {0}, but only finitely
    differentiable at gap midpoints; retained as a sign and zero-set
    cross-check for the bump construction.
    """
    if k < 1:
        raise ValueError("smoothness order k must be >= 1")
    d = distance_to_E0(x, E)
    if x == 0.0 or d == 0.0:
        return 0.0
    return -math.copysign(d ** (k + 2), x)


def bump_psi(x: float) -> float:
    """Standard bump exp(-1/(1-x^2)) on (-1, 1), zero outside."""
    t = 1.0 - x * x
    if t <= 0.0:
        return 0.0
    if 1.0 < _EXP_UNDERFLOW * t:
        return math.exp(-1.0 / t)
    return 0.0


def bump_psi_prime(x: float) -> float:
    """Derivative psi(x) * (-2x) / (1-x^2)^2, zero outside the support."""
    t = 1.0 - x * x
    if t <= 0.0 or 1.0 >= _EXP_UNDERFLOW * t:
        return 0.0
    return math.exp(-1.0 / t) * (-2.0 * x) / (t * t)


def _taper(t: float, sharpness: float) -> float:
    if t <= 0.0:
        return 0.0
    arg = 1.0 / (sharpness * t)
    if arg > _EXP_UNDERFLOW:
        return 0.0
    return math.exp(-arg)


def _taper_prime(t: float, sharpness: float) -> float:
    if t <= 0.0:
        return 0.0
    arg = 1.0 / (sharpness * t)
    if arg > _EXP_UNDERFLOW:
        return 0.0
    return math.exp(-arg) * arg / t


def _bump_row(E: CompactSymmetricSet, u: float):
    """Positive-side gap row containing u, or None (u in E, at an endpoint, or 0)."""
    rows, los = _positive_gap_table(E)
    i = bisect_right(los, u) - 1
    if i < 0:
        return None
    lo, hi, a, d = rows[i]
    if lo < u < hi:
        return rows[i]
    return None


def f_E(x: float, E: CompactSymmetricSet) -> float:
    """Odd C-infinity function with zero set exactly E ∪ {0}.

    Disjoint bump supports mean at most one term is ever active; the value on
    the positive side is always <= 0, and oddness is exact by construction.
    """
    if x == 0.0:
        return 0.0
    u = abs(x)
    M = E.max_abs
    if u > M:
        mag = _taper(u - M, _tail_sharpness(M))
    else:
        row = _bump_row(E, u)
        if row is None:
            return 0.0
        _, _, a, d = row
        mag = d * bump_psi((u - a) / d)
    return -math.copysign(mag, x)


def f_E_prime(x: float, E: CompactSymmetricSet) -> float:
    """Exact derivative of :func:`f_E` (an even function)."""
    if x == 0.0:
        return 0.0
    u = abs(x)
    M = E.max_abs
    if u > M:
        return -_taper_prime(u - M, _tail_sharpness(M))
    row = _bump_row(E, u)
    if row is None:
        return 0.0
    _, _, a, d = row
    return -bump_psi_prime((u - a) / d)
