"""Trajectories, switching-line crossings, and half-return maps.

Two engines compute first returns to the line y = 0:

* the exact curve engine: when Q ignores y and P has one sign, arcs lie on
  level curves of the antiderivative of Q(., 0) scaled by 1/P, so a crossing
  is a scalar root bracketed on the far side of the origin and polished with
  Brent's method.  This stays accurate through the quadratic tangency at the
  arc apex and resolves crossing positions down to the last representable
  decades (relative, not absolute, precision).
* a generic adaptive Runge-Kutta 4(5) integrator of the planar field with
  the crossing localized on dense output, used to cross-validate the curve
  engine and to handle fields whose Q depends on y.

Half-return maps follow the usual orientation: the upper map takes a point
on the line to the next crossing of the flow through y > 0 (forwards in time
for launches the upper flow actually enters, extended through the involution
otherwise), and symmetrically below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.integrate import RK45, quad
from scipy.optimize import brentq

from .fields import LOWER, UPPER, HalfField, PiecewiseSystem

__all__ = [
    "FlowError",
    "NoReturnError",
    "TangencyError",
    "StepUnderflowError",
    "LeftWindowError",
    "CurveUnderflowError",
    "IntegralCurve",
    "Crossing",
    "CrossingSequence",
    "integral_curve",
    "sigma_plus",
    "sigma_minus",
    "crossing_sequence",
    "integrate_generic",
    "trajectory_points",
]

_EPS = float(np.finfo(float).eps)
_BRENT_RTOL = 4.0 * _EPS  # smallest rtol scipy's brentq accepts


class FlowError(Exception):
    """Base class for flow computation failures."""


class NoReturnError(FlowError):
    """The arc exits the working window before re-crossing the line."""


class TangencyError(FlowError):
    """Launch exactly at the origin: the arc degenerates to a point."""


class StepUnderflowError(FlowError):
    """The adaptive integrator's step collapsed before a crossing."""


class LeftWindowError(FlowError):
    """The integrated trajectory left the working window."""


class CurveUnderflowError(FlowError):
    """The arc's level-curve constant underflowed to zero in double precision."""


@dataclass(frozen=True)
class IntegralCurve:
    """Graph y(x) of one half-plane arc launched from the switching line."""

    side: str
    start_x: float
    y_of_x: Callable[[float], float]
    domain: tuple[float, float]
    p_of_x: Callable[[float], float]
    p_const: float | None  # P value when constant along the line, else None


class Crossing(NamedTuple):
    r: int
    xi: float
    dt: float
    t: float


@dataclass(frozen=True)
class CrossingSequence:
    entries: tuple[Crossing, ...]
    terminated_by: str  # max_crossings | position_underflow | left_window

    @property
    def positions(self) -> list[float]:
        return [e.xi for e in self.entries]

    @property
    def arc_times(self) -> list[float]:
        return [e.dt for e in self.entries[1:]]


def _constant_p(field: HalfField, window: float) -> float | None:
    p0 = field.P(0.0, 0.0)
    for x in (-window, -window / 3.0, window / 7.0, window):
        if abs(field.P(x, 0.0) - p0) > 1e-14 * max(1.0, abs(p0)):
            return None
    return p0


def integral_curve(system: PiecewiseSystem, side: str, x0: float) -> IntegralCurve:
    """Level curve y(x) of the arc through (x0, 0) on the given side.

    Requires Q independent of y.  Uses the closed-form antiderivative when
    the field carries one and P is constant; otherwise falls back to
    adaptive quadrature of Q(s, 0) / P(s, 0) with absolute tolerance 1e-13.
    """
    field = system.half(side)
    if field.q_depends_on_y:
        raise ValueError("curve engine needs Q independent of y; use integrate_generic")
    L = system.window
    pc = _constant_p(field, L)
    if field.Q_antiderivative is not None and pc is not None:
        A = field.Q_antiderivative
        a0 = A(x0)

        def y_of_x(x, _A=A, _a0=a0, _p=pc):
            return (_A(x) - _a0) / _p
    else:
        def y_of_x(x, _f=field, _x0=x0):
            val, _err = quad(lambda s: _f.Q(s, 0.0) / _f.P(s, 0.0), _x0, x,
                             epsabs=1e-13, limit=200)
            return val

    return IntegralCurve(
        side=side,
        start_x=x0,
        y_of_x=y_of_x,
        domain=(-L, L),
        p_of_x=lambda x, _f=field, _y=y_of_x: _f.P(x, _y(x)),
        p_const=pc,
    )


# geometric probe march used to bracket the first sign change of y(x)
_MARCH_GROWTH = 1.3
_MARCH_START_FRACTION = 1.0 / 1024.0
_MARCH_CAP_FRACTION = 1.0 / 32.0


def _first_return(system: PiecewiseSystem, side: str, x: float, tol: float) -> float:
    if x == 0.0:
        raise TangencyError("half-return map is undefined at the tangency point")
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    field = system.half(side)
    if field.q_depends_on_y:
        xc, _t = integrate_generic(system, (x, 0.0), side)
        return xc

    curve = integral_curve(system, side, x)
    g = curve.y_of_x
    g0 = g(0.0)
    if g0 == 0.0:
        raise CurveUnderflowError(
            f"arc height through x={x!r} underflows double precision")
    sign0 = math.copysign(1.0, g0)

    L = system.window
    direction = -math.copysign(1.0, x)
    step = L * _MARCH_START_FRACTION
    cap = L * _MARCH_CAP_FRACTION
    s_prev = 0.0
    s = direction * step
    while abs(s) <= L:
        gs = g(s)
        if gs == 0.0 or math.copysign(1.0, gs) != sign0:
            break
        s_prev = s
        step = min(step * _MARCH_GROWTH, cap)
        s += direction * step
    else:
        edge = direction * L
        g_edge = g(edge)
        if g_edge != 0.0 and math.copysign(1.0, g_edge) == sign0:
            raise NoReturnError(
                f"no re-crossing inside window ±{L} for launch {x!r} ({side})")
        s = edge

    lo, hi = (s_prev, s) if s_prev < s else (s, s_prev)
    # xtol far below tol makes the relative criterion dominate, so crossing
    # positions deep in a contraction cascade keep near machine-relative
    # accuracy instead of being flattened to an absolute floor
    root = brentq(g, lo, hi, xtol=min(tol, 1e-150), rtol=_BRENT_RTOL,
                  maxiter=600)
    return float(root)


def sigma_plus(system: PiecewiseSystem, x: float, tol: float = 1e-12) -> float:
    """Upper half-return map: next crossing of the flow through y >= 0."""
    return _first_return(system, UPPER, x, tol)


def sigma_minus(system: PiecewiseSystem, x: float, tol: float = 1e-12) -> float:
    """Lower half-return map: next crossing of the flow through y <= 0."""
    return _first_return(system, LOWER, x, tol)


def _arc_time(system: PiecewiseSystem, side: str, x_from: float, x_to: float) -> float:
    """Traversal time of one arc: integral of dx / |P| along its curve."""
    field = system.half(side)
    pc = _constant_p(field, system.window)
    if pc is not None:
        return abs(x_to - x_from) / abs(pc)
    curve = integral_curve(system, side, x_from)
    val, _err = quad(lambda s: 1.0 / abs(curve.p_of_x(s)), x_from, x_to, limit=200)
    return abs(val)


def _entry_side(x: float) -> str:
    # with the standard convention the forward flow from x < 0 rises into y > 0
    return UPPER if x < 0.0 else LOWER


def crossing_sequence(system: PiecewiseSystem, x0: float, max_crossings: int,
                      floor: float = 1e-14, tol: float = 1e-12,
                      engine: str = "curve") -> CrossingSequence:
    """Alternate the two half-return maps from x0, recording times.

    ``max_crossings`` counts recorded positions including the launch point.
    Stops early when a position falls below ``floor`` (double precision can
    no longer track the contraction), when an arc's level constant
    underflows, or when the trajectory leaves the window after at least one
    recorded arc (window exit on the very first arc raises).
    """
    if x0 == 0.0:
        raise TangencyError("cannot launch a crossing sequence from the origin")
    if floor <= 0.0:
        raise ValueError("floor must be positive")
    if max_crossings < 1:
        raise ValueError("max_crossings must be at least 1")
    if engine not in ("curve", "generic"):
        raise ValueError("engine must be 'curve' or 'generic'")

    entries = [Crossing(0, x0, 0.0, 0.0)]
    side = _entry_side(x0)
    terminated = "max_crossings"
    t_cum = 0.0
    while len(entries) < max_crossings:
        prev = entries[-1].xi
        try:
            if engine == "curve":
                nxt = _first_return(system, side, prev, tol)
                dt = _arc_time(system, side, prev, nxt)
            else:
                nxt, dt = integrate_generic(system, (prev, 0.0), side)
        except CurveUnderflowError:
            terminated = "position_underflow"
            break
        except (NoReturnError, LeftWindowError):
            if len(entries) == 1:
                raise
            terminated = "left_window"
            break
        t_cum += dt
        entries.append(Crossing(len(entries), nxt, dt, t_cum))
        if abs(nxt) < floor:
            terminated = "position_underflow"
            break
        if abs(nxt) > system.window:
            terminated = "left_window"
            break
        side = LOWER if side == UPPER else UPPER
    return CrossingSequence(tuple(entries), terminated)


def integrate_generic(system: PiecewiseSystem, start, side: str,
                      step_tol: float = 1e-9):
    """Integrate the planar field through one half-plane arc.

    Runs an adaptive explicit Runge-Kutta 4(5) pair on (dx/dt, dy/dt) from
    ``start`` until y changes sign, then localizes the crossing on the dense
    output with Brent's method at relative time tolerance (a fixed absolute
    tolerance would cap the resolvable contraction).  Returns the crossing
    abscissa and the elapsed arc time.

    Launches on the line are integrated forwards when the field enters the
    requested half-plane there and backwards otherwise, which realizes the
    involution extension of the half-return maps.
    """
    x0, y0 = float(start[0]), float(start[1])
    field = system.half(side)
    side_sign = 1.0 if side == UPPER else -1.0
    L = system.window
    if abs(x0) > L or abs(y0) > L * L:
        raise ValueError("start must lie inside the working window")
    if y0 != 0.0 and y0 * side_sign < 0.0:
        raise ValueError(f"start {start!r} is not in the {side} half-plane")

    if y0 == 0.0:
        if x0 == 0.0:
            raise TangencyError("cannot integrate an arc from the origin")
        q0 = field.Q(x0, 0.0)
        if q0 == 0.0:
            raise CurveUnderflowError("vertical speed underflows at the launch point")
        forward = (q0 * side_sign) > 0.0
    else:
        forward = True
    orient = 1.0 if forward else -1.0

    def rhs(t, state):
        x, y = state
        return np.array([orient * field.P(x, y), orient * field.Q(x, y)])

    # absolute y tolerance tied to a coarse apex estimate so the error
    # control is relative to the arc's own height scale
    probe = np.linspace(x0, 0.0, 9)
    qmax = max(abs(field.Q(float(s), 0.0)) for s in probe)
    apex_est = max(abs(y0), abs(x0) * qmax)
    if apex_est == 0.0:
        raise CurveUnderflowError("arc height estimate underflows double precision")
    # several steps per arc guarantees the crossing detector is armed before
    # the trajectory can fall back through the line; the scale must track the
    # arc's own extent, however small
    scale = max(abs(x0), math.sqrt(abs(y0)))
    atol = np.array([scale * step_tol * 1e-2, apex_est * step_tol * 1e-2])

    rk = RK45(rhs, 0.0, np.array([x0, y0]), t_bound=1e6, rtol=step_tol,
              atol=atol, max_step=scale / 4.0, first_step=scale / 256.0)

    armed = y0 != 0.0
    t_lo = 0.0
    max_steps = 200_000
    for _ in range(max_steps):
        if rk.status == "failed":
            raise StepUnderflowError("integrator step collapsed before a crossing")
        if rk.status == "finished":
            raise NoReturnError("no crossing found before the time bound")
        rk.step()
        x, y = rk.y
        if abs(x) > L * (1.0 + 1e-9) or abs(y) > L * L * (1.0 + 1e-9):
            raise LeftWindowError(
                f"trajectory left the window at ({x!r}, {y!r})")
        if not armed:
            if y * side_sign > 0.0:
                armed = True
            elif y * side_sign < 0.0:
                raise ValueError("field does not enter the requested half-plane")
        elif y * side_sign <= 0.0:
            dense = rk.dense_output()
            t_star = brentq(lambda t: float(dense(t)[1]), t_lo, rk.t,
                            xtol=1e-300, rtol=_BRENT_RTOL, maxiter=300)
            x_star = float(dense(t_star)[0])
            return x_star, float(t_star)
        t_lo = rk.t
    raise StepUnderflowError("exceeded the step budget without a crossing")


def trajectory_points(system: PiecewiseSystem, x0: float, n_arcs: int,
                      resolution: int, tol: float = 1e-12):
    """Yield (arc_index, side, x, y) samples along n_arcs arcs from (x0, 0)."""
    if n_arcs < 1:
        raise ValueError("need at least one arc")
    if resolution < 2:
        raise ValueError("need at least two points per arc")
    seq = crossing_sequence(system, x0, max_crossings=n_arcs + 1, tol=tol,
                            floor=1e-300)
    side = _entry_side(x0)
    for arc_index in range(len(seq.entries) - 1):
        a = seq.entries[arc_index].xi
        b = seq.entries[arc_index + 1].xi
        curve = integral_curve(system, side, a)
        for x in np.linspace(a, b, resolution):
            yield arc_index, side, float(x), float(curve.y_of_x(float(x)))
        side = LOWER if side == UPPER else UPPER
