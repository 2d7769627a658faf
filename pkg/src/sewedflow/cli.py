"""Command-line front end.

Subcommands: validate, simulate, return-map, chi, classify, time,
synthesize, families.  Systems are described by a JSON object (inline or a
path), reports are emitted as JSON or CSV with round-trip-exact reals, and
the working window can be overridden with the SEWEDFLOW_WINDOW environment
variable.  Exit codes: 0 success, 1 usage or spec errors, 2 synthesis
verification failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import analysis, eset, fields, flow

USAGE_ERROR = 1
VERIFICATION_FAILURE = 2

PERIODIC_ERR_MAX = 1e-8    # a crossing on a periodic orbit returns this close
NONPERIODIC_ERR_MIN = 1e-6  # off the set the first return must miss by this much


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad arguments; keep 2 reserved for
    # verification failures and report usage problems as 1
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(USAGE_ERROR)


@dataclass
class RunConfig:
    command: str
    system_spec: str | None = None
    x0: float = -0.5
    n_crossings: int = 8
    grid: int = 64
    half_width: float = 0.5
    tol: float = 1e-12
    window: float = 1.0
    format: str = "json"
    out: str | None = None
    # command-specific extras
    resolution: int = 100
    trajectory: bool = False
    floor: float = 1e-14
    engine: str = "curve"
    set_spec: str | None = None
    k: int = 2
    probes: int = 24
    n_samples: int = 257
    decades: float = 3.0
    periodic_tol: float = PERIODIC_ERR_MAX
    nonperiodic_tol: float = NONPERIODIC_ERR_MIN


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        Path(out).write_text(text if text.endswith("\n") else text + "\n",
                             encoding="utf-8")


def _csv(header: list[str], rows: list[list]) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) if isinstance(v, float) else str(v)
                              for v in row))
    return "\n".join(lines) + "\n"


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _load_system(cfg: RunConfig) -> fields.PiecewiseSystem:
    if cfg.system_spec is None:
        raise ValueError("--system is required for this command")
    text = cfg.system_spec.strip()
    if not text.startswith("{"):
        text = Path(text).read_text(encoding="utf-8")
    return fields.from_spec(text, window=cfg.window)


def _cmd_validate(cfg: RunConfig) -> int:
    system = _load_system(cfg)
    report = fields.validate_sewed_focus(system, cfg.half_width, samples=max(8, cfg.grid))
    payload = report.as_dict()
    payload.update({"family": system.family_tag, "smoothness": system.smoothness,
                    "window": cfg.window})
    _emit(_json(payload), cfg.out)
    return 0


def _cmd_simulate(cfg: RunConfig) -> int:
    system = _load_system(cfg)
    if cfg.trajectory:
        rows = [[a, s, x, y] for a, s, x, y in flow.trajectory_points(
            system, cfg.x0, cfg.n_crossings, cfg.resolution, tol=cfg.tol)]
        _emit(_csv(["arc_index", "side", "x", "y"], rows), cfg.out)
        return 0
    seq = flow.crossing_sequence(system, cfg.x0, max_crossings=cfg.n_crossings,
                                 floor=cfg.floor, tol=cfg.tol, engine=cfg.engine)
    rows = [[e.r, e.xi, e.dt, e.t] for e in seq.entries]
    _emit(_csv(["r", "xi_r", "dt_r", "t_r"], rows), cfg.out)
    return 0


def _cmd_return_map(cfg: RunConfig) -> int:
    system = _load_system(cfg)
    mags = np.geomspace(cfg.half_width, cfg.half_width * 1e-3, cfg.grid)
    rows = []
    for m in mags:
        for x in (-float(m), float(m)):
            sp = flow.sigma_plus(system, x, cfg.tol)
            sm = flow.sigma_minus(system, x, cfg.tol)
            rows.append([float(x), sp, sm, sp - sm])
    rows.sort(key=lambda r: r[0])
    _emit(_csv(["x", "sigma_plus", "sigma_minus", "chi"], rows), cfg.out)
    return 0


def _cmd_chi(cfg: RunConfig) -> int:
    system = _load_system(cfg)
    mags = np.geomspace(cfg.half_width, cfg.half_width * 1e-3, cfg.grid)
    rows = [[-float(m), analysis.chi(system, -float(m), cfg.tol)] for m in mags]
    _emit(_csv(["x", "chi"], rows), cfg.out)
    return 0


def _cmd_classify(cfg: RunConfig) -> int:
    system = _load_system(cfg)
    try:
        result = analysis.classify(system, half_width=cfg.half_width,
                                   n_samples=cfg.n_samples, tol=cfg.tol,
                                   decades=cfg.decades)
        payload = result.as_dict()
    except analysis.UndeterminedClassification as exc:
        payload = {"kind": "Undetermined", "reason": str(exc)}
    payload.update({"family": system.family_tag, "window": cfg.window})
    _emit(_json(payload), cfg.out)
    return 0


def _cmd_time(cfg: RunConfig) -> int:
    system = _load_system(cfg)
    timing = analysis.time_to_origin(system, cfg.x0,
                                     max_crossings=max(cfg.n_crossings, 16),
                                     tol=cfg.tol)
    payload = timing.as_dict()
    payload.update({"x0": cfg.x0, "family": system.family_tag,
                    "window": cfg.window})
    _emit(_json(payload), cfg.out)
    return 0


def _synthesis_probes(E: eset.CompactSymmetricSet, n_probes: int, window: float):
    """Deterministic probe lists: on the set and off it (gaps plus tails)."""
    inside: list[float] = []
    for lo, hi in E.components:
        inside.append(lo)
        if hi > lo:
            inside.extend((0.5 * (lo + hi), hi))
    outside: list[float] = []
    for gap in eset.decompose_gaps(E).gaps:
        if gap.center <= 0.0:
            continue
        outside.extend((gap.center, gap.center - 0.5 * gap.half_width,
                        gap.center + 0.5 * gap.half_width))
    M = E.max_abs
    outside.extend(m for m in (M + 0.05, M + 0.1, M + 0.15) if m < window)
    inside = sorted(set(inside))
    outside = sorted(set(outside))
    # trim deterministically to the requested probe budget, keeping both kinds
    budget_in = max(1, min(len(inside), n_probes // 2))
    budget_out = max(1, min(len(outside), n_probes - budget_in))
    take = lambda xs, m: [xs[i] for i in
                          sorted({round(i * (len(xs) - 1) / max(m - 1, 1))
                                  for i in range(m)})]
    return take(inside, budget_in), take(outside, budget_out)


def _cmd_synthesize(cfg: RunConfig) -> int:
    if cfg.set_spec is None:
        raise ValueError("--set is required for synthesize")
    spec = json.loads(cfg.set_spec)
    E = eset.CompactSymmetricSet.from_spec(points=spec.get("points", ()),
                                           intervals=spec.get("intervals", ()))
    system = fields.make_family("eset", k=cfg.k, eset=E, window=cfg.window)
    report = fields.validate_sewed_focus(system, min(0.9 * cfg.window, E.max_abs + 0.2),
                                         samples=64)

    inside, outside = _synthesis_probes(E, cfg.probes, cfg.window)
    rows = []
    ok_all = report.all_ok
    for x0 in inside + outside:
        expected_periodic = E.contains(x0)
        ret = flow.sigma_plus(system, -x0, cfg.tol)
        err = abs(ret - x0)
        ok = err <= cfg.periodic_tol if expected_periodic else err >= cfg.nonperiodic_tol
        ok_all = ok_all and ok
        rows.append([float(x0), "in_set" if expected_periodic else "off_set",
                     float(ret), float(err), "ok" if ok else "FAIL"])

    if cfg.format == "csv":
        _emit(_csv(["x0", "membership", "first_return", "abs_err", "verdict"],
                   rows), cfg.out)
    else:
        payload = {
            "set": str(E),
            "k": cfg.k,
            "window": cfg.window,
            "validation": report.as_dict(),
            "probes": [{"x0": r[0], "membership": r[1], "first_return": r[2],
                        "abs_err": r[3], "verdict": r[4]} for r in rows],
            "all_ok": ok_all,
        }
        _emit(_json(payload), cfg.out)
    return 0 if ok_all else VERIFICATION_FAILURE


def _cmd_families(cfg: RunConfig) -> int:
    _emit(_json(fields.FAMILIES), cfg.out)
    return 0


_COMMANDS = {
    "validate": _cmd_validate,
    "simulate": _cmd_simulate,
    "return-map": _cmd_return_map,
    "chi": _cmd_chi,
    "classify": _cmd_classify,
    "time": _cmd_time,
    "synthesize": _cmd_synthesize,
    "families": _cmd_families,
}


def build_parser() -> _Parser:
    p = _Parser(prog="sewedflow",
                description="Planar piecewise-smooth flows near sewed singularities")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, system=True):
        if system:
            sp.add_argument("--system", dest="system_spec",
                            help="inline JSON system spec or a path to one")
        sp.add_argument("--tol", type=float, default=1e-12,
                        help="crossing tolerance (default 1e-12)")
        sp.add_argument("--window", type=float, default=None,
                        help="working half-width (default 1.0 or SEWEDFLOW_WINDOW)")
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--out", default=None, help="output path (default stdout)")

    sp = sub.add_parser("validate", help="check the sewed-focus conditions")
    common(sp)
    sp.add_argument("--half-width", dest="half_width", type=float, default=0.5)
    sp.add_argument("--grid", type=int, default=64, help="samples per side")

    sp = sub.add_parser("simulate", help="crossing sequence or trajectory CSV")
    common(sp)
    sp.add_argument("--x0", type=float, default=-0.5)
    sp.add_argument("--crossings", dest="n_crossings", type=int, default=8)
    sp.add_argument("--floor", type=float, default=1e-14)
    sp.add_argument("--engine", choices=("curve", "generic"), default="curve")
    sp.add_argument("--trajectory", action="store_true",
                    help="emit sampled (x, y) arcs instead of crossings")
    sp.add_argument("--resolution", type=int, default=100,
                    help="points per arc for --trajectory")

    sp = sub.add_parser("return-map", help="sampled half-return maps CSV")
    common(sp)
    sp.add_argument("--half-width", dest="half_width", type=float, default=0.5)
    sp.add_argument("--grid", type=int, default=64)

    sp = sub.add_parser("chi", help="sampled displacement CSV on x < 0")
    common(sp)
    sp.add_argument("--half-width", dest="half_width", type=float, default=0.5)
    sp.add_argument("--grid", type=int, default=64)

    sp = sub.add_parser("classify", help="centre / focus / centre-focus report")
    common(sp)
    sp.add_argument("--half-width", dest="half_width", type=float, default=0.5)
    sp.add_argument("--samples", dest="n_samples", type=int, default=257)
    sp.add_argument("--decades", type=float, default=3.0)

    sp = sub.add_parser("time", help="approach-time verdict from one launch")
    common(sp)
    sp.add_argument("--x0", type=float, default=-0.5)
    sp.add_argument("--crossings", dest="n_crossings", type=int, default=64)

    sp = sub.add_parser("synthesize",
                        help="build a prescribed-orbit system and verify it")
    common(sp, system=False)
    sp.add_argument("--set", dest="set_spec", required=True,
                    help='JSON like {"points":[0.5],"intervals":[[0.2,0.3]]}')
    sp.add_argument("--k", type=int, default=2)
    sp.add_argument("--probes", type=int, default=24)
    sp.add_argument("--periodic-tol", dest="periodic_tol", type=float,
                    default=PERIODIC_ERR_MAX)
    sp.add_argument("--nonperiodic-tol", dest="nonperiodic_tol", type=float,
                    default=NONPERIODIC_ERR_MIN)

    sp = sub.add_parser("families", help="list built-in families")
    common(sp, system=False)

    return p


def _config_from_args(ns: argparse.Namespace) -> RunConfig:
    window = ns.window if getattr(ns, "window", None) is not None else float(
        os.environ.get("SEWEDFLOW_WINDOW", "1.0"))
    cfg = RunConfig(command=ns.command, window=window)
    for name in ("system_spec", "x0", "n_crossings", "grid", "half_width",
                 "tol", "format", "out", "resolution", "trajectory", "floor",
                 "engine", "set_spec", "k", "probes", "n_samples", "decades",
                 "periodic_tol", "nonperiodic_tol"):
        if hasattr(ns, name) and getattr(ns, name) is not None:
            setattr(cfg, name, getattr(ns, name))
    if cfg.tol <= 0.0 or cfg.grid < 2:
        raise ValueError("need tol > 0 and grid >= 2")
    if hasattr(ns, "half_width") and not (0.0 < cfg.half_width <= cfg.window):
        raise ValueError("need 0 < half_width <= window")
    return cfg


def run(config: RunConfig) -> int:
    """Dispatch one parsed configuration; returns the process exit status."""
    return _COMMANDS[config.command](config)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        config = _config_from_args(ns)
        return run(config)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (ValueError, KeyError, json.JSONDecodeError, FileNotFoundError) as exc:
        print(f"sewedflow: error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except flow.FlowError as exc:
        print(f"sewedflow: flow error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
