"""flowlab <mode> --config cfg.json [--set key=value]... [--out dir]"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import continuum as cont
from . import discrete as disc
from . import oracle
from .lattice import QuasiRect, as_fraction, dissipation_units, quasi_rect_cells

MODES = ("continuum-flow", "limit-ode", "discrete-symmetric", "discrete-rectangular",
         "steiner-audit", "oracle-verify", "pinning-map", "convergence-study")

CSV_COLUMNS = ("t", "a", "b", "c", "perimeter", "area", "chosen_X", "chosen_Y",
               "chosen_D", "overflow_flag")
EXACT_COLUMNS = ("t_exact", "a_exact", "b_exact", "c_exact", "perimeter_exact",
                 "area_exact")

DEFAULTS = {
    "a": 2.0, "b": 0.5, "tau": 1e-2, "horizon": 1.0, "ode_step": 1e-3,
    "lam": None, "alpha": "1", "eps": "1/20", "steps": 100, "A": None, "B": None,
    "C": 0, "taus": [1e-2, 5e-3, 2.5e-3], "window": [-1, -1, 4, 4],
    "qr": [2, 2, 0], "b_values": ["3/10", "2/5", "1/2", "3/5", "7/10", "4/5", "9/10"],
    "alphas": None, "N": 100, "seed": 0, "checks": None,
}


class ConfigError(ValueError):
    pass


class GuardFailure(RuntimeError):
    pass


# -- config -------------------------------------------------------------------

def _coerce(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_override(cfg: dict, item: str):
    if "=" not in item:
        raise ConfigError(f"--set expects key=value, got {item!r}")
    key, value = item.split("=", 1)
    node = cfg
    parts = key.split(".")
    for p in parts[:-1]:
        node = node.setdefault(p, {})
        if not isinstance(node, dict):
            raise ConfigError(f"cannot descend into {p!r}")
    node[parts[-1]] = _coerce(value)


def load_config(mode: str, path: str | None, overrides: list[str]) -> dict:
    cfg = dict(DEFAULTS)
    if path:
        try:
            cfg.update(json.loads(Path(path).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
    for item in overrides:
        apply_override(cfg, item)
    cfg["mode"] = mode
    _validate(cfg)
    return cfg


def _validate(cfg: dict):
    mode = cfg["mode"]
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}")
    if mode in ("continuum-flow", "limit-ode", "convergence-study"):
        if float(cfg["a"]) <= 0 or float(cfg["b"]) <= 0:
            raise ConfigError("a and b must be positive")
    if mode == "convergence-study":
        taus = [float(t) for t in cfg["taus"]]
        if len(taus) < 2 or any(x <= y for x, y in zip(taus, taus[1:])):
            raise ConfigError("taus must be strictly decreasing with two or more entries")
    if mode in ("discrete-symmetric", "discrete-rectangular"):
        eps = as_fraction(cfg["eps"])
        if cfg.get("A") is None:
            A, B = as_fraction(cfg["a"]) / eps, as_fraction(cfg["b"]) / eps
            if A.denominator != 1 or B.denominator != 1:
                raise ConfigError("a and b must be integer multiples of eps")
            cfg["A"], cfg["B"] = int(A), int(B)
        if "eps_list" in cfg:
            eps_list = [as_fraction(e) for e in cfg["eps_list"]]
            if any(x <= y for x, y in zip(eps_list, eps_list[1:])):
                raise ConfigError("eps_list must be strictly decreasing")
    if mode == "steiner-audit" and len(cfg["window"]) != 4:
        raise ConfigError("window is [i0, j0, width, height]")


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("FLOWLAB_THREADS", "1")))
    except ValueError:
        return 1


def _pmap(fn, items):
    """Ordered map; a worker pool when FLOWLAB_THREADS > 1."""
    n = _threads()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# -- output -------------------------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, int):
        return str(v)
    return f"{float(v):.17g}"


def _exact(v) -> str:
    return str(v) if isinstance(v, (Fraction, int)) else ""


def write_csv(path: Path, rows: list[dict], exact: bool):
    cols = CSV_COLUMNS + (EXACT_COLUMNS if exact else ())
    lines = [",".join(cols)]
    for r in rows:
        vals = [_fmt(r.get(c)) for c in CSV_COLUMNS]
        if exact:
            vals += [_exact(r.get(c[:-6])) for c in EXACT_COLUMNS]
        lines.append(",".join(vals))
    path.write_text("\n".join(lines) + "\n")


def write_json(path: Path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n")


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v)
    raise TypeError(f"not serialisable: {type(v).__name__}")


def emit_plotdata(out: Path, times, a, b, prefix: str = "series"):
    """Two-column text series: t vs a, t vs b, t vs a/b - 1 and its log."""
    if not times:
        raise ValueError("empty trajectory")
    series = {"a": a, "b": b, "defect": [x / y - 1 for x, y in zip(a, b)]}
    for name, ys in series.items():
        (out / f"{prefix}_{name}.txt").write_text(
            "".join(f"{float(t):.17g} {float(y):.17g}\n" for t, y in zip(times, ys)))
    logs = [(t, math.log(float(d))) for t, d in zip(times, series["defect"]) if d > 0]
    (out / f"{prefix}_log_defect.txt").write_text(
        "".join(f"{float(t):.17g} {y:.17g}\n" for t, y in logs))
    return [f"{prefix}_{n}.txt" for n in (*series, "log_defect")]


def log_slope(times, a, b) -> float | None:
    """Least-squares slope of log(a/b - 1) against t."""
    pts = [(float(t), math.log(x / y - 1)) for t, x, y in zip(times, a, b) if x / y - 1 > 0]
    if len(pts) < 2:
        return None
    ts, ys = zip(*pts)
    return float(np.polyfit(ts, ys, 1)[0])


# -- modes --------------------------------------------------------------------

def _rect_rows(traj: cont.RectTrajectory) -> list[dict]:
    return [{"t": t, "a": a, "b": b, "c": 0.0, "perimeter": 2 * (a + b), "area": a * b}
            for t, a, b in zip(traj.times, traj.a, traj.b)]


def _check_rect_rows(rows, area_tol: float):
    for k, r in enumerate(rows):
        if abs(r["area"] - 1) > area_tol:
            raise GuardFailure(f"row {k}: area {r['area']!r} off by more than {area_tol}")
    for k in range(1, len(rows)):
        if rows[k]["a"] + rows[k]["b"] > rows[k - 1]["a"] + rows[k - 1]["b"] + 1e-12:
            raise GuardFailure(f"row {k}: a + b increased")


def run_continuum(cfg, out: Path) -> dict:
    rect = cont.Rect(float(cfg["a"]), float(cfg["b"]))
    lam = cfg["lam"] if cfg["lam"] is not None else math.inf
    params = cont.ContinuumParams(float(cfg["tau"]), float(lam), float(cfg["horizon"]))
    traj = cont.run_approximate_flow(rect, params)
    if traj.status != "ok":
        raise GuardFailure(traj.status)
    rows = _rect_rows(traj)
    _check_rect_rows(rows, 1e-12)
    write_csv(out / "trajectory.csv", rows, exact=False)
    files = emit_plotdata(out, traj.times, traj.a, traj.b)
    return {"final": {"a": traj.a[-1], "b": traj.b[-1]}, "steps": len(traj.times) - 1,
            "notes": traj.notes, "a_monotone": all(x >= y for x, y in zip(traj.a, traj.a[1:])),
            "plot_files": files}


def run_limit_ode(cfg, out: Path) -> dict:
    rect = cont.Rect(float(cfg["a"]), float(cfg["b"]))
    try:
        traj = cont.integrate_limit_ode(rect, float(cfg["horizon"]), float(cfg["ode_step"]))
    except cont.InvariantDrift as exc:
        raise GuardFailure(str(exc)) from exc
    rows = _rect_rows(traj)
    _check_rect_rows(rows, 1e-9)
    write_csv(out / "trajectory.csv", rows, exact=False)
    f0 = cont.aspect_defect(rect.a, rect.b)
    bound_ok = all(cont.aspect_defect(a, b) <= f0 * math.exp(-4 * t) * (1 + 1e-6)
                   for t, a, b in zip(traj.times, traj.a, traj.b))
    files = emit_plotdata(out, traj.times, traj.a, traj.b)
    return {"final": {"a": traj.a[-1], "b": traj.b[-1]},
            "max_area_drift": max(abs(a * b - 1) for a, b in zip(traj.a, traj.b)),
            "exponential_bound_satisfied": bound_ok,
            "log_defect_slope": log_slope(traj.times, traj.a, traj.b),
            "plot_files": files}


def _discrete_rows(traj: disc.Trajectory) -> list[dict]:
    rows = []
    for k, (t, s) in enumerate(zip(traj.times, traj.states)):
        ch = traj.chosen[k - 1] if k else None
        rows.append({"t": t, "a": s.a, "b": s.b, "c": s.c, "perimeter": s.perimeter,
                     "area": s.area, "chosen_X": ch.X if ch else None,
                     "chosen_Y": ch.Y if ch else None, "chosen_D": ch.D if ch else None,
                     "overflow_flag": ch.overflow if ch else None})
    return rows


def run_discrete(cfg, out: Path, rectangular: bool) -> dict:
    eps = as_fraction(cfg["eps"])
    lam = as_fraction(cfg["lam"]) if cfg["lam"] is not None else None
    params = disc.FlowParams(cfg["alpha"], eps, lam, int(cfg["steps"]))
    qr0 = QuasiRect(eps, int(cfg["A"]), int(cfg["B"]), int(cfg.get("C") or 0))
    if rectangular:
        traj = disc.run_rectangular_flow(qr0, params, bool(cfg.get("keep_in_state", False)))
    else:
        traj = disc.run_symmetric_flow(qr0, params)
    if traj.status.startswith("guard failure"):
        raise GuardFailure(traj.status)
    rows = _discrete_rows(traj)
    sums = [r["a"] + r["b"] for r in rows]
    if any(y > x for x, y in zip(sums, sums[1:])):
        raise GuardFailure("a + b increased")
    if not rectangular and len({r["area"] for r in rows}) != 1:
        raise GuardFailure("area not conserved")
    write_csv(out / "trajectory.csv", rows, exact=True)
    files = emit_plotdata(out, traj.times, [r["a"] for r in rows], [r["b"] for r in rows])
    final = traj.states[-1]
    jumps = [abs(x.a - y.a) for x, y in zip(traj.states, traj.states[1:])]
    return {"final": {"a": final.a, "b": final.b, "c": final.c},
            "status": traj.status, "steps": len(traj.chosen), "pinned": traj.pinned,
            "warnings": traj.warnings, "overflow_steps": sum(c.overflow for c in traj.chosen),
            "max_jump_a": max(jumps) if jumps else Fraction(0),
            "discarded": traj.discarded if rectangular else None,
            "plot_files": files}


def run_audit(cfg, out: Path) -> dict:
    w = oracle.Window(*(int(v) for v in cfg["window"]))
    qr = QuasiRect(Fraction(1), *(int(v) for v in cfg["qr"]))
    rep = oracle.exhaustive_steiner_audit(w, qr)
    (out / "audit.txt").write_text(rep.format())
    return {"passed": rep.passed, "sets": rep.sets, "violations": rep.violations}


def _sqr_case(args):
    A, B, C, N, alpha = args
    eps = Fraction(1, N)
    qr = QuasiRect(eps, A, B, C)
    params = disc.FlowParams(alpha, eps)
    try:
        chosen = disc.choose(disc.candidates(qr, params))
    except ValueError:
        return None
    best = oracle.sqr_brute_force(qr, params)
    m = best.member
    return {"A": A, "B": B, "C": C, "N": N, "alpha": str(alpha),
            "flow": [chosen.X, chosen.Y, chosen.D], "flow_overflow": chosen.overflow,
            "oracle": [m.X, m.Y, m.D], "oracle_pseudo_axial": m.pseudo_axial,
            "match": (chosen.X, chosen.Y, chosen.D) == (m.X, m.Y, m.D) and m.pseudo_axial}


def closed_form_grid(a_max: int = 12, b_max: int = 8, y_max: int = 3):
    """Closed-form dissipation against cell sums on every in-domain move."""
    total = exact = 0
    branches = set()
    for A in range(2, a_max + 1):
        for B in range(1, min(A, b_max + 1)):
            for C in range(A):
                for X in range((A + 1) // 2):
                    for Y in range(y_max + 1):
                        D = disc.area_remainder(A, B, C, X, Y)
                        if not disc.in_closed_form_domain(A, B, C, X, Y, D):
                            continue
                        n, m, r = disc.realize(A, B, X, Y, D)
                        cells = dissipation_units(quasi_rect_cells(n, m, r),
                                                  quasi_rect_cells(A, B, C))
                        total += 1
                        exact += cells == sum(disc.dissipation_parts_units(A, B, C, X, Y, D))
                        side = "2X<=B" if 2 * X <= B else ("B odd" if B % 2 else "B even")
                        branches.add((side, Y > 0, C > 0))
    return {"cases": total, "exact": exact, "branches": len(branches)}


def run_oracle(cfg, out: Path) -> dict:
    checks = cfg["checks"] or ["discrete-closed-form", "sqr", "quadrature"]
    res = {}
    if "discrete-closed-form" in checks:
        res["discrete-closed-form"] = closed_form_grid()
    if "sqr" in checks:
        cases = cfg.get("sqr_cases") or [[40, 10, 0, 20, "1"], [27, 12, 0, 18, "1"]]
        items = [(int(A), int(B), int(C), int(N), as_fraction(al)) for A, B, C, N, al in cases]
        res["sqr"] = _pmap(_sqr_case, items)
    if "quadrature" in checks:
        grid = int(cfg.get("grid", 2000))
        pts = cfg.get("points") or [[2.0, 0.5, 0.1], [2.0, 0.5, 0.3]]
        rows = []
        for a, b, x in pts:
            q = oracle.quadrature_dissipation(cont.Rect(a, b), oracle.moved_rect(a, b, x), grid)
            c = cont.dissipation_rect(a, b, x)
            rows.append({"a": a, "b": b, "x": x, "quadrature": q, "closed_form": c,
                         "relative_gap": abs(q - c) / c if c else abs(q)})
        res["quadrature"] = rows
    write_json(out / "oracle.json", res)
    return {"checks": checks}


def run_pinning(cfg, out: Path) -> dict:
    N = int(cfg["N"])
    alphas = cfg["alphas"] or [str(Fraction(round(1000 * 2 ** (k / 2) / 100), 1000))
                              for k in range(21)]
    rows = disc.pinning_map([as_fraction(b) for b in cfg["b_values"]],
                            [as_fraction(a) for a in alphas], N)
    lines = ["b,alpha,A,B,C,drift,printed,window,simulated,sim_eq_window,sim_eq_printed"]
    for r in rows:
        lines.append(",".join([str(r.b), str(r.alpha), *map(str, r.counts),
                               _fmt(r.drift), *(_fmt(v) for v in
                               (r.printed, r.window, r.simulated,
                                r.simulated == r.window, r.simulated == r.printed))]))
    (out / "pinning.csv").write_text("\n".join(lines) + "\n")
    return {"points": len(rows),
            "simulated_vs_window_agree": sum(r.simulated == r.window for r in rows),
            "simulated_vs_printed_agree": sum(r.simulated == r.printed for r in rows),
            "window_vs_printed_agree": sum(r.window == r.printed for r in rows)}


def run_convergence(cfg, out: Path) -> dict:
    rect = cont.Rect(float(cfg["a"]), float(cfg["b"]))
    taus = [float(t) for t in cfg["taus"]]
    res = cont.convergence_study(rect, taus, float(cfg["horizon"]))
    lines = ["tau,sup_error"] + [f"{t:.17g},{e:.17g}" for t, e in zip(taus, res["errors"])]
    (out / "convergence.csv").write_text("\n".join(lines) + "\n")
    res["order_in_range"] = 0.8 <= res["order"] <= 1.2
    return res


RUNNERS = {
    "continuum-flow": run_continuum,
    "limit-ode": run_limit_ode,
    "discrete-symmetric": lambda c, o: run_discrete(c, o, False),
    "discrete-rectangular": lambda c, o: run_discrete(c, o, True),
    "steiner-audit": run_audit,
    "oracle-verify": run_oracle,
    "pinning-map": run_pinning,
    "convergence-study": run_convergence,
}


def run(cfg: dict, out: Path) -> int:
    out.mkdir(parents=True, exist_ok=True)
    summary = {"mode": cfg["mode"], "config": {k: v for k, v in sorted(cfg.items())}}
    try:
        summary.update(RUNNERS[cfg["mode"]](cfg, out))
        summary["status"] = "ok"
        code = 0
    except (GuardFailure, ArithmeticError) as exc:
        summary["status"] = f"guard failure: {exc}"
        code = 2
    except ValueError as exc:
        summary["status"] = f"invalid input: {exc}"
        code = 1
    write_json(out / "summary.json", summary)
    return code


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="flowlab", description=__doc__)
    ap.add_argument("mode", choices=MODES)
    ap.add_argument("--config")
    ap.add_argument("--set", dest="overrides", action="append", default=[],
                    metavar="KEY=VALUE")
    ap.add_argument("--out", default="flowlab-out")
    ap.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.mode, args.config, args.overrides)
    except (ConfigError, ValueError) as exc:
        print(f"flowlab: {exc}", file=sys.stderr)
        return 1
    code = run(cfg, Path(args.out))
    if code:
        print(f"flowlab: exited with status {code}; see summary.json", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
