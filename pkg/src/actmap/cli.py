"""Command-line interface: ``actmap <command> [flags]``.

Every command accepts ``--config FILE``, a JSON document whose keys mirror
the command's flags (dashes become underscores; map parameters may also be
grouped under ``"params"``).  Flags given on the command line override the
file.  Unknown keys are rejected.  ``actmap --config FILE`` alone takes the
command from the file's ``"command"`` key.

Exit status: 0 on success, 1 on a domain error (e.g. inverting with
``e = 0``), 2 on a usage error.  CSV output starts with a ``#`` line naming
the command, the exact parameter values and the columns, followed by a
column-name row; JSON output is UTF-8.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Callable, Optional

import numpy as np

from . import antiintegrable as ai
from . import equilibria as eq
from . import horseshoe as hs
from . import scan
from .core import MapParams, evaluate, inverse, iterate, nonwandering_box
from .errors import ACTError
from .schur import MonicCubic, alpha_hat, bifurcation_values, cubic_roots, is_stable, stable_interval

PARAM_KEYS = ("a", "b", "c", "d", "e", "k")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------- output


def _to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v)) if math.isfinite(v) else ""
    return str(v)


def _csv(command: str, meta: dict, columns: list[str], rows) -> str:
    head = " ".join(f"{k}={_fmt(v) if not isinstance(v, str) else v}" for k, v in meta.items())
    lines = [f"# {command} {head} columns={','.join(columns)}".replace("  ", " "), ",".join(columns)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _json(obj) -> str:
    return json.dumps(_to_jsonable(obj), indent=2, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------- parameters


def _params(opts: dict, required=("b", "d")) -> MapParams:
    missing = [k for k in required if opts.get(k) is None]
    if missing:
        raise UsageError(f"missing parameter(s): {', '.join(missing)}")
    vals = {k: opts.get(k) for k in PARAM_KEYS}
    for k in ("a", "c", "e"):
        if vals[k] is None:
            vals[k] = 0.0
    if vals["k"] is None:
        vals["k"] = 3
    try:
        return MapParams(float(vals["a"]), float(vals["b"]), float(vals["c"]), float(vals["d"]), float(vals["e"]), int(vals["k"]))
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def _meta(p: MapParams, **extra) -> dict:
    m = p.as_dict()
    m.update(extra)
    return m


# ---------------------------------------------------------------- commands


def cmd_schur(o: dict) -> str:
    A, B, D = (float(o[k]) for k in ("A", "B", "D"))
    q = MonicCubic(A, B, D)
    if o.get("interval"):
        iv = stable_interval(A, B, D)
        if o["format"] == "json":
            return _json({"interval": None if iv is None else iv.as_tuple()})
        return "empty\n" if iv is None else f"({iv.lo:g}, {iv.hi:g})\n"
    roots = cubic_roots(q)
    report = {
        "A": A,
        "B": B,
        "D": D,
        "stable": is_stable(q),
        "alpha_hat": alpha_hat(q),
        "spectral_radius": float(np.abs(roots).max()),
        "roots": [[r.real, r.imag] for r in roots],
        "bifurcation_values": [{"beta": bv.beta, "kind": bv.kind.value} for bv in bifurcation_values(A, B, D)],
    }
    if o["format"] == "json":
        return _json(report)
    rows = [(r.real, r.imag, abs(r)) for r in roots]
    return _csv("schur", {"A": A, "B": B, "D": D, "stable": report["stable"]}, ["re", "im", "modulus"], rows)


def _orbit_info(p: MapParams, pt: np.ndarray, period: int) -> dict:
    from .core import jacobian

    eigs = np.linalg.eigvals(jacobian(p, pt[0]))
    return {
        "point": pt,
        "period": period,
        "residual": float(np.max(np.abs(evaluate(p, pt) - (pt if period == 1 else -pt)))),
        "eigenvalues": [[z.real, z.imag] for z in eigs],
        "stable": bool(np.abs(eigs).max() < 1),
    }


def cmd_equilibria(o: dict) -> str:
    p = _params(o)
    es = eq.equilibria(p)
    p2 = eq.symmetric_period2(p)
    pts = [("origin", es.origin, 1)] + [(f"p1[{i}]", q, 1) for i, q in enumerate(es.nontrivial)]
    if p2.exists:
        pts += [("p2", p2.points[0], 2), ("-p2", p2.points[1], 2)]
    if o["format"] == "json":
        return _json(
            {
                "params": p.as_dict(),
                "fixed_point_radicand": es.radicand,
                "fixed_point_degenerate": es.degenerate,
                "period2_radicand": p2.radicand,
                "period2_degenerate": p2.degenerate,
                "orbits": {name: _orbit_info(p, q, per) for name, q, per in pts},
            }
        )
    rows = []
    for name, q, per in pts:
        info = _orbit_info(p, q, per)
        rows.append([name, per, *q, info["stable"]])
    return _csv("equilibria", _meta(p), ["name", "period", "x", "y", "z", "stable"], rows)


def _default_c_range(a, b, d, k, kind, e_lo, e_hi) -> tuple[float, float]:
    curves = eq.RegionCurves(a, b)
    es = np.linspace(e_lo, e_hi, 401)
    lo, hi = curves.beta_bounds(es, kind, k)
    ok = lo < hi
    if not ok.any():
        return (-5.0, 5.0)
    cs = np.concatenate([-lo[ok] / b, -hi[ok] / b])
    cmin, cmax = float(cs.min()), float(cs.max())
    pad = 0.1 * max(cmax - cmin, 1e-3)
    return (cmin - pad, cmax + pad)


def cmd_region(o: dict) -> str:
    a, b = float(o["a"] or 0.0), o.get("b")
    if b is None:
        raise UsageError("missing parameter: b")
    b = float(b)
    d = float(o["d"]) if o.get("d") is not None else 1.0
    k = int(o["k"]) if o.get("k") is not None else 3
    if b == 0:
        raise UsageError("b must be non-zero")
    kind = eq.RegionKind(o["kind"])
    n = int(o["grid"])
    if n < 2:
        raise UsageError("grid must be >= 2")
    s = a * a + b * b
    e_lo, e_hi = o.get("e_range") or (-1.1 / s, 1.1 / s)
    c_lo, c_hi = o.get("c_range") or _default_c_range(a, b, d, k, kind, e_lo, e_hi)
    es = np.linspace(e_lo, e_hi, n)
    cs = np.linspace(c_lo, c_hi, n)
    E, C = np.meshgrid(es, cs, indexing="ij")
    M = eq.region_mask(a, b, d, k, E, C, kind)
    meta = {"a": a, "b": b, "d": d, "k": k, "kind": kind.value, "grid": n}
    if o["format"] == "json":
        return _json({**meta, "e": es, "c": cs, "member": M.astype(int)})
    rows = ((E[i, j], C[i, j], int(M[i, j]), kind.value) for i in range(n) for j in range(n))
    return _csv("region", meta, ["e", "c", "member", "kind"], rows)


def cmd_boundary(o: dict) -> str:
    a = float(o["a"] or 0.0)
    if o.get("b") is None:
        raise UsageError("missing parameter: b")
    b = float(o["b"])
    d = float(o["d"]) if o.get("d") is not None else 1.0
    k = int(o["k"]) if o.get("k") is not None else 3
    kind = eq.RegionKind(o["kind"])
    if o.get("e") is not None:
        es = [float(o["e"])]
    else:
        s = a * a + b * b
        lo, hi = o.get("e_range") or (-1.0 / s, 1.0 / s)
        es = list(np.linspace(lo, hi, int(o["n"]) + 2)[1:-1])
    pts = []
    for e in es:
        try:
            pts.extend(eq.boundary_classify(a, b, d, k, e, kind, tol=float(o["tol"])))
        except ACTError:
            if len(es) == 1:
                raise
    meta = {"a": a, "b": b, "d": d, "k": k, "kind": kind.value}
    if o["format"] == "json":
        return _json(
            {
                **meta,
                "points": [
                    {"e": bp.e, "c": bp.c, "kind": bp.kind.value, "verified": bp.verified,
                     "eigenvalues": [[z.real, z.imag] for z in bp.eigenvalues]}
                    for bp in pts
                ],
            }
        )
    rows = [(bp.e, bp.c, bp.kind.value, bp.verified) for bp in pts]
    return _csv("boundary", meta, ["e", "c", "kind", "verified"], rows)


def cmd_box(o: dict) -> str:
    p = _params(o)
    box = nonwandering_box(p)
    if o["format"] == "json":
        return _json({"params": p.as_dict(), "x_max": box.x_max, "y_max": box.y_max, "z_max": box.z_max})
    return _csv("box", _meta(p), ["x_max", "y_max", "z_max"], [(box.x_max, box.y_max, box.z_max)])


def _seed_from(o: dict, p: MapParams) -> np.ndarray:
    if o.get("seed") is not None:
        return np.asarray(o["seed"], dtype=float)
    s = scan.seed_state(p, o.get("seed_mode") or "origin", float(o["seed_offset"]))
    if s is None:
        raise ACTError(f"seed orbit {o.get('seed_mode')!r} does not exist at these parameters")
    return s


def cmd_orbit(o: dict) -> str:
    p = _params(o)
    s0 = _seed_from(o, p)
    n = int(o["n"])
    if n < 0:
        raise UsageError("n must be >= 0")
    if o.get("backward"):
        states = [s0]
        for _ in range(n):
            states.append(inverse(p, states[-1]))
        states = np.array(states)
        escaped, idx = False, None
    else:
        res = iterate(p, s0, n, inflation=float(o["inflation"]))
        states, escaped, idx = res.states, res.escaped, res.escape_index
    meta = _meta(p, n=n, escaped=escaped, escape_index=-1 if idx is None else idx)
    if o["format"] == "json":
        return _json({**meta, "states": states})
    rows = ((i, *s) for i, s in enumerate(states))
    return _csv("orbit", meta, ["step", "x", "y", "z"], rows)


def cmd_horseshoe(o: dict) -> str:
    p = _params(o)
    n = int(o["n"])
    if not 1 <= n <= hs.MAX_PERIOD:
        raise UsageError(f"n must be in 1..{hs.MAX_PERIOD}")
    rep = hs.horseshoe_report(p, n_max=n, perturb=float(o["perturb"]))
    if o["format"] == "csv":
        rows = [(c["n"], c["expected"], c["count"], c["distinct"], c.get("count_perturbed", "")) for c in rep["counts"]]
        return _csv("horseshoe", _meta(p, case=rep["case"]), ["n", "expected", "count", "distinct", "count_perturbed"], rows)
    return _json(rep)


def cmd_ai_continue(o: dict) -> str:
    try:
        route = ai.RouteSpec(o["route"], float(o["ratio"]), float(o["lam"]), ceiling=float(o["ceiling"]))
    except ValueError as exc:
        raise ACTError(str(exc)) from None
    base = _params({**o, "b": o.get("b") if o.get("b") is not None else 1.0, "d": o.get("d") if o.get("d") is not None else 1.0})
    if o.get("word"):
        word = [int(s) for s in str(o["word"]).replace(" ", "").split(",") if s != ""]
        res = ai.continue_orbit(word, route, base)
        if o["format"] == "csv":
            rows = ((i, *s) for i, s in enumerate(res.orbit))
            return _csv("ai-continue", _meta(res.params, route=route.route.value, lam=route.lam, word="".join(map(str, word))),
                        ["step", "x", "y", "z"], rows)
        return _json({"word": word, "params": res.params.as_dict(), "x": res.x, "orbit": res.orbit,
                      "iterations": res.iterations, "residual": res.residual_norm})
    rep = ai.conjugacy_witness(route, base, int(o["n_max"]))
    if o["format"] == "csv":
        rows = [(lv.n, lv.expected, lv.converged, lv.distinct, lv.max_defect) for lv in rep.levels]
        return _csv("ai-continue", _meta(rep.params, route=route.route.value, lam=route.lam),
                    ["n", "expected", "converged", "distinct", "max_defect"], rows)
    return _json(rep.to_dict())


def cmd_scan(o: dict) -> str:
    p = _params(o)
    seed = o["seed"] if o.get("seed") is not None else (o.get("seed_mode") or "origin")
    try:
        cfg = scan.ScanConfig(
            param=o["param"], start=float(o["start"]), stop=float(o["stop"]), steps=int(o["steps"]),
            transient=int(o["transient"]), sample=int(o["sample"]), seed=seed,
            seed_offset=float(o["seed_offset"]), inflation=float(o["inflation"]),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    table = scan.bifurcation_diagram(cfg, p)
    if o["format"] == "json":
        return _json({"params": p.as_dict(), "param": cfg.param, "values": table.values, "periods": table.periods,
                      "escaped": table.escaped, "first_period_doubling": scan.first_period_doubling(table),
                      "transitions": scan.period_transitions(table)})
    return table.to_csv(max_samples=o.get("max_samples"))


def cmd_section(o: dict) -> str:
    p = _params(o)
    s0 = _seed_from(o, p)
    if o["plane"] == "axis":
        plane = scan.axis_section(p)
    else:
        plane = scan.SectionPlane.coordinate(o["plane"], float(o["value"]))
    sec = scan.poincare_section(p, s0, plane, int(o["n"]), stride=int(o["stride"]),
                                transient=int(o["transient"]), min_crossings=int(o["min_crossings"]))
    meta = _meta(p, plane=o["plane"], stride=int(o["stride"]), n=int(o["n"]), volume_preserving=sec.volume_preserving)
    if o["format"] == "json":
        return _json({**meta, "uv": sec.uv, "points": sec.points})
    rows = ((u, v, *q) for (u, v), q in zip(sec.uv, sec.points))
    return _csv("section", meta, ["u", "v", "x", "y", "z"], rows)


def cmd_lyapunov(o: dict) -> str:
    p = _params(o)
    s0 = _seed_from(o, p)
    tri = scan.lyapunov(p, s0, int(o["n"]), transient=int(o["transient"]))
    if o["format"] == "json":
        return _json({"params": p.as_dict(), "seed": s0, "exponents": tri.exponents, "sum": tri.total,
                      "sum_rule_error": tri.sum_rule_error, "steps": tri.steps})
    return _csv("lyapunov", _meta(p, n=int(o["n"])), ["a", "b", "c", "d", "e", "k", "l1", "l2", "l3"],
                [(*p.as_dict().values(), *tri.exponents)])


# ---------------------------------------------------------------- parser


def _add_params(sp, need_c=True, need_e=True):
    for k in PARAM_KEYS:
        if (k == "c" and not need_c) or (k == "e" and not need_e):
            continue
        sp.add_argument(f"--{k}", type=int if k == "k" else float)


def _add_seed(sp):
    sp.add_argument("--seed", type=float, nargs=3, metavar=("X", "Y", "Z"))
    sp.add_argument("--seed-mode", choices=scan.SEED_MODES)
    sp.add_argument("--seed-offset", type=float)


COMMANDS: dict[str, tuple[Callable[[dict], str], dict]] = {}


def _build() -> tuple[_Parser, dict]:
    parser = _Parser(prog="actmap", description="ACT map analysis toolkit.")
    parser.add_argument("--config", help="JSON config file (used when no command is given)")
    sub = parser.add_subparsers(dest="command")
    subs = {}

    def add(name, fn, defaults, help_):
        sp = sub.add_parser(name, help=help_, argument_default=argparse.SUPPRESS)
        sp.add_argument("--config")
        sp.add_argument("--out", "-o")
        sp.add_argument("--format", choices=("csv", "json"))
        COMMANDS[name] = (fn, {"out": None, "format": "csv", **defaults})
        subs[name] = sp
        return sp

    sp = add("schur", cmd_schur, {"interval": False}, "Schur stability of l^3 + A l^2 + B l + D")
    sp.add_argument("--A", type=float, required=False)
    sp.add_argument("--B", type=float, required=False)
    sp.add_argument("--D", type=float, required=False)
    sp.add_argument("--interval", action="store_true")

    sp = add("equilibria", cmd_equilibria, {}, "fixed points and symmetric period-2 orbit")
    _add_params(sp)

    sp = add("region", cmd_region, {"kind": "trivial", "grid": 200}, "stability-region raster over (e, c)")
    _add_params(sp, need_c=False, need_e=False)
    sp.add_argument("--kind", choices=[k.value for k in eq.RegionKind])
    sp.add_argument("--grid", type=int)
    sp.add_argument("--e-range", type=float, nargs=2)
    sp.add_argument("--c-range", type=float, nargs=2)

    sp = add("boundary", cmd_boundary, {"kind": "trivial", "n": 200, "tol": 1e-8}, "classified region boundary points")
    _add_params(sp, need_c=False)
    sp.add_argument("--kind", choices=[k.value for k in eq.RegionKind])
    sp.add_argument("--e-range", type=float, nargs=2)
    sp.add_argument("--n", type=int)
    sp.add_argument("--tol", type=float)

    sp = add("box", cmd_box, {}, "nonwandering bounding box")
    _add_params(sp)

    sp = add("orbit", cmd_orbit, {"n": 100, "inflation": 10.0, "seed_offset": 1e-8, "backward": False}, "iterate F (or its inverse)")
    _add_params(sp)
    _add_seed(sp)
    sp.add_argument("--n", type=int)
    sp.add_argument("--inflation", type=float)
    sp.add_argument("--backward", action="store_true")

    sp = add("horseshoe", cmd_horseshoe, {"n": 6, "perturb": 1e-2, "format": "json"}, "horseshoe checks and periodic-word counts")
    _add_params(sp)
    sp.add_argument("--n", type=int)
    sp.add_argument("--perturb", type=float)

    sp = add(
        "ai-continue",
        cmd_ai_continue,
        {"route": "c_route", "ratio": 1.0, "lam": 0.01, "ceiling": ai.LAMBDA_CEILING, "n_max": 4, "word": None, "format": "json"},
        "anti-integrable continuation of symbol words",
    )
    _add_params(sp)
    sp.add_argument("--route", choices=[r.value for r in ai.Route])
    sp.add_argument("--ratio", type=float)
    sp.add_argument("--lam", type=float)
    sp.add_argument("--ceiling", type=float)
    sp.add_argument("--n-max", type=int)
    sp.add_argument("--word", help="comma-separated symbols, e.g. 1,2")

    sp = add(
        "scan",
        cmd_scan,
        {"param": "c", "start": 0.0, "stop": 1.0, "steps": 101, "transient": 10_000, "sample": 1_000,
         "seed_offset": 1e-8, "inflation": 10.0, "max_samples": None},
        "bifurcation diagram over c or e",
    )
    _add_params(sp)
    _add_seed(sp)
    sp.add_argument("--param", choices=("c", "e"))
    sp.add_argument("--start", type=float)
    sp.add_argument("--stop", type=float)
    sp.add_argument("--steps", type=int)
    sp.add_argument("--transient", type=int)
    sp.add_argument("--sample", type=int)
    sp.add_argument("--inflation", type=float)
    sp.add_argument("--max-samples", type=int)

    sp = add(
        "section",
        cmd_section,
        {"plane": "axis", "value": 0.0, "n": 100_000, "stride": 1, "transient": 0, "min_crossings": 1,
         "seed_offset": 1e-3, "seed_mode": "p1"},
        "Poincare section crossings",
    )
    _add_params(sp)
    _add_seed(sp)
    sp.add_argument("--plane", choices=("axis", "x", "y", "z"))
    sp.add_argument("--value", type=float)
    sp.add_argument("--n", type=int)
    sp.add_argument("--stride", type=int)
    sp.add_argument("--transient", type=int)
    sp.add_argument("--min-crossings", type=int)

    sp = add("lyapunov", cmd_lyapunov, {"n": 100_000, "transient": 1_000, "seed_offset": 1e-3}, "Lyapunov exponents")
    _add_params(sp)
    _add_seed(sp)
    sp.add_argument("--n", type=int)
    sp.add_argument("--transient", type=int)

    return parser, subs


def _known_keys(sp: argparse.ArgumentParser) -> set:
    return {a.dest for a in sp._actions if a.dest not in ("help",)}


def _load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"invalid JSON in {path}: {exc}") from None
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    if "params" in cfg:
        params = cfg.pop("params")
        if not isinstance(params, dict):
            raise UsageError("'params' must be an object")
        bad = set(params) - set(PARAM_KEYS)
        if bad:
            raise UsageError(f"unknown parameter key(s): {', '.join(sorted(bad))}")
        for k, v in params.items():
            cfg.setdefault(k, v)
    return {k.replace("-", "_"): v for k, v in cfg.items()}


def resolve(argv: list[str]) -> tuple[str, dict]:
    """Parse ``argv`` and merge defaults, config file and flags (in that order)."""
    parser, subs = _build()
    if argv and argv[0] == "--config" and len(argv) >= 2 and (len(argv) == 2 or argv[2].startswith("-")):
        cfg = _load_config(argv[1])
        cmd = cfg.get("command")
        if cmd not in subs:
            raise UsageError(f"config must name a command, one of: {', '.join(subs)}")
        argv = [cmd, "--config", argv[1], *argv[2:]]
    ns = parser.parse_args(argv)
    if ns.command is None:
        raise UsageError("a command is required")
    flags = {k: v for k, v in vars(ns).items() if k != "command"}
    cfg = {}
    if flags.get("config"):
        cfg = _load_config(flags["config"])
        cmd = cfg.pop("command", ns.command)
        if cmd != ns.command:
            raise UsageError(f"config is for command {cmd!r}, not {ns.command!r}")
        unknown = set(cfg) - _known_keys(subs[ns.command]) - {"config"}
        if unknown:
            raise UsageError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    _, defaults = COMMANDS[ns.command]
    opts = {k: None for k in _known_keys(subs[ns.command])}
    opts.update(defaults)
    opts.update(cfg)
    opts.update(flags)
    return ns.command, opts


def main(argv: Optional[list[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        command, opts = resolve(argv)
        if command == "schur":
            for key in ("A", "B", "D"):
                if opts.get(key) is None:
                    raise UsageError(f"schur needs --{key}")
        fn, _ = COMMANDS[command]
        text = fn(opts)
    except UsageError as exc:
        print(f"actmap: usage error: {exc}", file=sys.stderr)
        return 2
    except (ACTError, ArithmeticError, ValueError) as exc:
        print(f"actmap: error: {exc}", file=sys.stderr)
        return 1
    out = opts.get("out")
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            # Downstream reader closed early (e.g. ``| head``).
            devnull = os.open(os.devnull, os.O_WRONLY)
            os.dup2(devnull, sys.stdout.fileno())
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
