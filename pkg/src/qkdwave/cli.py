"""``plan`` command line.

    plan optimize|pattern|sweep-re|nmax|compare|rate-curve --scenario FILE
         [--raman CSV] [--format text|csv|json] [--out PATH]
         [--budget N] [--rth BPS]

Exit codes: 0 success, 1 usage or parse error, 2 infeasible, 3 budget refusal.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import re
import sys
from dataclasses import replace

from .assign import (
    BudgetExceeded,
    InfeasiblePlanError,
    PlanResult,
    brute_force_rate,
    conventional,
    optimize,
)
from .bench import (
    ExperimentSpec,
    compare_methods,
    load_spec,
    n_max,
    pattern_table,
    rate_curve,
    render_pattern,
    sweep_re,
)
from .grid import ConfigError, RamanTableError
from .rate import InfeasibleLinkError

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_BUDGET = 0, 1, 2, 3

log = logging.getLogger("qkdwave")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def sci(x) -> str:
    """Six significant digits in scientific notation; text markers pass through."""
    if isinstance(x, str):
        return x
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.5e}"


_SCI_TAG = "\x00sci:"


def _jsonable(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        s = sci(obj)
        return _SCI_TAG + s if s[0].isdigit() or s[0] == "-" and s[1].isdigit() else s
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item"):
        return _jsonable(obj.item())
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dump_json(obj) -> str:
    text = json.dumps(_jsonable(obj), indent=2)
    return re.sub(r'"\\u0000sci:([^"]+)"', r"\1", text) + "\n"


def dump_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([sci(v) if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def dump_text(header, rows, preamble=()) -> str:
    cells = [[sci(v) if isinstance(v, float) else str(v) for v in r] for r in rows]
    widths = [max([len(h)] + [len(r[i]) for r in cells]) for i, h in enumerate(header)]
    lines = list(preamble)
    lines.append("  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip())
    lines += ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells]
    return "\n".join(lines) + "\n"


def _emit(fmt, header, rows, meta: dict) -> str:
    """Render one report. CSV puts the ``key,value`` block, a blank line, then the table."""
    if fmt == "json":
        return dump_json({**meta, "rows": [dict(zip(header, r)) for r in rows]})
    if fmt == "csv":
        return dump_csv(["key", "value"], meta.items()) + "\n" + dump_csv(header, rows)
    pre = [f"{k}: {sci(v) if isinstance(v, float) else v}" for k, v in meta.items()]
    return dump_text(header, rows, pre)


# -- subcommands --------------------------------------------------------------

_METHODS = {"algorithm1": optimize, "brute-force": brute_force_rate, "conventional": conventional}


def _plan_rows(plan: PlanResult, ctx):
    rows = []
    for ch in plan.per_channel:
        nb = ch.noise
        rows.append([
            "quantum", ch.index, ctx.grid.wavelength(ch.index), "bob" if ch.from_bob else "alice",
            nb.p_fr, nb.p_br, nb.p_fc, nb.p_bc, nb.total, ch.rate_bps,
        ])
    a = plan.assignment
    for label, idxs in (("classical_a", a.classical_a), ("classical_b", a.classical_b)):
        for i in idxs:
            rows.append([label, i, ctx.grid.wavelength(i), "", "", "", "", "", "", ""])
    return rows


_PLAN_HEADER = [
    "kind", "index", "wavelength_nm", "sender", "p_fr", "p_br", "p_fc", "p_bc", "p_total", "rate_bps",
]


def cmd_optimize(spec: ExperimentSpec, args):
    ctx = spec.ctx
    fn = _METHODS[args.method]
    kw = {"budget": spec.budget} if fn is brute_force_rate else {}
    plan = fn(ctx, **kw)
    sc = ctx.scenario
    meta = {
        "method": plan.method.value,
        "structure": sc.structure.value,
        "noise_mode": sc.noise_mode.value,
        "m_quantum": sc.m_quantum,
        "n_classical": sc.n_classical,
        "length_km": float(ctx.dwdm.length_km),
        "r_th_bps": float(sc.r_th),
        "total_rate_bps": plan.total_rate_bps,
        "feasible": plan.feasible,
    }
    for label, row in render_pattern(plan, ctx.grid.count):
        meta[f"pattern_{label}"] = row
    for i, note in enumerate(plan.notes):
        meta[f"note_{i}"] = note
    out = _emit(args.format, _PLAN_HEADER, _plan_rows(plan, ctx), meta)
    return out, EXIT_OK if plan.feasible else EXIT_INFEASIBLE


def cmd_pattern(spec: ExperimentSpec, args):
    ctx = spec.ctx
    lo, hi = spec.n_range or (1, ctx.scenario.n_classical)
    rows = []
    for entry in pattern_table(ctx, range(lo, hi + 1)):
        if entry["rows"] is None:
            rows.append([entry["n"], "", "infeasible", "", ""])
            continue
        for label, row in entry["rows"]:
            q = [i for i, ch in enumerate(row) if ch == "o"]
            c = [i for i, ch in enumerate(row) if ch == "*"]
            rows.append([entry["n"], label, row, " ".join(map(str, q)), " ".join(map(str, c))])
    header = ["n_classical", "fiber", "pattern", "quantum", "classical"]
    meta = {"m_quantum": ctx.scenario.m_quantum, "grid_size": ctx.grid.count}
    return _emit(args.format, header, rows, meta), EXIT_OK


def _range(r, default):
    lo, hi = r or default
    return range(int(lo), int(hi) + 1)


def cmd_sweep_re(spec: ExperimentSpec, args):
    ctx = spec.ctx
    ms = _range(spec.m_range, (1, ctx.scenario.m_quantum))
    ns = _range(spec.n_range, (1, ctx.grid.count - 1))
    cells = sweep_re(ctx, ms, ns)
    rows = [[c.m, c.n, c.r_pr, c.r_co, c.re] for c in cells]
    header = ["m_quantum", "n_classical", "rate_proposed_bps", "rate_conventional_bps", "re_percent"]
    meta = {"length_km": float(ctx.dwdm.length_km), "r_th_bps": float(ctx.scenario.r_th)}
    return _emit(args.format, header, rows, meta), EXIT_OK


def cmd_nmax(spec: ExperimentSpec, args):
    ctx = spec.ctx
    ms = _range(spec.m_range, (ctx.scenario.m_quantum, ctx.scenario.m_quantum))
    results = [n_max(ctx, m) for m in ms]
    for r in results:
        if r.warning:
            log.warning("M=%d: %s", r.m, r.warning)
    rows = [[r.m, r.proposed, r.conventional, r.warning] for r in results]
    header = ["m_quantum", "n_max_proposed", "n_max_conventional", "warning"]
    return _emit(args.format, header, rows, {"length_km": float(ctx.dwdm.length_km)}), EXIT_OK


def cmd_compare(spec: ExperimentSpec, args):
    ctx = spec.ctx
    ms = _range(spec.m_range, (1, ctx.scenario.m_quantum))
    cmp = compare_methods(ctx, ms, budget=spec.budget)
    rows = [[r.m, r.r_th, r.optimal, r.near_optimal, r.conventional] for r in cmp.rows]
    header = ["m_quantum", "r_th_bps", "optimal_bps", "near_optimal_bps", "conventional_bps"]
    meta = {
        "n_classical": ctx.scenario.n_classical,
        "length_km": float(ctx.dwdm.length_km),
        "knee_m": cmp.knee_m if cmp.knee_m is not None else "none",
    }
    return _emit(args.format, header, rows, meta), EXIT_BUDGET if cmp.refused else EXIT_OK


def cmd_rate_curve(spec: ExperimentSpec, args):
    curve = rate_curve(spec.ctx, spec.p_max, spec.p_points)
    rows = [[float(p), float(e), float(l)] for p, e, l in zip(curve.p, curve.exact, curve.linear)]
    header = ["p_m", "rate_exact_bps", "rate_linear_bps"]
    meta = {"p_zero": curve.p_zero, "p_th": curve.p_th}
    return _emit(args.format, header, rows, meta), EXIT_OK


COMMANDS = {
    "optimize": cmd_optimize,
    "pattern": cmd_pattern,
    "sweep-re": cmd_sweep_re,
    "nmax": cmd_nmax,
    "compare": cmd_compare,
    "rate-curve": cmd_rate_curve,
}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="plan", description="QKD/classical DWDM wavelength planner")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--scenario", required=True, help="JSON scenario file")
    p.add_argument("--raman", help="Raman cross-section CSV (default: packaged synthetic table)")
    p.add_argument("--format", choices=("text", "csv", "json"), default="text")
    p.add_argument("--out", help="write here instead of stdout")
    p.add_argument("--budget", type=int, help="cap on exhaustive-search candidates")
    p.add_argument("--rth", type=float, help="override the per-channel key-rate floor (bit/s)")
    p.add_argument("--method", choices=sorted(_METHODS), default="algorithm1",
                   help="optimize only: which planner to run")
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args = build_parser().parse_args(argv)
        spec = load_spec(args.scenario, args.raman)
        if args.rth is not None:
            spec = replace(spec, ctx=spec.ctx.with_scenario(r_th=args.rth))
        if args.budget is not None:
            spec = replace(spec, budget=args.budget)
        out, code = COMMANDS[args.command](spec, args)
    except UsageError as exc:
        print(f"plan: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InfeasiblePlanError, InfeasibleLinkError) as exc:
        print(f"plan: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConfigError, RamanTableError, OSError, ValueError) as exc:
        print(f"plan: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetExceeded as exc:
        print(f"plan: refused: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
