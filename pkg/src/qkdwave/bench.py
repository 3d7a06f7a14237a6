"""Experiments behind the command line: patterns, RE sweeps, N_max, comparisons."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .assign import (
    DEFAULT_BUDGET,
    BudgetExceeded,
    InfeasiblePlanError,
    PlanResult,
    brute_force_rate,
    conventional,
    dual_fiber_split,
    optimize,
)
from .grid import (
    ConfigError,
    DwdmParams,
    QkdParams,
    RamanCrossSectionTable,
    ScenarioConfig,
    build_grid,
    default_raman_table,
    load_raman_table,
)
from .rate import InfeasibleLinkError, fit_linear_model, noise_threshold, secret_key_rate
from .system import LinkContext

log = logging.getLogger(__name__)

CLASSICAL, QUANTUM, UNUSED = "*", "o", "."
UNDEFINED = "undefined"
INFEASIBLE = "infeasible"
REFUSED = "refused"


@dataclass(frozen=True)
class ExperimentSpec:
    ctx: LinkContext
    m_range: tuple[int, int] | None = None
    n_range: tuple[int, int] | None = None
    p_max: float | None = None
    p_points: int = 101
    budget: int = DEFAULT_BUDGET


_SECTIONS = {"qkd": QkdParams, "dwdm": DwdmParams, "scenario": ScenarioConfig}


def _section(doc: dict, name: str, cls):
    raw = doc.get(name, {})
    known = {f.name for f in fields(cls)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown {name} field(s): {', '.join(sorted(unknown))}")
    return cls(**raw)


def load_spec(path, raman: RamanCrossSectionTable | str | Path | None = None) -> ExperimentSpec:
    """Read a JSON scenario file.

    Top-level keys: ``grid`` (start_nm, end_nm, spacing_ghz), ``qkd``, ``dwdm``,
    ``scenario`` (field names as in the parameter dataclasses) and an optional
    ``sweep`` block (m_range, n_range, p_max, p_points).
    """
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    unknown = set(doc) - {"grid", "qkd", "dwdm", "scenario", "sweep"}
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {', '.join(sorted(unknown))}")
    g = {"start_nm": 1530.0, "end_nm": 1565.0, "spacing_ghz": 200.0, **doc.get("grid", {})}
    grid = build_grid(g["start_nm"], g["end_nm"], g["spacing_ghz"])
    try:
        parts = {name: _section(doc, name, cls) for name, cls in _SECTIONS.items()}
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    if raman is None:
        table = default_raman_table()
    elif isinstance(raman, RamanCrossSectionTable):
        table = raman
    else:
        with open(raman, "rb") as fh:
            table = load_raman_table(fh.read())
    if not table.covers(grid):
        raise ConfigError(f"Raman table domain {table.domain} nm is too narrow for the grid")
    sweep = doc.get("sweep", {})
    unknown = set(sweep) - {"m_range", "n_range", "p_max", "p_points"}
    if unknown:
        raise ConfigError(f"unknown sweep field(s): {', '.join(sorted(unknown))}")
    ctx = LinkContext(grid, table, parts["qkd"], parts["dwdm"], parts["scenario"])
    return ExperimentSpec(
        ctx,
        m_range=tuple(sweep["m_range"]) if "m_range" in sweep else None,
        n_range=tuple(sweep["n_range"]) if "n_range" in sweep else None,
        p_max=sweep.get("p_max"),
        p_points=int(sweep.get("p_points", 101)),
    )


# -- patterns ---------------------------------------------------------------


def pattern_row(size: int, quantum, classical) -> str:
    row = [UNUSED] * size
    for i in classical:
        row[i] = CLASSICAL
    for i in quantum:
        if row[i] == CLASSICAL:
            raise ValueError(f"slot {i} is both quantum and classical")
        row[i] = QUANTUM
    return "".join(row)


def render_pattern(plan: PlanResult, grid_size: int) -> list[tuple[str, str]]:
    """``(label, row)`` pairs in ascending wavelength; one row per fiber."""
    a = plan.assignment
    if a.quantum_u2 or a.classical_a != a.classical_b:
        return [
            ("forward", pattern_row(grid_size, a.quantum_u1, a.classical_a)),
            ("backward", pattern_row(grid_size, a.quantum_u2, a.classical_b)),
        ]
    return [("link", pattern_row(grid_size, a.quantum_u1, a.classical_a))]


def parse_pattern(row: str) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Inverse of :func:`pattern_row`: ``(quantum, classical)`` indices."""
    bad = set(row) - {CLASSICAL, QUANTUM, UNUSED}
    if bad:
        raise ValueError(f"unexpected pattern characters {sorted(bad)}")
    q = tuple(i for i, ch in enumerate(row) if ch == QUANTUM)
    c = tuple(i for i, ch in enumerate(row) if ch == CLASSICAL)
    return q, c


def pattern_table(ctx: LinkContext, n_values) -> list[dict]:
    """Near-optimal pattern for each N, one entry per classical-channel count."""
    out = []
    for n in n_values:
        c = ctx.with_scenario(n_classical=n)
        try:
            plan = optimize(c)
        except InfeasiblePlanError:
            out.append({"n": n, "rows": None, "plan": None})
            continue
        out.append({"n": n, "rows": render_pattern(plan, ctx.grid.count), "plan": plan})
    return out


# -- rate enhancement and N_max --------------------------------------------


def rate_enhancement(r_pr: float, r_co: float):
    """Percent gain over the conventional plan, or ``UNDEFINED`` when it has no key."""
    if r_co == 0:
        return UNDEFINED
    return (r_pr - r_co) / r_co * 100


@dataclass(frozen=True)
class ReCell:
    m: int
    n: int
    r_pr: float | str
    r_co: float
    re: float | str


def sweep_re(ctx: LinkContext, m_values, n_values) -> list[ReCell]:
    cells = []
    d = ctx.grid.count
    for m in m_values:
        for n in n_values:
            if m + n > d:
                continue
            c = ctx.with_scenario(m_quantum=m, n_classical=n)
            r_co = conventional(c).total_rate_bps
            try:
                r_pr = optimize(c).total_rate_bps
            except (InfeasiblePlanError, InfeasibleLinkError):
                cells.append(ReCell(m, n, INFEASIBLE, r_co, INFEASIBLE))
                continue
            re_ = rate_enhancement(r_pr, r_co)
            if isinstance(re_, float) and re_ < 0:
                # minimum total noise is not maximum total rate once channels saturate at zero
                log.warning("RE < 0 at M=%d, N=%d: %.4g%%", m, n, re_)
            cells.append(ReCell(m, n, r_pr, r_co, re_))
    return cells


@dataclass(frozen=True)
class NMaxResult:
    m: int
    proposed: int
    conventional: int
    warning: str = ""


def _all_positive(plan: PlanResult) -> bool:
    return all(ch.rate_bps > 0 for ch in plan.per_channel)


def n_max(ctx: LinkContext, m: int) -> NMaxResult:
    """Largest N at which every one of ``m`` quantum channels keeps a positive rate."""
    c0 = ctx.with_scenario(m_quantum=m, r_th=0.0)
    if secret_key_rate(0.0, ctx.qkd, ctx.dwdm) <= 0:
        return NMaxResult(m, 0, 0, "no key even without classical channels")
    # each fiber of a dual-fiber link only has to hold its own quantum share
    per_fiber = m if c0.full_duplex else max(dual_fiber_split(m))
    top = ctx.grid.count - per_fiber

    def proposed_ok(n):
        try:
            plan = optimize(c0.with_scenario(n_classical=n))
        except InfeasiblePlanError:
            return False
        return _all_positive(plan)

    def conventional_ok(n):
        return _all_positive(conventional(c0.with_scenario(n_classical=n)))

    best_pr = next((n for n in range(top, -1, -1) if proposed_ok(n)), 0)
    best_co = next((n for n in range(top, -1, -1) if conventional_ok(n)), 0)
    return NMaxResult(m, best_pr, best_co)


# -- optimal vs near-optimal -----------------------------------------------


@dataclass(frozen=True)
class CompareRow:
    m: int
    r_th: float
    optimal: float | str
    near_optimal: float | str
    conventional: float | str


@dataclass(frozen=True)
class Comparison:
    rows: list[CompareRow]
    knee_m: int | None = None
    refused: bool = False
    notes: list[str] = field(default_factory=list)


def _total(fn, ctx, **kw):
    try:
        return fn(ctx, **kw).total_rate_bps
    except BudgetExceeded:
        return REFUSED
    except (InfeasiblePlanError, InfeasibleLinkError):
        return INFEASIBLE


def find_knee(ms, totals, rtol: float = 1e-9) -> int | None:
    """First M after which the total stops growing for the rest of the range."""
    vals = [(m, t) for m, t in zip(ms, totals) if isinstance(t, float)]
    for idx, (m, t) in enumerate(vals[:-1]):
        if all(t2 <= t * (1 + rtol) for _, t2 in vals[idx + 1 :]):
            return m
    return None


def compare_methods(ctx: LinkContext, m_values, budget: int = DEFAULT_BUDGET) -> Comparison:
    rows = []
    for r_th in (-1.0, 0.0):
        for m in m_values:
            c = ctx.with_scenario(m_quantum=m, r_th=r_th)
            rows.append(
                CompareRow(
                    m,
                    r_th,
                    _total(brute_force_rate, c, budget=budget),
                    _total(optimize, c),
                    _total(conventional, c),
                )
            )
    unconstrained = [r for r in rows if r.r_th < 0]
    knee = find_knee([r.m for r in unconstrained], [r.optimal for r in unconstrained])
    refused = any(r.optimal == REFUSED for r in rows)
    return Comparison(rows, knee, refused)


# -- key rate curve ---------------------------------------------------------


@dataclass(frozen=True)
class RateCurve:
    p: np.ndarray
    exact: np.ndarray
    linear: np.ndarray
    p_zero: float
    p_th: float


def rate_curve(ctx: LinkContext, p_max: float | None = None, points: int = 101) -> RateCurve:
    model = fit_linear_model(ctx.qkd, ctx.dwdm)
    if p_max is None:
        p_max = 1.2 * model.p_zero
    p = np.linspace(0.0, p_max, points)
    try:
        p_th = noise_threshold(ctx.scenario.r_th, ctx.qkd, ctx.dwdm)
    except InfeasibleLinkError:
        p_th = math.nan
    return RateCurve(
        p, secret_key_rate(p, ctx.qkd, ctx.dwdm), model.rate(p), model.p_zero, p_th
    )
