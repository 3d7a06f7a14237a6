"""Wavelength assignment: matrix search, exhaustive oracles and baselines."""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .grid import NoiseMode, Structure
from .noise import NoiseBreakdown
from .rate import noise_threshold, secret_key_rate
from .system import Assignment, LinkContext, channel_noise

DEFAULT_BUDGET = 100_000_000
_CHUNK = 4096
_CELLS = 2_000_000  # array cells per block in the rate oracle


class BudgetExceeded(RuntimeError):
    def __init__(self, count: int, budget: int):
        super().__init__(f"search space of {count} candidates exceeds budget {budget}")
        self.count = count
        self.budget = budget


class InfeasiblePlanError(RuntimeError):
    """No candidate satisfies the per-channel noise constraint."""


class Method(str, enum.Enum):
    ALGORITHM1 = "algorithm1"
    BRUTE_FORCE_NOISE = "brute_force_noise"
    BRUTE_FORCE_RATE = "brute_force_rate"
    CONVENTIONAL = "conventional"


@dataclass(frozen=True)
class CostMatrix:
    values: np.ndarray  # classical row i, quantum column j; diagonal is inf
    threshold: float = math.inf

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    @classmethod
    def from_offdiagonal(cls, values, threshold: float = math.inf) -> CostMatrix:
        v = np.array(values, dtype=float)
        np.fill_diagonal(v, np.inf)
        return cls(v, threshold)


@dataclass(frozen=True)
class Selection:
    """Outcome of a noise-cost search; ``feasible`` False means nothing passed."""

    quantum: tuple[int, ...]
    classical: tuple[int, ...]
    cost: float

    @property
    def feasible(self) -> bool:
        return math.isfinite(self.cost)


INFEASIBLE = Selection((), (), math.inf)


@dataclass(frozen=True)
class ChannelResult:
    index: int
    from_bob: bool
    noise: NoiseBreakdown
    rate_bps: float


@dataclass(frozen=True)
class PlanResult:
    assignment: Assignment
    per_channel: tuple[ChannelResult, ...]
    total_rate_bps: float
    feasible: bool
    method: Method
    notes: tuple[str, ...] = field(default=())


def _combinations(d: int, r: int):
    """Lexicographic r-combinations of range(d) as int arrays, in chunks."""
    it = itertools.combinations(range(d), r)
    while True:
        block = list(itertools.islice(it, _CHUNK))
        if not block:
            return
        yield np.array(block, dtype=np.intp).reshape(len(block), r)


def cost_matrix(ctx: LinkContext) -> CostMatrix:
    """Scenario-specific search matrix and its per-channel threshold.

    Raman-only matrices drop the distance-dependent prefactors, which moves
    them into the threshold instead.
    """
    sc = ctx.scenario
    p_th = noise_threshold(sc.r_th, ctx.qkd, ctx.dwdm)
    cf, cb = ctx.raman_constants
    if sc.noise_mode is NoiseMode.RAMAN_ONLY:
        values = ctx.raman_weights.copy()
        threshold = p_th / (cf + cb if sc.structure is Structure.FULL_DUPLEX else cf)
    else:
        values = ctx.pair_counts.copy()
        threshold = p_th
    np.fill_diagonal(values, np.inf)
    return CostMatrix(values, threshold)


def algorithm1(P: CostMatrix, n: int, m: int) -> Selection:
    """Enumerate the smaller side exhaustively, complete the other greedily.

    Ties keep the first candidate in lexicographic order of the enumerated side.
    """
    d = P.dim
    if n < 1 or m < 1:
        raise ValueError("algorithm1 needs n >= 1 and m >= 1")
    if n + m > d:
        raise ValueError(f"n + m = {n + m} exceeds the grid size {d}")
    classical_side = math.comb(d, n) <= math.comb(d, m)
    P2 = P.values if classical_side else P.values.T
    r, keep = (n, m) if classical_side else (m, n)
    best, best_t = INFEASIBLE, math.inf
    for combos in _combinations(d, r):
        c = P2[combos].sum(axis=1)
        order = np.argsort(c, axis=1, kind="stable")[:, :keep]
        d_sorted = np.take_along_axis(c, order, axis=1)
        s = d_sorted.sum(axis=1)
        if classical_side:
            ok = d_sorted[:, -1] < P.threshold
        else:
            # per-quantum noise from the chosen classical rows
            l = P.values[order[:, :, None], combos[:, None, :]].sum(axis=1)
            ok = l.max(axis=1) < P.threshold
        s = np.where(ok, s, np.inf)
        i = int(np.argmin(s))
        if s[i] < best_t:
            best_t = float(s[i])
            picked, rest = tuple(combos[i].tolist()), tuple(sorted(order[i].tolist()))
            best = (
                Selection(rest, picked, best_t) if classical_side else Selection(picked, rest, best_t)
            )
    return best


def brute_force_noise(P: CostMatrix, n: int, m: int, budget: int = DEFAULT_BUDGET) -> Selection:
    """Exact minimiser of the intersection sum over disjoint (classical, quantum) sets."""
    d = P.dim
    count = math.comb(d, n) * math.comb(d, m)
    if count > budget:
        raise BudgetExceeded(count, budget)
    quantum = np.array(list(itertools.combinations(range(d), m)), dtype=np.intp).reshape(-1, m)
    member = np.zeros((len(quantum), d), dtype=bool)
    np.put_along_axis(member, quantum, True, axis=1)
    best, best_t = INFEASIBLE, math.inf
    for cl in itertools.combinations(range(d), n):
        cl_idx = list(cl)
        free = ~member[:, cl_idx].any(axis=1)
        if not free.any():
            continue
        qs = quantum[free]
        per_q = P.values[cl_idx][:, qs].sum(axis=0)  # (len(qs), m)
        cost = np.where(per_q.max(axis=1) < P.threshold, per_q.sum(axis=1), np.inf)
        i = int(np.argmin(cost))
        if cost[i] < best_t:
            best_t = float(cost[i])
            best = Selection(tuple(qs[i].tolist()), cl, best_t)
    return best


@dataclass(frozen=True)
class LemmaReport:
    best_overall: float
    best_shared: float
    overall_argmin: tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]
    shared_argmin: tuple[tuple[int, ...], tuple[int, ...]]
    candidates: int

    @property
    def holds(self) -> bool:
        if math.isinf(self.best_overall):
            return math.isinf(self.best_shared)
        return abs(self.best_shared - self.best_overall) <= 1e-12 * abs(self.best_overall)


def check_lemma1(
    P: CostMatrix, n: int, m: int, budget: int = DEFAULT_BUDGET, c_f: float = 1.0, c_b: float = 1.0
) -> LemmaReport:
    """Exhaustively compare independent forward/backward sets against shared ones.

    Cost is ``c_b * sum P[B, U] + c_f * sum P[A, U]`` with U disjoint from A and B.
    """
    d = P.dim
    count = math.comb(d, n) ** 2 * math.comb(d, m)
    if count > budget:
        raise BudgetExceeded(count, budget)
    if n == 0:
        return LemmaReport(0.0, 0.0, ((), (), tuple(range(m))), ((), tuple(range(m))), 1)
    quantum = np.array(list(itertools.combinations(range(d), m)), dtype=np.intp).reshape(-1, m)
    member = np.zeros((len(quantum), d), dtype=bool)
    np.put_along_axis(member, quantum, True, axis=1)
    col_cost = {}
    for cl in itertools.combinations(range(d), n):
        col_cost[cl] = P.values[list(cl)][:, quantum].sum(axis=(0, 2))
    best_all, arg_all = math.inf, None
    best_eq, arg_eq = math.inf, None
    for a, za in col_cost.items():
        for b, zb in col_cost.items():
            free = ~member[:, sorted(set(a) | set(b))].any(axis=1)
            cost = np.where(free, c_f * za + c_b * zb, np.inf)
            i = int(np.argmin(cost))
            if cost[i] < best_all:
                best_all, arg_all = float(cost[i]), (a, b, tuple(quantum[i].tolist()))
            if a == b and cost[i] < best_eq:
                best_eq, arg_eq = float(cost[i]), (a, tuple(quantum[i].tolist()))
    return LemmaReport(best_all, best_eq, arg_all, arg_eq, count)


def dual_fiber_split(m: int) -> tuple[int, int]:
    if m < 1:
        raise ValueError("m must be >= 1")
    return m // 2, m - m // 2


def evaluate(ctx: LinkContext, assignment: Assignment, method: Method, notes=()) -> PlanResult:
    """Score an assignment channel by channel through the scalar noise path."""
    assignment.validate(ctx.scenario.structure, ctx.grid.count)
    rows = []
    for q, from_bob in assignment.quantum_channels():
        nb = channel_noise(assignment, q, ctx, from_bob)
        rows.append(ChannelResult(q, from_bob, nb, secret_key_rate(nb.total, ctx.qkd, ctx.dwdm)))
    r_th = ctx.scenario.r_th
    return PlanResult(
        assignment,
        tuple(rows),
        float(math.fsum(r.rate_bps for r in rows)),
        all(r.rate_bps > r_th for r in rows),
        method,
        tuple(notes),
    )


def _check_capacity(ctx: LinkContext, m: int) -> None:
    n, d = ctx.scenario.n_classical, ctx.grid.count
    if n + m > d:
        raise ValueError(f"{n} classical + {m} quantum channels exceed the {d}-slot grid")


def _fiber_layout(ctx: LinkContext, k: int, solver) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """(classical, quantum) for one fiber or for the full-duplex link."""
    n = ctx.scenario.n_classical
    if k == 0:
        return (), ()
    if n == 0:
        return (), tuple(range(k))
    return solver(k)


def _assemble(ctx: LinkContext, layouts) -> Assignment:
    (cl_f, q_f), (cl_b, q_b) = layouts
    n = ctx.scenario.n_classical
    # a fiber without quantum channels mirrors the other's data wavelengths
    if n and not q_f:
        cl_f = cl_b
    if n and not q_b:
        cl_b = cl_f
    return Assignment(cl_f, cl_b, q_f, q_b)


def _split(ctx: LinkContext, k: int | None) -> tuple[int, int]:
    m = ctx.scenario.m_quantum
    if ctx.full_duplex:
        return m, 0
    k = dual_fiber_split(m)[0] if k is None else k
    if not 0 <= k <= m:
        raise ValueError(f"split k={k} outside 0..{m}")
    return k, m - k


def optimize(ctx: LinkContext, k: int | None = None) -> PlanResult:
    """Near-optimal plan: minimise total crosstalk with the matrix search."""
    sizes = _split(ctx, k)
    for s in sizes:
        _check_capacity(ctx, s)
    P = cost_matrix(ctx)
    n = ctx.scenario.n_classical

    def solve(size):
        sel = algorithm1(P, n, size)
        if not sel.feasible:
            raise InfeasiblePlanError(
                f"no placement of {size} quantum channels keeps every channel below "
                f"the crosstalk threshold {P.threshold:.6g}"
            )
        return sel.classical, sel.quantum

    layouts = [_fiber_layout(ctx, s, solve) for s in sizes]
    if ctx.full_duplex:
        cl, q = layouts[0]
        assignment = Assignment.bidirectional(cl, q)
    else:
        assignment = _assemble(ctx, layouts)
    plan = evaluate(ctx, assignment, Method.ALGORITHM1)
    notes = []
    if math.isfinite(P.threshold) and not plan.feasible:
        notes.append("matrix constraint passed but exact rates miss r_th")
    return replace(plan, notes=tuple(notes))


def brute_force_rate(
    ctx: LinkContext, k: int | None = None, budget: int = DEFAULT_BUDGET
) -> PlanResult:
    """Exact-rate oracle: every placement scored by the summed key rate.

    Full duplex enumerates bidirectional data sets; dual fiber solves the two
    fibers independently with ``k`` and ``M - k`` quantum channels.
    """
    sizes = _split(ctx, k)
    for s in sizes:
        _check_capacity(ctx, s)
    d, n = ctx.grid.count, ctx.scenario.n_classical
    count = sum(math.comb(d, n) * math.comb(d - n, s) for s in sizes if s)
    if count > budget:
        raise BudgetExceeded(count, budget)
    W = ctx.pair_counts
    r_th = ctx.scenario.r_th

    def solve(size):
        quantum = np.array(list(itertools.combinations(range(d), size)), dtype=np.intp)
        member = np.zeros((len(quantum), d), dtype=bool)
        np.put_along_axis(member, quantum, True, axis=1)
        best_total, best = -math.inf, None
        # classical sets in blocks; row-major argmax keeps the lexicographic tie-break
        block = max(1, _CELLS // (len(quantum) * size))
        combos = itertools.combinations(range(d), n)
        while True:
            cls = np.array(list(itertools.islice(combos, block)), dtype=np.intp).reshape(-1, n)
            if not len(cls):
                break
            rates = secret_key_rate(W[cls].sum(axis=1), ctx.qkd, ctx.dwdm)  # (block, d)
            free = ~member[:, cls].any(axis=2).T  # (block, quantum sets)
            chosen = rates[:, quantum]  # (block, quantum sets, size)
            ok = free & (chosen > r_th).all(axis=2)
            totals = np.where(ok, chosen.sum(axis=2), -np.inf)
            i, jq = np.unravel_index(int(np.argmax(totals)), totals.shape)
            if totals[i, jq] > best_total:
                best_total = float(totals[i, jq])
                best = (tuple(cls[i].tolist()), tuple(quantum[jq].tolist()))
        if best is None:
            raise InfeasiblePlanError(f"no placement of {size} quantum channels meets r_th")
        return best

    layouts = [_fiber_layout(ctx, s, solve) for s in sizes]
    if ctx.full_duplex:
        cl, q = layouts[0]
        return evaluate(ctx, Assignment.bidirectional(cl, q), Method.BRUTE_FORCE_RATE)
    return evaluate(ctx, _assemble(ctx, layouts), Method.BRUTE_FORCE_RATE)


def conventional(ctx: LinkContext, k: int | None = None) -> PlanResult:
    """Two-band layout: quantum at the short-wavelength end, data at the long end."""
    sizes = _split(ctx, k)
    for s in sizes:
        _check_capacity(ctx, s)
    d, n = ctx.grid.count, ctx.scenario.n_classical
    classical = tuple(range(d - n, d))
    if ctx.full_duplex:
        assignment = Assignment.bidirectional(classical, range(sizes[0]))
    else:
        assignment = Assignment(classical, classical, tuple(range(sizes[0])), tuple(range(sizes[1])))
    return evaluate(ctx, assignment, Method.CONVENTIONAL)
