import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qkdwave.assign import (
    BudgetExceeded,
    CostMatrix,
    InfeasiblePlanError,
    Method,
    algorithm1,
    brute_force_noise,
    brute_force_rate,
    check_lemma1,
    conventional,
    cost_matrix,
    dual_fiber_split,
    evaluate,
    optimize,
)
from qkdwave.grid import NoiseMode, Structure
from qkdwave.rate import noise_threshold, secret_key_rate
from qkdwave.system import Assignment, AssignmentError, channel_noise


def naive_min_cost(values, n, m, threshold=math.inf):
    """Loop over every disjoint (classical, quantum) pair in pure Python."""
    d = len(values)
    best = math.inf
    for cl in itertools.combinations(range(d), n):
        rest = [j for j in range(d) if j not in cl]
        for q in itertools.combinations(rest, m):
            per_q = [sum(values[i][j] for i in cl) for j in q]
            if max(per_q) < threshold:
                best = min(best, sum(per_q))
    return best


@st.composite
def instances(draw, max_d=7):
    d = draw(st.integers(3, max_d))
    n = draw(st.integers(1, d - 2))
    m = draw(st.integers(1, d - n))
    seed = draw(st.integers(0, 2**32 - 1))
    vals = np.random.default_rng(seed).uniform(0.1, 10, (d, d))
    np.fill_diagonal(vals, 0.0)
    return vals, n, m


def realised_cost(values, sel):
    return sum(values[i][j] for i in sel.classical for j in sel.quantum)


@given(instances())
def test_algorithm1_matches_naive_oracle(inst):
    vals, n, m = inst
    sel = algorithm1(CostMatrix.from_offdiagonal(vals), n, m)
    assert sel.cost == pytest.approx(naive_min_cost(vals, n, m), rel=1e-12)
    assert not set(sel.classical) & set(sel.quantum)
    assert len(sel.classical) == n and len(sel.quantum) == m
    assert realised_cost(vals, sel) == pytest.approx(sel.cost, rel=1e-12)


@given(instances(), st.floats(0.2, 1.5))
def test_threshold_matches_naive_oracle(inst, scale):
    vals, n, m = inst
    th = scale * n * 5.0
    want = naive_min_cost(vals, n, m, th)
    P = CostMatrix.from_offdiagonal(vals, th)
    for sel in (algorithm1(P, n, m), brute_force_noise(P, n, m)):
        if math.isinf(want):
            assert not sel.feasible
        else:
            assert sel.cost == pytest.approx(want, rel=1e-12)
            for j in sel.quantum:
                assert sum(vals[i][j] for i in sel.classical) < th


@given(instances())
def test_brute_force_noise_matches_naive_oracle(inst):
    vals, n, m = inst
    sel = brute_force_noise(CostMatrix.from_offdiagonal(vals), n, m)
    assert sel.cost == pytest.approx(naive_min_cost(vals, n, m), rel=1e-12)


def test_transposed_branch_is_used_and_correct(rng):
    # C(8, 6) = 28 > C(8, 1) = 8: quantum sets are enumerated
    vals = rng.uniform(0.1, 10, (8, 8))
    np.fill_diagonal(vals, 0)
    sel = algorithm1(CostMatrix.from_offdiagonal(vals), 6, 1)
    assert sel.cost == pytest.approx(naive_min_cost(vals, 6, 1), rel=1e-12)


def test_tie_break_is_lexicographically_first():
    vals = np.ones((4, 4))
    sel = algorithm1(CostMatrix.from_offdiagonal(vals), 1, 1)
    assert sel.classical == (0,) and sel.quantum == (1,)
    assert brute_force_noise(CostMatrix.from_offdiagonal(vals), 1, 1).classical == (0,)


def test_algorithm1_input_checks():
    P = CostMatrix.from_offdiagonal(np.ones((4, 4)))
    with pytest.raises(ValueError):
        algorithm1(P, 0, 1)
    with pytest.raises(ValueError):
        algorithm1(P, 3, 2)


def test_brute_force_refuses_over_budget():
    P = CostMatrix.from_offdiagonal(np.ones((20, 20)))
    with pytest.raises(BudgetExceeded) as info:
        brute_force_noise(P, 10, 5, budget=1000)
    assert info.value.count == math.comb(20, 10) * math.comb(20, 5)


@given(instances(max_d=6), st.floats(0.2, 5.0))
def test_lemma1_shared_sets_are_optimal(inst, ratio):
    vals, n, m = inst
    rep = check_lemma1(CostMatrix.from_offdiagonal(vals), n, m, c_f=1.0, c_b=ratio)
    assert rep.holds
    assert rep.best_shared >= rep.best_overall - 1e-12


def test_dual_fiber_split():
    assert [dual_fiber_split(m) for m in (1, 2, 5)] == [(0, 1), (1, 1), (2, 3)]
    with pytest.raises(ValueError):
        dual_fiber_split(0)


# -- link-level behaviour ----------------------------------------------------


def test_assignment_validation():
    fd = Structure.FULL_DUPLEX
    with pytest.raises(AssignmentError):
        Assignment.bidirectional((1, 2), (2,)).validate(fd, 8)
    with pytest.raises(AssignmentError):
        Assignment.bidirectional((1, 9), (2,)).validate(fd, 8)
    with pytest.raises(AssignmentError):
        Assignment((1,), (1,), (2,), (3,)).validate(fd, 8)
    with pytest.raises(AssignmentError):
        Assignment((1,), (1, 2), (3,)).validate(fd, 8)
    # dual fiber may reuse a wavelength on the two fibers
    Assignment((1,), (2,), (2,), (1,)).validate(Structure.DUAL_FIBER, 8)
    with pytest.raises(AssignmentError):
        Assignment((1,), (2,), (1,), ()).validate(Structure.DUAL_FIBER, 8)


@pytest.mark.parametrize("mode", list(NoiseMode))
@pytest.mark.parametrize("structure", list(Structure))
def test_scalar_and_matrix_paths_agree(small_ctx, mode, structure):
    ctx = small_ctx.with_scenario(structure=structure, noise_mode=mode, m_quantum=2, n_classical=3)
    a = Assignment.bidirectional((0, 3, 6), (2, 4))
    for q in a.quantum_u1:
        nb = channel_noise(a, q, ctx)
        assert nb.total == pytest.approx(ctx.pair_counts[[0, 3, 6], q].sum(), rel=1e-12)
        if structure is Structure.DUAL_FIBER:
            assert nb.p_br == nb.p_bc == 0


def test_adjacent_leak_only_in_adjacent_mode(small_ctx):
    a = Assignment.bidirectional((3,), (4,))
    raman = channel_noise(a, 4, small_ctx)
    adj = channel_noise(a, 4, small_ctx.with_scenario(noise_mode=NoiseMode.RAMAN_PLUS_ADJACENT))
    assert raman.p_fc == raman.p_bc == 0
    assert adj.p_fc > 0 and adj.p_bc > 0
    assert adj.p_fr == raman.p_fr
    far = channel_noise(
        Assignment.bidirectional((1,), (4,)),
        4,
        small_ctx.with_scenario(noise_mode=NoiseMode.RAMAN_PLUS_ADJACENT),
    )
    assert far.p_fc == far.p_bc == 0


def test_dual_fiber_bob_channel_sees_backward_fiber(small_ctx):
    ctx = small_ctx.with_scenario(structure=Structure.DUAL_FIBER, m_quantum=2, n_classical=1)
    a = Assignment((0,), (7,), (3,), (3,))
    alice, bob = channel_noise(a, 3, ctx), channel_noise(a, 3, ctx, from_bob=True)
    assert alice.p_fr == pytest.approx(ctx.forward_counts[0, 3])
    assert bob.p_fr == pytest.approx(ctx.forward_counts[7, 3])
    with pytest.raises(AssignmentError):
        channel_noise(a, 4, ctx)


@pytest.mark.parametrize("structure", list(Structure))
def test_raman_only_threshold_is_exact(small_ctx, structure):
    ctx = small_ctx.with_scenario(structure=structure, r_th=1e6, n_classical=3)
    P = cost_matrix(ctx)
    cf, cb = ctx.raman_constants
    scale = cf + cb if structure is Structure.FULL_DUPLEX else cf
    p_th = noise_threshold(1e6, ctx.qkd, ctx.dwdm)
    assert P.threshold * scale == pytest.approx(p_th, rel=1e-12)
    assert np.all(np.isinf(np.diag(P.values)))
    off = ~np.eye(ctx.grid.count, dtype=bool)
    np.testing.assert_allclose(P.values[off] * scale, ctx.pair_counts[off], rtol=1e-12)


def test_optimize_beats_conventional_at_m1(ctx):
    for n in (3, 8, 15):
        c = ctx.with_scenario(n_classical=n)
        pr, co = optimize(c), conventional(c)
        assert pr.total_rate_bps >= co.total_rate_bps
        assert pr.method is Method.ALGORITHM1
        assert pr.feasible


def test_conventional_layout(ctx):
    c = ctx.with_scenario(m_quantum=2, n_classical=3)
    a = conventional(c).assignment
    assert a.quantum_u1 == (0, 1)
    assert a.classical_a == a.classical_b == (19, 20, 21)
    d = conventional(c.with_scenario(structure=Structure.DUAL_FIBER)).assignment
    assert d.quantum_u1 == (0,) and d.quantum_u2 == (0,)


def test_zero_classical_channels(ctx):
    plan = optimize(ctx.with_scenario(m_quantum=3, n_classical=0))
    assert plan.assignment.quantum_u1 == (0, 1, 2)
    r0 = secret_key_rate(0.0, ctx.qkd, ctx.dwdm)
    assert plan.total_rate_bps == pytest.approx(3 * r0)


@pytest.mark.parametrize("structure", list(Structure))
@pytest.mark.parametrize("mode", list(NoiseMode))
def test_rate_oracle_dominates(small_ctx, structure, mode):
    c = small_ctx.with_scenario(structure=structure, noise_mode=mode, m_quantum=3, n_classical=2)
    best = brute_force_rate(c)
    assert best.total_rate_bps >= optimize(c).total_rate_bps * (1 - 1e-12)
    assert best.total_rate_bps >= conventional(c).total_rate_bps * (1 - 1e-12)
    assert best.method is Method.BRUTE_FORCE_RATE


def test_rate_oracle_budget(ctx):
    with pytest.raises(BudgetExceeded):
        brute_force_rate(ctx.with_scenario(m_quantum=4, n_classical=8), budget=10_000)


def test_infeasible_floor_raises(ctx):
    r0 = secret_key_rate(0.0, ctx.qkd, ctx.dwdm)
    c = ctx.with_scenario(m_quantum=5, n_classical=16, r_th=0.999 * r0)
    with pytest.raises(InfeasiblePlanError):
        optimize(c)


def test_capacity_check(small_ctx):
    with pytest.raises(ValueError):
        optimize(small_ctx.with_scenario(m_quantum=4, n_classical=5))


def test_evaluate_flags_rate_floor(small_ctx):
    a = Assignment.bidirectional((0,), (5,))
    c = small_ctx.with_scenario(n_classical=1)
    assert evaluate(c, a, Method.CONVENTIONAL).feasible
    assert not evaluate(c.with_scenario(r_th=1e12), a, Method.CONVENTIONAL).feasible


@pytest.mark.parametrize("m,n", [(1, 2), (2, 3), (3, 1)])
def test_rate_oracle_matches_plain_loop(small_ctx, m, n):
    c = small_ctx.with_dwdm(length_km=70).with_scenario(m_quantum=m, n_classical=n)
    W, d = c.pair_counts, c.grid.count
    want = -math.inf
    for cl in itertools.combinations(range(d), n):
        for q in itertools.combinations([j for j in range(d) if j not in cl], m):
            want = max(want, sum(secret_key_rate(W[list(cl), j].sum(), c.qkd, c.dwdm) for j in q))
    assert brute_force_rate(c).total_rate_bps == pytest.approx(want, rel=1e-12)
