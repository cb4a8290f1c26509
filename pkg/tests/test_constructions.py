import math
from fractions import Fraction

import numpy as np
import pytest

import pathqv as pq
from pathqv.constructions import (BlowupResult, CantorSchedule, TargetSchedule,
                                  blowup_partition, cantor_function,
                                  cantor_interval_qv, cantor_local_time_value,
                                  cantor_oscillation_formula, cantor_partition,
                                  cantor_path, cantor_stage_qv, dist_to_thirds_set,
                                  gap_intervals, geometric_stage_sum,
                                  interval_hit_walk, max_square_variation, qv_metric,
                                  target_qv_partitions)


# ---------------------------------------------------------------------------
# geometry of the square-root-distance path


def test_path_values():
    x = cantor_path()
    assert x.eval(0.5) == pytest.approx(1.0 / math.sqrt(3.0), abs=1e-15)
    # 1/4 has ternary digits 0.0202..., an exactly representable set member
    assert x.eval(0.25) == 0.0
    # midpoint of the level-2 gap (1/9, 2/9): half-width 1/18
    assert x.eval(1.0 / 6.0) == pytest.approx(1.0 / 3.0, abs=1e-15)
    assert x.eval(0.0) == 0.0 and x.eval(1.0) == 0.0
    # the float nearest 1/3 is not the rational 1/3; it sits in a very deep gap
    assert x.eval(1.0 / 3.0) < 1e-10


def test_distance_exactness():
    assert dist_to_thirds_set(0.5) == Fraction(1, 6)
    assert dist_to_thirds_set(0.25) == 0
    assert dist_to_thirds_set(float(Fraction(1, 6))) == Fraction(
        float(Fraction(1, 6))) - Fraction(1, 9)


def test_gap_intervals():
    assert gap_intervals(1) == [(Fraction(1, 3), Fraction(2, 3))]
    lvl2 = gap_intervals(2)
    assert (Fraction(1, 9), Fraction(2, 9)) in lvl2
    assert (Fraction(7, 9), Fraction(8, 9)) in lvl2
    assert len(gap_intervals(5)) == 16


def test_cantor_function_values():
    assert cantor_function(0.0) == 0.0
    assert cantor_function(1.0) == 1.0
    assert cantor_function(0.5) == 0.5
    assert cantor_function(0.15) == 0.25  # inside (1/9, 2/9)
    assert cantor_function(0.8) == 0.75  # inside (7/9, 8/9)
    assert abs(cantor_function(1.0 / 3.0) - 0.5) < 1e-10  # float(1/3) is just below 1/3
    assert cantor_function(0.4) == 0.5


def test_cantor_function_monotone():
    ts = np.linspace(0, 1, 400)
    vals = [cantor_function(float(t)) for t in ts]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


# ---------------------------------------------------------------------------
# staged partitions, exact arithmetic


def test_interval_walk_small():
    assert interval_hit_walk(2) == [0, 1, 2, 1, 0]
    assert interval_hit_walk(1) == [0, 1, 0]


def test_interval_qv_closed_form_matches_enumeration():
    for i in (1, 2, 3):
        for m in (1, 2, 8, 64):
            enum = cantor_interval_qv(i, m, enumerate_cap=10 ** 6)
            closed = 2 * m * Fraction(1, 3 ** i * m * m)
            assert enum == closed


@pytest.mark.parametrize("i,n", [(i, n) for i in range(1, 5) for n in range(1, 7)])
def test_interval_qv_paper_schedule_exact(i, n):
    sched = CantorSchedule("paper")
    got = cantor_interval_qv(i, sched.m(i, n))
    assert got == Fraction(1, 3 ** i) * Fraction(2, 2 ** (n * i))


def test_interval_qv_unit_schedule():
    for i in (1, 2, 5):
        assert cantor_interval_qv(i, 1) == Fraction(2, 3 ** i)


@pytest.mark.parametrize("n", range(1, 7))
def test_stage_total_equals_geometric_sum(n):
    assert cantor_stage_qv(n) == geometric_stage_sum(n)


def test_stage_total_limit_measured():
    # the geometric sum from i=1 vanishes as n grows; record the trend
    vals = [float(cantor_stage_qv(n)) for n in range(1, 9)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 1e-2


def test_partition_qv_matches_exact_stage_total():
    x = cantor_path()
    for n in (1, 2, 3):
        pi = cantor_partition(n)
        got = pq.qv(x, pi, 1.0)
        assert got == pytest.approx(float(cantor_stage_qv(n)), rel=1e-9)


def test_local_time_closed_form_matches_profile():
    x = cantor_path()
    for n in (1, 2):
        pi = cantor_partition(n)
        prof = pq.discrete_local_time(x, pi, 1.0)
        for u in (0.15, 0.3, 0.5):
            assert prof.value(u) == pytest.approx(
                cantor_local_time_value(u, n), abs=1e-9)


def test_local_time_collapse():
    for u in (0.1, 0.2, 0.5):
        vals = [cantor_local_time_value(u, n) for n in range(1, 7)]
        assert all(b < a for a, b in zip(vals, vals[1:]))
        assert vals[-1] < 0.05


def test_oscillation_measured_matches_deep_gap_formula():
    x = cantor_path(knot_depth=8)
    for n in (1, 2, 3):
        pi = cantor_partition(n)
        measured = pq.oscillation(x, pi, 1.0)
        assert measured == pytest.approx(cantor_oscillation_formula(n), rel=1e-6)


# ---------------------------------------------------------------------------
# blow-up partitions


def test_max_square_variation_brute_force():
    rng = np.random.default_rng(11)
    for _ in range(30):
        v = rng.normal(size=rng.integers(2, 12))
        got, chain = max_square_variation(v)
        # brute-force DP over subsequences containing both endpoints
        n = len(v)
        best = np.full(n, -np.inf)
        best[0] = 0.0
        for j in range(1, n):
            for i in range(j):
                best[j] = max(best[j], best[i] + (v[j] - v[i]) ** 2)
        assert got == pytest.approx(best[-1], abs=1e-12)
        sub = v[chain]
        assert np.sum(np.diff(sub) ** 2) == pytest.approx(got, abs=1e-12)


def test_blowup_zigzag_saturates_at_two():
    z = pq.zigzag()
    res = blowup_partition(z, (0.0, 1.0), 10.0)
    assert res.status == "saturated"
    assert res.achieved == pytest.approx(2.0, abs=1e-12)


def test_blowup_constant_path():
    res = blowup_partition(pq.constant(1.0), (0.0, 1.0), 1.0)
    assert res.achieved == 0.0
    assert res.saturated


def test_blowup_bridge_reaches_three():
    b = pq.BridgePath(seed=3)
    res = blowup_partition(b, (0.0, 1.0), 3.0, budget_depth=20)
    assert res.achieved >= 3.0
    assert res.status == "achieved"


def test_blowup_monotone_in_budget():
    b = pq.BridgePath(seed=5)
    prev = 0.0
    for budget in (12, 16, 20):
        res = blowup_partition(b, (0.0, 1.0), math.inf, budget_depth=budget)
        assert res.achieved >= prev - 1e-12
        prev = res.achieved


def test_blowup_keeps_base_points():
    b = pq.BridgePath(seed=7)
    keep = pq.partition(0, 0.3, 0.7, 1.0)
    res = blowup_partition(b, (0.0, 1.0), 2.0, budget_depth=16, keep=keep)
    assert set(np.round(keep.times, 12)).issubset(set(np.round(res.partition.times, 12)))


# ---------------------------------------------------------------------------
# targeting


def test_metric_basics():
    assert qv_metric(1.0, 1.0) == 0.0
    assert qv_metric(0.0, math.inf) == 1.0
    assert qv_metric(2.0, 3.0) == pytest.approx(abs(math.exp(-2) - math.exp(-3)))


def test_target_schedule_eval_and_jumps():
    a = TargetSchedule(np.array([0.0, 1.0]), np.array([0.0, 1.0]),
                       np.array([0.5]), np.array([2.0]))
    assert a(0.25) == 0.25
    assert a(0.5) == 0.5 + 2.0
    assert list(a.jumps_above(1.0)) == [0.5]
    assert list(a.jumps_above(3.0)) == []
    back = TargetSchedule.from_json(a.to_json())
    assert back(0.7) == a(0.7)


def test_target_zero_schedule():
    b = pq.BridgePath(seed=3)
    res = target_qv_partitions(b, TargetSchedule.zero(), 4, budget_depth=14)
    assert res.status == "achieved"
    assert res.sup_anchor_error <= 2.0 ** -4 + 1e-3
    assert pq.qv(b, res.partition, 1.0) < 0.05


def test_target_fixed_point_keeps_base():
    b = pq.BridgePath(seed=9)
    base = pq.dyadic_partition(4)
    vals = pq.qv_many(b, base, base.times)
    sched = TargetSchedule(base.times, vals)
    res = target_qv_partitions(b, sched, 4, base=base, budget_depth=16)
    assert set(np.round(base.times, 12)).issubset(set(np.round(res.partition.times, 12)))
    assert res.sup_anchor_error <= 2.0 ** -4 + 1e-3


def test_target_half_rate():
    b = pq.BridgePath(seed=11)
    res = target_qv_partitions(b, TargetSchedule.linear_rate(0.5), 4, budget_depth=20)
    assert res.sup_anchor_error <= 2.0 ** -4 + 1e-3
    assert res.status == "achieved"


def test_target_returns_refinement_and_subadditive_errors():
    b = pq.BridgePath(seed=7)
    base = pq.dyadic_partition(2)
    res = target_qv_partitions(b, TargetSchedule.linear_rate(0.5), 3, base=base,
                               budget_depth=18)
    assert set(np.round(base.times, 12)).issubset(set(np.round(res.partition.times, 12)))
    cell_sum = sum(c.d_error for c in res.cells)
    final_err = qv_metric(pq.qv(b, res.partition, 1.0), 0.5)
    assert final_err <= cell_sum + 1e-9
