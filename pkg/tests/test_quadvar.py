import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import pathqv as pq


def test_qv_zigzag_examples():
    z = pq.zigzag()
    pi = pq.partition(0, 0.5, 1)
    assert pq.qv(z, pi, 1.0) == 2.0
    # with the clamp convention: 1 + (z(3/4) - z(1/2))^2
    assert pq.qv(z, pi, 0.75) == 1.25
    assert pq.qv(pq.constant(5.0), pi, 1.0) == 0.0


def test_qv_increment_examples():
    z = pq.zigzag()
    pi = pq.partition(0, 0.5, 1)
    assert pq.qv_increment(z, pi, 0.0, 1.0) == pq.qv(z, pi, 1.0)
    assert pq.qv_increment(z, pi, 0.5, 1.0) == 1.0
    assert pq.qv_increment(z, pi, 0.4, 0.4) == 0.0


def test_splitting_identity_exact():
    # s in pi implies qv over (a,b] equals the two half sums exactly
    b = pq.BridgePath(seed=19)
    pi = pq.dyadic_partition(7)
    s = 0.5
    full = pq.qv_increment(b, pi, 0.0, 1.0)
    left = pq.qv_increment(b, pi, 0.0, s)
    right = pq.qv_increment(b, pi, s, 1.0)
    assert full == left + right or abs(full - left - right) < 1e-15


def test_monotone_inclusion():
    b = pq.BridgePath(seed=23)
    pi = pq.dyadic_partition(6)
    inner = pq.qv_increment(b, pi, 0.25, 0.75)
    outer = pq.qv_increment(b, pi, 0.0, 1.0)
    assert inner <= outer


def test_concatenation_identity():
    b = pq.BridgePath(seed=29)
    left = pq.restrict(pq.dyadic_partition(5), 0.0, 0.5)
    right = pq.restrict(pq.dyadic_partition(4), 0.5, 1.0)
    union = pq.merge(left, right)
    total = pq.qv_increment(b, union, 0.0, 1.0)
    assert abs(total - (pq.qv_increment(b, left, 0.0, 0.5)
                        + pq.qv_increment(b, right, 0.5, 1.0))) < 1e-15


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.1, 0.9), st.floats(0.1, 0.9))
def test_increment_algebra_fuzz(seed, u, v):
    b = pq.BridgePath(seed=seed, base_depth=6)
    pi = pq.merge(pq.dyadic_partition(4), pq.Partition(np.sort(np.array([0.0, u, v, 1.0]))))
    s, t = min(u, v), max(u, v)
    whole = pq.qv_increment(b, pi, 0.0, 1.0)
    split = pq.qv_increment(b, pi, 0.0, s) + pq.qv_increment(b, pi, s, 1.0)
    assert abs(whole - split) <= 1e-12 * max(1.0, whole)
    assert pq.qv_increment(b, pi, s, t) <= whole + 1e-15


def test_weighted_sum_constant_weight_equals_qv_bitwise():
    b = pq.BridgePath(seed=37)
    pi = pq.dyadic_partition(10)
    assert pq.weighted_qv_sum(b, pi, lambda v: np.ones_like(v), 1.0) == pq.qv(b, pi, 1.0)


def test_weighted_sum_zigzag():
    z = pq.zigzag()
    pi = pq.partition(0, 0.5, 1)
    # weights at left endpoints: 0 and 1
    assert pq.weighted_qv_sum(z, pi, lambda v: v, 1.0) == 1.0
    assert pq.weighted_qv_sum(pq.constant(2.0), pi, lambda v: v, 1.0) == 0.0


def test_anticipative_gap_bound():
    # the clamped sum differs from the unclamped cumulative mass by at most
    # twice the squared oscillation
    b = pq.BridgePath(seed=41)
    pi = pq.dyadic_partition(6)
    for t in (0.37, 0.61, 0.93):
        clamped = pq.qv(b, pi, t)
        times = pi.times
        vals = b.eval_many(times)
        inc2 = np.diff(vals) ** 2
        unclamped = float(np.sum(inc2[times[1:] <= t]))
        osc = pq.oscillation(b, pi, t)
        assert abs(clamped - unclamped) <= 2 * osc ** 2 + 1e-15


def test_qv_curve_zigzag():
    z = pq.zigzag()
    pi = pq.dyadic_partition(2)
    curve = pq.qv_curve(z, pi, np.array([0.25, 0.5, 0.75, 1.0]))
    assert np.allclose(curve.values, [0.25, 0.5, 0.75, 1.0], atol=1e-15)
    assert curve.final_oscillation == pytest.approx(0.5)


def test_qv_curve_empty():
    z = pq.zigzag()
    curve = pq.qv_curve(z, pq.dyadic_partition(2), [])
    assert len(curve.values) == 0


def test_qv_many_matches_qv():
    b = pq.BridgePath(seed=43)
    pi = pq.dyadic_partition(8)
    ts = np.linspace(0.05, 1.0, 23)
    many = pq.qv_many(b, pi, ts)
    single = np.array([pq.qv(b, pi, float(t)) for t in ts])
    assert np.max(np.abs(many - single)) < 1e-12
