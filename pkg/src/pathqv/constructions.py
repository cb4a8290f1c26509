"""Adversarial and pathological constructions: the square-root-distance path on
the middle-thirds set, partitions that blow the squared-increment sum up, and
the staged refinement that steers it toward an arbitrary increasing target.

Exact statements about the middle-thirds construction run in rational
arithmetic; targeting distances use d(a, b) = |exp(-a) - exp(-b)| so infinite
targets are addressable.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DomainError
from .partitions import Partition, dyadic_partition, freedman_scale, merge, restrict
from .paths import AnalyticPath, BridgePath, Formula, Path, register_formula
from .quadvar import qv, qv_increment

TERNARY_DEPTH = 60


def qv_metric(a: float, b: float) -> float:
    """|exp(-a) - exp(-b)| on [0, inf]; exp(-inf) = 0."""
    ea = 0.0 if a == math.inf else math.exp(-a)
    eb = 0.0 if b == math.inf else math.exp(-b)
    return abs(ea - eb)


# ---------------------------------------------------------------------------
# middle-thirds geometry, exact


def _gap_of(t: Fraction):
    """The removed interval containing t, as (left, right, level), or None.

    Ternary digits are expanded exactly; a first digit 1 with a nonzero
    remainder places t strictly inside a level-j gap.  Points with no digit 1
    within TERNARY_DEPTH digits are treated as set members.
    """
    if t <= 0 or t >= 1:
        return None
    r = t
    prefix = Fraction(0)
    scale = Fraction(1)
    for j in range(1, TERNARY_DEPTH + 1):
        r = r * 3
        d = int(r)
        r = r - d
        scale = scale / 3
        if d == 1:
            if r == 0:
                return None  # left gap endpoint, a set member
            return (prefix + scale, prefix + 2 * scale, j)
        prefix += d * scale
    return None


def dist_to_thirds_set(t: float) -> Fraction:
    """Exact distance from t to the middle-thirds set, for t in [0, 1]."""
    ft = Fraction(t)
    if ft <= 0:
        return -ft
    if ft >= 1:
        return ft - 1
    gap = _gap_of(ft)
    if gap is None:
        return Fraction(0)
    a, b, _ = gap
    return min(ft - a, b - ft)


@register_formula
class SqrtDistance(Formula):
    """x(t) = sqrt(2 * distance(t, middle-thirds set)) on [0, 1]."""

    formula_id = "cantor_sqrt"
    piecewise_linear = False

    def __init__(self, knot_depth: int = 10):
        self.knot_depth = int(knot_depth)

    def values(self, t, horizon):
        tt = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.array([math.sqrt(2.0 * float(dist_to_thirds_set(float(x)))) for x in tt])
        return out if np.asarray(t).ndim else out

    def knots(self, horizon):
        pts = [0.0, 1.0]
        for i in range(1, self.knot_depth + 1):
            for a, b in gap_intervals(i):
                fa, fb = float(a), float(b)
                pts.extend((fa, 0.5 * (fa + fb), fb))
        return np.unique(np.array(pts))

    def params(self):
        return {"knot_depth": self.knot_depth}


def cantor_path(knot_depth: int = 10) -> AnalyticPath:
    return AnalyticPath(SqrtDistance(knot_depth), 1.0)


def gap_intervals(level: int) -> list[tuple[Fraction, Fraction]]:
    """The 2^(level-1) removed intervals of the given level, exactly."""
    if level < 1:
        raise DomainError("level must be at least 1")
    out = []
    third = Fraction(1, 3 ** level)
    for digits in itertools.product((0, 2), repeat=level - 1):
        prefix = Fraction(0)
        for j, d in enumerate(digits, start=1):
            prefix += Fraction(d, 3 ** j)
        out.append((prefix + third, prefix + 2 * third))
    return out


def cantor_function(t: float) -> float:
    """The continuous increasing staircase fixed by averaging on removed intervals."""
    ft = Fraction(t)
    if ft <= 0:
        return 0.0
    if ft >= 1:
        return 1.0
    r = ft
    out = Fraction(0)
    half = Fraction(1, 2)
    scale = half
    for _ in range(TERNARY_DEPTH):
        r = r * 3
        d = int(r)
        r = r - d
        if d == 1:
            out += scale
            break
        out += (d // 2) * scale
        scale = scale / 2
        if r == 0:
            break
    return float(out)


# ---------------------------------------------------------------------------
# staged partitions of the removed intervals


@dataclass(frozen=True)
class CantorSchedule:
    """Subdivision counts m(i, n) for a level-i removed interval at stage n."""

    preset: str = "paper"

    def m(self, i: int, n: int) -> int:
        if self.preset == "paper":
            return 2 ** (n * i)
        if self.preset == "unit":
            return 1
        raise DomainError(f"unknown schedule preset {self.preset!r}")

    def to_json(self):
        return {"preset": self.preset}

    @staticmethod
    def from_json(d):
        return CantorSchedule(d.get("preset", "paper"))


def interval_hit_walk(m: int) -> list[int]:
    """Level indices visited by the equal-value-spacing rule within one gap.

    The path rises monotonically from 0 to the gap maximum and falls back, so
    the successive new-level hits step one level at a time: up 0..m, down to 0.
    """
    return list(range(m + 1)) + list(range(m - 1, -1, -1))


def cantor_interval_qv(i: int, m: int, enumerate_cap: int = 8192) -> Fraction:
    """Exact squared-increment sum of one level-i gap subdivided into m levels.

    Enumerated step by step when small; the verified closed form 2 m g^2
    (with g^2 = 3^-i / m^2) otherwise.
    """
    g2 = Fraction(1, 3 ** i * m * m)
    if 2 * m <= enumerate_cap:
        walk = interval_hit_walk(m)
        total = Fraction(0)
        for a, b in zip(walk[:-1], walk[1:]):
            total += (b - a) * (b - a) * g2
        return total
    return 2 * m * g2


def cantor_stage_qv(n: int, schedule: CantorSchedule | None = None) -> Fraction:
    """Exact stage-n total: sum over levels i <= n of all per-gap sums."""
    schedule = schedule or CantorSchedule()
    total = Fraction(0)
    for i in range(1, n + 1):
        total += 2 ** (i - 1) * cantor_interval_qv(i, schedule.m(i, n))
    return total


def geometric_stage_sum(n: int) -> Fraction:
    """sum_{i=1..n} eps^i with eps = 2 / (3 * 2^n)."""
    eps = Fraction(2, 3 * 2 ** n)
    return sum((eps ** i for i in range(1, n + 1)), Fraction(0))


def cantor_local_time_value(u: float, n: int, schedule: CantorSchedule | None = None) -> float:
    """L_1(u) along the stage-n partition, from the per-gap straddle geometry.

    Each level-i gap whose maximum exceeds u contributes exactly 2 g_i: one
    rising cell ending one level above u and one falling cell ending one level
    below, distances summing to the level spacing g_i.
    """
    schedule = schedule or CantorSchedule()
    if u < 0:
        return 0.0
    total = 0.0
    for i in range(1, n + 1):
        sup = 3.0 ** (-i / 2.0)
        if sup <= u:
            continue
        g = sup / schedule.m(i, n)
        total += 2 ** (i - 1) * 2.0 * g
    return total


def cantor_partition(n: int, schedule: CantorSchedule | None = None,
                     max_points: int = 2_000_000) -> Partition:
    """Materialized stage-n partition: {0,1} plus every subdivided gap."""
    schedule = schedule or CantorSchedule()
    count = 2
    for i in range(1, n + 1):
        count += 2 ** (i - 1) * (2 * schedule.m(i, n) + 1)
    if count > max_points:
        raise DomainError(
            f"stage {n} needs {count} points; raise max_points or use the exact"
            " per-interval forms")
    pts = [0.0, 1.0]
    for i in range(1, n + 1):
        m = schedule.m(i, n)
        base = Fraction(1, 3 ** i)
        for a, b in gap_intervals(i):
            # hit times: a + (r g)^2 / 2 rising, b - (r g)^2 / 2 falling
            for r in range(0, m + 1):
                pts.append(float(a + base * r * r / (2 * m * m)))
            for r in range(m - 1, -1, -1):
                pts.append(float(b - base * r * r / (2 * m * m)))
    return Partition(np.unique(np.array(pts)))


def cantor_oscillation_formula(n: int) -> float:
    """Value-space mesh of the stage-n partition: the deepest untouched gap peak."""
    return 3.0 ** (-(n + 1) / 2.0)


# ---------------------------------------------------------------------------
# blow-up partitions


def max_square_variation(vals: np.ndarray) -> tuple[float, np.ndarray]:
    """Maximum of sum (v_{a_{k+1}} - v_{a_k})^2 over subsequences, with argmax.

    Dyadic-backbone dynamic program: block records of the largest deviation
    allow most predecessors to be skipped, so the scan is near linear on
    oscillating sequences.
    """
    v = np.asarray(vals, dtype=float)
    n = len(v)
    if n < 2:
        return 0.0, np.arange(n)
    s = n - 1
    N = s.bit_length()
    ind = np.zeros(s, dtype=float)

    def ind_n(j, nn):
        return (s >> nn) + (j >> nn)

    def ind_k(j, nn):
        return min(((j >> nn) << nn) + (1 << (nn - 1)), s)

    best = 0.0
    run = np.zeros(n, dtype=float)
    links = np.zeros(n, dtype=np.int64)
    for j in range(1, n + 1):
        jj = j - 1
        for nn in range(1, N + 1):
            if not (jj >> nn == s >> nn and (s >> (nn - 1)) % 2 == 0):
                pos = ind_n(jj, nn)
                d = abs(v[ind_k(jj, nn)] - v[jj])
                if d > ind[pos]:
                    ind[pos] = d
        if jj == 0:
            continue
        m = jj - 1
        delta = 0.0
        delta_m = jj
        nn = 0
        while True:
            while nn > 0 and m >> nn == s >> nn and (s >> (nn - 1)) % 2 == 0:
                nn -= 1
            skip = False
            if nn > 0:
                iid = ind[ind_n(m, nn)] + abs(v[ind_k(m, nn)] - v[jj])
                if delta >= iid:
                    skip = True
                elif m < delta_m:
                    delta = math.sqrt(max(best - run[m], 0.0))
                    delta_m = m
                    if delta >= iid:
                        skip = True
            if skip:
                k = (m >> nn) << nn
                if k > 0:
                    m = k - 1
                    while nn < N and (k >> nn) % 2 == 0:
                        nn += 1
                else:
                    break
            else:
                if nn > 1:
                    nn -= 1
                else:
                    d = abs(v[m] - v[jj])
                    if d >= delta:
                        cand = run[m] + d * d
                        if cand >= best:
                            best = cand
                            links[jj] = m
                    if m > 0:
                        while nn < N and (m >> nn) % 2 == 0:
                            nn += 1
                        m -= 1
                    else:
                        break
        run[jj] = best
    chain = [n - 1]
    while chain[-1] != 0:
        chain.append(int(links[chain[-1]]))
    return float(best), np.asarray(chain[::-1], dtype=np.int64)


def _extrema_indices(vals: np.ndarray) -> np.ndarray:
    """Endpoints plus every direction change of the sampled sequence."""
    if len(vals) < 3:
        return np.arange(len(vals))
    dv = np.diff(vals)
    sgn = np.sign(dv)
    # carry the previous direction through flat steps
    for i in range(1, len(sgn)):
        if sgn[i] == 0:
            sgn[i] = sgn[i - 1]
    turn = np.nonzero(sgn[1:] * sgn[:-1] < 0)[0] + 1
    return np.unique(np.concatenate([[0], turn, [len(vals) - 1]]))


def _psi(x: np.ndarray) -> np.ndarray:
    """h^2 / (2 log log (1/h)) on (0, 1/e); conservative clip elsewhere."""
    x = np.abs(x)
    inner = np.where(x < 0.3, np.log(np.maximum(np.log(1.0 / np.maximum(x, 1e-300)), 1.0)),
                     1.0)
    return x * x / (2.0 * np.maximum(inner, 0.5))


def _psi_greedy_indices(times: np.ndarray, vals: np.ndarray, eps: float = 0.1) -> np.ndarray:
    """Disjoint intervals [t, t+h] with psi(|increment|) >= (1-eps) h, large h first."""
    n = len(vals)
    cands = []
    step = 1
    while step < n:
        d = vals[step:] - vals[:-step]
        h = times[step:] - times[:-step]
        ok = np.nonzero(_psi(d) >= (1.0 - eps) * h)[0]
        for i in ok:
            cands.append((h[i], int(i), int(i + step)))
        step *= 2
    cands.sort(key=lambda c: -c[0])
    taken = []
    covered = np.zeros(n, dtype=bool)
    for _, a, b in cands:
        if not covered[a:b + 1].any():
            covered[a:b + 1] = True
            taken.extend((a, b))
    return np.unique(np.asarray(taken + [0, n - 1], dtype=np.int64))


@dataclass(frozen=True)
class BlowupResult:
    partition: Partition
    achieved: float
    status: str
    depth_used: int
    strategy: str

    @property
    def saturated(self) -> bool:
        return self.status == "saturated"


def _cell_qv(vals: np.ndarray) -> float:
    d = np.diff(vals)
    return math.fsum(d * d)


def blowup_partition(path: Path, interval: tuple[float, float], target: float,
                     budget_depth: int = 22, keep: Partition | None = None,
                     dp_cap: int = 150_000) -> BlowupResult:
    """Best-effort partition of the interval maximizing the squared-increment sum.

    Strategies: every local extremum of the sampled walk; the iterated-log
    greedy over disjoint dyadic intervals; and, within the dp_cap, the exact
    maximum over subsequences of the extrema skeleton.  Resolution deepens
    until the target is met or the depth budget is exhausted; the achieved
    value is reported honestly either way.
    """
    c, d = float(interval[0]), float(interval[1])
    if d <= c:
        raise DomainError("empty interval")
    keep_times = keep.times[(keep.times >= c) & (keep.times <= d)] if keep is not None \
        else np.array([])

    def finish(times, depth, strategy):
        all_t = np.unique(np.concatenate([[c, d], times, keep_times]))
        pi = Partition(all_t)
        achieved = _cell_qv(path.eval_many(pi.times))
        status = "achieved" if achieved >= target else "saturated"
        return BlowupResult(pi, achieved, status, depth, strategy)

    if not isinstance(path, BridgePath):
        times, vals = path.skeleton(c, d)
        ex = _extrema_indices(vals)
        got, chain = max_square_variation(vals[ex])
        return finish(times[ex[chain]], 0, "extrema-dp")

    best = None
    start = min(max(path.base_depth, 12), budget_depth)
    for depth in range(start, budget_depth + 1, 2):
        keys, vals = path.grid(c, d, depth)
        times = keys.astype(float) / float(1 << 48) * path.horizon
        ex = _extrema_indices(vals)
        evals = vals[ex]
        etimes = times[ex]
        candidates = [(etimes, "extrema")]
        if len(evals) <= dp_cap:
            got, chain = max_square_variation(evals)
            candidates.append((etimes[chain], "extrema-dp"))
        gi = _psi_greedy_indices(times, vals)
        candidates.append((times[gi], "psi-greedy"))
        for cand_times, name in candidates:
            res = finish(cand_times, depth, name)
            if best is None or res.achieved > best.achieved:
                best = res
        if best.achieved >= target:
            break
    return best


# ---------------------------------------------------------------------------
# target schedules and staged targeting


@dataclass(frozen=True)
class TargetSchedule:
    """Increasing target a(t) on [0, horizon]: monotone samples plus jumps."""

    times: np.ndarray
    values: np.ndarray
    jump_times: np.ndarray = field(default_factory=lambda: np.empty(0))
    jump_sizes: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        ts = np.asarray(self.times, dtype=float)
        vs = np.asarray(self.values, dtype=float)
        jt = np.asarray(self.jump_times, dtype=float)
        js = np.asarray(self.jump_sizes, dtype=float)
        if len(ts) != len(vs) or len(ts) < 2:
            raise DomainError("need matching times/values, at least two samples")
        if ts[0] != 0.0 or vs[0] != 0.0:
            raise DomainError("target must start at a(0) = 0")
        if np.any(np.diff(ts) <= 0) or np.any(np.diff(vs) < 0) or np.any(js < 0):
            raise DomainError("target must be non-decreasing")
        for name, val in (("times", ts), ("values", vs),
                          ("jump_times", jt), ("jump_sizes", js)):
            object.__setattr__(self, name, val)

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        tt = np.atleast_1d(t)
        base = np.interp(tt, self.times, self.values)
        for jt, js in zip(self.jump_times, self.jump_sizes):
            base = base + np.where(tt >= jt, js, 0.0)
        return float(base[0]) if scalar else base

    def jumps_above(self, threshold: float) -> np.ndarray:
        return self.jump_times[self.jump_sizes > threshold]

    @staticmethod
    def zero(horizon: float = 1.0) -> "TargetSchedule":
        return TargetSchedule(np.array([0.0, horizon]), np.array([0.0, 0.0]))

    @staticmethod
    def linear_rate(rate: float, horizon: float = 1.0) -> "TargetSchedule":
        return TargetSchedule(np.array([0.0, horizon]), np.array([0.0, rate * horizon]))

    def to_json(self):
        return {
            "times": self.times.tolist(),
            "values": self.values.tolist(),
            "jump_times": self.jump_times.tolist(),
            "jump_sizes": self.jump_sizes.tolist(),
        }

    @staticmethod
    def from_json(d):
        return TargetSchedule(np.asarray(d["times"], dtype=float),
                              np.asarray(d["values"], dtype=float),
                              np.asarray(d.get("jump_times", []), dtype=float),
                              np.asarray(d.get("jump_sizes", []), dtype=float))


@dataclass(frozen=True)
class CellReport:
    cell: tuple[float, float]
    target_increment: float
    window: int | None
    blown_qv: float
    divisor: int
    achieved_increment: float
    d_error: float
    status: str
    strategy: str

    def to_json(self):
        return {
            "cell": list(self.cell),
            "target_increment": self.target_increment,
            "window": self.window,
            "blown_qv": self.blown_qv,
            "divisor": self.divisor,
            "achieved_increment": self.achieved_increment,
            "d_error": self.d_error,
            "status": self.status,
            "strategy": self.strategy,
        }


@dataclass(frozen=True)
class TargetResult:
    partition: Partition
    anchors: Partition
    cells: list
    sup_anchor_error: float
    status: str
    stage: int

    def to_json(self):
        return {
            "stage": self.stage,
            "status": self.status,
            "sup_anchor_error": self.sup_anchor_error,
            "anchors": self.anchors.to_json(),
            "cells": [c.to_json() for c in self.cells],
        }


def _window_index(delta: float, n: int) -> int | None:
    """Integer window [i, i+1] containing delta * 2^n; boundary ties resolve down."""
    if delta == math.inf:
        return None
    scaled = delta * 2.0 ** n
    i = int(math.ceil(scaled)) - 1
    return max(i, 0)


def _best_divisor(q: float, target: float) -> int:
    if target <= 0.0:
        return 0  # sentinel, caller handles the zero target
    if q <= target:
        return 1
    k0 = max(1, int(math.floor(q / target)))
    cands = {k0, k0 + 1, 1}
    return min(cands, key=lambda k: qv_metric(q / k, target))


def target_qv_partitions(path: Path, schedule: TargetSchedule, n: int,
                         base: Partition | None = None, budget_depth: int = 22,
                         tol: float = 1e-3) -> TargetResult:
    """Stage-n refinement steering the squared-increment sum toward the target.

    The anchor grid is base + dyadics of order n + the schedule's jump times
    above 1/n.  Each anchor cell is blown up and then divided by the integer
    k that lands its increment closest to the target increment in the metric
    d; a divided cell's sum drops by exactly k, so landing error is pure
    divisor granularity.  Cells whose target window is unreachable within the
    depth budget report saturated status with the best value attained.
    """
    horizon = path.horizon
    base = base if base is not None else Partition(np.array([0.0, horizon]))
    anchors = merge(merge(base, dyadic_partition(n, horizon)),
                    Partition(np.unique(np.concatenate(
                        [[0.0, horizon], schedule.jumps_above(1.0 / n)]))))
    cell_parts = [anchors.times]
    reports = []
    accuracy = 2.0 ** -n
    per_cell_budget = accuracy / max(len(anchors) - 1, 1)
    for c, d in anchors.cells():
        c, d = float(c), float(d)
        delta = float(schedule(d) - schedule(c)) if schedule(d) != math.inf else (
            math.inf if schedule(c) != math.inf else 0.0)
        window = _window_index(delta, n)
        existing = restrict(base, c, d)
        if delta == 0.0:
            # divide the natural cell sum far below the per-cell budget
            q0 = qv_increment(path, existing, c, d)
            if q0 == 0.0:
                reports.append(CellReport((c, d), delta, window, q0, 1, 0.0, 0.0,
                                          "achieved", "passthrough"))
                continue
            k = max(1, int(math.ceil(q0 / (per_cell_budget / 8.0))))
            pi_cell = freedman_scale(path, existing, k)
            got = qv_increment(path, pi_cell, c, d)
            reports.append(CellReport((c, d), delta, window, q0, k, got,
                                      qv_metric(got, 0.0), "achieved", "divide"))
            cell_parts.append(pi_cell.times)
            continue
        need = delta + (delta * delta / per_cell_budget if delta < math.inf else 0.0)
        blow = blowup_partition(path, (c, d), need, budget_depth, keep=existing)
        q = blow.achieved
        if delta == math.inf:
            err = qv_metric(q, math.inf)
            status = "achieved" if err <= accuracy + tol else "saturated"
            reports.append(CellReport((c, d), delta, window, q, 1, q, err,
                                      status, blow.strategy))
            cell_parts.append(blow.partition.times)
            continue
        k = _best_divisor(q, delta)
        pi_cell = freedman_scale(path, blow.partition, k) if k > 1 else blow.partition
        got = qv_increment(path, pi_cell, c, d)
        err = qv_metric(got, delta)
        status = "achieved" if err <= max(per_cell_budget, accuracy * 0.5) + tol \
            else "saturated"
        reports.append(CellReport((c, d), delta, window, q, k, got, err, status,
                                  blow.strategy))
        cell_parts.append(pi_cell.times)
    result = Partition(np.unique(np.concatenate(cell_parts)))
    anchor_err = 0.0
    for t in anchors.times:
        anchor_err = max(anchor_err,
                         qv_metric(qv(path, result, float(t)), float(schedule(t))))
    status = "achieved" if anchor_err <= accuracy + tol else "saturated"
    return TargetResult(result, anchors, reports, anchor_err, status, n)
