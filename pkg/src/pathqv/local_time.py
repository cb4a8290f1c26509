"""Discrete local time profiles, crossing decompositions and crossing counts.

The profile L(u) along a partition is twice the sum, over cells whose value
bracket straddles u, of the distance from the cell's terminal value to u.  It
is assembled exactly as a piecewise-linear function of u with jumps: cadlag,
nonnegative, compactly supported, and with total integral equal to the
squared-increment sum of the same cells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .partitions import Partition, ValueGrid, level_crossings
from .paths import Path
from .piecewise import CurvatureMeasure, PiecewisePoly, poly_antideriv, poly_eval, poly_shift

_MERGE_TOL = 1e-14


@dataclass(frozen=True)
class LocalTimeProfile:
    """Piecewise-linear-with-jumps function of the level u.

    values[j] is the cadlag value at breakpoints[j]; slopes[j] rules the
    segment [breakpoints[j], breakpoints[j+1]).  The function vanishes outside
    [breakpoints[0], breakpoints[-1]].
    """

    breakpoints: np.ndarray
    values: np.ndarray
    slopes: np.ndarray

    def __post_init__(self):
        bk = np.asarray(self.breakpoints, dtype=float)
        v = np.asarray(self.values, dtype=float)
        s = np.asarray(self.slopes, dtype=float)
        if len(bk) != len(v) or len(s) != max(len(bk) - 1, 0):
            raise DomainError("inconsistent profile arrays")
        object.__setattr__(self, "breakpoints", bk)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "slopes", s)

    @staticmethod
    def zero() -> "LocalTimeProfile":
        return LocalTimeProfile(np.array([0.0]), np.array([0.0]), np.empty(0))

    @property
    def support(self) -> tuple[float, float]:
        if len(self.breakpoints) < 2:
            return (0.0, 0.0)
        return float(self.breakpoints[0]), float(self.breakpoints[-1])

    def left_limits(self) -> np.ndarray:
        """Limit from the left at each breakpoint (0 at the first)."""
        if len(self.breakpoints) < 2:
            return np.zeros(len(self.breakpoints))
        inner = self.values[:-1] + self.slopes * np.diff(self.breakpoints)
        return np.concatenate([[0.0], inner])

    def value(self, u):
        u = np.asarray(u, dtype=float)
        uu = np.atleast_1d(u)
        out = np.zeros(len(uu))
        if len(self.breakpoints) >= 2:
            j = np.searchsorted(self.breakpoints, uu, side="right") - 1
            inside = (j >= 0) & (j < len(self.slopes))
            jj = j[inside]
            out[inside] = self.values[jj] + self.slopes[jj] * (uu[inside] - self.breakpoints[jj])
            exact_end = uu == self.breakpoints[-1]
            out[exact_end] = self.values[-1]
        return out if u.ndim else float(out[0])

    def integral(self) -> float:
        if len(self.breakpoints) < 2:
            return 0.0
        dx = np.diff(self.breakpoints)
        right = self.values[:-1] + self.slopes * dx
        return math.fsum(0.5 * (self.values[:-1] + right) * dx)

    def lp_norm(self, p) -> float:
        """Exact L^p(du) norm; p may be math.inf."""
        if len(self.breakpoints) < 2:
            return 0.0
        if p == math.inf:
            return float(max(self.values.max(initial=0.0),
                             self.left_limits().max(initial=0.0)))
        if p < 1:
            raise DomainError("p must be at least 1")
        dx = np.diff(self.breakpoints)
        a = self.values[:-1]
        b = a + self.slopes * dx
        with np.errstate(divide="ignore", invalid="ignore"):
            flat = np.abs(self.slopes) < 1e-300
            pw = np.where(
                flat,
                np.abs(a) ** p * dx,
                (np.abs(b) ** (p + 1) - np.abs(a) ** (p + 1))
                / ((p + 1) * np.where(flat, 1.0, self.slopes)),
            )
        return float(math.fsum(pw) ** (1.0 / p))

    def canonical(self) -> "LocalTimeProfile":
        """Merge collinear segments and trim zero tails for structural equality."""
        if len(self.breakpoints) < 2:
            return self
        bk, v, s = self.breakpoints, self.values, self.slopes
        ll = self.left_limits()
        keep = np.ones(len(bk), dtype=bool)
        for j in range(1, len(bk) - 1):
            cont = abs(ll[j] - v[j]) <= _MERGE_TOL * (1 + abs(v[j]))
            same = abs(s[j] - s[j - 1]) <= _MERGE_TOL * (1 + abs(s[j]))
            if cont and same:
                keep[j] = False
        bk2 = bk[keep]
        v2 = v[keep]
        idx = np.nonzero(keep)[0][:-1]
        s2 = s[idx] if len(bk2) > 1 else np.empty(0)
        # trim leading/trailing identically-zero segments
        while len(bk2) > 2 and v2[0] == 0.0 and s2[0] == 0.0:
            bk2, v2, s2 = bk2[1:], v2[1:], s2[1:]
        while len(bk2) > 2 and v2[-2] + s2[-1] * (bk2[-1] - bk2[-2]) == 0.0 and \
                v2[-2] == 0.0 and s2[-1] == 0.0:
            bk2, v2, s2 = bk2[:-1], v2[:-1], s2[:-1]
        return LocalTimeProfile(bk2, v2, s2)

    def sup_distance(self, other: "LocalTimeProfile") -> float:
        pts = np.unique(np.concatenate([self.breakpoints, other.breakpoints]))
        if len(pts) == 0:
            return 0.0
        d1 = np.max(np.abs(self.value(pts) - other.value(pts)), initial=0.0)
        mids = 0.5 * (pts[:-1] + pts[1:])
        d2 = np.max(np.abs(self.value(mids) - other.value(mids)), initial=0.0) if len(mids) else 0.0
        return float(max(d1, d2, self._left_gap(other, pts)))

    def _left_gap(self, other, pts):
        eps = 1e-12
        probe = pts - eps * np.maximum(1.0, np.abs(pts))
        return float(np.max(np.abs(self.value(probe) - other.value(probe)), initial=0.0))

    def to_rows(self):
        ll = self.left_limits()
        rows = []
        for j, u in enumerate(self.breakpoints):
            slope = float(self.slopes[j]) if j < len(self.slopes) else 0.0
            rows.append((float(u), float(ll[j]), float(self.values[j]), slope))
        return rows

    def to_json(self):
        return {
            "breakpoints": self.breakpoints.tolist(),
            "values": self.values.tolist(),
            "slopes": self.slopes.tolist(),
        }

    @staticmethod
    def from_json(d):
        return LocalTimeProfile(np.asarray(d["breakpoints"], dtype=float),
                                np.asarray(d["values"], dtype=float),
                                np.asarray(d["slopes"], dtype=float))


def profile_from_cells(left_vals: np.ndarray, right_vals: np.ndarray) -> LocalTimeProfile:
    """Assemble the tent sum 2*sum 1_{[[a,b]]}(u) |b - u| exactly.

    An up cell contributes the affine piece 2(b - u) on [a, b); a down cell
    contributes 2(u - b) on [b, a).  Offsets and slopes accumulate through
    difference arrays over the merged breakpoint grid.
    """
    a = np.asarray(left_vals, dtype=float)
    b = np.asarray(right_vals, dtype=float)
    act = a != b
    a, b = a[act], b[act]
    if len(a) == 0:
        return LocalTimeProfile.zero()
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    up = b > a
    slope = np.where(up, -2.0, 2.0)
    offset = np.where(up, 2.0 * b, -2.0 * b)
    bk = np.unique(np.concatenate([lo, hi]))
    i_lo = np.searchsorted(bk, lo)
    i_hi = np.searchsorted(bk, hi)
    n = len(bk)
    s_diff = np.zeros(n + 1)
    c_diff = np.zeros(n + 1)
    np.add.at(s_diff, i_lo, slope)
    np.add.at(s_diff, i_hi, -slope)
    np.add.at(c_diff, i_lo, offset)
    np.add.at(c_diff, i_hi, -offset)
    S = np.cumsum(s_diff)[: n - 1]
    C = np.cumsum(c_diff)[: n - 1]
    values = np.concatenate([C + S * bk[:-1], [0.0]])
    return LocalTimeProfile(bk, values, S)


def _cell_values(path: Path, pi: Partition, t: float):
    times = np.minimum(pi.times, min(t, path.horizon))
    vals = path.eval_many(times)
    return vals[:-1], vals[1:]


def discrete_local_time(path: Path, pi: Partition, t: float) -> LocalTimeProfile:
    """The profile u -> L_t(u) along pi, clamped at t, in canonical form."""
    a, b = _cell_values(path, pi, t)
    return profile_from_cells(a, b).canonical()


def local_time_value(path: Path, pi: Partition, t: float, u: float) -> float:
    """L_t(u) without building the whole profile."""
    a, b = _cell_values(path, pi, t)
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    inside = (lo <= u) & (u < hi)
    return 2.0 * math.fsum(np.abs(b[inside] - u))


def local_time_curve(path: Path, pi: Partition, u: float, ts) -> np.ndarray:
    """L_s(u) for many times s in one pass (completed cells plus boundary)."""
    ts = np.asarray(ts, dtype=float)
    times = np.minimum(pi.times, path.horizon)
    vals = path.eval_many(times)
    a, b = vals[:-1], vals[1:]
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    contrib = np.where((lo <= u) & (u < hi), 2.0 * np.abs(b - u), 0.0)
    cum = np.concatenate([[0.0], np.cumsum(contrib)])
    j = np.clip(np.searchsorted(times, ts, side="right") - 1, 0, len(times) - 1)
    out = cum[j].astype(float)
    inside = (j < len(times) - 1) & (ts > times[j])
    if inside.any():
        xt = path.eval_many(np.minimum(ts[inside], path.horizon))
        aj = vals[j[inside]]
        lo_b = np.minimum(aj, xt)
        hi_b = np.maximum(aj, xt)
        bnd = np.where((lo_b <= u) & (u < hi_b), 2.0 * np.abs(xt - u), 0.0)
        out[inside] += bnd
    out[ts < times[0]] = 0.0
    return out


# ---------------------------------------------------------------------------
# crossings


@dataclass(frozen=True)
class CrossingRecord:
    up_indices: np.ndarray
    down_indices: np.ndarray
    boundary: float
    level: float

    def reconstruct(self, terminal_up: np.ndarray, terminal_down: np.ndarray) -> float:
        upsum = math.fsum(terminal_up - self.level)
        downsum = math.fsum(self.level - terminal_down)
        return 2.0 * (upsum + downsum + self.boundary)


def crossing_decomposition(path: Path, pi: Partition, t: float, u: float):
    """Completed up/down cell index sets at level u plus the boundary term.

    Returns (record, reconstructed value); the reconstruction equals
    local_time_value(path, pi, t, u) exactly.
    """
    t = min(t, path.horizon)
    times = pi.times
    vals = path.eval_many(np.minimum(times, t))
    completed = times[1:] <= t
    a, b = vals[:-1], vals[1:]
    up = completed & (a <= u) & (u < b)
    down = completed & (b <= u) & (u < a)
    jmask = times <= t
    t_j = float(times[jmask][-1]) if jmask.any() else float(times[0])
    x_tj = vals[jmask][-1] if jmask.any() else vals[0]
    x_t = float(path.eval(min(t, path.horizon)))
    lo, hi = min(x_tj, x_t), max(x_tj, x_t)
    boundary = abs(x_t - u) if (lo <= u < hi) else 0.0
    rec = CrossingRecord(np.nonzero(up)[0], np.nonzero(down)[0], boundary, u)
    value = rec.reconstruct(b[up], b[down])
    return rec, value


@dataclass(frozen=True)
class CrossingCounts:
    upcrossings: int
    downcrossings: int
    up_times: np.ndarray
    down_times: np.ndarray


def crossing_counts(path: Path, u: float, eps: float, t: float,
                    tol: float | None = None) -> CrossingCounts:
    """Completed crossings of the band [u, u+eps] before t, with their stop times.

    An upcrossing completes when the path reaches u+eps after having visited u;
    a downcrossing completes when it reaches u after having visited u+eps.
    """
    if eps <= 0:
        raise DomainError("eps must be positive")
    t = min(t, path.horizon)
    times, vals = path.skeleton(0.0, t)
    ct, lvl = level_crossings(times, vals, ValueGrid.explicit([u, u + eps]))
    keep = ct <= t
    ct, lvl = ct[keep], lvl[keep]
    up_times, down_times = [], []
    seen_low = False
    seen_high = False
    for time, which in zip(ct, lvl):
        if which == 0:
            if seen_high:
                down_times.append(time)
                seen_high = False
            seen_low = True
        else:
            if seen_low:
                up_times.append(time)
                seen_low = False
            seen_high = True
    return CrossingCounts(len(up_times), len(down_times),
                          np.asarray(up_times), np.asarray(down_times))


def levy_downcross_estimate(path: Path, u: float, eps: float, t: float) -> float:
    """eps times the completed downcrossing count of [u, u+eps] before t."""
    return eps * crossing_counts(path, u, eps, t).downcrossings


def downcross_bound_gap(path: Path, eps: float, t: float) -> tuple[float, float]:
    """(|L_t(0)/2 - eps * D|, 2 eps) for the spacing-eps partition anchored at 0.

    L is computed from construction-exact hit values so the bound is a pathwise
    identity of the realization, not a float coincidence.
    """
    from .partitions import lebesgue_hit_values

    _, vs = lebesgue_hit_values(path, ValueGrid.uniform(eps), horizon=t)
    a, b = vs[:-1], vs[1:]
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    inside = (lo <= 0.0) & (0.0 < hi)
    l_half = math.fsum(np.abs(b[inside]))
    est = levy_downcross_estimate(path, 0.0, eps, t)
    return abs(l_half - est), 2.0 * eps


def lp_norm(profile: LocalTimeProfile, p) -> float:
    return profile.lp_norm(p)


def pair_against(profile: LocalTimeProfile, measure: CurvatureMeasure) -> float:
    """Exact integral of the profile against atoms plus polynomial density.

    Atoms evaluate the cadlag (right) value of the profile, matching the
    half-open bracket convention of the tent construction.
    """
    total = []
    if len(measure.atom_locations):
        total.append(math.fsum(measure.atom_weights *
                               profile.value(measure.atom_locations)))
    if measure.density is not None and len(profile.breakpoints) >= 2:
        total.append(_density_pairing(profile, measure.density))
    return math.fsum(total)


def _density_pairing(profile: LocalTimeProfile, dens: PiecewisePoly) -> float:
    lo = max(profile.breakpoints[0], dens.lo)
    hi = min(profile.breakpoints[-1], dens.hi)
    if lo >= hi:
        return 0.0
    pts = np.unique(np.concatenate([
        profile.breakpoints[(profile.breakpoints >= lo) & (profile.breakpoints <= hi)],
        dens.breakpoints[(dens.breakpoints >= lo) & (dens.breakpoints <= hi)],
        [lo, hi],
    ]))
    pieces = []
    for x0, x1 in zip(pts[:-1], pts[1:]):
        j = np.searchsorted(profile.breakpoints, x0, side="right") - 1
        j = min(max(j, 0), len(profile.slopes) - 1)
        v0 = profile.values[j] + profile.slopes[j] * (x0 - profile.breakpoints[j])
        s = profile.slopes[j]
        k = np.searchsorted(dens.breakpoints, x0, side="right") - 1
        k = min(max(k, 0), len(dens.coeffs) - 1)
        c = dens.coeffs[k]
        h = x1 - x0
        off = x0 - dens.breakpoints[k]
        # integrate (v0 + s*xi) * p(off + xi) dxi over [0, h]
        pl = poly_shift(c, off)
        anti1 = poly_antideriv(pl)
        xpl = np.concatenate([[0.0], pl])  # xi * p(xi + off)
        anti2 = poly_antideriv(xpl)
        pieces.append(v0 * poly_eval(anti1, h) + s * poly_eval(anti2, h))
    return math.fsum(pieces)
