"""Partitions of a time interval and the operations that build them.

A partition is a strictly increasing finite sequence of times; conceptually
every index past the last repeats the right endpoint, so sums clamped at a
time t never look past t.  All operations are pure and return new objects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .paths import Path, default_hit_tol

# times closer than this fraction of the span are identified on construction
DUP_REL_TOL = 2.0 ** -52


@dataclass(frozen=True)
class Partition:
    times: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or len(t) < 1:
            raise DomainError("partition needs at least one time")
        d = np.diff(t)
        if np.any(d < 0):
            raise DomainError("partition times must be increasing")
        span = max(t[-1] - t[0], 1.0) if len(t) > 1 else 1.0
        keep = np.concatenate([[True], d > DUP_REL_TOL * span])
        t = t[keep]
        if np.any(np.diff(t) <= 0):
            raise DomainError("partition times must be strictly increasing")
        object.__setattr__(self, "times", t)
        self.times.setflags(write=False)

    @property
    def lo(self) -> float:
        return float(self.times[0])

    @property
    def hi(self) -> float:
        return float(self.times[-1])

    def __len__(self):
        return len(self.times)

    def __iter__(self):
        return iter(self.times)

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return len(self.times) == len(other.times) and bool(np.all(self.times == other.times))

    def __repr__(self):
        inner = ", ".join(f"{x:g}" for x in self.times[:6])
        if len(self.times) > 6:
            inner += f", ... ({len(self.times)} points)"
        return f"Partition([{inner}])"

    def cells(self):
        return zip(self.times[:-1], self.times[1:])

    def to_json(self) -> list:
        return [float(x) for x in self.times]

    @staticmethod
    def from_json(data) -> "Partition":
        return Partition(np.asarray(data, dtype=float))


def partition(*times) -> Partition:
    return Partition(np.asarray(times, dtype=float))


@dataclass(frozen=True)
class ValueGrid:
    """Level set hit by Lebesgue partitions: uniform (anchor + spacing) or explicit."""

    spacing: float | None = None
    anchor: float = 0.0
    levels: np.ndarray | None = None

    def __post_init__(self):
        if self.levels is not None:
            lv = np.unique(np.asarray(self.levels, dtype=float))
            object.__setattr__(self, "levels", lv)
        elif self.spacing is None or self.spacing <= 0:
            raise DomainError("uniform grid needs a positive spacing")

    @staticmethod
    def uniform(spacing: float, anchor: float = 0.0) -> "ValueGrid":
        return ValueGrid(spacing=spacing, anchor=anchor)

    @staticmethod
    def explicit(levels) -> "ValueGrid":
        return ValueGrid(spacing=None, levels=np.asarray(levels, dtype=float))


def dyadic_partition(n: int, horizon: float = 1.0) -> Partition:
    """Grid k*2^-n clipped to the horizon, closed at the right end."""
    if n < 0:
        raise DomainError("dyadic order must be nonnegative")
    step = 2.0 ** -n
    ts = np.arange(0, math.floor(horizon / step) + 1) * step
    if ts[-1] < horizon - DUP_REL_TOL * horizon:
        ts = np.concatenate([ts, [horizon]])
    else:
        ts[-1] = horizon
    return Partition(ts)


def merge(pi: Partition, rho: Partition) -> Partition:
    return Partition(np.union1d(pi.times, rho.times))


def restrict(pi: Partition, s: float, t: float) -> Partition:
    if s > t:
        raise DomainError("restrict needs s <= t")
    if s == t:
        return Partition(np.array([s]))
    inner = pi.times[(pi.times > s) & (pi.times < t)]
    return Partition(np.concatenate([[s], inner, [t]]))


# ---------------------------------------------------------------------------
# oscillation


def oscillation(path: Path, pi: Partition, t: float) -> float:
    """Largest swing of the path inside any single partition cell before t."""
    t = min(t, path.horizon)
    edges = pi.times[pi.times < t]
    edges = np.concatenate([edges, [t]])
    if edges[0] > pi.lo:
        edges = np.concatenate([[pi.lo], edges])
    if len(edges) < 2:
        return 0.0
    st, sv = path.skeleton(float(edges[0]), float(edges[-1]))
    ev = path.eval_many(edges)
    allt = np.concatenate([st, edges])
    allv = np.concatenate([sv, ev])
    order = np.argsort(allt, kind="stable")
    allt, allv = allt[order], allv[order]
    starts = np.searchsorted(allt, edges[:-1], side="left")
    ends = np.searchsorted(allt, edges[1:], side="right") - 1
    hi = np.maximum.reduceat(allv, starts)
    lo = np.minimum.reduceat(allv, starts)
    # reduceat segments stop before the next start; fold in the right edge sample
    hi = np.maximum(hi, allv[ends])
    lo = np.minimum(lo, allv[ends])
    return float(np.max(hi - lo))


# ---------------------------------------------------------------------------
# level-crossing enumeration on a piecewise-linear skeleton


def _grid_index(vals: np.ndarray, grid: ValueGrid):
    if grid.levels is None:
        return np.floor((vals - grid.anchor) / grid.spacing).astype(np.int64)
    return np.searchsorted(grid.levels, vals, side="right") - 1


def _level_value(idx, grid: ValueGrid):
    if grid.levels is None:
        return grid.anchor + np.asarray(idx, dtype=float) * grid.spacing
    return grid.levels[np.asarray(idx, dtype=np.int64)]


def level_crossings(times: np.ndarray, vals: np.ndarray, grid: ValueGrid):
    """All grid-level crossings of the piecewise-linear skeleton, in time order.

    Returns (crossing times, level indices).  Samples lying exactly on a level
    are reported as touch events.  Within one linear segment the crossings are
    produced in traversal order, so successive entries differ by one level
    except at repeated touches.
    """
    if len(times) < 2:
        return np.empty(0), np.empty(0, dtype=np.int64)
    k = _grid_index(vals, grid)
    valid = k >= 0 if grid.levels is not None else np.ones(len(k), dtype=bool)
    on_level = valid & (_level_value(np.maximum(k, 0), grid) == vals)
    on_level &= valid
    ka, kb = k[:-1], k[1:]
    up = kb - ka
    # an endpoint exactly on a level belongs to the band above it; a downward
    # segment leaving such a point must not re-count that level
    start_on = on_level[:-1]
    n_up = np.where(up > 0, up, 0)
    n_dn = np.where(up < 0, -up, 0) - np.where((up < 0) & start_on, 1, 0)
    n_dn = np.maximum(n_dn, 0)
    counts = n_up + n_dn
    total = int(counts.sum())
    seg = np.repeat(np.arange(len(counts)), counts)
    within = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
    rising = np.repeat(up > 0, counts)
    lvl = np.where(rising, ka[seg] + 1 + within, ka[seg] - np.where(start_on[seg], 1, 0) - within)
    lv = _level_value(lvl, grid)
    dv = vals[1:][seg] - vals[:-1][seg]
    frac = np.where(dv != 0.0, (lv - vals[:-1][seg]) / np.where(dv != 0.0, dv, 1.0), 0.0)
    ct = times[:-1][seg] + frac * (times[1:][seg] - times[:-1][seg])
    # touch events for samples exactly on a level
    tt = times[on_level]
    tl = k[on_level]
    allt = np.concatenate([ct, tt])
    alll = np.concatenate([lvl, tl])
    order = np.argsort(allt, kind="stable")
    return allt[order], alll[order]


def lebesgue_partition(path: Path, grid: ValueGrid, horizon: float | None = None,
                       tol: float | None = None) -> Partition:
    """Successive hitting times of new grid levels, closed at the horizon."""
    if horizon is None:
        horizon = path.horizon
    if tol is None:
        tol = default_hit_tol(horizon)
    times, vals = path.skeleton(0.0, horizon)
    ct, lvl = level_crossings(times, vals, grid)
    if len(ct):
        keep = np.concatenate([[True], lvl[1:] != lvl[:-1]])
        ct = path.fix_hit_times(ct[keep])
        ct = ct[(ct > 0.0) & (ct < horizon)]
    pts = np.concatenate([[0.0], ct, [horizon]])
    return Partition(pts)


def lebesgue_hit_values(path: Path, grid: ValueGrid, horizon: float | None = None):
    """(times, values) along the Lebesgue partition with construction-exact values.

    Interior values are the grid levels themselves rather than re-evaluations
    of the path, so statements about cells anchored exactly on grid levels
    (one-gap increments, the downcrossing bound at the anchor) hold without
    interpolation jitter.  Endpoint values come from the path.
    """
    if horizon is None:
        horizon = path.horizon
    times, vals = path.skeleton(0.0, horizon)
    ct, lvl = level_crossings(times, vals, grid)
    if len(ct):
        keep = np.concatenate([[True], lvl[1:] != lvl[:-1]])
        ct, lvl = ct[keep], lvl[keep]
        inner = (ct > 0.0) & (ct < horizon)
        ct, lvl = ct[inner], lvl[inner]
    hit_vals = _level_value(lvl, grid)
    ts = np.concatenate([[0.0], ct, [horizon]])
    vs = np.concatenate([[float(vals[0])], hit_vals, [float(vals[-1])]])
    return ts, vs


def first_hits_of_levels(path: Path, c: float, d: float, levels: np.ndarray) -> np.ndarray:
    """Earliest hit time in [c, d] for each level, on the current realization.

    Levels must all be attained between the endpoint values; hits are returned
    level by level (they are automatically increasing when the levels step
    monotonically from x(c) toward x(d)).
    """
    times, vals = path.skeleton(c, d)
    levels = np.asarray(levels, dtype=float)
    if len(levels) > 8:
        uniq = np.unique(levels)
        ct, lidx = level_crossings(times, vals, ValueGrid.explicit(uniq))
        first = np.full(len(uniq), np.nan)
        seen, pos = np.unique(lidx, return_index=True)
        first[seen] = ct[pos]
        hits = first[np.searchsorted(uniq, levels)]
        if np.any(np.isnan(hits)):
            raise DomainError("level not attained inside the cell")
        return path.fix_hit_times(hits)
    hits = np.empty(len(levels))
    for i, lv in enumerate(levels):
        h = _first_hit_on_skeleton(times, vals, lv)
        if h is None:
            raise DomainError("level not attained inside the cell")
        hits[i] = h
    return path.fix_hit_times(hits)


def _first_hit_on_skeleton(times, vals, level):
    d = vals - level
    if d[0] == 0.0:
        return float(times[0])
    cross = (d[:-1] * d[1:] <= 0.0) & (d[:-1] != 0.0)
    idx = np.nonzero(cross)[0]
    if len(idx) == 0:
        return None
    i = idx[0]
    if d[i + 1] == 0.0:
        return float(times[i + 1])
    return float(times[i] + d[i] / (d[i] - d[i + 1]) * (times[i + 1] - times[i]))


def freedman_scale(path: Path, pi: Partition, k: int, tol: float | None = None) -> Partition:
    """Refine pi so the squared-increment sum drops by exactly the factor k.

    Within each cell [c, d] with x(c) != x(d) the hitting times of the k-1
    equally spaced intermediate values are inserted; equal-endpoint cells pass
    through untouched.
    """
    if k < 1:
        raise DomainError("k must be a positive integer")
    if k == 1:
        return pi
    vals = path.eval_many(pi.times)
    new_times = [pi.times]
    for j in range(len(pi.times) - 1):
        vc, vd = vals[j], vals[j + 1]
        if vc == vd:
            continue
        levels = vc + (vd - vc) * np.arange(1, k) / k
        hits = first_hits_of_levels(path, float(pi.times[j]), float(pi.times[j + 1]), levels)
        new_times.append(hits)
    return Partition(np.unique(np.concatenate(new_times)))
