"""Continuous paths on [0, T]: closed-form test paths and seeded Brownian paths.

A path exposes ``eval`` / ``eval_many`` plus, on concrete kinds, interval
extremes, first hitting times and (for Brownian paths) on-demand dyadic
refinement.  Brownian paths are midpoint-bridge trees evaluated functionally:
the value at the dyadic node (k, m) is a pure function of (seed, k, m), so no
call order or refinement history can change a sample.  Between dyadic samples
at the current local depth the path is linear, which keeps hitting times and
extremes exactly computable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .errors import DomainError, UnsupportedOperation

MAX_DEPTH = 48
# hitting-time brackets stop here so that float key arithmetic stays well
# inside one dyadic cell and re-evaluation reproduces the solved hit value
MAX_HIT_DEPTH = 40
_UNIT = 1 << MAX_DEPTH

# value tolerance used by hitting-time searches when none is given
def default_hit_tol(horizon: float) -> float:
    return horizon * 2.0 ** -40


# ---------------------------------------------------------------------------
# analytic formulas


class Formula:
    """Closed-form path shape on [0, horizon]; subclasses register under an id."""

    formula_id: str = ""
    piecewise_linear = False

    def values(self, t: np.ndarray, horizon: float) -> np.ndarray:
        raise NotImplementedError

    def knots(self, horizon: float) -> np.ndarray:
        """Times where monotonicity may change (includes 0 and horizon)."""
        return np.array([0.0, horizon])

    def antiderivative(self, t: np.ndarray, horizon: float) -> np.ndarray:
        raise UnsupportedOperation(f"{self.formula_id} has no closed-form integral here")

    def params(self) -> dict:
        return {}


FORMULAS: dict[str, type] = {}


def register_formula(cls):
    FORMULAS[cls.formula_id] = cls
    return cls


def formula_from_spec(d: dict) -> Formula:
    kind = d["id"]
    if kind not in FORMULAS:
        raise DomainError(f"unknown formula id {kind!r}")
    return FORMULAS[kind](**d.get("params", {}))


@register_formula
class Constant(Formula):
    formula_id = "constant"
    piecewise_linear = True

    def __init__(self, value=0.0):
        self.value = float(value)

    def values(self, t, horizon):
        return np.full_like(np.asarray(t, dtype=float), self.value)

    def antiderivative(self, t, horizon):
        return self.value * np.asarray(t, dtype=float)

    def params(self):
        return {"value": self.value}


@register_formula
class Linear(Formula):
    formula_id = "linear"
    piecewise_linear = True

    def __init__(self, intercept=0.0, slope=1.0):
        self.intercept = float(intercept)
        self.slope = float(slope)

    def values(self, t, horizon):
        t = np.asarray(t, dtype=float)
        return self.intercept + self.slope * t

    def antiderivative(self, t, horizon):
        t = np.asarray(t, dtype=float)
        return self.intercept * t + 0.5 * self.slope * t * t

    def params(self):
        return {"intercept": self.intercept, "slope": self.slope}


@register_formula
class PiecewiseLinear(Formula):
    """Linear interpolation of (time, value) knots spanning [0, horizon]."""

    formula_id = "pwlinear"
    piecewise_linear = True

    def __init__(self, times, values):
        self.times = np.asarray(times, dtype=float)
        self.vals = np.asarray(values, dtype=float)
        if len(self.times) != len(self.vals) or len(self.times) < 2:
            raise DomainError("pwlinear needs matching times/values, at least two knots")
        if np.any(np.diff(self.times) <= 0):
            raise DomainError("pwlinear knot times must be strictly increasing")

    def values(self, t, horizon):
        return np.interp(np.asarray(t, dtype=float), self.times, self.vals)

    def knots(self, horizon):
        return self.times.copy()

    def antiderivative(self, t, horizon):
        t = np.asarray(t, dtype=float)
        seg_int = np.concatenate(
            [[0.0], np.cumsum(0.5 * (self.vals[1:] + self.vals[:-1]) * np.diff(self.times))]
        )
        idx = np.clip(np.searchsorted(self.times, t, side="right") - 1, 0, len(self.times) - 2)
        t0 = self.times[idx]
        v0 = self.vals[idx]
        slope = (self.vals[idx + 1] - v0) / (self.times[idx + 1] - t0)
        dt = t - t0
        return seg_int[idx] + v0 * dt + 0.5 * slope * dt * dt

    def params(self):
        return {"times": self.times.tolist(), "values": self.vals.tolist()}


@register_formula
class Zigzag(Formula):
    """Rises 0 to 1 on the first half of the horizon, falls back to 0 on the second."""

    formula_id = "zigzag"
    piecewise_linear = True

    def values(self, t, horizon):
        t = np.asarray(t, dtype=float)
        half = 0.5 * horizon
        return np.where(t <= half, t / half, 2.0 - t / half)

    def knots(self, horizon):
        return np.array([0.0, 0.5 * horizon, horizon])


@register_formula
class Sine(Formula):
    formula_id = "sine"

    def __init__(self, amplitude=1.0, cycles=1.0):
        self.amplitude = float(amplitude)
        self.cycles = float(cycles)

    def _omega(self, horizon):
        return 2.0 * math.pi * self.cycles / horizon

    def values(self, t, horizon):
        t = np.asarray(t, dtype=float)
        return self.amplitude * np.sin(self._omega(horizon) * t)

    def knots(self, horizon):
        w = self._omega(horizon)
        k = np.arange(0, int(2 * self.cycles) + 1)
        crit = (math.pi / 2 + k * math.pi) / w
        crit = crit[crit < horizon]
        return np.unique(np.concatenate([[0.0, horizon], crit]))

    def antiderivative(self, t, horizon):
        t = np.asarray(t, dtype=float)
        w = self._omega(horizon)
        return self.amplitude * (1.0 - np.cos(w * t)) / w

    def params(self):
        return {"amplitude": self.amplitude, "cycles": self.cycles}


# ---------------------------------------------------------------------------
# path protocol


class Path:
    horizon: float

    def eval(self, t: float) -> float:
        return float(self.eval_many(np.array([t]))[0])

    def eval_many(self, times) -> np.ndarray:
        raise NotImplementedError

    def _check_time(self, t):
        if np.any(np.asarray(t) < -1e-15) or np.any(np.asarray(t) > self.horizon * (1 + 1e-12)):
            raise DomainError(f"time outside [0, {self.horizon}]")

    def skeleton(self, s: float, t: float) -> tuple[np.ndarray, np.ndarray]:
        """(times, values) of the piecewise-linear realization on [s, t]."""
        raise NotImplementedError

    def extremes(self, s: float, t: float) -> tuple[float, float]:
        self._check_time([s, t])
        if t < s:
            raise DomainError("interval end before start")
        times, vals = self.skeleton(s, t)
        return float(vals.min()), float(vals.max())

    def first_hit(self, level: float, from_: float = 0.0, tol: float | None = None):
        raise NotImplementedError

    def fix_hit_times(self, times: np.ndarray) -> np.ndarray:
        """Hook for path kinds that must keep synthesized times off special points."""
        return times

    def to_spec(self) -> dict:
        raise NotImplementedError


class AnalyticPath(Path):
    kind = "analytic"

    def __init__(self, formula: Formula, horizon: float = 1.0):
        if horizon <= 0:
            raise DomainError("horizon must be positive")
        self.formula = formula
        self.horizon = float(horizon)

    def __repr__(self):
        return f"AnalyticPath({self.formula.formula_id}, T={self.horizon})"

    def eval_many(self, times):
        times = np.asarray(times, dtype=float)
        self._check_time(times)
        return self.formula.values(times, self.horizon)

    def skeleton(self, s, t):
        knots = self.formula.knots(self.horizon)
        inner = knots[(knots > s) & (knots < t)]
        times = np.concatenate([[s], inner, [t]])
        return times, self.formula.values(times, self.horizon)

    def antiderivative_many(self, times):
        return self.formula.antiderivative(np.asarray(times, dtype=float), self.horizon)

    def first_hit(self, level, from_=0.0, tol=None):
        self._check_time(from_)
        times, vals = self.skeleton(from_, self.horizon)
        if self.formula.piecewise_linear:
            return _first_hit_pwlinear(times, vals, level)
        if tol is None:
            tol = default_hit_tol(self.horizon)
        # refine each skeleton segment far enough that a sign change cannot hide
        fine = np.linspace(0.0, self.horizon, 4097)
        fine = np.unique(np.concatenate([times, fine[(fine > from_) & (fine < self.horizon)]]))
        fv = self.eval_many(fine)
        hit = _first_hit_pwlinear(fine, fv, level)
        if hit is None:
            return None
        return _bisect_hit(self.eval, fine, fv, hit, level, tol)

    def refine_to(self, s, t, depth):
        raise UnsupportedOperation("analytic paths have no refinement state")

    def to_spec(self):
        return {
            "kind": "analytic",
            "horizon": self.horizon,
            "formula": {"id": self.formula.formula_id, "params": self.formula.params()},
        }


def _first_hit_pwlinear(times, vals, level):
    """Exact earliest solution of v(t) == level on a piecewise-linear skeleton."""
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
    frac = d[i] / (d[i] - d[i + 1])
    return float(times[i] + frac * (times[i + 1] - times[i]))


def _bisect_hit(evalf, times, vals, coarse_hit, level, tol):
    i = int(np.searchsorted(times, coarse_hit, side="right") - 1)
    i = min(max(i, 0), len(times) - 2)
    a, b = times[i], times[i + 1]
    fa = vals[i] - level
    for _ in range(80):
        m = 0.5 * (a + b)
        fm = evalf(m) - level
        if abs(fm) <= tol:
            return float(m)
        if fa * fm <= 0:
            b = m
        else:
            a, fa = m, fm
    return float(0.5 * (a + b))


# ---------------------------------------------------------------------------
# Brownian midpoint-bridge path


def _midpoint(vl, vr, sig, z):
    return 0.5 * (vl + vr) + sig * z


class BridgePath(Path):
    """Seeded Brownian path on a dyadic midpoint tree.

    The displacement at the midpoint of cell j at level m is a standard normal
    scaled by sqrt(T * 2^-(m+2)), keyed by (seed, m, j); the terminal value is
    sqrt(T) times a normal keyed by (seed, stream 0).  Values at dyadic nodes
    are therefore independent of refinement history.  ``refine_to`` only
    updates the interval resolution used for interpolation, extremes and
    hitting-time scans.
    """

    kind = "bridge"

    def __init__(self, seed: int, horizon: float = 1.0, base_depth: int = 10):
        if horizon <= 0:
            raise DomainError("horizon must be positive")
        if not (0 <= base_depth <= MAX_DEPTH):
            raise DomainError(f"base depth must lie in [0, {MAX_DEPTH}]")
        self.seed = int(seed)
        self.horizon = float(horizon)
        self.base_depth = int(base_depth)
        self._sig = np.sqrt(self.horizon * 2.0 ** -(np.arange(MAX_DEPTH) + 2))
        self._terminal = float(rng.normals(self.seed, 0, 0)) * math.sqrt(self.horizon)
        # resolution map: sorted key breaks, one depth per segment
        self._depth_breaks = [0, _UNIT]
        self._depths = [self.base_depth]

    def __repr__(self):
        return f"BridgePath(seed={self.seed}, T={self.horizon}, base={self.base_depth})"

    # -- key helpers ------------------------------------------------------
    def _key_of(self, t: float) -> float:
        return t / self.horizon * _UNIT

    def _time_of(self, key) -> np.ndarray:
        return np.asarray(key, dtype=float) / _UNIT * self.horizon

    # -- resolution map ---------------------------------------------------
    def refine_to(self, s: float, t: float, depth: int):
        """Raise the local resolution on [s, t] to at least ``depth``."""
        self._check_time([s, t])
        if depth > MAX_DEPTH:
            raise DomainError(f"depth beyond the supported maximum {MAX_DEPTH}")
        ka = int(math.floor(self._key_of(s)))
        kb = int(math.ceil(self._key_of(t)))
        ka, kb = max(ka, 0), min(kb, _UNIT)
        if ka >= kb:
            return
        breaks, depths = self._depth_breaks, self._depths
        nb, nd = [breaks[0]], []
        for i, d in enumerate(depths):
            a, b = breaks[i], breaks[i + 1]
            parts = []
            lo, hi = max(a, ka), min(b, kb)
            if lo < hi:
                if a < lo:
                    parts.append((a, lo, d))
                parts.append((lo, hi, max(d, depth)))
                if hi < b:
                    parts.append((hi, b, d))
            else:
                parts.append((a, b, d))
            for pa, pb, pd in parts:
                if nd and nd[-1] == pd:
                    nb[-1] = pb
                else:
                    nb.append(pb)
                    nd.append(pd)
        self._depth_breaks, self._depths = nb, nd

    def local_depth(self, t: float) -> int:
        k = min(max(self._key_of(t), 0.0), _UNIT)
        i = 0
        for i in range(len(self._depths)):
            if k < self._depth_breaks[i + 1] or i == len(self._depths) - 1:
                break
        return self._depths[i]

    # -- dyadic node values -----------------------------------------------
    def values_at_keys(self, keys) -> np.ndarray:
        """Exact values at dyadic keys (integers in [0, 2^MAX_DEPTH])."""
        keys = np.asarray(keys, dtype=np.int64)
        n = len(keys)
        out = np.empty(n, dtype=float)
        l = np.zeros(n, dtype=np.int64)
        r = np.full(n, _UNIT, dtype=np.int64)
        vl = np.zeros(n, dtype=float)
        vr = np.full(n, self._terminal, dtype=float)
        open_ = (keys > l) & (keys < r)
        for m in range(MAX_DEPTH):
            if not open_.any():
                break
            idx = np.nonzero(open_)[0]
            li, ri = l[idx], r[idx]
            mid = (li + ri) >> 1
            j = (li >> (MAX_DEPTH - m)).astype(np.uint64)
            z = rng.normals(self.seed, m + 1, j)
            vm = _midpoint(vl[idx], vr[idx], self._sig[m], z)
            ki = keys[idx]
            at = ki == mid
            left = ki < mid
            right = ki > mid
            done_idx = idx[at]
            out[done_idx] = vm[at]
            open_[done_idx] = False
            r[idx[left]] = mid[left]
            vr[idx[left]] = vm[left]
            l[idx[right]] = mid[right]
            vl[idx[right]] = vm[right]
        out[keys == 0] = 0.0
        out[keys == _UNIT] = self._terminal
        rem = (keys > 0) & (keys < _UNIT) & open_
        if rem.any():  # cannot happen: all keys resolve within MAX_DEPTH levels
            raise AssertionError("unresolved dyadic key")
        return out

    def grid(self, s: float, t: float, depth: int) -> tuple[np.ndarray, np.ndarray]:
        """All dyadic samples of level <= depth covering [s, t] (keys snapped outward).

        Returns (keys, values); generated level by level so large grids cost
        O(n) normal draws.  Identical to per-key evaluation by construction.
        """
        if depth > MAX_DEPTH:
            raise DomainError(f"depth beyond the supported maximum {MAX_DEPTH}")
        ka = int(math.floor(self._key_of(max(s, 0.0))))
        kb = int(math.ceil(self._key_of(min(t, self.horizon))))
        kb = min(max(kb, ka), _UNIT)
        keys = np.array([0, _UNIT], dtype=np.int64)
        vals = np.array([0.0, self._terminal])
        for m in range(depth):
            step = 1 << (MAX_DEPTH - m)
            half = step >> 1
            mids = keys[:-1] + half
            j = (keys[:-1] >> (MAX_DEPTH - m)).astype(np.uint64)
            z = rng.normals(self.seed, m + 1, j)
            vm = _midpoint(vals[:-1], vals[1:], self._sig[m], z)
            nk = np.empty(2 * len(keys) - 1, dtype=np.int64)
            nv = np.empty(2 * len(keys) - 1, dtype=float)
            nk[0::2], nk[1::2] = keys, mids
            nv[0::2], nv[1::2] = vals, vm
            lo = (ka // half) * half
            hi = -(-kb // half) * half
            keep = (nk >= lo) & (nk <= hi)
            keys, vals = nk[keep], nv[keep]
        return keys, vals

    # -- evaluation ---------------------------------------------------------
    def eval_many(self, times):
        times = np.asarray(times, dtype=float)
        self._check_time(times)
        flat = np.clip(times.ravel(), 0.0, self.horizon)
        kf = flat / self.horizon * _UNIT
        kr = np.rint(kf)
        exact = np.abs(kf - kr) <= 1e-6
        out = np.empty(len(flat), dtype=float)
        if exact.any():
            out[exact] = self.values_at_keys(kr[exact].astype(np.int64))
        rest = ~exact
        if rest.any():
            out[rest] = self._interp_values(flat[rest], kf[rest])
        return out.reshape(times.shape)

    def _interp_values(self, ts, kf):
        out = np.empty(len(ts), dtype=float)
        breaks = np.asarray(self._depth_breaks, dtype=float)
        seg = np.clip(np.searchsorted(breaks, kf, side="right") - 1, 0, len(self._depths) - 1)
        for d in sorted(set(self._depths)):
            m = np.asarray(self._depths)[seg] == d
            if not m.any():
                continue
            step = 1 << (MAX_DEPTH - d)
            k0 = (kf[m] / step).astype(np.int64) * step
            k1 = np.minimum(k0 + step, _UNIT)
            uniq, inv = np.unique(np.concatenate([k0, k1]), return_inverse=True)
            uv = self.values_at_keys(uniq)
            n = m.sum()
            v0, v1 = uv[inv[:n]], uv[inv[n:]]
            t0 = self._time_of(k0)
            t1 = self._time_of(k1)
            w = np.where(t1 > t0, (ts[m] - t0) / np.where(t1 > t0, t1 - t0, 1.0), 0.0)
            out[m] = v0 + w * (v1 - v0)
        return out

    def skeleton(self, s, t):
        """Sample times/values on [s, t] at the per-interval local depth."""
        self._check_time([s, t])
        ka, kb = self._key_of(s), self._key_of(t)
        pieces_k = []
        for i, d in enumerate(self._depths):
            a = max(float(self._depth_breaks[i]), ka)
            b = min(float(self._depth_breaks[i + 1]), kb)
            if a >= b:
                continue
            step = 1 << (MAX_DEPTH - d)
            first = int(-(-a // step)) * step
            ks = np.arange(first, int(b) + 1, step, dtype=np.int64)
            ks = ks[(ks >= a) & (ks <= b)]
            pieces_k.append(ks)
        keys = np.unique(np.concatenate(pieces_k)) if pieces_k else np.empty(0, np.int64)
        times = self._time_of(keys)
        vals = self.values_at_keys(keys) if len(keys) else np.empty(0)
        # exact endpoints (possibly interpolated) guard the interval boundary
        if len(times) == 0 or times[0] > s:
            times = np.concatenate([[s], times])
            vals = np.concatenate([[self.eval(s)], vals])
        if times[-1] < t:
            times = np.concatenate([times, [t]])
            vals = np.concatenate([vals, [self.eval(t)]])
        return times, vals

    def first_hit(self, level, from_=0.0, tol=None):
        """Earliest level hit at current resolution, sharpened by dyadic refinement.

        The scan finds the first sign change (or touch) on the local-depth
        skeleton; the bracketing cell is then split dyadically until the cell
        fluctuation scale falls below ``tol``, always following the earliest
        crossing sub-cell, and the hit is solved exactly on the final linear
        segment.  The refined cell is recorded in the resolution map so later
        evaluations interpolate consistently.
        """
        self._check_time(from_)
        if tol is None:
            tol = default_hit_tol(self.horizon)
        times, vals = self.skeleton(from_, self.horizon)
        coarse = _first_hit_pwlinear(times, vals, level)
        if coarse is None:
            return None
        i = int(np.searchsorted(times, coarse, side="right") - 1)
        i = min(max(i, 0), len(times) - 2)
        ta, tb = times[i], times[i + 1]
        va, vb = vals[i], vals[i + 1]
        if va == level:
            return float(ta)
        # snap the bracket to whole dyadic cells when possible
        ka = int(math.floor(self._key_of(ta) + 0.5)) if _is_key(self._key_of(ta)) else None
        kb = int(math.floor(self._key_of(tb) + 0.5)) if _is_key(self._key_of(tb)) else None
        if ka is None or kb is None or kb - ka < 2:
            return _linear_solve(ta, tb, va, vb, level)
        depth_goal = min(MAX_HIT_DEPTH, _depth_for_tol(self.horizon, tol))
        level_now = MAX_DEPTH - int(round(math.log2(kb - ka)))
        for m in range(level_now, depth_goal):
            if kb - ka <= 1:
                break
            mid = (ka + kb) >> 1
            vm = float(self.values_at_keys(np.array([mid]))[0])
            if (va - level) * (vm - level) <= 0.0:
                kb, vb = mid, vm
            else:
                ka, va = mid, vm
        self.refine_to(self._time_of(ka), self._time_of(kb), depth_goal)
        tau = _linear_solve(self._time_of(ka), self._time_of(kb), va, vb, level)
        return float(self.fix_hit_times(np.array([tau]))[0])

    def fix_hit_times(self, times: np.ndarray) -> np.ndarray:
        """Nudge times whose float key collides with a dyadic node below resolution.

        A solved hitting time occasionally rounds to an exact dyadic key deeper
        than the local depth; evaluation there would return the tree node value
        instead of the interpolant the hit was solved on.  One key-scale nudge
        restores interpolation consistency at a value cost of a few ulp.
        """
        times = np.asarray(times, dtype=float)
        kf = times / self.horizon * _UNIT
        kr = np.rint(kf)
        near = (np.abs(kf - kr) <= 1e-6) & (kr > 0) & (kr < _UNIT)
        if not near.any():
            return times
        ki = kr[near].astype(np.int64)
        tz = np.log2((ki & -ki).astype(float)).astype(np.int64)
        level = MAX_DEPTH - tz
        breaks = np.asarray(self._depth_breaks, dtype=float)
        seg = np.clip(np.searchsorted(breaks, kf[near], side="right") - 1,
                      0, len(self._depths) - 1)
        local = np.asarray(self._depths)[seg]
        bump = level > local
        if not bump.any():
            return times
        out = times.copy()
        idx = np.nonzero(near)[0][bump]
        step_keys = np.maximum(np.spacing(out[idx]) / self.horizon * _UNIT, 2e-6)
        out[idx] = out[idx] + step_keys * (self.horizon / _UNIT)
        return out

    def to_spec(self):
        return {
            "kind": "bridge",
            "horizon": self.horizon,
            "seed": self.seed,
            "base_depth": self.base_depth,
        }


def _is_key(kf: float) -> bool:
    return abs(kf - round(kf)) <= 1e-6


def _linear_solve(ta, tb, va, vb, level):
    if vb == va:
        return float(ta)
    frac = (level - va) / (vb - va)
    frac = min(max(frac, 0.0), 1.0)
    return float(ta + frac * (tb - ta))


def _depth_for_tol(horizon: float, tol: float) -> int:
    # midpoint displacement scale at level m is sqrt(T) * 2^-(m+2)/2
    if tol <= 0:
        raise DomainError("tol must be positive")
    m = 2.0 * math.log2(math.sqrt(horizon) / tol) - 2.0
    return max(0, int(math.ceil(m)))


class DriftedPath(Path):
    """Brownian path plus the running integral of an analytic drift."""

    kind = "drifted"

    def __init__(self, bridge: BridgePath, drift: Formula):
        self.bridge = bridge
        self.drift = drift
        self.horizon = bridge.horizon

    def eval_many(self, times):
        times = np.asarray(times, dtype=float)
        return self.bridge.eval_many(times) + self.drift.antiderivative(times, self.horizon)

    def skeleton(self, s, t):
        times, vals = self.bridge.skeleton(s, t)
        return times, vals + self.drift.antiderivative(times, self.horizon)

    def refine_to(self, s, t, depth):
        self.bridge.refine_to(s, t, depth)

    def first_hit(self, level, from_=0.0, tol=None):
        if tol is None:
            tol = default_hit_tol(self.horizon)
        times, vals = self.skeleton(from_, self.horizon)
        coarse = _first_hit_pwlinear(times, vals, level)
        if coarse is None:
            return None
        return _bisect_hit(self.eval, times, vals, coarse, level, tol)

    def to_spec(self):
        spec = self.bridge.to_spec()
        spec["kind"] = "drifted"
        spec["drift"] = {"id": self.drift.formula_id, "params": self.drift.params()}
        return spec


class TransformedPath(Path):
    """phi(x) for a strictly monotone C1 transform phi."""

    kind = "transformed"

    def __init__(self, base: Path, phi, increasing: bool = True):
        self.base = base
        self.phi = phi
        self.increasing = increasing
        self.horizon = base.horizon

    def eval_many(self, times):
        return self.phi(self.base.eval_many(times))

    def skeleton(self, s, t):
        times, vals = self.base.skeleton(s, t)
        return times, self.phi(vals)

    def extremes(self, s, t):
        lo, hi = self.base.extremes(s, t)
        a, b = float(self.phi(np.array([lo]))[0]), float(self.phi(np.array([hi]))[0])
        return (a, b) if self.increasing else (b, a)


class TimeChangedPath(Path):
    """x(tau(t)) for an increasing continuous bijection tau of [0, horizon]."""

    kind = "timechanged"

    def __init__(self, base: Path, tau):
        self.base = base
        self.tau = tau
        self.horizon = base.horizon

    def eval_many(self, times):
        times = np.asarray(times, dtype=float)
        self._check_time(times)
        inner = np.clip(self.tau(times), 0.0, self.base.horizon)
        return self.base.eval_many(inner)


def path_from_spec(spec: dict) -> Path:
    kind = spec.get("kind")
    horizon = float(spec.get("horizon", 1.0))
    if kind == "analytic":
        return AnalyticPath(formula_from_spec(spec["formula"]), horizon)
    if kind == "bridge":
        return BridgePath(int(spec["seed"]), horizon, int(spec.get("base_depth", 10)))
    if kind == "drifted":
        bridge = BridgePath(int(spec["seed"]), horizon, int(spec.get("base_depth", 10)))
        return DriftedPath(bridge, formula_from_spec(spec["drift"]))
    raise DomainError(f"unknown path kind {kind!r}")


def zigzag(horizon: float = 1.0) -> AnalyticPath:
    return AnalyticPath(Zigzag(), horizon)


def constant(value: float, horizon: float = 1.0) -> AnalyticPath:
    return AnalyticPath(Constant(value), horizon)


def linear(horizon: float = 1.0, slope: float = 1.0, intercept: float = 0.0) -> AnalyticPath:
    return AnalyticPath(Linear(intercept, slope), horizon)
