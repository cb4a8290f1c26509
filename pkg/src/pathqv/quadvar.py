"""Squared-increment sums along a partition, clamped at a running time.

All sums run left to right over cells through ``math.fsum``, so identities
that hold exactly in real arithmetic (splitting, concatenation, the local
time mass identity) survive at the 1e-12 level even on large partitions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .partitions import Partition, oscillation
from .paths import Path


def _clamped_increments(path: Path, pi: Partition, t: float, s: float | None = None):
    """(left values, squared increments) of x over cells clamped into (s, t]."""
    times = np.minimum(pi.times, t)
    if s is not None:
        times = np.maximum(times, s)
    vals = path.eval_many(times)
    return vals, np.diff(vals)


def qv(path: Path, pi: Partition, t: float) -> float:
    """Sum of squared increments of x over the cells of pi, clamped at t."""
    _, inc = _clamped_increments(path, pi, t)
    return math.fsum(inc * inc)


def qv_increment(path: Path, pi: Partition, s: float, t: float) -> float:
    """Squared-increment sum over (s, t]: indices clamped as (t_k ^ t) v s."""
    if s > t:
        raise DomainError("qv_increment needs s <= t")
    _, inc = _clamped_increments(path, pi, t, s)
    return math.fsum(inc * inc)


def weighted_qv_sum(path: Path, pi: Partition, f, t: float) -> float:
    """Sum of f(x_{t_j}) times the squared clamped increment over each cell."""
    vals, inc = _clamped_increments(path, pi, t)
    w = np.asarray(f(vals[:-1]), dtype=float)
    return math.fsum(w * (inc * inc))


@dataclass(frozen=True)
class QvCurve:
    checkpoints: np.ndarray
    values: np.ndarray
    final_oscillation: float

    def to_rows(self):
        return list(zip(self.checkpoints.tolist(), self.values.tolist()))

    def header(self, pi: Partition) -> dict:
        return {
            "cells": len(pi) - 1,
            "span": [pi.lo, pi.hi],
            "final_oscillation": self.final_oscillation,
        }


def qv_curve(path: Path, pi: Partition, checkpoints) -> QvCurve:
    """Cumulative squared-increment curve evaluated at increasing checkpoints."""
    cps = np.asarray(checkpoints, dtype=float)
    if len(cps) and np.any(np.diff(cps) < 0):
        raise DomainError("checkpoints must be increasing")
    if len(cps) == 0:
        return QvCurve(cps, np.empty(0), 0.0)
    values = qv_many(path, pi, cps)
    osc = oscillation(path, pi, float(cps[-1]))
    return QvCurve(cps, values, osc)


def qv_many(path: Path, pi: Partition, ts) -> np.ndarray:
    """qv(path, pi, t) for many t at the cost of one pass over the cells."""
    ts = np.asarray(ts, dtype=float)
    vals = path.eval_many(np.minimum(pi.times, path.horizon))
    inc2 = np.diff(vals) ** 2
    cum = np.concatenate([[0.0], np.cumsum(inc2)])
    j = np.clip(np.searchsorted(pi.times, ts, side="right") - 1, 0, len(pi.times) - 1)
    out = cum[j]
    inside = (j >= 0) & (j < len(pi.times) - 1) & (ts > pi.times[j])
    if inside.any():
        xt = path.eval_many(np.minimum(ts[inside], path.horizon))
        out = out.astype(float)
        out[inside] += (xt - vals[j[inside]]) ** 2
    below = ts < pi.times[0]
    out[below] = 0.0
    return out
