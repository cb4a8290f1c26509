"""Piecewise-polynomial functions and signed curvature measures.

Segments store local coefficients around their left breakpoint, which keeps
evaluation and integration well conditioned far from the origin.  These are
the building blocks for test-function curvature (atoms plus density) and for
exact pairings against piecewise-linear local time profiles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError


def poly_eval(coeffs: np.ndarray, x):
    out = np.zeros_like(np.asarray(x, dtype=float))
    for c in coeffs[::-1]:
        out = out * x + c
    return out


def poly_antideriv(coeffs: np.ndarray) -> np.ndarray:
    return np.concatenate([[0.0], coeffs / (np.arange(len(coeffs)) + 1.0)])


def poly_shift(coeffs: np.ndarray, h: float) -> np.ndarray:
    """Coefficients of p(x + h) given those of p(x)."""
    n = len(coeffs)
    out = np.zeros(n)
    for d, c in enumerate(coeffs):
        if c == 0.0:
            continue
        # c * (x + h)^d expanded binomially
        term = c
        for j in range(d, -1, -1):
            out[j] += term * math.comb(d, j) * h ** (d - j)
    return out


def poly_compose_affine(coeffs: np.ndarray, a: float, b: float) -> np.ndarray:
    """Coefficients of p(a + b*x)."""
    out = np.zeros(len(coeffs))
    out[0] = 0.0
    acc = np.zeros(len(coeffs))
    acc[0] = 1.0  # (a + b x)^0
    for d, c in enumerate(coeffs):
        if d > 0:
            nxt = np.zeros(len(coeffs))
            nxt[0] = a * acc[0]
            nxt[1:] = a * acc[1:] + b * acc[:-1]
            acc = nxt
        if c != 0.0:
            out += c * acc
    return out


@dataclass(frozen=True)
class PiecewisePoly:
    """Right-continuous function, polynomial on each [bk[j], bk[j+1]), zero outside.

    coeffs[j] holds local coefficients in (u - bk[j]).
    """

    breakpoints: np.ndarray
    coeffs: list

    def __post_init__(self):
        bk = np.asarray(self.breakpoints, dtype=float)
        if len(bk) != len(self.coeffs) + 1:
            raise DomainError("need one more breakpoint than segments")
        if len(bk) > 1 and np.any(np.diff(bk) <= 0):
            raise DomainError("breakpoints must increase")
        object.__setattr__(self, "breakpoints", bk)
        object.__setattr__(self, "coeffs", [np.asarray(c, dtype=float) for c in self.coeffs])

    @staticmethod
    def constant(value: float, lo: float, hi: float) -> "PiecewisePoly":
        return PiecewisePoly(np.array([lo, hi]), [np.array([value])])

    @staticmethod
    def from_step(breakpoints, values) -> "PiecewisePoly":
        return PiecewisePoly(np.asarray(breakpoints, dtype=float),
                             [np.array([v], dtype=float) for v in values])

    @property
    def lo(self):
        return float(self.breakpoints[0])

    @property
    def hi(self):
        return float(self.breakpoints[-1])

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        out = np.zeros(u.shape if u.ndim else (1,))
        uu = np.atleast_1d(u)
        j = np.searchsorted(self.breakpoints, uu, side="right") - 1
        for seg in range(len(self.coeffs)):
            m = j == seg
            if m.any():
                out[m] = poly_eval(self.coeffs[seg], uu[m] - self.breakpoints[seg])
        out[(uu < self.lo) | (uu >= self.hi)] = 0.0
        return out if u.ndim else float(out[0])

    def segment_integrals(self) -> np.ndarray:
        out = np.empty(len(self.coeffs))
        for j, c in enumerate(self.coeffs):
            anti = poly_antideriv(c)
            out[j] = poly_eval(anti, self.breakpoints[j + 1] - self.breakpoints[j])
        return out

    def integral(self, a: float | None = None, b: float | None = None) -> float:
        a = self.lo if a is None else a
        b = self.hi if b is None else b
        if a >= b:
            return 0.0
        total = 0.0
        for j, c in enumerate(self.coeffs):
            x0, x1 = self.breakpoints[j], self.breakpoints[j + 1]
            lo, hi = max(a, x0), min(b, x1)
            if lo >= hi:
                continue
            anti = poly_antideriv(c)
            total += poly_eval(anti, hi - x0) - poly_eval(anti, lo - x0)
        return total

    def scale(self, factor: float) -> "PiecewisePoly":
        return PiecewisePoly(self.breakpoints, [c * factor for c in self.coeffs])

    @staticmethod
    def sum(parts: list["PiecewisePoly"]) -> "PiecewisePoly":
        parts = [p for p in parts if len(p.coeffs)]
        if not parts:
            return PiecewisePoly(np.array([0.0, 1.0]), [np.zeros(1)])
        bks = np.unique(np.concatenate([p.breakpoints for p in parts]))
        deg = max(max(len(c) for c in p.coeffs) for p in parts)
        coeffs = [np.zeros(deg) for _ in range(len(bks) - 1)]
        for p in parts:
            for j, c in enumerate(p.coeffs):
                a, b = p.breakpoints[j], p.breakpoints[j + 1]
                i0 = np.searchsorted(bks, a)
                i1 = np.searchsorted(bks, b)
                for i in range(i0, i1):
                    shifted = poly_shift(c, bks[i] - a)
                    coeffs[i][: len(shifted)] += shifted
        return PiecewisePoly(bks, coeffs)

    def to_json(self):
        return {
            "breakpoints": self.breakpoints.tolist(),
            "coefficients": [c.tolist() for c in self.coeffs],
        }

    @staticmethod
    def from_json(d) -> "PiecewisePoly":
        return PiecewisePoly(np.asarray(d["breakpoints"], dtype=float),
                             [np.asarray(c, dtype=float) for c in d["coefficients"]])


@dataclass(frozen=True)
class CurvatureMeasure:
    """Signed Radon measure: atoms plus a piecewise-polynomial density."""

    atom_locations: np.ndarray = field(default_factory=lambda: np.empty(0))
    atom_weights: np.ndarray = field(default_factory=lambda: np.empty(0))
    density: PiecewisePoly | None = None

    def __post_init__(self):
        locs = np.asarray(self.atom_locations, dtype=float)
        ws = np.asarray(self.atom_weights, dtype=float)
        if len(locs) != len(ws):
            raise DomainError("atom locations and weights must align")
        order = np.argsort(locs, kind="stable")
        object.__setattr__(self, "atom_locations", locs[order])
        object.__setattr__(self, "atom_weights", ws[order])

    @staticmethod
    def from_atoms(pairs) -> "CurvatureMeasure":
        if not pairs:
            return CurvatureMeasure()
        locs, ws = zip(*pairs)
        return CurvatureMeasure(np.array(locs, dtype=float), np.array(ws, dtype=float))

    @staticmethod
    def zero() -> "CurvatureMeasure":
        return CurvatureMeasure()

    def mass_below(self, u) -> np.ndarray:
        """Measure of (-inf, u): atoms strictly below u plus density up to u."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        out = np.zeros(len(u))
        for loc, w in zip(self.atom_locations, self.atom_weights):
            out += np.where(u > loc, w, 0.0)
        if self.density is not None:
            dens = self.density
            bks = dens.breakpoints
            cum = np.concatenate([[0.0], np.cumsum(dens.segment_integrals())])
            j = np.clip(np.searchsorted(bks, u, side="right") - 1, 0, len(dens.coeffs) - 1)
            extra = np.zeros(len(u))
            inside = (u > bks[0]) & (u < bks[-1])
            for seg in range(len(dens.coeffs)):
                m = inside & (j == seg)
                if m.any():
                    anti = poly_antideriv(dens.coeffs[seg])
                    extra[m] = cum[seg] + poly_eval(anti, u[m] - bks[seg])
            out += np.where(u >= bks[-1], cum[-1], extra)
        return out

    def interval_mass(self, a: float, b: float) -> float:
        """Measure of [a, b), matching the left-derivative increment convention."""
        lo, hi = min(a, b), max(a, b)
        atoms = float(np.sum(self.atom_weights[(self.atom_locations >= lo)
                                               & (self.atom_locations < hi)]))
        dens = self.density.integral(lo, hi) if self.density is not None else 0.0
        return atoms + dens

    def total_variation(self) -> float:
        tv = float(np.sum(np.abs(self.atom_weights)))
        if self.density is not None:
            # density sign changes inside a segment are rare in our corpus;
            # sample-based bound is enough for diagnostics
            for j, c in enumerate(self.density.coeffs):
                a, b = self.density.breakpoints[j], self.density.breakpoints[j + 1]
                xs = np.linspace(0.0, b - a, 33)
                tv += float(np.trapezoid(np.abs(poly_eval(c, xs)), xs))
        return tv

    def to_json(self):
        return {
            "atoms": [[float(l), float(w)] for l, w in
                      zip(self.atom_locations, self.atom_weights)],
            "density": None if self.density is None else self.density.to_json(),
        }

    @staticmethod
    def from_json(d) -> "CurvatureMeasure":
        atoms = d.get("atoms") or []
        dens = d.get("density")
        me = CurvatureMeasure.from_atoms([tuple(a) for a in atoms])
        if dens is not None:
            me = CurvatureMeasure(me.atom_locations, me.atom_weights,
                                  PiecewisePoly.from_json(dens))
        return me
