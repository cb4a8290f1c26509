"""Non-anticipative sums, the discrete Tanaka-Meyer identity and its friends.

A TestFunction is the difference of two convex functions represented by its
curvature measure (atoms plus piecewise-polynomial density) together with the
slope left of the curvature support and one anchored value.  Values and left
derivatives reconstruct in closed form, so the Tanaka-Meyer residual is zero
to rounding at every partition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .local_time import LocalTimeProfile, discrete_local_time, pair_against
from .partitions import Partition, oscillation
from .paths import Path, TimeChangedPath, TransformedPath
from .piecewise import (CurvatureMeasure, PiecewisePoly, poly_antideriv,
                        poly_compose_affine, poly_eval)
from .quadvar import weighted_qv_sum


# ---------------------------------------------------------------------------
# test functions


@dataclass(frozen=True)
class TestFunction:
    """f = difference of convex functions, driven by its curvature measure."""

    __test__ = False  # keep pytest collection away from the name

    curvature: CurvatureMeasure
    slope_below: float = 0.0
    anchor: float = 0.0
    anchor_value: float = 0.0

    def dminus(self, u):
        """Left derivative: slope_below plus curvature mass of (-inf, u)."""
        u = np.asarray(u, dtype=float)
        out = self.slope_below + self.curvature.mass_below(np.atleast_1d(u))
        return out.reshape(u.shape) if u.ndim else float(out[0])

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        scalar = u.ndim == 0
        uu = np.atleast_1d(u)
        out = self._raw(uu) - self._raw(np.array([self.anchor]))[0] + self.anchor_value
        return float(out[0]) if scalar else out

    def _raw(self, u: np.ndarray) -> np.ndarray:
        out = self.slope_below * u
        locs, ws = self.curvature.atom_locations, self.curvature.atom_weights
        for loc, w in zip(locs, ws):
            out = out + w * np.maximum(u - loc, 0.0)
        dens = self.curvature.density
        if dens is not None:
            out = out + _double_integral(dens, u)
        return out

    def consistency_gap(self, a: float, b: float) -> float:
        """dminus(b) - dminus(a) - curvature([a, b)); zero for a valid function."""
        return float(self.dminus(b) - self.dminus(a) - self.curvature.interval_mass(a, b))

    def to_json(self):
        return {
            "curvature": self.curvature.to_json(),
            "slope_below": self.slope_below,
            "anchor": self.anchor,
            "anchor_value": self.anchor_value,
        }

    @staticmethod
    def from_json(d):
        return TestFunction(CurvatureMeasure.from_json(d["curvature"]),
                            float(d.get("slope_below", 0.0)),
                            float(d.get("anchor", 0.0)),
                            float(d.get("anchor_value", 0.0)))


def _double_integral(dens: PiecewisePoly, u: np.ndarray) -> np.ndarray:
    """int_{-inf}^{u} int_{-inf}^{y} dens(v) dv dy with dens compactly supported."""
    bks = dens.breakpoints
    seg_mass = dens.segment_integrals()
    cum_mass = np.concatenate([[0.0], np.cumsum(seg_mass)])
    antis = []
    cum2 = np.zeros(len(dens.coeffs) + 1)
    for j, c in enumerate(dens.coeffs):
        a2 = poly_antideriv(poly_antideriv(c))
        antis.append(a2)
        w = bks[j + 1] - bks[j]
        # carry both the accumulated double integral and mass * remaining width
        cum2[j + 1] = cum2[j] + cum_mass[j] * w + poly_eval(a2, w)
    out = np.zeros(len(u))
    j = np.clip(np.searchsorted(bks, u, side="right") - 1, 0, len(dens.coeffs) - 1)
    for seg in range(len(dens.coeffs)):
        m = (j == seg) & (u > bks[0]) & (u < bks[-1])
        if m.any():
            xi = u[m] - bks[seg]
            out[m] = cum2[seg] + cum_mass[seg] * xi + poly_eval(antis[seg], xi)
    above = u >= bks[-1]
    out[above] = cum2[-1] + cum_mass[-1] * (u[above] - bks[-1])
    return out


def abs_function(center: float = 0.0) -> TestFunction:
    """f(u) = |u - center|."""
    return TestFunction(CurvatureMeasure.from_atoms([(center, 2.0)]),
                        slope_below=-1.0, anchor=center, anchor_value=0.0)


def quadratic_function(lo: float, hi: float) -> TestFunction:
    """f(u) = u^2 exactly on [lo, hi] (curvature 2 du there, linear outside)."""
    dens = PiecewisePoly.constant(2.0, lo, hi)
    return TestFunction(CurvatureMeasure(density=dens), slope_below=2.0 * lo,
                        anchor=lo, anchor_value=lo * lo)


@dataclass(frozen=True)
class C2Function:
    f: object
    d1: object
    d2: object


def power4() -> C2Function:
    return C2Function(lambda u: u ** 4, lambda u: 4.0 * u ** 3, lambda u: 12.0 * u ** 2)


# ---------------------------------------------------------------------------
# sums and residuals


def follmer_sum(path: Path, pi: Partition, g, t: float) -> float:
    """Non-anticipative Riemann sum: sum of g(x_{t_j}) (x_{t_{j+1}^t} - x_{t_j^t})."""
    t = min(t, path.horizon)
    times = np.minimum(pi.times, t)
    vals = path.eval_many(times)
    w = np.asarray(g(vals[:-1]), dtype=float)
    return math.fsum(w * np.diff(vals))


@dataclass(frozen=True)
class IntegralDiagnostics:
    values: np.ndarray
    diffs: np.ndarray
    converged: bool
    tolerance: float


def follmer_integral(path: Path, partitions, g, t: float,
                     policy_tol: float = 1e-6) -> tuple[float, IntegralDiagnostics]:
    """Last non-anticipative sum along the sequence plus Cauchy diagnostics.

    Non-convergence (successive differences above the policy tolerance) is a
    reported status, never an exception.
    """
    if not partitions:
        raise DomainError("need a non-empty partition sequence")
    values = np.array([follmer_sum(path, pi, g, t) for pi in partitions])
    diffs = np.abs(np.diff(values))
    converged = bool(len(diffs) == 0 or diffs[-1] <= policy_tol)
    return float(values[-1]), IntegralDiagnostics(values, diffs, converged, policy_tol)


def tanaka_residual(path: Path, pi: Partition, f: TestFunction, t: float) -> float:
    """f(x_t) - f(x_0) - sum f'_-(x_{t_j}) dx - (1/2) int L_t df''; identically zero."""
    t = min(t, path.horizon)
    x0 = path.eval(float(pi.times[0]))
    xt = path.eval(t if t >= pi.times[0] else float(pi.times[0]))
    profile = discrete_local_time(path, pi, t)
    riemann = follmer_sum(path, pi, lambda v: np.asarray(f.dminus(v)), t)
    pairing = pair_against(profile, f.curvature)
    return float(f(xt) - f(x0) - riemann - 0.5 * pairing)


def ito_residual(path: Path, pi: Partition, f: C2Function, t: float) -> float:
    """Second-order Taylor residual of the telescoped f increments."""
    t = min(t, path.horizon)
    x0 = path.eval(float(pi.times[0]))
    xt = path.eval(t)
    riemann = follmer_sum(path, pi, f.d1, t)
    second = weighted_qv_sum(path, pi, f.d2, t)
    return float(f.f(xt) - f.f(x0) - riemann - 0.5 * second)


def occupation_residual(path: Path, pi: Partition, h: PiecewisePoly, t: float) -> float:
    """weighted sum of h against squared increments minus int L_t(u) h(u) du."""
    t = min(t, path.horizon)
    lhs = weighted_qv_sum(path, pi, h, t)
    profile = discrete_local_time(path, pi, t)
    rhs = pair_against(profile, CurvatureMeasure(density=h))
    return float(lhs - rhs)


# ---------------------------------------------------------------------------
# mollification


@dataclass(frozen=True)
class Mollifier:
    """C2 bump g >= 0 supported in [0, 1] with unit mass, as poly coefficients."""

    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=float))
        mass = poly_eval(poly_antideriv(self.coeffs), 1.0)
        if abs(mass - 1.0) > 1e-12:
            raise DomainError("mollifier must integrate to one")
        for derivs in range(3):
            c = self.coeffs
            for _ in range(derivs):
                c = c[1:] * np.arange(1, len(c))
            if abs(poly_eval(c, 0.0)) > 1e-9 or abs(poly_eval(c, 1.0)) > 1e-9:
                raise DomainError("mollifier must vanish to second order at its endpoints")

    def first_moment(self) -> float:
        xg = np.concatenate([[0.0], self.coeffs])
        return float(poly_eval(poly_antideriv(xg), 1.0))


def default_mollifier() -> Mollifier:
    # 140 z^3 (1-z)^3 expanded
    return Mollifier(np.array([0.0, 0.0, 0.0, 140.0, -420.0, 420.0, -140.0]))


def _bump_density(g: Mollifier, n: int, loc: float, weight: float) -> PiecewisePoly:
    """weight * g_n(u - loc) as a single polynomial piece on [loc, loc + 1/n]."""
    scaled = g.coeffs * (float(n) ** (np.arange(len(g.coeffs)) + 1.0)) * weight
    return PiecewisePoly(np.array([loc, loc + 1.0 / n]), [scaled])


def _smoothed_step(g: Mollifier, n: int, alpha: float, beta: float,
                   value: float) -> PiecewisePoly:
    """value * (g_n convolved with the indicator of [alpha, beta))."""
    G = poly_antideriv(g.coeffs)
    width = 1.0 / n
    pts = np.unique(np.array([alpha, beta, alpha + width, beta + width]))
    segs = []
    coeffs = []
    for x0, x1 in zip(pts[:-1], pts[1:]):
        # on [x0, x1): G(clip(n(u - alpha))) - G(clip(n(u - beta))), u = x0 + xi
        piece = np.zeros(len(G))
        mid = 0.5 * (x0 + x1)
        za = n * (mid - alpha)
        zb = n * (mid - beta)
        if za >= 1.0:
            piece[0] += 1.0
        elif za > 0.0:
            piece += poly_compose_affine(G, n * (x0 - alpha), float(n))
        if zb >= 1.0:
            piece[0] -= 1.0
        elif zb > 0.0:
            piece -= poly_compose_affine(G, n * (x0 - beta), float(n))
        segs.append((x0, x1))
        coeffs.append(piece * value)
    return PiecewisePoly(pts, coeffs)


def mollify(f: TestFunction, n: int, g: Mollifier | None = None) -> TestFunction:
    """The C2 smoothing with curvature g_n convolved with f'' (left-sided window).

    Atoms become polynomial bumps, constant-density pieces become smoothed
    steps; everything stays exactly piecewise polynomial.
    """
    if n < 1:
        raise DomainError("mollifier scale must be at least 1")
    if g is None:
        g = default_mollifier()
    parts = []
    for loc, w in zip(f.curvature.atom_locations, f.curvature.atom_weights):
        parts.append(_bump_density(g, n, float(loc), float(w)))
    dens = f.curvature.density
    if dens is not None:
        for j, c in enumerate(dens.coeffs):
            if len(c) != 1:
                raise DomainError("mollify expects atoms plus piecewise-constant density")
            if c[0] != 0.0:
                parts.append(_smoothed_step(g, n, float(dens.breakpoints[j]),
                                            float(dens.breakpoints[j + 1]), float(c[0])))
    new_dens = PiecewisePoly.sum(parts) if parts else None
    curv = CurvatureMeasure(density=new_dens)
    # below the smoothed support f_n(u) = f(u) - slope_below * m1 / n exactly
    lo_candidates = [new_dens.lo] if new_dens is not None else [f.anchor]
    a0 = min(min(lo_candidates), f.anchor) - 1.0
    value_a0 = float(f(a0)) - f.slope_below * g.first_moment() / n
    return TestFunction(curv, slope_below=f.slope_below, anchor=a0, anchor_value=value_a0)


def mollified_profile_pairing(profile: LocalTimeProfile, f: TestFunction, n: int,
                              g: Mollifier | None = None) -> float:
    """int (g_n-hat * L)(u) f''(du): the Fubini twin of pairing against f_n''."""
    if g is None:
        g = default_mollifier()
    total = []
    for loc, w in zip(f.curvature.atom_locations, f.curvature.atom_weights):
        bump = _bump_density(g, n, float(loc), 1.0)
        total.append(w * pair_against(profile, CurvatureMeasure(density=bump)))
    dens = f.curvature.density
    if dens is not None:
        for j, c in enumerate(dens.coeffs):
            if c[0] != 0.0:
                smooth = _smoothed_step(g, n, float(dens.breakpoints[j]),
                                        float(dens.breakpoints[j + 1]), float(c[0]))
                total.append(pair_against(profile, CurvatureMeasure(density=smooth)))
    return math.fsum(total)


# ---------------------------------------------------------------------------
# change of variables and time change


@dataclass(frozen=True)
class CovCheck:
    lhs: float
    rhs: float
    bound: float
    ok: bool


def modulus_over_window(g, lo: float, hi: float, window: float, samples: int = 4096) -> float:
    """max |g(c) - g(d)| over c, d in [lo, hi] with |c - d| <= window (grid sup)."""
    if window <= 0 or lo >= hi:
        return 0.0
    xs = np.linspace(lo, hi, samples)
    gv = np.asarray(g(xs), dtype=float)
    w = max(1, int(math.ceil(window / (xs[1] - xs[0]))))
    if w >= len(xs):
        return float(gv.max() - gv.min())
    view = np.lib.stride_tricks.sliding_window_view(gv, w + 1)
    return float(np.max(view.max(axis=1) - view.min(axis=1)))


def change_of_variable_check(path: Path, pi: Partition, phi, dphi, t: float, u: float,
                             tol: float = 1e-9) -> CovCheck:
    """Compare L^{phi(x)}(phi(u)) with |phi'(u)| L^x(u) under the modulus bound.

    The bound is R_t(phi', pi) * L^x_t(u) where R is the modulus of continuity
    of phi' over the path range at the oscillation scale.
    """
    t = min(t, path.horizon)
    lo, hi = path.extremes(0.0, t)
    d_samples = np.asarray(dphi(np.linspace(lo, hi, 257)), dtype=float)
    if not (np.all(d_samples > 0) or np.all(d_samples < 0)):
        raise DomainError("phi must be strictly monotone on the path range")
    increasing = bool(d_samples[0] > 0)
    tpath = TransformedPath(path, phi, increasing)
    from .local_time import local_time_value

    lhs = local_time_value(tpath, pi, t, float(phi(np.array([u]))[0]))
    lx = local_time_value(path, pi, t, u)
    rhs = abs(float(dphi(np.array([u]))[0])) * lx
    osc = oscillation(path, pi, t)
    bound = modulus_over_window(dphi, lo, hi, osc) * lx
    return CovCheck(lhs, rhs, bound, bool(abs(lhs - rhs) <= bound + tol))


def time_change_check(path: Path, tau, pi: Partition, t: float) -> float:
    """Sup distance between L^{x o tau}_t along pi and L^x_{tau(t)} along tau(pi)."""
    t = min(t, path.horizon)
    warped = TimeChangedPath(path, tau)
    prof_a = discrete_local_time(warped, pi, t)
    tau_times = np.asarray(tau(pi.times), dtype=float)
    if np.any(np.diff(tau_times) <= 0):
        raise DomainError("tau must be strictly increasing on the partition")
    prof_b = discrete_local_time(path, Partition(tau_times), float(tau(np.array([t]))[0]))
    return prof_a.sup_distance(prof_b)
