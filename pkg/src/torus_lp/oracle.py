"""Uncertified cross-checks: plain midpoint quadrature, Monte Carlo and the
analytic identities behind the asymmetry argument.

Midpoint values come from the same grid path as :mod:`torus_lp.rigor`, so any
disagreement between the two points at the classification margins rather than
at evaluation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .grid import GridSpec, tiles
from .sweep import MidpointField, map_tiles
from .trigpoly import TrigEigenfunction, build_psi, dilate, evaluate

PLUS, MINUS = "plus", "minus"
DEFAULT_TOLERANCE = 1e-6
MC_CHUNK = 1 << 16

_CACHE_LIMIT = 16
_moment_cache: dict[tuple, dict[float, np.ndarray]] = {}


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    method: str  # "midpoint" | "monte_carlo"
    count: int  # N for midpoint, samples for Monte Carlo


@dataclass(frozen=True)
class CheckReport:
    name: str
    passed: bool
    value: float
    tolerance: float
    details: dict = field(default_factory=dict)
    skipped: bool = False

    def line(self) -> str:
        status = "SKIP" if self.skipped else ("PASS" if self.passed else "FAIL")
        return f"{status:4}  {self.name:<44} value={self.value:.3e}  tol={self.tolerance:.1e}"


def _side(sign: str) -> int:
    if sign not in (PLUS, MINUS):
        raise ValueError(f"sign must be 'plus' or 'minus', got {sign!r}")
    return 0 if sign == PLUS else 1


def midpoint_moments(f: TrigEigenfunction, spec: GridSpec, exponents: Sequence[float],
                     workers: int | None = None) -> dict[float, np.ndarray]:
    """Per exponent: ``[int f+^p, int f-^p, int f+^p log f+, int f-^p log f-]`` by midpoint rule.

    Results are memoised per (f, grid) so repeated checks share one sweep per exponent.
    """
    key = (f, spec)
    known = _moment_cache.setdefault(key, {})
    todo = sorted({float(p) for p in exponents} - known.keys())
    if todo:
        fld = MidpointField(f, spec)
        exps = np.array(todo, dtype=np.float64)
        parts = map_tiles(lambda t: kernels.moments_tile(*fld.kernel_args(t), exps),
                          tiles(spec, 64), workers)
        total = np.zeros((4, len(todo)))
        for part in parts:
            total = total + part
        total = total * spec.cell_volume
        for e, p in enumerate(todo):
            known[p] = total[:, e].copy()
        if len(_moment_cache) > _CACHE_LIMIT:
            _moment_cache.pop(next(iter(_moment_cache)))
    return {float(p): known[float(p)] for p in exponents}


def riemann_estimate(f: TrigEigenfunction, spec: GridSpec, p: float, sign: str) -> Estimate:
    """``l^d * sum over midpoints of max(+-f, 0)^p`` (for p = 0, the cells where it is positive)."""
    if p < 0:
        raise ValueError("p must be nonnegative")
    m = midpoint_moments(f, spec, [p])[float(p)]
    return Estimate(float(m[_side(sign)]), 0.0, "midpoint", spec.cells_per_axis)


def mc_estimate(f: TrigEigenfunction, p: float, sign: str, samples: int, seed: int) -> Estimate:
    """Uniform Monte Carlo on [0,1)^d with one seeded substream per fixed-size chunk."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    side = _side(sign)
    n_chunks = -(-samples // MC_CHUNK)
    streams = np.random.SeedSequence(seed).spawn(n_chunks)
    s1 = s2 = 0.0
    for c, ss in enumerate(streams):
        n = min(MC_CHUNK, samples - c * MC_CHUNK)
        x = np.random.default_rng(ss).random((n, f.dimension))
        v = evaluate(f, x)
        v = v if side == 0 else -v
        w = np.where(v > 0, np.abs(v) ** p, 0.0)
        s1 += float(w.sum())
        s2 += float((w * w).sum())
    mean = s1 / samples
    var = max(s2 / samples - mean * mean, 0.0)
    stderr = math.sqrt(var / (samples - 1)) if samples > 1 else math.inf
    return Estimate(mean, stderr, "monte_carlo", samples)


def ratio_f(m: dict[float, np.ndarray], p: float) -> float:
    return float(m[p - 1.0][0] / m[p][0])


def ratio_g(m: dict[float, np.ndarray], q: float) -> float:
    return float(m[q + 1.0][1] / m[q][1])


def derivative_identity_check(f: TrigEigenfunction, p: float, spec: GridSpec, h: float = 1e-4,
                              tolerance: float = 1e-4) -> CheckReport:
    """Central difference of ``R(p) = int f+^p / int f-^p`` against
    ``R(p) (int f+^p log f+ / int f+^p - int f-^p log f- / int f-^p)``.

    Log integrands are taken over the sets where f+ (resp. f-) is positive.
    """
    if not p > max(1.0, h):
        raise ValueError("need p > max(1, h)")
    m = midpoint_moments(f, spec, [p - h, p, p + h])

    def ratio(q):
        return m[q][0] / m[q][1]

    fd = (ratio(p + h) - ratio(p - h)) / (2 * h)
    ip, im, jp, jm = m[float(p)]
    rhs = ratio(p) * (jp / ip - jm / im)
    rel = abs(fd - rhs) / max(abs(rhs), 1e-300)
    return CheckReport(f"derivative identity p={p:g} N={spec.cells_per_axis}", bool(rel < tolerance),
                       float(rel), tolerance,
                       {"finite_difference": float(fd), "identity": float(rhs), "h": h})


def monotonicity_scan(f: TrigEigenfunction, p_grid: Sequence[float], spec: GridSpec,
                      tau: float = DEFAULT_TOLERANCE) -> CheckReport:
    """f must not increase on ``p >= 1`` and g must not decrease on ``q >= 0``, up to ``tau``."""
    grid = [float(p) for p in p_grid]
    if grid != sorted(grid):
        raise ValueError("p_grid must be sorted ascending")
    f_pts = [p for p in grid if p >= 1]
    g_pts = [q for q in grid if q >= 0]
    need = {p - 1 for p in f_pts} | set(f_pts) | set(g_pts) | {q + 1 for q in g_pts}
    m = midpoint_moments(f, spec, sorted(need))
    fv = [ratio_f(m, p) for p in f_pts]
    gv = [ratio_g(m, q) for q in g_pts]
    violations = []
    for (a, fa), (b, fb) in zip(zip(f_pts, fv), zip(f_pts[1:], fv[1:])):
        if fa < fb - tau:
            violations.append(("f", a, b, fa, fb))
    for (a, ga), (b, gb) in zip(zip(g_pts, gv), zip(g_pts[1:], gv[1:])):
        if ga > gb + tau:
            violations.append(("g", a, b, ga, gb))
    return CheckReport(f"monotonicity N={spec.cells_per_axis}", not violations,
                       float(len(violations)), tau,
                       {"f": dict(zip(f_pts, fv)), "g": dict(zip(g_pts, gv)),
                        "violations": violations})


def cauchy_schwarz_check(f: TrigEigenfunction, p: float, eps: float, sign: str,
                         spec: GridSpec) -> CheckReport:
    """``(int v^p)^2 <= int v^(p-eps) * int v^(p+eps)`` with relative slack 1e-10."""
    if p - eps < 0:
        raise ValueError("need p - eps >= 0")
    side = _side(sign)
    m = midpoint_moments(f, spec, [p - eps, p, p + eps])
    lhs = float(m[float(p)][side]) ** 2
    rhs = float(m[float(p - eps)][side] * m[float(p + eps)][side])
    tau = 1e-10 * rhs
    details = {"lhs": lhs, "rhs": rhs}
    name = f"Cauchy-Schwarz p={p:g} eps={eps:g} {sign} N={spec.cells_per_axis}"
    if eps == 0:
        return CheckReport(name, abs(lhs - rhs) <= tau, abs(lhs - rhs), tau, details)
    return CheckReport(name, lhs <= rhs + tau, lhs - rhs, tau, details)


def dilation_invariance_check(f: TrigEigenfunction, n: int, spec: GridSpec, p: float,
                              tolerance: float = 1e-10) -> CheckReport:
    """Midpoint masses of ``f(n x)`` and ``f(x)`` agree when x -> n x permutes the midpoints."""
    name = f"dilation n={n} p={p:g} N={spec.cells_per_axis}"
    if n % 2 == 0 or math.gcd(n, spec.cells_per_axis) != 1:
        return CheckReport(name, False, math.nan, tolerance,
                           {"reason": f"gcd({n}, 2N) != 1: x -> {n}x does not permute midpoints"},
                           skipped=True)
    base = midpoint_moments(f, spec, [p])[float(p)]
    scaled = midpoint_moments(dilate(f, n), spec, [p])[float(p)]
    rel = max(abs(scaled[s] - base[s]) / abs(base[s]) for s in (0, 1))
    return CheckReport(name, bool(rel < tolerance), float(rel), tolerance,
                       {"plus": (float(base[0]), float(scaled[0])),
                        "minus": (float(base[1]), float(scaled[1]))})


# --- analytic identities for the built-in eigenfunction -----------------------


def mean_zero_check(f: TrigEigenfunction, spec: GridSpec, tolerance: float = 1e-12) -> CheckReport:
    m = midpoint_moments(f, spec, [1.0])[1.0]
    mean = float(m[0] - m[1])
    return CheckReport(f"mean zero N={spec.cells_per_axis}", abs(mean) < tolerance, abs(mean),
                       tolerance)


def parseval_check(f: TrigEigenfunction, spec: GridSpec, tolerance: float = 0.02) -> CheckReport:
    """Midpoint ``int f^2`` against ``sum c_i^2 / 2``."""
    m = midpoint_moments(f, spec, [2.0])[2.0]
    exact = 0.5 * sum(t.coefficient ** 2 for t in f.terms)
    err = abs(float(m[0] + m[1]) - exact)
    return CheckReport(f"Parseval N={spec.cells_per_axis}", err < tolerance, err, tolerance,
                       {"exact": exact})


def diagonal_check(samples: int = 10_000, seed: int = 0) -> CheckReport:
    """The built-in eigenfunction is -1 on the diagonal (t, t, t)."""
    psi = build_psi()
    t = np.random.default_rng(seed).random(samples)
    v = evaluate(psi, np.stack([t, t, t], axis=-1))
    err = float(np.max(np.abs(v + 1.0)))
    tol = 4 * np.spacing(1.0)
    return CheckReport("diagonal value -1", err <= tol, err, float(tol))


def mc_agreement_check(f: TrigEigenfunction, spec: GridSpec, p: float, sign: str,
                       samples: int, seed: int, k: float = 5.0) -> CheckReport:
    mid = riemann_estimate(f, spec, p, sign)
    mc = mc_estimate(f, p, sign, samples, seed)
    z = abs(mc.value - mid.value) / mc.stderr
    return CheckReport(f"MC vs midpoint p={p:g} {sign}", bool(z < k), float(z), k,
                       {"midpoint": mid.value, "monte_carlo": mc.value, "stderr": mc.stderr})


def check_all(f: TrigEigenfunction, spec: GridSpec, seed: int = 1,
              mc_samples: int = 1_000_000) -> list[CheckReport]:
    """Every oracle check at grid ``spec``; identities specific to the built-in eigenfunction run only for it."""
    out = []
    if f == build_psi():
        out.append(diagonal_check(seed=seed))
        out.append(mean_zero_check(f, GridSpec(64, f.dimension)))
        out.append(parseval_check(f, spec))
    for p in (1.5, 2.0, 2.5):
        out.append(derivative_identity_check(f, p, spec))
    out.append(monotonicity_scan(f, [1, 1.5, 2, 2.5, 3, 4], spec))
    for p, eps in ((1, 1), (2, 0.5), (3, 1)):
        for sign in (PLUS, MINUS):
            out.append(cauchy_schwarz_check(f, p, eps, sign, spec))
    n = next(n for n in (7, 11, 13, 17, 19, 23) if math.gcd(n, spec.cells_per_axis) == 1)
    out.append(dilation_invariance_check(f, n, spec, 2.0))
    out.append(mc_agreement_check(f, spec, 2.0, PLUS, mc_samples, seed))
    return out
