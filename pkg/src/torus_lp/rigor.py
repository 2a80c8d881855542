"""Certified enclosures of the L^p masses of f_+ and f_- from a midpoint sweep.

Every cell midpoint value is classified against the inflated threshold
``1.1 alpha``. Positive cells add ``(|v| + 1.1a)^p`` to the upper sum and
``(|v| - 1.1a)^p`` to the lower sum (negative cells likewise on the minus
side); cells near zero are only counted and charged ``(2.2a)^p`` each when
the upper bounds are formed.

The floating-point error of the whole computation is bounded a priori by an
:class:`ErrorLedger`, built with exact rational arithmetic from the rules
``E(Q+R) = E(Q) + E(R)`` and ``E(QR) = (|Q|+E(Q))(|R|+E(R)) - |QR|`` plus one
unit roundoff per floating operation.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import kernels
from ._fp import EPS, UNIT, down, gamma, up
from .grid import GridSpec, Tile, tiles as make_tiles
from .sweep import MidpointField, map_tiles
from .trigpoly import (TABLE_PRECISION_BITS, LipschitzBound, TrigEigenfunction,
                       coefficient_sup_bound, cube_variation_bound)

log = logging.getLogger(__name__)

PAPER_EXPONENTS = (0, 1, 2, 3, 4)
CLASSIFY_FACTOR = Fraction(11, 10)
REMAINDER_FACTOR = Fraction(11, 5)
EVAL_MARGIN = Fraction(1, 20)
TOTAL_ERROR_LIMIT = Fraction(1, 100)
# fixed so that the tiling, hence every rounding, is the same for any worker count
DEFAULT_TILES = 64


def classification_threshold(alpha: float) -> float:
    """``1.1 alpha`` rounded up."""
    return up(CLASSIFY_FACTOR * Fraction(alpha))


def remainder_radius(alpha: float) -> float:
    """``2.2 alpha`` rounded up; bounds |f| on every unclassified cube."""
    return up(REMAINDER_FACTOR * Fraction(alpha))


# --- accumulation -------------------------------------------------------------


@dataclass(frozen=True)
class SignedAccumulator:
    exponents: tuple[float, ...]
    s_u_plus: tuple[float, ...]
    s_l_plus: tuple[float, ...]
    s_u_minus: tuple[float, ...]
    s_l_minus: tuple[float, ...]
    s_n: int = 0
    positive: int = 0
    negative: int = 0
    cells_seen: int = 0
    # computed midpoint extremes; feed the sup-norm bound
    min_value: float = math.inf
    max_value: float = -math.inf

    @classmethod
    def zero(cls, exponents: Sequence[float]) -> "SignedAccumulator":
        exps = tuple(float(p) for p in exponents)
        z = (0.0,) * len(exps)
        return cls(exps, z, z, z, z)

    def merge(self, other: "SignedAccumulator") -> "SignedAccumulator":
        return merge(self, other)


def merge(a: SignedAccumulator, b: SignedAccumulator) -> SignedAccumulator:
    """Componentwise sum. Fold tiles left to right in canonical order for reproducible output."""
    if a.exponents != b.exponents:
        raise ValueError(f"exponent lists differ: {a.exponents} vs {b.exponents}")

    def add(x, y):
        return tuple(float(u + v) for u, v in zip(x, y))

    return SignedAccumulator(
        a.exponents,
        add(a.s_u_plus, b.s_u_plus), add(a.s_l_plus, b.s_l_plus),
        add(a.s_u_minus, b.s_u_minus), add(a.s_l_minus, b.s_l_minus),
        a.s_n + b.s_n, a.positive + b.positive, a.negative + b.negative,
        a.cells_seen + b.cells_seen,
        min(a.min_value, b.min_value), max(a.max_value, b.max_value),
    )


def _check_exponents(exponents) -> tuple[float, ...]:
    exps = tuple(float(p) for p in exponents)
    if not exps:
        raise ValueError("need at least one exponent")
    for p in exps:
        if not (p >= 0 and math.isfinite(p)):
            raise ValueError(f"exponents must be finite and nonnegative, got {p}")
    return exps


def classify_and_accumulate(f: TrigEigenfunction, spec: GridSpec, tile: Tile, alpha: float,
                            exponents: Sequence[float], *,
                            field_: MidpointField | None = None) -> SignedAccumulator:
    """Sweep one tile. ``alpha`` must be an upward-safe cube variation bound for ``f``."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    exps = _check_exponents(exponents)
    fld = field_ or MidpointField(f, spec)
    e_arr, chain_p, max_chain = kernels.chain_plan(exps)
    sums, counts, extremes, bad = kernels.classify_tile(
        *fld.kernel_args(tile), classification_threshold(alpha), e_arr, chain_p, max_chain)
    if bad >= 0:
        raise FloatingPointError(
            f"non-finite value at cell {_unflatten(tile, int(bad))}")
    vol = spec.cell_volume
    s = [tuple(float(x) * vol for x in sums[c]) for c in range(4)]
    pos, neg, null = (int(c) for c in counts)
    return SignedAccumulator(exps, s[0], s[1], s[2], s[3], null, pos, neg, tile.size,
                             float(extremes[0]), float(extremes[1]))


def _unflatten(tile: Tile, flat: int) -> tuple[int, ...]:
    local = np.unravel_index(flat, tile.shape)
    return tuple(int(i) + a for i, (a, _) in zip(local, tile.ranges))


def sweep(f: TrigEigenfunction, spec: GridSpec, alpha: float, exponents: Sequence[float], *,
          tile_list: Sequence[Tile] | None = None, workers: int | None = None) -> SignedAccumulator:
    """Full-grid accumulator: per-tile kernels, then a left fold in canonical tile order."""
    tile_list = list(tile_list) if tile_list is not None else make_tiles(spec, 1)
    fld = MidpointField(f, spec)
    parts = map_tiles(lambda t: classify_and_accumulate(f, spec, t, alpha, exponents, field_=fld),
                      tile_list, workers)
    acc = SignedAccumulator.zero(exponents)
    for part in parts:
        acc = merge(acc, part)
    return acc


# --- error ledger -------------------------------------------------------------


@dataclass(frozen=True)
class Approx:
    """A computed quantity: magnitude bound of the exact value and bound on |exact - computed|."""

    mag: Fraction
    err: Fraction = Fraction(0)

    def __add__(self, other: "Approx") -> "Approx":
        mag = self.mag + other.mag
        return Approx(mag, self.err + other.err + UNIT * (mag + self.err + other.err))

    def __mul__(self, other: "Approx") -> "Approx":
        exact = self.mag * other.mag
        hi = (self.mag + self.err) * (other.mag + other.err)
        return Approx(exact, hi - exact + UNIT * hi)

    def power(self, p: int) -> "Approx":
        """x^p by repeated multiplication; x^0 = 1 exactly."""
        if p == 0:
            return Approx(Fraction(1))
        out = self
        for _ in range(p - 1):
            out = out * self
        return out


def _power_noninteger(x: Approx, p: float) -> Approx:
    # platform pow, charged 4 ulps (8 u) of the result
    hi = up(x.mag + x.err)
    mag = Fraction(up(Fraction(hi ** p) * (1 + 16 * UNIT)))
    e = float(up(x.err))
    if p >= 1:
        prop = p * hi ** (p - 1) * e
    else:
        prop = e ** p
    err = Fraction(up(Fraction(prop * (1 + 16 * EPS)))) + 8 * UNIT * mag
    return Approx(mag, err)


def midpoint_eval_error(f: TrigEigenfunction) -> Approx:
    """Error of the grid-path value ``sum_i c_i * table[m_i]`` at any midpoint.

    Table entries are a 130-bit value rounded to nearest; the phase reduction is
    exact integer arithmetic, so the bound does not depend on N or on dilation.
    """
    table = Approx(Fraction(1), UNIT + Fraction(1, 2 ** (TABLE_PRECISION_BITS - 10)))
    total = Approx(Fraction(0))
    for t in f.terms:
        total = total + Approx(abs(Fraction(t.coefficient))) * table
    return total


@dataclass(frozen=True)
class ErrorLedger:
    machine_epsilon: float
    eval_error: float
    per_term_error: float
    remainder_term_error: float
    summation_error: float
    total_bound_error: float
    # per-exponent breakdown, aligned with ``exponents``
    exponents: tuple[float, ...] = ()
    total_by_exponent: tuple[float, ...] = ()
    summation_depth: int = 0
    assumptions: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "machine_epsilon": self.machine_epsilon,
            "eval_error": self.eval_error,
            "per_term_error": self.per_term_error,
            "remainder_term_error": self.remainder_term_error,
            "summation_error": self.summation_error,
            "total_bound_error": self.total_bound_error,
            "exponents": list(self.exponents),
            "total_by_exponent": list(self.total_by_exponent),
            "summation_depth": self.summation_depth,
            "assumptions": list(self.assumptions),
        }


LEDGER_ASSUMPTIONS = (
    "IEEE binary64 round-to-nearest, no FMA contraction in the sweep kernels",
    "table entries are 130-bit mpmath sin/cos values rounded to nearest",
    "platform pow (non-integer exponents only) is accurate to 4 ulps",
)


def summation_depth(spec: GridSpec, tile_list: Sequence[Tile] | None = None) -> int:
    """Longest chain of additions a single cell term passes through, including the tile fold."""
    tile_list = list(tile_list) if tile_list is not None else [spec.full_tile()]
    d = spec.dimension
    deepest = 0
    for t in tile_list:
        shape = t.shape
        k = shape[-1]
        j = shape[-2] if d >= 2 else 1
        p = math.prod(shape[:-2]) if d >= 3 else 1
        deepest = max(deepest, k + j + p)
    return deepest + len(tile_list)


def build_ledger(f: TrigEigenfunction, spec: GridSpec, alpha: float, exponents: Sequence[float],
                 s_n: int, tile_list: Sequence[Tile] | None = None) -> ErrorLedger:
    """A-priori float error bound for the bounds table produced by :func:`sweep`."""
    exps = _check_exponents(exponents)
    e_psi = midpoint_eval_error(f)
    thresh = Fraction(classification_threshold(alpha))
    radius = Approx(Fraction(remainder_radius(alpha)))
    vol = Fraction(1, spec.cell_count)
    vol_f = Approx(vol, abs(Fraction(spec.cell_volume) - vol))
    sup = Fraction(coefficient_sup_bound(f))
    # |v| + T and |v| - T share this bound; |v| itself is exact negation of v
    base = Approx(sup, e_psi.err) + Approx(thresh)

    depth = summation_depth(spec, tile_list)
    try:
        # +3: scaling by the cell volume, its own rounding, and U = S_U + remainder
        g = gamma(depth + 3)
    except ValueError:
        g = None

    per_term, remainder, summ, totals = [], [], [], []
    for p in exps:
        if float(p).is_integer() and p <= kernels.MAX_CHAIN_POWER:
            term = base.power(int(p))
            rem = radius.power(int(p))
        else:
            term = _power_noninteger(base, p)
            rem = _power_noninteger(radius, p)
        term_err = vol * term.err
        rem_cell = rem * vol_f
        rem_err = rem_cell.err + UNIT * (rem_cell.mag + rem_cell.err)
        # every cell contributes at most vol * max(term, remainder); N^d cells of volume 1/N^d
        mass = max(term.mag + term.err, rem.mag + rem.err)
        s_err = g * mass if g is not None else None
        per_term.append(term_err)
        remainder.append(rem_err)
        summ.append(s_err)
        if s_err is None:
            totals.append(math.inf)
        else:
            totals.append(up(spec.cell_count * term_err + s_n * rem_err + s_err))

    finite = [s for s in summ if s is not None]
    return ErrorLedger(
        machine_epsilon=EPS,
        eval_error=up(e_psi.err),
        per_term_error=up(max(per_term)),
        remainder_term_error=up(max(remainder)),
        summation_error=up(max(finite)) if len(finite) == len(summ) else math.inf,
        total_bound_error=max(totals),
        exponents=exps,
        total_by_exponent=tuple(totals),
        summation_depth=depth,
        assumptions=LEDGER_ASSUMPTIONS,
    )


@dataclass(frozen=True)
class MarginReport:
    eval_error: float
    eval_limit: float
    eval_ok: bool
    total_error: float
    total_limit: float
    total_ok: bool

    @property
    def passed(self) -> bool:
        return self.eval_ok and self.total_ok

    def to_dict(self) -> dict:
        return {
            "eval_error": self.eval_error, "eval_limit": self.eval_limit, "eval_ok": self.eval_ok,
            "total_error": self.total_error, "total_limit": self.total_limit,
            "total_ok": self.total_ok, "passed": self.passed,
        }


def check_margins(ledger: ErrorLedger, alpha: float) -> MarginReport:
    """Classification safety (eval error < 0.05 alpha) and bound accuracy (total < 0.01)."""
    eval_limit = EVAL_MARGIN * Fraction(alpha)
    eval_ok = math.isfinite(ledger.eval_error) and Fraction(ledger.eval_error) < eval_limit
    total_ok = (math.isfinite(ledger.total_bound_error)
                and Fraction(ledger.total_bound_error) < TOTAL_ERROR_LIMIT)
    return MarginReport(ledger.eval_error, down(eval_limit), eval_ok,
                        ledger.total_bound_error, float(TOTAL_ERROR_LIMIT), total_ok)


# --- bounds -------------------------------------------------------------------


@dataclass(frozen=True)
class BoundsRow:
    p: float
    L_plus: float
    U_plus: float
    L_minus: float
    U_minus: float

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.p, self.L_plus, self.U_plus, self.L_minus, self.U_minus)


def finalize_bounds(acc: SignedAccumulator, alpha: float, spec: GridSpec,
                    ledger: ErrorLedger | None = None) -> list[BoundsRow]:
    """``U = S_U + S_N (2.2a)^p l^d``, ``L = S_L``, then widened outward by the ledger total."""
    if acc.cells_seen != spec.cell_count:
        raise ValueError(
            f"accumulator covers {acc.cells_seen} of {spec.cell_count} cells")
    vol = spec.cell_volume
    radius = remainder_radius(alpha)
    rows = []
    for e, p in enumerate(acc.exponents):
        if p.is_integer() and p <= kernels.MAX_CHAIN_POWER:
            rp = 1.0
            for _ in range(int(p)):
                rp = rp * radius
        else:
            rp = radius ** p
        rem = (rp * vol) * acc.s_n
        u_plus = acc.s_u_plus[e] + rem
        u_minus = acc.s_u_minus[e] + rem
        widen = Fraction(ledger.total_by_exponent[e]) if ledger is not None else Fraction(0)
        rows.append(BoundsRow(
            p,
            max(0.0, down(Fraction(acc.s_l_plus[e]) - widen)),
            up(Fraction(u_plus) + widen),
            max(0.0, down(Fraction(acc.s_l_minus[e]) - widen)),
            up(Fraction(u_minus) + widen),
        ))
    return rows


# --- pipeline -----------------------------------------------------------------


@dataclass(frozen=True)
class BoundsTable:
    """One certified sweep: bounds, the accumulator behind them, ledger and margin verdicts."""

    eigenfunction: TrigEigenfunction
    spec: GridSpec
    lipschitz: LipschitzBound
    alpha: float
    rows: tuple[BoundsRow, ...]
    accumulator: SignedAccumulator
    ledger: ErrorLedger
    margins: MarginReport
    tile_count: int

    @property
    def s_n(self) -> int:
        return self.accumulator.s_n

    def row(self, p: float) -> BoundsRow:
        for r in self.rows:
            if r.p == p:
                return r
        raise KeyError(f"no row for p={p}")


def compute_bounds(f: TrigEigenfunction, spec: GridSpec, lipschitz: LipschitzBound,
                   exponents: Sequence[float] = PAPER_EXPONENTS, *,
                   tile_count: int | None = None, workers: int | None = None) -> BoundsTable:
    """Sweep the whole grid and return the certified bounds table."""
    tile_count = tile_count or DEFAULT_TILES
    alpha = cube_variation_bound(lipschitz, spec.side, spec.dimension)
    tile_list = make_tiles(spec, tile_count)
    log.info("sweep N=%d d=%d alpha=%.6g tiles=%d",
             spec.cells_per_axis, spec.dimension, alpha, len(tile_list))
    acc = sweep(f, spec, alpha, exponents, tile_list=tile_list, workers=workers)
    ledger = build_ledger(f, spec, alpha, exponents, acc.s_n, tile_list)
    rows = finalize_bounds(acc, alpha, spec, ledger)
    return BoundsTable(f, spec, lipschitz, alpha, tuple(rows), acc, ledger,
                       check_margins(ledger, alpha), len(tile_list))


# --- paranoid self-audit ------------------------------------------------------


@dataclass(frozen=True)
class AuditReport:
    """Observed errors (against interval enclosures of the exact values) next to the ledger."""

    max_eval_error: float
    eval_bound: float
    sum_deviation: tuple[float, ...]
    sum_bound: tuple[float, ...]

    @property
    def passed(self) -> bool:
        return (self.max_eval_error <= self.eval_bound
                and all(d <= b for d, b in zip(self.sum_deviation, self.sum_bound)))


def paranoid_audit(f: TrigEigenfunction, spec: GridSpec, alpha: float,
                   exponents: Sequence[float], *, max_cells: int = 50_000,
                   precision: int = 80) -> AuditReport:
    """Redo a sweep cell by cell in outward-rounded interval arithmetic.

    Checks that every computed midpoint value lies within ``eval_error`` of the
    exact value and that each accumulated upper/lower sum lies within the
    ledger total of the exact sum of its terms. Meant for small grids only.
    """
    from mpmath import iv

    from .trigpoly import SINE, evaluate_midpoints

    if spec.cell_count > max_cells:
        raise ValueError(f"audit limited to {max_cells} cells, grid has {spec.cell_count}")
    exps = _check_exponents(exponents)
    tile = spec.full_tile()
    acc = classify_and_accumulate(f, spec, tile, alpha, exps)
    ledger = build_ledger(f, spec, alpha, exps, acc.s_n, [tile])
    thresh = classification_threshold(alpha)
    n, two_n = spec.cells_per_axis, 2 * spec.cells_per_axis
    idx = np.indices((n,) * spec.dimension).reshape(spec.dimension, -1).T
    values = evaluate_midpoints(f, n, idx)

    def spread(x: float, ref) -> float:
        # largest |x - y| over y in ref, rounded up
        d = iv.mpf(x) - ref
        return math.nextafter(float(max(abs(d.a), abs(d.b))), math.inf)

    worst = 0.0
    saved = iv.prec
    iv.prec = precision
    try:
        sums = [[iv.mpf(0) for _ in exps] for _ in range(4)]
        two_pi = 2 * iv.pi
        vol = iv.mpf(1) / spec.cell_count
        t_iv = iv.mpf(thresh)
        for cell, v in zip(idx, values):
            exact = iv.mpf(0)
            for t in f.terms:
                m = sum(k * (2 * int(i) + 1) for k, i in zip(t.frequency, cell)) % two_n
                arg = two_pi * iv.mpf(m) / two_n
                exact += t.coefficient * (iv.sin(arg) if t.kind == SINE else iv.cos(arg))
            worst = max(worst, spread(float(v), exact))
            if v > thresh:
                base = 0
            elif v < -thresh:
                base = 2
            else:
                continue
            mag = abs(exact)
            for e, p in enumerate(exps):
                hi = (mag + t_iv) ** p if p else iv.mpf(1)
                lo_base = mag - t_iv
                lo = (lo_base ** p if p else iv.mpf(1)) if lo_base.a >= 0 else iv.mpf(0)
                sums[base][e] += hi * vol
                sums[base + 1][e] += lo * vol
        computed = (acc.s_u_plus, acc.s_l_plus, acc.s_u_minus, acc.s_l_minus)
        deviation = tuple(max(spread(computed[c][e], sums[c][e]) for c in range(4))
                          for e in range(len(exps)))
    finally:
        iv.prec = saved
    return AuditReport(worst, ledger.eval_error, deviation, ledger.total_by_exponent)
