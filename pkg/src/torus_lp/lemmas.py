"""From certified bounds to the asymmetry certificate.

With ``f(p) = int f_+^{p-1} / int f_+^p`` and ``g(q) = int f_-^{q+1} / int f_-^q``
(f decreasing, g increasing), ``f(p) + g(p) < 2`` on ``[1, inf]`` follows from
three checks: ``f(1) + g(2)``, ``f(2) + g(3)`` and ``f(3) + ||f_-||_inf``.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from typing import Sequence

from . import __version__
from ._fp import EPS, down, up
from .grid import GridSpec
from .rigor import BoundsRow, BoundsTable, MarginReport
from .trigpoly import TrigEigenfunction, coefficient_sup_bound

RATIO_ROUNDING = 1.0 + 4.0 * EPS
CHAIN_THRESHOLD = 2.0

F_POINTS = (1, 2, 3)
G_POINTS = (2, 3)

MONOTONICITY_ASSUMPTION = (
    "f(p) = int f+^(p-1)/int f+^p is nonincreasing for p >= 1 and "
    "g(q) = int f-^(q+1)/int f-^q is nondecreasing for q >= 0 "
    "(Cauchy-Schwarz; analytic, not certified numerically)")

# Lemma-style thresholds recorded alongside the chain; "g_sup" is checked on the sup bound
LEMMA_THRESHOLDS = (("f", 1, 0.8), ("f", 2, 0.6), ("f", 3, 0.5),
                    ("g_sup", None, 1.52), ("g", 2, 1.2), ("g", 3, 1.3))


class CertificationError(ValueError):
    """A bound needed by the chain cannot be formed (e.g. a zero lower bound)."""


@dataclass(frozen=True)
class RatioBound:
    p: float
    kind: str  # "f" | "g"
    upper: float
    numerator_p: float
    denominator_p: float

    def to_dict(self) -> dict:
        return {"p": self.p, "kind": self.kind,
                "upper": self.upper if math.isfinite(self.upper) else None,
                "numerator_p": self.numerator_p, "denominator_p": self.denominator_p}


def _ratio_upper(num: float, den: float) -> float:
    return (num / den) * RATIO_ROUNDING


def ratio_bounds(rows: Sequence[BoundsRow], *, strict: bool = True) -> list[RatioBound]:
    """Upper bounds on f at p = 1, 2, 3 and g at q = 2, 3.

    ``f(p) <= U_+(p-1) / L_+(p)``, ``g(q) <= U_-(q+1) / L_-(q)``. A nonpositive
    denominator raises :class:`CertificationError`, or yields ``inf`` when
    ``strict`` is false.
    """
    by_p = {r.p: r for r in rows}
    missing = [p for p in (0, 1, 2, 3, 4) if float(p) not in by_p]
    if missing:
        raise CertificationError(f"bounds table lacks rows for p={missing}")
    out = []
    for p in F_POINTS:
        num, den = by_p[p - 1].U_plus, by_p[p].L_plus
        if den <= 0:
            if strict:
                raise CertificationError(f"L_plus(p={p}) = {den}: grid too coarse to bound f({p})")
            out.append(RatioBound(float(p), "f", math.inf, p - 1.0, float(p)))
            continue
        out.append(RatioBound(float(p), "f", _ratio_upper(num, den), p - 1.0, float(p)))
    for q in G_POINTS:
        num, den = by_p[q + 1].U_minus, by_p[q].L_minus
        if den <= 0:
            if strict:
                raise CertificationError(f"L_minus(p={q}) = {den}: grid too coarse to bound g({q})")
            out.append(RatioBound(float(q), "g", math.inf, q + 1.0, float(q)))
            continue
        out.append(RatioBound(float(q), "g", _ratio_upper(num, den), q + 1.0, float(q)))
    return out


@dataclass(frozen=True)
class SupBound:
    value: float
    method: str  # "grid_plus_alpha" | "coefficient_sum" | "analytic_supplied"
    candidates: tuple[tuple[str, float], ...] = ()

    def to_dict(self) -> dict:
        return {"value": self.value, "method": self.method,
                "candidates": {m: v for m, v in self.candidates}}


def grid_sup_negative(min_value: float, alpha: float, eval_error: float) -> float:
    """``max(-min v, 0) + alpha + eval_error`` rounded up: certified bound on ``||f_-||_inf``."""
    return up(Fraction(max(-min_value, 0.0)) + Fraction(alpha) + Fraction(eval_error))


def sup_bound_negative_part(f: TrigEigenfunction, spec: GridSpec, alpha: float, *,
                            analytic: float | None = None,
                            min_value: float | None = None,
                            eval_error: float | None = None,
                            use_grid: bool = True) -> SupBound:
    """Smallest available certified upper bound on ``||f_-||_inf``.

    ``min_value`` (the smallest computed midpoint value) is taken from a previous
    sweep when given, otherwise computed here. An ``analytic`` value is trusted
    as supplied and recorded as such.
    """
    candidates = [("coefficient_sum", coefficient_sup_bound(f))]
    if use_grid:
        if eval_error is None:
            from .rigor import midpoint_eval_error
            eval_error = up(midpoint_eval_error(f).err)
        if min_value is None:
            min_value = _midpoint_minimum(f, spec)
        candidates.append(("grid_plus_alpha", grid_sup_negative(min_value, alpha, eval_error)))
    if analytic is not None:
        candidates.append(("analytic_supplied", float(analytic)))
    method, value = min(candidates, key=lambda c: c[1])
    return SupBound(value, method, tuple(candidates))


def _midpoint_minimum(f: TrigEigenfunction, spec: GridSpec) -> float:
    from . import kernels
    from .grid import tiles
    from .sweep import MidpointField, map_tiles

    fld = MidpointField(f, spec)
    parts = map_tiles(lambda t: kernels.sup_tile(*fld.kernel_args(t)), tiles(spec, 64))
    return float(min(p[0] for p in parts))


@dataclass(frozen=True)
class ChainCheck:
    interval: str
    terms: tuple[str, str]
    lhs: float
    threshold: float
    slack: float
    passed: bool

    def to_dict(self) -> dict:
        finite = math.isfinite(self.lhs)
        return {"interval": self.interval, "terms": list(self.terms),
                "lhs": self.lhs if finite else None, "threshold": self.threshold,
                "slack": self.slack if finite else None, "passed": self.passed}


def _chain_check(interval: str, names: tuple[str, str], a: float, b: float) -> ChainCheck:
    if not (math.isfinite(a) and math.isfinite(b)):
        return ChainCheck(interval, names, math.inf, CHAIN_THRESHOLD, -math.inf, False)
    lhs = up(Fraction(a) + Fraction(b))
    slack = down(Fraction(CHAIN_THRESHOLD) - Fraction(lhs))
    return ChainCheck(interval, names, lhs, CHAIN_THRESHOLD, slack, lhs < CHAIN_THRESHOLD)


def chain_checks(ratios: Sequence[RatioBound], sup: SupBound) -> list[ChainCheck]:
    """The three interval checks covering ``[1,2]``, ``[2,3]`` and ``[3,inf]``."""
    table = {(r.kind, r.p): r.upper for r in ratios}
    need = [("f", 1.0), ("f", 2.0), ("f", 3.0), ("g", 2.0), ("g", 3.0)]
    absent = [f"{k}({p:g})" for k, p in need if (k, p) not in table]
    if absent:
        raise CertificationError(f"missing ratio bounds: {', '.join(absent)}")
    return [
        _chain_check("[1, 2]", ("f(1)", "g(2)"), table["f", 1.0], table["g", 2.0]),
        _chain_check("[2, 3]", ("f(2)", "g(3)"), table["f", 2.0], table["g", 3.0]),
        _chain_check("[3, inf]", ("f(3)", "sup f_-"), table["f", 3.0], sup.value),
    ]


def lemma_bounds(ratios: Sequence[RatioBound], sup: SupBound) -> list[dict]:
    table = {(r.kind, r.p): r.upper for r in ratios}
    out = []
    for kind, p, limit in LEMMA_THRESHOLDS:
        if kind == "g_sup":
            value, holds = sup.value, sup.value <= limit
            name = "sup g <= sup f_-"
        else:
            value = table[kind, float(p)]
            holds = value < limit
            name = f"{kind}({p})"
        out.append({"bound": name, "value": value if math.isfinite(value) else None,
                    "limit": limit, "holds": bool(holds)})
    return out


@dataclass
class Certificate:
    eigenfunction: dict
    grid: dict
    lipschitz: dict
    bounds: list[BoundsRow]
    s_n: int
    alpha: float
    ledger: dict
    margins: dict
    ratios: list[RatioBound]
    sup_bound: SupBound
    checks: list[ChainCheck]
    lemma: list[dict]
    verdict: str
    assumptions: list[str] = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    @property
    def verified(self) -> bool:
        return self.verdict == "verified"

    def to_dict(self) -> dict:
        return {
            "inputs": {
                "eigenfunction": self.eigenfunction,
                "grid": self.grid,
                "lipschitz": self.lipschitz,
                "alpha": self.alpha,
            },
            "bounds": {
                "columns": ["p", "L_plus", "U_plus", "L_minus", "U_minus"],
                "rows": [list(r.as_tuple()) for r in self.bounds],
                "S_N": self.s_n,
            },
            "ledger": {**self.ledger, "margins": self.margins},
            "ratios": [r.to_dict() for r in self.ratios],
            "sup_bound": self.sup_bound.to_dict(),
            "chain_checks": [c.to_dict() for c in self.checks],
            "lemma_bounds": self.lemma,
            "assumptions": self.assumptions,
            "verdict": self.verdict,
            "provenance": self.provenance,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False)


def verdict_of(margins_passed: bool, checks: Sequence[ChainCheck]) -> str:
    return "verified" if margins_passed and all(c.passed for c in checks) else "failed"


def verify_chain(ratios: Sequence[RatioBound], sup: SupBound, margins: MarginReport | dict,
                 *, table: BoundsTable | None = None) -> Certificate:
    """Run the three checks and assemble the certificate (verdict needs margins too)."""
    margin_dict = margins.to_dict() if isinstance(margins, MarginReport) else dict(margins)
    checks = chain_checks(ratios, sup)
    cert = Certificate(
        eigenfunction=table.eigenfunction.to_dict() if table else {},
        grid=({"cells_per_axis": table.spec.cells_per_axis, "dimension": table.spec.dimension,
               "tiles": table.tile_count} if table else {}),
        lipschitz=({"value": table.lipschitz.value, "provenance": table.lipschitz.provenance}
                   if table else {}),
        bounds=list(table.rows) if table else [],
        s_n=table.s_n if table else 0,
        alpha=table.alpha if table else math.nan,
        ledger=table.ledger.to_dict() if table else {},
        margins=margin_dict,
        ratios=list(ratios),
        sup_bound=sup,
        checks=checks,
        lemma=lemma_bounds(ratios, sup),
        verdict=verdict_of(bool(margin_dict["passed"]), checks),
        assumptions=[MONOTONICITY_ASSUMPTION],
    )
    if sup.method == "analytic_supplied":
        cert.assumptions.append(f"sup of f_- supplied externally as {sup.value!r}")
    return cert


def build_certificate(table: BoundsTable, *, analytic_sup: float | None = None,
                      use_grid_sup: bool = True, started: float | None = None) -> Certificate:
    """Certificate for a finished sweep; the grid sup bound reuses the sweep's minimum."""
    ratios = ratio_bounds(table.rows, strict=False)
    sup = sup_bound_negative_part(
        table.eigenfunction, table.spec, table.alpha, analytic=analytic_sup,
        min_value=table.accumulator.min_value, eval_error=table.ledger.eval_error,
        use_grid=use_grid_sup)
    cert = verify_chain(ratios, sup, table.margins, table=table)
    cert.provenance = {
        "package": "torus_lp",
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "wall_time_s": round(time.perf_counter() - started, 3) if started else None,
    }
    return cert


def recheck(doc: dict) -> str:
    """Recompute the verdict of a serialized certificate from its recorded bounds.

    Ratios and chain sums are re-derived from the ``bounds`` rows and the
    recorded sup bound; no sweep is rerun.
    """
    cols = doc["bounds"]["columns"]
    rows = [BoundsRow(*(r[cols.index(c)] for c in ("p", "L_plus", "U_plus", "L_minus", "U_minus")))
            for r in doc["bounds"]["rows"]]
    ratios = ratio_bounds(rows, strict=False)
    sup = SupBound(doc["sup_bound"]["value"], doc["sup_bound"]["method"])
    ledger = doc["ledger"]
    alpha = Fraction(doc["inputs"]["alpha"])
    margins_ok = (Fraction(ledger["eval_error"]) < alpha / 20
                  and Fraction(ledger["total_bound_error"]) < Fraction(1, 100))
    return verdict_of(margins_ok, chain_checks(ratios, sup))
