"""Trigonometric Laplace eigenfunctions on the flat torus R^d / Z^d."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Sequence

import mpmath
import numpy as np

from ._fp import PI_HI, sqrt_up, up

SINE = "sin"
COSINE = "cos"

PAPER_PSI = "paper-psi"


@dataclass(frozen=True)
class WaveTerm:
    """``coefficient * sin(2 pi <k, x>)`` or ``coefficient * cos(2 pi <k, x>)``."""

    coefficient: float
    kind: str
    frequency: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in (SINE, COSINE):
            raise ValueError(f"kind must be 'sin' or 'cos', got {self.kind!r}")
        freq = tuple(int(k) for k in self.frequency)
        if not freq or all(k == 0 for k in freq):
            raise ValueError("frequency must be a nonzero integer vector")
        object.__setattr__(self, "frequency", freq)
        object.__setattr__(self, "coefficient", float(self.coefficient))
        if not math.isfinite(self.coefficient):
            raise ValueError("coefficient must be finite")

    @property
    def norm_squared(self) -> int:
        return sum(k * k for k in self.frequency)


@dataclass(frozen=True)
class TrigEigenfunction:
    dimension: int
    terms: tuple[WaveTerm, ...]
    eigenvalue: float = field(init=False)

    def __post_init__(self):
        terms = tuple(self.terms)
        if self.dimension < 1:
            raise ValueError("dimension must be positive")
        if not terms:
            raise ValueError("an eigenfunction needs at least one term")
        for t in terms:
            if len(t.frequency) != self.dimension:
                raise ValueError(
                    f"frequency {t.frequency} does not have length {self.dimension}")
        norms = {t.norm_squared for t in terms}
        if len(norms) != 1:
            raise ValueError(f"terms do not share |k|^2 (got {sorted(norms)})")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "eigenvalue", 4.0 * math.pi**2 * norms.pop())

    @property
    def norm_squared(self) -> int:
        """Common squared frequency norm; eigenvalue is ``4 pi^2`` times this."""
        return self.terms[0].norm_squared

    def __call__(self, x):
        return evaluate(self, x)

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "terms": [
                {"coef": t.coefficient, "kind": t.kind, "k": list(t.frequency)}
                for t in self.terms
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "TrigEigenfunction":
        terms = [WaveTerm(t["coef"], t["kind"], tuple(t["k"])) for t in doc["terms"]]
        return cls(int(doc["dimension"]), tuple(terms))


@dataclass(frozen=True)
class LipschitzBound:
    value: float
    provenance: str  # "generic_triangle" | "user_supplied"

    def __post_init__(self):
        if not self.value > 0:
            raise ValueError("Lipschitz bound must be positive")
        if self.provenance not in ("generic_triangle", "user_supplied"):
            raise ValueError(f"unknown provenance {self.provenance!r}")


def build_psi() -> TrigEigenfunction:
    """sin(2 pi (x+y)) - cos(2 pi (y-z)) - sin(2 pi (x+z)) on T^3, eigenvalue 8 pi^2."""
    return TrigEigenfunction(3, (
        WaveTerm(1.0, SINE, (1, 1, 0)),
        WaveTerm(-1.0, COSINE, (0, 1, -1)),
        WaveTerm(-1.0, SINE, (1, 0, 1)),
    ))


def load_eigenfunction(source: str | Path | dict) -> TrigEigenfunction:
    """Resolve ``"paper-psi"``, a JSON file path, or an already-parsed document."""
    if isinstance(source, dict):
        return TrigEigenfunction.from_dict(source)
    if str(source) == PAPER_PSI:
        return build_psi()
    return TrigEigenfunction.from_dict(json.loads(Path(source).read_text()))


def _phases(f: TrigEigenfunction, x: np.ndarray) -> np.ndarray:
    # <k, x> reduced mod 1, accumulated axis by axis in a fixed order
    out = np.empty((len(f.terms),) + x.shape[:-1])
    for i, t in enumerate(f.terms):
        s = t.frequency[0] * x[..., 0]
        for a in range(1, f.dimension):
            s = s + t.frequency[a] * x[..., a]
        out[i] = s - np.floor(s)
    return out


def evaluate(f: TrigEigenfunction, x) -> float | np.ndarray:
    """Value of ``f`` at a point (shape ``(d,)``) or at many points (shape ``(..., d)``)."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (f.dimension,):
        raise ValueError(f"expected points of dimension {f.dimension}, got shape {x.shape}")
    phases = _phases(f, x)
    total = np.zeros(x.shape[:-1])
    for t, ph in zip(f.terms, phases):
        trig = np.sin if t.kind == SINE else np.cos
        total = total + t.coefficient * trig(2.0 * np.pi * ph)
    return float(total) if total.ndim == 0 else total


def gradient(f: TrigEigenfunction, x) -> np.ndarray:
    """Analytic gradient, shape ``(..., d)``."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (f.dimension,):
        raise ValueError(f"expected points of dimension {f.dimension}, got shape {x.shape}")
    phases = _phases(f, x)
    g = np.zeros(x.shape)
    for t, ph in zip(f.terms, phases):
        k = np.asarray(t.frequency, dtype=float)
        if t.kind == SINE:
            d = np.cos(2.0 * np.pi * ph)
        else:
            d = -np.sin(2.0 * np.pi * ph)
        g = g + (2.0 * np.pi * t.coefficient * d)[..., None] * k
    return g


def gradient_norm_bound(f: TrigEigenfunction, override: float | None = None) -> LipschitzBound:
    """Triangle-inequality bound ``2 pi sum |c_i| |k_i|``, rounded up.

    ``override`` installs a caller-supplied bound instead (e.g. ``6 pi`` for
    the built-in eigenfunction); it is recorded as ``user_supplied``.
    """
    if override is not None:
        return LipschitzBound(float(override), "user_supplied")
    total = sum(abs(Fraction(t.coefficient)) * sqrt_up(t.norm_squared) for t in f.terms)
    return LipschitzBound(up(2 * PI_HI * total), "generic_triangle")


def paper_lipschitz() -> float:
    """``6 pi`` rounded up to the next float."""
    return up(6 * PI_HI)


def cube_variation_bound(lipschitz: LipschitzBound | float, side: float, dimension: int) -> float:
    """Upward-rounded ``L * sqrt(d) * side / 2``: maximal deviation from a cube's midpoint value."""
    if not side > 0:
        raise ValueError("cube side must be positive")
    value = lipschitz.value if isinstance(lipschitz, LipschitzBound) else float(lipschitz)
    if not value > 0:
        raise ValueError("Lipschitz bound must be positive")
    return up(Fraction(value) * sqrt_up(dimension) * Fraction(side) / 2)


def dilate(f: TrigEigenfunction, n: int) -> TrigEigenfunction:
    """``x -> f(n x)``; frequencies scale by ``n``, the eigenvalue by ``n^2``."""
    if n < 1:
        raise ValueError("dilation factor must be >= 1")
    return TrigEigenfunction(f.dimension, tuple(
        WaveTerm(t.coefficient, t.kind, tuple(n * k for k in t.frequency)) for t in f.terms))


def coefficient_sup_bound(f: TrigEigenfunction) -> float:
    return up(sum(abs(Fraction(t.coefficient)) for t in f.terms))


# --- midpoint evaluation with exact argument reduction -----------------------
#
# At the midpoint ((2 i_1 + 1) / 2N, ...) the phase <k, x> equals m / 2N with
# m = sum_a k_a (2 i_a + 1) an integer, so the reduction mod 1 is exact integer
# arithmetic and every trig value comes from a table of sin(pi m / N),
# cos(pi m / N), m = 0 .. 2N-1, each correctly rounded from a 130-bit value.

TABLE_PRECISION_BITS = 130


@lru_cache(maxsize=8)
def wave_tables(cells_per_axis: int) -> tuple[np.ndarray, np.ndarray]:
    """Sine and cosine tables at the phases ``m / 2N``; entries are read-only."""
    n = cells_per_axis
    sin_tab = np.empty(2 * n)
    cos_tab = np.empty(2 * n)
    with mpmath.workprec(TABLE_PRECISION_BITS):
        for m in range(2 * n):
            arg = mpmath.pi * m / n
            sin_tab[m] = float(_mpf_to_fraction(mpmath.sin(arg)))
            cos_tab[m] = float(_mpf_to_fraction(mpmath.cos(arg)))
    sin_tab.setflags(write=False)
    cos_tab.setflags(write=False)
    return sin_tab, cos_tab


def _mpf_to_fraction(v) -> Fraction:
    sign, man, exp, _ = v._mpf_
    if man == 0:
        return Fraction(0)
    q = Fraction(man) * Fraction(2) ** exp
    return -q if sign else q


def midpoint_residues(f: TrigEigenfunction, cells_per_axis: int) -> np.ndarray:
    """``k_a (2 i + 1) mod 2N`` for every term, axis and index: int64 array ``(terms, d, N)``."""
    two_n = 2 * cells_per_axis
    odd = 2 * np.arange(cells_per_axis, dtype=np.int64) + 1
    out = np.empty((len(f.terms), f.dimension, cells_per_axis), dtype=np.int64)
    for i, t in enumerate(f.terms):
        for a, k in enumerate(t.frequency):
            out[i, a] = ((k % two_n) * odd) % two_n
    return out


def term_arrays(f: TrigEigenfunction) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients and a 1/0 sine mask, in term order."""
    coefs = np.array([t.coefficient for t in f.terms], dtype=np.float64)
    is_sin = np.array([t.kind == SINE for t in f.terms], dtype=np.int64)
    return coefs, is_sin


def evaluate_midpoints(f: TrigEigenfunction, cells_per_axis: int, indices) -> np.ndarray:
    """Grid-path values at integer cell indices (shape ``(..., d)``), bitwise equal to the sweep kernels."""
    idx = np.asarray(indices, dtype=np.int64)
    if idx.shape[-1:] != (f.dimension,):
        raise ValueError(f"expected indices of dimension {f.dimension}")
    if np.any(idx < 0) or np.any(idx >= cells_per_axis):
        raise ValueError("cell index out of range")
    res = midpoint_residues(f, cells_per_axis)
    sin_tab, cos_tab = wave_tables(cells_per_axis)
    two_n = 2 * cells_per_axis
    total = np.zeros(idx.shape[:-1])
    for i, t in enumerate(f.terms):
        m = np.zeros(idx.shape[:-1], dtype=np.int64)
        for a in range(f.dimension):
            m = (m + res[i, a][idx[..., a]]) % two_n
        tab = sin_tab if t.kind == SINE else cos_tab
        total = total + t.coefficient * tab[m]
    return total
