"""Certified L^p masses of positive and negative parts of torus eigenfunctions."""

__version__ = "0.1.0"

from .grid import GridSpec, Tile, midpoint, tiles
from .trigpoly import (LipschitzBound, TrigEigenfunction, WaveTerm, build_psi,
                       coefficient_sup_bound, cube_variation_bound, dilate, evaluate,
                       gradient_norm_bound, load_eigenfunction, paper_lipschitz)
from .rigor import (BoundsRow, BoundsTable, ErrorLedger, SignedAccumulator, build_ledger,
                    check_margins, classify_and_accumulate, compute_bounds, finalize_bounds,
                    merge)
from .lemmas import (Certificate, RatioBound, SupBound, build_certificate, ratio_bounds,
                     recheck, sup_bound_negative_part, verify_chain)

__all__ = [
    "GridSpec", "Tile", "midpoint", "tiles",
    "LipschitzBound", "TrigEigenfunction", "WaveTerm", "build_psi", "coefficient_sup_bound",
    "cube_variation_bound", "dilate", "evaluate", "gradient_norm_bound", "load_eigenfunction",
    "paper_lipschitz",
    "BoundsRow", "BoundsTable", "ErrorLedger", "SignedAccumulator", "build_ledger",
    "check_margins", "classify_and_accumulate", "compute_bounds", "finalize_bounds", "merge",
    "Certificate", "RatioBound", "SupBound", "build_certificate", "ratio_bounds", "recheck",
    "sup_bound_negative_part", "verify_chain",
]
