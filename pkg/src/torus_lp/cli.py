"""Command line: ``table``, ``certificate`` and ``oracle``.

Exit codes: 0 success/verified, 1 chain failed (or an oracle check failed),
2 margin checks failed, 3 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from . import lemmas, oracle, rigor
from .grid import GridSpec
from .sweep import WORKERS_ENV, default_workers
from .trigpoly import (PAPER_PSI, LipschitzBound, build_psi, gradient_norm_bound,
                       load_eigenfunction, paper_lipschitz)

log = logging.getLogger("torus_lp")

EXIT_OK, EXIT_CHAIN, EXIT_MARGINS, EXIT_IO = 0, 1, 2, 3
DEFAULT_GRID = 300
CSV_HEADER = ("p", "L_plus", "U_plus", "L_minus", "U_minus")


@dataclass(frozen=True)
class RunConfig:
    command: str
    grid: int = DEFAULT_GRID
    exponents: tuple[float, ...] = rigor.PAPER_EXPONENTS
    lipschitz: str = "generic"
    sup: str = "grid"
    tiles: int | None = None
    workers: int | None = None
    fmt: str = "csv"
    out: str | None = None
    seed: int = 1
    eigenfunction: str = PAPER_PSI

    def __post_init__(self):
        if self.grid < 1:
            raise ValueError("--grid must be >= 1")
        if any(p < 0 for p in self.exponents):
            raise ValueError("exponents must be nonnegative")
        if self.lipschitz not in ("generic", "paper") and not float(self.lipschitz) > 0:
            raise ValueError("explicit --lipschitz value must be positive")


def _exponents(text: str) -> tuple[float, ...]:
    vals = tuple(float(v) for v in text.split(",") if v.strip())
    return tuple(int(v) if v.is_integer() else v for v in vals)


def resolve_lipschitz(mode: str, f) -> LipschitzBound:
    if mode == "generic":
        return gradient_norm_bound(f)
    if mode == "paper":
        if f != build_psi():
            raise ValueError("--lipschitz paper (6 pi) only applies to the built-in eigenfunction")
        return gradient_norm_bound(f, override=paper_lipschitz())
    return gradient_norm_bound(f, override=float(mode))


def parse_sup(mode: str) -> tuple[bool, float | None]:
    """``grid`` or ``analytic=<value>`` -> (use grid bound, analytic value)."""
    if mode == "grid":
        return True, None
    if mode.startswith("analytic="):
        return True, float(mode.split("=", 1)[1])
    raise ValueError(f"--sup must be 'grid' or 'analytic=<value>', got {mode!r}")


# --- rendering ----------------------------------------------------------------


def table_csv(table: rigor.BoundsTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in table.rows:
        p = int(r.p) if r.p.is_integer() else r.p
        w.writerow([p] + [repr(v) for v in r.as_tuple()[1:]])
    return buf.getvalue()


def table_json(table: rigor.BoundsTable) -> str:
    doc = {
        "eigenfunction": table.eigenfunction.to_dict(),
        "grid": {"cells_per_axis": table.spec.cells_per_axis, "dimension": table.spec.dimension,
                 "tiles": table.tile_count},
        "lipschitz": {"value": table.lipschitz.value, "provenance": table.lipschitz.provenance},
        "alpha": table.alpha,
        "columns": list(CSV_HEADER),
        "rows": [list(r.as_tuple()) for r in table.rows],
        "S_N": table.s_n,
        "ledger": table.ledger.to_dict(),
        "margins": table.margins.to_dict(),
    }
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def table_text(table: rigor.BoundsTable) -> str:
    lines = [f"N={table.spec.cells_per_axis} d={table.spec.dimension} "
             f"L={table.lipschitz.value:.6f} ({table.lipschitz.provenance}) alpha={table.alpha:.7f}",
             f"{'p':>4} {'L_plus':>10} {'U_plus':>10} {'L_minus':>10} {'U_minus':>10}"]
    for r in table.rows:
        lines.append(f"{r.p:>4g} {r.L_plus:>10.6f} {r.U_plus:>10.6f} "
                     f"{r.L_minus:>10.6f} {r.U_minus:>10.6f}")
    m = table.margins
    lines.append(f"S_N = {table.s_n}")
    lines.append(f"eval error {m.eval_error:.3e} < {m.eval_limit:.3e}: {m.eval_ok}")
    lines.append(f"total bound error {m.total_error:.3e} < {m.total_limit}: {m.total_ok}")
    return "\n".join(lines) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


# --- commands -----------------------------------------------------------------


def _sweep(cfg: RunConfig) -> rigor.BoundsTable:
    f = load_eigenfunction(cfg.eigenfunction)
    spec = GridSpec(cfg.grid, f.dimension)
    lip = resolve_lipschitz(cfg.lipschitz, f)
    return rigor.compute_bounds(f, spec, lip, cfg.exponents,
                                tile_count=cfg.tiles, workers=cfg.workers)


def cmd_table(cfg: RunConfig) -> int:
    table = _sweep(cfg)
    render = {"csv": table_csv, "json": table_json, "text": table_text}[cfg.fmt]
    try:
        _emit(render(table), cfg.out)
    except OSError as exc:
        log.error("cannot write table: %s", exc)
        return EXIT_IO
    log.info("S_N=%d total bound error=%.3e margins %s", table.s_n,
             table.ledger.total_bound_error, "ok" if table.margins.passed else "FAILED")
    return EXIT_OK if table.margins.passed else EXIT_MARGINS


def certificate_exit_code(cert: lemmas.Certificate | dict) -> int:
    doc = cert.to_dict() if isinstance(cert, lemmas.Certificate) else cert
    if doc["verdict"] == "verified":
        return EXIT_OK
    if not doc["ledger"]["margins"]["passed"]:
        return EXIT_MARGINS
    return EXIT_CHAIN


def cmd_certificate(cfg: RunConfig) -> int:
    started = time.perf_counter()
    use_grid, analytic = parse_sup(cfg.sup)
    table = _sweep(cfg)
    cert = lemmas.build_certificate(table, analytic_sup=analytic, use_grid_sup=use_grid,
                                    started=started)
    try:
        _emit(cert.to_json() + "\n", cfg.out)
    except OSError as exc:
        log.error("cannot write certificate: %s", exc)
        return EXIT_IO
    for c in cert.checks:
        log.info("%-9s %s + %s = %s  slack %s  %s", c.interval, *c.terms,
                 c.lhs, c.slack, "ok" if c.passed else "FAILED")
    log.info("verdict: %s", cert.verdict)
    return certificate_exit_code(cert)


def cmd_oracle(cfg: RunConfig, action: str, p: float = 0.0, sign: str = oracle.PLUS,
               method: str = "midpoint", samples: int = 1_000_000) -> int:
    f = load_eigenfunction(cfg.eigenfunction)
    spec = GridSpec(cfg.grid, f.dimension)
    if action == "estimate":
        if method == "midpoint":
            est = oracle.riemann_estimate(f, spec, p, sign)
        else:
            est = oracle.mc_estimate(f, p, sign, samples, cfg.seed)
        text = (f"{est.method} p={p:g} {sign}: {est.value!r} "
                f"(stderr {est.stderr:.3e}, n={est.count})\n")
        ok = True
    else:
        reports = oracle.check_all(f, spec, seed=cfg.seed, mc_samples=samples)
        text = "".join(r.line() + "\n" for r in reports)
        ok = all(r.passed or r.skipped for r in reports)
    try:
        _emit(text, cfg.out)
    except OSError as exc:
        log.error("cannot write oracle output: %s", exc)
        return EXIT_IO
    return EXIT_OK if ok else EXIT_CHAIN


# --- argument parsing -----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--grid", type=int, default=DEFAULT_GRID, help="cells per axis N")
    common.add_argument("--eigenfunction", default=PAPER_PSI,
                        help="'paper-psi' or a JSON file {dimension, terms: [{coef, kind, k}]}")
    common.add_argument("--workers", type=int, default=None,
                        help=f"worker threads (default: ${WORKERS_ENV} or CPU count)")
    common.add_argument("--tiles", type=int, default=None,
                        help=f"target tile count (default {rigor.DEFAULT_TILES})")
    common.add_argument("--out", default=None, help="output file (default stdout)")
    common.add_argument("--seed", type=int, default=1)
    common.add_argument("-q", "--quiet", action="store_true", help="no progress on stderr")

    parser = argparse.ArgumentParser(prog="torus-lp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("table", parents=[common], help="certified bounds table")
    t.add_argument("--p", type=_exponents, default=rigor.PAPER_EXPONENTS, dest="exponents")
    t.add_argument("--lipschitz", default="generic", help="generic | paper | <value>")
    t.add_argument("--format", choices=("csv", "json", "text"), default="csv", dest="fmt")

    c = sub.add_parser("certificate", parents=[common], help="asymmetry certificate (JSON)")
    c.add_argument("--lipschitz", default="generic", help="generic | paper | <value>")
    c.add_argument("--sup", default="grid", help="grid | analytic=<value>")

    o = sub.add_parser("oracle", help="uncertified cross-checks")
    osub = o.add_subparsers(dest="action", required=True)
    osub.add_parser("check-all", parents=[common]).add_argument(
        "--samples", type=int, default=1_000_000)
    e = osub.add_parser("estimate", parents=[common])
    e.add_argument("--p", type=float, default=0.0)
    e.add_argument("--sign", choices=(oracle.PLUS, oracle.MINUS), default=oracle.PLUS)
    e.add_argument("--method", choices=("midpoint", "mc"), default="midpoint")
    e.add_argument("--samples", type=int, default=1_000_000)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(message)s", stream=sys.stderr)
    try:
        cfg = RunConfig(
            command=args.command,
            grid=args.grid,
            exponents=getattr(args, "exponents", rigor.PAPER_EXPONENTS),
            lipschitz=getattr(args, "lipschitz", "generic"),
            sup=getattr(args, "sup", "grid"),
            tiles=args.tiles,
            workers=args.workers or default_workers(),
            fmt=getattr(args, "fmt", "csv"),
            out=args.out,
            seed=args.seed,
            eigenfunction=args.eigenfunction,
        )
        if args.command == "certificate":
            parse_sup(cfg.sup)
        if args.command != "oracle":
            resolve_lipschitz(cfg.lipschitz, load_eigenfunction(cfg.eigenfunction))
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_IO
    except ValueError as exc:
        parser.error(str(exc))
    if args.command == "table":
        return cmd_table(cfg)
    if args.command == "certificate":
        return cmd_certificate(cfg)
    return cmd_oracle(cfg, args.action, p=getattr(args, "p", 0.0),
                      sign=getattr(args, "sign", oracle.PLUS),
                      method="mc" if getattr(args, "method", "midpoint") == "mc" else "midpoint",
                      samples=args.samples)


if __name__ == "__main__":
    sys.exit(main())
