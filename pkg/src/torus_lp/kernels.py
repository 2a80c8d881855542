"""Compiled per-tile sweeps over grid midpoints.

A tile is presented as a (P, J, K) box: P flattens every axis but the last
two, K is the contiguous innermost axis. Each kernel sums innermost rows
first, then rows into planes, then planes into the tile total; the error
ledger in :mod:`torus_lp.rigor` relies on exactly this nesting.

Phase residues arrive pre-reduced mod 2N, so one conditional subtraction
keeps every table index in range.
"""
from __future__ import annotations

import numba
import numpy as np

MAX_CHAIN_POWER = 8

_jit = numba.njit(cache=True, nogil=True, fastmath=False, error_model="numpy")


@_jit
def _value(o_res, m_res, i_res, p, j, k, sin_tab, cos_tab, coefs, is_sin, two_n):
    v = 0.0
    for t in range(coefs.shape[0]):
        m = o_res[t, p] + m_res[t, j]
        if m >= two_n:
            m -= two_n
        m += i_res[t, k]
        if m >= two_n:
            m -= two_n
        if is_sin[t]:
            v += coefs[t] * sin_tab[m]
        else:
            v += coefs[t] * cos_tab[m]
    return v


@_jit
def _powers(x, exps, chain_p, max_chain, chain, out, col):
    # chain[q] = x^q by repeated multiplication, q <= max_chain
    pw = 1.0
    chain[0] = 1.0
    for q in range(1, max_chain + 1):
        pw = pw * x
        chain[q] = pw
    for e in range(exps.shape[0]):
        if chain_p[e] >= 0:
            out[col, e] = chain[chain_p[e]]
        else:
            out[col, e] = x ** exps[e]


@_jit
def classify_tile(o_res, m_res, i_res, sin_tab, cos_tab, coefs, is_sin, two_n,
                  thresh, exps, chain_p, max_chain):
    """Sign-classified power sums for one tile.

    Returns ``(sums, counts, extremes, bad)`` where ``sums[c, e]`` holds the
    unscaled sums for c = U+, L+, U-, L-, ``counts`` = (positive, negative,
    unclassified), ``extremes`` = (min value, max value) and ``bad`` is the
    flat (p, j, k) position of the first non-finite value or -1.
    """
    n_e = exps.shape[0]
    P = o_res.shape[1]
    J = m_res.shape[1]
    K = i_res.shape[1]
    total = np.zeros((4, n_e))
    plane = np.zeros((4, n_e))
    row = np.zeros((4, n_e))
    cell = np.zeros((2, n_e))
    chain = np.empty(max_chain + 1)
    counts = np.zeros(3, dtype=np.int64)
    vmin = np.inf
    vmax = -np.inf
    bad = -1
    for p in range(P):
        plane[:, :] = 0.0
        for j in range(J):
            row[:, :] = 0.0
            for k in range(K):
                v = _value(o_res, m_res, i_res, p, j, k, sin_tab, cos_tab,
                           coefs, is_sin, two_n)
                if not np.isfinite(v):
                    if bad < 0:
                        bad = (p * J + j) * K + k
                    continue
                if v < vmin:
                    vmin = v
                if v > vmax:
                    vmax = v
                if v > thresh:
                    base = 0
                    a = v
                elif v < -thresh:
                    base = 2
                    a = -v
                else:
                    counts[2] += 1
                    continue
                counts[base // 2] += 1
                lo = a - thresh
                if lo < 0.0:
                    lo = 0.0
                _powers(a + thresh, exps, chain_p, max_chain, chain, cell, 0)
                _powers(lo, exps, chain_p, max_chain, chain, cell, 1)
                for e in range(n_e):
                    row[base, e] += cell[0, e]
                    row[base + 1, e] += cell[1, e]
            for c in range(4):
                for e in range(n_e):
                    plane[c, e] += row[c, e]
        for c in range(4):
            for e in range(n_e):
                total[c, e] += plane[c, e]
    extremes = np.empty(2)
    extremes[0] = vmin
    extremes[1] = vmax
    return total, counts, extremes, bad


@_jit
def moments_tile(o_res, m_res, i_res, sin_tab, cos_tab, coefs, is_sin, two_n, exps):
    """Uncertified sums over a tile of ``v^p`` and ``v^p log v`` for v = max(+-f, 0).

    ``out[0]``/``out[1]``: plus/minus power sums (``v^0`` counts cells with v > 0);
    ``out[2]``/``out[3]``: plus/minus log-weighted sums, skipping v <= 1e-300.
    """
    n_e = exps.shape[0]
    P = o_res.shape[1]
    J = m_res.shape[1]
    K = i_res.shape[1]
    total = np.zeros((4, n_e))
    plane = np.zeros((4, n_e))
    row = np.zeros((4, n_e))
    for p in range(P):
        plane[:, :] = 0.0
        for j in range(J):
            row[:, :] = 0.0
            for k in range(K):
                v = _value(o_res, m_res, i_res, p, j, k, sin_tab, cos_tab,
                           coefs, is_sin, two_n)
                if v > 0.0:
                    side = 0
                    a = v
                elif v < 0.0:
                    side = 1
                    a = -v
                else:
                    continue
                lg = np.log(a) if a > 1e-300 else 0.0
                for e in range(n_e):
                    w = a ** exps[e]
                    row[side, e] += w
                    if a > 1e-300:
                        row[side + 2, e] += w * lg
            for c in range(4):
                for e in range(n_e):
                    plane[c, e] += row[c, e]
        for c in range(4):
            for e in range(n_e):
                total[c, e] += plane[c, e]
    return total


@_jit
def sup_tile(o_res, m_res, i_res, sin_tab, cos_tab, coefs, is_sin, two_n):
    """(min, max) of the computed midpoint values over a tile."""
    vmin = np.inf
    vmax = -np.inf
    for p in range(o_res.shape[1]):
        for j in range(m_res.shape[1]):
            for k in range(i_res.shape[1]):
                v = _value(o_res, m_res, i_res, p, j, k, sin_tab, cos_tab,
                           coefs, is_sin, two_n)
                if v < vmin:
                    vmin = v
                if v > vmax:
                    vmax = v
    out = np.empty(2)
    out[0] = vmin
    out[1] = vmax
    return out


def chain_plan(exponents) -> tuple[np.ndarray, np.ndarray, int]:
    """Split exponents into repeated-multiplication slots and ``pow`` fallbacks."""
    exps = np.asarray(exponents, dtype=np.float64)
    chain_p = np.full(exps.shape, -1, dtype=np.int64)
    for e, p in enumerate(exps):
        if float(p).is_integer() and 0 <= p <= MAX_CHAIN_POWER:
            chain_p[e] = int(p)
    max_chain = int(chain_p.max()) if chain_p.size and chain_p.max() > 0 else 0
    return exps, chain_p, max_chain
