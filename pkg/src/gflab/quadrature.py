"""Adaptive Gauss-Legendre quadrature over intervals and rectangles.

The integrators take vectorized callables (numpy arrays in, numpy array
out) and refine dyadically, steering work toward cells whose embedded
low/high-order estimates disagree.  A cell chain that keeps contributing
at extreme subdivision depth signals a non-integrable singularity and
raises DivergenceError rather than returning garbage.
"""

from __future__ import annotations

import heapq
import itertools

import numpy as np

from .errors import DivergenceError, NumericError

_RULE_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _rule(n: int):
    """Gauss-Legendre nodes/weights on [0, 1]."""
    try:
        return _RULE_CACHE[n]
    except KeyError:
        x, w = np.polynomial.legendre.leggauss(n)
        pair = ((x + 1.0) / 2.0, w / 2.0)
        _RULE_CACHE[n] = pair
        return pair


def _cell_estimates_1d(f, a, b, lo=6, hi=12):
    width = b - a
    xl, wl = _rule(lo)
    xh, wh = _rule(hi)
    il = width * np.sum(wl * f(a + width * xl))
    ih = width * np.sum(wh * f(a + width * xh))
    return ih, abs(ih - il)


def integrate_interval(f, a, b, *, tol_abs=1e-12, tol_rel=1e-10, max_depth=48):
    """Adaptive integral of a vectorized callable on [a, b] (real endpoints)."""
    total, err = _cell_estimates_1d(f, a, b)
    heap = [(-err, 0, 0, a, b, total, err)]
    counter = itertools.count(1)
    total_err = err
    while heap:
        if total_err <= max(tol_abs, tol_rel * abs(total)):
            break
        _, _, depth, ca, cb, cval, cerr = heapq.heappop(heap)
        if depth >= max_depth:
            raise DivergenceError(
                f"interval [{ca}, {cb}] still active at depth {depth}: "
                "integrand appears non-integrable"
            )
        mid = 0.5 * (ca + cb)
        total -= cval
        total_err -= cerr
        for a2, b2 in ((ca, mid), (mid, cb)):
            v, e = _cell_estimates_1d(f, a2, b2)
            total += v
            total_err += e
            heapq.heappush(heap, (-e, next(counter), depth + 1, a2, b2, v, e))
    return total


def _cell_estimates_2d(f, x0, x1, y0, y1, lo, hi):
    dx, dy = x1 - x0, y1 - y0
    area = dx * dy
    xl, wl = _rule(lo)
    xh, wh = _rule(hi)
    gxl, gyl = np.meshgrid(x0 + dx * xl, y0 + dy * xl, indexing="ij")
    gxh, gyh = np.meshgrid(x0 + dx * xh, y0 + dy * xh, indexing="ij")
    il = area * np.einsum("i,j,ij->", wl, wl, f(gxl, gyl))
    ih = area * np.einsum("i,j,ij->", wh, wh, f(gxh, gyh))
    return ih, abs(ih - il)


def integrate_box(
    f,
    x0,
    x1,
    y0,
    y1,
    *,
    tol_abs=1e-10,
    tol_rel=1e-8,
    max_depth=42,
    max_cells=200_000,
    order=(6, 12),
):
    """Adaptive integral of a vectorized f(x, y) over [x0,x1] x [y0,y1].

    Returns the integral estimate (complex if f is complex-valued).  Raises
    DivergenceError when refinement hits ``max_depth`` on a still-active cell
    and NumericError when the cell budget is exhausted before the tolerance
    is met.
    """
    lo, hi = order
    val, err = _cell_estimates_2d(f, x0, x1, y0, y1, lo, hi)
    heap = [(-err, 0, 0, (x0, x1, y0, y1), val, err)]
    counter = itertools.count(1)
    total, total_err = val, err
    cells = 1
    while heap:
        if total_err <= max(tol_abs, tol_rel * abs(total)):
            break
        neg_err, _, depth, box, cval, cerr = heapq.heappop(heap)
        if depth >= max_depth:
            raise DivergenceError(
                f"cell {box} still active at depth {depth}: "
                "integrand appears non-integrable there"
            )
        if cells >= max_cells:
            raise NumericError(
                "quadrature cell budget exhausted",
                diagnostics={
                    "total": total,
                    "error": total_err,
                    "cells": cells,
                    "worst_cell": box,
                },
            )
        bx0, bx1, by0, by1 = box
        xm, ym = 0.5 * (bx0 + bx1), 0.5 * (by0 + by1)
        total -= cval
        total_err -= cerr
        for cx0, cx1 in ((bx0, xm), (xm, bx1)):
            for cy0, cy1 in ((by0, ym), (ym, by1)):
                v, e = _cell_estimates_2d(f, cx0, cx1, cy0, cy1, lo, hi)
                total += v
                total_err += e
                cells += 1
                heapq.heappush(
                    heap, (-e, next(counter), depth + 1, (cx0, cx1, cy0, cy1), v, e)
                )
    return total


def integrate_segment(f, z0: complex, z1: complex, **kwargs):
    """Contour integral of a vectorized complex callable along [z0, z1]."""
    delta = z1 - z0

    def g(t):
        return f(z0 + t * delta) * delta

    return integrate_interval(g, 0.0, 1.0, **kwargs)
