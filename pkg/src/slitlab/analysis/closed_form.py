"""Closed-form spectra of rectangles with per-edge conditions."""

from __future__ import annotations

import math

import numpy as np

from ..geometry import BC


def _modes_1d(length: float, lo: BC, hi: BC, count: int) -> list[float]:
    """Square roots of the 1D eigenvalues of ``-u''`` on ``[0, length]``."""
    lo, hi = BC.parse(lo), BC.parse(hi)
    if lo is hi:
        start = 0 if lo is BC.NEUMANN else 1
        return [m * math.pi / length for m in range(start, start + count)]
    return [(m + 0.5) * math.pi / length for m in range(count)]


def rectangle_spectrum(a: float, b: float, left="d", right="d", bottom="n", top="n",
                       count: int = 20) -> np.ndarray:
    """Lowest ``count`` eigenvalues (with multiplicity) of the rectangle ``[0,a] x [0,b]``."""
    n = count + 2
    kx = _modes_1d(a, left, right, n)
    ky = _modes_1d(b, bottom, top, n)
    vals = sorted(p * p + q * q for p in kx for q in ky)
    return np.array(vals[:count])


def mixed_rectangle_spectrum(a: float, count: int = 20) -> np.ndarray:
    """``(m1 pi / a)^2 + (m2 pi)^2`` with ``m1 >= 1``, ``m2 >= 0``: Dirichlet sides, Neumann top/bottom."""
    return rectangle_spectrum(a, 1.0, "d", "d", "n", "n", count)


def half_rectangle_spectra(a: float, count: int = 20) -> tuple[np.ndarray, np.ndarray]:
    """Even / odd parts of the mixed rectangle under ``y -> 1 - y``."""
    even = rectangle_spectrum(a, 0.5, "d", "d", "n", "n", count)
    odd = rectangle_spectrum(a, 0.5, "d", "d", "n", "d", count)
    return even, odd


def min_relative_gap(values, k: int | None = None) -> tuple[float, int]:
    """Smallest ``(E_{j+1} - E_j) / E_j`` among the first ``k`` values and its index."""
    v = np.sort(np.asarray(values, dtype=float))
    if k is not None:
        v = v[:k]
    g = np.diff(v) / np.maximum(np.abs(v[:-1]), 1e-300)
    j = int(np.argmin(g))
    return float(g[j]), j
