"""Reflection splitting of midline-slit rectangles and spectral gap scans."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError
from ..fem.mesh import MeshTemplate, build_template
from ..fem.solver import solve_mesh
from ..geometry import BC, DomainSpec, EdgeSegment, Rectangle, SlitSpec
from .branches import BranchSet, check_grid
from .closed_form import half_rectangle_spectra, mixed_rectangle_spectrum

MIXED_BC = {"left": BC.DIRICHLET, "right": BC.DIRICHLET, "bottom": BC.NEUMANN, "top": BC.NEUMANN}


def midline_domain(a: float, centers, t: float, slit_bc, r0: float | None = None) -> DomainSpec:
    """``[0,a] x [0,1]`` with horizontal slits centred at ``(cx, 1/2)`` and the mixed outer conditions."""
    centers = [float(c) for c in centers]
    if any(not 0.0 < c < a for c in centers):
        raise ConfigurationError("slit centres must lie strictly inside the midline (0, a)")
    if centers and r0 is None:
        gaps = [0.25] + [min(c, a - c) / 2 for c in centers]
        gaps += [abs(p - q) / 4 for k, p in enumerate(centers) for q in centers[k + 1:]]
        r0 = min(gaps)
    slits = [SlitSpec(center=(c, 0.5), angle=0.0, half_length_t=t, condition=slit_bc) for c in centers]
    return DomainSpec(outer=Rectangle(a, 1.0), slits=slits, outer_bc=dict(MIXED_BC), chart_radius_r0=r0)


def half_domain(a: float, centers, t: float, slit_bc, parity: str) -> DomainSpec:
    """Lower half ``[0,a] x [0,1/2]``; the top edge carries the slit condition on each slit interval.

    ``parity`` is ``"even"`` (Neumann on the rest of the top edge) or
    ``"odd"`` (Dirichlet there).
    """
    if parity not in ("even", "odd"):
        raise ConfigurationError("parity must be 'even' or 'odd'")
    top = BC.NEUMANN if parity == "even" else BC.DIRICHLET
    bc = dict(MIXED_BC)
    bc["top"] = top
    segs = [EdgeSegment("top", c - t, c + t, BC.parse(slit_bc)) for c in centers]
    return DomainSpec(outer=Rectangle(a, 0.5), outer_bc=bc, segments=segs)


@dataclass
class SymmetryReport:
    full: np.ndarray
    even: np.ndarray
    odd: np.ndarray
    merged: np.ndarray
    rel_errors: np.ndarray        # first n_compare values
    count_full: int
    count_merged: int
    threshold: float

    @property
    def max_rel_error(self) -> float:
        return float(np.max(self.rel_errors))

    @property
    def counts_agree(self) -> bool:
        return self.count_full == self.count_merged


def symmetry_reduction_check(a: float, centers, t: float, slit_bc="neumann", resolution: float = 32,
                             n_compare: int = 10, threshold: float = 100.0, k: int = 30,
                             r0: float | None = None) -> SymmetryReport:
    """Compare the full midline-slit spectrum with the merged even/odd half spectra."""
    centers = [float(c) for c in centers]
    full_spec = midline_domain(a, centers, t, slit_bc, r0)
    center = (0.5 * a, 0.5)
    tmpl_full = build_template(full_spec, resolution, pattern_center=center)
    full = _spectrum_covering(tmpl_full, t if centers else 1.0, k, threshold)
    halves = []
    for parity in ("even", "odd"):
        hs = half_domain(a, centers, t, slit_bc, parity)
        tmpl = build_template(hs, resolution, pattern_center=center)
        halves.append(_spectrum_covering(tmpl, 1.0, k, threshold))
    merged = np.sort(np.concatenate(halves))
    n = min(n_compare, len(full), len(merged))
    rel = np.abs(merged[:n] - full[:n]) / np.abs(full[:n])
    return SymmetryReport(full=full, even=halves[0], odd=halves[1], merged=merged, rel_errors=rel,
                          count_full=int(np.sum(full < threshold)), count_merged=int(np.sum(merged < threshold)),
                          threshold=threshold)


def _spectrum_covering(tmpl: MeshTemplate, t: float, k: int, threshold: float) -> np.ndarray:
    """Enough eigenvalues that the largest exceeds ``threshold``."""
    while True:
        spec, system = solve_mesh(tmpl, t, min(k, tmpl.n_nodes))
        vals = spec.eigenvalues
        if vals[-1] > threshold or len(vals) >= system.n_free:
            return vals
        k *= 2


def closed_form_symmetry(a: float, count: int = 20) -> tuple[np.ndarray, np.ndarray]:
    """(full spectrum, merged half spectra) of the unslit mixed rectangle."""
    even, odd = half_rectangle_spectra(a, count)
    return mixed_rectangle_spectrum(a, count), np.sort(np.concatenate([even, odd]))[:count]


# -- gap scan ---------------------------------------------------------------


@dataclass
class GapScan:
    t_grid: np.ndarray
    gaps: np.ndarray              # (n_t, k-1) relative gaps (E_{j+1} - E_j) / E_j of the sorted values
    min_gap: np.ndarray           # (n_t,)
    candidates: list[tuple[float, int, float]] = field(default_factory=list)   # (t, j, gap)
    isolated: bool = True
    persistent: list[int] = field(default_factory=list)   # pairs below threshold at every t


def spectrum_gaps(values, k: int) -> np.ndarray:
    v = np.sort(np.asarray(values, dtype=float))[:k]
    return np.diff(v) / np.maximum(np.abs(v[:-1]), 1e-300)


def gap_scan(tmpl: MeshTemplate | None, t_grid, k: int, spec: DomainSpec | None = None, threshold: float = 0.02,
             branches: BranchSet | None = None, **solver_kw) -> GapScan:
    """Per-``t`` minimal relative gap among the first ``k`` eigenvalues and crossing candidates.

    A candidate is a local minimum in ``t`` of an adjacent-pair gap lying
    below ``threshold``; candidates are isolated when no pair is flagged at
    two neighbouring grid points and no pair stays below the threshold
    along the whole grid.
    """
    t_grid = check_grid(t_grid)
    rows = []
    for j, t in enumerate(t_grid):
        if branches is not None:
            vals = branches.spectra[j].eigenvalues
        else:
            s, _ = solve_mesh(tmpl, t, k, spec, **solver_kw)
            vals = s.eigenvalues
        if len(vals) < k:
            raise ConfigurationError(f"need {k} eigenvalues per grid point, got {len(vals)}")
        rows.append(spectrum_gaps(vals, k))
    gaps = np.array(rows)
    n_t = len(t_grid)
    cands, flagged = [], np.zeros_like(gaps, dtype=bool)
    for p in range(gaps.shape[1]):
        g = gaps[:, p]
        for j in range(n_t):
            left = g[j - 1] if j > 0 else math.inf
            right = g[j + 1] if j + 1 < n_t else math.inf
            if g[j] < threshold and g[j] <= left and g[j] <= right:
                flagged[j, p] = True
                cands.append((float(t_grid[j]), p, float(g[j])))
    persistent = [p for p in range(gaps.shape[1]) if n_t > 1 and np.all(gaps[:, p] < threshold)]
    adjacent = bool(np.any(flagged[1:] & flagged[:-1])) if n_t > 1 else False
    return GapScan(t_grid=t_grid, gaps=gaps, min_gap=gaps.min(axis=1), candidates=cands,
                   isolated=not adjacent and not persistent, persistent=persistent)
