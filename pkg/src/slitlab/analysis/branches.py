"""Eigenbranch tracking over a decreasing grid of slit lengths."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from ..errors import ConfigurationError, TrackingError
from ..fem.assembly import System, assemble
from ..fem.mesh import MeshTemplate, instantiate
from ..fem.solver import Spectrum, solve_system
from ..geometry import DomainSpec
from ..io import write_csv

log = logging.getLogger(__name__)

WARN_OVERLAP = 0.8
FAIL_OVERLAP = 0.3


@dataclass
class BranchSet:
    """``values[j, b]`` is branch ``b`` at ``t_grid[j]``.

    ``order[j, b]`` is the position of that pair in the sorted spectrum at
    ``t_grid[j]`` and ``signs[j, b]`` the sign that makes its eigenvector
    continuous along the branch.  ``overlaps[j-1, b]`` is the M-overlap of
    branch ``b`` between ``t_grid[j-1]`` and ``t_grid[j]``.
    """

    t_grid: np.ndarray
    values: np.ndarray
    order: np.ndarray
    signs: np.ndarray
    overlaps: np.ndarray
    spectra: list[Spectrum]
    systems: list[System]
    template: MeshTemplate
    spec: DomainSpec | None = None
    warnings: list[str] = field(default_factory=list)

    @property
    def n_branches(self) -> int:
        return self.values.shape[1]

    def vector(self, b: int, j: int, full: bool = True) -> np.ndarray:
        s = self.spectra[j]
        v = s.vectors[:, self.order[j, b]] * self.signs[j, b]
        if not full:
            return v
        out = np.zeros(s.n_nodes)
        out[s.free] = v
        return out

    def eigenvalue(self, b: int, j: int) -> float:
        return float(self.values[j, b])

    def t2E(self) -> np.ndarray:
        return self.t_grid[:, None] ** 2 * self.values

    def h(self) -> np.ndarray:
        """``h(t) = t sqrt(E_t)`` per grid point and branch."""
        return self.t_grid[:, None] * np.sqrt(np.maximum(self.values, 0.0))

    def to_csv(self, path) -> None:
        rows = [[float(t), b, float(self.values[j, b]), None if j == 0 else float(self.overlaps[j - 1, b])]
                for j, t in enumerate(self.t_grid) for b in range(self.n_branches)]
        write_csv(path, ["t", "k", "E", "overlap"], rows)


def check_grid(t_grid) -> np.ndarray:
    t = np.asarray(t_grid, dtype=float).ravel()
    if len(t) == 0:
        raise ConfigurationError("empty t grid")
    if np.any(t <= 0) or np.any(np.diff(t) >= 0):
        raise ConfigurationError("t grid must be positive and strictly decreasing")
    return t


def greedy_match(O: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Greedy assignment of rows to columns by descending overlap."""
    n_rows = O.shape[0]
    cols = -np.ones(n_rows, dtype=np.int64)
    best = np.zeros(n_rows)
    work = O.copy()
    for _ in range(n_rows):
        r, c = np.unravel_index(np.argmax(work), work.shape)
        cols[r] = c
        best[r] = O[r, c]
        work[r, :] = -1.0
        work[:, c] = -1.0
    return cols, best


def track_branches(tmpl: MeshTemplate, t_grid, k: int, spec: DomainSpec | None = None, buffer: int = 5,
                   warn_below: float = WARN_OVERLAP, fail_below: float = FAIL_OVERLAP, **solver_kw) -> BranchSet:
    """Follow the ``k`` lowest eigenpairs from ``t_grid[0]`` down the grid.

    At each ``t`` the ``k + buffer`` lowest pairs are computed and matched
    to the previous step by greedy assignment on ``|V_prev^T M(t) V_new|``.
    """
    t_grid = check_grid(t_grid)
    n_solve = k + buffer
    spectra, systems = [], []
    for t in t_grid:
        system = assemble(instantiate(tmpl, t), spec)
        spectra.append(solve_system(system, min(n_solve, system.n_free), **solver_kw))
        systems.append(system)
    if spectra[0].vectors.shape[1] < k:
        raise ConfigurationError(f"only {spectra[0].vectors.shape[1]} free DOFs for {k} branches")

    n_t = len(t_grid)
    order = np.zeros((n_t, k), dtype=np.int64)
    signs = np.ones((n_t, k))
    overlaps = np.zeros((max(n_t - 1, 0), k))
    order[0] = np.arange(k)
    warnings = []
    for j in range(1, n_t):
        prev = spectra[j - 1]
        cur = spectra[j]
        Vp = prev.full_vectors()[:, order[j - 1]] * signs[j - 1]
        Vn = cur.full_vectors()
        M = systems[j].M_full
        # renormalise the previous vectors in M(t) so that overlaps stay in [0, 1]
        Vp = Vp / np.sqrt(np.einsum("ij,ij->j", Vp, M @ Vp))
        S = Vp.T @ (M @ Vn)
        cols, best = greedy_match(np.abs(S))
        for b in range(k):
            if best[b] < fail_below:
                raise TrackingError(f"branch {b} lost at t={t_grid[j]:g} (best overlap {best[b]:.3f})",
                                    t=float(t_grid[j]))
            if best[b] < warn_below:
                msg = f"branch {b}: overlap {best[b]:.3f} at t={t_grid[j]:g} (crossing or near-degeneracy)"
                warnings.append(msg)
                log.warning(msg)
        order[j] = cols
        signs[j] = np.sign(S[np.arange(k), cols])
        signs[j][signs[j] == 0] = 1.0
        overlaps[j - 1] = best
    values = np.array([[spectra[j].eigenvalues[order[j, b]] for b in range(k)] for j in range(n_t)])
    return BranchSet(t_grid=t_grid, values=values, order=order, signs=signs, overlaps=overlaps, spectra=spectra,
                     systems=systems, template=tmpl, spec=spec, warnings=warnings)


# -- extrapolation --------------------------------------------------------


@dataclass
class Extrapolation:
    E0: float
    c: float
    p: float
    residual: float
    t2E_last: float
    t2E_decreasing: bool
    accepted: bool
    message: str = ""
    raw_tail: np.ndarray = field(default_factory=lambda: np.zeros(0))


def _fit_fixed_p(t, E, p):
    A = np.stack([np.ones_like(t), t ** p], axis=1)
    coef, *_ = np.linalg.lstsq(A, E, rcond=None)
    r = E - A @ coef
    return coef, float(np.sqrt(np.mean(r * r)))


def extrapolate_limit(t_grid, values, n_tail: int | None = None, noise: float | None = None,
                      p_bounds: tuple[float, float] = (1e-3, 2.0)) -> Extrapolation:
    """Least-squares fit of ``E(t) = E0 + c t^p`` over the last grid points.

    The tail must be monotone in ``t`` up to the noise floor (default
    ``1e-9 |E|``); otherwise the fit is rejected and the raw tail returned.
    """
    t = np.asarray(t_grid, dtype=float)
    E = np.asarray(values, dtype=float)
    if len(t) < 4:
        raise ConfigurationError("extrapolation needs at least 4 grid points")
    if n_tail is not None:
        t, E = t[-n_tail:], E[-n_tail:]
    scale = float(np.max(np.abs(E)))
    floor = 1e-9 * scale if noise is None else noise
    t2E = t * t * E
    t2E_dec = bool(np.all(np.diff(t2E) < 0))
    dE = np.diff(E)
    big = dE[np.abs(dE) > floor]
    if len(big) and not (np.all(big > 0) or np.all(big < 0)):
        return Extrapolation(E0=math.nan, c=math.nan, p=math.nan, residual=math.nan, t2E_last=float(t2E[-1]),
                             t2E_decreasing=t2E_dec, accepted=False, message="non-monotone tail", raw_tail=E.copy())
    if len(big) == 0:
        # flat within noise
        return Extrapolation(E0=float(np.mean(E)), c=0.0, p=math.nan, residual=float(np.std(E)),
                             t2E_last=float(t2E[-1]), t2E_decreasing=t2E_dec, accepted=True,
                             message="flat within noise floor", raw_tail=E.copy())
    lo, hi = p_bounds
    grid = np.linspace(lo, hi, 200)
    res = [_fit_fixed_p(t, E, p)[1] for p in grid]
    j = int(np.argmin(res))
    a, b = grid[max(j - 1, 0)], grid[min(j + 1, len(grid) - 1)]
    opt = minimize_scalar(lambda p: _fit_fixed_p(t, E, p)[1], bounds=(a, b), method="bounded",
                          options={"xatol": 1e-10})
    p = float(opt.x) if opt.fun <= res[j] else float(grid[j])
    (E0, c), r = _fit_fixed_p(t, E, p)
    return Extrapolation(E0=float(E0), c=float(c), p=p, residual=r, t2E_last=float(t2E[-1]),
                         t2E_decreasing=t2E_dec, accepted=True, raw_tail=E.copy())
