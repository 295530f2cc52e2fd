"""Numerical audits of the eigenbranch estimates.

Every constant reported here is a supremum (or infimum) over the computed
grid, attached to the ``t`` where it is attained; nothing is asserted about
constants that only exist through compactness arguments.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

from ..errors import ConfigurationError, DegenerateEigenvalueError, ResolutionError
from ..fem.assembly import assemble
from ..fem.mesh import instantiate
from ..fem.solver import hellmann_feynman, matrix_derivative, solve_system
from ..geometry import BC
from ..mathieu import mathieu_expand, radial_solve
from .annulus import AnnulusForms, annulus_forms, sample_annulus
from .branches import BranchSet

log = logging.getLogger(__name__)

C1_DER = 2.0 * math.sqrt(2.0)
C2_NORM = 9.0


# -- Hellmann-Feynman and the variation bounds -----------------------------


def hf_derivative(branches: BranchSet, b: int, j: int, delta_frac: float = 0.01, gap_tol: float = 1e-6) -> float:
    """Hellmann-Feynman ``dE/dt`` of branch ``b`` at ``t_grid[j]``."""
    t = branches.t_grid[j]
    Kd, Md = matrix_derivative(branches.template, t, delta_frac * t, branches.spec)
    return hellmann_feynman(Kd, Md, branches.spectra[j], int(branches.order[j, b]), gap_tol)


def fd_derivative(branches: BranchSet, b: int, j: int, delta_frac: float = 0.01) -> float:
    """Central difference of the tracked eigenvalue: solve at ``t +- delta``, match by overlap."""
    t = branches.t_grid[j]
    d = delta_frac * t
    u = branches.vector(b, j)
    k = branches.spectra[j].vectors.shape[1]
    vals = []
    for tt in (t + d, t - d):
        system = assemble(instantiate(branches.template, tt), branches.spec)
        spec = solve_system(system, k)
        S = np.abs(u @ (system.M_full @ spec.full_vectors()))
        vals.append(spec.eigenvalues[int(np.argmax(S))])
    return (vals[0] - vals[1]) / (2 * d)


@dataclass
class VariationRow:
    t: float
    E: float
    Edot: float
    lam: float               # -Edot / E
    trivial_excess: float    # lam - 2/t; Edot >= -(C + 2/t) E holds for every C >= this
    kappa: float             # t * Ndot_U / N
    forms: AnnulusForms | None
    note: str = ""


@dataclass
class VariationReport:
    rows: list[VariationRow]
    C_fit: float
    C_fit_t: float
    kappa_max: float
    kappa_max_t: float
    notes: list[str] = field(default_factory=list)

    def kappa_decreasing(self, t_max: float = math.inf) -> bool:
        k = [r.kappa for r in self.rows if r.t <= t_max and math.isfinite(r.kappa)]
        return bool(np.all(np.diff(k) < 0)) if len(k) > 1 else True


def variation_audit(branches: BranchSet, b: int, r0: float | None = None, delta_frac: float = 0.01,
                    slit: int = 0) -> VariationReport:
    """``lambda(t) = -Edot/E``, the excess over ``2/t`` and ``kappa(t) = t Ndot_U / N`` per grid point."""
    r0 = r0 or branches.template.spec.chart_radius_r0
    if r0 is None:
        raise ConfigurationError("variation audit needs the chart radius r0")
    rows, notes = [], []
    for j, t in enumerate(branches.t_grid):
        E = branches.eigenvalue(b, j)
        try:
            Ed = hf_derivative(branches, b, j, delta_frac)
            note = ""
        except DegenerateEigenvalueError as exc:
            Ed, note = math.nan, f"skipped: {exc}"
            notes.append(f"t={t:g}: {note}")
        inst = instantiate(branches.template, t)
        vec = branches.vector(b, j)
        forms = annulus_forms(sample_annulus(inst, vec, r0, slit))
        N = float(vec @ (branches.systems[j].M_full @ vec))
        lam = -Ed / E if E != 0 else math.nan
        rows.append(VariationRow(t=float(t), E=E, Edot=Ed, lam=lam, trivial_excess=lam - 2.0 / t,
                                 kappa=t * forms.Ndot_U / N, forms=forms, note=note))
    good = [r for r in rows if math.isfinite(r.trivial_excess)]
    C = max(good, key=lambda r: r.trivial_excess) if good else None
    K = max(rows, key=lambda r: r.kappa)
    return VariationReport(rows=rows, C_fit=C.trivial_excess if C else math.nan, C_fit_t=C.t if C else math.nan,
                           kappa_max=K.kappa, kappa_max_t=K.t, notes=notes)


# -- radial convexity -------------------------------------------------------


@dataclass
class ConvexityReport:
    applicable: bool
    condition_margin: float          # b - h^2 cosh^2 X - 1/2
    superadditive_slack: float       # min (w(x+y) - w(x) cosh y) / max w
    convex_slack: float              # (bound - lhs) / bound with p = sech^2
    convex2_slack: float             # (bound - lhs) / bound with p = sinh^2
    convex_bound: float = math.nan
    convex_lhs: float = math.nan
    note: str = ""

    @property
    def min_slack(self) -> float:
        return min(self.superadditive_slack, self.convex_slack, self.convex2_slack)


def convexity_slacks(x: np.ndarray, w: np.ndarray, X: float | None = None, max_pairs: int = 400):
    """The three convexity inequalities for samples ``w`` on a uniform grid ``x`` (``x[0] = 0``).

    Returns ``(superadditive, convex, convex2, convex_bound, convex_lhs)``.
    The grid must have an even number of intervals so that ``X/2`` is a node.
    """
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    n = len(x) - 1
    if n % 2:
        raise ConfigurationError("convexity grid needs an even number of intervals")
    X = x[-1] if X is None else X
    scale = np.max(np.abs(w))
    if scale == 0:
        return 0.0, 0.0, 0.0, 0.0, 0.0
    stride = max(1, n // max_pairs)
    idx = np.arange(0, n + 1, stride)
    worst = math.inf
    for k in idx:
        m = np.arange(0, n - k + 1, stride)
        diff = w[k + m] - w[k] * np.cosh(x[m])
        worst = min(worst, float(np.min(diff)) / scale)
    half = n // 2
    xm = x[half]
    total = simpson(w, x=x)
    p1 = 1.0 / np.cosh(x) ** 2
    lhs1 = simpson(p1 * w, x=x)
    # p(0)/cosh(X/2) + p(X/2) with p = sech^2, p(0) = 1
    bound1 = (1.0 / math.cosh(xm) + 1.0 / math.cosh(xm) ** 2) * total
    p2 = np.sinh(x) ** 2
    rhs2 = 2.0 / math.sinh(xm) ** 2 * simpson(p2 * w, x=x)
    s1 = (bound1 - lhs1) / bound1 if bound1 > 0 else 0.0
    s2 = (rhs2 - total) / rhs2 if rhs2 > 0 else 0.0
    return worst, s1, s2, bound1, lhs1


def convexity_report(i: int, h: float, b: float, bc, X: float, grid_step: float = 1e-3,
                     tol: float = 1e-12) -> ConvexityReport:
    """Check the convexity estimates for ``w = u_i^2`` on ``[0, X]``."""
    if not X > 0:
        raise ConfigurationError("X must be positive")
    margin = b - h * h * math.cosh(X) ** 2 - 0.5
    if margin < -tol * max(1.0, abs(b)):
        return ConvexityReport(False, margin, math.nan, math.nan, math.nan, note="inapplicable: b - h^2 cosh^2 X < 1/2")
    n = max(32, 2 * int(math.ceil(X / grid_step / 2.0)))
    sol = radial_solve(i, h, b, BC.parse(bc), X, tol=1e-12, n_start=n)
    # the solver returns n * 2^k steps; subsample back to n intervals
    step = sol.n_steps // n
    u = sol.values * np.exp(sol.log_scale - sol.log_scale[-1])
    x = sol.grid[::step]
    w = (u ** 2)[::step]
    sa, s1, s2, bound, lhs = convexity_slacks(x, w)
    return ConvexityReport(True, margin, sa, s1, s2, convex_bound=bound, convex_lhs=lhs)


def boundary_X(h: float, b: float) -> float:
    """``X`` with ``b - h^2 cosh^2 X = 1/2`` exactly (requires ``b - 1/2 >= h^2``)."""
    c2 = (b - 0.5) / (h * h)
    if c2 < 1:
        raise ConfigurationError("no X satisfies the convexity condition")
    return math.acosh(math.sqrt(c2))


# -- mode estimates ---------------------------------------------------------


@dataclass
class ModeRow:
    i: int
    energy_fraction: float
    b: float
    int_sech2: float
    int_plain: float
    int_sinh2: float
    exp_der: float       # largest e with int u^2/cosh^2 <= C1 t^e int u^2  (i != 0)
    exp_norm: float      # largest e with int u^2 <= C2 t^e int u^2 sinh^2 (i != 0)
    exp_nco2: float      # largest e with int u^2 <= t^e int u^2 sinh^2


@dataclass
class ModeReport:
    t: float
    h: float
    parseval_defect: float
    modes: list[ModeRow]
    X_t: float = math.nan
    convexity_ok_at_X: bool | None = None

    @property
    def epsilon(self) -> float:
        """Smallest admissible exponent over all retained modes and inequalities."""
        vals = []
        for m in self.modes:
            vals.append(m.exp_nco2)
            if m.i != 0:
                vals += [m.exp_der, m.exp_norm]
        return float(min(vals)) if vals else math.nan


def _exponent(ratio: float, C: float, t: float) -> float:
    if ratio <= 0:
        return math.inf
    return math.log(ratio / C) / math.log(t)


def mode_estimates(branches: BranchSet, b: int, j: int, r0: float | None = None, epsilon: float | None = None,
                   n_modes: int = 32, n_x: int = 96, n_theta: int = 256, energy_floor: float = 1e-4,
                   max_defect: float = 0.01, slit: int = 0) -> ModeReport:
    """Mathieu expansion of branch ``b`` at ``t_grid[j]`` on the chart and the per-mode ratios."""
    r0 = r0 or branches.template.spec.chart_radius_r0
    t = float(branches.t_grid[j]) * branches.template.slit_scale(slit)
    E = branches.eigenvalue(b, j)
    h = t * math.sqrt(max(E, 0.0))
    inst = instantiate(branches.template, branches.t_grid[j])
    sample = sample_annulus(inst, branches.vector(b, j), r0, slit, n_x=n_x, n_theta=n_theta)
    coeffs, modes = mathieu_expand(sample.v, h, n_modes)
    direct = sample.wx @ (sample.wtheta * np.sum(sample.v ** 2, axis=1))
    modal = sample.wx @ np.sum(coeffs ** 2, axis=0)
    defect = abs(direct - modal) / direct if direct > 0 else 0.0
    if defect > max_defect:
        raise ResolutionError(f"Parseval defect {defect:.3g} exceeds {max_defect:g} at t={t:g}")
    x = sample.x
    rows = []
    for i in range(n_modes):
        u2 = coeffs[i] ** 2
        frac = float(sample.wx @ u2) / modal if modal > 0 else 0.0
        if frac < energy_floor:
            continue
        a = float(sample.wx @ (u2 / np.cosh(x) ** 2))
        p = float(sample.wx @ u2)
        s = float(sample.wx @ (u2 * np.sinh(x) ** 2))
        rows.append(ModeRow(i=i, energy_fraction=frac, b=modes[i].b, int_sech2=a, int_plain=p, int_sinh2=s,
                            exp_der=_exponent(a / p, C1_DER, t) if i else math.nan,
                            exp_norm=_exponent(p / s, C2_NORM, t) if i else math.nan,
                            exp_nco2=_exponent(p / s, 1.0, t)))
    rep = ModeReport(t=t, h=h, parseval_defect=float(defect), modes=rows)
    if epsilon is not None:
        rep.X_t = math.acosh(t ** (-epsilon))
        rep.convexity_ok_at_X = all(m.b - h * h * math.cosh(rep.X_t) ** 2 >= 0.5 for m in rows if m.i != 0)
    return rep


# -- non-concentration ------------------------------------------------------


@dataclass
class MassRatioRow:
    t: float
    ratio: float


def nonconcentration_report(branches: BranchSet, b: int, r_star: float, slit: int = 0,
                            n_x: int = 96, n_theta: int = 256) -> list[MassRatioRow]:
    """``int_{U_{t,r*}} |u|^2 dm / int |u|^2 dm`` along the branch."""
    r0 = branches.template.spec.chart_radius_r0
    if not r_star > 0 or (r0 is not None and r_star > r0):
        raise ConfigurationError("r_star must lie in (0, r0]")
    out = []
    for j, t in enumerate(branches.t_grid):
        inst = instantiate(branches.template, t)
        vec = branches.vector(b, j)
        num = annulus_forms(sample_annulus(inst, vec, r_star, slit, n_x, n_theta)).N_U
        den = float(vec @ (branches.systems[j].M_full @ vec))
        out.append(MassRatioRow(t=float(t), ratio=num / den))
    return out


__all__ = [
    "C1_DER", "C2_NORM", "ConvexityReport", "MassRatioRow", "ModeReport", "ModeRow", "VariationReport",
    "VariationRow", "boundary_X", "convexity_report", "convexity_slacks", "fd_derivative",
    "hf_derivative", "mode_estimates", "nonconcentration_report", "variation_audit",
]
