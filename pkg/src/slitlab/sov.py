"""Separation of variables on the slit inside a confocal ellipse.

In elliptical coordinates ``r = t sinh(x)`` the slit domain is the cylinder
``[0, x0] x S^1``: the slit is ``x = 0`` (both faces) and the outer ellipse is
``x = x0``.  An eigenfunction factors as ``u(x) v(theta)`` with ``v`` an
angular Mathieu function of ``h = t sqrt(E)``, so each angular index gives a
one-dimensional nonlinear eigenproblem in ``E`` that is solved by shooting.

Roots are bracketed by a Prüfer phase count.  With ``u = rho sin(phi)``,
``u' = rho cos(phi)`` the phase at ``x0`` is nondecreasing in ``E`` (the
potential ``b_i(h) - h^2 cosh^2 x`` decreases in ``E`` because
``db/d(h^2) <= 1``), so the number of eigenvalues below ``E`` is the number
of target phases passed.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import kernels
from .errors import ConfigurationError, NumericalError
from .geometry import BC, ConfocalEllipse, DomainSpec
from .io import write_csv as write_rows
from .mathieu import b_at_zero, branch_eigenvalue, initial_state, radial_steps_hint

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SovProblem:
    t: float
    x0: float
    slit_bc: BC = BC.DIRICHLET
    outer_bc: BC = BC.DIRICHLET
    index_i: int = 0

    def __post_init__(self):
        if not (self.t > 0 and self.x0 > 0):
            raise ConfigurationError("SovProblem needs t > 0 and x0 > 0")
        object.__setattr__(self, "slit_bc", BC.parse(self.slit_bc))
        object.__setattr__(self, "outer_bc", BC.parse(self.outer_bc))
        if self.index_i < 0:
            raise ConfigurationError("angular index must be non-negative")

    @classmethod
    def from_radius(cls, t: float, r0: float, **kw) -> "SovProblem":
        """Outer ellipse through ``r = r0`` (i.e. ``x0 = arcsinh(r0/t)``)."""
        return cls(t=t, x0=math.asinh(r0 / t), **kw)

    @classmethod
    def from_domain(cls, spec: DomainSpec, index_i: int = 0) -> "SovProblem":
        if not isinstance(spec.outer, ConfocalEllipse):
            raise ConfigurationError("the separated solver needs a confocal_ellipse domain")
        slit = spec.slits[0]
        return cls(t=slit.half_length_t, x0=spec.outer.x0, slit_bc=slit.condition,
                   outer_bc=spec.outer_bc["outer"], index_i=index_i)

    def with_index(self, i: int) -> "SovProblem":
        return SovProblem(self.t, self.x0, self.slit_bc, self.outer_bc, i)

    @property
    def outer_radius(self) -> float:
        return self.t * math.sinh(self.x0)


@dataclass(frozen=True)
class SovEigenvalue:
    E: float
    index_i: int
    nodes: int
    residual: float


def _b(prob: SovProblem, E: float) -> float:
    h = prob.t * math.sqrt(max(E, 0.0))
    return branch_eigenvalue(h, prob.index_i)


def _steps(prob: SovProblem, E: float, per_unit: float) -> int:
    h = prob.t * math.sqrt(max(E, 0.0))
    return radial_steps_hint(b_at_zero(prob.index_i) + 0.5 * h * h, h, prob.x0, per_unit)


def _shoot(prob: SovProblem, E: float, n: int):
    """(normalized residual, Prüfer phase at x0)."""
    b = _b(prob, E)
    h2 = prob.t * prob.t * max(E, 0.0)
    u0, du0 = initial_state(prob.slit_bc)
    u, du, _, zeros = kernels.radial_shoot(b, h2, u0, du0, prob.x0, n)
    rho = math.hypot(u, du)
    if not (rho > 0 and math.isfinite(rho)):
        raise NumericalError(f"shooting failed at E={E}")
    res = (u if prob.outer_bc is BC.DIRICHLET else du) / rho
    sgn = 1.0 if u > 0 else (-1.0 if u < 0 else 0.0)
    # an exact zero at x0 closes the current phase sector
    alpha = math.pi if sgn == 0.0 else math.atan2(abs(u), du * sgn)
    return res, zeros * math.pi + alpha


def shoot_residual(prob: SovProblem, E: float, per_unit: float = 40.0, n_steps: int | None = None) -> float:
    """Outer-boundary defect ``u(x0)/rho`` or ``u'(x0)/rho`` at trial ``E``."""
    if E < 0:
        raise ConfigurationError("trial eigenvalue must be non-negative")
    n = n_steps or _steps(prob, E, per_unit)
    return _shoot(prob, E, n)[0]


def prufer_phase(prob: SovProblem, E: float, per_unit: float = 40.0, n_steps: int | None = None) -> float:
    n = n_steps or _steps(prob, E, per_unit)
    return _shoot(prob, E, n)[1]


def _count(prob: SovProblem, phase: float) -> int:
    """Number of target phases strictly below ``phase``."""
    if prob.outer_bc is BC.DIRICHLET:
        # targets k*pi, k >= 1
        return max(0, math.ceil(phase / math.pi - 1e-12) - 1)
    # targets pi/2 + k*pi, k >= 0
    return max(0, math.ceil((phase - 0.5 * math.pi) / math.pi - 1e-12))


def energy_grid(E_max: float) -> np.ndarray:
    """Bracketing grid with spacing ``min(1, max(E, 0.05))/20``."""
    pts = [0.0]
    while pts[-1] < E_max:
        E = pts[-1]
        pts.append(E + min(1.0, max(E, 0.05)) / 20.0)
    pts[-1] = E_max
    return np.array(pts)


def index_cutoff(t: float, x0: float, E_max: float) -> int:
    """First angular index whose potential stays positive for all E <= E_max."""
    barrier = t * t * E_max * math.cosh(x0) ** 2
    i = 0
    while b_at_zero(i) <= barrier:
        i += 1
    return i


def _roots_one_index(prob: SovProblem, E_max: float, per_unit: float, rtol: float) -> tuple[list[SovEigenvalue], int]:
    n = _steps(prob, E_max, per_unit)
    grid = energy_grid(E_max)
    phases = [_shoot(prob, E, n)[1] for E in grid]
    counts = [_count(prob, p) for p in phases]
    expected = counts[-1] - counts[0]

    def refine(a, b, ca, cb, depth=0):
        if cb - ca == 0:
            return []
        if cb - ca == 1 or depth > 60:
            return [(a, b, ca)]
        m = 0.5 * (a + b)
        cm = _count(prob, _shoot(prob, m, n)[1])
        return refine(a, m, ca, cm, depth + 1) + refine(m, b, cm, cb, depth + 1)

    brackets = []
    for k in range(len(grid) - 1):
        brackets += refine(grid[k], grid[k + 1], counts[k], counts[k + 1])

    out = []
    for a, b, ca in brackets:
        E = _solve_bracket(prob, a, b, n, rtol)
        # step doubling until the root is stable
        m = n
        for _ in range(6):
            m2 = 2 * m
            lo, hi = _widen(prob, E, m2)
            E2 = _solve_bracket(prob, lo, hi, m2, rtol)
            done = abs(E2 - E) <= rtol * max(E2, 1e-300) or E2 == E
            E, m = E2, m2
            if done:
                break
        else:
            log.warning("sov: root near E=%.6g (i=%d) did not settle under step doubling", E, prob.index_i)
        res = abs(_shoot(prob, E, m)[0])
        # the (ca+1)-th target phase leaves ca interior zeros for either outer condition
        out.append(SovEigenvalue(E=float(E), index_i=prob.index_i, nodes=int(ca), residual=float(res)))
    return out, expected


def _solve_bracket(prob, a, b, n, rtol):
    fa = _shoot(prob, a, n)[0]
    if fa == 0.0:
        return a
    fb = _shoot(prob, b, n)[0]
    if fb == 0.0:
        return b
    if fa * fb > 0:
        raise NumericalError(f"no sign change of the shooting residual on [{a}, {b}] (i={prob.index_i})")
    return brentq(lambda E: _shoot(prob, E, n)[0], a, b, xtol=1e-15, rtol=max(rtol * 1e-3, 4e-16), maxiter=200)


def _widen(prob, E, n):
    """A sign-change bracket around ``E`` for the residual at ``n`` steps."""
    if E == 0.0:
        return 0.0, 1e-6
    step = max(abs(E) * 1e-6, 1e-12)
    f0 = _shoot(prob, E, n)[0]
    for _ in range(60):
        lo, hi = max(E - step, 0.0), E + step
        flo, fhi = _shoot(prob, lo, n)[0], _shoot(prob, hi, n)[0]
        if flo * fhi <= 0:
            return lo, hi
        step *= 4.0
    raise NumericalError(f"could not re-bracket the root near E={E} (residual {f0})")


def eigenvalues_sov(t: float, x0: float, slit_bc, outer_bc, E_max: float, per_index_count: int | None = None,
                    per_unit: float = 40.0, rtol: float = 1e-9) -> list[SovEigenvalue]:
    """All separated eigenvalues in ``[0, E_max]``, ascending.

    ``per_index_count`` caps the number of roots kept per angular index.
    """
    if not (math.isfinite(E_max) and E_max > 0):
        raise ConfigurationError("E_max must be finite and positive")
    base = SovProblem(t=t, x0=x0, slit_bc=slit_bc, outer_bc=outer_bc)
    out: list[SovEigenvalue] = []
    for i in range(index_cutoff(t, x0, E_max)):
        roots, expected = _roots_one_index(base.with_index(i), E_max, per_unit, rtol)
        if len(roots) != expected:
            log.warning("sov: index %d found %d roots, phase count says %d", i, len(roots), expected)
        if per_index_count is not None:
            roots = roots[:per_index_count]
        out.extend(roots)
    out.sort(key=lambda ev: (ev.E, ev.index_i))
    return out


def write_csv(path, eigs) -> None:
    write_rows(path, ["i", "E", "nodes", "residual"],
              ([ev.index_i, float(ev.E), ev.nodes, float(ev.residual)] for ev in eigs))
