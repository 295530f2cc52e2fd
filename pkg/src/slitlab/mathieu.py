"""Angular and radial Mathieu functions in the (b, h) form.

Angular functions are eigenfunctions of ``-d^2/dtheta^2 + h^2 cos^2(theta)``
on the circle.  Writing ``cos^2 = 1/2 + cos(2 theta)/2`` couples Fourier
harmonic ``m`` only to ``m +- 2``, so the operator splits into four
tridiagonal blocks (cosine/sine times even/odd harmonics), each diagonalized
on a truncated basis.

Radial functions solve ``-u'' + (b - h^2 cosh^2 x) u = 0`` from ``x = 0``
with a Dirichlet (``u = 0, u' = 1``) or Neumann (``u = 1, u' = 0``) start.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.linalg.lapack import dstebz

from . import kernels
from .errors import ResolutionError, StiffnessError
from .geometry import BC
from .io import write_csv

INV_SQRT_PI = 1.0 / math.sqrt(math.pi)
INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


class SymmetryClass(str, Enum):
    COS_EVEN = "cos-even"
    COS_ODD = "cos-odd"
    SIN_EVEN = "sin-even"
    SIN_ODD = "sin-odd"


# tie-break order at h = 0: cosine before sine
_CLASS_RANK = {SymmetryClass.COS_EVEN: 0, SymmetryClass.COS_ODD: 0,
               SymmetryClass.SIN_EVEN: 1, SymmetryClass.SIN_ODD: 1}


@dataclass(frozen=True)
class AngularMode:
    """One angular Mathieu function.

    ``fourier_coeffs[0]`` multiplies ``(2 pi)^{-1/2}``; entries ``2m-1`` and
    ``2m`` multiply ``pi^{-1/2} cos(m theta)`` and ``pi^{-1/2} sin(m theta)``.
    """

    index_i: int
    h: float
    b: float
    symmetry_class: SymmetryClass
    fourier_coeffs: np.ndarray

    @property
    def max_harmonic(self) -> int:
        return (len(self.fourier_coeffs) - 1) // 2


def _block(cls: SymmetryClass, h: float, M: int):
    """Harmonics and tridiagonal (diag, offdiag) of one symmetry block."""
    h2 = h * h
    if cls is SymmetryClass.COS_EVEN:
        m = np.arange(0, M + 1, 2)
    elif cls is SymmetryClass.SIN_EVEN:
        m = np.arange(2, M + 1, 2)
    else:
        m = np.arange(1, M + 1, 2)
    diag = m.astype(float) ** 2 + 0.5 * h2
    off = np.full(max(len(m) - 1, 0), 0.25 * h2)
    if cls is SymmetryClass.COS_EVEN and len(m) > 1:
        # constant function (2 pi)^{-1/2} against pi^{-1/2} cos(2 theta)
        off[0] = h2 / (2.0 * math.sqrt(2.0))
    elif cls is SymmetryClass.COS_ODD:
        diag[0] += 0.25 * h2
    elif cls is SymmetryClass.SIN_ODD:
        diag[0] -= 0.25 * h2
    return m, diag, off


def _coeff_slot(cls: SymmetryClass, m: np.ndarray) -> np.ndarray:
    if cls in (SymmetryClass.COS_EVEN, SymmetryClass.COS_ODD):
        return np.where(m == 0, 0, 2 * m - 1)
    return 2 * m


def _check_truncation(n_modes: int, truncation_N: int) -> None:
    if n_modes < 1:
        raise ResolutionError("n_modes must be at least 1")
    if truncation_N < 4 * n_modes + 16:
        raise ResolutionError(
            f"truncation_N={truncation_N} below the guard 4*n_modes+16={4 * n_modes + 16}")


def default_truncation(n_modes: int, h: float = 0.0) -> int:
    return 4 * n_modes + 16 + 2 * int(math.ceil(abs(h)))


def angular_spectrum(h: float, n_modes: int, truncation_N: int | None = None) -> list[AngularMode]:
    """The ``n_modes`` lowest angular Mathieu modes, ascending in ``b``.

    ``truncation_N`` is the highest Fourier harmonic kept (``2N+1`` basis
    functions in total).
    """
    h = float(h)
    N = default_truncation(n_modes, h) if truncation_N is None else int(truncation_N)
    _check_truncation(n_modes, N)
    entries = []
    for cls in SymmetryClass:
        m, d, e = _block(cls, h, N)
        w, v = eigh_tridiagonal(d, e)
        slots = _coeff_slot(cls, m)
        for j in range(len(w)):
            coeffs = np.zeros(2 * N + 1)
            vec = v[:, j]
            lead = np.argmax(np.abs(vec))
            coeffs[slots] = vec if vec[lead] > 0 else -vec
            entries.append((w[j], _CLASS_RANK[cls], int(m[lead]), cls, coeffs))
    entries.sort(key=lambda e: (e[0], e[1], e[2]))
    modes = []
    for i, (b, _, _, cls, coeffs) in enumerate(entries[:n_modes]):
        modes.append(AngularMode(index_i=i, h=h, b=float(b), symmetry_class=cls, fourier_coeffs=coeffs))
    return modes


def angular_eigenvalues(h: float, n_modes: int, truncation_N: int | None = None) -> np.ndarray:
    """Eigenvalues only (faster path used by the shooting solver)."""
    N = default_truncation(n_modes, h) if truncation_N is None else int(truncation_N)
    _check_truncation(n_modes, N)
    vals = []
    for cls in SymmetryClass:
        _, d, e = _block(cls, float(h), N)
        vals.append(eigh_tridiagonal(d, e, eigvals_only=True))
    return np.sort(np.concatenate(vals))[:n_modes]


def branch_of_index(i: int) -> tuple[SymmetryClass, int]:
    """Symmetry block and in-block position of the mode labelled ``i`` at h = 0.

    Inside a block the eigenvalues are simple and never cross, so following
    ``(block, position)`` in ``h`` gives the analytic continuation of the
    ``i``-th mode; the globally sorted index may switch blocks instead.
    """
    if i < 0:
        raise ValueError("index must be non-negative")
    if i == 0:
        return SymmetryClass.COS_EVEN, 0
    m = (i + 1) // 2
    if m % 2 == 0:
        return (SymmetryClass.COS_EVEN, m // 2) if i % 2 else (SymmetryClass.SIN_EVEN, m // 2 - 1)
    return (SymmetryClass.COS_ODD, (m - 1) // 2) if i % 2 else (SymmetryClass.SIN_ODD, (m - 1) // 2)


def branch_eigenvalue(h: float, i: int, truncation_N: int | None = None) -> float:
    """``b`` on the analytic branch through ``b_i(0)`` (see :func:`branch_of_index`)."""
    cls, pos = branch_of_index(i)
    N = default_truncation(i + 1, h) if truncation_N is None else int(truncation_N)
    _check_truncation(i + 1, N)
    _, d, e = _block(cls, float(h), N)
    m, w, _, _, info = dstebz(d, e, 3, 0.0, 0.0, pos + 1, pos + 1, 0.0, b"E")
    if info != 0 or m != 1:
        raise ResolutionError(f"tridiagonal eigenvalue solver failed (info={info})")
    return float(w[0])


def b_at_zero(i: int) -> float:
    """``b_i(0)``: the sequence 0, 1, 1, 4, 4, 9, 9, ..."""
    return float(((i + 1) // 2) ** 2)


def fourier_basis(theta, max_harmonic: int) -> np.ndarray:
    """Orthonormal Fourier basis sampled at ``theta``; shape ``(len(theta), 2N+1)``."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    out = np.empty(theta.shape + (2 * max_harmonic + 1,))
    out[..., 0] = INV_SQRT_2PI
    m = np.arange(1, max_harmonic + 1)
    arg = theta[..., None] * m
    out[..., 1::2] = INV_SQRT_PI * np.cos(arg)
    out[..., 2::2] = INV_SQRT_PI * np.sin(arg)
    return out


def angular_eval(mode: AngularMode, theta):
    """Evaluate the angular function at ``theta`` (scalar or array)."""
    vals = fourier_basis(theta, mode.max_harmonic) @ mode.fourier_coeffs
    if np.ndim(theta) == 0:
        return float(vals[0])
    return vals


def angular_derivative(mode: AngularMode, theta):
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    N = mode.max_harmonic
    c = mode.fourier_coeffs
    m = np.arange(1, N + 1)
    arg = theta[..., None] * m
    return INV_SQRT_PI * ((-m * np.sin(arg)) @ c[1::2] + (m * np.cos(arg)) @ c[2::2])


# -- radial functions -----------------------------------------------------


@dataclass
class RadialSolution:
    """Samples of a radial Mathieu function.

    The true solution at ``grid[k]`` is ``values[k] * exp(log_scale[k])``
    (same for ``derivatives``).
    """

    index_i: int
    h: float
    b: float
    bc_at_zero: BC
    grid: np.ndarray
    values: np.ndarray
    derivatives: np.ndarray
    log_scale: np.ndarray
    n_steps: int

    def true_values(self) -> np.ndarray:
        return self.values * np.exp(self.log_scale)

    def true_derivatives(self) -> np.ndarray:
        return self.derivatives * np.exp(self.log_scale)

    def to_csv(self, path) -> None:
        write_csv(path, ["x", "u", "du", "log_scale"],
                  zip(self.grid, self.values, self.derivatives, self.log_scale))


def initial_state(bc: BC) -> tuple[float, float]:
    return (0.0, 1.0) if BC.parse(bc) is BC.DIRICHLET else (1.0, 0.0)


def radial_steps_hint(b: float, h: float, x_max: float, per_unit: float = 40.0) -> int:
    """Step count resolving both growth rate and oscillation of the solution."""
    qmax = abs(b) + h * h * math.cosh(x_max) ** 2
    return max(64, int(math.ceil(x_max * (math.sqrt(qmax) + 1.0) * per_unit)))


def radial_solve(i: int, h: float, b: float, bc, x_max: float, tol: float = 1e-10,
                 n_start: int | None = None, n_max: int = 2 ** 22) -> RadialSolution:
    """Integrate the radial equation on ``[0, x_max]``.

    The step count is doubled until the endpoint value changes by less than
    ``tol`` relative to the solution size; the finer of the last two runs is
    returned.  Raises :class:`StiffnessError` when ``n_max`` steps do not
    suffice.
    """
    if not x_max > 0:
        raise ValueError("x_max must be positive")
    if not tol > 0:
        raise ValueError("tol must be positive")
    bc = BC.parse(bc)
    u0, du0 = initial_state(bc)
    h2 = h * h
    n = n_start or radial_steps_hint(b, h, x_max, per_unit=10.0)
    prev = kernels.radial_rk4(b, h2, u0, du0, x_max, n)
    while True:
        n2 = 2 * n
        if n2 > n_max:
            raise StiffnessError(f"radial_solve: no convergence with {n_max} steps", x_reached=x_max)
        cur = kernels.radial_rk4(b, h2, u0, du0, x_max, n2)
        ua, dua, la = prev[0][-1], prev[1][-1], prev[2][-1]
        ub, dub, lb = cur[0][-1], cur[1][-1], cur[2][-1]
        if not (np.isfinite(ub) and np.isfinite(dub)):
            raise StiffnessError("radial_solve: non-finite state", x_reached=x_max)
        # compare in the scale of the finer run
        sa = math.exp(la - lb)
        size = math.hypot(ub, dub)
        if abs(ua * sa - ub) <= tol * size and abs(dua * sa - dub) <= tol * size:
            break
        prev, n = cur, n2
    grid = np.linspace(0.0, x_max, n2 + 1)
    return RadialSolution(index_i=i, h=h, b=b, bc_at_zero=bc, grid=grid, values=cur[0],
                          derivatives=cur[1], log_scale=cur[2], n_steps=n2)


# -- expansion in angular modes -------------------------------------------


def mathieu_expand(samples, h: float, n_modes: int, theta=None):
    """Project ``psi(x_k, theta_j)`` onto the first ``n_modes`` angular modes.

    ``samples`` has shape ``(n_x, n_theta)`` on a uniform periodic theta grid
    ``theta_j = 2 pi j / n_theta`` (the trapezoid rule is then spectrally
    accurate).  Returns ``(coeffs, modes)`` with ``coeffs[i, k] = u_i(x_k)``.
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    n_theta = samples.shape[1]
    if n_theta < 8 * n_modes:
        raise ResolutionError(f"theta grid of {n_theta} points below 8*n_modes={8 * n_modes}")
    if theta is None:
        theta = 2.0 * math.pi * np.arange(n_theta) / n_theta
    modes = angular_spectrum(h, n_modes)
    V = np.stack([angular_eval(m, theta) for m in modes])        # (n_modes, n_theta)
    weight = 2.0 * math.pi / n_theta
    coeffs = weight * samples @ V.T                               # (n_x, n_modes)
    return coeffs.T, modes


def parseval_defect(samples, coeffs) -> np.ndarray:
    """Per-x relative gap between sum_i u_i^2 and the theta-integral of psi^2."""
    samples = np.atleast_2d(samples)
    direct = 2.0 * math.pi / samples.shape[1] * np.sum(samples ** 2, axis=1)
    modal = np.sum(np.asarray(coeffs) ** 2, axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(direct > 0, np.abs(direct - modal) / direct, np.abs(modal))


def write_table(path, rows) -> None:
    """CSV table of ``(i, h, b, class)``."""
    write_csv(path, ["i", "h", "b", "class"],
              ([m.index_i, float(m.h), float(m.b), m.symmetry_class.value] for m in rows))
