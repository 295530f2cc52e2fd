"""Generalized symmetric eigensolver and eigenvalue derivatives."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackError, eigsh

from ..errors import ConfigurationError, DegenerateEigenvalueError, NumericalError
from ..geometry import DomainSpec
from ..io import write_csv
from .assembly import System, assemble, restrict
from .mesh import MeshTemplate, instantiate

log = logging.getLogger(__name__)

DENSE_THRESHOLD = 3000
DEFAULT_SHIFT = -1.0


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray          # ascending
    vectors: np.ndarray              # free-DOF vectors, M-orthonormal columns
    free: np.ndarray
    n_nodes: int
    residuals: np.ndarray            # ||K u - E M u|| / (||M u|| (1 + |E|))
    method: str

    def __len__(self) -> int:
        return len(self.eigenvalues)

    def full_vectors(self) -> np.ndarray:
        out = np.zeros((self.n_nodes, self.vectors.shape[1]))
        out[self.free] = self.vectors
        return out

    def to_csv(self, path) -> None:
        write_csv(path, ["k", "E", "residual"],
                  ([k, float(E), float(r)] for k, (E, r) in enumerate(zip(self.eigenvalues, self.residuals))))


def _start_vector(n: int) -> np.ndarray:
    rng = np.random.default_rng(12345)
    return 1.0 + 0.1 * rng.standard_normal(n)


def _rayleigh_ritz(K, M, V):
    """Re-solve on span(V): sorted values and exactly M-orthonormal vectors."""
    Kr = V.T @ (K @ V)
    Mr = V.T @ (M @ V)
    Kr = 0.5 * (Kr + Kr.T)
    Mr = 0.5 * (Mr + Mr.T)
    w, Y = la.eigh(Kr, Mr)
    U = V @ Y
    # one more M-orthonormalization against rounding
    G = U.T @ (M @ U)
    L = la.cholesky(0.5 * (G + G.T), lower=True)
    U = la.solve_triangular(L, U.T, lower=True).T
    return w, U


def residual_norms(K, M, E, U) -> np.ndarray:
    MU = M @ U
    R = K @ U - MU * E
    return np.linalg.norm(R, axis=0) / (np.linalg.norm(MU, axis=0) * (1.0 + np.abs(E)))


def solve_eigs(K, M, k: int, dense_threshold: int = DENSE_THRESHOLD, shift: float = DEFAULT_SHIFT,
               free: np.ndarray | None = None, n_nodes: int | None = None) -> Spectrum:
    """The ``k`` smallest eigenpairs of ``K u = E M u``.

    Dense LAPACK below ``dense_threshold`` unknowns; above it, shift-invert
    Lanczos around ``shift`` with a sparse LU of ``K - shift M``, retried once
    with a perturbed shift if the factorization fails.
    """
    n = K.shape[0]
    if not 1 <= k <= n:
        raise ConfigurationError(f"requested {k} eigenpairs from a system of size {n}")
    free = np.arange(n) if free is None else free
    n_nodes = n if n_nodes is None else n_nodes
    if n <= dense_threshold:
        Kd = K.toarray() if sp.issparse(K) else np.asarray(K)
        Md = M.toarray() if sp.issparse(M) else np.asarray(M)
        w, V = la.eigh(Kd, Md, subset_by_index=[0, k - 1])
        method = "dense"
    else:
        n_extra = min(n - 1, k + max(8, k // 2))
        w = V = None
        for sigma in (shift, shift * (1.0 + 1e-3) - 1e-3):
            try:
                w, V = eigsh(K.tocsc(), k=n_extra, M=M.tocsc(), sigma=sigma, which="LM",
                             v0=_start_vector(n), tol=0.0, maxiter=20 * n)
                break
            except (RuntimeError, ArpackError) as exc:
                log.warning("shift-invert at sigma=%g failed (%s), retrying", sigma, exc)
        if V is None:
            raise NumericalError("shift-invert factorization failed twice")
        method = "shift-invert"
        order = np.argsort(w)
        V = V[:, order]
    w, V = _rayleigh_ritz(K, M, V)
    w, V = w[:k], V[:, :k]
    # fix signs: largest-magnitude entry positive, for reproducible output
    idx = np.argmax(np.abs(V), axis=0)
    V = V * np.sign(V[idx, np.arange(V.shape[1])])
    res = residual_norms(K, M, w, V)
    return Spectrum(eigenvalues=w, vectors=V, free=free, n_nodes=n_nodes, residuals=res, method=method)


def solve_system(system: System, k: int, **kw) -> Spectrum:
    return solve_eigs(system.K, system.M, k, free=system.free, n_nodes=system.K_full.shape[0], **kw)


def solve_mesh(tmpl: MeshTemplate, t: float, k: int, spec: DomainSpec | None = None, **kw) -> tuple[Spectrum, System]:
    system = assemble(instantiate(tmpl, t), spec)
    return solve_system(system, k, **kw), system


# -- derivatives in t -----------------------------------------------------


def matrix_derivative(tmpl: MeshTemplate, t: float, delta: float, spec: DomainSpec | None = None,
                      check: bool = False):
    """Central differences ``(A(t+delta) - A(t-delta)) / (2 delta)`` of K and M.

    Returns the full (all-node) ``(Kdot, Mdot)``.  With ``check`` the
    difference at ``delta/2`` is also formed and a warning is logged when
    the change is not close to the expected quartering.
    """
    if not 0 < delta < t / 4:
        raise ConfigurationError("delta must satisfy 0 < delta < t/4")

    def diff(d):
        sp_ = assemble(instantiate(tmpl, t + d), spec)
        sm_ = assemble(instantiate(tmpl, t - d), spec)
        return (sp_.K_full - sm_.K_full) / (2 * d), (sp_.M_full - sm_.M_full) / (2 * d)

    Kd, Md = diff(delta)
    if check and tmpl.spec.slits:
        Kd2, Md2 = diff(0.5 * delta)
        Kd4, Md4 = diff(0.25 * delta)
        e1 = sp.linalg.norm(Kd - Kd2)
        e2 = sp.linalg.norm(Kd2 - Kd4)
        if e1 > 0 and not (2.5 < e1 / max(e2, 1e-300) < 6.0):
            log.warning("matrix_derivative: step halving ratio %.3g, expected about 4", e1 / max(e2, 1e-300))
    return Kd.tocsr(), Md.tocsr()


def relative_gap(eigenvalues: np.ndarray, k: int) -> float:
    E = eigenvalues[k]
    gaps = []
    if k > 0:
        gaps.append(E - eigenvalues[k - 1])
    if k + 1 < len(eigenvalues):
        gaps.append(eigenvalues[k + 1] - E)
    if not gaps:
        return np.inf
    return min(gaps) / max(abs(E), 1e-300)


def hellmann_feynman(Kdot, Mdot, spec: Spectrum, k: int, gap_tol: float = 1e-6) -> float:
    """``(u^T Kdot u - E u^T Mdot u) / (u^T M u)`` for the ``k``-th pair.

    ``Kdot`` and ``Mdot`` may be full (all-node) or already restricted to the
    free DOFs.  Raises :class:`DegenerateEigenvalueError` unless the
    eigenvalue is separated from its neighbours by ``gap_tol`` relatively
    (the last computed eigenvalue is checked only from below).
    """
    if relative_gap(spec.eigenvalues, k) <= gap_tol:
        raise DegenerateEigenvalueError(f"eigenvalue {k} is not simple at this t")
    if Kdot.shape[0] != len(spec.free):
        Kdot = restrict(Kdot, spec.free)
        Mdot = restrict(Mdot, spec.free)
    u = spec.vectors[:, k]
    E = spec.eigenvalues[k]
    # columns are M-orthonormal, so u^T M u = 1
    return float(u @ (Kdot @ u) - E * (u @ (Mdot @ u)))
