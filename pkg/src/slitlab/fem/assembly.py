"""P1 stiffness and mass matrices with Dirichlet DOFs eliminated."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .. import kernels
from ..errors import ConfigurationError
from ..geometry import DomainSpec
from .mesh import MeshInstance, dirichlet_nodes


@dataclass
class System:
    """Full (all-node) matrices plus the free/Dirichlet split.

    ``K`` and ``M`` are the matrices restricted to the free DOFs.
    """

    K_full: sp.csr_matrix
    M_full: sp.csr_matrix
    free: np.ndarray
    dirichlet: np.ndarray

    @property
    def K(self) -> sp.csr_matrix:
        return restrict(self.K_full, self.free)

    @property
    def M(self) -> sp.csr_matrix:
        return restrict(self.M_full, self.free)

    @property
    def n_free(self) -> int:
        return len(self.free)

    def expand(self, vecs: np.ndarray) -> np.ndarray:
        """Embed free-DOF vectors into full node vectors (zero on Dirichlet nodes)."""
        vecs = np.asarray(vecs)
        out = np.zeros((self.K_full.shape[0],) + vecs.shape[1:])
        out[self.free] = vecs
        return out


def restrict(A: sp.spmatrix, free: np.ndarray) -> sp.csr_matrix:
    return A[free][:, free].tocsr()


def assemble_full(coords: np.ndarray, tris: np.ndarray, n_nodes: int | None = None):
    """Global P1 stiffness and consistent mass matrices over all nodes."""
    n = len(coords) if n_nodes is None else n_nodes
    _, Ke, Me = kernels.p1_local(coords, tris)
    rows = np.repeat(tris, 3, axis=1).ravel()
    cols = np.tile(tris, (1, 3)).ravel()
    K = sp.coo_matrix((Ke.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    M = sp.coo_matrix((Me.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    # exact symmetry regardless of summation order
    K = 0.5 * (K + K.T)
    M = 0.5 * (M + M.T)
    return K.tocsr(), M.tocsr()


def free_dofs(n_nodes: int, dirichlet: np.ndarray) -> np.ndarray:
    mask = np.ones(n_nodes, dtype=bool)
    mask[dirichlet] = False
    return np.nonzero(mask)[0]


def assemble(mesh: MeshInstance, spec: DomainSpec | None = None) -> System:
    """Assemble ``K`` and ``M`` for ``mesh`` with the conditions of ``spec``.

    Neumann parts need no action; Dirichlet nodes (outer pieces and both
    faces plus tips of Dirichlet slits) are removed from the unknowns.
    """
    tmpl = mesh.template
    K, M = assemble_full(mesh.coords, tmpl.triangles, tmpl.n_nodes)
    dn = dirichlet_nodes(tmpl, spec)
    free = free_dofs(tmpl.n_nodes, dn)
    if len(free) == 0:
        raise ConfigurationError("no free degrees of freedom")
    return System(K_full=K, M_full=M, free=free, dirichlet=dn)
