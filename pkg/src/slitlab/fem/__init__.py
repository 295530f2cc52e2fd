"""P1 finite elements on slit domains."""

from .assembly import System, assemble, assemble_full
from .mesh import (MeshInstance, MeshTemplate, build_template, dirichlet_nodes, instantiate, merge_seams,
                   read_mesh, write_mesh)
from .solver import Spectrum, hellmann_feynman, matrix_derivative, solve_eigs, solve_mesh, solve_system

__all__ = [
    "MeshInstance", "MeshTemplate", "Spectrum", "System", "assemble", "assemble_full", "build_template",
    "dirichlet_nodes", "hellmann_feynman", "instantiate", "matrix_derivative", "merge_seams", "read_mesh",
    "solve_eigs", "solve_mesh", "solve_system", "write_mesh",
]
