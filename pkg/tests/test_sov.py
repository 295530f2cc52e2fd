import math

import numpy as np
import pytest

from oracles import j01
from slitlab.errors import ConfigurationError
from slitlab.geometry import ConfocalEllipse, DomainSpec, SlitSpec
from slitlab.sov import (SovProblem, eigenvalues_sov, energy_grid, index_cutoff, prufer_phase, shoot_residual,
                         write_csv)

# Bessel zero from the power-series + bisection oracle in tests/oracles.py
J01 = 2.4048255576957724

X0_T03 = math.asinh(1 / 0.3)


def test_bessel_oracle_frozen():
    assert j01() == pytest.approx(J01, abs=1e-14)


def test_zero_energy_rejected_for_dirichlet():
    p = SovProblem(t=0.3, x0=1.5, slit_bc="d", outer_bc="d", index_i=0)
    # u = x solves u'' = 0 with the Dirichlet start, so u(x0) = x0 and rho = hypot(x0, 1)
    assert shoot_residual(p, 0.0) == pytest.approx(1.5 / math.hypot(1.5, 1.0), rel=1e-12)


def test_negative_energy_rejected():
    with pytest.raises(ConfigurationError):
        shoot_residual(SovProblem(t=0.3, x0=1.0), -1.0)


def test_sign_bracket_scan_index1():
    """A plain scan of the residual brackets exactly the roots the solver returns for i = 1."""
    p = SovProblem.from_radius(0.3, 1.0, index_i=1)
    Es = np.linspace(0.5, 60.0, 600)
    r = np.array([shoot_residual(p, E) for E in Es])
    brackets = [(Es[k], Es[k + 1]) for k in range(len(Es) - 1) if r[k] * r[k + 1] < 0]
    roots = [e.E for e in eigenvalues_sov(0.3, X0_T03, "d", "d", 60.0) if e.index_i == 1]
    assert len(brackets) == len(roots) >= 1
    for (a, b), E in zip(brackets, roots):
        assert a < E < b


def test_converged_roots_fixed_point():
    eigs = eigenvalues_sov(0.3, X0_T03, "d", "d", 30.0)
    assert len(eigs) == 5
    for ev in eigs:
        p = SovProblem(0.3, X0_T03, "d", "d", ev.index_i)
        # re-shooting with b recomputed at h = t sqrt(E) on a 4x finer grid
        assert abs(shoot_residual(p, ev.E, per_unit=160)) < 1e-6


def test_interlacing_node_counts():
    eigs = eigenvalues_sov(0.3, X0_T03, "d", "d", 160.0)
    for i in {e.index_i for e in eigs}:
        nodes = [e.nodes for e in eigs if e.index_i == i]
        assert nodes == list(range(len(nodes)))


def test_dirichlet_dominates_neumann():
    d = eigenvalues_sov(0.3, X0_T03, "d", "d", 40.0)
    n = eigenvalues_sov(0.3, X0_T03, "n", "d", 40.0)
    k = min(len(d), len(n))
    assert k >= 5
    assert all(a.E >= b.E for a, b in zip(d[:k], n[:k]))


def test_neumann_neumann_has_zero():
    eigs = eigenvalues_sov(0.3, X0_T03, "n", "n", 5.0)
    assert eigs[0].E == 0.0 and eigs[0].index_i == 0


def test_neumann_slit_disk_limit():
    eigs = eigenvalues_sov(0.05, math.asinh(1 / 0.05), "n", "d", 7.0)
    assert abs(eigs[0].E - J01 ** 2) / J01 ** 2 < 0.015


def test_dirichlet_slit_disk_limit_is_slow():
    """The Dirichlet-slit shift decays like 1/log(2/t); at t = 0.05 it is still far above 1.5%."""
    E = eigenvalues_sov(0.05, math.asinh(1 / 0.05), "d", "d", 12.0)[0].E
    assert (E - J01 ** 2) / J01 ** 2 > 0.3


def test_dirichlet_slit_shift_decreases():
    vals = [eigenvalues_sov(t, math.asinh(1 / t), "d", "d", 14.0)[0].E for t in (0.2, 0.05, 0.0125)]
    assert vals[0] > vals[1] > vals[2] > J01 ** 2


def test_phase_monotone_in_energy():
    p = SovProblem.from_radius(0.3, 1.0, index_i=2)
    ph = [prufer_phase(p, E, n_steps=4000) for E in np.linspace(0, 80, 60)]
    assert np.all(np.diff(ph) >= -1e-9)


def test_energy_grid_spacing():
    g = energy_grid(3.0)
    assert g[0] == 0 and g[-1] == 3.0
    assert np.max(np.diff(g)) <= 1 / 20 + 1e-15


def test_index_cutoff():
    n = index_cutoff(0.3, X0_T03, 30.0)
    barrier = 0.09 * 30 * math.cosh(X0_T03) ** 2
    assert ((n + 1) // 2) ** 2 > barrier >= ((n - 1 + 1) // 2) ** 2


def test_from_domain():
    spec = DomainSpec(ConfocalEllipse(X0_T03), [SlitSpec((0, 0), 0, 0.3, "n")], outer_bc={"outer": "n"})
    p = SovProblem.from_domain(spec)
    assert p.outer_radius == pytest.approx(1.0) and p.slit_bc.value == "neumann"


def test_csv(tmp_path):
    eigs = eigenvalues_sov(0.3, X0_T03, "d", "d", 20.0)
    write_csv(tmp_path / "s.csv", eigs)
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "i,E,nodes,residual" and len(lines) == len(eigs) + 1
