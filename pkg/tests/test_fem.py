import math

import numpy as np
import pytest
import scipy.sparse as sp

from oracles import rectangle_modes
from slitlab.errors import ConfigurationError, DegenerateEigenvalueError, GeometryError
from slitlab.fem import (assemble, build_template, dirichlet_nodes, hellmann_feynman, instantiate, matrix_derivative,
                         merge_seams, read_mesh, solve_eigs, solve_mesh, solve_system, write_mesh)
from slitlab.geometry import BC, ConfocalEllipse, DomainSpec, EdgeSegment, Rectangle, SlitSpec

SQUARE_BC_N = {e: "n" for e in Rectangle.edges}
MIXED = {"left": "d", "right": "d", "bottom": "n", "top": "n"}


def square(slits=(), bc=None, r0=0.25):
    return DomainSpec(Rectangle(1.0, 1.0), list(slits), outer_bc=bc or {}, chart_radius_r0=r0 if slits else None)


def midslit(t, cond="d", bc=None):
    return square([SlitSpec((0.5, 0.5), 0.0, t, cond)], bc=bc)


def test_plain_square_counts():
    tmpl = build_template(square(), 8)
    assert tmpl.n_nodes == 81 and tmpl.n_triangles == 128 and len(tmpl.seam_pairs) == 0


def test_slit_seam_count():
    spec = square([SlitSpec((0.5, 0.5), 0.0, 0.125)])
    tmpl = build_template(spec, 16)
    assert len(tmpl.seam_pairs) == 3 and len(tmpl.tips) == 2
    assert tmpl.n_nodes == 17 * 17 + 3
    # seam partners coincide but never share a triangle
    a, b = tmpl.seam_pairs.T
    assert np.array_equal(tmpl.ref_coords[a], tmpl.ref_coords[b])
    for u, v in tmpl.seam_pairs:
        star_u = {i for i, tri in enumerate(tmpl.triangles) if u in tri}
        star_v = {i for i, tri in enumerate(tmpl.triangles) if v in tri}
        assert star_u and star_v and not (star_u & star_v)


def test_two_slits_independent():
    spec = DomainSpec(Rectangle(2.0, 1.0), [SlitSpec((0.5, 0.5), 0, 0.125), SlitSpec((1.5, 0.5), math.pi / 2, 0.125)],
                      chart_radius_r0=0.25)
    tmpl = build_template(spec, 16)
    s0, s1 = tmpl.slit_nodes
    ids0 = set(np.concatenate([s0.upper, s0.lower, s0.tips]).tolist())
    ids1 = set(np.concatenate([s1.upper, s1.lower, s1.tips]).tolist())
    assert not ids0 & ids1 and len(s0.upper) == len(s1.upper) == 3


def test_instantiate_reference_and_endpoints():
    tmpl = build_template(midslit(0.2), 32)
    inst = instantiate(tmpl, 0.2)
    assert np.array_equal(inst.coords, tmpl.ref_coords)
    half = instantiate(tmpl, 0.1)
    tips = half.coords[tmpl.tips]
    assert sorted(tips[:, 0]) == pytest.approx([0.4, 0.6], abs=1e-13)
    far = np.linalg.norm(tmpl.ref_coords - 0.5, axis=1) >= 0.5
    assert np.array_equal(half.coords[far], tmpl.ref_coords[far])


@pytest.mark.parametrize("t", [0.2, 0.1, 0.05, 0.0125, 0.24])
def test_areas_positive_and_sum(t):
    inst = instantiate(build_template(midslit(0.2), 32), t)
    assert np.all(inst.areas > 0)
    assert inst.areas.sum() == pytest.approx(1.0, rel=1e-10)


def test_geometry_error_reports_triangle():
    spec = square([SlitSpec((0.5, 0.5), 0.0, 0.2)])
    tmpl = build_template(spec, 8)
    bad = tmpl.ref_coords.copy()
    from slitlab.fem.mesh import _check_areas
    tri = tmpl.triangles[0]
    bad[tri[0]], bad[tri[1]] = bad[tri[1]].copy(), bad[tri[0]].copy()
    with pytest.raises(GeometryError) as exc:
        _check_areas(tmpl, bad, "swapped")
    assert exc.value.worst_triangle is not None


def test_neumann_kernel_and_mass():
    spec = square([SlitSpec((0.5, 0.5), 0.0, 0.2, "n")], bc=SQUARE_BC_N)
    system = assemble(instantiate(build_template(spec, 16), 0.1), spec)
    assert system.n_free == system.K_full.shape[0]
    ones = np.ones(system.n_free)
    assert np.max(np.abs(system.K @ ones)) < 1e-12
    assert system.M_full.sum() == pytest.approx(1.0, rel=1e-10)


def test_symmetric_matrices():
    system = assemble(instantiate(build_template(midslit(0.2), 16), 0.07))
    for A in (system.K, system.M):
        assert abs(A - A.T).max() == 0.0


def test_empty_free_set():
    spec = DomainSpec(Rectangle(1, 1))
    tmpl = build_template(spec, 1)
    with pytest.raises(ConfigurationError):
        assemble(instantiate(tmpl, 1.0), spec)


def test_dirichlet_square_upper_bound():
    spec, _ = solve_mesh(build_template(square(), 32), 1.0, 1)
    E0 = 2 * math.pi ** 2
    assert E0 < spec.eigenvalues[0] < 1.01 * E0


def test_mixed_rectangle_first_value():
    spec = DomainSpec(Rectangle(math.sqrt(2), 1.0), outer_bc=MIXED)
    s, _ = solve_mesh(build_template(spec, 32), 1.0, 3)
    assert s.eigenvalues[0] == pytest.approx(math.pi ** 2 / 2, rel=0.01)


def test_refinement_monotone_towards_reference():
    spec = DomainSpec(Rectangle(math.sqrt(2), 1.0), outer_bc=MIXED)
    ref = rectangle_modes(math.sqrt(2), 1.0, 1, 0, 6)
    prev = None
    for res in (8, 16, 32):
        vals = solve_mesh(build_template(spec, res), 1.0, 6)[0].eigenvalues
        assert np.all(vals >= ref - 1e-9)
        if prev is not None:
            assert np.all(vals <= prev + 1e-12)
        prev = vals


def test_spectrum_contracts():
    s, system = solve_mesh(build_template(midslit(0.2), 24), 0.1, 8)
    V = s.vectors
    assert V.T @ (system.M @ V) == pytest.approx(np.eye(8), abs=1e-8)
    rq = np.einsum("ij,ij->j", V, system.K @ V) / np.einsum("ij,ij->j", V, system.M @ V)
    assert rq == pytest.approx(s.eigenvalues, rel=1e-8)
    assert np.all(s.residuals <= 1e-8)


def test_dense_and_shift_invert_agree():
    tmpl = build_template(midslit(0.2), 24)
    system = assemble(instantiate(tmpl, 0.1))
    a = solve_system(system, 6, dense_threshold=10 ** 9)
    b = solve_system(system, 6, dense_threshold=0)
    assert a.method == "dense" and b.method == "shift-invert"
    assert b.eigenvalues == pytest.approx(a.eigenvalues, rel=1e-10)
    assert np.all(b.residuals <= 1e-8)


def test_dirichlet_slit_raises_ground_state():
    E0 = 2 * math.pi ** 2
    for res in (16, 32):
        s, _ = solve_mesh(build_template(midslit(0.125), res), 0.125, 1)
        assert s.eigenvalues[0] > E0 + 1.0


def test_short_neumann_slit_matches_unslit():
    spec = square([SlitSpec((0.5, 0.5), 0.0, 1 / 32, "n")])
    tmpl = build_template(spec, 32)
    slit = solve_mesh(tmpl, 1 / 32, 6)[0].eigenvalues
    plain = solve_mesh(build_template(square(), 32), 1.0, 6)[0].eigenvalues
    assert slit == pytest.approx(plain, rel=0.01)


def test_merged_seams_reproduce_unslit_exactly():
    spec = DomainSpec(Rectangle(1, 1), [SlitSpec((0.5, 0.5), 0.0, 0.2, "n")], chart_radius_r0=0.25)
    tmpl = build_template(spec, 20)
    merged = merge_seams(tmpl)
    plain = build_template(square(), 20, pattern_center=(0.5, 0.5))
    assert merged.n_nodes == plain.n_nodes and merged.n_triangles == plain.n_triangles
    sm = assemble(instantiate(merged, 1.0), merged.spec)
    sp_ = assemble(instantiate(plain, 1.0), plain.spec)
    # same node positions up to numbering
    order_m = np.lexsort(np.round(merged.ref_coords, 12).T)
    order_p = np.lexsort(np.round(plain.ref_coords, 12).T)
    assert np.max(np.abs(merged.ref_coords[order_m] - plain.ref_coords[order_p])) < 1e-14
    pm = np.empty(merged.n_nodes, dtype=int)
    pm[order_p] = order_m
    Km = sm.K_full[pm][:, pm]
    assert abs(Km - sp_.K_full).max() < 1e-12
    Em = solve_system(sm, 6).eigenvalues
    Ep = solve_system(sp_, 6).eigenvalues
    assert Em == pytest.approx(Ep, rel=1e-12)


def test_dirichlet_nodes_with_segments():
    spec = DomainSpec(Rectangle(1.0, 0.5), outer_bc={"left": "d", "right": "d", "bottom": "n", "top": "n"},
                      segments=[EdgeSegment("top", 0.25, 0.75, "d")])
    tmpl = build_template(spec, 8)
    dn = set(dirichlet_nodes(tmpl).tolist())
    top = tmpl.edge_nodes["top"]
    s = tmpl.edge_param["top"]
    for node, x in zip(top, s):
        expect = x <= 1e-12 or x >= 1 - 1e-12 or 0.25 - 1e-12 <= x <= 0.75 + 1e-12
        assert (node in dn) == expect


def test_ellipse_template_and_areas():
    x0 = math.asinh(1 / 0.3)
    spec = DomainSpec(ConfocalEllipse(x0), [SlitSpec((0, 0), 0, 0.3, "d")], outer_bc={"outer": "d"})
    tmpl = build_template(spec, 8)
    inst = instantiate(tmpl, 0.3)
    assert np.all(inst.areas > 0)
    # the polygonal domain is inscribed; its area converges to pi R sqrt(R^2+t^2) from below
    assert 0.97 * spec.area < inst.areas.sum() < spec.area


def test_matrix_derivative_structure():
    spec = midslit(0.2)
    tmpl = build_template(spec, 16)
    Kd, Md = matrix_derivative(tmpl, 0.1, 0.001)
    moving = np.linalg.norm(tmpl.ref_coords - 0.5, axis=1) < 0.5
    rows = np.unique(sp.coo_matrix(Kd).row[np.abs(sp.coo_matrix(Kd).data) > 0])
    touched = set(tmpl.triangles[np.any(moving[tmpl.triangles], axis=1)].ravel().tolist())
    assert set(rows.tolist()) <= touched
    plain = build_template(square(), 16)
    Kp, Mp = matrix_derivative(plain, 0.5, 0.01)
    assert abs(Kp).max() == 0 and abs(Mp).max() == 0


def test_matrix_derivative_richardson():
    tmpl = build_template(midslit(0.2), 16)
    D = [matrix_derivative(tmpl, 0.1, d)[0] for d in (0.008, 0.004, 0.002)]
    e1 = sp.linalg.norm(D[0] - D[1])
    e2 = sp.linalg.norm(D[1] - D[2])
    assert 3.0 < e1 / e2 < 5.0


def test_hellmann_feynman_matches_difference():
    tmpl = build_template(midslit(0.2), 24)
    t, d = 0.1, 1e-4
    s, _ = solve_mesh(tmpl, t, 3)
    Kd, Md = matrix_derivative(tmpl, t, 1e-3)
    hf = hellmann_feynman(Kd, Md, s, 0)
    Ep = solve_mesh(tmpl, t + d, 1)[0].eigenvalues[0]
    Em = solve_mesh(tmpl, t - d, 1)[0].eigenvalues[0]
    fd = (Ep - Em) / (2 * d)
    assert hf > 0
    assert abs(hf - fd) / s.eigenvalues[0] < 1e-3


def test_hellmann_feynman_no_slit_and_degenerate():
    tmpl = build_template(square(), 12)
    s, _ = solve_mesh(tmpl, 0.5, 4)
    Kd, Md = matrix_derivative(tmpl, 0.5, 0.01)
    assert hellmann_feynman(Kd, Md, s, 0) == 0.0
    with pytest.raises(DegenerateEigenvalueError):
        hellmann_feynman(Kd, Md, s, 1)


def test_mesh_dump_round_trip(tmp_path):
    tmpl = build_template(midslit(0.2), 16)
    write_mesh(tmp_path / "m.txt", tmpl)
    coords, tris, tags, seams = read_mesh(tmp_path / "m.txt")
    assert np.array_equal(coords, tmpl.ref_coords) and np.array_equal(tris, tmpl.triangles)
    assert tags == tmpl.node_tags and np.array_equal(seams, tmpl.seam_pairs)


def test_solve_eigs_rejects_large_k():
    K = sp.identity(4, format="csr")
    with pytest.raises(ConfigurationError):
        solve_eigs(K, K, 5)
