"""Fixed-topology structured triangulations of slit domains.

A :class:`MeshTemplate` is built once, at the reference half-length of the
slits.  Nodes on the open slit segment are duplicated: the original node
belongs to the triangles on one side (above a horizontal slit, right of a
vertical one) and the copy to the other side, so the two faces carry
independent degrees of freedom.  Tips are shared.  Changing the slit length
only moves nodes (:func:`instantiate`), so every instance has the same DOFs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .. import kernels
from ..errors import ConfigurationError, GeometryError, SamplingError
from ..geometry import BC, ConfocalEllipse, DomainSpec, Rectangle, node_motion_map
from ..io import atomic_open

SNAP_FRACTION = 0.3


@dataclass
class SlitNodes:
    upper: np.ndarray       # original nodes on the open slit (one face)
    lower: np.ndarray       # their copies (other face), same order
    tips: np.ndarray


@dataclass
class MeshTemplate:
    spec: DomainSpec
    t_ref: float
    ref_coords: np.ndarray
    triangles: np.ndarray
    node_tags: list[str]
    edge_nodes: dict[str, np.ndarray]
    edge_param: dict[str, np.ndarray]
    slit_nodes: list[SlitNodes] = field(default_factory=list)
    resolution: float = 0.0
    grid_axes: tuple | None = None      # (z, theta) samples of an ellipse template

    @property
    def n_nodes(self) -> int:
        return len(self.ref_coords)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def seam_pairs(self) -> np.ndarray:
        if not self.slit_nodes:
            return np.zeros((0, 2), dtype=np.int64)
        return np.concatenate([np.stack([s.upper, s.lower], axis=1) for s in self.slit_nodes])

    @property
    def tips(self) -> np.ndarray:
        if not self.slit_nodes:
            return np.zeros(0, dtype=np.int64)
        return np.concatenate([s.tips for s in self.slit_nodes])

    @property
    def is_ellipse(self) -> bool:
        return isinstance(self.spec.outer, ConfocalEllipse)

    def slit_scale(self, k: int) -> float:
        """Half-length of slit ``k`` relative to slit 0 (all slits scale together)."""
        return self.spec.slits[k].half_length_t / self.t_ref


@dataclass
class MeshInstance:
    template: MeshTemplate
    t: float
    coords: np.ndarray
    areas: np.ndarray
    _locator: object = field(default=None, repr=False)

    @property
    def triangles(self) -> np.ndarray:
        return self.template.triangles

    def locate(self, points) -> tuple[np.ndarray, np.ndarray]:
        if self._locator is None:
            self._locator = PointLocator(self)
        return self._locator(points)


# -- rectangle ------------------------------------------------------------


def _axis_lines(length: float, res: float, breaks) -> np.ndarray:
    n = max(1, int(math.ceil(length * res - 1e-9)))
    spacing = length / n
    lines = [k * spacing for k in range(n + 1)]
    lines[-1] = length
    fixed = [True] + [False] * (n - 1) + [True]
    tol = 1e-12 * max(length, 1.0)
    for b in sorted(set(float(v) for v in breaks)):
        if b < -tol or b > length + tol:
            raise ConfigurationError(f"breakpoint {b} outside [0, {length}]")
        d = [abs(x - b) for x in lines]
        j = int(np.argmin(d))
        if d[j] <= tol:
            fixed[j] = True
            lines[j] = b if 0 < j < len(lines) - 1 else lines[j]
        elif d[j] <= SNAP_FRACTION * spacing and not fixed[j]:
            lines[j] = b
            fixed[j] = True
        else:
            lines.append(b)
            fixed.append(True)
            order = np.argsort(lines, kind="stable")
            lines = [lines[i] for i in order]
            fixed = [fixed[i] for i in order]
    out = np.array(lines)
    if np.any(np.diff(out) <= 0):
        raise ConfigurationError("grid breakpoints collapse at this resolution")
    return out


def _check_alignment(spec: DomainSpec) -> None:
    for k, s in enumerate(spec.slits):
        a = s.angle % math.pi
        if not (abs(a) < 1e-12 or abs(a - math.pi) < 1e-12 or abs(a - 0.5 * math.pi) < 1e-12):
            raise ConfigurationError(f"slit {k}: only horizontal or vertical slits can be meshed")


def _is_horizontal(angle: float) -> bool:
    a = angle % math.pi
    return abs(a) < 1e-12 or abs(a - math.pi) < 1e-12


def build_rectangle(spec: DomainSpec, resolution: float, pattern_center=None) -> MeshTemplate:
    a, b = spec.outer.width, spec.outer.height
    _check_alignment(spec)
    xb, yb = [], []
    for s in spec.slits:
        cx, cy = s.center
        t = s.half_length_t
        if _is_horizontal(s.angle):
            xb += [cx - t, cx + t]
            yb.append(cy)
        else:
            yb += [cy - t, cy + t]
            xb.append(cx)
    for seg in spec.segments:
        (xb if seg.edge in ("bottom", "top") else yb).extend([seg.lo, seg.hi])
    xs = _axis_lines(a, resolution, xb)
    ys = _axis_lines(b, resolution, yb)
    nx, ny = len(xs) - 1, len(ys) - 1
    X, Y = np.meshgrid(xs, ys)
    coords = np.stack([X.ravel(), Y.ravel()], axis=1)

    def nid(i, j):
        return j * (nx + 1) + i

    px, py = (0.5 * a, 0.5 * b) if pattern_center is None else pattern_center
    tris = []
    for j in range(ny):
        for i in range(nx):
            p00, p10, p01, p11 = nid(i, j), nid(i + 1, j), nid(i, j + 1), nid(i + 1, j + 1)
            cx = 0.5 * (xs[i] + xs[i + 1])
            cy = 0.5 * (ys[j] + ys[j + 1])
            if (cx - px) * (cy - py) >= 0:
                tris += [(p00, p10, p11), (p00, p11, p01)]
            else:
                tris += [(p00, p10, p01), (p10, p11, p01)]
    tris = np.array(tris, dtype=np.int64)

    tags = ["interior"] * len(coords)
    edge_nodes, edge_param = {}, {}
    grid_i = np.tile(np.arange(nx + 1), ny + 1)
    grid_j = np.repeat(np.arange(ny + 1), nx + 1)
    masks = {"bottom": grid_j == 0, "top": grid_j == ny, "left": grid_i == 0, "right": grid_i == nx}
    for edge in ("bottom", "top", "left", "right"):
        ids = np.nonzero(masks[edge])[0]
        edge_nodes[edge] = ids
        edge_param[edge] = coords[ids, 0] if edge in ("bottom", "top") else coords[ids, 1]
        for n in ids:
            if tags[n] == "interior":
                tags[n] = edge

    coords_list = [coords]
    n_total = len(coords)
    slit_nodes = []
    cent = coords[tris].mean(axis=1)    # copies share coordinates, so this stays valid
    for k, s in enumerate(spec.slits):
        cx, cy = s.center
        t = s.half_length_t
        horiz = _is_horizontal(s.angle)
        tol = 1e-9 * max(a, b)
        if horiz:
            on_line = np.abs(coords[:, 1] - cy) <= tol
            along = coords[:, 0] - cx
        else:
            on_line = np.abs(coords[:, 0] - cx) <= tol
            along = coords[:, 1] - cy
        inner = np.nonzero(on_line & (np.abs(along) < t - tol))[0]
        tip_ids = np.nonzero(on_line & (np.abs(np.abs(along) - t) <= tol))[0]
        if len(tip_ids) != 2:
            raise ConfigurationError(f"slit {k} is not aligned with the grid")
        copies = np.arange(n_total, n_total + len(inner), dtype=np.int64)
        n_total += len(inner)
        coords_list.append(coords[inner].copy())
        lut = np.arange(n_total, dtype=np.int64)
        lut[inner] = copies
        side = cent[:, 1] < cy if horiz else cent[:, 0] < cx
        tris[side] = lut[tris[side]]
        for n in inner:
            tags[n] = f"slit{k}+"
        tags += [f"slit{k}-"] * len(inner)
        for n in tip_ids:
            tags[n] = f"tip{k}"
        order = np.argsort(along[inner])
        slit_nodes.append(SlitNodes(upper=inner[order], lower=copies[order], tips=tip_ids[np.argsort(along[tip_ids])]))
    coords = np.concatenate(coords_list)
    tmpl = MeshTemplate(spec=spec, t_ref=spec.slits[0].half_length_t if spec.slits else 0.0,
                        ref_coords=coords, triangles=tris, node_tags=tags, edge_nodes=edge_nodes,
                        edge_param=edge_param, slit_nodes=slit_nodes, resolution=resolution)
    _check_areas(tmpl, coords, "reference")
    return tmpl


# -- confocal ellipse -------------------------------------------------------


def ellipse_grid_size(x0: float, R: float, t: float, resolution: float) -> tuple[int, int]:
    """(radial cells, angular cells) giving spacing ~1/resolution at the outer boundary."""
    s = math.hypot(R, t)
    nz = max(4, int(math.ceil(x0 * resolution * s)))
    nth = max(8, 4 * int(math.ceil(2.0 * math.pi * s * resolution / 4.0)))
    return nz, nth


def build_ellipse(spec: DomainSpec, resolution: float) -> MeshTemplate:
    slit = spec.slits[0]
    t = slit.half_length_t
    x0 = spec.outer.x0
    R = t * math.sinh(x0)
    nz, nth = ellipse_grid_size(x0, R, t, resolution)
    z = np.linspace(0.0, x0, nz + 1)
    th = 2.0 * math.pi * np.arange(nth) / nth
    # node (k, j) -> k * nth + j
    Z, TH = np.meshgrid(z, th, indexing="ij")
    r = t * np.sinh(Z)
    coords = np.stack([np.sqrt(r * r + t * t) * np.cos(TH), r * np.sin(TH)], axis=-1).reshape(-1, 2)

    def nid(k, j):
        return k * nth + (j % nth)

    tris = []
    for k in range(nz):
        for j in range(nth):
            p00, p10, p01, p11 = nid(k, j), nid(k + 1, j), nid(k, j + 1), nid(k + 1, j + 1)
            quadrant = (4 * j) // nth
            if quadrant % 2 == 0:
                tris += [(p00, p10, p11), (p00, p11, p01)]
            else:
                tris += [(p00, p10, p01), (p10, p11, p01)]
    tris = np.array(tris, dtype=np.int64)

    # row 0 is the slit; node j and nth - j coincide (two faces)
    half = nth // 2
    upper = np.arange(1, half, dtype=np.int64)
    lower = (nth - upper).astype(np.int64)
    tips = np.array([0, half], dtype=np.int64)
    tags = ["interior"] * len(coords)
    for n in upper:
        tags[n] = "slit0+"
    for n in lower:
        tags[n] = "slit0-"
    for n in tips:
        tags[n] = "tip0"
    outer = np.arange(nz * nth, (nz + 1) * nth, dtype=np.int64)
    for n in outer:
        tags[n] = "outer"
    rot = _rotation(slit.angle)
    coords = coords @ rot.T + np.asarray(slit.center)
    tmpl = MeshTemplate(spec=spec, t_ref=t, ref_coords=coords, triangles=tris, node_tags=tags,
                        edge_nodes={"outer": outer}, edge_param={"outer": th.copy()},
                        slit_nodes=[SlitNodes(upper=upper, lower=lower, tips=tips)], resolution=resolution,
                        grid_axes=(z, th))
    _check_areas(tmpl, coords, "reference")
    return tmpl


def _rotation(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def build_template(spec: DomainSpec, resolution: float, pattern_center=None) -> MeshTemplate:
    """Structured template for ``spec``; ``resolution`` is cells per unit length."""
    if not resolution >= 1:
        raise ConfigurationError("resolution must be at least 1")
    spec.validate()
    if isinstance(spec.outer, Rectangle):
        return build_rectangle(spec, resolution, pattern_center)
    return build_ellipse(spec, resolution)


# -- instances ------------------------------------------------------------


def _signed_areas(coords, tris) -> np.ndarray:
    p = coords[tris]
    return 0.5 * ((p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
                  - (p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0]))


def _check_areas(tmpl, coords, label):
    areas = _signed_areas(coords, tmpl.triangles)
    worst = int(np.argmin(areas))
    if areas[worst] <= 0:
        raise GeometryError(f"{label} mesh has a non-positive triangle {worst} (area {areas[worst]:.3e})",
                            worst_triangle=worst, worst_area=float(areas[worst]))
    return areas


def instance_coords(tmpl: MeshTemplate, t: float) -> np.ndarray:
    if not t > 0:
        raise ConfigurationError("slit half-length must be positive")
    if not tmpl.spec.slits or t == tmpl.t_ref:
        return tmpl.ref_coords.copy()
    if tmpl.is_ellipse:
        slit = tmpl.spec.slits[0]
        z, th = tmpl.grid_axes
        r = tmpl.t_ref * np.sinh(z)
        Rr, TH = np.meshgrid(r, th, indexing="ij")
        loc = np.stack([np.sqrt(Rr * Rr + t * t) * np.cos(TH), Rr * np.sin(TH)], axis=-1).reshape(-1, 2)
        base = loc @ _rotation(slit.angle).T + np.asarray(slit.center)
        n_grid = len(base)
        out = tmpl.ref_coords.copy()
        out[:n_grid] = base
        return out
    r0 = tmpl.spec.chart_radius_r0
    coords = tmpl.ref_coords
    for k, s in enumerate(tmpl.spec.slits):
        scale = tmpl.slit_scale(k)
        coords = node_motion_map(coords, s.half_length_t, t * scale, r0, s.center, s.angle)
    return coords


def instantiate(tmpl: MeshTemplate, t: float) -> MeshInstance:
    """Node positions for slit half-length ``t`` (slit 0; other slits scale along)."""
    coords = instance_coords(tmpl, t)
    areas = _check_areas(tmpl, coords, f"t={t:g}")
    return MeshInstance(template=tmpl, t=float(t), coords=coords, areas=areas)


def merge_seams(tmpl: MeshTemplate) -> MeshTemplate:
    """The same triangulation with every seam pair glued (slits removed).

    Copies keep their ids but no triangle references them; they are marked
    ``unused`` and should be dropped with :func:`compact`.
    """
    tris = tmpl.triangles.copy()
    pairs = tmpl.seam_pairs
    if len(pairs):
        lut = np.arange(tmpl.n_nodes)
        lut[pairs[:, 1]] = pairs[:, 0]
        tris = lut[tris]
    spec = DomainSpec(outer=tmpl.spec.outer, slits=[], outer_bc=dict(tmpl.spec.outer_bc),
                      chart_radius_r0=tmpl.spec.chart_radius_r0, segments=list(tmpl.spec.segments)) \
        if not tmpl.is_ellipse else tmpl.spec
    tags = list(tmpl.node_tags)
    for p in pairs:
        tags[p[0]] = "interior"
        tags[p[1]] = "unused"
    for n in tmpl.tips:
        tags[n] = "interior"
    merged = MeshTemplate(spec=spec, t_ref=tmpl.t_ref, ref_coords=tmpl.ref_coords.copy(), triangles=tris,
                          node_tags=tags, edge_nodes=dict(tmpl.edge_nodes), edge_param=dict(tmpl.edge_param),
                          slit_nodes=[], resolution=tmpl.resolution)
    return compact(merged)


def compact(tmpl: MeshTemplate) -> MeshTemplate:
    """Drop nodes referenced by no triangle and renumber."""
    used = np.zeros(tmpl.n_nodes, dtype=bool)
    used[tmpl.triangles.ravel()] = True
    if used.all():
        return tmpl
    new_id = -np.ones(tmpl.n_nodes, dtype=np.int64)
    new_id[used] = np.arange(used.sum())
    edge_nodes, edge_param = {}, {}
    for e, ids in tmpl.edge_nodes.items():
        keep = used[ids]
        edge_nodes[e] = new_id[ids[keep]]
        edge_param[e] = tmpl.edge_param[e][keep]
    slit_nodes = [SlitNodes(new_id[s.upper], new_id[s.lower], new_id[s.tips]) for s in tmpl.slit_nodes]
    return MeshTemplate(spec=tmpl.spec, t_ref=tmpl.t_ref, ref_coords=tmpl.ref_coords[used],
                        triangles=new_id[tmpl.triangles], node_tags=[g for g, u in zip(tmpl.node_tags, used) if u],
                        edge_nodes=edge_nodes, edge_param=edge_param, slit_nodes=slit_nodes,
                        resolution=tmpl.resolution)


# -- boundary conditions --------------------------------------------------


def dirichlet_nodes(tmpl: MeshTemplate, spec: DomainSpec | None = None) -> np.ndarray:
    """Nodes in the closure of the Dirichlet part of the boundary.

    ``spec`` may override the conditions of the template's own domain (it
    must describe the same geometry).
    """
    spec = spec or tmpl.spec
    out = set()
    tol = 1e-12
    for edge, ids in tmpl.edge_nodes.items():
        s = tmpl.edge_param[edge]
        dirichlet = np.full(len(ids), spec.outer_bc[edge] is BC.DIRICHLET)
        segs = [g for g in spec.segments if g.edge == edge]
        if segs:
            span = (spec.outer.width if edge in ("bottom", "top") else spec.outer.height)
            # rebuild the condition as a union of closed Dirichlet intervals
            pieces = _edge_pieces(spec.outer_bc[edge], segs, span)
            dirichlet = np.zeros(len(ids), dtype=bool)
            for lo, hi in pieces:
                dirichlet |= (s >= lo - tol * span) & (s <= hi + tol * span)
        out.update(ids[dirichlet].tolist())
    for k, sn in enumerate(tmpl.slit_nodes):
        if spec.slits[k].condition is BC.DIRICHLET:
            out.update(sn.upper.tolist())
            out.update(sn.lower.tolist())
            out.update(sn.tips.tolist())
    return np.array(sorted(out), dtype=np.int64)


def _edge_pieces(base: BC, segs, span: float) -> list[tuple[float, float]]:
    cuts = sorted({0.0, span} | {g.lo for g in segs} | {g.hi for g in segs})
    pieces = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        mid = 0.5 * (lo + hi)
        cond = base
        for g in segs:
            if g.lo <= mid <= g.hi:
                cond = g.condition
        if cond is BC.DIRICHLET:
            pieces.append((lo, hi))
    return pieces


# -- point location -------------------------------------------------------


class PointLocator:
    """Triangle lookup through a k-d tree on centroids plus barycentric tests."""

    def __init__(self, inst: MeshInstance, n_candidates: int = 16):
        self.inst = inst
        self.tris = inst.template.triangles
        self.centroids = inst.coords[self.tris].mean(axis=1)
        self.tree = cKDTree(self.centroids)
        self.k = min(n_candidates, len(self.tris))

    def __call__(self, points) -> tuple[np.ndarray, np.ndarray]:
        pts = np.ascontiguousarray(np.asarray(points, dtype=float).reshape(-1, 2))
        _, cand = self.tree.query(pts, k=self.k)
        cand = np.asarray(cand, dtype=np.int64).reshape(len(pts), -1)
        tri, bary = kernels.locate(pts, self.inst.coords, self.tris, cand)
        miss = np.nonzero(tri < 0)[0]
        if len(miss):
            tri, bary = tri.copy(), bary.copy()
            allc = np.broadcast_to(np.arange(len(self.tris), dtype=np.int64), (len(miss), len(self.tris)))
            t2, b2 = kernels.locate(pts[miss], self.inst.coords, self.tris, np.ascontiguousarray(allc))
            tri[miss], bary[miss] = t2, b2
            if np.any(t2 < 0):
                bad = pts[miss][t2 < 0][0]
                raise SamplingError(f"point ({bad[0]:.6g}, {bad[1]:.6g}) lies outside the mesh")
        return tri, bary


# -- text dump ------------------------------------------------------------


def write_mesh(path, tmpl: MeshTemplate, coords: np.ndarray | None = None) -> None:
    """Node lines ``n id x y tag``, triangle lines ``t a b c``, seam lines ``s id1 id2``."""
    coords = tmpl.ref_coords if coords is None else coords
    with atomic_open(path) as fh:
        for i, (p, tag) in enumerate(zip(coords, tmpl.node_tags)):
            fh.write(f"n {i} {float(p[0])!r} {float(p[1])!r} {tag}\n")
        for a, b, c in tmpl.triangles:
            fh.write(f"t {a} {b} {c}\n")
        for a, b in tmpl.seam_pairs:
            fh.write(f"s {a} {b}\n")


def read_mesh(path) -> tuple[np.ndarray, np.ndarray, list[str], np.ndarray]:
    """Inverse of :func:`write_mesh`: ``(coords, triangles, tags, seam_pairs)``."""
    nodes, tris, seams = [], [], []
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "n":
                nodes.append((int(parts[1]), float(parts[2]), float(parts[3]), parts[4]))
            elif parts[0] == "t":
                tris.append(tuple(int(v) for v in parts[1:4]))
            elif parts[0] == "s":
                seams.append((int(parts[1]), int(parts[2])))
            else:
                raise ConfigurationError(f"unknown mesh record {parts[0]!r}")
    nodes.sort()
    coords = np.array([(x, y) for _, x, y, _ in nodes])
    tags = [g for *_, g in nodes]
    return coords, np.array(tris, dtype=np.int64), tags, np.array(seams, dtype=np.int64).reshape(-1, 2)
