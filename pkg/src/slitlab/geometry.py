"""Coordinates around a slit and the domain description.

Elliptical coordinates ``(r, theta)`` about a slit of half-length ``t`` are

    x = sqrt(r**2 + t**2) * cos(theta),    y = r * sin(theta),

so ``r = const`` traces an ellipse with foci at ``(+-t, 0)`` and ``r = 0`` is
the slit itself.  The two faces of the slit are the points ``r = 0`` with
``theta`` in ``(0, pi)`` (upper face) and ``(pi, 2 pi)`` (lower face).

The node-motion map changes the slit length from ``t_ref`` to ``t`` while
keeping every point farther than ``2 r0`` from the slit centre fixed.  It is
the composite of two blended charts

    (r, theta) -> (sqrt(r**2 + t**2 sigma(r / r0)) cos(theta), r sin(theta))

with a cutoff ``sigma`` equal to 1 on ``[0, 1]`` and 0 on ``[2, inf)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigurationError

TWO_PI = 2.0 * math.pi


class BC(str, Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"

    @classmethod
    def parse(cls, value) -> "BC":
        if isinstance(value, BC):
            return value
        key = str(value).strip().lower()
        aliases = {"d": cls.DIRICHLET, "dirichlet": cls.DIRICHLET,
                   "n": cls.NEUMANN, "neumann": cls.NEUMANN}
        if key not in aliases:
            raise ConfigurationError(f"unknown boundary condition {value!r}")
        return aliases[key]


@dataclass(frozen=True)
class SlitSpec:
    """A straight slit with the same condition on both faces."""

    center: tuple[float, float]
    angle: float
    half_length_t: float
    condition: BC = BC.DIRICHLET

    def __post_init__(self):
        if not self.half_length_t > 0:
            raise ConfigurationError("slit half-length must be positive")
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        object.__setattr__(self, "condition", BC.parse(self.condition))

    @property
    def direction(self) -> np.ndarray:
        return np.array([math.cos(self.angle), math.sin(self.angle)])

    def endpoints(self, t: float | None = None) -> tuple[np.ndarray, np.ndarray]:
        t = self.half_length_t if t is None else t
        c = np.asarray(self.center)
        return c - t * self.direction, c + t * self.direction

    def to_local(self, points) -> np.ndarray:
        """Cartesian points -> slit frame (slit along the x-axis, centre at 0)."""
        p = np.asarray(points, dtype=float) - np.asarray(self.center)
        c, s = math.cos(self.angle), math.sin(self.angle)
        return np.stack([c * p[..., 0] + s * p[..., 1], -s * p[..., 0] + c * p[..., 1]], axis=-1)

    def from_local(self, points) -> np.ndarray:
        q = np.asarray(points, dtype=float)
        c, s = math.cos(self.angle), math.sin(self.angle)
        out = np.stack([c * q[..., 0] - s * q[..., 1], s * q[..., 0] + c * q[..., 1]], axis=-1)
        return out + np.asarray(self.center)


@dataclass(frozen=True)
class Rectangle:
    width: float
    height: float

    edges = ("left", "right", "bottom", "top")

    @property
    def area(self) -> float:
        return self.width * self.height


@dataclass(frozen=True)
class ConfocalEllipse:
    """Outer ellipse confocal with the (single) slit, at elliptical radius ``x0``.

    With ``r = t sinh(x)`` the boundary is ``r = t_ref sinh(x0)`` where
    ``t_ref`` is the slit half-length recorded in the domain.
    """

    x0: float

    edges = ("outer",)


@dataclass(frozen=True)
class EdgeSegment:
    """Overrides the condition on the part ``lo <= s <= hi`` of an outer edge.

    ``s`` is the x coordinate on bottom/top edges and y on left/right edges.
    """

    edge: str
    lo: float
    hi: float
    condition: BC

    def __post_init__(self):
        object.__setattr__(self, "condition", BC.parse(self.condition))
        if self.edge not in Rectangle.edges:
            raise ConfigurationError(f"segment edge must be one of {Rectangle.edges}")
        if not self.hi > self.lo:
            raise ConfigurationError("segment needs lo < hi")


@dataclass
class DomainSpec:
    outer: Rectangle | ConfocalEllipse
    slits: list[SlitSpec] = field(default_factory=list)
    outer_bc: dict[str, BC] = field(default_factory=dict)
    chart_radius_r0: float | None = None
    segments: list[EdgeSegment] = field(default_factory=list)

    def __post_init__(self):
        edges = self.outer.edges
        bc = {e: BC.DIRICHLET for e in edges}
        for k, v in dict(self.outer_bc).items():
            if k not in edges:
                raise ConfigurationError(f"unknown edge {k!r} for {type(self.outer).__name__}")
            bc[k] = BC.parse(v)
        self.outer_bc = bc
        self.slits = list(self.slits)
        self.segments = list(self.segments)
        self.validate()

    @property
    def area(self) -> float:
        if isinstance(self.outer, Rectangle):
            return self.outer.area
        slit = self.slits[0]
        R = slit.half_length_t * math.sinh(self.outer.x0)
        return math.pi * R * math.hypot(R, slit.half_length_t)

    def validate(self) -> None:
        if isinstance(self.outer, ConfocalEllipse):
            if len(self.slits) != 1:
                raise ConfigurationError("a confocal ellipse domain needs exactly one slit")
            if not self.outer.x0 > 0:
                raise ConfigurationError("elliptical radius x0 must be positive")
            if self.segments:
                raise ConfigurationError("edge segments are only defined for rectangles")
            return
        a, b = self.outer.width, self.outer.height
        if not (a > 0 and b > 0):
            raise ConfigurationError("rectangle sides must be positive")
        if self.slits:
            r0 = self.chart_radius_r0
            if r0 is None or not r0 > 0:
                raise ConfigurationError("chart_radius_r0 must be set and positive for slit domains")
        tol = 1e-12 * max(a, b)
        for k, s in enumerate(self.slits):
            cx, cy = s.center
            r0 = self.chart_radius_r0
            if s.half_length_t >= r0:
                raise ConfigurationError(f"slit {k}: half-length {s.half_length_t} must be below r0={r0}")
            if cx - 2 * r0 < -tol or cx + 2 * r0 > a + tol or cy - 2 * r0 < -tol or cy + 2 * r0 > b + tol:
                raise ConfigurationError(f"slit {k}: ball of radius 2*r0 around the centre leaves the rectangle")
        for i in range(len(self.slits)):
            for j in range(i + 1, len(self.slits)):
                ci = np.asarray(self.slits[i].center)
                cj = np.asarray(self.slits[j].center)
                if np.linalg.norm(ci - cj) < 4 * self.chart_radius_r0 - tol:
                    raise ConfigurationError(f"slits {i} and {j}: motion zones of radius 2*r0 overlap")
        for seg in self.segments:
            span = a if seg.edge in ("bottom", "top") else b
            if seg.lo < -tol or seg.hi > span + tol:
                raise ConfigurationError(f"segment on {seg.edge} leaves the edge")

    # -- key=value text format -------------------------------------------

    def to_text(self) -> str:
        lines = []
        if isinstance(self.outer, Rectangle):
            lines += ["outer.kind = rectangle", f"outer.a = {self.outer.width!r}",
                      f"outer.b = {self.outer.height!r}"]
        else:
            lines += ["outer.kind = confocal_ellipse", f"outer.x0 = {self.outer.x0!r}"]
        if self.chart_radius_r0 is not None:
            lines.append(f"chart_radius_r0 = {self.chart_radius_r0!r}")
        for e in self.outer.edges:
            lines.append(f"outer_bc.{e} = {self.outer_bc[e].value}")
        for k, s in enumerate(self.slits):
            lines += [f"slit.{k}.cx = {s.center[0]!r}", f"slit.{k}.cy = {s.center[1]!r}",
                      f"slit.{k}.angle = {s.angle!r}", f"slit.{k}.t = {s.half_length_t!r}",
                      f"slit.{k}.bc = {s.condition.value}"]
        for k, g in enumerate(self.segments):
            lines += [f"segment.{k}.edge = {g.edge}", f"segment.{k}.lo = {g.lo!r}",
                      f"segment.{k}.hi = {g.hi!r}", f"segment.{k}.bc = {g.condition.value}"]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "DomainSpec":
        kv = parse_key_values(text)
        return cls.from_mapping(kv)

    @classmethod
    def from_mapping(cls, kv: dict[str, str]) -> "DomainSpec":
        kv = dict(kv)

        def take_float(key, default=None):
            if key not in kv:
                if default is None:
                    raise ConfigurationError(f"missing key {key!r}")
                return default
            raw = kv.pop(key)
            try:
                return float(raw)
            except ValueError:
                raise ConfigurationError(f"key {key!r}: not a number: {raw!r}") from None

        kind = kv.pop("outer.kind", None)
        if kind == "rectangle":
            outer = Rectangle(take_float("outer.a"), take_float("outer.b"))
        elif kind == "confocal_ellipse":
            outer = ConfocalEllipse(take_float("outer.x0"))
        else:
            raise ConfigurationError(f"outer.kind must be rectangle or confocal_ellipse, got {kind!r}")
        r0 = take_float("chart_radius_r0", default=float("nan"))
        r0 = None if math.isnan(r0) else r0
        outer_bc = {}
        for key in [k for k in kv if k.startswith("outer_bc.")]:
            outer_bc[key.split(".", 1)[1]] = kv.pop(key)

        slits, segments = [], []
        for prefix, sink in (("slit", slits), ("segment", segments)):
            ids = sorted({int(k.split(".")[1]) for k in kv if k.startswith(prefix + ".")
                          and k.split(".")[1].isdigit()})
            if ids != list(range(len(ids))):
                raise ConfigurationError(f"{prefix} indices must be 0..n-1, got {ids}")
            for k in ids:
                p = f"{prefix}.{k}."
                if prefix == "slit":
                    sink.append(SlitSpec(center=(take_float(p + "cx"), take_float(p + "cy")),
                                         angle=take_float(p + "angle", default=0.0),
                                         half_length_t=take_float(p + "t"),
                                         condition=kv.pop(p + "bc", "dirichlet")))
                else:
                    if p + "edge" not in kv:
                        raise ConfigurationError(f"missing key {p + 'edge'!r}")
                    sink.append(EdgeSegment(edge=kv.pop(p + "edge"), lo=take_float(p + "lo"),
                                            hi=take_float(p + "hi"), condition=kv.pop(p + "bc", "dirichlet")))
        if kv:
            raise ConfigurationError(f"unknown keys: {sorted(kv)}")
        return cls(outer=outer, slits=slits, outer_bc=outer_bc, chart_radius_r0=r0, segments=segments)

    @classmethod
    def load(cls, path) -> "DomainSpec":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigurationError(f"cannot read domain file {path}: {exc}") from None
        return cls.from_text(text)

    def save(self, path) -> None:
        Path(path).write_text(self.to_text())


def parse_key_values(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected key = value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigurationError(f"line {lineno}: empty key")
        if key in out:
            raise ConfigurationError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


# -- elliptical coordinates -----------------------------------------------


@dataclass(frozen=True)
class EllipticalPoint:
    """``side`` is +1 / -1 for the upper / lower slit face and 0 elsewhere."""

    r: float
    theta: float
    side: int = 0

    def __post_init__(self):
        if self.r < 0:
            raise ConfigurationError("elliptical radius must be non-negative")
        object.__setattr__(self, "theta", float(self.theta) % TWO_PI)
        if self.r == 0 and self.side == 0:
            th = self.theta
            if 0 < th < math.pi:
                object.__setattr__(self, "side", 1)
            elif th > math.pi:
                object.__setattr__(self, "side", -1)


def elliptical_to_cartesian(t: float, p: EllipticalPoint,
                            center: Sequence[float] = (0.0, 0.0)) -> tuple[float, float]:
    x = math.sqrt(p.r * p.r + t * t) * math.cos(p.theta)
    y = p.r * math.sin(p.theta)
    return x + center[0], y + center[1]


def cartesian_to_elliptical(t: float, point: Sequence[float], center: Sequence[float] = (0.0, 0.0),
                            side: int | None = None) -> EllipticalPoint:
    """Inverse of :func:`elliptical_to_cartesian`.

    Points on the slit segment need ``side`` (+1 upper face, -1 lower face);
    without it they default to the upper face.
    """
    x = point[0] - center[0]
    y = point[1] - center[1]
    r = math.sqrt(_elliptic_r2(x, y, t))
    if r == 0.0:
        c = max(-1.0, min(1.0, x / t)) if t > 0 else 1.0
        th = math.acos(c)
        if side is not None and side < 0:
            th = TWO_PI - th
        return EllipticalPoint(0.0, th % TWO_PI, 0 if th in (0.0, math.pi) else (1 if th < math.pi else -1))
    th = math.atan2(y / r, x / math.sqrt(r * r + t * t))
    return EllipticalPoint(r, th % TWO_PI)


def _elliptic_r2(x, y, t):
    """Square of the elliptical radius of (x, y) for foci at (+-t, 0)."""
    d = x * x + y * y - t * t
    disc = np.sqrt(d * d + 4.0 * t * t * y * y)
    # the two algebraic forms avoid cancellation on either side of d = 0
    with np.errstate(divide="ignore", invalid="ignore"):
        alt = np.where(disc - d > 0, 2.0 * t * t * y * y / np.where(disc - d > 0, disc - d, 1.0), 0.0)
    out = np.where(d >= 0, 0.5 * (d + disc), alt)
    if np.ndim(out) == 0:
        return float(out)
    return out


def metric_weights(t: float, p: EllipticalPoint) -> tuple[float, float, float]:
    """Gradient coefficients and Lebesgue density in elliptical coordinates.

    Returns ``((r^2+t^2)/(r^2+t^2 sin^2), 1/(r^2+t^2 sin^2), (r^2+t^2 sin^2)/sqrt(r^2+t^2))``.
    """
    r2 = p.r * p.r
    t2 = t * t
    if r2 + t2 == 0.0:
        raise ConfigurationError("metric is degenerate at r = t = 0")
    s2 = math.sin(p.theta) ** 2
    denom = r2 + t2 * s2
    if denom == 0.0:
        # slit tips: both coefficients blow up, the density vanishes
        return math.inf, math.inf, 0.0
    return (r2 + t2) / denom, 1.0 / denom, denom / math.sqrt(r2 + t2)


def ellipse_area(t: float, R: float) -> float:
    """Area inside the level set r = R."""
    return math.pi * R * math.sqrt(R * R + t * t)


# -- cutoff and node motion -----------------------------------------------


def cutoff(s):
    """C^2 monotone cutoff: 1 on |s| <= 1, 0 on |s| >= 2, quintic in between."""
    u = np.clip(np.abs(np.asarray(s, dtype=float)) - 1.0, 0.0, 1.0)
    return 1.0 - u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)


def _blended_radius(x, y, t, r0, iters=80):
    """Solve x^2/(r^2 + t^2 sigma(r/r0)) + y^2/r^2 = 1 for r (vectorized).

    Inside the chart (sigma = 1) this is the closed-form elliptical radius;
    in the blending annulus r0 < r < 2 r0 it is found by bisection.
    """
    r = np.sqrt(_elliptic_r2(x, y, t))
    blend = r > r0
    if np.any(blend):
        xb, yb = x[blend], y[blend]
        lo = np.full(xb.shape, r0)
        hi = np.full(xb.shape, 2.0 * r0)
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            g = xb * xb / (mid * mid + t * t * cutoff(mid / r0)) + yb * yb / (mid * mid) - 1.0
            lo = np.where(g > 0, mid, lo)
            hi = np.where(g > 0, hi, mid)
        r = r.copy()
        r[blend] = 0.5 * (lo + hi)
    return r


def node_motion_map(points, t_ref: float, t: float, r0: float,
                    center: Sequence[float] = (0.0, 0.0), angle: float = 0.0) -> np.ndarray:
    """Move points of the length-``t_ref`` configuration to the length-``t`` one.

    ``points`` is an ``(..., 2)`` array of Cartesian positions.  Points at
    distance ``>= 2 r0`` from ``center`` are returned unchanged; slit
    endpoints ``center +- t_ref e`` go to ``center +- t e``.  Along each
    level set of the blended chart only the coordinate parallel to the slit
    is rescaled, so the map is injective whenever ``t, t_ref < r0``.
    """
    if not (0 < t < r0 and 0 < t_ref < r0):
        raise ConfigurationError(f"node motion needs 0 < t, t_ref < r0 (t={t}, t_ref={t_ref}, r0={r0})")
    pts = np.asarray(points, dtype=float)
    if t == t_ref:
        return pts.copy()
    slit = SlitSpec(center=tuple(center), angle=angle, half_length_t=t_ref)
    loc = slit.to_local(pts.reshape(-1, 2))
    x, y = loc[:, 0], loc[:, 1]
    inside = x * x + y * y < (2.0 * r0) ** 2
    if np.any(inside):
        xi, yi = x[inside], y[inside]
        r = _blended_radius(xi, yi, t_ref, r0)
        sig = cutoff(r / r0)
        scale = np.sqrt((r * r + t * t * sig) / (r * r + t_ref * t_ref * sig))
        loc = loc.copy()
        loc[inside, 0] = xi * scale
    out = slit.from_local(loc).reshape(pts.shape)
    # points outside the zone are bit-for-bit unchanged
    flat_out = out.reshape(-1, 2)
    flat_out[~inside] = pts.reshape(-1, 2)[~inside]
    return out
