"""Quadrature of mesh functions in the elliptical chart around a slit.

With ``r = t sinh(x)`` the chart ``U_t = {r <= r0}`` becomes the rectangle
``[0, Y_t] x S^1`` with ``Y_t = arcsinh(r0/t)``.  A P1 field is sampled at
Gauss-Legendre nodes in ``x`` and uniform nodes in ``theta``; derivatives
come from the exact elementwise gradient through the chain rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError, ResolutionError
from ..fem.mesh import MeshInstance

MIN_X_POINTS = 64
MIN_THETA_POINTS = 128


@dataclass
class AnnulusSample:
    t: float
    Y: float
    x: np.ndarray           # (n_x,) Gauss-Legendre nodes on [0, Y]
    wx: np.ndarray
    theta: np.ndarray       # (n_theta,) uniform on [0, 2 pi)
    v: np.ndarray           # (n_x, n_theta)
    vx: np.ndarray
    vth: np.ndarray

    @property
    def wtheta(self) -> float:
        return 2.0 * math.pi / len(self.theta)

    def integrate(self, f) -> float:
        """``int_0^Y int_0^{2 pi} f dtheta dx`` for an ``(n_x, n_theta)`` array."""
        return float(self.wtheta * self.wx @ np.sum(f, axis=1))


@dataclass(frozen=True)
class AnnulusForms:
    q_U: float
    N_U: float
    qdot_U: float
    Ndot_U: float
    qdot_bound: float       # -(1/t) int |d_theta v|^2 / cosh^2 x
    Ndot_bound: float       # t int |v|^2

    @property
    def qdot_slack(self) -> float:
        return self.qdot_U - self.qdot_bound

    @property
    def Ndot_slack(self) -> float:
        return self.Ndot_bound - self.Ndot_U


def chart_grid(t: float, r_outer: float, n_x: int = 96, n_theta: int = 256):
    if not (t > 0 and r_outer > 0):
        raise ConfigurationError("chart grid needs t > 0 and a positive outer radius")
    if n_x < MIN_X_POINTS or n_theta < MIN_THETA_POINTS:
        raise ResolutionError(f"annulus quadrature needs >= {MIN_X_POINTS} x-points and "
                              f">= {MIN_THETA_POINTS} theta-points")
    Y = math.asinh(r_outer / t)
    g, w = np.polynomial.legendre.leggauss(n_x)
    x = 0.5 * Y * (g + 1.0)
    wx = 0.5 * Y * w
    theta = 2.0 * math.pi * np.arange(n_theta) / n_theta
    return Y, x, wx, theta


def _p1_gradients(coords, tris):
    p = coords[tris]
    det = ((p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
           - (p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0]))
    gx = np.empty((len(tris), 3))
    gy = np.empty((len(tris), 3))
    for i in range(3):
        b, c = (i + 1) % 3, (i + 2) % 3
        gx[:, i] = -(p[:, c, 1] - p[:, b, 1]) / det
        gy[:, i] = (p[:, c, 0] - p[:, b, 0]) / det
    return gx, gy


def sample_annulus(inst: MeshInstance, vec: np.ndarray, r_outer: float, slit: int = 0,
                   n_x: int = 96, n_theta: int = 256) -> AnnulusSample:
    """Sample the full node vector ``vec`` on the chart of slit ``slit``."""
    s = inst.template.spec.slits[slit]
    t = inst.t * inst.template.slit_scale(slit)
    Y, x, wx, theta = chart_grid(t, r_outer, n_x, n_theta)
    X, TH = np.meshgrid(x, theta, indexing="ij")
    ch, sh = np.cosh(X), np.sinh(X)
    c, sn = np.cos(TH), np.sin(TH)
    loc = np.stack([t * ch * c, t * sh * sn], axis=-1).reshape(-1, 2)
    # d/dx and d/dtheta of the local position
    dx = np.stack([t * sh * c, t * ch * sn], axis=-1).reshape(-1, 2)
    dth = np.stack([-t * ch * sn, t * sh * c], axis=-1).reshape(-1, 2)
    rot = np.array([[math.cos(s.angle), -math.sin(s.angle)], [math.sin(s.angle), math.cos(s.angle)]])
    pts = loc @ rot.T + np.asarray(s.center)
    dx = dx @ rot.T
    dth = dth @ rot.T
    tri, bary = inst.locate(pts)
    nodes = inst.template.triangles[tri]
    vals = vec[nodes]
    v = np.sum(bary * vals, axis=1)
    gx, gy = _p1_gradients(inst.coords, inst.template.triangles[tri])
    grad = np.stack([np.sum(gx * vals, axis=1), np.sum(gy * vals, axis=1)], axis=1)
    vx = np.sum(grad * dx, axis=1)
    vth = np.sum(grad * dth, axis=1)
    shape = X.shape
    return AnnulusSample(t=t, Y=Y, x=x, wx=wx, theta=theta, v=v.reshape(shape), vx=vx.reshape(shape),
                         vth=vth.reshape(shape))


def sample_callable(t: float, r_outer: float, f, n_x: int = 96, n_theta: int = 256) -> AnnulusSample:
    """Sample ``f(x, theta) -> (v, v_x, v_theta)`` given directly in chart coordinates."""
    Y, x, wx, theta = chart_grid(t, r_outer, n_x, n_theta)
    X, TH = np.meshgrid(x, theta, indexing="ij")
    v, vx, vth = (np.broadcast_to(np.asarray(a, dtype=float), X.shape) for a in f(X, TH))
    return AnnulusSample(t=t, Y=Y, x=x, wx=wx, theta=theta, v=np.array(v), vx=np.array(vx), vth=np.array(vth))


def annulus_forms(sample: AnnulusSample) -> AnnulusForms:
    """The four chart integrals and the two comparison bounds."""
    t = sample.t
    X = sample.x[:, None]
    TH = sample.theta[None, :]
    v2 = sample.v ** 2
    vx2 = sample.vx ** 2
    vt2 = sample.vth ** 2
    sh2 = np.sinh(X) ** 2
    ch2 = np.cosh(X) ** 2
    s2 = np.sin(TH) ** 2
    c2 = np.cos(TH) ** 2
    q = sample.integrate(vx2 + vt2)
    N = t * t * sample.integrate(v2 * (sh2 + s2))
    qdot = sample.integrate((vx2 - vt2) / ch2) / t
    Ndot = t * sample.integrate(v2 * (s2 - c2 * np.tanh(X) ** 2))
    qb = -sample.integrate(vt2 / ch2) / t
    Nb = t * sample.integrate(v2)
    return AnnulusForms(q_U=q, N_U=N, qdot_U=qdot, Ndot_U=Ndot, qdot_bound=qb, Ndot_bound=Nb)


def window_mass(sample: AnnulusSample) -> float:
    """``int_U |v|^2 dm`` over the sampled chart."""
    return annulus_forms(sample).N_U


def constant_forms_closed(t: float, r_outer: float) -> tuple[float, float]:
    """``(N_U, Ndot_U)`` for ``v = 1``."""
    Y = math.asinh(r_outer / t)
    int_sh2 = 0.25 * math.sinh(2.0 * Y) - 0.5 * Y
    return t * t * (2.0 * math.pi * int_sh2 + math.pi * Y), t * math.pi * math.tanh(Y)
