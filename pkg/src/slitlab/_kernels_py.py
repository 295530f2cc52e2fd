"""Pure-Python/numpy versions of the compiled kernels in ``_kernels.pyx``.

The radial integrator runs the same floating-point operations in the same
order as the compiled one, so both backends give bitwise-equal results.
"""

import math

import numpy as np

RENORM = 1e32


def _rhs_q(b, h2, x):
    c = math.cosh(x)
    return b - h2 * c * c


def radial_rk4(b, h2, u0, du0, x_max, n):
    """Classical RK4 for u'' = (b - h2 cosh^2 x) u on a uniform grid of n steps.

    Returns ``(u, du, log_scale)`` sampled at the n+1 grid points.  Whenever
    |u| + |u'| exceeds ``RENORM`` the state is divided by it and the log of
    the factor is added to ``log_scale``; stored values times
    ``exp(log_scale)`` give the true solution.
    """
    n = int(n)
    u = np.empty(n + 1)
    du = np.empty(n + 1)
    ls = np.empty(n + 1)
    step = x_max / n
    half = 0.5 * step
    y0, y1, acc = float(u0), float(du0), 0.0
    u[0], du[0], ls[0] = y0, y1, acc
    for k in range(n):
        x = k * step
        qa = _rhs_q(b, h2, x)
        qm = _rhs_q(b, h2, x + half)
        qb = _rhs_q(b, h2, x + step)
        k1a = y1
        k1b = qa * y0
        k2a = y1 + half * k1b
        k2b = qm * (y0 + half * k1a)
        k3a = y1 + half * k2b
        k3b = qm * (y0 + half * k2a)
        k4a = y1 + step * k3b
        k4b = qb * (y0 + step * k3a)
        y0 = y0 + step / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a)
        y1 = y1 + step / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b)
        mag = abs(y0) + abs(y1)
        if mag > RENORM:
            y0 /= mag
            y1 /= mag
            acc += math.log(mag)
        u[k + 1], du[k + 1], ls[k + 1] = y0, y1, acc
    return u, du, ls


def radial_shoot(b, h2, u0, du0, x_max, n):
    """Endpoint-only variant of :func:`radial_rk4`.

    Returns ``(u, du, log_scale, zeros)`` at ``x_max`` where ``zeros`` counts
    the sign changes of u along the whole grid (an exact zero at ``x_max``
    itself is not a sign change).
    """
    n = int(n)
    step = x_max / n
    half = 0.5 * step
    y0, y1, acc = float(u0), float(du0), 0.0
    zeros = 0
    last_sign = 0
    if y0 != 0.0:
        last_sign = 1 if y0 > 0 else -1
    for k in range(n):
        x = k * step
        qa = _rhs_q(b, h2, x)
        qm = _rhs_q(b, h2, x + half)
        qb = _rhs_q(b, h2, x + step)
        k1a = y1
        k1b = qa * y0
        k2a = y1 + half * k1b
        k2b = qm * (y0 + half * k1a)
        k3a = y1 + half * k2b
        k3b = qm * (y0 + half * k2a)
        k4a = y1 + step * k3b
        k4b = qb * (y0 + step * k3a)
        y0 = y0 + step / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a)
        y1 = y1 + step / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b)
        mag = abs(y0) + abs(y1)
        if mag > RENORM:
            y0 /= mag
            y1 /= mag
            acc += math.log(mag)
        if y0 != 0.0:
            s = 1 if y0 > 0 else -1
            if last_sign != 0 and s != last_sign:
                zeros += 1
            last_sign = s
    return y0, y1, acc, zeros


def p1_local(coords, tris):
    """Per-triangle signed area, P1 stiffness and mass blocks.

    Returns ``(area, K, M)`` with ``K, M`` of shape ``(T, 3, 3)``.
    """
    coords = np.asarray(coords, dtype=float)
    tris = np.asarray(tris, dtype=np.int64)
    p0 = coords[tris[:, 0]]
    p1 = coords[tris[:, 1]]
    p2 = coords[tris[:, 2]]
    e1 = p1 - p0
    e2 = p2 - p0
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    area = 0.5 * det
    # gradients of the barycentric coordinates: rotate opposite edges by 90 deg
    opp = np.stack([p2 - p1, p0 - p2, p1 - p0], axis=1)
    grad = np.stack([-opp[..., 1], opp[..., 0]], axis=-1) / det[:, None, None]
    K = area[:, None, None] * np.einsum("tik,tjk->tij", grad, grad)
    M = (area / 12.0)[:, None, None] * (np.ones((3, 3)) + np.eye(3))[None]
    return area, K, M


def locate(points, coords, tris, candidates):
    """Find a containing triangle among ``candidates`` for each point.

    Returns ``(tri, bary)``; ``tri`` is -1 where no candidate contains the
    point.  Among containing candidates the one with the largest minimum
    barycentric coordinate wins.
    """
    points = np.asarray(points, dtype=float)
    cand = np.asarray(candidates, dtype=np.int64)
    P, C = cand.shape
    tri_pts = coords[tris[cand]]                      # (P, C, 3, 2)
    a, b, c = tri_pts[:, :, 0], tri_pts[:, :, 1], tri_pts[:, :, 2]
    v0 = b - a
    v1 = c - a
    v2 = points[:, None, :] - a
    det = v0[..., 0] * v1[..., 1] - v0[..., 1] * v1[..., 0]
    l1 = (v2[..., 0] * v1[..., 1] - v2[..., 1] * v1[..., 0]) / det
    l2 = (v0[..., 0] * v2[..., 1] - v0[..., 1] * v2[..., 0]) / det
    l0 = 1.0 - l1 - l2
    lam = np.stack([l0, l1, l2], axis=-1)             # (P, C, 3)
    score = lam.min(axis=-1)
    best = np.argmax(score, axis=1)
    rows = np.arange(P)
    tri = cand[rows, best]
    bary = lam[rows, best]
    tri = np.where(score[rows, best] >= -1e-10, tri, -1)
    return tri, bary
