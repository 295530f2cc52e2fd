# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops; ``_kernels_py`` holds the reference versions."""

import numpy as np
cimport numpy as cnp
from libc.math cimport cosh, log, fabs

cnp.import_array()

DEF RENORM = 1e32


cdef inline double _q(double b, double h2, double x) nogil:
    cdef double c = cosh(x)
    return b - h2 * c * c


def radial_rk4(double b, double h2, double u0, double du0, double x_max, Py_ssize_t n):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] u = np.empty(n + 1)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] du = np.empty(n + 1)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ls = np.empty(n + 1)
    cdef double step = x_max / n
    cdef double half = 0.5 * step
    cdef double y0 = u0, y1 = du0, acc = 0.0
    cdef double x, qa, qm, qb, k1a, k1b, k2a, k2b, k3a, k3b, k4a, k4b, mag
    cdef Py_ssize_t k
    u[0] = y0
    du[0] = y1
    ls[0] = acc
    with nogil:
        for k in range(n):
            x = k * step
            qa = _q(b, h2, x)
            qm = _q(b, h2, x + half)
            qb = _q(b, h2, x + step)
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
            mag = fabs(y0) + fabs(y1)
            if mag > RENORM:
                y0 = y0 / mag
                y1 = y1 / mag
                acc = acc + log(mag)
            u[k + 1] = y0
            du[k + 1] = y1
            ls[k + 1] = acc
    return u, du, ls


def radial_shoot(double b, double h2, double u0, double du0, double x_max, Py_ssize_t n):
    cdef double step = x_max / n
    cdef double half = 0.5 * step
    cdef double y0 = u0, y1 = du0, acc = 0.0
    cdef double x, qa, qm, qb, k1a, k1b, k2a, k2b, k3a, k3b, k4a, k4b, mag
    cdef Py_ssize_t k
    cdef int zeros = 0, last_sign = 0, s
    if y0 > 0:
        last_sign = 1
    elif y0 < 0:
        last_sign = -1
    with nogil:
        for k in range(n):
            x = k * step
            qa = _q(b, h2, x)
            qm = _q(b, h2, x + half)
            qb = _q(b, h2, x + step)
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
            mag = fabs(y0) + fabs(y1)
            if mag > RENORM:
                y0 = y0 / mag
                y1 = y1 / mag
                acc = acc + log(mag)
            if y0 != 0.0:
                s = 1 if y0 > 0 else -1
                if last_sign != 0 and s != last_sign:
                    zeros += 1
                last_sign = s
    return y0, y1, acc, zeros


def p1_local(coords, tris):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] X = np.ascontiguousarray(coords, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=2] T = np.ascontiguousarray(tris, dtype=np.int64)
    cdef Py_ssize_t nt = T.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] area = np.empty(nt)
    cdef cnp.ndarray[cnp.float64_t, ndim=3] K = np.empty((nt, 3, 3))
    cdef cnp.ndarray[cnp.float64_t, ndim=3] M = np.empty((nt, 3, 3))
    cdef double gx[3]
    cdef double gy[3]
    cdef double px[3]
    cdef double py[3]
    cdef double det, ar, m
    cdef Py_ssize_t e, i, j, a, b_, c
    with nogil:
        for e in range(nt):
            for i in range(3):
                px[i] = X[T[e, i], 0]
                py[i] = X[T[e, i], 1]
            det = (px[1] - px[0]) * (py[2] - py[0]) - (py[1] - py[0]) * (px[2] - px[0])
            ar = 0.5 * det
            area[e] = ar
            for i in range(3):
                b_ = (i + 1) % 3
                c = (i + 2) % 3
                # opposite edge p[b]->p[c] rotated by 90 degrees
                gx[i] = -(py[c] - py[b_]) / det
                gy[i] = (px[c] - px[b_]) / det
            m = ar / 12.0
            for i in range(3):
                for j in range(3):
                    K[e, i, j] = ar * (gx[i] * gx[j] + gy[i] * gy[j])
                    M[e, i, j] = m * (2.0 if i == j else 1.0)
    return area, K, M


def locate(points, coords, tris, candidates):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] P = np.ascontiguousarray(points, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] X = np.ascontiguousarray(coords, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=2] T = np.ascontiguousarray(tris, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=2] C = np.ascontiguousarray(candidates, dtype=np.int64)
    cdef Py_ssize_t npnt = P.shape[0], nc = C.shape[1]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] tri = np.empty(npnt, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] bary = np.empty((npnt, 3))
    cdef Py_ssize_t p, k, e, best
    cdef double ax, ay, v0x, v0y, v1x, v1y, v2x, v2y, det, l0, l1, l2, sc, best_sc
    cdef double b0, b1, b2
    with nogil:
        for p in range(npnt):
            best = -1
            best_sc = -1e300
            b0 = 0.0
            b1 = 0.0
            b2 = 0.0
            for k in range(nc):
                e = C[p, k]
                ax = X[T[e, 0], 0]
                ay = X[T[e, 0], 1]
                v0x = X[T[e, 1], 0] - ax
                v0y = X[T[e, 1], 1] - ay
                v1x = X[T[e, 2], 0] - ax
                v1y = X[T[e, 2], 1] - ay
                v2x = P[p, 0] - ax
                v2y = P[p, 1] - ay
                det = v0x * v1y - v0y * v1x
                l1 = (v2x * v1y - v2y * v1x) / det
                l2 = (v0x * v2y - v0y * v2x) / det
                l0 = 1.0 - l1 - l2
                sc = l0
                if l1 < sc:
                    sc = l1
                if l2 < sc:
                    sc = l2
                if sc > best_sc:
                    best_sc = sc
                    best = e
                    b0 = l0
                    b1 = l1
                    b2 = l2
            tri[p] = best if best_sc >= -1e-10 else -1
            bary[p, 0] = b0
            bary[p, 1] = b1
            bary[p, 2] = b2
    return tri, bary
