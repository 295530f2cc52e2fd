"""Independent reference computations used to freeze expected values.

Nothing here imports slitlab; each oracle takes a different route from the
production code (complex Fourier basis, fixed-step RK4 loop, power series).
"""

import math

import numpy as np


def bessel_j0(x: float, terms: int = 60) -> float:
    """Power series of J_0."""
    s, term = 0.0, 1.0
    q = -0.25 * x * x
    for k in range(terms):
        s += term
        term *= q / ((k + 1) ** 2)
    return s


def bisect(f, a: float, b: float, tol: float = 1e-15) -> float:
    fa = f(a)
    for _ in range(200):
        m = 0.5 * (a + b)
        fm = f(m)
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
        if b - a < tol:
            break
    return 0.5 * (a + b)


def j01() -> float:
    return bisect(bessel_j0, 2.0, 3.0)


def dense_mathieu(h: float, N: int = 128) -> np.ndarray:
    """Eigenvalues of -d^2/dtheta^2 + h^2 cos^2 in the basis e^{ik theta}, |k| <= N."""
    k = np.arange(-N, N + 1)
    A = np.diag(k.astype(float) ** 2 + 0.5 * h * h)
    off = np.full(2 * N - 1, 0.25 * h * h)
    A += np.diag(off, 2) + np.diag(off, -2)
    return np.linalg.eigvalsh(A)


def rk4_radial(b: float, h: float, u0: float, du0: float, x_max: float, n: int) -> tuple[float, float]:
    """Plain fixed-step RK4 for u'' = (b - h^2 cosh^2 x) u."""
    dx = x_max / n

    def f(x, u, v):
        return v, (b - h * h * math.cosh(x) ** 2) * u

    u, v, x = u0, du0, 0.0
    for _ in range(n):
        k1 = f(x, u, v)
        k2 = f(x + dx / 2, u + dx / 2 * k1[0], v + dx / 2 * k1[1])
        k3 = f(x + dx / 2, u + dx / 2 * k2[0], v + dx / 2 * k2[1])
        k4 = f(x + dx, u + dx * k3[0], v + dx * k3[1])
        u += dx / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        v += dx / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        x += dx
    return u, v


def rectangle_modes(a: float, b: float, kx0: int, ky0: int, count: int, half_x=False, half_y=False):
    """Sorted (m pi / a + shift)^2 + (n pi / b + shift)^2 by direct enumeration."""
    vals = []
    for m in range(kx0, kx0 + 40):
        for n in range(ky0, ky0 + 40):
            p = (m + 0.5 * half_x) * math.pi / a
            q = (n + 0.5 * half_y) * math.pi / b
            vals.append(p * p + q * q)
    return np.sort(vals)[:count]
