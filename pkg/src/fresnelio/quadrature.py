"""Uniform-grid quadrature used by the phase-space and regularized paths."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import Divergent, ResolutionError

# exp(-TAIL) is the relative envelope level at which integration boxes are cut
TAIL = 40.0
MAX_NODES_2D = 4_000_000


@dataclass(frozen=True)
class GridSpec:
    """Per-axis half-widths ``R`` and steps ``h``; nodes are k*h for |k| <= round(R/h)."""

    R: tuple
    h: tuple

    def __post_init__(self):
        R = tuple(float(r) for r in np.atleast_1d(self.R))
        h = tuple(float(v) for v in np.atleast_1d(self.h))
        if len(h) == 1 and len(R) > 1:
            h = h * len(R)
        if len(R) == 1 and len(h) > 1:
            R = R * len(h)
        if any(r <= 0 for r in R) or any(v <= 0 for v in h):
            raise ValueError("GridSpec needs R > 0 and h > 0")
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "h", h)

    @classmethod
    def uniform(cls, R, h, dim=1):
        return cls((R,) * dim, (h,) * dim)

    @property
    def dim(self):
        return len(self.R)

    def axis(self, i=0):
        n = int(round(self.R[i] / self.h[i]))
        return np.arange(-n, n + 1) * self.h[i]

    def count(self, i=0):
        return 2 * int(round(self.R[i] / self.h[i])) + 1


def trapezoid_weights(n, h):
    # nodes extend far into the decayed tail, so end corrections are immaterial
    w = np.full(n, h)
    w[0] = w[-1] = h / 2
    return w


def _real_part_form(co):
    A, B, C = co[0].real, co[1].real, co[2].real
    M = -np.array([[A, B / 2], [B / 2, C]])
    return M, np.array([co[3].real, co[4].real])


def gaussian_box(co, tail=TAIL):
    """Center and half-widths of the region where |exp(quadratic)| > e^-tail * peak."""
    M, b = _real_part_form(co)
    if not (M[0, 0] > 0 and np.linalg.det(M) > 0):
        raise Divergent("phase-space integrand does not decay in every direction")
    Minv = np.linalg.inv(M)
    center = 0.5 * Minv @ b
    half = np.sqrt(tail * np.diag(Minv))
    return center, half, Minv


def quad_gauss2(co, level=0, tail=TAIL, max_nodes=MAX_NODES_2D):
    """Trapezoid value of int int exp(Q(x, xi)) dx dxi for a complex quadratic Q.

    ``co`` holds the coefficients of x^2, x xi, xi^2, x, xi, 1.  The box and the
    step are derived from the quadratic itself; ``level`` halves the step.
    """
    center, half, Minv = gaussian_box(co, tail)
    sig = np.sqrt(np.diag(Minv) / 2)
    lo, hi = center - half, center + half
    corners = np.array([[lo[0], lo[1]], [lo[0], hi[1]], [hi[0], lo[1]], [hi[0], hi[1]]])
    gx = np.abs(2 * co[0].imag * corners[:, 0] + co[1].imag * corners[:, 1] + co[3].imag).max()
    gxi = np.abs(2 * co[2].imag * corners[:, 1] + co[1].imag * corners[:, 0] + co[4].imag).max()
    hx = min(0.6 * sig[0], np.pi / (gx + 1e-300) / 2) / 2**level
    hxi = min(0.6 * sig[1], np.pi / (gxi + 1e-300) / 2) / 2**level
    nx = 2 * int(np.ceil(half[0] / hx)) + 1
    nxi = 2 * int(np.ceil(half[1] / hxi)) + 1
    if nx * nxi > max_nodes:
        raise ResolutionError(f"phase-space grid of {nx}x{nxi} nodes exceeds the cap")
    x = center[0] + (np.arange(nx) - nx // 2) * hx
    xi = center[1] + (np.arange(nxi) - nxi // 2) * hxi
    X = x[:, None]
    XI = xi[None, :]
    Q = co[0] * X**2 + co[1] * X * XI + co[2] * XI**2 + co[3] * X + co[4] * XI + co[5]
    return complex(np.exp(Q).sum() * hx * hxi)


def gauss2_exact(co):
    """Closed form of the same integral; used as a test oracle only."""
    A = -np.array([[co[0], co[1] / 2], [co[1] / 2, co[2]]], dtype=complex)
    b = np.array([co[3], co[4]], dtype=complex)
    det = A[0, 0] * A[1, 1] - A[0, 1] ** 2
    sol = np.linalg.solve(A, b)
    # principal sqrt of det is correct when Re A is positive definite
    return complex(np.pi / np.sqrt(det) * np.exp(b @ sol / 4 + co[5]))


def richardson(values, ratio, power):
    """Richardson table for values at steps s, s/ratio, ...; error ~ s^power, s^(2 power), ..."""
    table = [list(values)]
    f = ratio**power
    while len(table[-1]) > 1:
        prev = table[-1]
        table.append([(f * prev[i + 1] - prev[i]) / (f - 1) for i in range(len(prev) - 1)])
        f *= ratio**power
    return table
