"""Separable Gaussian-exponential terms.

A term is ``c * prod_j phi_j(y_j)`` where each coordinate factor is either
``exp(-alpha_j y_j**2 + beta_j y_j)`` or, on the frequency side only, a point
mass ``delta(y_j - p_j)`` with ``p_j`` stored in ``beta_j.real``.  Every closed
form in the package (STFTs, mixed norms, Fresnel values, free evolution) is a
per-coordinate Gaussian integral over such factors.

All square roots are principal; ``Re alpha >= 0`` keeps every integral on the
principal sheet.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import Divergent, NotClosedForm

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True, eq=False)
class Term:
    c: complex
    alpha: np.ndarray
    beta: np.ndarray
    delta: np.ndarray

    @property
    def dim(self):
        return self.alpha.shape[0]

    def key(self):
        return (self.alpha.tobytes(), self.beta.tobytes(), self.delta.tobytes())


def make_term(c, alpha, beta, delta=None):
    alpha = np.atleast_1d(np.asarray(alpha, dtype=complex))
    beta = np.atleast_1d(np.asarray(beta, dtype=complex))
    if beta.shape != alpha.shape:
        beta = np.broadcast_to(beta, alpha.shape).copy()
    if delta is None:
        delta = np.zeros(alpha.shape, dtype=bool)
    return Term(complex(c), alpha, beta, np.asarray(delta, dtype=bool))


def chirp_prefactor(d, hbar, sign=1):
    """(2*pi*i*hbar)^(-d/2) on the principal branch (``sign=-1`` conjugates i)."""
    return complex(np.exp(-0.5 * d * np.log(TWO_PI * hbar * sign * 1j)))


def scale(terms, a):
    return [Term(t.c * a, t.alpha, t.beta, t.delta) for t in terms]


def tensor(a_terms, b_terms):
    out = []
    for a in a_terms:
        for b in b_terms:
            out.append(Term(a.c * b.c, np.concatenate([a.alpha, b.alpha]),
                            np.concatenate([a.beta, b.beta]),
                            np.concatenate([a.delta, b.delta])))
    return out


def multiply(a_terms, b_terms):
    out = []
    for a in a_terms:
        for b in b_terms:
            if a.delta.any() or b.delta.any():
                raise NotClosedForm("pointwise product with a point mass")
            out.append(Term(a.c * b.c, a.alpha + b.alpha, a.beta + b.beta, a.delta))
    return out


def merge(terms, atol=0.0):
    """Combine terms with identical exponents and drop vanishing coefficients."""
    acc = {}
    order = []
    for t in terms:
        k = t.key()
        if k in acc:
            acc[k] = Term(acc[k].c + t.c, t.alpha, t.beta, t.delta)
        else:
            acc[k] = t
            order.append(k)
    return [acc[k] for k in order if abs(acc[k].c) > atol]


def values(terms, Y):
    """Pointwise values at rows of ``Y`` (shape (N, d))."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    out = np.zeros(Y.shape[0], dtype=complex)
    for t in terms:
        if t.delta.any():
            raise NotClosedForm("point masses have no pointwise values")
        out += t.c * np.exp(Y**2 @ (-t.alpha) + Y @ t.beta)
    return out


def dilate(terms, lam):
    """Terms of y -> f(lam * y) for a scalar lam != 0."""
    lam = float(lam)
    out = []
    for t in terms:
        c = t.c
        beta = np.where(t.delta, t.beta / lam, t.beta * lam)
        if t.delta.any():
            c = c / abs(lam) ** int(t.delta.sum())
        out.append(Term(c, np.where(t.delta, 0, t.alpha * lam**2), beta, t.delta))
    return out


def fourier(terms, hbar):
    """hbar-scaled Fourier transform (2*pi*hbar)^(-d/2) int e^{-i xi.y/hbar} f(y) dy."""
    out = []
    for t in terms:
        c = t.c
        alpha = np.zeros_like(t.alpha)
        beta = np.zeros_like(t.beta)
        delta = np.zeros_like(t.delta)
        for j in range(t.dim):
            a, b = t.alpha[j], t.beta[j]
            if t.delta[j]:
                c *= TWO_PI**-0.5 * hbar**-0.5
                beta[j] = -1j * b.real / hbar
            elif a == 0:
                if b.real != 0:
                    raise Divergent("exponential growth has no Fourier transform")
                c *= np.sqrt(TWO_PI * hbar)
                delta[j] = True
                beta[j] = hbar * b.imag
            else:
                c *= (TWO_PI * hbar) ** -0.5 * np.sqrt(np.pi / a) * np.exp(b * b / (4 * a))
                alpha[j] = 1.0 / (4 * a * hbar**2)
                beta[j] = -1j * b / (2 * a * hbar)
        out.append(Term(complex(c), alpha, beta, delta))
    return out


def stft_coeffs(t, omega, hbar):
    """Log-coefficients of one term's STFT against exp(-omega y^2), per coordinate.

    Returns complex array (6, d) holding the coefficients of
    x^2, x*xi, xi^2, x, xi, 1 in ``log V``; the window scale, the term
    coefficient and (2*pi*hbar)^(-d/2) are not included.
    """
    om = np.conj(np.asarray(omega, dtype=complex))
    out = np.zeros((6, t.dim), dtype=complex)
    g = ~t.delta
    P = t.alpha[g] + om[g]
    if np.any(P.real <= 0):
        raise Divergent("window does not tame the integrand")
    q0, qx, qxi = t.beta[g], 2 * om[g], -1j / hbar
    out[0, g] = qx**2 / (4 * P) - om[g]
    out[1, g] = 2 * qx * qxi / (4 * P)
    out[2, g] = qxi**2 / (4 * P)
    out[3, g] = 2 * q0 * qx / (4 * P)
    out[4, g] = 2 * q0 * qxi / (4 * P)
    out[5, g] = q0**2 / (4 * P) + 0.5 * np.log(np.pi / P)
    d = t.delta
    p = t.beta[d].real
    out[0, d] = -om[d]
    out[3, d] = 2 * om[d] * p
    out[4, d] = -1j * p / hbar
    out[5, d] = -om[d] * p**2
    return out


def eval_quadratic(co, X, XI):
    """Sum over coordinates of the quadratic with coefficients ``co`` (6, d)."""
    X = np.atleast_2d(X)
    XI = np.atleast_2d(XI)
    return (X**2 @ co[0] + (X * XI) @ co[1] + XI**2 @ co[2]
            + X @ co[3] + XI @ co[4] + co[5].sum())


def stft(terms, s, omega, X, XI, hbar):
    """Closed-form V_g f at rows of X, XI for the window s*exp(-omega y^2)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    XI = np.atleast_2d(np.asarray(XI, dtype=float))
    d = X.shape[1]
    pref = np.conj(s) * (TWO_PI * hbar) ** (-d / 2)
    out = np.zeros(X.shape[0], dtype=complex)
    for t in terms:
        co = stft_coeffs(t, omega, hbar)
        out += t.c * pref * np.exp(eval_quadratic(co, X, XI))
    return out


def gauss_integral(P, Q):
    """int exp(-P y^2 + Q y) dy for Re P > 0 (principal sqrt)."""
    return np.sqrt(np.pi / P) * np.exp(Q * Q / (4 * P))


def fresnel_closed(t, hbar):
    """Exact Fresnel value of one term: the Parseval formula on Gaussian terms."""
    if t.delta.any():
        raise NotClosedForm("Fresnel value of a point mass factor")
    P = t.alpha - 0.5j / hbar
    if np.any(np.abs(P) == 0):
        raise Divergent("the chirp cancels the quadratic phase")
    # P has Re >= 0; the Re = 0 case is the plane-wave limit, continuous on the
    # principal sheet because arg(pi/P) stays in [-pi/2, pi/2].
    vals = (TWO_PI * 1j * hbar) ** -0.5 * np.sqrt(np.pi / P) * np.exp(t.beta**2 / (4 * P))
    return t.c * complex(np.prod(vals))


def evolve(t, time, hbar):
    """Term of exp(i hbar t Laplacian / 2) applied to ``t`` (per-coordinate closed form)."""
    if t.delta.any():
        raise NotClosedForm("evolution of a point mass")
    A, B = t.alpha, t.beta
    P = A - 0.5j / (hbar * time)
    amp = np.prod((TWO_PI * 1j * hbar * time) ** -0.5 * np.sqrt(np.pi / P))
    A2 = A - A * A / P
    B2 = B - A * B / P
    c2 = np.exp(np.sum(B * B / (4 * P)))
    return Term(t.c * complex(amp * c2), A2, B2, t.delta)


def quad_real(co, tol):
    """Real parts of the log-modulus coefficients with round-off flushed to zero."""
    r = co.real.copy()
    r[np.abs(r) < tol] = 0.0
    return r


def norm_inf1_coord(r):
    """log of int sup_x exp(quadratic) d xi for one coordinate's real coefficients."""
    A, B, C, D, E, F = r
    if A > 0:
        raise Divergent("modulus grows in x")
    if A == 0:
        if B != 0 or D != 0:
            raise Divergent("modulus grows in x")
        C2, E2, F2 = C, E, F
    else:
        C2 = C - B * B / (4 * A)
        E2 = E - B * D / (2 * A)
        F2 = F - D * D / (4 * A)
    if C2 >= 0:
        raise Divergent("xi-envelope does not decay", tail=np.inf)
    return 0.5 * np.log(np.pi / -C2) + F2 - E2 * E2 / (4 * C2)


def norm_1inf_coord(r):
    """log of sup_xi int exp(quadratic) dx for one coordinate's real coefficients."""
    A, B, C, D, E, F = r
    if A >= 0:
        raise Divergent("x-envelope does not decay", tail=np.inf)
    C2 = C - B * B / (4 * A)
    E2 = E - B * D / (2 * A)
    F2 = F - D * D / (4 * A) + 0.5 * np.log(np.pi / -A)
    if C2 > 0:
        raise Divergent("modulus grows in xi")
    if C2 == 0:
        if E2 != 0:
            raise Divergent("modulus grows in xi")
        return F2
    return F2 - E2 * E2 / (4 * C2)
