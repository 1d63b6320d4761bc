"""Short-time Fourier transforms, Sjostrand/amalgam norms and the dual pairing.

Conventions (hbar-scaled throughout):

    V_g f(x, xi) = (2 pi hbar)^{-d/2} int e^{-i xi.y / hbar} f(y) conj(g(y - x)) dy
    companion   = V_{conj g} f(x, -xi)
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import catalog as C
from . import terms as T
from .catalog import DEFAULT
from .errors import DimensionError, Divergent, NotClosedForm, ResolutionError
from .quadrature import GridSpec, quad_gauss2

__all__ = [
    "GaussianWindow", "unit_window", "chirped_window", "StftSample", "NormEstimate",
    "stft_closed", "stft_numeric", "norm_M_infty_1", "norm_M_1_infty",
    "norm_M_infty_1_estimate", "norm_M_1_infty_estimate", "dual_pairing",
    "window_inner", "stft_fourier_rotation_check", "phase_space_sum",
]


@dataclass(frozen=True)
class GaussianWindow:
    """Diagonal Gaussian window ``s * exp(-sum_j q_j x_j^2 / (2 hbar))``.

    ``norm`` fixes ``s``: "standard" gives (2 pi hbar)^{-n/2}, "l2" gives unit
    L2 norm and "none" gives 1.  ``factor`` multiplies on top.  Complex ``q``
    with positive real part covers chirped windows such as gamma_alpha.
    """

    q: tuple
    hbar: float = 1.0
    norm: str = "standard"
    factor: complex = 1.0

    def __post_init__(self):
        q = tuple(complex(v) for v in np.atleast_1d(np.asarray(self.q, dtype=complex)))
        if any(v.real <= 0 for v in q):
            raise ValueError("window eigenvalues need positive real part")
        if self.norm not in ("standard", "l2", "none"):
            raise ValueError(f"unknown window normalization {self.norm!r}")
        if not self.hbar > 0:
            raise ValueError("hbar must be positive")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "factor", complex(self.factor))

    @property
    def dim(self):
        return len(self.q)

    @property
    def omega(self):
        return np.asarray(self.q) / (2 * self.hbar)

    @property
    def scale(self):
        q = np.asarray(self.q)
        if self.norm == "standard":
            s = (2 * np.pi * self.hbar) ** (-self.dim / 2)
        elif self.norm == "l2":
            s = float(np.prod((q.real / (np.pi * self.hbar)) ** 0.25))
        else:
            s = 1.0
        return complex(s * self.factor)

    def values(self, Y):
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        return self.scale * np.exp(-(Y**2) @ self.omega)

    def slice(self, start, stop):
        f = self.factor if start == 0 else 1.0
        return replace(self, q=self.q[start:stop], factor=f)

    def conj(self):
        return GaussianWindow(tuple(np.conj(self.q)), self.hbar, "none", np.conj(self.scale))

    def fourier(self):
        q = np.asarray(self.q)
        s = self.scale * np.prod(q ** -0.5)
        return GaussianWindow(tuple(1 / q), self.hbar, "none", s)

    def as_function(self):
        f = C.complex_gaussian(self.q)
        return C.affine_combo([(self.scale, f)])


def unit_window(dim=1, hbar=1.0):
    """The unit-covariance window with unit L2 norm, (pi hbar)^{-d/4} e^{-|x|^2/(2 hbar)}."""
    return GaussianWindow((1.0,) * dim, hbar, "l2")


def chirped_window(alpha, dim=1, hbar=1.0):
    """gamma_alpha = exp(-(alpha - i)|x|^2 / (2 hbar))."""
    return GaussianWindow((alpha - 1j,) * dim, hbar, "none")


def standard_window(q, hbar=1.0):
    return GaussianWindow(tuple(np.atleast_1d(q)), hbar, "standard")


@dataclass(frozen=True)
class StftSample:
    x: tuple
    xi: tuple
    value: complex
    method: str


@dataclass(frozen=True)
class NormEstimate:
    """A norm value; ``exact`` is False on grid paths, where ``value`` is a lower bound."""

    value: float
    exact: bool
    lower: float
    upper: float
    method: str

    def __float__(self):
        return float(self.value)


def as_window(g, params=DEFAULT, dim=None):
    """Accept a GaussianWindow or a single-term Gaussian FunctionObject."""
    if g is None:
        return unit_window(dim or 1, params.hbar)
    if isinstance(g, GaussianWindow):
        if not np.isclose(g.hbar, params.hbar, rtol=1e-14):
            raise ValueError(f"window hbar {g.hbar} differs from params hbar {params.hbar}")
        return g
    terms = C.expand(g, params.hbar)
    if len(terms) != 1 or np.any(terms[0].beta != 0) or np.any(terms[0].alpha.real <= 0):
        raise NotClosedForm("window must be a single centered Gaussian")
    t = terms[0]
    return GaussianWindow(tuple(2 * params.hbar * t.alpha), params.hbar, "none", t.c)


def _pts(x, d):
    X = np.asarray(x, dtype=float)
    single = X.ndim <= 1
    X = X.reshape(-1, d) if X.ndim <= 1 else X
    if X.shape[1] != d:
        raise DimensionError(f"phase-space point has dimension {X.shape[1]}, expected {d}")
    return X, single


def stft_closed(f, g, x, xi, params=DEFAULT):
    """Exact V_g f at (x, xi); rows of 2-D arrays give a vector of values."""
    g = as_window(g, params, f.dim)
    if g.dim != f.dim:
        raise DimensionError("window and function dimensions differ")
    X, single = _pts(x, f.dim)
    XI, _ = _pts(xi, f.dim)
    v = T.stft(C.expand(f, params.hbar), g.scale, g.omega, X, XI, params.hbar)
    return complex(v[0]) if single else v


def stft_terms(terms, g, x, xi, hbar):
    X, single = _pts(x, g.dim)
    XI, _ = _pts(xi, g.dim)
    v = T.stft(terms, g.scale, g.omega, X, XI, hbar)
    return complex(v[0]) if single else v


def _max_frequency(f, hbar, reach):
    try:
        ts = C.expand(f, hbar)
    except NotClosedForm:
        return 0.0
    return max((2 * np.abs(t.alpha.imag).max() * reach + np.abs(t.beta.imag).max()) for t in ts)


def stft_numeric(f, g, x, xi, grid, params=DEFAULT):
    """Trapezoid STFT on the grid ``x + [-R, R]^d`` (d <= 2)."""
    g = as_window(g, params, f.dim)
    d = f.dim
    if d > 2:
        raise NotClosedForm("grid quadrature is limited to d <= 2")
    if grid.dim != d:
        grid = GridSpec((grid.R[0],) * d, (grid.h[0],) * d)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    hb = params.hbar
    R, h = np.array(grid.R), np.array(grid.h)
    if np.any(np.exp(-g.omega.real * R**2) > 1e-12):
        raise ResolutionError("grid does not cover the window's effective support")
    reach = np.abs(x).max() + R.max()
    nu = np.abs(xi).max() / hb + _max_frequency(f, hb, reach) + 2 * np.abs(g.omega.imag).max() * R.max()
    if h.max() > np.pi / max(nu, 1e-300):
        raise ResolutionError(f"step {h.max()} too coarse for oscillation rate {nu:.3g}")
    axes = [x[i] + grid.axis(i) for i in range(d)]
    mesh = np.meshgrid(*axes, indexing="ij")
    Y = np.stack([m.ravel() for m in mesh], axis=1)
    fv = C.evaluate_many(f, Y, params)
    gv = np.conj(g.values(Y - x))
    ph = np.exp(-1j * (Y @ xi) / hb)
    w = np.ones(())
    for i in range(d):
        wi = np.full(len(axes[i]), h[i])
        wi[0] = wi[-1] = h[i] / 2
        w = np.multiply.outer(w, wi)
    w = w.ravel()
    return complex((2 * np.pi * hb) ** (-d / 2) * np.sum(fv * gv * ph * w))


# ---------------------------------------------------------------- norms

def _coord_tol(co):
    return 1e-11 * (1.0 + np.abs(co[:5]).max(axis=0))


def _term_norm(t, g, hbar, which):
    co = T.stft_coeffs(t, g.omega, hbar)
    tol = _coord_tol(co)
    logn = np.log(abs(t.c * g.scale) * (2 * np.pi * hbar) ** (-t.dim / 2))
    for j in range(t.dim):
        r = co[:, j].real.copy()
        r[np.abs(r) < tol[j]] = 0.0
        logn += T.norm_inf1_coord(r) if which == "inf1" else T.norm_1inf_coord(r)
    return float(np.exp(logn)), co, tol


def _x_free(co, tol):
    return bool(np.all(np.abs(co[0].real) < tol) and np.all(np.abs(co[1].real) < tol)
                and np.all(np.abs(co[3].real) < tol))


def _aligned_at_origin(terms, cos, tols, g):
    phases = []
    for t, co, tol in zip(terms, cos, tols):
        if np.any(np.abs(co[2].imag) > tol) or np.any(np.abs(co[4].imag) > tol):
            return False
        phases.append(np.angle(t.c * np.conj(g.scale)) + co[5].imag.sum())
    ph = np.angle(np.exp(1j * (np.array(phases) - phases[0])))
    return bool(np.all(np.abs(ph) < 1e-9))


def _distinct_rates(co_a, co_b, tol):
    diff = np.abs(co_a[[0, 1, 3]].imag - co_b[[0, 1, 3]].imag)
    return bool(np.any(diff > tol))


def norm_M_infty_1_estimate(f, g=None, grid=None, params=DEFAULT, refine=True):
    """int sup_x |V_g f(x, xi)| dxi with provenance of the value.

    With ``refine=False`` the d = 1 grid pass is skipped whenever the
    asymptotic lower bound is already positive.
    """
    g = as_window(g, params, f.dim)
    if g.dim != f.dim:
        raise DimensionError("window and function dimensions differ")
    if isinstance(f, C.Tensor):
        parts, i = [], 0
        for fac in f.factors:
            parts.append(norm_M_infty_1_estimate(fac, g.slice(i, i + fac.dim), grid, params,
                                                 refine))
            i += fac.dim
        val = float(np.prod([p.value for p in parts]))
        exact = all(p.exact for p in parts)
        return NormEstimate(val, exact, float(np.prod([p.lower for p in parts])),
                            float(np.prod([p.upper for p in parts])),
                            "tensor" if exact else "tensor+grid")
    if isinstance(f, C.Sampled):
        return _grid_inf1(f, None, g, grid, params)
    terms = T.merge(C.expand(f, params.hbar))
    if not terms:
        return NormEstimate(0.0, True, 0.0, 0.0, "closed_form")
    if len(terms) == 1:
        v = _term_norm(terms[0], g, params.hbar, "inf1")[0]
        return NormEstimate(v, True, v, v, "closed_form")
    norms, cos, tols, free = [], [], [], []
    for t in terms:
        co = T.stft_coeffs(t, g.omega, params.hbar)
        cos.append(co)
        tols.append(_coord_tol(co))
        free.append(_x_free(co, tols[-1]))
        try:
            norms.append(_term_norm(t, g, params.hbar, "inf1")[0])
        except Divergent:
            norms.append(np.inf)
    upper = float(sum(norms))
    if all(free) and np.isfinite(upper) and _sup_is_sum(terms, cos, tols, g):
        return NormEstimate(upper, True, upper, upper, "closed_form")
    # Terms whose modulus decays in every x-direction vanish as |x| grows, so
    # the sup is at least the sup of the x-free remainder.
    lower = 0.0
    fr = [i for i in range(len(terms)) if free[i]]
    decaying = all(np.all(cos[i][0].real < -tols[i]) for i in range(len(terms)) if not free[i])
    if fr and decaying and _sup_is_sum([terms[i] for i in fr], [cos[i] for i in fr],
                                       [tols[i] for i in fr], g):
        lower = float(sum(norms[i] for i in fr))
    if f.dim == 1 and (refine or lower == 0):
        lower = max(lower, _grid_inf1(f, terms, g, grid, params).value)
    return NormEstimate(lower, False, lower, upper, "grid_lower_bound")


def _sup_is_sum(terms, cos, tols, g):
    """True when sup_x |sum_t V_t| equals sum_t |V_t| for x-free terms."""
    if len(terms) == 1:
        return True
    if len(terms) == 2 and _distinct_rates(cos[0], cos[1], np.maximum(tols[0], tols[1])):
        return True
    return _aligned_at_origin(terms, cos, tols, g)


def norm_M_infty_1(f, g=None, grid=None, params=DEFAULT):
    """Sjostrand norm int sup_x |V_g f| dxi (a lower bound on the grid path, see the estimate)."""
    return norm_M_infty_1_estimate(f, g, grid, params).value


def _default_phase_grid(terms, g, hbar):
    """x and xi axes covering every term's STFT envelope (d = 1)."""
    xs, xis, periods = [], [], []
    for t in terms:
        co = T.stft_coeffs(t, g.omega, hbar)[:, 0]
        A, B, Cc, D, E = co[:5].real
        if A < -1e-12:
            sx = 1 / np.sqrt(-2 * A)
            xs += [-9 * sx, 9 * sx]
            C2 = Cc - B * B / (4 * A)
            E2 = E - B * D / (2 * A)
        else:
            C2, E2 = Cc, E
        if C2 < 0:
            c0 = -E2 / (2 * C2)
            s = 1 / np.sqrt(-2 * C2)
            xis += [c0 - 9 * s, c0 + 9 * s]
        periods.append(co[3].imag)
    rates = np.array(periods)
    diffs = np.abs(rates[:, None] - rates[None, :])
    diffs = diffs[diffs > 1e-9]
    xspan = max(np.abs(xs).max() if xs else 1.0, 2 * np.pi / diffs.min() if diffs.size else 1.0)
    nu = diffs.max() if diffs.size else 1.0
    hx = min(np.pi / nu / 8, xspan / 400)
    x = np.arange(-xspan, xspan + hx / 2, hx)
    lo, hi = (min(xis), max(xis)) if xis else (-10.0, 10.0)
    xi = np.linspace(lo, hi, 1201)
    return x, xi


def _grid_inf1(f, terms, g, grid, params):
    hb = params.hbar
    if f.dim != 1:
        raise NotClosedForm("grid norm path is limited to d = 1")
    if grid is not None:
        x = grid.axis(0)
        xi = grid.axis(1) if grid.dim > 1 else grid.axis(0)
    elif terms is not None:
        x, xi = _default_phase_grid(terms, g, hb)
    else:
        x = np.linspace(-12, 12, 481)
        xi = np.linspace(-12, 12, 481)
    V = _stft_matrix(f, terms, g, x, xi, params)
    sup = np.abs(V).max(axis=0)
    val = float(np.trapezoid(sup, xi))
    return NormEstimate(val, False, val, np.inf, "grid_lower_bound")


def _stft_matrix(f, terms, g, x, xi, params):
    """V[i, k] = V_g f(x_i, xi_k) for d = 1."""
    hb = params.hbar
    if terms is not None:
        XX, KK = np.meshgrid(x, xi, indexing="ij")
        return T.stft(terms, g.scale, g.omega, XX.reshape(-1, 1), KK.reshape(-1, 1),
                      hb).reshape(XX.shape)
    R = np.sqrt(45 / g.omega.real.min())
    hy = min(np.pi * hb / (np.abs(xi).max() + 1) / 2, 0.05)
    u = np.arange(-R, R + hy / 2, hy)
    out = np.empty((len(x), len(xi)), dtype=complex)
    gv = np.conj(g.values(u.reshape(-1, 1)))
    for i, x0 in enumerate(x):
        y = x0 + u
        fv = C.evaluate_many(f, y.reshape(-1, 1), params)
        out[i] = (fv * gv) @ np.exp(-1j * np.outer(y, xi) / hb) * hy
    return out * (2 * np.pi * hb) ** -0.5


def norm_M_1_infty_estimate(f, g=None, grid=None, params=DEFAULT):
    """sup_xi int |V_g f(x, xi)| dx."""
    g = as_window(g, params, f.dim)
    if g.dim != f.dim:
        raise DimensionError("window and function dimensions differ")
    if isinstance(f, C.Tensor):
        val, i, exact = 1.0, 0, True
        for fac in f.factors:
            p = norm_M_1_infty_estimate(fac, g.slice(i, i + fac.dim), grid, params)
            val *= p.value
            exact &= p.exact
            i += fac.dim
        return NormEstimate(val, exact, val, val if exact else np.inf, "tensor")
    terms = None if isinstance(f, C.Sampled) else T.merge(C.expand(f, params.hbar))
    if terms is not None and not terms:
        return NormEstimate(0.0, True, 0.0, 0.0, "closed_form")
    if terms is not None and len(terms) == 1:
        v = _term_norm(terms[0], g, params.hbar, "1inf")[0]
        return NormEstimate(v, True, v, v, "closed_form")
    if f.dim != 1:
        raise NotClosedForm("multi-term M^{1,inf} norms are limited to d = 1")
    if grid is not None:
        x = grid.axis(0)
        xi = grid.axis(1) if grid.dim > 1 else grid.axis(0)
    elif terms is not None:
        x, xi = _default_phase_grid(terms, g, params.hbar)
    else:
        x = xi = np.linspace(-12, 12, 481)
    V = _stft_matrix(f, terms, g, x, xi, params)
    val = float(np.trapezoid(np.abs(V), x, axis=0).max())
    return NormEstimate(val, False, val, np.inf, "grid")


def norm_M_1_infty(f, g=None, grid=None, params=DEFAULT):
    return norm_M_1_infty_estimate(f, g, grid, params).value


# ---------------------------------------------------------------- pairings

def window_inner(a, b):
    """<a, b> = int a conj(b) for two Gaussian windows (closed form)."""
    if a.dim != b.dim:
        raise DimensionError("window dimensions differ")
    P = a.omega + np.conj(b.omega)
    return complex(a.scale * np.conj(b.scale) * np.prod(np.sqrt(np.pi / P)))


def _flip_xi(co):
    out = co.copy()
    out[1] = -out[1]
    out[4] = -out[4]
    return out


def phase_space_sum(pairs, dim, tol=1e-12, max_level=4):
    """Sum over (coefficient, coefficient-array) pairs of coef * prod_j int int exp(Q_j).

    Each Q_j is a complex quadratic in one coordinate's (x, xi).  The step is
    halved until two levels agree; returns (value, error_estimate, trace).
    """
    cache = {}

    def level_value(level):
        total = 0j
        for coef, co in pairs:
            prod = coef
            for j in range(dim):
                key = (co[:, j].tobytes(), level)
                if key not in cache:
                    cache[key] = quad_gauss2(co[:, j], level)
                prod *= cache[key]
            total += prod
        return total

    trace = [(0, level_value(0))]
    for level in range(1, max_level + 1):
        trace.append((level, level_value(level)))
        err = abs(trace[-1][1] - trace[-2][1])
        if err <= tol * (1 + abs(trace[-1][1])):
            return trace[-1][1], err, trace
    return trace[-1][1], abs(trace[-1][1] - trace[-2][1]), trace


def pairing_pairs(a_terms, wa, b_terms, wb, hbar, companion=False):
    """Per-coordinate coefficient arrays for phase-space products of STFTs.

    ``companion=False``: V_wa a * conj(V_wb b).  ``companion=True``:
    V_wa a * V_{conj wb} b(x, -xi).  Returns a list of (coefficient, (6, d) array).
    """
    pre = (2 * np.pi * hbar) ** (-wa.dim)
    out = []
    for ta in a_terms:
        ca = T.stft_coeffs(ta, wa.omega, hbar)
        for tb in b_terms:
            if companion:
                cb = _flip_xi(T.stft_coeffs(tb, np.conj(wb.omega), hbar))
                coef = ta.c * np.conj(wa.scale) * tb.c * wb.scale * pre
            else:
                cb = np.conj(T.stft_coeffs(tb, wb.omega, hbar))
                coef = ta.c * np.conj(wa.scale) * np.conj(tb.c) * wb.scale * pre
            out.append((coef, ca + cb))
    return out


def dual_pairing(h, f, g=None, gamma=None, grid=None, params=DEFAULT, tol=1e-12):
    """<h, f>_* = <g, gamma>^{-1} int int V_gamma h conj(V_g f) dx dxi."""
    if h.dim != f.dim:
        raise DimensionError("h and f dimensions differ")
    g = as_window(g, params, f.dim)
    gamma = as_window(gamma, params, f.dim) if gamma is not None else g
    ip = window_inner(g, gamma)
    if abs(ip) < 1e-300:
        raise ValueError("<g, gamma> vanishes")
    pairs = pairing_pairs(_terms_any(h, params.hbar), gamma, _terms_any(f, params.hbar), g,
                          params.hbar)
    val, _, _ = phase_space_sum(pairs, f.dim, tol)
    return val / ip


def _terms_any(f, hbar):
    if isinstance(f, list):
        return f
    return C.expand(f, hbar)


def stft_fourier_rotation_check(f, g, x, xi, params=DEFAULT):
    """Both sides of V_g f(x, xi) = e^{-i x.xi / hbar} V_ghat fhat(xi, -x)."""
    g = as_window(g, params, f.dim)
    hb = params.hbar
    x = np.atleast_1d(np.asarray(x, dtype=float))
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    lhs = stft_closed(f, g, x, xi, params)
    fh = T.fourier(C.expand(f, hb), hb)
    gh = g.fourier()
    rhs = np.exp(-1j * (x @ xi) / hb) * stft_terms(fh, gh, xi, -x, hb)
    return complex(lhs), complex(rhs)
