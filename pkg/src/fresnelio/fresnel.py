"""Finite-dimensional Fresnel integrals by three independent routes.

* ``fresnel_direct``: the mollified Lebesgue integral
  (2 pi i hbar)^{-d/2} int e^{i|x|^2/2hbar} f(x) phi(eps x) dx on a real grid,
  extrapolated to eps -> 0.
* ``fresnel_phase_space``: <gamma, g>^{-1} int int V_g F_+ * companion_gamma f.
* ``fresnel_parseval_measure``: sum_j w_j e^{-i hbar |p_j|^2 / 2}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from . import catalog as C
from . import gabor as G
from . import terms as T
from .catalog import DEFAULT
from .errors import Divergent, NonConvergent, NotClosedForm, ResolutionError
from .quadrature import TAIL, richardson
from .tails import GeometricTail

MAX_NODES = 10_000_000
CHUNK = 500_000


# ---------------------------------------------------------------- mollifiers

@dataclass(frozen=True)
class Mollifier:
    """One-dimensional profile phi with phi(0) = 1, applied coordinatewise."""

    name: str
    profile: object = field(compare=False)
    reach: float = 0.0  # |phi(u)| < e^{-TAIL} for |u| > reach

    def __call__(self, u):
        return self.profile(u)


def _gauss(u):
    return np.exp(-0.5 * u * u)


def _sech(u):
    return 1.0 / np.cosh(np.minimum(np.abs(u), 700.0))


GAUSSIAN = Mollifier("gaussian", _gauss, math.sqrt(2 * TAIL))
SECH = Mollifier("sech", _sech, TAIL + math.log(2))


def mollifier_from(obj, params=DEFAULT):
    """A Mollifier from a name or a 1-D FunctionObject profile."""
    if isinstance(obj, Mollifier):
        return obj
    if obj in ("gaussian", None):
        return GAUSSIAN
    if obj == "sech":
        return SECH
    if isinstance(obj, C.FunctionObject):
        if obj.dim != 1:
            raise ValueError("mollifier profile must be one-dimensional")

        def prof(u, _f=obj):
            u = np.asarray(u, dtype=float)
            return C.evaluate_many(_f, u.reshape(-1, 1), params).reshape(u.shape)

        if abs(prof(np.zeros(1))[0] - 1) > 1e-14:
            raise ValueError("mollifier must satisfy phi(0) = 1")
        reach = 1.0
        while abs(prof(np.array([reach]))[0]) > math.exp(-TAIL) and reach < 1e6:
            reach *= 2
        return Mollifier(getattr(obj, "label", obj.kind), prof, reach)
    raise ValueError(f"unknown mollifier {obj!r}")


@dataclass(frozen=True)
class RegularizerSchedule:
    mollifier: object = "gaussian"
    epsilons: tuple = tuple(2.0**-j for j in range(17))

    def __post_init__(self):
        eps = tuple(float(e) for e in self.epsilons)
        if any(e <= 0 for e in eps):
            raise ValueError("epsilons must be positive")
        if any(b >= a * (1 - 1e-15) for a, b in zip(eps, eps[1:])):
            raise ValueError("epsilons must be strictly decreasing")
        object.__setattr__(self, "epsilons", eps)


@dataclass
class FresnelResult:
    value: complex
    method: str
    error_estimate: float
    trace: list
    raw_trace: list = field(default_factory=list)

    def __complex__(self):
        return complex(self.value)


# ---------------------------------------------------------------- direct route

def _reach_of_term(a, b):
    """Radius beyond which |exp(-a y^2 + b y)| < e^{-TAIL} relative to its peak."""
    ar, br = a.real, abs(b.real)
    if ar <= 0:
        if br > 0:
            raise Divergent("exponentially growing integrand")
        return math.inf
    y0 = br / (2 * ar)
    return y0 + math.sqrt((TAIL + br * y0) / ar)


def _factor_integral(a, b, eps, moll, hbar, max_nodes):
    """int e^{i y^2/2hbar} e^{-a y^2 + b y} phi(eps y) dy by trapezoid, or None if too costly."""
    R = min(_reach_of_term(a, b), moll.reach / eps)
    nu = abs(1 / hbar - 2 * a.imag) * R + abs(b.imag)
    widths = [moll.reach / eps / 8]
    if a.real > 0:
        widths.append(1 / math.sqrt(2 * a.real))
    if moll is GAUSSIAN:
        widths.append(1 / eps)
    h = min(math.pi / (1.5 * nu + 1e-300), 0.5 * min(widths))
    n = int(math.ceil(R / h))
    if 2 * n + 1 > max_nodes:
        return None
    total = 0j
    pa = 0.5j / hbar - a
    for start in range(-n, n + 1, CHUNK):
        k = np.arange(start, min(start + CHUNK, n + 1))
        y = k * h
        total += np.sum(np.exp(pa * y * y + b * y) * moll(eps * y))
    return total * h


def _richardson_trace(eps, raw):
    """Extrapolated iterates from the last three raw values (error even in eps)."""
    out = []
    for k in range(len(raw)):
        if k < 2:
            out.append(raw[k])
            continue
        ratio = eps[k - 1] / eps[k]
        table = richardson(raw[k - 2:k + 1], ratio, 2)
        out.append(table[-1][0])
    return out


def fresnel_direct(f, sched=None, grid=None, params=DEFAULT, tol=1e-10, nc_tol=1e-5,
                   max_nodes=MAX_NODES):
    """Mollified integral along the eps schedule with Richardson extrapolation.

    The schedule stops early once the extrapolated iterates settle below
    ``tol`` or the next level would exceed ``max_nodes`` grid points per axis.
    """
    sched = sched or RegularizerSchedule()
    moll = mollifier_from(sched.mollifier, params)
    hb = params.hbar
    if isinstance(f, C.CosNorm) and f.dim > 1:
        return _direct_radial_cos(f.dim, sched, moll, hb, tol, nc_tol, max_nodes)
    try:
        terms = T.merge(C.expand(f, hb))
    except NotClosedForm:
        return _direct_grid(f, sched, moll, grid, params, tol, nc_tol)
    pref = T.chirp_prefactor(1, hb)
    cache = {}
    eps_used, raw = [], []
    for e in sched.epsilons:
        total = 0j
        ok = True
        for t in terms:
            prod = t.c
            for a, b in zip(t.alpha, t.beta):
                key = (complex(a), complex(b), e)
                if key not in cache:
                    cache[key] = _factor_integral(complex(a), complex(b), e, moll, hb, max_nodes)
                if cache[key] is None:
                    ok = False
                    break
                prod *= pref * cache[key]
            if not ok:
                break
            total += prod
        if not ok:
            break
        eps_used.append(e)
        raw.append(total)
        ext = _richardson_trace(eps_used, raw)
        if len(ext) >= 4 and _settled(ext[-3:], tol):
            break
    return _finish(eps_used, raw, tol, nc_tol, "direct_eps")


def _settled(vals, tol):
    v = vals[-1]
    return max(abs(a - v) for a in vals) <= tol * (1 + abs(v))


def _finish(eps_used, raw, tol, nc_tol, method):
    if len(raw) < 3:
        raise ResolutionError("fewer than three feasible regularization levels")
    ext = _richardson_trace(eps_used, raw)
    trace = list(zip(eps_used, ext))
    last = ext[-4:]
    spread = max(abs(a - ext[-1]) for a in last)
    diffs = [abs(b - a) for a, b in zip(last, last[1:])]
    contracting = len(diffs) >= 2 and diffs[-1] < 0.5 * diffs[-2]
    if spread > nc_tol * (1 + abs(ext[-1])) and not contracting:
        raise NonConvergent(f"eps-trace oscillates by {spread:.3g}", trace)
    err = abs(ext[-1] - ext[-2])
    return FresnelResult(complex(ext[-1]), method, float(err), trace, list(zip(eps_used, raw)))


def _direct_radial_cos(d, sched, moll, hb, tol, nc_tol, max_nodes):
    """cos|y| in d >= 2 with the mollifier applied radially, phi(eps |y|)."""
    sphere = 2 * math.pi ** (d / 2) / math.exp(gammaln(d / 2))
    pref = T.chirp_prefactor(d, hb)
    eps_used, raw = [], []
    for e in sched.epsilons:
        R = moll.reach / e
        nu = R / hb + 1
        h = min(math.pi / (1.5 * nu), 0.5 / e * 0.125 * moll.reach)
        n = int(math.ceil(R / h))
        if n + 1 > max_nodes:
            break
        total = 0j
        for start in range(0, n + 1, CHUNK):
            r = np.arange(start, min(start + CHUNK, n + 1)) * h
            w = np.full(r.shape, h)
            if start == 0:
                w[0] = h / 2
            total += np.sum(w * r ** (d - 1) * np.exp(0.5j * r * r / hb) * np.cos(r) * moll(e * r))
        eps_used.append(e)
        raw.append(pref * sphere * total)
        ext = _richardson_trace(eps_used, raw)
        if len(ext) >= 4 and _settled(ext[-3:], tol):
            break
    return _finish(eps_used, raw, tol, nc_tol, "direct_eps")


def _direct_grid(f, sched, moll, grid, params, tol, nc_tol, max_nodes=MAX_NODES):
    """Tensor-grid route for callables without a closed form (d <= 2)."""
    d, hb = f.dim, params.hbar
    if d > 2:
        raise NotClosedForm("grid route is limited to d <= 2")
    pref = T.chirp_prefactor(d, hb)
    eps_used, raw = [], []
    for e in sched.epsilons:
        R = moll.reach / e if grid is None else min(grid.R[0], moll.reach / e)
        h = math.pi / (1.5 * R / hb) if grid is None else grid.h[0]
        if h > math.pi / (R / hb):
            raise ResolutionError("grid step too coarse for the chirp")
        n = int(math.ceil(R / h))
        if (2 * n + 1) ** d > max_nodes:
            break
        ax = np.arange(-n, n + 1) * h
        mesh = np.meshgrid(*([ax] * d), indexing="ij")
        Y = np.stack([m.ravel() for m in mesh], axis=1)
        r2 = np.sum(Y * Y, axis=1)
        phi = np.prod(moll(e * Y), axis=1)
        total = np.sum(np.exp(0.5j * r2 / hb) * C.evaluate_many(f, Y, params) * phi) * h**d
        eps_used.append(e)
        raw.append(pref * total)
        ext = _richardson_trace(eps_used, raw)
        if len(ext) >= 4 and _settled(ext[-3:], tol):
            break
    return _finish(eps_used, raw, tol, nc_tol, "direct_eps")


# ---------------------------------------------------------------- phase-space route

def _phase_space(f_terms, d, g, gamma, params, tol):
    hb = params.hbar
    g = G.as_window(g, params, d)
    gamma = G.as_window(gamma, params, d) if gamma is not None else g
    ip = G.window_inner(gamma, g)
    if abs(ip) < 1e-300:
        raise ValueError("<gamma, g> vanishes")
    chirp_terms = C.expand(C.chirp(1, d), hb)
    pairs = G.pairing_pairs(chirp_terms, g, f_terms, gamma, hb, companion=True)
    val, err, trace = G.phase_space_sum(pairs, d, tol)
    return FresnelResult(complex(val / ip), "phase_space", float(err / abs(ip)),
                         [(lvl, v / ip) for lvl, v in trace])


def fresnel_phase_space(f, g=None, gamma=None, grid=None, params=DEFAULT, tol=1e-12):
    """<gamma, g>^{-1} int int V_g F_+ companion_gamma f dx dxi, one 2-D trapezoid per coordinate."""
    nrm = G.norm_M_infty_1_estimate(f, G.as_window(g, params, f.dim), None, params)
    if not np.isfinite(nrm.upper) and nrm.exact:
        raise Divergent("integrand is not in the Sjostrand class")
    return _phase_space(T.merge(C.expand(f, params.hbar)), f.dim, g, gamma, params, tol)


def fresnel_W_infty_1(fhat_of, g=None, gamma=None, grid=None, params=DEFAULT, tol=1e-12):
    """Fresnel integral of the Fourier transform of ``fhat_of`` (a Sjostrand-class member).

    The transform is taken in closed form, so plane waves become point masses
    and the phase-space integral runs with the point-mass STFT.
    """
    hb = params.hbar
    G.norm_M_infty_1_estimate(fhat_of, G.as_window(g, params, fhat_of.dim), None, params)
    fh = T.merge(T.fourier(C.expand(fhat_of, hb), hb))
    return _phase_space(fh, fhat_of.dim, g, gamma, params, tol)


def fresnel_parseval_measure(mu, params=DEFAULT):
    """sum_j w_j exp(-i hbar |p_j|^2 / 2), exact."""
    hb = params.hbar
    return complex(sum(w * np.exp(-0.5j * hb * float(np.dot(p, p)))
                       for p, w in zip(mu.points, mu.weights)))


def fresnel_parseval(f, params=DEFAULT):
    """Parseval route for catalog objects.

    Finite sums of plane waves go through the atomic formula; terms with a
    Gaussian factor use the same identity for the Gaussian measure, which is
    the closed-form Gaussian integral.
    """
    hb = params.hbar
    try:
        mu = C.as_measure(f, params)
    except NotClosedForm:
        pass
    else:
        return FresnelResult(fresnel_parseval_measure(mu, params), "parseval_measure", 0.0, [])
    terms = T.merge(C.expand(f, hb))
    val = sum(T.fresnel_closed(t, hb) for t in terms)
    return FresnelResult(complex(val), "parseval_measure", 0.0, [])


def fresnel_all(f, params=DEFAULT, sched=None, g=None, gamma=None):
    """All applicable routes, keyed by method tag."""
    out = {"direct_eps": fresnel_direct(f, sched, params=params)}
    try:
        out["phase_space"] = fresnel_phase_space(f, g, gamma, params=params)
    except NotClosedForm:
        pass
    try:
        out["parseval_measure"] = fresnel_parseval(f, params)
    except NotClosedForm:
        pass
    return out


# ---------------------------------------------------------------- operator norms

def op_norm_Ln(q):
    """prod_j (q_j^2 + 1)^{1/4}, accumulated in log space."""
    q = np.asarray(q, dtype=float)
    if np.any(q <= 0):
        raise ValueError("window eigenvalues must be positive")
    return float(np.exp(0.25 * np.sum(np.log1p(q * q))))


def witness_lower_factor(q, eps):
    """|L(f_eps)| / ||f_eps|| per coordinate: ((q+eps)^2+1)^{1/4} / (1+eps(q+eps))^{1/2}."""
    s = np.asarray(q, dtype=float) + eps
    return np.exp(0.25 * np.log1p(s * s) - 0.5 * np.log1p(eps * s))


def op_norm_witnesses(q, alpha, eps, params=DEFAULT):
    """(upper, lower) from the chirped-window and Gaussian-chirp witness families."""
    q = np.asarray(q, dtype=float)
    if alpha <= 0 or eps <= 0:
        raise ValueError("alpha and eps must be positive")
    upper = float(np.exp(0.25 * np.sum(np.log1p((alpha + q) ** 2))))
    lower = float(np.prod(witness_lower_factor(q, eps)))
    return upper, lower


def witness_upper_engine(q, alpha, params=DEFAULT):
    """Upper witness recomputed from the STFT engine: ||F_+||_{M^{1,inf}(gamma)} / |<g, gamma>|."""
    n = len(q)
    gamma = G.chirped_window(alpha, n, params.hbar)
    gq = G.standard_window(q, params.hbar)
    num = G.norm_M_1_infty(C.chirp(1, n), gamma, params=params)
    return num / abs(G.window_inner(gq, gamma))


def witness_lower_engine(q, eps, params=DEFAULT):
    """Lower witness recomputed from the engine: |L(f_eps)| / ||f_eps||_{M^{inf,1}(g_n)}."""
    f = C.complex_gaussian(eps + 1j, len(q))
    val = fresnel_parseval(f, params).value
    return abs(val) / G.norm_M_infty_1(f, G.standard_window(q, params.hbar), params=params)


@dataclass(frozen=True)
class BoundCheck:
    sup_estimate: float
    convergent: bool
    partial: float
    tail_bound: float

    def __iter__(self):
        return iter((self.sup_estimate, self.convergent))


def uniform_bound_check(q_sequence, n_max, tail=None):
    """Bound sup_n ||L_n|| from partial products and a certificate for the tail of q.

    ``q_sequence`` is a callable j -> q_j (1-based) or an iterable.  Without a
    certificate the flag is False: convergence is never inferred from data.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    if callable(q_sequence):
        q = np.array([q_sequence(j) for j in range(1, n_max + 1)], dtype=float)
    else:
        q = np.array(list(q_sequence)[:n_max], dtype=float)
    logp = 0.25 * math.fsum(np.log1p(q * q))
    partial = math.exp(logp)
    if tail is None or not tail.check(list(q)):
        return BoundCheck(partial, False, partial, math.inf)
    start_val = q[tail.start - 1] if isinstance(tail, GeometricTail) else None
    tb = tail.sum_after(n_max, start_val, power=2)
    if not math.isfinite(tb):
        return BoundCheck(math.inf, False, partial, tb)
    # log(1 + x) <= x bounds the unseen factors
    return BoundCheck(math.exp(logp + 0.25 * tb), True, partial, tb)
