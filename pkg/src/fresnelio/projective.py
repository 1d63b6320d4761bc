"""Cylinder functions on R^infinity and the functionals L_min, L and L'.

Points of R^infinity are finitely supported vectors with an implicit zero
tail.  Sequences are 1-based callables; every statement about an infinite
tail goes through an explicit certificate from ``tails``.
"""

from __future__ import annotations

import math
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.special import gammaln

from . import catalog as C
from . import gabor as G
from . import terms as T
from .catalog import DEFAULT
from .errors import (CauchyCheckFailed, DimensionError, Divergent, NonConvergent,
                     NotClosedForm)
from .fresnel import fresnel_direct, fresnel_parseval, fresnel_phase_space, uniform_bound_check
from .tails import GeometricTail, PowerTail, tail_from_dict


def _workers():
    try:
        return max(1, int(os.environ.get("FRESNELIO_THREADS", "1")))
    except ValueError:
        return 1


def _pmap(fn, items):
    """Ordered map; threads only when FRESNELIO_THREADS > 1."""
    items = list(items)
    n = _workers()
    if n == 1 or len(items) < 2:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------- sequences

class RealSequence:
    """A 1-based real sequence from a JSON-able spec.

    Specs: a list of values, or {"type": "geometric", "first": a, "ratio": r},
    {"type": "constant", "value": c}, {"type": "power", "const": c, "p": p}
    (c * j**-p).  Values are memoized behind a lock.
    """

    def __init__(self, spec):
        if isinstance(spec, RealSequence):
            spec = spec.spec
        if isinstance(spec, (list, tuple, np.ndarray)):
            spec = [float(v) for v in spec]
        elif isinstance(spec, dict):
            spec = dict(spec)
            kind = spec.get("type")
            need = {"geometric": {"first", "ratio"}, "constant": {"value"},
                    "power": {"const", "p"}}
            if kind not in need:
                raise ValueError(f"unknown sequence type {kind!r}")
            extra = set(spec) - need[kind] - {"type"}
            if extra or not need[kind] <= set(spec):
                raise ValueError(f"bad fields for {kind} sequence: {sorted(spec)}")
        else:
            raise ValueError("sequence spec must be a list or a dict")
        self.spec = spec
        self._cache = {}
        self._lock = threading.Lock()

    @property
    def length(self):
        """Number of available terms (None for generated sequences)."""
        return len(self.spec) if isinstance(self.spec, list) else None

    def _term(self, j):
        s = self.spec
        if isinstance(s, list):
            if j > len(s):
                raise IndexError(f"sequence has only {len(s)} stored terms")
            return s[j - 1]
        if s["type"] == "geometric":
            return float(s["first"]) * float(s["ratio"]) ** (j - 1)
        if s["type"] == "constant":
            return float(s["value"])
        return float(s["const"]) * j ** (-float(s["p"]))

    def __call__(self, j):
        if j < 1:
            raise IndexError("sequences are 1-based")
        v = self._cache.get(j)
        if v is None:
            v = self._term(j)
            with self._lock:
                self._cache[j] = v
        return v

    def values(self, n):
        return np.array([self(j) for j in range(1, n + 1)], dtype=float)

    def exact_sum(self, power):
        """Closed-form sum over all j of |a_j|**power, or None."""
        s = self.spec
        if isinstance(s, dict) and s["type"] == "geometric" and abs(s["ratio"]) < 1:
            a, r = abs(float(s["first"])), abs(float(s["ratio"]))
            return a**power / (1 - r**power)
        return None

    def to_dict(self):
        return list(self.spec) if isinstance(self.spec, list) else dict(self.spec)

    def __eq__(self, other):
        return isinstance(other, RealSequence) and self.spec == other.spec

    def __hash__(self):
        return hash(repr(self.spec))

    def __repr__(self):
        return f"RealSequence({self.spec!r})"


def _tail_bound(seq, tail, n, power):
    """Certified bound on sum_{j>n} |a_j|**power (inf without a certificate)."""
    if tail is None:
        return math.inf
    if isinstance(tail, GeometricTail):
        if n < tail.start - 1:
            n_eff = tail.start - 1
            head = sum(abs(seq(j)) ** power for j in range(n + 1, n_eff + 1))
            return head + tail.sum_after(n_eff, seq(tail.start), power)
        return tail.sum_after(n, seq(tail.start), power)
    return tail.sum_after(n, None, power)


def _check_tail(seq, tail, n):
    if tail is None:
        return True
    m = n if seq.length is None else min(n, seq.length)
    return tail.check(list(seq.values(m)))


@dataclass
class WindowSequence:
    """Eigenvalues q_j of the windows g_n; ``tail`` certifies the decay of q_j."""

    q: RealSequence
    tail: object = None

    def __post_init__(self):
        self.q = RealSequence(self.q)

    def first(self, n):
        v = self.q.values(n)
        if np.any(v <= 0):
            raise ValueError("window eigenvalues must be positive")
        return v

    def window(self, n, hbar=1.0):
        return G.standard_window(self.first(n), hbar)

    def bound(self, n_max=64):
        """uniform_bound_check on sup_n ||L_n|| for these windows."""
        if self.q.length is not None:
            n_max = min(n_max, self.q.length)
        return uniform_bound_check(self.q, n_max, self.tail)

    def tail_majorant(self, n):
        return _tail_bound(self.q, self.tail, n, 2)

    def to_dict(self):
        d = {"q": self.q.to_dict()}
        if self.tail is not None:
            d["tail"] = self.tail.to_dict()
        return d

    @classmethod
    def from_dict(cls, d):
        extra = set(d) - {"q", "tail"}
        if extra:
            raise ValueError(f"unknown window-sequence fields {sorted(extra)}")
        return cls(RealSequence(d["q"]), tail_from_dict(d["tail"]) if "tail" in d else None)


def default_windows():
    """q_j = 2^{-j} with its geometric certificate."""
    return WindowSequence(RealSequence({"type": "geometric", "first": 0.5, "ratio": 0.5}),
                          GeometricTail(0.5, 1))


# ---------------------------------------------------------------- cylinder functions

@dataclass(frozen=True)
class CylinderFunction:
    """x in R^infinity -> base(x_1, ..., x_m)."""

    base_dim: int
    base: C.FunctionObject

    def __post_init__(self):
        if self.base.dim != self.base_dim:
            raise DimensionError(f"base has dim {self.base.dim}, declared {self.base_dim}")

    def __call__(self, x, params=DEFAULT):
        x = np.asarray(x, dtype=float).ravel()
        y = np.zeros(self.base_dim)
        n = min(len(x), self.base_dim)
        y[:n] = x[:n]
        return C.evaluate(self.base, y, params)


def cylinder(base):
    return CylinderFunction(base.dim, base)


def extend(f, n):
    """The same cylinder function represented on R^n (n >= base_dim)."""
    if n < f.base_dim:
        raise DimensionError(f"cannot extend a {f.base_dim}-dim base to {n} dims")
    if n == f.base_dim:
        return f
    return CylinderFunction(n, C.tensorize([f.base, C.one(n - f.base_dim)]))


def same_function(f, g):
    """Structural equality of two representations after co-extension."""
    n = max(f.base_dim, g.base_dim)
    return extend(f, n).base == extend(g, n).base


def norm_infinite_estimate(f, w=None, params=DEFAULT):
    w = w or default_windows()
    return G.norm_M_infty_1_estimate(f.base, w.window(f.base_dim, params.hbar), None, params)


def norm_infinite(f, w=None, params=DEFAULT):
    """||f||_{M^{inf,1}(R^inf)} through the base and the windows q_1..q_m."""
    return norm_infinite_estimate(f, w, params).value


def _blocks(obj, start=0):
    """Split into (start, factor) blocks along coordinates, one per coordinate when separable."""
    if isinstance(obj, C.Tensor):
        out, i = [], start
        for fac in obj.factors:
            out += _blocks(fac, i)
            i += fac.dim
        return out
    d = obj.dim
    if d == 1:
        return [(start, obj)]
    if isinstance(obj, C.Constant):
        return [(start, C.constant(obj.c))] + [(start + j, C.one()) for j in range(1, d)]
    if isinstance(obj, C.PlaneWave):
        return [(start + j, C.PlaneWave((obj.k[j],), obj.scaled, obj.normalized))
                for j in range(d)]
    if isinstance(obj, C.ComplexGaussian):
        return [(start + j, C.complex_gaussian(obj.z[j], normalized=obj.normalized))
                for j in range(d)]
    if isinstance(obj, C.Chirp):
        return [(start + j, C.chirp(obj.sign)) for j in range(d)]
    return [(start, obj)]


def cauchy_distance_estimate(f, g, w=None, params=DEFAULT, refine=True):
    """||f - g|| after co-extension, with the common per-coordinate factors pulled out.

    The norm of a tensor product is the product of the norms, so identical
    blocks contribute their own norm and only the differing coordinates enter
    the (possibly multi-term) difference.
    """
    w = w or default_windows()
    n = max(f.base_dim, g.base_dim)
    a, b = extend(f, n).base, extend(g, n).base
    q = w.first(n)
    hb = params.hbar
    ba, bb = _blocks(a), _blocks(b)
    kb = {(s, o.dim): o for s, o in bb}
    common = {(s, o.dim) for s, o in ba if kb.get((s, o.dim)) == o}
    if len(common) == len(ba) == len(bb):
        return G.NormEstimate(0.0, True, 0.0, 0.0, "identical")
    pref = 1.0
    for s, d in sorted(common):
        pref *= G.norm_M_infty_1(kb[(s, d)], G.standard_window(q[s:s + d], hb), params=params)
    rest_a = [o for s, o in ba if (s, o.dim) not in common]
    rest_b = [o for s, o in bb if (s, o.dim) not in common]
    idx = [j for s, o in ba if (s, o.dim) not in common for j in range(s, s + o.dim)]
    diff = C.affine_combo([(1, C.tensorize(rest_a)), (-1, C.tensorize(rest_b))])
    est = G.norm_M_infty_1_estimate(diff, G.standard_window(q[idx], hb), None, params, refine)
    return G.NormEstimate(pref * est.value, est.exact, pref * est.lower, pref * est.upper,
                          est.method)


def cauchy_distance(f, g, w=None, params=DEFAULT):
    return cauchy_distance_estimate(f, g, w, params).value


# ---------------------------------------------------------------- restriction

def _pin(obj, k, params):
    """obj restricted to the first k coordinates (the rest set to 0)."""
    d = obj.dim
    if k >= d:
        return obj
    hb = params.hbar
    drop = d - k
    if isinstance(obj, C.Constant):
        return C.Constant(obj.c, k)
    if isinstance(obj, C.PlaneWave):
        pw = C.PlaneWave(obj.k[:k], obj.scaled, obj.normalized)
        if obj.normalized:
            return C.affine_combo([((2 * np.pi * hb) ** (-drop / 2), pw)])
        return pw
    if isinstance(obj, C.ComplexGaussian):
        cg = C.complex_gaussian(obj.z[:k], normalized=obj.normalized)
        if obj.normalized:
            return C.affine_combo([(T.chirp_prefactor(drop, hb), cg)])
        return cg
    if isinstance(obj, C.Chirp):
        return C.affine_combo([(T.chirp_prefactor(drop, hb, obj.sign), C.chirp(obj.sign, k))])
    if isinstance(obj, C.FourierMeasure):
        mu = obj.mu
        return C.fourier_measure(C.DiscreteMeasure(tuple(p[:k] for p in mu.points),
                                                   mu.weights, k))
    if isinstance(obj, C.CosNorm):
        return C.cos_norm(k)
    if isinstance(obj, C.Tensor):
        kept, const, i = [], 1.0 + 0j, 0
        for fac in obj.factors:
            if i >= k:
                const *= C.evaluate(fac, np.zeros(fac.dim), params)
            else:
                kept.append(_pin(fac, k - i, params))
            i += fac.dim
        base = C.tensorize(kept)
        return base if const == 1 else C.affine_combo([(const, base)])
    if isinstance(obj, C.AffineCombo):
        return C.affine_combo([(c, _pin(m, k, params)) for c, m in obj.members])
    if isinstance(obj, C.Product):
        return C.product([_pin(m, k, params) for m in obj.factors])
    raise NotClosedForm(f"no closed-form restriction for kind {obj.kind}")


def restrict(f, k, params=DEFAULT):
    """The base of ``f`` with coordinates beyond k pinned to zero."""
    if k < 1:
        raise DimensionError("restriction dimension must be at least 1")
    base = f.base if isinstance(f, CylinderFunction) else f
    return _pin(base, k, params)


# ---------------------------------------------------------------- L_min and L

def L_min(f, w=None, params=DEFAULT):
    """L_n(f_n) for the base; the exact closed form when one exists."""
    base = f.base if isinstance(f, CylinderFunction) else f
    try:
        return fresnel_parseval(base, params).value
    except NotClosedForm:
        pass
    try:
        return fresnel_phase_space(base, params=params).value
    except NotClosedForm:
        return fresnel_direct(base, params=params).value


@dataclass
class CylinderSequence:
    """n -> f_n, memoized; ``kind`` selects closed forms in L_topological."""

    term: Callable
    kind: str = "generic"
    data: dict = field(default_factory=dict)

    def __post_init__(self):
        self._cache = {}
        self._lock = threading.Lock()

    def __getitem__(self, n):
        v = self._cache.get(n)
        if v is None:
            v = self.term(n)
            with self._lock:
                self._cache[n] = v
        return v


def product_family(a, e, a_tail=None, e_bound=1.0):
    """f_n = prod_{j<=n} (1 + a_j e_j(x_j)) with e_j = e(j) a 1-D catalog object."""
    a = RealSequence(a)

    def term(n):
        return cylinder(C.tensorize([C.affine_combo([(1, C.one()), (a(j), e(j))])
                                     for j in range(1, n + 1)]))

    return CylinderSequence(term, "product_family",
                            {"a": a, "e": e, "a_tail": a_tail, "e_bound": e_bound})


def plane_wave_sequence(k):
    """f_n = exp((i/hbar) pi_n k . x)."""
    k = RealSequence(k)
    return CylinderSequence(lambda n: cylinder(C.plane_wave(k.values(n))), "plane_wave",
                            {"k": k})


def gaussian_sequence(r):
    """f_n = exp(-sum_{j<=n} r_j x_j^2 / (2 hbar))."""
    r = RealSequence(r)
    return CylinderSequence(lambda n: cylinder(C.complex_gaussian(r.values(n))), "gaussian",
                            {"r": r})


@dataclass
class CauchyCertificate:
    """The pairs actually tested; passing is one-sided evidence only."""

    pairs: list
    tol: float

    def to_dict(self):
        return {"tol": self.tol,
                "pairs": [{"m": m, "n": n, "distance": d, "exact": e}
                          for m, n, d, e in self.pairs]}


@dataclass
class TopologicalResult:
    value: complex
    certificate: CauchyCertificate
    error_bound: float
    method: str

    def __iter__(self):
        return iter((self.value, self.certificate))


def _product_value(seq, n_max, params):
    a, e, tail = seq.data["a"], seq.data["e"], seq.data["a_tail"]
    logs = []
    for j in range(1, n_max + 1):
        l1 = fresnel_parseval(e(j), params).value
        if abs(l1) > seq.data["e_bound"] * (1 + 1e-12):
            raise ValueError(f"|L_1(e_{j})| exceeds the declared bound")
        logs.append(np.log(1 + a(j) * l1))
    val = complex(np.exp(math.fsum(np.real(logs)) + 1j * math.fsum(np.imag(logs))))
    if tail is None:
        return val, math.inf
    tb = _tail_bound(a, tail, n_max, 1) * seq.data["e_bound"]
    return val, abs(val) * math.expm1(tb)


def L_topological(seq, w=None, params=DEFAULT, tol=1e-2, cutoff=8, deltas=(1, 2, 4, 8),
                  starts=None, n_max=64):
    """lim L_min(f_n) after a finite Cauchy check of the sequence.

    Tested pairs are (m, m + delta) for m in ``starts`` (default: cutoff and
    2 * cutoff).  A certified lower bound above ``tol`` is conclusive and
    raises CauchyCheckFailed; an inconclusive pair (upper bound above tol)
    fails as well, since the check cannot vouch for it.
    """
    w = w or default_windows()
    bc = w.bound()
    if not bc.convergent:
        raise Divergent("window sequence has no certified square-summable tail")
    starts = starts or (cutoff, 2 * cutoff)
    jobs = [(m, m + d) for m in starts for d in deltas]
    ests = _pmap(lambda mn: cauchy_distance_estimate(seq[mn[0]], seq[mn[1]], w, params, False),
                 jobs)
    tested = []
    for (m, n), est in zip(jobs, ests):
        tested.append((m, n, float(est.lower if not est.exact else est.value), est.exact))
        cert = CauchyCertificate(list(tested), tol)
        if est.lower > tol:
            raise CauchyCheckFailed(f"||f_{n} - f_{m}|| >= {est.lower:.6g} > {tol}",
                                    (m, n), float(est.lower), cert)
        if est.upper > tol:
            raise CauchyCheckFailed(f"||f_{n} - f_{m}|| could not be bounded below {tol}",
                                    (m, n), float(est.upper), cert)
    cert = CauchyCertificate(tested, tol)
    if seq.kind == "product_family":
        val, err = _product_value(seq, n_max, params)
        return TopologicalResult(val, cert, err, "closed_product")
    last = max(n for _, n in jobs)
    dist = max(d for _, _, d, _ in tested)
    return TopologicalResult(L_min(seq[last], w, params), cert, bc.sup_estimate * dist,
                             "last_partial")


# ---------------------------------------------------------------- sequence functions

@dataclass
class SequenceFunction:
    """Non-cylinder integrands f on R^infinity, known through their restrictions f^(n).

    kinds: "plane_wave_l2" (k), "gaussian_l1" (r), "composite_1d" (h, k),
    "product" (a, e: the limit of a product family).
    """

    kind: str
    seq: RealSequence
    tail: object = None
    h: object = None
    e: Callable = None

    KINDS = ("plane_wave_l2", "gaussian_l1", "composite_1d", "product")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown sequence-function kind {self.kind!r}")
        self.seq = RealSequence(self.seq)
        if self.kind == "composite_1d" and (self.h is None or self.h.dim != 1):
            raise ValueError("composite_1d needs a 1-D function h")
        if self.kind == "product" and self.e is None:
            raise ValueError("product needs the factor family e")

    @property
    def n_available(self):
        return self.seq.length

    def restrict(self, n, params=DEFAULT, n_far=256):
        """f^(n)(x_1..x_n) = f(x_1, ..., x_n, 0, 0, ...)."""
        if self.kind == "plane_wave_l2":
            return C.plane_wave(self.seq.values(n))
        if self.kind == "gaussian_l1":
            return C.complex_gaussian(self.seq.values(n))
        if self.kind == "composite_1d":
            mu = C.as_measure(self.h, params)
            kn = self.seq.values(n)
            pts = tuple(tuple(float(p[0]) * kn) for p in mu.points)
            return C.fourier_measure(C.DiscreteMeasure(pts, mu.weights, n))
        a = self.seq
        base = C.tensorize([C.affine_combo([(1, C.one()), (a(j), self.e(j))])
                            for j in range(1, n + 1)])
        far = np.prod([1 + a(j) * C.evaluate(self.e(j), [0.0], params)
                       for j in range(n + 1, n_far + 1)])
        return C.affine_combo([(far, base)])

    def l2_norm_sq(self, n):
        """(sum_{j<=n} k_j^2, certified bound on the rest)."""
        part = math.fsum(self.seq.values(n) ** 2)
        return part, _tail_bound(self.seq, self.tail, n, 2)

    def to_dict(self):
        d = {"kind": self.kind, "seq": self.seq.to_dict()}
        if self.tail is not None:
            d["tail"] = self.tail.to_dict()
        if self.h is not None:
            d["h"] = C.to_dict(self.h)
        return d

    @classmethod
    def from_dict(cls, d):
        extra = set(d) - {"kind", "seq", "tail", "h"}
        if extra:
            raise ValueError(f"unknown sequence-function fields {sorted(extra)}")
        if d["kind"] == "product":
            raise ValueError("product sequence functions carry a callable and do not serialize")
        return cls(d["kind"], RealSequence(d["seq"]),
                   tail_from_dict(d["tail"]) if "tail" in d else None,
                   C.from_dict(d["h"]) if "h" in d else None)


def plane_wave_l2(k, tail=None):
    return SequenceFunction("plane_wave_l2", RealSequence(k), tail)


def gaussian_l1(r, tail=None):
    return SequenceFunction("gaussian_l1", RealSequence(r), tail)


def composite_1d(h, k, tail=None):
    return SequenceFunction("composite_1d", RealSequence(k), tail, h)


def product_function(a, e, tail=None):
    return SequenceFunction("product", RealSequence(a), tail, None, e)


def restriction_sequence(f, params=DEFAULT):
    """The cylinder sequence n -> E_n f^(n)."""
    return CylinderSequence(lambda n: cylinder(f.restrict(n, params)), "restriction_of",
                            {"of": f})


@dataclass
class LPrimeResult:
    value: complex
    trace: list
    limit: complex
    limit_error: float
    method: str

    def __iter__(self):
        return iter((self.value, self.trace))


def default_schedule(n_max=1024):
    out, n = [], 1
    while n <= n_max:
        out.append(n)
        n *= 2
    return out


def _L_n(f, n, g, params):
    hb = params.hbar
    if f.kind == "plane_wave_l2":
        s = math.fsum(f.seq.values(n) ** 2)
        return complex(np.exp(-0.5j * s / hb))
    if f.kind == "gaussian_l1":
        r = f.seq.values(n)
        if np.any(r < 0):
            raise ValueError("Gaussian rates must be nonnegative")
        return complex(np.exp(-0.5 * np.sum(np.log1p(1j * r))))
    if f.kind == "composite_1d":
        lam = math.sqrt(math.fsum(f.seq.values(n) ** 2))
        return composite_dual_value(f.h, lam, g, params=params)
    a = f.seq
    far = np.prod([1 + a(j) * C.evaluate(f.e(j), [0.0], params) for j in range(n + 1, 257)])
    return complex(far * np.prod([1 + a(j) * fresnel_parseval(f.e(j), params).value
                                  for j in range(1, n + 1)]))


def _limit(f, g, params):
    """Closed-form n -> infinity value with a certified error (inf without a certificate)."""
    hb = params.hbar
    if f.kind in ("plane_wave_l2", "composite_1d"):
        exact = f.seq.exact_sum(2)
        if exact is not None:
            s, err = exact, 0.0
        else:
            n = f.seq.length or 1024
            s, err = f.l2_norm_sq(n)
        if f.kind == "plane_wave_l2":
            return complex(np.exp(-0.5j * s / hb)), err / (2 * hb)
        return composite_dual_value(f.h, math.sqrt(s), g, params=params), \
            (math.inf if err else 0.0)
    if f.kind == "gaussian_l1":
        n = f.seq.length or 4096
        r = f.seq.values(n)
        val = complex(np.exp(-0.5 * np.sum(np.log1p(1j * r))))
        # |log(1 + i r)| <= r, so the unseen factors move the value by at most e^{tail/2} - 1
        return val, math.expm1(0.5 * _tail_bound(f.seq, f.tail, n, 1))
    return _L_n(f, 256, g, params), _tail_bound(f.seq, f.tail, 256, 1)


def L_prime(f, w=None, params=DEFAULT, n_schedule=None, tol=1e-8, g=None):
    """lim_n L_n(f^(n)) along ``n_schedule`` (default doubling to 2^10, capped by stored terms).

    Settles when the last three increments are below ``tol``; otherwise
    raises NonConvergent with the trace.
    """
    sched = list(n_schedule or default_schedule())
    if f.n_available is not None:
        sched = [n for n in sched if n <= f.n_available] or [f.n_available]
    vals = _pmap(lambda n: _L_n(f, n, g, params), sched)
    trace = list(zip(sched, vals))
    diffs = [abs(b - a) for a, b in zip(vals, vals[1:])]
    if len(diffs) >= 3 and max(diffs[-3:]) >= tol:
        raise NonConvergent(f"L' trace moves by {max(diffs[-3:]):.3g} over the last doublings",
                            trace)
    if len(diffs) < 3 and f.n_available is None:
        raise NonConvergent("schedule too short to judge settling", trace)
    limit, err = _limit(f, g, params)
    return LPrimeResult(vals[-1], trace, limit, err, f.kind)


# ---------------------------------------------------------------- composite h(k . x)

def chirp_dilated_terms(lam, hbar):
    """Terms of exp(i lam^2 y^2 / (2 hbar)) on R^1."""
    return [T.make_term(1.0, [-0.5j * lam * lam / hbar], [0.0])]


def composite_dual_value(h, lam, g=None, grid=None, params=DEFAULT, tol=1e-12):
    """Fresnel value of x -> h(k . x) with |k| = lam, through the phase-space pairing.

    Equals (2 pi hbar)^{-1/2} <h^, chi_lam>_* with chi_lam(y) = e^{i lam^2 y^2 / 2 hbar}
    and g = gamma (unit L2 norm by default); at lam = 0 this is h(0).
    """
    if h.dim != 1:
        raise DimensionError("composite integrands use a 1-D profile h")
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    hb = params.hbar
    g = G.as_window(g, params, 1)
    hhat = T.merge(T.fourier(C.expand(h, hb), hb))
    pairs = G.pairing_pairs(hhat, g, chirp_dilated_terms(lam, hb), g, hb)
    val, _, _ = G.phase_space_sum(pairs, 1, tol)
    return complex(val / G.window_inner(g, g) * (2 * np.pi * hb) ** -0.5)


def pushforward_value(h, lam, params=DEFAULT):
    """sum_j w_j e^{-i hbar s_j^2 lam^2 / 2} for h = sum_j w_j e^{i s_j u}."""
    mu = C.as_measure(h, params)
    return complex(sum(w * np.exp(-0.5j * params.hbar * p[0] ** 2 * lam**2)
                       for p, w in zip(mu.points, mu.weights)))


def stft_dilation_check(f, g, lam, x, xi, params=DEFAULT):
    """Both sides of V_g(f o lam)(x, xi) = lam^{-1} V_{g o lam^{-1}} f(lam x, xi / lam), d = 1."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    g = G.as_window(g, params, 1)
    lhs = G.stft_closed(C.dilate(f, lam), g, [x], [xi], params)
    g_inv = G.GaussianWindow(tuple(np.asarray(g.q) / lam**2), g.hbar, "none", g.scale)
    rhs = G.stft_closed(f, g_inv, [lam * x], [xi / lam], params) / lam
    return complex(lhs), complex(rhs)


def inversion_from_fourier(h, t, g=None, gamma=None, grid=None, params=DEFAULT, tol=1e-12):
    """h(t) = <gamma, g>^{-1} int int V_g h^ * companion_gamma psi_t, psi_t the normalized tone."""
    hb = params.hbar
    d = h.dim
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if t.size != d:
        raise DimensionError("t has the wrong dimension")
    g = G.as_window(g, params, d)
    gamma = G.as_window(gamma, params, d) if gamma is not None else g
    ip = G.window_inner(gamma, g)
    if abs(ip) < 1e-300:
        raise ValueError("<gamma, g> vanishes")
    hhat = T.merge(T.fourier(C.expand(h, hb), hb))
    psi = C.expand(C.plane_wave(t, scaled=True, normalized=True), hb)
    pairs = G.pairing_pairs(hhat, g, psi, gamma, hb, companion=True)
    val, _, _ = G.phase_space_sum(pairs, d, tol)
    return complex(val / ip)


# ---------------------------------------------------------------- windowed plane-wave kernel

@dataclass
class KernelCheck:
    lhs: complex
    rhs: complex
    limit: complex

    @property
    def gap(self):
        return abs(self.lhs - self.rhs)


def _perp_factor(n, eps, hb):
    # each orthogonal coordinate contributes (2 pi i hbar)^{-1/2} int e^{i y^2/2hbar - eps^2 y^2/2} dy
    return complex((1 + 1j * eps * eps * hb) ** (-(n - 1) / 2))


def appendix_a_kernel(n, k_vec, x, xi, eps, lambda_grid=None, w_grid=None, g=None,
                      params=DEFAULT):
    """Both sides of the windowed plane-wave Fresnel kernel identity, and its eps -> 0 limit.

    LHS: (2 pi i hbar)^{-n/2} int e^{i|y|^2/2hbar} conj(V_g psi_{-k.y}(x, xi)) phi(eps y) dy
    RHS: e^{i x xi/hbar} (2 pi hbar)^{-1} int int e^{-(i/2hbar)|lam k + x k + eps hbar w|^2}
         phi^(w) e^{i lam xi/hbar} g(lam) dw dlam
    with phi(y) = e^{-|y|^2/2}.  Both integrands depend on y (resp. w) only through
    the component along k and |.|^2, so the orthogonal directions are integrated in
    closed form; the remaining 1-D (LHS) and 2-D (RHS) integrals are trapezoid sums.
    """
    hb = params.hbar
    k_vec = np.atleast_1d(np.asarray(k_vec, dtype=float))
    if k_vec.size != n:
        raise DimensionError("k_vec must have n entries")
    if eps <= 0:
        raise ValueError("eps must be positive")
    g = G.as_window(g, params, 1)
    gh = g.fourier()
    K = float(np.linalg.norm(k_vec))
    perp = _perp_factor(n, eps, hb)

    # left-hand side along the k direction
    om_h = complex(gh.omega[0])
    reach_eps = math.sqrt(80) / eps
    if K > 0:
        reach = min(reach_eps, (abs(xi) + math.sqrt(45 / om_h.real)) / K)
        center = -xi / K if reach < reach_eps else 0.0
    else:
        reach, center = reach_eps, 0.0
    lo, hi = center - reach, center + reach
    ymax = max(abs(lo), abs(hi))
    grad = ymax / hb + abs(x) * K / hb + 2 * abs(om_h.imag) * K * (K * ymax + abs(xi))
    hy = min(0.01, math.pi / (4 * grad))
    y = np.arange(lo, hi + hy / 2, hy)
    alpha = K * y
    ghat = gh.scale * np.exp(-om_h * (-alpha - xi) ** 2)
    integrand = (np.exp(0.5j * y * y / hb) * (2 * np.pi * hb) ** -0.5
                 * np.exp(1j * x * (xi + alpha) / hb) * ghat * np.exp(-0.5 * (eps * y) ** 2))
    lhs = T.chirp_prefactor(1, hb) * np.trapezoid(integrand, y) * perp

    # right-hand side on a (lam, w_1) grid
    om_g = complex(g.omega[0])
    if lambda_grid is None or w_grid is None:
        lr = math.sqrt(45 / om_g.real)
        wr = math.sqrt(90.0)
        gl = K * ((lr + abs(x)) * K + eps * hb * wr) / hb + abs(xi) / hb + 2 * abs(om_g.imag) * lr
        gw = eps * ((lr + abs(x)) * K + eps * hb * wr)
        hl = min(0.02, math.pi / (4 * gl))
        hw = min(0.05, math.pi / (4 * gw + 1e-300))
        lam = np.arange(-lr, lr + hl / 2, hl) if lambda_grid is None else np.asarray(lambda_grid)
        w = np.arange(-wr, wr + hw / 2, hw) if w_grid is None else np.asarray(w_grid)
    else:
        lam, w = np.asarray(lambda_grid), np.asarray(w_grid)
    L = lam[:, None]
    W = w[None, :]
    phase = np.exp(-0.5j / hb * ((L + x) * K + eps * hb * W) ** 2)
    body = phase * (2 * np.pi) ** -0.5 * np.exp(-0.5 * W * W)
    inner = np.trapezoid(body, w, axis=1)
    outer = inner * np.exp(1j * lam * xi / hb) * g.scale * np.exp(-om_g * lam * lam)
    rhs = (np.exp(1j * x * xi / hb) / (2 * np.pi * hb) * np.trapezoid(outer, lam) * perp)
    return KernelCheck(complex(lhs), complex(rhs), appendix_a_limit(K, x, xi, g, params))


def appendix_a_limit(K, x, xi, g=None, params=DEFAULT):
    """eps -> 0 value: e^{i x xi/hbar}(2 pi hbar)^{-1} int e^{-(i/2hbar)K^2(lam+x)^2} e^{i lam xi/hbar} g."""
    hb = params.hbar
    g = G.as_window(g, params, 1)
    om = complex(g.omega[0])
    P = om + 0.5j * K * K / hb
    Q = -1j * K * K * x / hb + 1j * xi / hb
    c0 = -0.5j * K * K * x * x / hb
    return complex(np.exp(1j * x * xi / hb) / (2 * np.pi * hb) * g.scale * np.exp(c0)
                   * T.gauss_integral(P, Q))


# ---------------------------------------------------------------- dominator

def phi_dominator(m, B, x, xi):
    """Phi_{m,B}(x, xi): 1 on |xi| <= B^2|x|, else (1 + B^-2 min|xi -+ B^2 x|^2)^{-m}."""
    if m < 1 or B <= 0:
        raise ValueError("need m >= 1 and B > 0")
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    b2x = B * B * x
    dist = np.minimum(np.abs(xi - b2x), np.abs(xi + b2x))
    out = (1 + dist**2 / (B * B)) ** (-m)
    return np.where(np.abs(xi) <= np.abs(b2x), 1.0, out)


def phi_xi_integral(m, B, x):
    """int Phi_{m,B}(x, xi) dxi by adaptive quadrature."""
    edge = B * B * abs(x)
    f = lambda s: float(phi_dominator(m, B, x, s))  # noqa: E731
    tail, _ = integrate.quad(f, edge, np.inf, epsabs=1e-13, epsrel=1e-12)
    return 2 * edge + 2 * tail


def phi_tail_constant(m, B):
    """sup_x of the integral over <x>: sqrt((2B^2)^2 + c^2), c = B sqrt(pi) Gamma(m-1/2)/Gamma(m)."""
    c = B * math.sqrt(math.pi) * math.exp(gammaln(m - 0.5) - gammaln(m))
    return math.hypot(2 * B * B, c)


# frozen once for m = 2, B = 1
PHI_TAIL_C = math.sqrt(4 + math.pi**2 / 4)


def phi_tail_check(m=2, B=1.0, xs=(0.0, 1.0, 10.0, 100.0), C_frozen=None):
    """Ratios int Phi dxi / <x> against the frozen constant."""
    Cf = C_frozen if C_frozen is not None else (PHI_TAIL_C if (m, B) == (2, 1.0)
                                                else phi_tail_constant(m, B))
    ratios = {float(x): phi_xi_integral(m, B, x) / math.sqrt(1 + x * x) for x in xs}
    return {"constant": Cf, "ratios": ratios, "ok": all(r <= Cf * (1 + 1e-9)
                                                         for r in ratios.values())}


@dataclass
class DominatorReport:
    """``stable`` is False when the max ratio grows by more than 5% along n_list;
    ``limit_ratio`` is the same maximum at lambda = B, the n -> infinity endpoint."""

    B: float
    lambdas: dict
    max_ratio: dict
    stable: bool
    growth: float
    limit_ratio: float


def dominator_check(k_vec, n_list, m=2, g=None, params=DEFAULT, x=None, xi=None, B=None):
    """max |V_g(F_+ o |pi_n k|)| / Phi_{m,B} per n on a phase-space sample, B = |k|."""
    hb = params.hbar
    g = G.as_window(g, params, 1)
    k_vec = np.asarray(k_vec, dtype=float)
    B = float(np.linalg.norm(k_vec)) if B is None else float(B)
    if B <= 0:
        raise ValueError("k must be nonzero")
    x = np.linspace(-10, 10, 201) if x is None else np.asarray(x, dtype=float)
    xi = np.linspace(-10, 10, 201) if xi is None else np.asarray(xi, dtype=float)
    X, XI = np.meshgrid(x, xi, indexing="ij")
    phi = phi_dominator(m, B, X, XI)

    def max_ratio(lam):
        terms = T.scale(chirp_dilated_terms(lam, hb), T.chirp_prefactor(1, hb))
        V = T.stft(terms, g.scale, g.omega, X.reshape(-1, 1), XI.reshape(-1, 1), hb)
        return float((np.abs(V).reshape(X.shape) / phi).max())

    lams, ratios = {}, {}
    for n in n_list:
        lam = float(np.linalg.norm(k_vec[:n]))
        if lam == 0:
            raise ValueError(f"pi_{n} k vanishes")
        lams[n] = lam
        ratios[n] = max_ratio(lam)
    vals = [ratios[n] for n in n_list]
    growth = float(max(vals) / vals[0] - 1)
    return DominatorReport(B, lams, ratios, growth <= 0.05, growth, max_ratio(B))


# ---------------------------------------------------------------- worked sequences

def example_6_2_lower_bound(m, n, r, w=None, params=DEFAULT, grid_points=4001):
    """Numeric value of the lower bound ||f_m|| * int b(xi) dxi for the Gaussian sequence."""
    w = w or default_windows()
    hb = params.hbar
    r = RealSequence(r)
    q = w.first(n)
    fm = C.complex_gaussian(r.values(m)) if m > 0 else C.one(1)
    pref = G.norm_M_infty_1(fm, G.standard_window(q[:m] if m else q[:1], hb), params=params) \
        if m > 0 else 1.0
    total = pref
    for j in range(m, n):
        s = math.sqrt(hb * q[j])
        z = np.linspace(-40 * s, 40 * s, grid_points)
        b = (2 * np.pi * hb) ** -0.5 / math.sqrt(q[j]) * np.exp(-z * z / (2 * hb * q[j]))
        total *= float(np.trapezoid(b, z))
    return total
