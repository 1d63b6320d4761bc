"""Closed-form function catalog.

Every integrand is an immutable ``FunctionObject``.  Construct them with the
factory functions (``constant``, ``plane_wave``, ``complex_gaussian``, ...),
which canonicalize equivalent representations, so that structural equality
``==`` is meaningful for cylinder-function bookkeeping.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import terms as T
from .errors import DimensionError, NotClosedForm


@dataclass(frozen=True)
class Params:
    hbar: float = 1.0

    def __post_init__(self):
        if not (self.hbar > 0 and math.isfinite(self.hbar)):
            raise ValueError(f"hbar must be positive, got {self.hbar}")
        if self.hbar > 1:
            warnings.warn(f"hbar={self.hbar} lies outside (0, 1]", stacklevel=2)

    @property
    def semiclassical(self):
        """False when hbar > 1 (accepted, but flagged)."""
        return self.hbar <= 1


DEFAULT = Params()


def _vec(x):
    return tuple(float(v) for v in np.atleast_1d(np.asarray(x, dtype=float)))


def _cvec(x):
    return tuple(complex(v) for v in np.atleast_1d(np.asarray(x, dtype=complex)))


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finite atomic measure sum_j w_j delta_{p_j} on R^dim."""

    points: tuple
    weights: tuple
    dim: int = 1

    def __post_init__(self):
        pts = tuple(_vec(p) for p in self.points)
        if any(len(p) != self.dim for p in pts):
            raise DimensionError("atom dimension mismatch")
        if len(pts) != len(self.weights):
            raise ValueError("points and weights differ in length")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", tuple(complex(w) for w in self.weights))

    @classmethod
    def from_atoms(cls, atoms, dim=None):
        atoms = list(atoms)
        if dim is None:
            dim = len(_vec(atoms[0][0])) if atoms else 1
        return cls(tuple(p for p, _ in atoms), tuple(w for _, w in atoms), dim)

    def total_variation(self):
        return float(sum(abs(w) for w in self.weights))

    def __len__(self):
        return len(self.weights)


class FunctionObject:
    """Base class; concrete kinds are the dataclasses below."""

    kind = "abstract"
    dim: int

    def __add__(self, other):
        return affine_combo([(1, self), (1, other)])

    def __sub__(self, other):
        return affine_combo([(1, self), (-1, other)])

    def __rmul__(self, c):
        return affine_combo([(c, self)])

    def __mul__(self, other):
        if isinstance(other, FunctionObject):
            return product([self, other])
        return affine_combo([(other, self)])


@dataclass(frozen=True)
class Constant(FunctionObject):
    c: complex = 1.0
    dim: int = 1
    kind = "constant"


@dataclass(frozen=True)
class PlaneWave(FunctionObject):
    """e^{(i/hbar) k.y} when ``scaled`` else e^{i k.y}; times (2 pi hbar)^{-d/2} if normalized."""

    k: tuple
    scaled: bool = True
    normalized: bool = False
    kind = "plane_wave"

    @property
    def dim(self):
        return len(self.k)


@dataclass(frozen=True)
class ComplexGaussian(FunctionObject):
    """exp(-<y, z y> / (2 hbar)) with diagonal z; times (2 pi i hbar)^{-d/2} if normalized."""

    z: tuple
    normalized: bool = False
    kind = "complex_gaussian"

    @property
    def dim(self):
        return len(self.z)


@dataclass(frozen=True)
class Chirp(FunctionObject):
    """F_sign = (2 pi i hbar)^{-d/2} exp(sign * i |y|^2 / (2 hbar))."""

    sign: int = 1
    dim: int = 1
    kind = "chirp"


@dataclass(frozen=True)
class FourierMeasure(FunctionObject):
    """y -> sum_j w_j exp(i p_j . y)."""

    mu: DiscreteMeasure
    kind = "fourier_measure"

    @property
    def dim(self):
        return self.mu.dim


@dataclass(frozen=True)
class CosNorm(FunctionObject):
    dim: int = 1
    kind = "cos_norm"


@dataclass(frozen=True)
class Tensor(FunctionObject):
    factors: tuple
    kind = "tensor"

    @property
    def dim(self):
        return sum(f.dim for f in self.factors)


@dataclass(frozen=True)
class AffineCombo(FunctionObject):
    members: tuple  # of (complex, FunctionObject)
    kind = "affine_combo"

    @property
    def dim(self):
        return self.members[0][1].dim


@dataclass(frozen=True)
class Product(FunctionObject):
    """Pointwise product of same-dimension factors."""

    factors: tuple
    kind = "product"

    @property
    def dim(self):
        return self.factors[0].dim


@dataclass(frozen=True)
class Sampled(FunctionObject):
    """Arbitrary callable ``func(Y) -> values`` for rows of Y; quadrature paths only."""

    func: Callable = field(compare=True)
    dim: int = 1
    label: str = "sampled"
    kind = "sampled"


# ---------------------------------------------------------------- factories

def constant(c=1.0, dim=1):
    return Constant(complex(c), int(dim))


def one(dim=1):
    return Constant(1.0 + 0j, int(dim))


def plane_wave(k, scaled=True, normalized=False):
    return PlaneWave(_vec(k), bool(scaled), bool(normalized))


def chirp(sign=1, dim=1):
    if sign not in (1, -1):
        raise ValueError("chirp sign must be +1 or -1")
    return Chirp(int(sign), int(dim))


def complex_gaussian(z, dim=None, normalized=False):
    """exp(-<y, z y>/(2 hbar)); a normalized purely imaginary z = -/+ i is returned as Chirp(+/-1)."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if dim is not None:
        if z.size == 1:
            z = np.full(int(dim), z[0])
        elif z.size != dim:
            raise DimensionError("z length does not match dim")
    if z.ndim != 1:
        raise ValueError("only diagonal complex Gaussians are supported")
    if np.any(z.real < 0):
        raise ValueError("ComplexGaussian needs Re z >= 0 entrywise")
    if normalized and np.all(z == -1j):
        return Chirp(1, z.size)
    if normalized and np.all(z == 1j):
        return Chirp(-1, z.size)
    return ComplexGaussian(_cvec(z), bool(normalized))


def fourier_measure(mu_or_atoms, dim=None):
    mu = mu_or_atoms if isinstance(mu_or_atoms, DiscreteMeasure) else \
        DiscreteMeasure.from_atoms(mu_or_atoms, dim)
    return FourierMeasure(mu)


def cos_norm(dim=1):
    return CosNorm(int(dim))


def sampled(func, dim=1, label="sampled"):
    return Sampled(func, int(dim), label)


def _merge_pair(a, b):
    if isinstance(a, Constant) and isinstance(b, Constant):
        return Constant(a.c * b.c, a.dim + b.dim)
    if isinstance(a, Chirp) and isinstance(b, Chirp) and a.sign == b.sign:
        return Chirp(a.sign, a.dim + b.dim)
    if isinstance(a, ComplexGaussian) and isinstance(b, ComplexGaussian) \
            and a.normalized == b.normalized:
        return complex_gaussian(a.z + b.z, normalized=a.normalized)
    if isinstance(a, PlaneWave) and isinstance(b, PlaneWave) \
            and (a.scaled, a.normalized) == (b.scaled, b.normalized):
        return PlaneWave(a.k + b.k, a.scaled, a.normalized)
    return None


def tensorize(factors):
    """Tensor product f_1(y_1) f_2(y_2) ...; nested tensors are flattened."""
    factors = list(factors)
    if not factors:
        raise ValueError("tensorize needs at least one factor")
    flat = []
    for f in factors:
        flat.extend(f.factors if isinstance(f, Tensor) else [f])
    out = [flat[0]]
    for f in flat[1:]:
        m = _merge_pair(out[-1], f)
        if m is None:
            out.append(f)
        else:
            out[-1] = m
    return out[0] if len(out) == 1 else Tensor(tuple(out))


def affine_combo(members):
    members = tuple((complex(c), f) for c, f in members)
    if not members:
        raise ValueError("empty combination")
    d = members[0][1].dim
    if any(f.dim != d for _, f in members):
        raise DimensionError("AffineCombo members must share dim")
    return AffineCombo(members)


def product(factors):
    factors = tuple(factors)
    d = factors[0].dim
    if any(f.dim != d for f in factors):
        raise DimensionError("Product factors must share dim")
    return factors[0] if len(factors) == 1 else Product(factors)


# ---------------------------------------------------------------- evaluation

def evaluate_many(f, Y, params=DEFAULT):
    """Values at the rows of Y (shape (N, dim))."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if Y.shape[1] != f.dim:
        raise DimensionError(f"points have dimension {Y.shape[1]}, function has {f.dim}")
    h = params.hbar
    if isinstance(f, Constant):
        return np.full(Y.shape[0], f.c, dtype=complex)
    if isinstance(f, Tensor):
        out = np.ones(Y.shape[0], dtype=complex)
        i = 0
        for g in f.factors:
            out *= evaluate_many(g, Y[:, i:i + g.dim], params)
            i += g.dim
        return out
    if isinstance(f, AffineCombo):
        return sum(c * evaluate_many(g, Y, params) for c, g in f.members)
    if isinstance(f, Product):
        out = np.ones(Y.shape[0], dtype=complex)
        for g in f.factors:
            out *= evaluate_many(g, Y, params)
        return out
    if isinstance(f, CosNorm):
        return np.cos(np.linalg.norm(Y, axis=1)).astype(complex)
    if isinstance(f, Sampled):
        return np.asarray(f.func(Y), dtype=complex).reshape(Y.shape[0])
    if isinstance(f, ComplexGaussian) and np.any(np.asarray(f.z).real < 0):
        raise ValueError("Re z < 0: unbounded growth")
    return T.values(expand(f, h), Y)


def evaluate(f, y, params=DEFAULT):
    """Exact value of ``f`` at a single point ``y``."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if y.ndim != 1 or y.size != f.dim:
        raise DimensionError(f"point has dimension {y.size}, function has {f.dim}")
    return complex(evaluate_many(f, y.reshape(1, -1), params)[0])


# ---------------------------------------------------------------- term expansion

def expand(f, hbar):
    """Gaussian-term expansion of ``f`` (raises NotClosedForm when unavailable)."""
    d = f.dim
    zero = np.zeros(d, dtype=complex)
    if isinstance(f, Constant):
        return [T.make_term(f.c, zero, zero)]
    if isinstance(f, PlaneWave):
        k = np.asarray(f.k, dtype=float)
        beta = 1j * k / hbar if f.scaled else 1j * k
        c = (T.TWO_PI * hbar) ** (-d / 2) if f.normalized else 1.0
        return [T.make_term(c, zero, beta)]
    if isinstance(f, ComplexGaussian):
        z = np.asarray(f.z, dtype=complex)
        if np.any(z.real < 0):
            raise ValueError("Re z < 0: unbounded growth")
        c = T.chirp_prefactor(d, hbar) if f.normalized else 1.0
        return [T.make_term(c, z / (2 * hbar), zero)]
    if isinstance(f, Chirp):
        return [T.make_term(T.chirp_prefactor(d, hbar), np.full(d, -f.sign * 0.5j / hbar), zero)]
    if isinstance(f, FourierMeasure):
        return [T.make_term(w, zero, 1j * np.asarray(p)) for p, w in
                zip(f.mu.points, f.mu.weights)]
    if isinstance(f, CosNorm):
        if d != 1:
            raise NotClosedForm("cos|y| is not separable for dim > 1")
        return [T.make_term(0.5, zero, [1j]), T.make_term(0.5, zero, [-1j])]
    if isinstance(f, Tensor):
        out = expand(f.factors[0], hbar)
        for g in f.factors[1:]:
            out = T.tensor(out, expand(g, hbar))
        return out
    if isinstance(f, AffineCombo):
        out = []
        for c, g in f.members:
            out.extend(T.scale(expand(g, hbar), c))
        return out
    if isinstance(f, Product):
        out = expand(f.factors[0], hbar)
        for g in f.factors[1:]:
            out = T.multiply(out, expand(g, hbar))
        return out
    raise NotClosedForm(f"no closed form for kind {f.kind}")


def has_closed_form(f):
    try:
        expand(f, 1.0)
    except NotClosedForm:
        return False
    return True


def as_measure(f, params=DEFAULT):
    """Atomic measure mu with f(y) = sum_j w_j e^{i p_j.y}, for plane-wave type objects."""
    if isinstance(f, FourierMeasure):
        return f.mu
    pts, ws = [], []
    for t in T.merge(expand(f, params.hbar)):
        if np.any(t.alpha != 0) or np.any(t.beta.real != 0) or t.delta.any():
            raise NotClosedForm("not a finite sum of plane waves")
        pts.append(t.beta.imag)
        ws.append(t.c)
    return DiscreteMeasure(tuple(pts), tuple(ws), f.dim)


def dilate(f, lam):
    """y -> f(lam * y) as a catalog object (closed-form kinds)."""
    lam = float(lam)
    if isinstance(f, Constant):
        return f
    if isinstance(f, PlaneWave):
        return PlaneWave(tuple(lam * k for k in f.k), f.scaled, f.normalized)
    if isinstance(f, ComplexGaussian):
        return complex_gaussian(np.asarray(f.z) * lam**2, normalized=f.normalized)
    if isinstance(f, Chirp):
        return complex_gaussian(np.full(f.dim, -f.sign * 1j * lam**2), normalized=True)
    if isinstance(f, FourierMeasure):
        mu = f.mu
        return FourierMeasure(DiscreteMeasure(tuple(tuple(lam * v for v in p) for p in mu.points),
                                              mu.weights, mu.dim))
    if isinstance(f, Tensor):
        return tensorize([dilate(g, lam) for g in f.factors])
    if isinstance(f, AffineCombo):
        return affine_combo([(c, dilate(g, lam)) for c, g in f.members])
    if isinstance(f, Product):
        return product([dilate(g, lam) for g in f.factors])
    if isinstance(f, Sampled):
        return Sampled(lambda Y, _f=f.func: _f(lam * np.asarray(Y)), f.dim, f.label + f"@{lam}")
    raise NotClosedForm(f"cannot dilate kind {f.kind}")


# ---------------------------------------------------------------- JSON

def _cj(z):
    z = complex(z)
    return [z.real, z.imag] if z.imag else z.real


def _cl(v):
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1])
    return complex(v)


def to_dict(f):
    if isinstance(f, Constant):
        p = {"c": _cj(f.c)}
    elif isinstance(f, PlaneWave):
        p = {"k": list(f.k), "scaled": f.scaled, "normalized": f.normalized}
    elif isinstance(f, ComplexGaussian):
        p = {"z": [_cj(v) for v in f.z], "normalized": f.normalized}
    elif isinstance(f, Chirp):
        p = {"sign": f.sign}
    elif isinstance(f, FourierMeasure):
        p = {"atoms": [{"point": list(pt), "weight": _cj(w)}
                       for pt, w in zip(f.mu.points, f.mu.weights)]}
    elif isinstance(f, CosNorm):
        p = {}
    elif isinstance(f, (Tensor, Product)):
        p = {"factors": [to_dict(g) for g in f.factors]}
    elif isinstance(f, AffineCombo):
        p = {"members": [{"coef": _cj(c), "f": to_dict(g)} for c, g in f.members]}
    else:
        raise NotClosedForm(f"kind {f.kind} is not serializable")
    return {"dim": f.dim, "kind": f.kind, "params": p}


def from_dict(d):
    if set(d) - {"dim", "kind", "params"}:
        raise ValueError(f"unknown fields {sorted(set(d) - {'dim', 'kind', 'params'})}")
    kind, p, dim = d["kind"], d.get("params", {}), int(d["dim"])
    if kind == "constant":
        f = constant(_cl(p.get("c", 1.0)), dim)
    elif kind == "plane_wave":
        f = plane_wave(p["k"], p.get("scaled", True), p.get("normalized", False))
    elif kind == "complex_gaussian":
        f = complex_gaussian([_cl(v) for v in p["z"]], dim, p.get("normalized", False))
    elif kind == "chirp":
        f = chirp(int(p.get("sign", 1)), dim)
    elif kind == "fourier_measure":
        f = fourier_measure([(a["point"], _cl(a["weight"])) for a in p["atoms"]], dim)
    elif kind == "cos_norm":
        f = cos_norm(dim)
    elif kind == "tensor":
        f = tensorize([from_dict(g) for g in p["factors"]])
    elif kind == "product":
        f = product([from_dict(g) for g in p["factors"]])
    elif kind == "affine_combo":
        f = affine_combo([(_cl(m["coef"]), from_dict(m["f"])) for m in p["members"]])
    else:
        raise ValueError(f"unknown kind {kind!r}")
    if f.dim != dim:
        raise DimensionError(f"declared dim {dim} but object has dim {f.dim}")
    return f


def to_json(f):
    return json.dumps(to_dict(f), sort_keys=True)


def from_json(s):
    return from_dict(json.loads(s))
