"""Named test functions and sequence presets shared by the CLI and the tests."""

from __future__ import annotations

import json

from . import catalog as C
from . import projective as P
from .tails import GeometricTail

GEOMETRIC_HALF = {"type": "geometric", "first": 0.5, "ratio": 0.5}


def _waves():
    return C.plane_wave([0.5]) + 0.3 * C.plane_wave([-1.2], scaled=False)


_BUILDERS = {
    "constant1": C.one,
    "delta2": lambda: C.fourier_measure([([2.0], 1.0)]),
    "measure2": lambda: C.fourier_measure([([1.0], 0.5), ([-3.0], 0.25j)]),
    "measure3": lambda: C.fourier_measure([([0.3], 1.0), ([-0.7], -0.5), ([1.5], 0.2 + 0.1j)]),
    "cg1": lambda: C.complex_gaussian(1 + 1j),
    "cg0.1": lambda: C.complex_gaussian(0.1 + 1j),
    "cg0.01": lambda: C.complex_gaussian(0.01 + 1j),
    "cos": lambda: C.cos_norm(1),
    "waves": _waves,
    "chirp+": lambda: C.chirp(1),
    "ex3-5": lambda: C.cos_norm(1),
}

# the one-dimensional Fresnel corpus (aliases excluded)
FRESNEL_CORPUS = ("constant1", "delta2", "measure2", "measure3", "cg1", "cg0.1", "cg0.01",
                  "cos", "waves")


def names():
    return sorted(_BUILDERS)


def get(name):
    """Corpus member by name."""
    try:
        return _BUILDERS[name]()
    except KeyError:
        raise KeyError(f"unknown corpus function {name!r}; known: {', '.join(names())}") \
            from None


def fresnel_corpus():
    return {n: get(n) for n in FRESNEL_CORPUS}


def function_from_spec(spec):
    """A corpus name, a JSON object string, or a dict in the catalog schema."""
    if isinstance(spec, C.FunctionObject):
        return spec
    if isinstance(spec, str):
        s = spec.strip()
        if s.startswith("{"):
            return C.from_dict(json.loads(s))
        return get(s)
    if isinstance(spec, dict):
        return C.from_dict(spec)
    raise ValueError(f"cannot build a function from {spec!r}")


def cylinder_corpus():
    """Cylinder bases of dimensions 1 to 3 with closed-form norms."""
    return {
        "constant1": C.one(),
        "cg1": C.complex_gaussian(1 + 1j),
        "wave2": C.plane_wave([0.4, -0.2]),
        "gauss2": C.complex_gaussian([0.3 + 0.5j, 1.0]),
        "measure3": get("measure3"),
        "tensor3": C.tensorize([C.complex_gaussian(0.3), C.plane_wave([0.4, 0.2])]),
        "waves": _waves(),
    }


# ---------------------------------------------------------------- sequences

def half_tail():
    return GeometricTail(0.5, 1)


def unit_wave(j):
    return C.plane_wave([1.0], scaled=False)


def ex5_1_sequence():
    """f_n = prod_{j<=n} (1 + 2^{-j} e^{i x_j})."""
    return P.product_family(GEOMETRIC_HALF, unit_wave, half_tail())


def ex5_1_function():
    return P.product_function(GEOMETRIC_HALF, unit_wave, half_tail())


def ex6_1_sequence():
    return P.plane_wave_sequence(GEOMETRIC_HALF)


def ex6_2_sequence():
    return P.gaussian_sequence(GEOMETRIC_HALF)


def sec6_1_measure():
    return C.fourier_measure([((0.5,), 0.3), ((-1.0,), 0.5), ((2.0,), 0.2)])


def sec6_1_function():
    return P.composite_1d(sec6_1_measure(), GEOMETRIC_HALF, half_tail())


SEQUENCE_PRESETS = {
    "ex5-1": ex5_1_sequence,
    "ex6-1": ex6_1_sequence,
    "ex6-2": ex6_2_sequence,
}

LPRIME_PRESETS = {
    "gaussian-r-geometric": lambda: P.gaussian_l1(GEOMETRIC_HALF, half_tail()),
    "plane-wave-k-geometric": lambda: P.plane_wave_l2(GEOMETRIC_HALF, half_tail()),
    "sec6-1": sec6_1_function,
    "ex5-1": ex5_1_function,
}
