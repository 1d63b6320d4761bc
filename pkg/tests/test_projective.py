import cmath
import math

import numpy as np
import pytest

from fresnelio import catalog as C
from fresnelio import corpus
from fresnelio import projective as P
from fresnelio.errors import CauchyCheckFailed, DimensionError, Divergent, NonConvergent
from fresnelio.tails import GeometricTail

HALF = corpus.GEOMETRIC_HALF


@pytest.fixture(scope="module")
def w():
    return P.default_windows()


# ---------------------------------------------------------------- sequences and windows

def test_real_sequence_specs():
    assert P.RealSequence(HALF)(3) == 0.125
    assert P.RealSequence({"type": "power", "const": 2.0, "p": 1.0})(4) == 0.5
    assert P.RealSequence([1.0, 2.0]).length == 2
    assert P.RealSequence(HALF).exact_sum(2) == pytest.approx(1 / 3)
    with pytest.raises(ValueError):
        P.RealSequence({"type": "geometric", "first": 1.0})
    with pytest.raises(IndexError):
        P.RealSequence([1.0])(2)


def test_window_sequence_round_trip():
    ws = P.default_windows()
    again = P.WindowSequence.from_dict(ws.to_dict())
    assert again.first(5).tolist() == ws.first(5).tolist()
    assert again.bound().convergent
    with pytest.raises(ValueError):
        P.WindowSequence.from_dict({"q": [1.0], "extra": 1})


def test_uncertified_windows_rejected():
    ws = P.WindowSequence(P.RealSequence({"type": "constant", "value": 1.0}))
    with pytest.raises(Divergent):
        P.L_topological(corpus.ex5_1_sequence(), ws)


# ---------------------------------------------------------------- cylinder functions

def test_extend_keeps_values(params):
    f = P.cylinder(C.plane_wave([0.7]))
    g = P.extend(f, 3)
    for x in ([0.2, 5.0, -1.0], [1.5, 0.0, 9.0]):
        assert g(x, params) == pytest.approx(f(x, params))
    with pytest.raises(DimensionError):
        P.extend(g, 2)


def test_norm_of_one_any_representation(w, params):
    for n in (1, 2, 5):
        assert P.norm_infinite(P.extend(P.cylinder(C.one()), n), w, params) == \
            pytest.approx(1.0, rel=1e-12)


def test_product_norm(w, params):
    a = [0.5, 0.25, 0.125]
    f = P.cylinder(C.tensorize([C.one() + aj * C.plane_wave([1.0 + j]) for j, aj in enumerate(a)]))
    assert P.norm_infinite(f, w, params) == pytest.approx(np.prod([1 + v for v in a]), rel=1e-10)


def test_plane_wave_distance_is_two(w, params):
    seq = corpus.ex6_1_sequence()
    d = P.cauchy_distance_estimate(seq[3], seq[5], w, params)
    assert d.exact and d.value == pytest.approx(2.0, abs=1e-12)
    assert P.cauchy_distance(seq[4], seq[4], w, params) == 0.0


def test_product_partials_distance_bound(w, params):
    seq = corpus.ex5_1_sequence()
    m, n = 3, 6
    d = P.cauchy_distance(seq[m], seq[n], w, params)
    bound = P.norm_infinite(seq[m], w, params) * (np.prod([1 + 0.5**j for j in range(m + 1, n + 1)]) - 1)
    assert d <= bound * (1 + 1e-12)


def test_restrict_plane_wave(params):
    r = P.restrict(P.cylinder(C.plane_wave([0.1, 0.2, 0.3])), 2, params)
    assert r == C.plane_wave([0.1, 0.2])


def test_restrict_contracts(w, params):
    for name, base in corpus.cylinder_corpus().items():
        f = P.cylinder(base)
        full = P.norm_infinite(f, w, params)
        for k in range(1, base.dim + 1):
            r = P.norm_infinite(P.cylinder(P.restrict(f, k, params)), w, params)
            assert r <= full * (1 + 1e-10), name


def test_lmin_representation_independent(w, params):
    f = P.cylinder(C.tensorize([C.complex_gaussian(0.3 + 1j), C.plane_wave([0.5])]))
    assert P.L_min(f, w, params) == pytest.approx(P.L_min(P.extend(f, 6), w, params), abs=1e-14)
    assert P.L_min(P.extend(P.cylinder(C.one()), 4), w, params) == 1.0


def test_lmin_plane_wave_cylinder(params):
    k = np.array([0.5, 0.25, 0.125])
    v = P.L_min(P.cylinder(C.plane_wave(k)), None, params)
    assert v == pytest.approx(cmath.exp(-0.5j * float(k @ k)), abs=1e-14)


# ---------------------------------------------------------------- extensions

def test_ltopo_product_family(w, params):
    res = P.L_topological(corpus.ex5_1_sequence(), w, params)
    want = np.prod([1 + 0.5**j * cmath.exp(-0.5j) for j in range(1, 200)])
    assert abs(res.value - want) <= max(res.error_bound, 1e-13)
    assert res.certificate.to_dict()["pairs"]


def test_ltopo_rejects_plane_waves(w, params):
    with pytest.raises(CauchyCheckFailed) as ei:
        P.L_topological(corpus.ex6_1_sequence(), w, params)
    assert ei.value.distance == pytest.approx(2.0, abs=1e-9)


def test_ltopo_rejects_gaussians(w, params):
    with pytest.raises(CauchyCheckFailed):
        P.L_topological(corpus.ex6_2_sequence(), w, params)
    assert P.example_6_2_lower_bound(2, 4, HALF, w, params) >= 1 - 1e-6


def test_lprime_plane_wave(w, params):
    res = P.L_prime(P.plane_wave_l2(HALF, GeometricTail(0.5, 1)), w, params)
    assert res.limit == pytest.approx(cmath.exp(-1j / 6), abs=1e-15)
    assert abs(res.value - cmath.exp(-1j / 6)) < 1e-8


def test_lprime_gaussian(w, params):
    res = P.L_prime(P.gaussian_l1(HALF, GeometricTail(0.5, 1)), w, params)
    want = np.prod([(1 + 1j * 2.0**-j) ** -0.5 for j in range(1, 61)])
    assert abs(res.value - want) < 1e-10
    assert abs(res.limit - want) < 1e-12


def test_lprime_product_matches_ltopo(w, params):
    a = P.L_prime(corpus.ex5_1_function(), w, params)
    b = P.L_topological(corpus.ex5_1_sequence(), w, params)
    assert a.value == pytest.approx(b.value, abs=1e-12)


def test_lprime_nonconvergent(w, params):
    f = P.plane_wave_l2({"type": "power", "const": 1.0, "p": 0.5})
    with pytest.raises(NonConvergent) as ei:
        P.L_prime(f, w, params)
    assert ei.value.trace


def test_restriction_sequence_agrees(params):
    f = P.gaussian_l1(HALF)
    seq = P.restriction_sequence(f, params)
    assert P.L_min(seq[5], None, params) == pytest.approx(
        np.prod([(1 + 1j * 2.0**-j) ** -0.5 for j in range(1, 6)]), abs=1e-14)


def test_sequence_function_serialization():
    f = corpus.sec6_1_function()
    g = P.SequenceFunction.from_dict(f.to_dict())
    assert g.to_dict() == f.to_dict()


# ---------------------------------------------------------------- composite and inversion

def test_composite_matches_pushforward(params):
    h = corpus.sec6_1_measure()
    for lam in (0.0, 0.5, math.sqrt(1 / 3), 1.7):
        assert P.composite_dual_value(h, lam, params=params) == \
            pytest.approx(P.pushforward_value(h, lam, params), abs=1e-10)


def test_composite_at_zero_is_h0(params):
    h = C.complex_gaussian(1.0)
    assert P.composite_dual_value(h, 0.0, params=params) == pytest.approx(1.0, abs=1e-12)


def test_stft_dilation(params):
    lhs, rhs = P.stft_dilation_check(C.chirp(1), None, 0.7, 0.3, -0.4, params)
    assert lhs == pytest.approx(rhs, abs=1e-14)


def test_inversion(params, rng):
    h = corpus.sec6_1_measure()
    for t in rng.uniform(-3, 3, 3):
        assert P.inversion_from_fourier(h, [t], params=params) == \
            pytest.approx(C.evaluate(h, [t], params), abs=1e-5)
    g = C.complex_gaussian(1.0)
    assert P.inversion_from_fourier(g, [0.0], params=params) == pytest.approx(1.0, abs=1e-10)


# ---------------------------------------------------------------- appendices

@pytest.mark.parametrize("x,xi,eps", [(0.3, -0.5, 0.1), (1.0, 0.7, 0.2)])
def test_kernel_identity(params, x, xi, eps):
    k = P.appendix_a_kernel(1, [1.0], x, xi, eps, params=params)
    assert k.gap < 1e-4


def test_kernel_eps_to_zero(params):
    ks = [P.appendix_a_kernel(1, [1.0], 0.3, -0.5, e, params=params) for e in (0.1, 0.02)]
    assert abs(ks[1].rhs - ks[1].limit) < abs(ks[0].rhs - ks[0].limit)
    assert abs(ks[1].rhs - ks[1].limit) < 1e-3


def test_kernel_rotation_two_dims(params):
    k = P.appendix_a_kernel(2, [0.6, 0.8], 0.3, 0.5, 0.1, params=params)
    assert k.gap < 1e-4


def test_phi_dominator_values():
    assert P.phi_dominator(2, 1.0, 2.0, 1.5) == 1.0
    assert P.phi_dominator(2, 1.0, 0.0, 3.0) == pytest.approx(0.01)


def test_phi_tail_constant():
    chk = P.phi_tail_check()
    assert chk["ok"]
    assert chk["constant"] == pytest.approx(math.sqrt(4 + math.pi**2 / 4))
    assert max(chk["ratios"].values()) <= chk["constant"]


def test_dominator_report_shape():
    rep = P.dominator_check([0.5**j for j in range(1, 30)], [1, 2, 4, 8])
    assert set(rep.max_ratio) == {1, 2, 4, 8}
    assert all(v <= rep.limit_ratio * (1 + 1e-9) for v in rep.max_ratio.values())
    assert rep.stable == (rep.growth <= 0.05)
