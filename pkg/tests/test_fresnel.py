import cmath
import math

import numpy as np
import pytest

from fresnelio import catalog as C
from fresnelio import fresnel as F
from fresnelio import gabor as G
from fresnelio.errors import Divergent
from fresnelio.tails import GeometricTail, PowerTail


def test_normalization_all_routes(params):
    assert F.fresnel_direct(C.one(), params=params).value == pytest.approx(1.0, abs=1e-9)
    assert F.fresnel_phase_space(C.one(), params=params).value == pytest.approx(1.0, abs=1e-12)
    assert F.fresnel_parseval(C.one(), params).value == 1.0


def test_delta_two(params):
    f = C.fourier_measure([([2.0], 1.0)])
    expected = cmath.exp(-2j)
    assert F.fresnel_direct(f, params=params).value == pytest.approx(expected, abs=1e-8)
    assert F.fresnel_direct(f, F.RegularizerSchedule("sech"), params=params).value == \
        pytest.approx(expected, abs=1e-6)
    assert F.fresnel_parseval(f, params).value == pytest.approx(expected, abs=1e-15)


def test_witness_gaussian_value(params):
    v = F.fresnel_direct(C.complex_gaussian(0.01 + 1j), params=params).value
    assert v == pytest.approx((0.01j) ** -0.5, rel=1e-9)
    assert abs(v) == pytest.approx(10.0, rel=1e-9)


def test_two_atom_measure_phase_space(params):
    f = C.fourier_measure([([1.0], 0.5), ([-3.0], 0.25j)])
    expected = 0.5 * cmath.exp(-0.5j) + 0.25j * cmath.exp(-4.5j)
    assert F.fresnel_phase_space(f, params=params).value == pytest.approx(expected, abs=1e-12)


def test_cos_phase_space_agrees_with_direct(params):
    f = C.cos_norm(1)
    a = F.fresnel_phase_space(f, params=params).value
    b = F.fresnel_direct(f, params=params).value
    assert abs(a - b) < 1e-3 * (1 + abs(a))


def test_parseval_measure_cases():
    p = C.Params(1.0)
    assert F.fresnel_parseval_measure(C.DiscreteMeasure(((0.0,),), (1.0,)), p) == 1.0
    mu = C.DiscreteMeasure(((0.3, -0.2, 1.0),), (2.0,), 3)
    want = 2.0 * np.prod([cmath.exp(-0.5j * v * v) for v in (0.3, -0.2, 1.0)])
    assert F.fresnel_parseval_measure(mu, p) == pytest.approx(want, abs=1e-14)


def test_phase_space_with_chirped_gamma():
    p = C.Params(0.5)
    val = F.fresnel_phase_space(C.one(), G.standard_window([1.0], 0.5),
                                G.chirped_window(0.7, 1, 0.5), params=p).value
    assert val == pytest.approx(1.0, abs=1e-10)


def test_phase_space_rejects_chirp(params):
    with pytest.raises(Divergent):
        F.fresnel_phase_space(C.chirp(1), params=params)


def test_wiener_amalgam_plane_wave():
    hb, k = 0.5, 1.3
    p = C.Params(hb)
    v = F.fresnel_W_infty_1(C.plane_wave([k]), params=p).value
    assert v == pytest.approx(1j ** -0.5 * cmath.exp(1j * k * k / (2 * hb)), abs=1e-10)


def test_wiener_amalgam_gaussians(params):
    g = C.complex_gaussian(1.0)
    assert F.fresnel_W_infty_1(g, params=params).value == \
        pytest.approx(F.fresnel_phase_space(g, params=params).value, abs=1e-10)
    z = 1 + 1j
    want = z ** -0.5 * F.fresnel_parseval(C.complex_gaussian(1 / z), params).value
    assert F.fresnel_W_infty_1(C.complex_gaussian(z), params=params).value == \
        pytest.approx(want, abs=1e-10)


def test_sampled_function_grid_route(params):
    f = C.sampled(lambda Y: np.exp(-0.5 * Y[:, 0] ** 2), 1)
    v = F.fresnel_direct(f, params=params).value
    assert v == pytest.approx((1 + 1j) ** -0.5, abs=1e-6)


def test_custom_mollifier_profile(params):
    sched = F.RegularizerSchedule(C.complex_gaussian(2.0))
    v = F.fresnel_direct(C.one(), sched, params=params).value
    assert v == pytest.approx(1.0, abs=1e-8)


def test_schedule_validation():
    with pytest.raises(ValueError):
        F.RegularizerSchedule("gaussian", (1.0, 1.0, 0.5))
    with pytest.raises(ValueError):
        F.RegularizerSchedule("gaussian", (1.0, -0.5))
    with pytest.raises(ValueError):
        F.fresnel_direct(C.one(), F.RegularizerSchedule("triangle"))


def test_fresnel_all_keys(params):
    out = F.fresnel_all(C.one(), params)
    assert set(out) == {"direct_eps", "phase_space", "parseval_measure"}


def test_radial_cos_in_two_dimensions():
    # no atomic representation in d >= 2, so compare the two mollifiers
    a = F.fresnel_direct(C.cos_norm(2)).value
    b = F.fresnel_direct(C.cos_norm(2), F.RegularizerSchedule("sech")).value
    assert abs(a - b) < 1e-3 * (1 + abs(a))


def test_op_norm_values():
    assert F.op_norm_Ln([1.0]) == pytest.approx(2**0.25, rel=1e-15)
    assert F.op_norm_Ln([0.5, 0.25]) == pytest.approx((1.25 * 1.0625) ** 0.25, rel=1e-15)
    assert F.op_norm_Ln([1e-9] * 5) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(ValueError):
        F.op_norm_Ln([0.0])


def test_witnesses():
    up, lo = F.op_norm_witnesses([1.0], 1e-8, 1e-4)
    assert up == pytest.approx(2**0.25, rel=1e-7)
    assert abs(lo / 2**0.25 - 1) < 5e-3
    q = [0.1, 0.2, 0.3]
    up, lo = F.op_norm_witnesses(q, 1e-4, 1e-4)
    assert up - lo < 1e-2
    assert lo <= F.op_norm_Ln(q) <= up


@pytest.mark.parametrize("q", [[1.0], [0.5, 0.25]])
def test_witness_engines_match_closed_forms(params, q):
    up, lo = F.op_norm_witnesses(q, 0.1, 0.05, params)
    assert F.witness_upper_engine(q, 0.1, params) == pytest.approx(up, rel=1e-9)
    assert F.witness_lower_engine(q, 0.05, params) == pytest.approx(lo, rel=1e-9)


def test_uniform_bound_geometric():
    bc = F.uniform_bound_check(lambda j: 2.0**-j, 64, GeometricTail(0.5, 1))
    ref = math.exp(0.25 * math.fsum(math.log1p(4.0**-j) for j in range(1, 200)))
    assert bc.convergent
    assert abs(bc.sup_estimate - ref) < 1e-10


def test_uniform_bound_constant_diverges():
    bc = F.uniform_bound_check(lambda j: 1.0, 40, None)
    assert not bc.convergent
    assert bc.partial == pytest.approx(2 ** (40 / 4), rel=1e-12)


def test_uniform_bound_harmonic():
    bc = F.uniform_bound_check(lambda j: 1.0 / j, 200, PowerTail(1.0, 1.0))
    assert bc.convergent
    assert bc.sup_estimate <= math.exp(0.25 * math.pi**2 / 6) * (1 + 1e-12)


def test_uniform_bound_rejects_violated_certificate():
    bc = F.uniform_bound_check(lambda j: 1.0, 10, GeometricTail(0.5, 1))
    assert not bc.convergent


def test_bounded_by_operator_norm(fresnel_corpus, params):
    q = [0.7]
    g = G.standard_window(q)
    for name, f in fresnel_corpus.items():
        val = F.fresnel_phase_space(f, params=params).value
        nrm = G.norm_M_infty_1_estimate(f, g, params=params)
        assert abs(val) <= F.op_norm_Ln(q) * nrm.upper * (1 + 1e-9), name
