import cmath
import json
import math

import numpy as np
import pytest

from fresnelio import catalog as C
from fresnelio.errors import DimensionError, NotClosedForm


def test_constant_evaluates_to_one_everywhere(params):
    Y = np.array([[0.0], [3.7], [-12.5]])
    assert np.allclose(C.evaluate_many(C.one(), Y, params), 1.0)


def test_chirp_at_origin_is_its_prefactor(params):
    assert C.evaluate(C.chirp(1), [0.0], params) == pytest.approx((2j * math.pi) ** -0.5)


def test_fourier_measure_delta_two_at_pi(params):
    f = C.fourier_measure([([2.0], 1.0)])
    assert C.evaluate(f, [math.pi], params) == pytest.approx(1.0, abs=1e-14)


def test_plane_wave_scaling_flags():
    hb = C.Params(0.5)
    y = [0.8]
    scaled = C.evaluate(C.plane_wave([1.5]), y, hb)
    raw = C.evaluate(C.plane_wave([1.5], scaled=False), y, hb)
    normed = C.evaluate(C.plane_wave([1.5], normalized=True), y, hb)
    assert scaled == pytest.approx(cmath.exp(1j * 1.5 * 0.8 / 0.5))
    assert raw == pytest.approx(cmath.exp(1j * 1.5 * 0.8))
    assert normed == pytest.approx(scaled / math.sqrt(2 * math.pi * 0.5))


def test_negative_real_part_rejected():
    with pytest.raises(ValueError):
        C.complex_gaussian(-0.1 + 1j)


def test_dimension_mismatch_rejected():
    with pytest.raises(DimensionError):
        C.evaluate(C.plane_wave([1.0, 2.0]), [0.0], C.DEFAULT)
    with pytest.raises(DimensionError):
        C.complex_gaussian([1.0, 2.0], dim=3)


def test_hbar_validation():
    with pytest.raises(ValueError):
        C.Params(0.0)
    with pytest.warns(UserWarning):
        p = C.Params(2.0)
    assert not p.semiclassical


def test_tensorize_plane_wave_with_one_extends(params):
    f = C.tensorize([C.plane_wave([2.0]), C.one()])
    assert f.dim == 2
    for y in ([0.3, 5.0], [-1.1, -7.0]):
        assert C.evaluate(f, y, params) == pytest.approx(cmath.exp(2j * y[0]))


def test_tensorize_chirps_canonicalizes():
    f = C.tensorize([C.chirp(1), C.chirp(1)])
    assert f == C.chirp(1, 2)


def test_repeated_gaussian_factor_matches_diagonal(params):
    eps = 0.1
    f = C.tensorize([C.complex_gaussian(eps + 1j)] * 3)
    g = C.complex_gaussian(eps + 1j, 3)
    y = [0.2, -0.4, 1.1]
    assert C.evaluate(f, y, params) == pytest.approx(C.evaluate(g, y, params))


def test_cos_norm_radial(params):
    f = C.cos_norm(2)
    assert C.evaluate(f, [3.0, 4.0], params) == pytest.approx(math.cos(5.0))
    with pytest.raises(NotClosedForm):
        C.expand(f, 1.0)


@pytest.mark.parametrize("f", [
    C.one(2),
    C.plane_wave([0.5, -1.0], scaled=False, normalized=True),
    C.complex_gaussian([0.1 + 1j, 2.0]),
    C.chirp(-1, 2),
    C.fourier_measure([([0.3], 1.0), ([-0.7], -0.5), ([1.5], 0.2 + 0.1j)]),
    C.cos_norm(1),
    C.tensorize([C.complex_gaussian(0.3), C.plane_wave([0.4, 0.2])]),
    C.plane_wave([0.5]) + 0.3 * C.plane_wave([-1.2], scaled=False),
    C.product([C.complex_gaussian(1.0), C.plane_wave([2.0])]),
])
def test_json_round_trip(f, params):
    g = C.from_json(C.to_json(f))
    assert g == f
    Y = np.linspace(-2, 2, 5 * f.dim).reshape(5, f.dim)
    assert np.allclose(C.evaluate_many(f, Y, params), C.evaluate_many(g, Y, params))


def test_from_dict_rejects_unknown_fields():
    d = C.to_dict(C.one())
    d["extra"] = 1
    with pytest.raises(ValueError):
        C.from_dict(d)
    with pytest.raises(ValueError):
        C.from_dict({"dim": 1, "kind": "mystery", "params": {}})


def test_from_dict_checks_declared_dim():
    d = json.loads(C.to_json(C.plane_wave([1.0, 2.0])))
    d["dim"] = 3
    with pytest.raises(DimensionError):
        C.from_dict(d)


def test_sampled_has_no_closed_form(params):
    f = C.sampled(lambda Y: np.exp(-Y[:, 0] ** 2), 1)
    assert not C.has_closed_form(f)
    assert C.evaluate(f, [0.0], params) == pytest.approx(1.0)


def test_expand_matches_evaluation(params, rng):
    f = C.tensorize([C.complex_gaussian(0.3 + 0.2j), C.fourier_measure([([1.0], 2.0)])]) \
        + 0.5 * C.one(2)
    Y = rng.uniform(-3, 3, (20, 2))
    from fresnelio import terms as T
    assert np.allclose(T.values(C.expand(f, params.hbar), Y), C.evaluate_many(f, Y, params))


def test_dilate_and_as_measure(params):
    f = C.fourier_measure([([1.0], 0.5), ([-3.0], 0.25j)])
    g = C.dilate(f, 0.5)
    assert C.evaluate(g, [2.0], params) == pytest.approx(C.evaluate(f, [1.0], params))
    mu = C.as_measure(C.plane_wave([2.0], scaled=False) + C.one(), params)
    assert mu.total_variation() == pytest.approx(2.0)
    with pytest.raises(NotClosedForm):
        C.as_measure(C.complex_gaussian(1.0), params)
