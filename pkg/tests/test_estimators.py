import cmath

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from fresnelio import catalog as C
from fresnelio import gabor as G
from fresnelio.estimators import FresnelIntegrator, ModulationNorm, StftSampler


def test_stft_sampler_matches_closed_form(rng):
    X = rng.uniform(-2, 2, (6, 2))
    got = StftSampler(f="chirp+").fit().transform(X)
    want = G.stft_closed(C.chirp(1), G.unit_window(), X[:, :1], X[:, 1:])
    assert np.allclose(got, want)


def test_stft_sampler_validates():
    est = StftSampler()
    with pytest.raises(NotFittedError):
        est.transform(np.zeros((2, 2)))
    est.fit()
    with pytest.raises(ValueError):
        est.transform(np.zeros((2, 3)))


def test_params_round_trip():
    est = FresnelIntegrator(method="direct", mollifier="sech", hbar=0.5)
    assert est.get_params() == {"method": "direct", "mollifier": "sech", "hbar": 0.5}
    twin = clone(est)
    assert twin.get_params() == est.get_params()
    est.set_params(method="parseval")
    assert est.method == "parseval"


def test_fresnel_integrator_routes():
    fs = ["constant1", C.fourier_measure([([2.0], 1.0)])]
    want = np.array([1.0, cmath.exp(-2j)])
    for method in ("parseval", "phase_space", "direct"):
        got = FresnelIntegrator(method=method).fit().predict(fs)
        assert np.allclose(got, want, atol=1e-6), method
    with pytest.raises(ValueError):
        FresnelIntegrator(method="guess").fit()


def test_modulation_norm_column():
    out = ModulationNorm(q=[1.0]).fit_transform(["constant1", C.plane_wave([2.0])])
    assert out.shape == (2, 1)
    assert np.allclose(out, 1.0)
