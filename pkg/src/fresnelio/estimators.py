"""scikit-learn style wrappers around the numerical core.

Only the array-shaped parts fit the estimator mould: STFT sampling maps a
matrix of phase-space points to values, and the functionals map a list of
functions to a vector.  ``fit`` validates hyperparameters and records the
dimension; nothing is learned from data.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import catalog as C
from . import corpus
from . import fresnel as F
from . import gabor as G


def _functions(X):
    if isinstance(X, (str, dict, C.FunctionObject)):
        X = [X]
    return [corpus.function_from_spec(x) for x in X]


def _window(q, dim, hbar):
    if q is None:
        return G.unit_window(dim, hbar)
    q = np.atleast_1d(np.asarray(q, dtype=float))
    return G.standard_window(np.repeat(q, dim) if len(q) == 1 else q, hbar)


class StftSampler(TransformerMixin, BaseEstimator):
    """Rows (x_1..x_d, xi_1..xi_d) -> V_g f(x, xi) for a fixed function ``f``."""

    def __init__(self, f="cg1", q=None, hbar=1.0):
        self.f = f
        self.q = q
        self.hbar = hbar

    def fit(self, X=None, y=None):
        self.function_ = corpus.function_from_spec(self.f)
        self.params_ = C.Params(self.hbar)
        self.window_ = _window(self.q, self.function_.dim, self.hbar)
        self.n_features_in_ = 2 * self.function_.dim
        if X is not None:
            self._check(X)
        return self

    def _check(self, X):
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} columns (x then xi), "
                             f"got {X.shape[1]}")
        return X

    def transform(self, X):
        check_is_fitted(self, "function_")
        X = self._check(X)
        d = self.function_.dim
        return np.atleast_1d(G.stft_closed(self.function_, self.window_, X[:, :d], X[:, d:],
                                           self.params_))


class ModulationNorm(TransformerMixin, BaseEstimator):
    """List of functions -> column of Sjostrand-class norms (lower bounds on grid paths)."""

    def __init__(self, q=None, hbar=1.0):
        self.q = q
        self.hbar = hbar

    def fit(self, X=None, y=None):
        self.params_ = C.Params(self.hbar)
        return self

    def transform(self, X):
        check_is_fitted(self, "params_")
        out = [G.norm_M_infty_1_estimate(f, _window(self.q, f.dim, self.hbar),
                                         params=self.params_).value
               for f in _functions(X)]
        return np.asarray(out, dtype=float).reshape(-1, 1)


class FresnelIntegrator(BaseEstimator):
    """Fresnel integral of each input function by one route.

    ``method`` is "parseval" (exact, closed-form inputs), "phase_space" or
    "direct" (mollified quadrature with ``mollifier``).
    """

    _METHODS = ("parseval", "phase_space", "direct")

    def __init__(self, method="parseval", mollifier="gaussian", hbar=1.0):
        self.method = method
        self.mollifier = mollifier
        self.hbar = hbar

    def fit(self, X=None, y=None):
        if self.method not in self._METHODS:
            raise ValueError(f"method must be one of {self._METHODS}, got {self.method!r}")
        self.params_ = C.Params(self.hbar)
        self.schedule_ = F.RegularizerSchedule(self.mollifier)
        return self

    def _one(self, f):
        if self.method == "parseval":
            return F.fresnel_parseval(f, self.params_).value
        if self.method == "phase_space":
            return F.fresnel_phase_space(f, params=self.params_).value
        return F.fresnel_direct(f, self.schedule_, params=self.params_).value

    def predict(self, X):
        check_is_fitted(self, "params_")
        return np.asarray([self._one(f) for f in _functions(X)], dtype=complex)
