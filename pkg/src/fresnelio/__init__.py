"""Fresnel integrals on R^d and R^infinity through phase-space (Gabor) representations."""

from .catalog import (DEFAULT, Params, affine_combo, chirp, complex_gaussian, constant,
                      cos_norm, fourier_measure, from_dict, from_json, one, plane_wave,
                      product, sampled, tensorize, to_dict, to_json)
from .errors import (CauchyCheckFailed, ConfigError, DimensionError, Divergent,
                     FresnelioError, NonConvergent, NotClosedForm, ResolutionError)
from .fresnel import (RegularizerSchedule, fresnel_all, fresnel_direct, fresnel_parseval,
                      fresnel_phase_space, fresnel_W_infty_1, op_norm_Ln, op_norm_witnesses,
                      uniform_bound_check)
from .gabor import (GaussianWindow, chirped_window, norm_M_1_infty, norm_M_infty_1,
                    standard_window, stft_closed, stft_numeric, unit_window)
from .projective import (L_min, L_prime, L_topological, WindowSequence, cauchy_distance,
                         cylinder, default_windows, extend, norm_infinite, restrict)
from .quadrature import GridSpec
from .schrodinger import PropagatorSpec, evolve_free, sharp_norm_formula, sharp_norm_witness

__version__ = "0.1.0"

__all__ = [
    "DEFAULT", "Params", "affine_combo", "chirp", "complex_gaussian", "constant", "cos_norm",
    "fourier_measure", "from_dict", "from_json", "one", "plane_wave", "product", "sampled",
    "tensorize", "to_dict", "to_json",
    "CauchyCheckFailed", "ConfigError", "DimensionError", "Divergent", "FresnelioError",
    "NonConvergent", "NotClosedForm", "ResolutionError",
    "RegularizerSchedule", "fresnel_all", "fresnel_direct", "fresnel_parseval",
    "fresnel_phase_space", "fresnel_W_infty_1", "op_norm_Ln", "op_norm_witnesses",
    "uniform_bound_check",
    "GaussianWindow", "chirped_window", "norm_M_1_infty", "norm_M_infty_1", "standard_window",
    "stft_closed", "stft_numeric", "unit_window",
    "L_min", "L_prime", "L_topological", "WindowSequence", "cauchy_distance", "cylinder",
    "default_windows", "extend", "norm_infinite", "restrict",
    "GridSpec", "PropagatorSpec", "evolve_free", "sharp_norm_formula", "sharp_norm_witness",
    "__version__",
]
