"""Isotropic fractional random fields on the unit ball.

Covariance kernels and their angular reduction, Mercer eigensystems of
the radial kernels, three samplers (truncated eigenfunction synthesis,
dense-covariance factorization, frequency-domain band synthesis), the
reproducing-kernel norm machinery, and increment-cloud experiments for
iterated-logarithm and modulus-of-continuity scalings.

Numeric core: compiled kernels when the extension built, a pure fallback
otherwise (FRACFIELD_FORCE_PURE=1 forces the fallback); both expose the
same functions and agree to tight tolerances.
"""
from . import backend, config, field, kernel, limits, mercer, report, \
    rkhs, specfun
from .config import RunConfig, load_config, parse_config
from .errors import (ConfigError, CoverageError, DomainError,
                     FracfieldError, IllConditionedModeError, IllPosedError,
                     IntegrityError, NumericError, ResolutionError)
from .field import (EmpiricalCovariance, FieldSample, FreqGrid, RngStream,
                    c4_constant, cholesky_ensemble, cholesky_synthesize,
                    empirical_covariance, kl_ensemble, kl_synthesize,
                    kl_theoretical_covariance, load_field_csv,
                    save_field_csv, spectral_band_variance,
                    spectral_ensemble, spectral_synthesize,
                    variance_quadrature)
from .kernel import (ModelParams, RadialKernelSpec, covariance,
                     covariance_reduced, kernel_closed_form,
                     kernel_quadrature, kink_profile, radial_kernel,
                     radial_kernel_matrix)
from .limits import (IncrementCloud, KlFieldSource, build_cloud,
                     cloud_stats, modulus_statistic, theorem_conditions)
from .mercer import (EigenSystem, eigen_convergence, eigenfunction_values,
                     load_eigensystem, mercer_decompose, nystrom_extend,
                     operator_trace, reconstruction_error,
                     save_eigensystem)
from .rkhs import (RkhsFunction, bernstein_membership, fourier_coeffs,
                   inner_product, project_to_ball, read_coeff_csv,
                   representer, strassen_norm, write_coeff_csv)

__version__ = "0.1.0"

__all__ = [
    "backend", "config", "field", "kernel", "limits", "mercer", "report",
    "rkhs", "specfun",
    "RunConfig", "load_config", "parse_config",
    "FracfieldError", "DomainError", "ConfigError", "NumericError",
    "IntegrityError", "IllPosedError", "IllConditionedModeError",
    "CoverageError", "ResolutionError",
    "ModelParams", "RadialKernelSpec", "covariance", "covariance_reduced",
    "kernel_closed_form", "kernel_quadrature", "kink_profile",
    "radial_kernel", "radial_kernel_matrix",
    "EigenSystem", "mercer_decompose", "eigenfunction_values",
    "nystrom_extend", "reconstruction_error", "operator_trace",
    "eigen_convergence", "save_eigensystem", "load_eigensystem",
    "FieldSample", "FreqGrid", "RngStream", "EmpiricalCovariance",
    "kl_synthesize", "kl_ensemble", "kl_theoretical_covariance",
    "cholesky_synthesize", "cholesky_ensemble", "spectral_synthesize",
    "spectral_ensemble", "spectral_band_variance", "c4_constant",
    "variance_quadrature", "empirical_covariance", "save_field_csv",
    "load_field_csv",
    "RkhsFunction", "strassen_norm", "inner_product", "representer",
    "project_to_ball", "fourier_coeffs", "bernstein_membership",
    "write_coeff_csv", "read_coeff_csv",
    "IncrementCloud", "KlFieldSource", "build_cloud", "cloud_stats",
    "modulus_statistic", "theorem_conditions",
    "__version__",
]
