"""Rough path numerics for Gaussian drivers.

Truncated tensor algebra and signatures, the shuffle algebra of words,
2D Young integration and ρ-variation of covariances, step-N Euler and
Wong-Zakai solvers, and Monte Carlo convergence-rate experiments.
"""
from .errors import ContractError, DivergenceError, NumericalError, SingularElementError
from .gaussian import CovarianceModel, sample_array, sample_paths
from .signatures import SampledPath, lyons_lift, path_signature, word_integral
from .tensor_algebra import (
    TensorElement,
    homogeneous_norm,
    rho_pvar_distance,
    tensor_exp,
    tensor_inverse,
    tensor_log,
    tensor_mul,
)
from .words import WordPolynomial, generating_set, is_lyndon, lyndon_factorization, shuffle

__all__ = [
    "ContractError",
    "DivergenceError",
    "NumericalError",
    "SingularElementError",
    "CovarianceModel",
    "sample_array",
    "sample_paths",
    "SampledPath",
    "lyons_lift",
    "path_signature",
    "word_integral",
    "TensorElement",
    "homogeneous_norm",
    "rho_pvar_distance",
    "tensor_exp",
    "tensor_inverse",
    "tensor_log",
    "tensor_mul",
    "WordPolynomial",
    "generating_set",
    "is_lyndon",
    "lyndon_factorization",
    "shuffle",
]

__version__ = "0.1.0"
