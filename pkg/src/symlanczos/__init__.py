"""Lanczos quadrature for quadratic forms and stochastic trace estimation.

Symmetric quadrature rules on Jordan-Wielandt operators ``[[0, B], [B^T, 0]]``
started from one-block (partial) vectors, and the trace estimators built on
them.
"""

__version__ = "0.1.0"

from .estimators import (
    EstimatorConfig,
    EstimatorReport,
    ScalarFunction,
    estrada_index,
    hutchinson_trace,
    hutchpp_trace,
    partial_rademacher_trace,
    rademacher_vector,
    spectral_radius,
)
from .lanczos import BidiagonalMatrix, JacobiMatrix, bidiagonalize, tridiagonalize
from .linop import (
    DenseSymmetric,
    JordanWielandtOperator,
    SparseCsr,
    bipartize,
    read_matrix_market,
    write_matrix_market,
)
from .palindrome import (
    PartialVectorSpec,
    is_r_partial_absolute_palindrome,
    make_partial_vector,
    verify_sufficient_condition,
)
from .quadrature import (
    QuadratureRule,
    classify_symmetry,
    evaluate,
    golub_welsch,
    iteration_bounds,
    measure_oracle,
    quadrature_from_bidiagonal,
    riemann_stieltjes,
)

__all__ = [
    "__version__",
    "BidiagonalMatrix",
    "DenseSymmetric",
    "EstimatorConfig",
    "EstimatorReport",
    "JacobiMatrix",
    "JordanWielandtOperator",
    "PartialVectorSpec",
    "QuadratureRule",
    "ScalarFunction",
    "SparseCsr",
    "bidiagonalize",
    "bipartize",
    "classify_symmetry",
    "estrada_index",
    "evaluate",
    "golub_welsch",
    "hutchinson_trace",
    "hutchpp_trace",
    "is_r_partial_absolute_palindrome",
    "iteration_bounds",
    "make_partial_vector",
    "measure_oracle",
    "partial_rademacher_trace",
    "quadrature_from_bidiagonal",
    "rademacher_vector",
    "read_matrix_market",
    "riemann_stieltjes",
    "spectral_radius",
    "tridiagonalize",
    "verify_sufficient_condition",
    "write_matrix_market",
]
