"""Scikit-learn style wrappers around the functional estimators.

Hyperparameters live in ``__init__`` and ``get_params``/``set_params`` come
from :class:`sklearn.base.BaseEstimator`, so the classes work with
``clone`` and parameter grids. ``fit`` takes the matrix; fitted attributes
end in an underscore.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .estimators import (
    EstimatorConfig,
    ScalarFunction,
    hutchinson_trace,
    hutchpp_trace,
    partial_rademacher_trace,
    quadratic_forms,
    spectral_radius,
)
from .validation import check_count, check_finite_scalar, check_operator, check_vectors

__all__ = ["SLQTraceEstimator", "EstradaIndex", "LanczosQuadratureForm"]

_FAMILY_ALIASES = {
    "full": "full_rademacher",
    "upper": "upper_partial",
    "lower": "lower_partial",
}


def _family(name):
    return _FAMILY_ALIASES.get(name, name)


def _estimate(op, function, scale, n_samples, n_steps, vector_family, method, reorth, random_state):
    N = check_count(n_samples, "n_samples")
    m = check_count(n_steps, "n_steps")
    seed = check_count(random_state, "random_state", minimum=0)
    f = ScalarFunction(function, check_finite_scalar(scale, "scale"))
    cfg = EstimatorConfig(N, m, seed, _family(vector_family), f, reorth, method)
    if method == "hutchpp":
        return hutchpp_trace(op, N, m, seed, f, reorth)
    if cfg.vector_family == "full_rademacher":
        return hutchinson_trace(op, cfg)
    return partial_rademacher_trace(op, cfg)


class SLQTraceEstimator(BaseEstimator):
    """Stochastic Lanczos quadrature estimate of ``tr f(scale * A)``.

    Parameters
    ----------
    function : {"exp", "identity", "square"}
    scale : float
        Multiplies the argument of ``function``.
    n_samples : int
        Random vectors (or the query budget for ``method="hutchpp"``).
    n_steps : int
        Lanczos steps per vector.
    vector_family : {"full", "upper", "lower"}
        Partial families need a Jordan-Wielandt input: either an operator or a
        rectangular block ``B`` passed with ``jordan_wielandt=True``.
    method : {"slq", "hutchpp"}
    reorth : {None, "auto", "none", "full"}
    jordan_wielandt : bool
        Read ``X`` as the off-diagonal block ``B``.
    random_state : int
    """

    def __init__(self, function="exp", scale=1.0, n_samples=100, n_steps=30, vector_family="full",
                 method="slq", reorth=None, jordan_wielandt=False, random_state=0):
        self.function = function
        self.scale = scale
        self.n_samples = n_samples
        self.n_steps = n_steps
        self.vector_family = vector_family
        self.method = method
        self.reorth = reorth
        self.jordan_wielandt = jordan_wielandt
        self.random_state = random_state

    def fit(self, X, y=None):
        op = check_operator(X, jordan_wielandt=self.jordan_wielandt)
        report = _estimate(op, self.function, self.scale, self.n_samples, self.n_steps,
                           self.vector_family, self.method, self.reorth, self.random_state)
        self.report_ = report
        self.trace_ = report.estimate
        self.std_error_ = report.std_error
        self.n_features_in_ = op.dimension
        return self

    def predict(self, X=None):
        """The fitted trace estimate (``X`` is ignored)."""
        check_is_fitted(self, "trace_")
        return self.trace_


class EstradaIndex(BaseEstimator):
    """``tr exp(beta * A)``.

    When ``beta_over_lmax`` is set it overrides ``beta`` with
    ``beta_over_lmax / lambda_max``, the spectral radius coming from power
    iteration. Remaining parameters are as in :class:`SLQTraceEstimator`.
    """

    def __init__(self, beta=1.0, beta_over_lmax=None, n_samples=100, n_steps=30, vector_family="full",
                 method="slq", reorth=None, jordan_wielandt=False, random_state=0):
        self.beta = beta
        self.beta_over_lmax = beta_over_lmax
        self.n_samples = n_samples
        self.n_steps = n_steps
        self.vector_family = vector_family
        self.method = method
        self.reorth = reorth
        self.jordan_wielandt = jordan_wielandt
        self.random_state = random_state

    def fit(self, X, y=None):
        op = check_operator(X, jordan_wielandt=self.jordan_wielandt)
        beta = self.beta
        if self.beta_over_lmax is not None:
            lmax = spectral_radius(op)
            beta = check_finite_scalar(self.beta_over_lmax, "beta_over_lmax") / lmax if lmax > 0 else 0.0
        self.beta_ = check_finite_scalar(beta, "beta")
        report = _estimate(op, "exp", self.beta_, self.n_samples, self.n_steps, self.vector_family,
                           self.method, self.reorth, self.random_state)
        self.report_ = report
        self.index_ = report.estimate
        self.std_error_ = report.std_error
        self.n_features_in_ = op.dimension
        return self

    def predict(self, X=None):
        check_is_fitted(self, "index_")
        return self.index_


class LanczosQuadratureForm(TransformerMixin, BaseEstimator):
    """Lanczos-quadrature approximation of ``u^T f(A) u`` for each row ``u`` of the input.

    ``fit`` stores the operator; ``transform`` returns an ``(n_vectors, 1)``
    array.
    """

    def __init__(self, function="exp", scale=1.0, n_steps=30, reorth=None):
        self.function = function
        self.scale = scale
        self.n_steps = n_steps
        self.reorth = reorth

    def fit(self, X, y=None):
        self.operator_ = check_operator(X)
        self.n_features_in_ = self.operator_.dimension
        return self

    def transform(self, U):
        check_is_fitted(self, "operator_")
        Z = check_vectors(U, self.operator_.dimension)
        f = ScalarFunction(self.function, check_finite_scalar(self.scale, "scale"))
        m = check_count(self.n_steps, "n_steps")
        values, _ = quadratic_forms(self.operator_, Z, f, m, self.reorth)
        return values[:, None]
