"""Scikit-learn estimator facade over the analysis-penalized solver.

The forward matrix plays the role of the design matrix, the recovered
signal that of the coefficient vector, so the solver composes with
pipelines, grid search and cloning like any linear model.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted, check_X_y, check_array

from . import dictionaries, operators
from .solvers import SolveConfig, solve_lasso


class AnalysisLasso(BaseEstimator, RegressorMixin):
    """Least squares with an analysis-sparsity penalty on the coefficients.

    Minimizes ``0.5 ||y - X w||^2 + alpha ||D* w||_1`` where the dictionary
    D is resolved against the number of features at fit time.

    Parameters
    ----------
    dictionary : str or Dictionary, default "tv"
        Spec string (``tv``, ``id``, ``haar:jmax=J,tau=T``, ``fused:eps=E``)
        or a prebuilt dictionary matching the feature count.
    alpha : float, default 1.0
        Penalty weight.
    """

    def __init__(self, dictionary="tv", alpha=1.0, max_iters=100_000,
                 tol=1e-10, theta=1.0, step_ratio=1.0):
        self.dictionary = dictionary
        self.alpha = alpha
        self.max_iters = max_iters
        self.tol = tol
        self.theta = theta
        self.step_ratio = step_ratio

    def _resolve_dictionary(self, n_features):
        if isinstance(self.dictionary, dictionaries.Dictionary):
            if self.dictionary.n != n_features:
                raise ValueError("dictionary signal length does not match X")
            return self.dictionary
        return dictionaries.from_spec(self.dictionary, n_features)

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        dic = self._resolve_dictionary(X.shape[1])
        cfg = SolveConfig(lam=float(self.alpha), max_iters=int(self.max_iters),
                          tol=float(self.tol), theta=float(self.theta),
                          step_ratio=float(self.step_ratio))
        report = solve_lasso(operators.dense(X, label="design"), dic, y, cfg)
        self.coef_ = report.solution
        self.n_iter_ = report.iterations
        self.converged_ = report.converged
        self.report_ = report
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X)
        return X @ self.coef_
