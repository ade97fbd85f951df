"""Estimator-style wrappers around the structural and certification routines."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .gallery import cp_rank_probe
from .mps import StateVector
from .permlab import certify_mps_up
from .structure import canonical_form
from .validation import check_site_tensor


class CanonicalFormAnalyzer(BaseEstimator):
    """Fit the canonical form of a TI tensor; ``transform`` gives block weights per ``N``."""

    def __init__(self, N=None, seed=0, tol=None):
        self.N = N
        self.seed = seed
        self.tol = tol

    def fit(self, X, y=None):
        A = check_site_tensor(X, square=True)
        self.canonical_form_ = canonical_form(A, self.N, tol=self.tol, seed=self.seed)
        self.period_ = self.canonical_form_.p
        self.n_blocks_ = self.canonical_form_.b
        self.block_dims_ = self.canonical_form_.dims
        return self

    def transform(self, Ns):
        """Rows of ``alpha_j(N)`` for each requested ``N``."""
        check_is_fitted(self, "canonical_form_")
        return np.array([self.canonical_form_.weights(int(N)) for N in np.atleast_1d(Ns)])

    def predict(self, Ns):
        """Normalization ``c_N`` for each requested ``N``."""
        check_is_fitted(self, "canonical_form_")
        return np.array([self.canonical_form_.normalization(int(N)) for N in np.atleast_1d(Ns)])


class SchmidtCertifier(BaseEstimator):
    """MPS-up certificate at bond dimension ``D`` and tolerance ``eps``."""

    def __init__(self, D=1, eps=1e-10, perm_samples=50, seed=0):
        self.D = D
        self.eps = eps
        self.perm_samples = perm_samples
        self.seed = seed

    def _report(self, psi: StateVector):
        return certify_mps_up(psi, self.D, samples=self.perm_samples, seed=self.seed)

    def fit(self, X: StateVector, y=None):
        self.report_ = self._report(X)
        self.eps_star_ = self.report_.eps_star
        return self

    def predict(self, X: StateVector) -> bool:
        return self._report(X).passes(self.eps)

    def score(self, X: StateVector, y=None) -> float:
        return -self._report(X).eps_star


class CPRankProbe(BaseEstimator):
    """ALS evidence on whether a state has tensor rank at most ``r``."""

    def __init__(self, r=1, restarts=10, seed=0, tol=1e-8):
        self.r = r
        self.restarts = restarts
        self.seed = seed
        self.tol = tol

    def fit(self, X: StateVector, y=None):
        res = cp_rank_probe(X, self.r, self.restarts, self.seed)
        self.best_residual_ = res.best_residual
        self.factors_ = res.factors
        return self

    def predict(self, X: StateVector = None) -> bool:
        check_is_fitted(self, "best_residual_")
        return self.best_residual_ <= self.tol


__all__ = ["CPRankProbe", "CanonicalFormAnalyzer", "SchmidtCertifier"]
