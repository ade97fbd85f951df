"""Dense complex linear-algebra kernels.

Thin, deterministic wrappers around LAPACK (through numpy) with the
conventions every other module relies on: descending orderings, phase-fixed
eigenvectors and a single relative rank tolerance.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ._config import get_config
from .exceptions import InvalidInput


class SVDResult(NamedTuple):
    U: np.ndarray
    sigma: np.ndarray
    Vh: np.ndarray

    def rank(self, tol: float | None = None) -> int:
        return rank_from_singular_values(self.sigma, tol)


class EigResult(NamedTuple):
    values: np.ndarray
    vectors: np.ndarray


def _as_finite_matrix(M) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2:
        raise InvalidInput(f"expected a matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvalidInput("matrix has non-finite entries")
    return M


def rank_from_singular_values(sigma, tol: float | None = None) -> int:
    """Count singular values above ``tol * sigma_max``."""
    if tol is None:
        tol = get_config()["tol_rank"]
    sigma = np.asarray(sigma, dtype=float)
    if sigma.size == 0 or sigma[0] <= 0:
        return 0
    return int(np.count_nonzero(sigma > tol * sigma.max()))


def numerical_rank(M, tol: float | None = None) -> int:
    M = _as_finite_matrix(M)
    if M.size == 0:
        return 0
    return rank_from_singular_values(np.linalg.svd(M, compute_uv=False), tol)


def svd(M) -> SVDResult:
    """Full SVD with singular values sorted in descending order."""
    M = _as_finite_matrix(M)
    U, s, Vh = np.linalg.svd(M, full_matrices=True)
    return SVDResult(U, s, Vh)


def fix_phase(v: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Scale ``v`` to unit norm with its first non-negligible entry real positive."""
    v = np.asarray(v, dtype=complex)
    norm = np.linalg.norm(v)
    if norm == 0:
        return v
    v = v / norm
    big = np.flatnonzero(np.abs(v) > tol)
    if big.size:
        z = v[big[0]]
        v = v * (abs(z) / z)
    return v


def eig(M) -> EigResult:
    """Eigen-decomposition ordered by descending modulus.

    Ties in modulus are broken by descending real part, then by descending
    imaginary part, so the ordering is reproducible.
    """
    M = _as_finite_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise InvalidInput(f"eig needs a square matrix, got {M.shape}")
    w, V = np.linalg.eig(M)
    order = np.lexsort((-np.round(w.imag, 12), -np.round(w.real, 12), -np.round(np.abs(w), 12)))
    w = w[order]
    V = V[:, order]
    V = np.column_stack([fix_phase(V[:, k]) for k in range(V.shape[1])]) if V.size else V
    return EigResult(w, V)


def eigvals_by_modulus(M) -> np.ndarray:
    M = _as_finite_matrix(M)
    w = np.linalg.eigvals(M)
    return w[np.argsort(-np.abs(w), kind="stable")]


def orthonormal_basis(vectors, tol: float | None = None) -> np.ndarray:
    """Orthonormal basis (as columns) for the span of ``vectors``.

    ``vectors`` is either a sequence of 1-D arrays or a 2-D array whose
    columns are the vectors. The result has ``numerical_rank`` columns.
    """
    if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
        M = vectors.astype(complex)
    else:
        vectors = list(vectors)
        if not vectors:
            return np.zeros((0, 0), dtype=complex)
        dims = {np.asarray(v).shape for v in vectors}
        if len(dims) != 1:
            raise InvalidInput("vectors must share one dimension")
        M = np.column_stack([np.asarray(v, dtype=complex) for v in vectors])
    M = _as_finite_matrix(M)
    if M.shape[1] == 0:
        return np.zeros((M.shape[0], 0), dtype=complex)
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    r = rank_from_singular_values(s, tol)
    return U[:, :r]


def null_space(M, tol: float | None = None) -> np.ndarray:
    """Orthonormal basis (columns) of the numerical kernel of ``M``."""
    M = _as_finite_matrix(M)
    n = M.shape[1]
    if M.shape[0] == 0:
        return np.eye(n, dtype=complex)
    _, s, Vh = np.linalg.svd(M, full_matrices=True)
    r = rank_from_singular_values(s, tol)
    return Vh[r:].conj().T


def subspace_cosine(basis_u, basis_w) -> float:
    """Cosine of the minimal angle between two subspaces.

    Both arguments are matrices with orthonormal columns. The value is the
    largest singular value of ``U^H W``, clipped to ``[0, 1]``.
    """
    U = np.asarray(basis_u, dtype=complex)
    W = np.asarray(basis_w, dtype=complex)
    if U.ndim != 2 or W.ndim != 2:
        raise InvalidInput("bases must be 2-D with vectors as columns")
    if U.shape[1] == 0 or W.shape[1] == 0:
        return 0.0
    if U.shape[0] != W.shape[0]:
        raise InvalidInput(f"ambient dimensions differ: {U.shape[0]} vs {W.shape[0]}")
    s = np.linalg.svd(U.conj().T @ W, compute_uv=False)
    return float(min(1.0, max(0.0, s[0])))


def spectral_norm(M) -> float:
    M = np.asarray(M, dtype=complex)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))
