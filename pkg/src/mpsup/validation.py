"""Input validation helpers, mirroring ``sklearn.utils.validation``."""

from __future__ import annotations

import numpy as np

from ._config import get_config
from .exceptions import InvalidInput, TooLarge


def check_site_tensor(A, *, square: bool = False, name: str = "tensor") -> np.ndarray:
    """Validate an MPS site tensor and return it as a complex ``(d, Dl, Dr)`` array."""
    A = np.asarray(A)
    if A.ndim != 3:
        raise InvalidInput(f"{name} must have shape (d, Dl, Dr), got {A.shape}")
    if min(A.shape) < 1:
        raise InvalidInput(f"{name} has an empty dimension: {A.shape}")
    A = A.astype(complex, copy=False)
    if not np.all(np.isfinite(A)):
        raise InvalidInput(f"{name} has non-finite entries")
    if square and A.shape[1] != A.shape[2]:
        raise InvalidInput(f"{name} needs square bonds, got {A.shape[1]}x{A.shape[2]}")
    return A


def check_square_matrix(X, *, name: str = "matrix") -> np.ndarray:
    X = np.asarray(X, dtype=complex)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise InvalidInput(f"{name} must be square, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise InvalidInput(f"{name} has non-finite entries")
    return X


def check_amplitude_count(d: int, N: int, cap: int | None = None) -> int:
    """Return ``d**N`` or raise :class:`TooLarge` when it exceeds the cap."""
    if cap is None:
        cap = get_config()["amp_cap"]
    if d < 1 or N < 0:
        raise InvalidInput(f"invalid sizes d={d}, N={N}")
    size = d**N
    if size > cap:
        raise TooLarge(f"{d}^{N} = {size} amplitudes exceeds cap {cap}")
    return size


def check_positive_int(value, name: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or int(value) != value or value < minimum:
        raise InvalidInput(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def check_random_state(seed) -> np.random.Generator:
    """Turn ``None``, an int or a Generator into a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
