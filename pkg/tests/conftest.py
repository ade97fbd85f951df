import numpy as np
import pytest

from mpsup.mps import transfer_matrix


def random_tensor(rng, d, D, Dr=None):
    Dr = D if Dr is None else Dr
    return rng.normal(size=(d, D, Dr)) + 1j * rng.normal(size=(d, D, Dr))


def unit_radius(A):
    """Rescale so the transfer matrix has spectral radius one."""
    r = np.max(np.abs(np.linalg.eigvals(transfer_matrix(A))))
    return A / np.sqrt(r)


def direct_sum(parts):
    d = parts[0].shape[0]
    D = sum(p.shape[1] for p in parts)
    out = np.zeros((d, D, D), dtype=complex)
    k = 0
    for p in parts:
        m = p.shape[1]
        out[:, k : k + m, k : k + m] = p
        k += m
    return out


def conjugate(A, X):
    return np.einsum("ab,ibc,cd->iad", X, A, np.linalg.inv(X))


def rel_err(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[n])
