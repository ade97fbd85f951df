"""MPS data model: materialization, transfer matrices, blocking and gauges.

Conventions
-----------
* A site tensor is a complex array ``A[i, a, b]`` with physical index ``i``
  and bond indices ``a`` (left) and ``b`` (right).
* Amplitudes are indexed big-endian: site 1 is the most significant digit,
  so a contiguous cut is a plain ``reshape``.
* Transfer matrices act on column-major vectorized matrices:
  ``E = sum_i kron(A[i], conj(B[i]))`` maps ``vec(Y)`` to
  ``vec(sum_i conj(B[i]) @ Y @ A[i].T)``.
* States are never normalized implicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import numkernel as nk
from .exceptions import InvalidInput, NotNormal
from .validation import (
    check_amplitude_count,
    check_positive_int,
    check_site_tensor,
    check_square_matrix,
)

# ruff: noqa: N802, N803, N806


@dataclass(frozen=True, eq=False)
class StateVector:
    """Dense amplitudes of ``N`` sites of local dimension ``d``."""

    d: int
    N: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != self.d**self.N:
            raise InvalidInput(f"expected {self.d}^{self.N} amplitudes, got {amps.size}")
        if not np.all(np.isfinite(amps)):
            raise InvalidInput("state has non-finite amplitudes")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        n = self.norm
        if n == 0:
            raise InvalidInput("cannot normalize the zero state")
        return StateVector(self.d, self.N, self.amplitudes / n)

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((self.d,) * self.N)

    def __len__(self) -> int:
        return self.amplitudes.size


@dataclass(frozen=True, eq=False)
class TIMPS:
    """Translation-invariant MPS with trace boundary."""

    A: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "A", check_site_tensor(self.A, square=True))

    @property
    def d(self) -> int:
        return self.A.shape[0]

    @property
    def D(self) -> int:
        return self.A.shape[1]


@dataclass(frozen=True, eq=False)
class MPSChain:
    """Site-dependent MPS closed by a trace or a boundary matrix ``X``.

    The amplitude is ``Tr[X A1^{i1} ... AN^{iN}]``; ``boundary=None`` means
    ``X = I`` (periodic trace).
    """

    sites: tuple
    boundary: np.ndarray | None = None

    def __post_init__(self):
        sites = tuple(check_site_tensor(A, name=f"site {n + 1}") for n, A in enumerate(self.sites))
        if not sites:
            raise InvalidInput("a chain needs at least one site")
        d = sites[0].shape[0]
        for n, A in enumerate(sites):
            if A.shape[0] != d:
                raise InvalidInput(f"physical dimension mismatch at site {n + 1}")
        for n in range(len(sites) - 1):
            if sites[n].shape[2] != sites[n + 1].shape[1]:
                raise InvalidInput(f"bond mismatch at site {n + 2}")
        Dl, Dr = sites[0].shape[1], sites[-1].shape[2]
        X = self.boundary
        if X is None:
            if Dl != Dr:
                raise InvalidInput(f"bond mismatch at site 1 (trace closure {Dr} vs {Dl})")
        else:
            X = np.asarray(X, dtype=complex)
            if X.shape != (Dr, Dl):
                raise InvalidInput(f"boundary matrix must have shape {(Dr, Dl)}, got {X.shape}")
            if not np.all(np.isfinite(X)):
                raise InvalidInput("boundary matrix has non-finite entries")
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "boundary", X)

    @property
    def d(self) -> int:
        return self.sites[0].shape[0]

    @property
    def N(self) -> int:
        return len(self.sites)

    @property
    def bond_dims(self) -> list[int]:
        """Left bond dimension of every site, ``D_[1], ..., D_[N]``."""
        return [A.shape[1] for A in self.sites]

    @classmethod
    def from_timps(cls, mps: TIMPS, N: int, boundary=None) -> "MPSChain":
        return cls(tuple([mps.A] * N), boundary)


@dataclass(frozen=True, eq=False)
class CanonicalGauge:
    """Left-canonical representative of a normal tensor.

    ``A_L[i] = gaugeX @ A[i] @ inv(gaugeX) / scale`` with
    ``sum_i A_L[i]^H A_L[i] = I`` and ``sum_i A_L[i] Lambda A_L[i]^H = Lambda``.
    """

    A_L: np.ndarray
    Lambda: np.ndarray
    gaugeX: np.ndarray
    scale: float
    spectrum: np.ndarray = field(repr=False)

    @property
    def second_eigenvalue(self) -> complex:
        """Subleading eigenvalue of the normalized transfer matrix."""
        return complex(self.spectrum[1]) if self.spectrum.size > 1 else 0j


def _contract(sites, cap_check: tuple[int, int]) -> np.ndarray:
    check_amplitude_count(*cap_check)
    D0 = sites[0].shape[1]
    T = np.eye(D0, dtype=complex)[:, None, :]
    for A in sites:
        T = np.einsum("asb,ibc->asic", T, A).reshape(D0, -1, A.shape[2])
    return T


def materialize(source, N: int | None = None) -> StateVector:
    """Dense amplitudes of a :class:`TIMPS` (needs ``N``) or an :class:`MPSChain`."""
    if isinstance(source, TIMPS):
        if N is None:
            raise InvalidInput("N is required for a TI MPS")
        N = check_positive_int(N, "N")
        sites = [source.A] * N
        X = None
    elif isinstance(source, MPSChain):
        if N is not None and N != source.N:
            raise InvalidInput(f"chain has {source.N} sites, N={N} requested")
        sites, X, N = source.sites, source.boundary, source.N
    else:
        raise InvalidInput(f"cannot materialize {type(source).__name__}")
    d = sites[0].shape[0]
    T = _contract(sites, (d, N))
    if X is None:
        amps = np.einsum("asa->s", T)
    else:
        amps = np.einsum("ca,asc->s", X, T)
    return StateVector(d, N, amps)


def transfer_matrix(A, B=None) -> np.ndarray:
    """``sum_i kron(A[i], conj(B[i]))``; ``B`` defaults to ``A``."""
    A = check_site_tensor(A)
    B = A if B is None else check_site_tensor(B)
    if A.shape[0] != B.shape[0]:
        raise InvalidInput(f"physical dimensions differ: {A.shape[0]} vs {B.shape[0]}")
    rows = A.shape[1] * B.shape[1]
    cols = A.shape[2] * B.shape[2]
    return np.einsum("iab,icd->acbd", A, B.conj()).reshape(rows, cols)


def block_sites(A, p: int) -> np.ndarray:
    """Group ``p`` consecutive sites: ``out[i1...ip] = A[i1] @ ... @ A[ip]``."""
    A = check_site_tensor(A)
    p = check_positive_int(p, "p")
    d = A.shape[0]
    check_amplitude_count(d, p)
    out = A
    for _ in range(p - 1):
        out = np.einsum("sab,ibc->siac", out, A).reshape(-1, A.shape[1], A.shape[2])
    return out


def gauge_transform(A, X) -> np.ndarray:
    """``X A[i] X^{-1}`` for every physical index."""
    A = check_site_tensor(A, square=True)
    X = check_square_matrix(X, name="gauge")
    if X.shape[0] != A.shape[1]:
        raise InvalidInput(f"gauge is {X.shape}, bond dimension is {A.shape[1]}")
    cond = np.linalg.cond(X)
    if not np.isfinite(cond) or cond > 1e12:
        raise InvalidInput(f"gauge is singular or ill-conditioned (cond={cond:.3g})")
    return np.einsum("ab,ibc,cd->iad", X, A, np.linalg.inv(X))


def _dual_channel_matrix(A) -> np.ndarray:
    # vec_F(A^H rho A) = kron(A^T, A^H) vec_F(rho); also valid for rectangular A
    return sum(np.kron(a.T, a.conj().T) for a in A)


def _channel_matrix(A) -> np.ndarray:
    # vec_F(A R A^H) = kron(conj(A), A) vec_F(R)
    return sum(np.kron(a.conj(), a) for a in A)


def _positive_fixed_point(M: np.ndarray, D: int) -> np.ndarray:
    w, V = np.linalg.eig(M)
    k = int(np.argmax(np.abs(w)))
    X = V[:, k].reshape(D, D, order="F")
    tr = np.trace(X)
    if abs(tr) < 1e-300:
        raise NotNormal("fixed point is traceless")
    X = X / tr
    return (X + X.conj().T) / 2


def left_canonical(A, *, gap_tol: float = 1e-8) -> CanonicalGauge:
    """Left-canonical gauge of a normal tensor with diagonal right fixed point.

    Raises :class:`NotNormal` when the leading transfer eigenvalue is not
    simple and isolated in modulus, or the fixed point is not positive
    definite.
    """
    A = check_site_tensor(A, square=True)
    D = A.shape[1]
    spectrum = nk.eigvals_by_modulus(transfer_matrix(A))
    r = abs(spectrum[0])
    if r < 1e-300:
        raise NotNormal("transfer matrix is nilpotent")
    if spectrum.size > 1 and abs(spectrum[1]) >= r * (1 - gap_tol):
        raise NotNormal(
            f"peripheral spectrum is degenerate: |l1|={r:.12g}, |l2|={abs(spectrum[1]):.12g}"
        )
    scale = float(np.sqrt(r))
    An = A / scale

    rho = _positive_fixed_point(_dual_channel_matrix(An), D) * D
    wr = np.linalg.eigvalsh(rho)
    if wr.min() <= 1e-12 * wr.max():
        raise NotNormal("left fixed point is not positive definite")
    Y = np.linalg.cholesky(rho).conj().T
    Yinv = np.linalg.inv(Y)
    AL = np.einsum("ab,ibc,cd->iad", Y, An, Yinv)

    R = _positive_fixed_point(_channel_matrix(AL), D)
    lam, U = np.linalg.eigh(R)
    order = np.argsort(-lam, kind="stable")
    lam, U = lam[order], U[:, order]
    U = np.column_stack([nk.fix_phase(U[:, k]) for k in range(D)])
    if lam.min() <= 0:
        raise NotNormal("right fixed point is not positive definite")
    AL = np.einsum("ba,ibc,cd->iad", U.conj(), AL, U)
    gauge = U.conj().T @ Y
    return CanonicalGauge(AL, np.diag(lam / lam.sum()).astype(complex), gauge, scale, spectrum / r)


def left_canonical_chain(chain: MPSChain) -> MPSChain:
    """Gauge a periodic chain so every site satisfies ``sum_i A^H A = I``.

    The left fixed point of the full ring transfer is propagated site by
    site; each site is then normalized individually. The state changes only
    by a global factor.
    """
    if chain.boundary is not None:
        raise InvalidInput("left_canonical_chain needs a trace-closed chain")
    sites = chain.sites
    D0 = sites[0].shape[1]
    # Propagate rho_{n+1} = sum_i A_n^H rho_n A_n around the ring.
    M = np.eye(D0 * D0, dtype=complex)
    for A in sites:
        M = _dual_channel_matrix(A) @ M
    rho = _positive_fixed_point(M, D0) * D0
    rhos = [rho]
    for A in sites[:-1]:
        nxt = np.einsum("iba,bc,icd->ad", A.conj(), rhos[-1], A)
        nxt = (nxt + nxt.conj().T) / 2
        rhos.append(nxt * nxt.shape[0] / np.trace(nxt).real)
    Ys = []
    for r in rhos:
        w = np.linalg.eigvalsh(r)
        if w.min() <= 1e-12 * w.max():
            raise NotNormal("ring fixed point is not positive definite")
        Ys.append(np.linalg.cholesky(r).conj().T)
    Ys.append(Ys[0])
    out = []
    for n, A in enumerate(sites):
        B = np.einsum("ab,ibc,cd->iad", Ys[n], A, np.linalg.inv(Ys[n + 1]))
        c = np.trace(sum(b.conj().T @ b for b in B)).real / B.shape[2]
        out.append(B / np.sqrt(c))
    return MPSChain(tuple(out))


def regroup(state: StateVector, p: int) -> StateVector:
    """View ``N`` sites of dimension ``d`` as ``N/p`` sites of dimension ``d**p``."""
    if state.N % p:
        raise InvalidInput(f"{p} does not divide N={state.N}")
    return StateVector(state.d**p, state.N // p, state.amplitudes)
