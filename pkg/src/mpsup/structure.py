"""Structural analysis of translation-invariant MPS tensors.

The central routine is :func:`canonical_form`, which blocks away periodicity
and splits a tensor into its basis of normal tensors (BNT)::

    A[i] = G (direct_sum_j direct_sum_q mu[j, q] * A_j[i]) G^{-1}

Splitting uses the commutant ``{Y : Y A[i] = A[i] Y}``: a random commutant
element has eigenspaces that are invariant under every ``A[i]``. When the
commutant is trivial but the algebra generated by the ``A[i]`` is not the
full matrix algebra (a non-semisimple, block-triangular tensor), an invariant
subspace is found from the eigenvectors of a random algebra element and only
the diagonal blocks are kept; the materialized state does not see the
off-diagonal part.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import numkernel as nk
from ._config import get_config
from .exceptions import (
    DecompositionFailed,
    DecompositionSuspect,
    InvalidInput,
    NotBlockInjective,
    NotInjective,
    NotNormal,
    NotNormalOrBug,
    PeriodUndetected,
)
from .mps import TIMPS, StateVector, block_sites, left_canonical, materialize, transfer_matrix
from .validation import check_amplitude_count, check_positive_int, check_random_state, check_site_tensor

# ruff: noqa: N802, N803, N806

EQUIVALENCE_TOL = 1e-6
PERIPHERAL_TOL = 1e-8


# ---------------------------------------------------------------------------
# algebra helpers


def realization(A, L: int = 1) -> np.ndarray:
    """Matrix ``R[s, a*D + b] = (A^{s})_{ab}`` of the tensor blocked ``L`` times."""
    B = block_sites(A, L) if L > 1 else check_site_tensor(A)
    return B.reshape(B.shape[0], -1)


def word_span_dims(A, max_length: int) -> list[int]:
    """``dim span{A^{i1} ... A^{iL}}`` for ``L = 1 .. max_length``."""
    A = check_site_tensor(A, square=True)
    D = A.shape[1]
    basis = nk.orthonormal_basis(A.reshape(A.shape[0], -1).T)
    dims = [basis.shape[1]]
    while len(dims) < max_length and dims[-1] < D * D:
        mats = basis.T.reshape(-1, D, D)
        words = np.einsum("kab,ibc->kiac", mats, A).reshape(-1, D * D)
        basis = nk.orthonormal_basis(words.T)
        dims.append(basis.shape[1])
    return dims


def algebra_basis(A) -> np.ndarray:
    """Orthonormal basis (columns, row-major vectorized) of the unital algebra generated by ``A``."""
    A = check_site_tensor(A, square=True)
    D = A.shape[1]
    basis = nk.orthonormal_basis(np.concatenate([np.eye(D).reshape(1, -1), A.reshape(A.shape[0], -1)]).T)
    while True:
        mats = basis.T.reshape(-1, D, D)
        prods = np.einsum("kab,ibc->kiac", mats, A).reshape(-1, D * D)
        new = nk.orthonormal_basis(np.concatenate([basis, prods.T], axis=1))
        if new.shape[1] == basis.shape[1]:
            return basis
        basis = new


def commutant_basis(A) -> list[np.ndarray]:
    """Basis of ``{Y : Y A[i] = A[i] Y for all i}``."""
    A = check_site_tensor(A, square=True)
    D = A.shape[1]
    eye = np.eye(D)
    # column-major: vec(A Y) = kron(I, A) vec(Y), vec(Y A) = kron(A^T, I) vec(Y)
    K = np.concatenate([np.kron(eye, a) - np.kron(a.T, eye) for a in A])
    ns = nk.null_space(K)
    return [ns[:, k].reshape(D, D, order="F") for k in range(ns.shape[1])]


def _intertwiner(A, B, c: complex) -> np.ndarray | None:
    """Solve ``A[i] X = c X B[i]``; return ``X`` if the solution space is one-dimensional."""
    D = A.shape[1]
    eye = np.eye(D)
    K = np.concatenate([np.kron(eye, a) - c * np.kron(b.T, eye) for a, b in zip(A, B)])
    # threshold against the block scale, since K vanishes for equivalent D=1 blocks
    scale = max(np.linalg.norm(A), np.linalg.norm(B), 1.0)
    _, s, Vh = np.linalg.svd(K, full_matrices=True)
    rank = int(np.sum(s > 1e-8 * scale))
    if Vh.shape[0] - rank != 1:
        return None
    return Vh[-1].conj().reshape(D, D, order="F")


def _cluster(values: np.ndarray, tol: float) -> list[np.ndarray]:
    """Group indices of ``values`` that lie within ``tol`` of each other (single linkage)."""
    remaining = list(range(len(values)))
    groups = []
    while remaining:
        group = [remaining.pop(0)]
        grew = True
        while grew:
            grew = False
            for k in list(remaining):
                if min(abs(values[k] - values[g]) for g in group) <= tol:
                    group.append(k)
                    remaining.remove(k)
                    grew = True
        groups.append(np.array(sorted(group)))
    return groups


def _spectral_radius(M: np.ndarray) -> float:
    if M.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(M))))


# ---------------------------------------------------------------------------
# irreducible decomposition


@dataclass
class _Leaf:
    B: np.ndarray  # block tensor (d, m, m)
    Q: np.ndarray  # D x m, columns span the block
    P: np.ndarray  # m x D, left inverse rows


def _split_by_commutant(B, rng, tries: int = 2):
    m = B.shape[1]
    comm = commutant_basis(B)
    if len(comm) <= 1:
        return None
    for _ in range(tries):
        coeffs = rng.normal(size=len(comm)) + 1j * rng.normal(size=len(comm))
        Y = sum(c * C for c, C in zip(coeffs, comm))
        w, V = np.linalg.eig(Y)
        scale = max(1.0, float(np.max(np.abs(w))))
        groups = _cluster(w, 1e-6 * scale)
        if len(groups) < 2:
            continue
        if np.linalg.cond(V) < 1e8:
            bases = [V[:, g] for g in groups]
        else:
            bases = []
            for g in groups:
                lam = w[g].mean()
                Mp = np.linalg.matrix_power(Y - lam * np.eye(m), m)
                bases.append(nk.null_space(Mp, tol=1e-8))
            if sum(b.shape[1] for b in bases) != m:
                continue
        return bases, True
    return None


def _split_by_flag(B, rng):
    m = B.shape[1]
    alg = algebra_basis(B)
    if alg.shape[1] == m * m:
        return None
    mats = alg.T.reshape(-1, m, m)
    for _ in range(3):
        coeffs = rng.normal(size=len(mats)) + 1j * rng.normal(size=len(mats))
        M = np.einsum("k,kab->ab", coeffs, mats)
        _, V = np.linalg.eig(M)
        for k in range(m):
            orbit = nk.orthonormal_basis((mats @ V[:, k]).T, tol=1e-8)
            if 0 < orbit.shape[1] < m:
                comp = nk.null_space(orbit.conj().T)
                return [orbit, comp], False
    raise DecompositionFailed("reducible tensor but no invariant subspace was found")


def irreducible_blocks(A, seed=0, max_depth: int | None = None):
    """Split ``A`` into irreducible diagonal blocks.

    Returns ``(leaves, exact)`` where each leaf carries the block tensor and
    the columns ``Q``/rows ``P`` locating it in the original bond space, and
    ``exact`` is False when a triangular (non-split) reduction was needed.
    """
    A = check_site_tensor(A, square=True)
    rng = check_random_state(seed)
    D = A.shape[1]
    max_depth = D if max_depth is None else max_depth
    stack = [(_Leaf(A, np.eye(D, dtype=complex), np.eye(D, dtype=complex)), 0)]
    leaves: list[_Leaf] = []
    exact = True
    while stack:
        leaf, depth = stack.pop()
        m = leaf.B.shape[1]
        if m == 1:
            leaves.append(leaf)
            continue
        if depth > max_depth:
            raise DecompositionFailed(f"no irreducible blocks after {max_depth} splitting rounds")
        split = _split_by_commutant(leaf.B, rng)
        if split is None:
            split = _split_by_flag(leaf.B, rng)
        if split is None:
            leaves.append(leaf)
            continue
        bases, is_exact = split
        exact &= is_exact
        Qloc = np.concatenate(bases, axis=1)
        Ploc = np.linalg.inv(Qloc)
        Bt = np.einsum("ab,ibc,cd->iad", Ploc, leaf.B, Qloc)
        start = 0
        children = []
        for basis in bases:
            k = basis.shape[1]
            sl = slice(start, start + k)
            start += k
            children.append(
                _Leaf(Bt[:, sl, sl], leaf.Q @ Qloc[:, sl], Ploc[sl, :] @ leaf.P)
            )
        for child in reversed(children):
            stack.append((child, depth + 1))
    return leaves, exact


# ---------------------------------------------------------------------------
# normality and periodicity


@dataclass
class NormalityReport:
    normal: bool
    peripheral: list[float]
    commutant_dim: int
    algebra_dim: int
    spectrum: np.ndarray = field(repr=False)

    def __bool__(self) -> bool:
        return self.normal


def _peripheral(E: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    w = nk.eigvals_by_modulus(E)
    r = abs(w[0]) if w.size else 0.0
    if r == 0:
        return w, w[:0]
    w = w / r
    return w, w[np.abs(w) >= 1 - tol]


def is_normal(A, tol: float = PERIPHERAL_TOL) -> NormalityReport:
    """Irreducible (algebra is the full matrix algebra) and primitive."""
    A = check_site_tensor(A, square=True)
    D = A.shape[1]
    spectrum, peri = _peripheral(transfer_matrix(A), tol)
    alg_dim = algebra_basis(A).shape[1]
    comm_dim = len(commutant_basis(A))
    normal = alg_dim == D * D and peri.size == 1 and abs(peri[0] - 1) < 1e-6
    return NormalityReport(bool(normal), [float(abs(x)) for x in peri], comm_dim, alg_dim, spectrum)


def _phase_denominator(z: complex, cap: int, tol: float) -> int:
    frac = (np.angle(z) / (2 * np.pi)) % 1.0
    for p in range(1, cap + 1):
        x = frac * p
        if abs(x - round(x)) <= tol * p:
            return p
    raise PeriodUndetected(f"peripheral phase {frac:.12f} is not q/p with p <= {cap}")


def detect_period(A, seed=0) -> int:
    """Least common multiple of the periods of the irreducible blocks of ``A``."""
    A = check_site_tensor(A, square=True)
    cfg = get_config()
    leaves, _ = irreducible_blocks(A, seed)
    p = 1
    for leaf in leaves:
        E = transfer_matrix(leaf.B)
        _, peri = _peripheral(E, cfg["phase_tol"])
        for z in peri:
            p = math.lcm(p, _phase_denominator(z, cfg["period_cap"], cfg["phase_tol"]))
    return p


# ---------------------------------------------------------------------------
# canonical form


@dataclass
class BNTBlock:
    """One element of the basis of normal tensors with its multiplicities."""

    tensor: np.ndarray
    mu: np.ndarray

    @property
    def D(self) -> int:
        return self.tensor.shape[1]

    @property
    def r(self) -> int:
        return len(self.mu)


@dataclass
class CanonicalForm:
    """``A_blocked[i] = gauge @ (direct sum of mu[j,q] A_j[i]) @ inv(gauge)``."""

    p: int
    gauge: np.ndarray
    blocks: list[BNTBlock]
    exact_gauge: bool = True
    dropped: int = 0

    @property
    def b(self) -> int:
        return len(self.blocks)

    @property
    def dims(self) -> list[int]:
        return [blk.D for blk in self.blocks]

    def _nbar(self, N: int) -> int:
        if N % self.p:
            raise InvalidInput(f"period {self.p} does not divide N={N}")
        return N // self.p

    def weights(self, N: int) -> np.ndarray:
        """``alpha_j = sum_q mu[j, q] ** (N / p)``."""
        nbar = self._nbar(N)
        return np.array([np.sum(blk.mu**nbar) for blk in self.blocks])

    def active(self, N: int, tol: float = 1e-12) -> np.ndarray:
        alpha = np.abs(self.weights(N))
        return alpha > tol * max(1.0, alpha.max(initial=0.0))

    def overlaps(self, N: int) -> np.ndarray:
        """Gram matrix ``G[j', j] = <psi_j' | psi_j>`` of the block states."""
        nbar = self._nbar(N)
        b = self.b
        G = np.zeros((b, b), dtype=complex)
        for j in range(b):
            for jp in range(b):
                E = transfer_matrix(self.blocks[j].tensor, self.blocks[jp].tensor)
                G[jp, j] = np.trace(np.linalg.matrix_power(E, nbar))
        return G

    def normalization(self, N: int) -> float:
        """``c_N = ||sum_j alpha_j psi_j||`` computed from transfer matrices."""
        alpha = self.weights(N)
        c2 = np.real(alpha.conj() @ self.overlaps(N) @ alpha)
        return float(np.sqrt(max(c2, 0.0)))

    def block_states(self, N: int) -> list[StateVector]:
        nbar = self._nbar(N)
        return [materialize(TIMPS(blk.tensor), nbar) for blk in self.blocks]

    def reassemble(self) -> np.ndarray:
        """Rebuild the blocked tensor from the blocks, multiplicities and gauge."""
        d = self.blocks[0].tensor.shape[0]
        parts = [mu * blk.tensor for blk in self.blocks for mu in blk.mu]
        Dtot = sum(x.shape[1] for x in parts)
        out = np.zeros((d, Dtot, Dtot), dtype=complex)
        start = 0
        for x in parts:
            k = x.shape[1]
            out[:, start : start + k, start : start + k] = x
            start += k
        return np.einsum("ab,ibc,cd->iad", self.gauge, out, np.linalg.inv(self.gauge))

    def injectivity_lengths(self) -> list[int]:
        return [injectivity_length(blk.tensor) for blk in self.blocks]


def _normalize_block(B) -> tuple[np.ndarray, float]:
    r = _spectral_radius(transfer_matrix(B))
    return B / np.sqrt(r), float(np.sqrt(r))


def canonical_form(A, N: int | None = None, tol: float | None = None, seed=0) -> CanonicalForm:
    """Period, basis of normal tensors, multiplicities and gauge of ``A``.

    ``N`` is only used to check that the period divides it. ``tol`` overrides
    the relative rank tolerance for the duration of the call.
    """
    A = check_site_tensor(A, square=True)
    if tol is not None:
        from ._config import config_context

        with config_context(tol_rank=tol):
            return canonical_form(A, N, None, seed)
    p = detect_period(A, seed)
    if N is not None and N % p:
        raise InvalidInput(f"period {p} does not divide N={N}")
    Ab = block_sites(A, p) if p > 1 else A
    leaves, exact = irreducible_blocks(Ab, seed)

    scaled = []
    dropped = 0
    overall = max(_spectral_radius(transfer_matrix(leaf.B)) for leaf in leaves)
    for leaf in leaves:
        r = _spectral_radius(transfer_matrix(leaf.B))
        if r <= 1e-14 * max(overall, 1e-300):
            dropped += 1
            continue
        Bn, s = _normalize_block(leaf.B)
        _, peri = _peripheral(transfer_matrix(Bn), PERIPHERAL_TOL)
        if peri.size != 1:
            raise DecompositionFailed("a block is still periodic after blocking")
        scaled.append((s, Bn, leaf))
    if not scaled:
        raise DecompositionFailed("every block is nilpotent")
    scaled.sort(key=lambda t: -t[0])

    classes: list[dict] = []
    for s, Bn, leaf in scaled:
        placed = False
        for cls in classes:
            rep = cls["tensor"]
            if rep.shape != Bn.shape:
                continue
            w = nk.eigvals_by_modulus(transfer_matrix(Bn, rep))
            if abs(abs(w[0]) - 1) > EQUIVALENCE_TOL:
                continue
            c = w[0] / abs(w[0])
            X = _intertwiner(Bn, rep, c)
            if X is None:
                continue
            Xinv = np.linalg.inv(X)
            cls["mu"].append(s * c)
            cls["Q"].append(leaf.Q @ X)
            cls["P"].append(Xinv @ leaf.P)
            placed = True
            break
        if not placed:
            classes.append({"tensor": Bn, "mu": [complex(s)], "Q": [leaf.Q], "P": [leaf.P]})

    G = np.concatenate([Q for cls in classes for Q in cls["Q"]], axis=1)
    blocks = [BNTBlock(cls["tensor"], np.array(cls["mu"], dtype=complex)) for cls in classes]
    if dropped:
        exact = False
    return CanonicalForm(p, G if not dropped else _pad_gauge(G), blocks, exact, dropped)


def _pad_gauge(G: np.ndarray) -> np.ndarray:
    # columns of dropped nilpotent blocks are omitted; complete to a square matrix
    comp = nk.null_space(G.conj().T)
    return np.concatenate([G, comp], axis=1)


# ---------------------------------------------------------------------------
# injectivity


def injectivity_bound(D: int) -> int:
    return max(1, math.ceil(2 * D * D * (6 + math.log2(D))))


def injectivity_length(A) -> int:
    """Smallest ``L`` with ``dim span{A^{i1..iL}} = D^2``."""
    A = check_site_tensor(A, square=True)
    D = A.shape[1]
    cap = injectivity_bound(D)
    dims = word_span_dims(A, cap)
    if dims[-1] == D * D:
        return len(dims)
    raise NotNormalOrBug(f"span of words stayed below {D * D} up to L={cap}")


def _physical_bases(cf: CanonicalForm, L: int) -> list[np.ndarray]:
    return [realization(blk.tensor, L) for blk in cf.blocks]


def _jointly_independent(mats: list[np.ndarray]) -> bool:
    need = sum(M.shape[1] for M in mats)
    return nk.numerical_rank(np.concatenate(mats, axis=1)) == need


def block_injectivity_length(cf: CanonicalForm) -> int:
    """Smallest blocking ``L`` at which the block subspaces are independent and full."""
    L0 = max(injectivity_length(blk.tensor) for blk in cf.blocks)
    cap = max(L0, 3 * (cf.b - 1) * (L0 + 1))
    d = cf.blocks[0].tensor.shape[0]
    for L in range(1, cap + 1):
        check_amplitude_count(d, L)
        if _jointly_independent(_physical_bases(cf, L)):
            return L
    raise DecompositionSuspect(f"blocks not jointly injective up to L={cap}")


@dataclass
class InverseTensor:
    """Left inverse of the blocked tensor: ``matrix @ realization(A, L) = I``."""

    matrix: np.ndarray
    D: int
    L: int

    def apply(self, phys: np.ndarray) -> np.ndarray:
        return (self.matrix @ phys).reshape(self.D, self.D)


def tensor_inverse(A, L: int = 1) -> InverseTensor:
    A = check_site_tensor(A)
    L = check_positive_int(L, "L")
    R = realization(A, L)
    need = A.shape[1] * A.shape[2]
    if nk.numerical_rank(R) < need:
        raise NotInjective(f"tensor is not injective at L={L}")
    return InverseTensor(np.linalg.pinv(R), A.shape[1], L)


@dataclass
class BlockAngle:
    basis: np.ndarray
    cos_theta: float
    projector: np.ndarray
    opnorm: float

    @property
    def sin_theta(self) -> float:
        return math.sqrt(max(0.0, 1.0 - self.cos_theta**2))

    @property
    def csc_theta(self) -> float:
        s = self.sin_theta
        return math.inf if s == 0 else 1.0 / s


@dataclass
class AngleReport:
    L: int
    blocks: list[BlockAngle]


def block_projectors(cf: CanonicalForm, L: int) -> AngleReport:
    """Oblique projectors onto each block's physical subspace along the others."""
    L = check_positive_int(L, "L")
    d = cf.blocks[0].tensor.shape[0]
    check_amplitude_count(d, 2 * L)
    raw = _physical_bases(cf, L)
    if not _jointly_independent(raw):
        raise NotBlockInjective(f"blocks are not jointly injective at L={L}")
    bases = [nk.orthonormal_basis(R) for R in raw]
    out = []
    for i, Ui in enumerate(bases):
        others = [B for j, B in enumerate(bases) if j != i]
        if others:
            Uc = nk.orthonormal_basis(np.concatenate(others, axis=1))
        else:
            Uc = np.zeros((Ui.shape[0], 0), dtype=complex)
        coords = np.linalg.pinv(np.concatenate([Ui, Uc], axis=1))
        P = Ui @ coords[: Ui.shape[1]]
        out.append(BlockAngle(Ui, nk.subspace_cosine(Ui, Uc), P, nk.spectral_norm(P)))
    return AngleReport(L, out)


# ---------------------------------------------------------------------------
# purity constant and product decomposition


@dataclass
class EtaReport:
    eta: float
    rho1: np.ndarray
    C: np.ndarray
    rank: int
    lambda2: complex


def eta(A) -> EtaReport:
    """One-site purity of the infinite-chain state of a normal tensor."""
    g = left_canonical(A)
    sq = np.sqrt(np.real(np.diag(g.Lambda)))
    C = (g.A_L * sq[None, None, :]).reshape(g.A_L.shape[0], -1)
    rho1 = C @ C.conj().T
    value = float(np.real(np.trace(rho1 @ rho1)))
    return EtaReport(value, rho1, C, nk.numerical_rank(C), g.second_eigenvalue)


@dataclass
class ProductDecomposition:
    """``psi = sum_i beta_i phi_i^{(x) N/p}`` with unit cluster vectors ``phi_i``."""

    betas: np.ndarray
    phis: list[np.ndarray]
    cluster_size: int
    N: int
    normalization: float
    inactive: list[int] = field(default_factory=list)

    @property
    def terms(self) -> list[tuple[complex, np.ndarray]]:
        return list(zip(self.betas, self.phis))

    def state(self) -> StateVector:
        reps = self.N // self.cluster_size
        dp = self.phis[0].size
        amps = np.zeros(dp**reps, dtype=complex)
        for beta, phi in self.terms:
            v = np.ones(1, dtype=complex)
            for _ in range(reps):
                v = np.kron(v, phi)
            amps += beta * v
        d = round(dp ** (1 / self.cluster_size))
        return StateVector(d, self.N, amps)


@dataclass
class StructuralObstruction:
    """Blocks of bond dimension > 1 that prevent a product decomposition."""

    blocks: list[tuple[int, int]]
    canonical: CanonicalForm

    def __str__(self) -> str:
        return ", ".join(f"block {j} D={D}" for j, D in self.blocks)


def product_decompose(A, N: int, seed=0):
    """Return a :class:`ProductDecomposition` or a :class:`StructuralObstruction`."""
    A = check_site_tensor(A, square=True)
    N = check_positive_int(N, "N")
    cf = canonical_form(A, N, seed=seed)
    bad = [(j, blk.D) for j, blk in enumerate(cf.blocks) if blk.D > 1]
    if bad:
        return StructuralObstruction(bad, cf)
    nbar = N // cf.p
    alpha = cf.weights(N)
    betas, phis = [], []
    for a, blk in zip(alpha, cf.blocks):
        vec = blk.tensor[:, 0, 0]
        phi = nk.fix_phase(vec)
        k = int(np.argmax(np.abs(phi)))
        z = vec[k] / phi[k]
        betas.append(a * z**nbar)
        phis.append(phi)
    inactive = [j for j, on in enumerate(cf.active(N)) if not on]
    return ProductDecomposition(np.array(betas), phis, cf.p, N, cf.normalization(N), inactive)


def is_block_normal_form(cf: CanonicalForm) -> bool:
    """Every pair of distinct blocks has mixed transfer spectral radius below one."""
    for j in range(cf.b):
        for k in range(cf.b):
            if j == k:
                continue
            A, B = cf.blocks[j].tensor, cf.blocks[k].tensor
            if _spectral_radius(transfer_matrix(A, B)) >= 1 - 1e-8:
                return False
    return True


__all__ = [
    "AngleReport",
    "BNTBlock",
    "BlockAngle",
    "CanonicalForm",
    "EtaReport",
    "InverseTensor",
    "NormalityReport",
    "NotNormal",
    "ProductDecomposition",
    "StructuralObstruction",
    "block_injectivity_length",
    "block_projectors",
    "canonical_form",
    "commutant_basis",
    "detect_period",
    "eta",
    "injectivity_length",
    "irreducible_blocks",
    "is_block_normal_form",
    "is_normal",
    "product_decompose",
    "realization",
    "tensor_inverse",
]
