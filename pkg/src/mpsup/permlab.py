"""Permutations, Schmidt spectra across arbitrary bipartitions and MPS-up certification.

Particles and permutations are 0-based. A :class:`Permutation` stores
``image[old] = new``; ``order[new] = old`` is its inverse, i.e. the list of
original labels read along the permuted chain.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import numkernel as nk
from .exceptions import InvalidInput
from .mps import MPSChain, StateVector, TIMPS, block_sites, left_canonical_chain, materialize, transfer_matrix
from .structure import tensor_inverse
from .validation import check_amplitude_count, check_positive_int, check_random_state, check_square_matrix

# ruff: noqa: N802, N803, N806

EXHAUSTIVE_MAX_N = 8


# ---------------------------------------------------------------------------
# permutations and bipartitions


@dataclass(frozen=True)
class Permutation:
    image: tuple[int, ...]

    def __post_init__(self):
        img = tuple(int(x) for x in self.image)
        if sorted(img) != list(range(len(img))):
            raise InvalidInput(f"not a permutation of 0..{len(img) - 1}: {img}")
        object.__setattr__(self, "image", img)

    @classmethod
    def from_order(cls, order) -> "Permutation":
        order = [int(x) for x in order]
        image = [0] * len(order)
        for new, old in enumerate(order):
            image[old] = new
        return cls(tuple(image))

    @classmethod
    def identity(cls, N: int) -> "Permutation":
        return cls(tuple(range(N)))

    @classmethod
    def random(cls, N: int, seed=None) -> "Permutation":
        return cls(tuple(check_random_state(seed).permutation(N)))

    @property
    def order(self) -> tuple[int, ...]:
        order = [0] * len(self.image)
        for old, new in enumerate(self.image):
            order[new] = old
        return tuple(order)

    def inverse(self) -> "Permutation":
        return Permutation(self.order)

    def __len__(self) -> int:
        return len(self.image)

    def __call__(self, i: int) -> int:
        return self.image[i]

    def labels(self) -> list[int]:
        """1-based original labels in permuted order."""
        return [o + 1 for o in self.order]


@dataclass(frozen=True)
class Bipartition:
    S: tuple[int, ...]
    N: int

    def __post_init__(self):
        S = tuple(sorted({int(x) for x in self.S}))
        if not S or len(S) >= self.N or S[0] < 0 or S[-1] >= self.N:
            raise InvalidInput(f"{S} is not a nonempty proper subset of 0..{self.N - 1}")
        object.__setattr__(self, "S", S)

    @property
    def complement(self) -> tuple[int, ...]:
        inside = set(self.S)
        return tuple(i for i in range(self.N) if i not in inside)

    def flipped(self) -> "Bipartition":
        return Bipartition(self.complement, self.N)

    def key(self) -> int:
        """Bitmask identifying the unordered cut ``{S, S^c}``."""
        mask = sum(1 << i for i in self.S)
        return min(mask, ((1 << self.N) - 1) ^ mask)

    def label(self) -> str:
        return "{" + ",".join(str(i + 1) for i in self.S) + "}"


def interleave_permutation(Ntilde: int) -> Permutation:
    """Odd (1-based) positions go to the front half, even ones to the back."""
    Ntilde = check_positive_int(Ntilde, "Ntilde", 2)
    half = (Ntilde + 1) // 2
    image = [k // 2 if k % 2 == 0 else half + k // 2 for k in range(Ntilde)]
    return Permutation(tuple(image))


def comb_permutation(N: int, k: int) -> Permutation:
    """Particles ``k, 2k, ..., N`` (1-based) first, the rest after, order preserved."""
    N = check_positive_int(N, "N")
    k = check_positive_int(k, "k")
    if N % k:
        raise InvalidInput(f"k={k} does not divide N={N}")
    picked = [i for i in range(N) if (i + 1) % k == 0]
    rest = [i for i in range(N) if (i + 1) % k != 0]
    return Permutation.from_order(picked + rest)


def comb_subset(N: int, k: int, n: int | None = None) -> Bipartition:
    """0-based labels of particles ``k, 2k, ..., nk``."""
    n = N // k if n is None else n
    if n * k > N or n < 1:
        raise InvalidInput(f"comb with n={n}, k={k} does not fit N={N}")
    return Bipartition(tuple(k * (a + 1) - 1 for a in range(n)), N)


def permute_state(psi: StateVector, pi: Permutation) -> StateVector:
    if len(pi) != psi.N:
        raise InvalidInput(f"permutation of {len(pi)} particles applied to N={psi.N}")
    T = np.transpose(psi.tensor(), pi.order)
    return StateVector(psi.d, psi.N, np.ascontiguousarray(T).reshape(-1))


# ---------------------------------------------------------------------------
# Schmidt spectra


@dataclass
class SchmidtReport:
    bipartition: Bipartition
    sigma: np.ndarray
    norm: float

    def rank(self, tol: float | None = None) -> int:
        return nk.rank_from_singular_values(self.sigma, tol)

    def truncation_error(self, D: int) -> float:
        if self.norm == 0:
            return 0.0
        tail = self.sigma[D:]
        return float(np.sqrt(np.sum(tail**2)) / self.norm)

    def purity(self) -> float:
        return float(np.sum(self.sigma**4) / self.norm**4)

    def to_rows(self) -> list[tuple[str, int, float]]:
        return [(self.bipartition.label(), k + 1, float(s)) for k, s in enumerate(self.sigma)]


def _cut_matrix(psi: StateVector, S: Bipartition) -> np.ndarray:
    order = list(S.S) + list(S.complement)
    T = np.transpose(psi.tensor(), order)
    return T.reshape(psi.d ** len(S.S), -1)


def schmidt_spectrum(psi: StateVector, S) -> SchmidtReport:
    if not isinstance(S, Bipartition):
        S = Bipartition(tuple(S), psi.N)
    if S.N != psi.N:
        raise InvalidInput(f"bipartition of {S.N} particles applied to N={psi.N}")
    check_amplitude_count(psi.d, psi.N)
    sigma = np.linalg.svd(_cut_matrix(psi, S), compute_uv=False)
    return SchmidtReport(S, sigma, psi.norm)


def subsystem_purity(psi: StateVector, S) -> float:
    return schmidt_spectrum(psi, S).purity()


# ---------------------------------------------------------------------------
# certification


@dataclass
class CertReport:
    D: int
    permutations: list[Permutation]
    eps_per_perm: np.ndarray
    worst_cut: list[str] = field(default_factory=list)

    @property
    def eps_star(self) -> float:
        return float(self.eps_per_perm.max()) if self.eps_per_perm.size else 0.0

    @property
    def worst_permutation(self) -> Permutation:
        return self.permutations[int(np.argmax(self.eps_per_perm))]

    def passes(self, eps: float) -> bool:
        return self.eps_star <= eps


def permutation_family(N: int, samples: int = 50, seed=0) -> list[Permutation]:
    """All of S_N for small N, otherwise the proof permutations plus seeded samples."""
    if N <= EXHAUSTIVE_MAX_N:
        return [Permutation(p) for p in itertools.permutations(range(N))]
    fam = [Permutation.identity(N)]
    if N >= 2:
        fam.append(interleave_permutation(N))
    fam += [comb_permutation(N, k) for k in range(2, N + 1) if N % k == 0]
    rng = check_random_state(seed)
    fam += [Permutation(tuple(rng.permutation(N))) for _ in range(samples)]
    seen, out = set(), []
    for p in fam:
        if p.image not in seen:
            seen.add(p.image)
            out.append(p)
    return out


def cut_errors(psi: StateVector, D: int) -> dict[int, float]:
    """Truncation error at bond ``D`` for every unordered cut, keyed by bitmask."""
    N = psi.N
    out = {}
    for mask in range(1, 1 << N):
        key = min(mask, ((1 << N) - 1) ^ mask)
        if key != mask or key == 0:
            continue
        S = Bipartition(tuple(i for i in range(N) if mask >> i & 1), N)
        out[key] = schmidt_spectrum(psi, S).truncation_error(D)
    return out


def certify_mps_up(psi: StateVector, D: int, perms=None, samples: int = 50, seed=0) -> CertReport:
    """Worst optimal rank-``D`` truncation error over contiguous cuts of permuted chains."""
    D = check_positive_int(D, "D")
    N = psi.N
    if perms is None:
        perms = permutation_family(N, samples, seed)
    perms = list(perms)
    if N < 2 or not perms:
        return CertReport(D, perms, np.zeros(len(perms)))
    full = (1 << N) - 1
    orders = np.array([p.order for p in perms], dtype=np.int64)
    masks = np.cumsum(np.left_shift(1, orders[:, :-1]), axis=1)
    keys = np.minimum(masks, full ^ masks)
    cache: dict[int, float] = {}
    for key in np.unique(keys):
        S = Bipartition(tuple(i for i in range(N) if int(key) >> i & 1), N)
        cache[int(key)] = schmidt_spectrum(psi, S).truncation_error(D)
    table = np.vectorize(cache.__getitem__, otypes=[float])(keys)
    eps = table.max(axis=1)
    worst = []
    w = int(np.argmax(eps))
    m = int(np.argmax(table[w]))
    worst.append(Bipartition(tuple(orders[w, : m + 1]), N).label())
    return CertReport(D, perms, eps, worst)


# ---------------------------------------------------------------------------
# rank counting after inverse maps


@dataclass
class RankCount:
    predicted: int
    measured: int

    @property
    def agrees(self) -> bool:
        return self.predicted == self.measured


def _rank_after_inverses(psi: StateVector, groups: list[list[int]], inverses: list[np.ndarray]) -> int:
    """Half-cut rank with odd groups on one side after applying each group's inverse."""
    left = [g for g in range(len(groups)) if g % 2 == 0]
    right = [g for g in range(len(groups)) if g % 2 == 1]
    order = [s for g in left + right for s in groups[g]]
    nl = sum(len(groups[g]) for g in left)
    M = np.transpose(psi.tensor(), order).reshape(psi.d**nl, -1)
    KL = np.ones((1, 1), dtype=complex)
    for g in left:
        KL = np.kron(KL, inverses[g])
    KR = np.ones((1, 1), dtype=complex)
    for g in right:
        KR = np.kron(KR, inverses[g])
    return nk.numerical_rank(KL @ M @ KR.T)


def rank_counting_probe(source, N: int | None = None, L: int = 1) -> RankCount:
    """Schmidt rank of the inverted, interleaved state against its prediction.

    For a TI tensor injective at length ``L``, ``N`` sites are grouped into
    ``Ntilde = N // L`` blocks (the first ``N % L`` of them one site longer),
    each block is inverted, and the rank across {odd blocks | even blocks} is
    measured. For a chain every site is inverted individually.
    """
    if isinstance(source, MPSChain):
        return _rank_counting_chain(source)
    A = source.A if isinstance(source, TIMPS) else np.asarray(source, dtype=complex)
    if N is None:
        raise InvalidInput("N is required for a TI tensor")
    N = check_positive_int(N, "N")
    L = check_positive_int(L, "L")
    Ntilde, r = divmod(N, L)
    if Ntilde < 2:
        raise InvalidInput(f"need at least two blocks, got N={N}, L={L}")
    sizes = [L + 1] * r + [L] * (Ntilde - r)
    inv = {s: tensor_inverse(block_sites(A, s)).matrix for s in set(sizes)}
    groups, start = [], 0
    for s in sizes:
        groups.append(list(range(start, start + s)))
        start += s
    psi = materialize(TIMPS(A), N)
    measured = _rank_after_inverses(psi, groups, [inv[s] for s in sizes])
    D = A.shape[1]
    return RankCount(D ** (2 * (Ntilde // 2)), measured)


def _rank_counting_chain(chain: MPSChain) -> RankCount:
    sites = [np.asarray(s, dtype=complex) for s in chain.sites]
    if chain.boundary is not None:
        sites[0] = np.einsum("ab,ibc->iac", chain.boundary, sites[0])
    N = len(sites)
    if N < 2:
        raise InvalidInput("need at least two sites")
    inverses = [tensor_inverse(s).matrix for s in sites]
    psi = materialize(chain)
    measured = _rank_after_inverses(psi, [[n] for n in range(N)], inverses)
    # bond n sits between site n-1 and site n (bond 0 closes the ring)
    predicted = 1
    for n in range(N):
        if (n - 1) % N % 2 != n % 2:
            predicted *= sites[n].shape[1]
    return RankCount(predicted, measured)


# ---------------------------------------------------------------------------
# inequality checkers


@dataclass
class BoundCheck:
    lhs: float
    rhs: float
    holds: bool


def _check_unit(psi: StateVector, name: str) -> None:
    if abs(psi.norm - 1) > 1e-9:
        raise InvalidInput(f"{name} must have unit norm, got {psi.norm}")


def purity_gap_bound_check(psi1: StateVector, psi2: StateVector, S) -> BoundCheck:
    """``|Tr rho1_S^2 - Tr rho2_S^2| <= 4 ||psi1 - psi2||``."""
    _check_unit(psi1, "psi1")
    _check_unit(psi2, "psi2")
    if (psi1.d, psi1.N) != (psi2.d, psi2.N):
        raise InvalidInput("states have different shapes")
    lhs = abs(subsystem_purity(psi1, S) - subsystem_purity(psi2, S))
    rhs = 4 * float(np.linalg.norm(psi1.amplitudes - psi2.amplitudes))
    return BoundCheck(lhs, rhs, lhs <= rhs + 1e-12)


@dataclass
class GapCheck:
    distance: float
    bound: float
    holds: bool
    energies: tuple[float, float]
    gap: float


def gap_closeness_bound(H, psi1: StateVector, psi2: StateVector) -> GapCheck:
    """Distance of two low-energy states of a gapped Hamiltonian with zero ground energy."""
    H = check_square_matrix(H, name="H")
    if not np.allclose(H, H.conj().T, atol=1e-12 * max(1.0, np.abs(H).max())):
        raise InvalidInput("H is not Hermitian")
    _check_unit(psi1, "psi1")
    _check_unit(psi2, "psi2")
    if H.shape[0] != psi1.amplitudes.size or psi1.amplitudes.size != psi2.amplitudes.size:
        raise InvalidInput("H and the states have mismatched dimensions")
    w, V = np.linalg.eigh(H)
    if abs(w[0]) > 1e-9:
        raise InvalidInput(f"ground energy must be 0, got {w[0]}")
    gap = float(w[1] - w[0]) if w.size > 1 else math.inf
    if gap <= 1e-9:
        raise InvalidInput("ground space is degenerate")
    psi0 = V[:, 0]
    aligned, energies = [], []
    for psi in (psi1, psi2):
        v = psi.amplitudes
        ov = np.vdot(psi0, v)
        if abs(ov) > 0:
            v = v * (abs(ov) / ov)
        aligned.append(v)
        energies.append(float(np.real(np.vdot(v, H @ v))))
    distance = float(np.linalg.norm(aligned[0] - aligned[1]))
    bound = 2 * math.sqrt(max(max(energies), 0.0) / gap)
    return GapCheck(distance, bound, distance <= bound + 1e-12, tuple(energies), gap)


# ---------------------------------------------------------------------------
# ergodicity


@dataclass
class ErgodicityReport:
    distances: np.ndarray  # [x, s-1]
    sigmas: list[np.ndarray]
    xi: float
    C: float
    r2: float
    exact_replacement: bool = False

    @property
    def separations(self) -> np.ndarray:
        return np.arange(1, self.distances.shape[1] + 1)


def _vec_identity(D: int) -> np.ndarray:
    return np.eye(D).reshape(-1, order="F")


def ergodicity_profile(chain: MPSChain, max_sep: int) -> ErgodicityReport:
    """Distances of channel products ``E_{x,x+s}`` from replacement channels."""
    max_sep = check_positive_int(max_sep, "max_sep")
    for n, s in enumerate(chain.sites):
        if s.shape[1] != s.shape[2]:
            raise InvalidInput(f"site {n + 1} does not have square bonds")
    if chain.boundary is not None:
        raise InvalidInput("ergodicity needs a closed (trace) chain")
    canon = left_canonical_chain(chain)
    Es = [transfer_matrix(s) for s in canon.sites]
    N = len(Es)
    dist = np.zeros((N, max_sep))
    sigmas = []
    for x in range(N):
        ring = np.eye(Es[x].shape[0], dtype=complex)
        for k in range(N):
            ring = ring @ Es[(x + k) % N]
        w, V = np.linalg.eig(ring)
        v = V[:, int(np.argmax(np.abs(w)))]
        D = canon.sites[x].shape[1]
        v = v / (_vec_identity(D) @ v)
        sigmas.append(v.reshape(D, D, order="F"))
        prod = np.eye(Es[x].shape[0], dtype=complex)
        for s in range(1, max_sep + 1):
            prod = prod @ Es[(x + s - 1) % N]
            Dy = canon.sites[(x + s) % N].shape[1]
            dist[x, s - 1] = nk.spectral_norm(prod - np.outer(v, _vec_identity(Dy)))
    seps = np.tile(np.arange(1, max_sep + 1), N)
    flat = dist.reshape(-1)
    keep = flat > 1e-12
    if keep.sum() < 2 or np.all(flat < 1e-14):
        return ErgodicityReport(dist, sigmas, 0.0, float(flat.max(initial=0.0)), 1.0, True)
    x, y = seps[keep].astype(float), np.log(flat[keep])
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (slope * x + icpt)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    xi = -1.0 / slope if slope < 0 else math.inf
    return ErgodicityReport(dist, sigmas, float(xi), float(np.exp(icpt)), r2)


# ---------------------------------------------------------------------------
# finite rank identity for block-injective states


def contiguous_cut_rank(psi: StateVector, R: int, tol: float | None = None) -> int:
    """Schmidt rank across the first ``R`` sites versus the rest."""
    return schmidt_spectrum(psi, Bipartition(tuple(range(R)), psi.N)).rank(tol)


def block_rank_prediction(dims) -> int:
    return int(sum(D * D for D in dims))


__all__ = [
    "Bipartition",
    "BoundCheck",
    "CertReport",
    "ErgodicityReport",
    "GapCheck",
    "Permutation",
    "RankCount",
    "SchmidtReport",
    "block_rank_prediction",
    "certify_mps_up",
    "comb_permutation",
    "comb_subset",
    "contiguous_cut_rank",
    "cut_errors",
    "ergodicity_profile",
    "gap_closeness_bound",
    "interleave_permutation",
    "permutation_family",
    "permute_state",
    "purity_gap_bound_check",
    "rank_counting_probe",
    "schmidt_spectrum",
    "subsystem_purity",
]
