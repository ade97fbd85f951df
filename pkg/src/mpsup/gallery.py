"""Named states, their non-TI MPS constructions and small rank experiments."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidInput
from .mps import MPSChain, StateVector, TIMPS, materialize
from .permlab import Bipartition, schmidt_spectrum
from .validation import check_amplitude_count, check_positive_int, check_random_state

# ruff: noqa: N802, N803, N806


@dataclass(frozen=True)
class WeightStateSpec:
    a: int
    delta: int
    N: int

    def __post_init__(self):
        if self.delta < 1 or self.N < 1:
            raise InvalidInput(f"need delta >= 1 and N >= 1, got {self.delta}, {self.N}")
        if not 0 <= self.a <= self.N * self.delta:
            raise InvalidInput(f"weight a={self.a} outside [0, {self.N * self.delta}]")

    @property
    def d(self) -> int:
        return self.delta + 1


def _digit_sums(d: int, N: int) -> np.ndarray:
    idx = np.arange(d**N)
    total = np.zeros_like(idx)
    for _ in range(N):
        idx, r = np.divmod(idx, d)
        total += r
    return total


def weight_state(spec: WeightStateSpec, normalized: bool = False) -> StateVector:
    """Uniform superposition of strings over ``0..delta`` summing to ``a``."""
    check_amplitude_count(spec.d, spec.N)
    amps = (_digit_sums(spec.d, spec.N) == spec.a).astype(complex)
    psi = StateVector(spec.d, spec.N, amps)
    return psi.normalized() if normalized else psi


def w_state(N: int, normalized: bool = False) -> StateVector:
    return weight_state(WeightStateSpec(1, 1, N), normalized)


def dicke_state(n: int, N: int, normalized: bool = False) -> StateVector:
    return weight_state(WeightStateSpec(n, 1, N), normalized)


def weight_mps(a: int, delta: int, N: int) -> MPSChain:
    """Chain with ``A^i = sum_j |j><j+i|`` on ``D = a+1`` and boundary ``|a><0|``."""
    WeightStateSpec(a, delta, N)
    D = a + 1
    A = np.zeros((delta + 1, D, D), dtype=complex)
    for i in range(delta + 1):
        for j in range(D - i):
            A[i, j, j + i] = 1
    X = np.zeros((D, D), dtype=complex)
    X[a, 0] = 1
    return MPSChain([A] * N, X)


def dicke_mps(n: int, N: int) -> MPSChain:
    """Bond dimension ``min(n, N-n) + 1``; large ``n`` uses the 0/1-flipped construction."""
    N = check_positive_int(N, "N")
    if not 0 <= n <= N:
        raise InvalidInput(f"need 0 <= n <= N, got n={n}, N={N}")
    if 2 * n <= N:
        return weight_mps(n, 1, N)
    chain = weight_mps(N - n, 1, N)
    return MPSChain([s[::-1] for s in chain.sites], chain.boundary)


def ghz(d: int, N: int, normalized: bool = False) -> tuple[StateVector, TIMPS]:
    d = check_positive_int(d, "d")
    N = check_positive_int(N, "N")
    A = np.zeros((d, d, d), dtype=complex)
    for i in range(d):
        A[i, i, i] = 1
    mps = TIMPS(A)
    psi = materialize(mps, N)
    return (psi.normalized() if normalized else psi), mps


def neel_tensor() -> np.ndarray:
    """Period-2 tensor whose states are ``|1010...> + |0101...>``."""
    return np.array([[[0, 0], [1, 0]], [[0, 1], [0, 0]]], dtype=complex)


# ---------------------------------------------------------------------------
# border rank of W


@dataclass
class BorderResult:
    approx: StateVector
    error: float
    closed_form: float


def border_w_closed_form(N: int, eps: float) -> float:
    return math.sqrt(sum(math.comb(N, w) * eps ** (2 * (w - 1)) for w in range(3, N + 1, 2)))


def border_w(N: int, eps: float) -> BorderResult:
    """Two-term product approximant of the unnormalized W state."""
    N = check_positive_int(N, "N", 2)
    if not eps > 0:
        raise InvalidInput(f"eps must be positive, got {eps}")
    check_amplitude_count(2, N)
    plus = np.array([1.0, eps])
    minus = np.array([1.0, -eps])
    p = m = np.ones(1)
    for _ in range(N):
        p, m = np.kron(p, plus), np.kron(m, minus)
    approx = StateVector(2, N, ((p - m) / (2 * eps)).astype(complex))
    err = float(np.linalg.norm(approx.amplitudes - w_state(N).amplitudes))
    return BorderResult(approx, err, border_w_closed_form(N, eps))


# ---------------------------------------------------------------------------
# CP rank by alternating least squares


@dataclass
class CPProbeResult:
    r: int
    residuals: list[float]
    factors: list[np.ndarray] = field(repr=False, default_factory=list)

    @property
    def best_residual(self) -> float:
        return min(self.residuals)

    def success(self, tol: float) -> bool:
        return self.best_residual <= tol


def _khatri_rao(mats: list[np.ndarray]) -> np.ndarray:
    out = mats[0]
    for M in mats[1:]:
        out = np.einsum("ir,jr->ijr", out, M).reshape(-1, M.shape[1])
    return out


def _cp_full(factors: list[np.ndarray]) -> np.ndarray:
    return _khatri_rao(factors).sum(axis=1)


def _als(T: np.ndarray, r: int, rng, max_iter: int, tol: float):
    N, d = T.ndim, T.shape[0]
    tnorm = np.linalg.norm(T)
    U = [rng.normal(size=(d, r)) + 1j * rng.normal(size=(d, r)) for _ in range(N)]
    prev = math.inf
    res = prev
    for _ in range(max_iter):
        for j in range(N):
            others = [U[k] for k in range(N) if k != j]
            K = _khatri_rao(others)
            Tj = np.moveaxis(T, j, 0).reshape(d, -1)
            U[j] = np.linalg.lstsq(K, Tj.T, rcond=None)[0].T
        res = float(np.linalg.norm(_cp_full(U) - T.reshape(-1)) / tnorm)
        if abs(prev - res) < tol:
            break
        prev = res
    return res, U


def cp_rank_probe(
    psi: StateVector, r: int, restarts: int = 10, seed=0, max_iter: int = 500, tol: float = 1e-12
) -> CPProbeResult:
    """Best relative residual of a rank-``r`` CP fit over random restarts."""
    r = check_positive_int(r, "r")
    restarts = check_positive_int(restarts, "restarts")
    if psi.N < 2:
        raise InvalidInput("need at least two sites")
    check_amplitude_count(psi.d, psi.N, cap=3**8)
    if psi.norm == 0:
        raise InvalidInput("zero state")
    rng = check_random_state(seed)
    T = psi.tensor()
    best, residuals = None, []
    for _ in range(restarts):
        res, U = _als(T, r, rng, max_iter, tol)
        residuals.append(res)
        if best is None or res < best[0]:
            best = (res, U)
    return CPProbeResult(r, residuals, best[1])


# ---------------------------------------------------------------------------
# rank table


PAPER = "[PAPER]"
DERIVED = "[DERIVED]"


@dataclass
class RankTable:
    N: int
    rows: list[dict] = field(default_factory=list)

    def add(self, state: str, quantity: str, value, provenance: str) -> None:
        self.rows.append({"state": state, "quantity": quantity, "value": value, "provenance": provenance})

    def value(self, state: str, quantity: str):
        for row in self.rows:
            if row["state"] == state and row["quantity"] == quantity:
                return row["value"]
        raise KeyError((state, quantity))

    def states(self) -> list[str]:
        return list(dict.fromkeys(row["state"] for row in self.rows))


def _balanced_rank(psi: StateVector) -> int:
    return schmidt_spectrum(psi, Bipartition(tuple(range(psi.N // 2)), psi.N)).rank()


def table2_report(N: int, als_max_N: int = 4, seed=0) -> RankTable:
    """Measured bond dimensions and cut ranks beside reference tensor and border ranks."""
    N = check_positive_int(N, "N", 2)
    table = RankTable(N)

    def measured(name: str, chain: MPSChain, psi: StateVector):
        table.add(name, "D", max(chain.bond_dims), DERIVED)
        table.add(name, "schmidt_rank", _balanced_rank(psi), DERIVED)

    w = w_state(N)
    measured("W", weight_mps(1, 1, N), w)
    table.add("W", "D_ref", 2, PAPER)
    table.add("W", "rk_ref", N, PAPER)
    table.add("W", "border_rk_ref", 2, PAPER)
    if N <= als_max_N:
        table.add("W", "als_residual_r2", cp_rank_probe(w, 2, 5, seed).best_residual, DERIVED)
        table.add("W", "als_residual_rN", cp_rank_probe(w, N, 5, seed).best_residual, DERIVED)

    for n in range(1, N):
        name = f"D_{n}"
        measured(name, dicke_mps(n, N), dicke_state(n, N))
        table.add(name, "D_ref", min(n, N - n) + 1, PAPER)
        table.add(name, "rk_ref", max(n, N - n) + 1, PAPER)
        table.add(name, "border_rk_ref", min(n, N - n) + 1, PAPER)

    for a in range(1, 4):
        if (a + 1) ** N > 2**24:
            break
        name = f"chi_{a}"
        measured(name, weight_mps(a, a, N), weight_state(WeightStateSpec(a, a, N)))
        table.add(name, "D_ref", a + 1, PAPER)
        table.add(name, "rk_ref", f">={N + 1}", PAPER)
        table.add(name, "border_rk_ref", a + 1, PAPER)
    return table


__all__ = [
    "BorderResult",
    "CPProbeResult",
    "RankTable",
    "WeightStateSpec",
    "border_w",
    "border_w_closed_form",
    "cp_rank_probe",
    "dicke_mps",
    "dicke_state",
    "ghz",
    "neel_tensor",
    "table2_report",
    "w_state",
    "weight_mps",
    "weight_state",
]
