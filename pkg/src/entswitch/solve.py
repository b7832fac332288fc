"""Stationary distribution of the chain truncated at a per-slot cap B.

An arrival that would push a slot above ``B`` is blocked and becomes a
self-loop, so each row of the truncated kernel still sums to one.  The
uniformized chain has period ``n`` (arrivals add one qubit, swaps remove
``n - 1``), so plain power iteration oscillates.  We iterate the lazy
kernel ``(I + P) / 2`` instead, which has the same stationary vector.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, List, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from .errors import CapTooSmall, InvalidParams, NoConvergence, UnstableRegime
from .model import SwitchParams

MAX_DIM_LARGE_CAP = 4
LARGE_CAP = 30


@dataclass(frozen=True)
class TruncatedChain:
    """Kernel on ``{0..B}^(n-1)`` with states indexed in mixed radix ``B + 1``.

    Slot 0 is the most significant digit, so ``states`` is in
    lexicographic order.
    """

    params: SwitchParams
    B: int
    states: np.ndarray
    P: sp.csr_matrix

    @property
    def size(self) -> int:
        return self.states.shape[0]

    def index(self, x: Sequence[int]) -> int:
        idx = 0
        for v in x:
            if not 0 <= v <= self.B:
                raise InvalidParams(f"state {tuple(x)!r} lies outside the cap B={self.B}")
            idx = idx * (self.B + 1) + int(v)
        return idx


def _all_states(d: int, B: int) -> np.ndarray:
    grids = np.meshgrid(*([np.arange(B + 1)] * d), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1).astype(np.int64)


def _kernel_entries(k: int, n: int, X: np.ndarray):
    """Yield ``(row_mask, slot_shift, prob)`` blocks of the untruncated kernel.

    ``slot_shift`` is a slot index for an arrival or ``-1`` for the swap
    move ``x - 1``; ``prob`` is an array over the rows in ``row_mask``.
    """
    d = n - 1
    zeros = (X == 0).sum(axis=1)
    r0 = zeros == 0
    yield r0, -1, np.full(r0.sum(), (k - d) / k)
    mid = (zeros > 0) & (zeros < d)
    empty = zeros == d
    with np.errstate(divide="ignore", invalid="ignore"):
        p_zero = (k - (d - zeros)) / (k * zeros)
    for l in range(d):
        p = np.where(r0, 1.0 / k, 0.0)
        p = np.where(mid, np.where(X[:, l] == 0, p_zero, 1.0 / k), p)
        p = np.where(empty, 1.0 / d, p)
        yield np.ones(len(X), dtype=bool), l, p


def build(params: SwitchParams, B: int) -> TruncatedChain:
    """Sparse kernel of the chain with arrivals above ``B`` turned into self-loops."""
    k, n = params.k, params.n
    d = n - 1
    if k <= n:
        raise UnstableRegime(f"unstable: k must exceed n (k={k}, n={n})")
    if B < n - 1:
        raise CapTooSmall(f"cap B={B} is below n-1={n - 1}")
    if d > MAX_DIM_LARGE_CAP and B > LARGE_CAP:
        raise InvalidParams(
            f"refusing {B + 1}^{d} states: caps above {LARGE_CAP} need n-1 <= {MAX_DIM_LARGE_CAP}")
    X = _all_states(d, B)
    radix = (B + 1) ** np.arange(d - 1, -1, -1)
    idx = X @ radix
    rows, cols, vals = [], [], []
    for mask, slot, p in _kernel_entries(k, n, X):
        src = idx[mask]
        if slot < 0:
            dst = src - radix.sum()
        else:
            blocked = X[mask, slot] == B
            dst = np.where(blocked, src, src + radix[slot])
        keep = p > 0
        rows.append(src[keep])
        cols.append(dst[keep])
        vals.append(p[keep])
    N = len(X)
    P = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(N, N))
    P.sum_duplicates()
    return TruncatedChain(params, B, X, P)


@dataclass(frozen=True)
class StationaryResult:
    pi: np.ndarray
    residual: float
    pi_R0: float
    expected_qubits: float
    aggregate_A: float
    aggregate_B: float
    B_used: int
    boundary_mass: float
    sweeps: int


def aggregates(chain: TruncatedChain, pi: np.ndarray) -> Tuple[float, float, float, float, float]:
    """``(pi_R0, E|x|, A, B, boundary_mass)`` under ``pi``."""
    X = chain.states
    d = X.shape[1]
    size = X.sum(axis=1)
    zeros = (X == 0).sum(axis=1)
    r0 = zeros == 0
    mid = (zeros >= 1) & (zeros <= d - 1)
    A = float(pi[r0] @ size[r0])
    Bagg = float(pi[mid] @ size[mid])
    edge = (X == chain.B).any(axis=1)
    return float(pi[r0].sum()), A + Bagg, A, Bagg, float(pi[edge].sum())


def stationary(chain: TruncatedChain, tol: float = 1e-12, max_sweeps: int = 1_000_000,
               check_every: int = 50) -> StationaryResult:
    """Stationary vector by power iteration on the lazy kernel.

    Stops once ``||pi P - pi||_1 <= tol`` for the truncated kernel ``P``.
    """
    if not tol > 0:
        raise InvalidParams(f"tol must be positive, got {tol}")
    PT = chain.P.T.tocsr()
    pi = np.full(chain.size, 1.0 / chain.size)
    sweeps = 0
    while True:
        for _ in range(check_every):
            pi = 0.5 * (pi + PT @ pi)
        sweeps += check_every
        pi /= pi.sum()
        residual = float(np.abs(PT @ pi - pi).sum())
        if residual <= tol:
            break
        if sweeps >= max_sweeps:
            raise NoConvergence(f"residual {residual:.3e} above {tol:.3e} after {sweeps} sweeps")
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()
    pr0, eq, A, Bagg, edge = aggregates(chain, pi)
    return StationaryResult(pi, residual, pr0, eq, A, Bagg, chain.B, edge, sweeps)


def stationary_direct(chain: TruncatedChain) -> np.ndarray:
    """Stationary vector from a sparse linear solve (independent check on the iteration)."""
    from scipy.sparse.linalg import spsolve

    N = chain.size
    M = (chain.P.T - sp.identity(N, format="csr")).tolil()
    M[0, :] = 1.0
    rhs = np.zeros(N)
    rhs[0] = 1.0
    pi = spsolve(M.tocsc(), rhs)
    return pi / pi.sum()


def balance_residual(chain: TruncatedChain, pi: np.ndarray,
                     test_fn: Callable[[np.ndarray], np.ndarray]) -> float:
    """``|sum_x pi(x) E[V(X_1) - V(x) | X_0 = x]|`` with the untruncated kernel.

    ``test_fn`` maps an ``(m, n-1)`` array of states to ``m`` values.  The
    stationary balance makes this vanish for the infinite chain; on the
    truncated support the blocked arrivals leave a residual that shrinks
    with ``B``.
    """
    k, n = chain.params.k, chain.params.n
    X = chain.states
    V0 = np.asarray(test_fn(X), dtype=float)
    total = 0.0
    for mask, slot, p in _kernel_entries(k, n, X):
        Y = X[mask].copy()
        if slot < 0:
            Y -= 1
        else:
            Y[:, slot] += 1
        total += float(np.sum(pi[mask] * p * (np.asarray(test_fn(Y), dtype=float) - V0[mask])))
    return abs(total)


@dataclass(frozen=True)
class SweepRow:
    B: int
    pi_R0: float
    expected_qubits: float
    boundary_mass: float
    pi_R0_error: float
    expected_qubits_error: float
    residual: float


def convergence_sweep(params: SwitchParams, B_list: Sequence[int], tol: float = 1e-12) -> List[SweepRow]:
    """Solve at each cap and report the distance to the closed forms."""
    from .analytic import expected_qubits, pi_R0

    B_list = list(B_list)
    if any(b >= c for b, c in zip(B_list, B_list[1:])):
        raise InvalidParams("B_list must be strictly increasing")
    target_r0 = pi_R0(params.k, params.n)
    target_eq = expected_qubits(params.k, params.n)
    rows = []
    for B in B_list:
        res = stationary(build(params, B), tol)
        rows.append(SweepRow(B, res.pi_R0, res.expected_qubits, res.boundary_mass,
                             abs(res.pi_R0 - target_r0), abs(res.expected_qubits - target_eq),
                             res.residual))
    return rows


def pi_rows(chain: TruncatedChain, pi: np.ndarray) -> Iterator[Tuple[int, ...]]:
    """``(x_1, ..., x_{n-1}, probability)`` rows for CSV export."""
    for x, p in zip(chain.states, pi):
        yield tuple(int(v) for v in x) + (float(p),)
