"""Closed-form performance formulas and stability predicates.

Integer-input formulas are evaluated with :class:`fractions.Fraction` and
converted to float only on return, so identities between them hold to
the last bit.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, List, Optional, Sequence

from .errors import IndexOutOfRange, InvalidParams, UnstableRegime
from .model import SwitchParams


class Stability(enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"


def _require_stable(k: int, n: int, min_n: int = 2) -> None:
    if n < min_n:
        raise InvalidParams(f"n must be at least {min_n}, got {n}")
    if k <= n:
        raise UnstableRegime(f"unstable: k must exceed n (k={k}, n={n})")


def capacity_exact(params: SwitchParams) -> Fraction:
    _require_stable(params.k, params.n)
    return Fraction(params.q) * Fraction(params.mu) * params.k / params.n


def capacity(params: SwitchParams) -> float:
    """Successful swaps per unit time, ``q * mu * k / n``."""
    return float(capacity_exact(params))


def expected_qubits_exact(k: int, n: int) -> Fraction:
    _require_stable(k, n)
    return Fraction(k * (n - 1), 2 * (k - n))


def expected_qubits(k: int, n: int) -> float:
    """Mean number of stored qubits in steady state, ``k(n-1) / (2(k-n))``.

    Accepts ``n = 2`` so the full heatmap grid can be produced.
    """
    return float(expected_qubits_exact(k, n))


def pi_R0_exact(k: int, n: int) -> Fraction:
    _require_stable(k, n)
    return Fraction(k, n * (k - (n - 1)))


def pi_R0(k: int, n: int) -> float:
    """Stationary mass of the swap-ready region R_0."""
    return float(pi_R0_exact(k, n))


def aggregates_AB_exact(k: int, n: int) -> tuple[Fraction, Fraction]:
    _require_stable(k, n)
    a = Fraction(k * (n - 1) * (2 * k - n), 2 * n * (k - n) * (k - (n - 1)))
    b = Fraction(k * (n - 1) * (n - 2), 2 * n * (k - (n - 1)))
    return a, b


def aggregates_AB(k: int, n: int) -> tuple[float, float]:
    """Split of the mean occupancy into its R_0 part ``A`` and R_1..R_{n-2} part ``B``."""
    a, b = aggregates_AB_exact(k, n)
    return float(a), float(b)


def stability(k: int, n: int) -> Stability:
    if n < 3 or k < n:
        raise InvalidParams(f"stability is defined for 3 <= n <= k, got k={k}, n={n}")
    return Stability.STABLE if k > n else Stability.UNSTABLE


def capacity_upper_bound_heterogeneous(rates: Sequence[float], n: int, q: float) -> float:
    """Capacity bound for unequal link rates: every link is promoted to the fastest one."""
    rates = list(rates)
    if not rates:
        raise InvalidParams("rate list must be non-empty")
    if any(r <= 0 for r in rates):
        raise InvalidParams("link rates must be positive")
    if n < 3:
        raise InvalidParams(f"n must be at least 3, got {n}")
    if not 0.0 <= q <= 1.0:
        raise InvalidParams(f"q must lie in [0, 1], got {q}")
    return q * len(rates) * max(rates) / n


def psi_j_exact(k: int, n: int, j: int) -> Fraction:
    if k < n:
        raise InvalidParams(f"need k >= n, got k={k}, n={n}")
    if not 1 <= j <= n - 1:
        raise IndexOutOfRange(f"j must lie in [1, {n - 1}], got {j}")
    return sum((Fraction(k, k - n + l + 1) for l in range(1, j + 1)), Fraction(0))


def psi_j(k: int, n: int, j: int) -> float:
    """Expected number of chain steps spent outside S after entering it in S_j.

    The sojourn is a sum of geometric phases, one per empty slot, with
    success probabilities ``(k - n + l + 1) / k``.  The largest value,
    ``psi_j(k, n, n - 1) + n - 1``, bounds the gap between the chain and
    its embedded version.
    """
    return float(psi_j_exact(k, n, j))


@dataclass(frozen=True)
class AnalyticReport:
    capacity: float
    expected_qubits: float
    pi_R0: float
    aggregate_A: float
    aggregate_B: float
    stable: bool


def report(params: SwitchParams) -> AnalyticReport:
    a, b = aggregates_AB(params.k, params.n)
    return AnalyticReport(
        capacity=capacity(params),
        expected_qubits=expected_qubits(params.k, params.n),
        pi_R0=pi_R0(params.k, params.n),
        aggregate_A=a,
        aggregate_B=b,
        stable=stability(params.k, params.n) is Stability.STABLE,
    )


@dataclass(frozen=True)
class HeatmapRow:
    k: int
    n: int
    expected_qubits: float
    log10_expected_qubits: float


def _default_n_rule(k: int) -> Iterable[int]:
    return range(2, k)


def heatmap_grid(
    k_range: Iterable[int] = range(3, 101),
    n_rule: Optional[Callable[[int], Iterable[int]]] = None,
) -> List[HeatmapRow]:
    """Occupancy grid over ``(k, n)``; by default k = 3..100 and n = 2..k-1."""
    n_rule = n_rule or _default_n_rule
    rows = []
    for k in k_range:
        for n in n_rule(k):
            if not 2 <= n <= k - 1:
                raise InvalidParams(f"grid point needs 2 <= n <= k-1, got k={k}, n={n}")
            eq = expected_qubits_exact(k, n)
            rows.append(HeatmapRow(k, n, float(eq), math.log10(eq)))
    return rows
