"""Combinatorial series behind the stability and occupancy analysis.

Infinite sums over nonnegative integer vectors are evaluated by grouping
terms by their total ``N = |r|``.  For a product-form summand the group
sum ``sum_{|r|=N} N!/prod(r_i!) prod f_i(r_i) z^N`` is a binomial
convolution of one sequence per coordinate, so a sum over millions of
vectors reduces to a handful of O(N^2) array operations.  Each truncated
sum is reported together with a geometric majorant of everything beyond
the cut; a value whose majorant exceeds the requested tolerance is never
returned.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import gammaln

from .errors import (
    AllZero,
    DegreeTooHigh,
    DivergentRegime,
    IndexOutOfRange,
    InvalidParams,
    NotInEj,
    RecursionDomain,
    TailBoundViolated,
)

MAX_TOTAL_CAP = 1000
EXACT_PATH_LIMIT = 150


class GKind(enum.Enum):
    """Weight applied to the last coordinate of an F-series."""

    G1 = 1  # g(i) = 1
    G2 = 2  # g(i) = i
    G3 = 3  # g(i) = i - 1

    def __call__(self, i):
        if self is GKind.G1:
            return np.ones_like(i) if isinstance(i, np.ndarray) else 1
        if self is GKind.G2:
            return i
        return i - 1

    @property
    def degree(self) -> int:
        return 0 if self is GKind.G1 else 1


@dataclass(frozen=True)
class SeriesTruncation:
    """Where to cut an infinite sum and how much tail is tolerated.

    ``max_total=None`` picks the smallest cut (up to ``MAX_TOTAL_CAP``)
    whose certified tail is below ``tail_tol``.
    """

    max_total: Optional[int] = None
    tail_tol: float = 1e-10

    def __post_init__(self):
        if self.max_total is not None and self.max_total < 1:
            raise InvalidParams(f"max_total must be >= 1, got {self.max_total}")
        if not self.tail_tol > 0:
            raise InvalidParams(f"tail_tol must be positive, got {self.tail_tol}")


DEFAULT_TRUNCATION = SeriesTruncation()


@dataclass(frozen=True)
class SeriesValue:
    value: float
    tail_bound: float
    max_total: int


# ---------------------------------------------------------------------------
# exact path counts


def multinomial_paths(counts: Sequence[int]) -> int:
    """Number of monotone lattice paths from the origin to ``counts``."""
    counts = [int(c) for c in counts]
    if any(c < 0 for c in counts):
        raise InvalidParams(f"counts must be nonnegative: {counts}")
    if not any(counts):
        raise AllZero("at least one count must be positive")
    out = 1
    running = 0
    for c in counts:
        running += c
        out *= math.comb(running, c)
    return out


# ---------------------------------------------------------------------------
# tail majorants


def _majorant_tail(N0: int, rising: int, degree: int, ratio: float, scale: float = 1.0) -> float:
    """Bound on ``sum_{N >= N0} scale * (N+1)...(N+rising) * N^degree * ratio^N``.

    Consecutive-term ratios of the majorant decrease in ``N``, so the tail
    is dominated by a geometric series started at ``N0``.
    """
    if ratio <= 0.0:
        return 0.0
    N = max(N0, 1)
    step = ratio * ((N + 1 + rising) / (N + 1)) * ((N + 1) / N) ** degree
    if step >= 1.0:
        return math.inf
    log_first = (
        math.log(scale)
        + sum(math.log(N + i) for i in range(1, rising + 1))
        + degree * math.log(N)
        + N * math.log(ratio)
    )
    return math.exp(log_first) / (1.0 - step)


def _choose_cut(trunc: SeriesTruncation, rising: int, degree: int, ratio: float, scale: float = 1.0) -> Tuple[int, float]:
    if trunc.max_total is not None:
        cut = trunc.max_total
        return cut, _majorant_tail(cut + 1, rising, degree, ratio, scale)
    for cut in range(8, MAX_TOTAL_CAP + 1, 8):
        tail = _majorant_tail(cut + 1, rising, degree, ratio, scale)
        if tail <= trunc.tail_tol:
            return cut, tail
    cut = MAX_TOTAL_CAP
    return cut, _majorant_tail(cut + 1, rising, degree, ratio, scale)


def _certify(value: float, tail: float, cut: int, trunc: SeriesTruncation) -> SeriesValue:
    if not tail <= trunc.tail_tol:
        raise TailBoundViolated(
            f"tail bound {tail:.3e} exceeds tolerance {trunc.tail_tol:.3e} at max_total={cut}"
        )
    return SeriesValue(float(value), float(tail), cut)


# ---------------------------------------------------------------------------
# grouped (exponential generating function) sums


@lru_cache(maxsize=8)
def _pascal(N: int) -> np.ndarray:
    P = np.zeros((N + 1, N + 1))
    P[:, 0] = 1.0
    for row in range(1, N + 1):
        P[row, 1:row + 1] = P[row - 1, :row] + P[row - 1, 1:row + 1]
    return P


@lru_cache(maxsize=8)
def _lag_index(N: int) -> np.ndarray:
    idx = np.arange(N + 1)[:, None] - np.arange(N + 1)[None, :]
    idx[idx < 0] = N + 1
    return idx


def _binomial_convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``c[N] = sum_m C(N, m) a[m] b[N - m]``."""
    N = len(a) - 1
    b_ext = np.append(b, 0.0)
    return (_pascal(N) * a[None, :] * b_ext[_lag_index(N)]).sum(axis=1)


def _coordinate_sequence(N: int, z: float, lower: int = 0, exact_one: bool = False,
                         power: int = 0, g: Optional[GKind] = None) -> np.ndarray:
    r = np.arange(N + 1, dtype=float)
    seq = z ** r
    if exact_one:
        mask = r == 1
    else:
        mask = r >= lower
    seq = np.where(mask, seq, 0.0)
    if power:
        seq = seq * r ** power
    if g is not None:
        seq = seq * g(r)
    return seq


def _product_sum(seqs: Iterable[np.ndarray]) -> np.ndarray:
    seqs = list(seqs)
    out = seqs[0]
    for s in seqs[1:]:
        out = _binomial_convolve(out, s)
    return out


def _rising(N: np.ndarray, L: int) -> np.ndarray:
    """``(L + N)! / N!`` evaluated elementwise."""
    out = np.ones_like(N, dtype=float)
    for i in range(1, L + 1):
        out = out * (N + i)
    return out


# ---------------------------------------------------------------------------
# the F_m / G_m family


def _check_F_domain(m: int, J: int, L: int, k: int) -> None:
    if J < 1 or not 0 <= m <= J or L < 0:
        raise InvalidParams(f"need 0 <= m <= J, J >= 1, L >= 0; got m={m}, J={J}, L={L}")
    if k <= J:
        raise DivergentRegime(f"series diverges unless k > J (k={k}, J={J})")


def F_series(g: GKind, m: int, J: int, L: int, k: int,
             trunc: SeriesTruncation = DEFAULT_TRUNCATION) -> SeriesValue:
    """Truncated ``F_m(g; J, L)`` with its tail certificate.

    The first ``m`` summation indices are restricted to values >= 2, the
    remaining ones to values >= 0, and ``g`` weights the last index.
    """
    if J == 0 and m == 0 and g is GKind.G1 and L >= 0:
        # no summation indices: the single empty term equals L!
        return SeriesValue(float(math.factorial(L)), 0.0, 0)
    _check_F_domain(m, J, L, k)
    z = 1.0 / k
    cut, tail = _choose_cut(trunc, L, g.degree, J * z)
    seqs = []
    for i in range(1, J + 1):
        seqs.append(_coordinate_sequence(cut, z, lower=2 if i <= m else 0,
                                         g=g if i == J else None))
    grouped = _product_sum(seqs)
    value = float(np.sum(_rising(np.arange(cut + 1), L) * grouped))
    return _certify(value, tail, cut, trunc)


def F_direct(g: GKind, m: int, J: int, L: int, k: int,
             trunc: SeriesTruncation = DEFAULT_TRUNCATION) -> float:
    return F_series(g, m, J, L, k, trunc).value


def F0_closed_exact(g: GKind, J: int, L: int, k: int) -> Fraction:
    if J < 0 or L < 0:
        raise InvalidParams(f"need J >= 0 and L >= 0, got J={J}, L={L}")
    if k <= J:
        raise DivergentRegime(f"series diverges unless k > J (k={k}, J={J})")
    d = k - J
    if g is GKind.G1:
        return Fraction(math.factorial(L) * k ** (L + 1), d ** (L + 1))
    if g is GKind.G2:
        return Fraction(math.factorial(L + 1) * k ** (L + 1), d ** (L + 2))
    return Fraction(-math.factorial(L) * k ** (L + 1) * (d - L - 1), d ** (L + 2))


def F0_closed(g: GKind, J: int, L: int, k: int) -> float:
    """Closed form of ``F_0(g; J, L)`` for the three standard weights."""
    return float(F0_closed_exact(g, J, L, k))


@lru_cache(maxsize=None)
def _F_recursive(g: GKind, m: int, J: int, L: int, k: int) -> Fraction:
    if m == 0:
        return F0_closed_exact(g, J, L, k)
    return (_F_recursive(g, m - 1, J, L, k)
            - _F_recursive(g, m - 1, J - 1, L, k)
            - Fraction(1, k) * _F_recursive(g, m - 1, J - 1, L + 1, k))


def F_via_recursion_exact(g: GKind, m: int, J: int, L: int, k: int) -> Fraction:
    if k <= J:
        raise DivergentRegime(f"series diverges unless k > J (k={k}, J={J})")
    if L < 0 or m < 0:
        raise InvalidParams(f"need m >= 0 and L >= 0, got m={m}, L={L}")
    if m == J and g is not GKind.G1:
        raise RecursionDomain("the recursion reaches m = J only for the constant weight")
    if m > J:
        raise RecursionDomain(f"need m <= J, got m={m}, J={J}")
    return _F_recursive(g, m, J, L, k)


def F_via_recursion(g: GKind, m: int, J: int, L: int, k: int) -> float:
    """``F_m`` obtained by peeling constrained indices down to closed F_0 forms."""
    return float(F_via_recursion_exact(g, m, J, L, k))


def _check_G_domain(g: GKind, a: int, n: int, m: int, k: int) -> None:
    if a < -1:
        raise InvalidParams(f"a must be >= -1, got {a}")
    top = n - 1 if g is GKind.G1 else n - 2
    if not 1 <= m <= top:
        raise RecursionDomain(f"need 1 <= m <= {top} for {g.name}, got m={m}")
    if k <= n - 2:
        raise DivergentRegime(f"need k > n - 2 (k={k}, n={n})")


def G_direct(g: GKind, a: int, n: int, m: int, k: int,
             trunc: SeriesTruncation = DEFAULT_TRUNCATION) -> float:
    """``G_m(g; a, n)`` from its defining sum of truncated F-series."""
    _check_G_domain(g, a, n, m, k)
    total = 0.0
    for l in range(1, m + 1):
        f = F_series(g, m - l, n - l - 1, l + a, k, trunc).value
        total += math.comb(m, l) * l / k ** l * f
    return total


def G_closed_exact(g: GKind, a: int, n: int, m: int, k: int) -> Fraction:
    _check_G_domain(g, a, n, m, k)
    total = Fraction(0)
    for l in range(1, m + 1):
        total += math.comb(m, l) * (-1) ** (l + 1) * l * F0_closed_exact(g, n - l - 1, 1 + a, k)
    return total / k


def G_closed(g: GKind, a: int, n: int, m: int, k: int) -> float:
    """Alternating closed form of ``G_m`` in terms of F_0 only."""
    return float(G_closed_exact(g, a, n, m, k))


# ---------------------------------------------------------------------------
# polynomial / generating-function identities


def alternating_binomial_residual(poly_coeffs: Sequence[float], n: int):
    """``sum_{i=0}^{n} C(n, i) (-1)^i P(i)`` for ``P`` given by ascending coefficients.

    Integer coefficients give an exact integer result.
    """
    coeffs = list(poly_coeffs)
    degree = max((d for d, c in enumerate(coeffs) if c != 0), default=-1)
    if degree >= n:
        raise DegreeTooHigh(f"polynomial degree {degree} must be below n={n}")
    exact = all(isinstance(c, (int, Fraction)) for c in coeffs)
    total = 0 if exact else 0.0
    for i in range(n + 1):
        p = sum(c * i ** d for d, c in enumerate(coeffs))
        total += math.comb(n, i) * (-1) ** i * p
    return total


IDENTITY_NAMES = ("sum", "first_moment", "shifted_moment", "second_moment", "cross_moment")


def generating_identity_pairs(J: int, L: int, z: float,
                              trunc: SeriesTruncation = DEFAULT_TRUNCATION) -> List[Tuple[float, float]]:
    """``(truncated sum, closed form)`` for the five identities, in :data:`IDENTITY_NAMES` order.

    The cross moment needs two distinct coordinates; for ``J = 1`` its
    pair is ``(0.0, 0.0)``.
    """
    if J < 1 or L < 0 or z < 0:
        raise InvalidParams(f"need J >= 1, L >= 0, z >= 0; got J={J}, L={L}, z={z}")
    if J * z >= 1:
        raise DivergentRegime(f"J*z = {J * z} must be < 1")
    cut, tail = _choose_cut(trunc, L, 2, J * z)
    _certify(0.0, tail, cut, trunc)
    N = np.arange(cut + 1)
    rising = _rising(N, L)

    def lhs(last_power: int = 0, shift: bool = False, cross: bool = False) -> float:
        seqs = [_coordinate_sequence(cut, z) for _ in range(J)]
        last = _coordinate_sequence(cut, z, power=last_power)
        if shift:
            last = last - _coordinate_sequence(cut, z)
        seqs[-1] = last
        if cross:
            seqs[0] = _coordinate_sequence(cut, z, power=1)
        return float(np.sum(rising * _product_sum(seqs)))

    w = 1.0 - J * z
    fL = math.factorial(L)
    closed = [
        fL / w ** (L + 1),
        math.factorial(L + 1) * z / w ** (L + 2),
        fL * ((J + L + 1) * z - 1) / w ** (L + 2),
        math.factorial(L + 1) * ((L + 2 - J) * z + 1) * z / w ** (L + 3),
        math.factorial(L + 2) * z ** 2 / w ** (L + 3),
    ]
    sums = [lhs(), lhs(1), lhs(1, shift=True), lhs(2)]
    pairs = list(zip(sums, closed[:4]))
    pairs.append((lhs(1, cross=True), closed[4]) if J >= 2 else (0.0, 0.0))
    return pairs


def generating_identity_residuals(J: int, L: int, z: float,
                                  trunc: SeriesTruncation = DEFAULT_TRUNCATION) -> List[float]:
    """Absolute residuals of the five negative-multinomial identities at ``z_i = z``.

    Order follows :data:`IDENTITY_NAMES`; the cross moment is reported as
    0 for ``J = 1``.
    """
    return [abs(a - b) for a, b in generating_identity_pairs(J, L, z, trunc)]


# ---------------------------------------------------------------------------
# re-entry law q*


def _check_stratum(k: int, n: int, j: int) -> None:
    if n < 3 or k < n:
        raise InvalidParams(f"need 3 <= n <= k, got k={k}, n={n}")
    if not 1 <= j <= n - 1:
        raise IndexOutOfRange(f"j must lie in [1, {n - 1}], got {j}")


def in_E(r: Sequence[int], j: int) -> bool:
    """Membership of an increment vector in E_j."""
    if j < 1 or j > len(r) or any(v < 0 for v in r):
        return False
    head = r[:j]
    return all(v >= 1 for v in head) and any(v == 1 for v in head)


def entry_weight(k: int, n: int, j: int) -> int:
    """Probability weight of every single excursion path, times ``k^{|r|}``."""
    return math.comb(k - n + j + 1, k - n + 1)


def q_star(k: int, n: int, j: int, r: Sequence[int]) -> float:
    """Probability that an excursion started in S_j re-enters S* with increment ``r``.

    The excursion starts at a state whose first ``j`` slots are empty; the
    result does not depend on the occupied slots.
    """
    _check_stratum(k, n, j)
    r = tuple(int(v) for v in r)
    if len(r) != n - 1 or not in_E(r, j):
        raise NotInEj(f"{r!r} is not in E_{j}")
    total = sum(r)
    ones = sum(1 for v in r[:j] if v == 1)
    if total <= EXACT_PATH_LIMIT:
        numer = math.factorial(total - 1)
        denom = 1
        for v in r:
            denom *= math.factorial(v)
        return float(Fraction(entry_weight(k, n, j) * numer * ones, denom * k ** total))
    log_p = (math.log(entry_weight(k, n, j)) + math.lgamma(total) - sum(math.lgamma(v + 1) for v in r)
             - total * math.log(k) + math.log(ones))
    return math.exp(log_p)


def _vectors_up_to(d: int, max_total: int) -> np.ndarray:
    """All nonnegative integer ``d``-vectors with entry sum ``<= max_total``."""
    arr = np.zeros((1, 0), dtype=np.int64)
    used = np.zeros(1, dtype=np.int64)
    for _ in range(d):
        reps = max_total - used + 1
        offsets = np.repeat(np.cumsum(reps) - reps, reps)
        col = np.arange(int(reps.sum()), dtype=np.int64) - offsets
        arr = np.column_stack([np.repeat(arr, reps, axis=0), col])
        used = arr.sum(axis=1)
    return arr


def enumerate_E(n: int, j: int, max_total: int) -> np.ndarray:
    """All vectors of E_j with ``|r| <= max_total`` as an ``(m, n-1)`` int array."""
    full = _vectors_up_to(n - 1, max_total)
    head = full[:, :j]
    keep = np.all(head >= 1, axis=1) & np.any(head == 1, axis=1)
    return full[keep]


def q_star_array(k: int, n: int, j: int, R: np.ndarray) -> np.ndarray:
    """Vectorised :func:`q_star` over the rows of ``R`` (assumed to lie in E_j)."""
    R = np.asarray(R)
    total = R.sum(axis=1)
    ones = (R[:, :j] == 1).sum(axis=1)
    log_p = (math.log(entry_weight(k, n, j)) + gammaln(total) - gammaln(R + 1).sum(axis=1)
             - total * math.log(k) + np.log(ones))
    return np.exp(log_p)


# ---------------------------------------------------------------------------
# grouped sums over E_j


@lru_cache(maxsize=4096)
def _E_group_terms(k: int, n: int, j: int, head_powers: Tuple[int, ...],
                   tail_powers: Tuple[int, ...], cut: int) -> np.ndarray:
    """Per-total sums of ``1{r_1=1} (|r|-1)!/prod r_i! k^{-|r|} prod r_i^{p_i}``.

    ``head_powers`` are the exponents on slots 2..j (constrained to >= 1),
    ``tail_powers`` those on slots j+1..n-1.  Index ``N`` of the result
    holds the contribution of vectors with ``|r| = N``.
    """
    z = 1.0 / k
    seqs = [_coordinate_sequence(cut, z, exact_one=True)]
    seqs += [_coordinate_sequence(cut, z, lower=1, power=p) for p in head_powers]
    seqs += [_coordinate_sequence(cut, z, power=p) for p in tail_powers]
    grouped = _product_sum(seqs)
    N = np.arange(cut + 1, dtype=float)
    out = np.zeros(cut + 1)
    out[1:] = grouped[1:] / N[1:]
    return out


Monomial = Tuple[int, ...]


def _E_poly_terms(k: int, n: int, j: int, poly: Dict[Monomial, float], cut: int) -> np.ndarray:
    """Per-total sums of ``w(r) * poly(r)`` over E_j, without the path-weight factor.

    ``w(r) = sum_{l<=j} 1{r_l=1} (|r|-1)!/prod r_i! k^{-|r|}``; ``poly``
    maps exponent tuples of length ``n-1`` to coefficients.  Symmetry of
    ``w`` inside slots ``1..j`` and inside ``j+1..n-1`` reduces each
    monomial to a canonical key.
    """
    d = n - 1
    out = np.zeros(cut + 1)
    for mono, coef in poly.items():
        if coef == 0:
            continue
        for l in range(j):
            head = tuple(sorted((mono[i] for i in range(j) if i != l), reverse=True))
            tail = tuple(sorted((mono[i] for i in range(j, d)), reverse=True))
            out = out + coef * _E_group_terms(k, n, j, head, tail, cut)
    return out


def _poly_bound(poly: Dict[Monomial, float]) -> Tuple[float, int]:
    scale = sum(abs(c) for c in poly.values())
    degree = max((sum(m) for m, c in poly.items() if c != 0), default=0)
    return scale, degree


def E_expectation(k: int, n: int, j: int, poly: Dict[Monomial, float],
                  trunc: SeriesTruncation = DEFAULT_TRUNCATION,
                  weighted: bool = True) -> SeriesValue:
    """``sum_{r in E_j} q*(r) poly(r)`` (or without the path weight if ``weighted=False``).

    The majorant uses that, with one head slot pinned to 1, the remaining
    multinomial weights at total ``N`` sum to ``(n-2)^{N-1}``.
    """
    _check_stratum(k, n, j)
    factor = entry_weight(k, n, j) if weighted else 1
    scale, degree = _poly_bound(poly)
    ratio = (n - 2) / k
    cut, tail = _choose_cut(trunc, 0, degree, ratio, scale=factor * j * scale / (n - 2))
    terms = _E_poly_terms(k, n, j, poly, cut)
    return _certify(factor * float(np.sum(terms)), tail, cut, trunc)


def _unit_poly(n: int) -> Dict[Monomial, float]:
    return {(0,) * (n - 1): 1.0}


def q_star_normalization(k: int, n: int, j: int,
                         trunc: SeriesTruncation = DEFAULT_TRUNCATION) -> float:
    """Total re-entry mass, which must equal one."""
    return E_expectation(k, n, j, _unit_poly(n), trunc).value


def sojourn_pmf(k: int, n: int, j: int, steps: int,
                trunc: SeriesTruncation = DEFAULT_TRUNCATION) -> float:
    """Probability that an excursion from S_j lasts exactly ``steps`` chain steps."""
    _check_stratum(k, n, j)
    if steps < j:
        return 0.0
    terms = _E_poly_terms(k, n, j, _unit_poly(n), steps)
    return entry_weight(k, n, j) * float(terms[steps])


def sojourn_mean(k: int, n: int, j: int,
                 trunc: SeriesTruncation = DEFAULT_TRUNCATION) -> float:
    """Mean excursion length from the re-entry law (to be compared with ``psi_j``)."""
    poly = {}
    for i in range(n - 1):
        mono = [0] * (n - 1)
        mono[i] = 1
        poly[tuple(mono)] = 1.0
    return E_expectation(k, n, j, poly, trunc).value


def monomials(n: int, degree: int) -> Iterable[Monomial]:
    """All exponent tuples of total degree ``degree`` in ``n-1`` variables."""
    for combo in combinations_with_replacement(range(n - 1), degree):
        mono = [0] * (n - 1)
        for i in combo:
            mono[i] += 1
        yield tuple(mono)


# ---------------------------------------------------------------------------
# identity grid


@dataclass(frozen=True)
class IdentityCheck:
    """One comparison between a truncated series and its exact counterpart.

    ``residual`` is ``|value - reference| / max(1, |reference|)``; the
    F-family values reach the 1e4 range, where an absolute 1e-9 would
    only test floating-point rounding.
    """

    name: str
    params: Tuple[int, ...]
    value: float
    reference: float
    residual: float
    tail_bound: float = 0.0


def _scaled_residual(value: float, reference: float) -> float:
    return abs(value - reference) / max(1.0, abs(reference))


GRID_TRUNCATION = SeriesTruncation(tail_tol=1e-11)


def identity_grid(k_values: Iterable[int] = range(5, 11), L_max: int = 3,
                  a_values: Sequence[int] = (-1, 0, 1), n_alternating: int = 12,
                  trunc: SeriesTruncation = GRID_TRUNCATION) -> List[IdentityCheck]:
    """Run every series identity on a parameter grid.

    Covers F_0 against its closed forms, the F_m recursion against direct
    summation, G_m direct against closed, the five generating-function
    identities at ``z = 1/k``, and the alternating binomial identity for
    the monomials ``i^d`` with ``d < n <= n_alternating``.
    """
    out: List[IdentityCheck] = []
    for k in k_values:
        for J in range(1, k):
            for L in range(L_max + 1):
                for g in GKind:
                    s = F_series(g, 0, J, L, k, trunc)
                    ref = F0_closed(g, J, L, k)
                    out.append(IdentityCheck(f"F0_{g.name}", (k, J, L), s.value, ref,
                                             _scaled_residual(s.value, ref), s.tail_bound))
                    top = J if g is GKind.G1 else J - 1
                    for m in range(1, top + 1):
                        s = F_series(g, m, J, L, k, trunc)
                        ref = F_via_recursion(g, m, J, L, k)
                        out.append(IdentityCheck(f"F_recursion_{g.name}", (k, m, J, L), s.value, ref,
                                                 _scaled_residual(s.value, ref), s.tail_bound))
                pairs = generating_identity_pairs(J, L, 1.0 / k, trunc)
                for name, (v, ref) in zip(IDENTITY_NAMES, pairs):
                    out.append(IdentityCheck(f"genfun_{name}", (k, J, L), v, ref,
                                             _scaled_residual(v, ref)))
        for n in range(3, k + 2):
            for g in GKind:
                top = n - 1 if g is GKind.G1 else n - 2
                for m in range(1, top + 1):
                    for a in a_values:
                        v = G_direct(g, a, n, m, k, trunc)
                        ref = G_closed(g, a, n, m, k)
                        out.append(IdentityCheck(f"G_{g.name}", (k, a, n, m), v, ref,
                                                 _scaled_residual(v, ref)))
    for n in range(1, n_alternating + 1):
        for d in range(n):
            coeffs = [0] * d + [1]
            r = alternating_binomial_residual(coeffs, n)
            out.append(IdentityCheck("alternating_binomial", (n, d), float(r), 0.0, float(abs(r))))
    return out
