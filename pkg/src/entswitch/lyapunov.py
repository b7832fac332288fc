"""Drift of the quadratic Lyapunov function along the embedded chain Y.

Y is the switch chain observed only while every slot holds at least one
qubit.  From a state with ``j`` slots equal to one, the swap move drops
the chain into the stratum S_j and Y resumes at the re-entry point drawn
from the q* law, so boundary drifts involve infinite sums.  Those sums are
enumerated explicitly (``drift_empirical``) or evaluated through grouped
series (``gamma_j``, ``beta_j`` and the Gamma/W routes) with certified
tails.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import comb
from .comb import DEFAULT_TRUNCATION, GKind, SeriesTruncation
from .errors import (
    CertificationFailed,
    IndexOutOfRange,
    InvalidParams,
    NotInS,
    NotInterior,
    TailBoundViolated,
)
from .model import PROB, SwitchParams, TransitionList, as_state, classify_boundary, in_S

EPSILON = 1e-6


@dataclass(frozen=True)
class LyapunovConfig:
    """Cross-term weight ``b`` of ``V(x) = sum x_i^2 + b sum_{i<l} x_i x_l``.

    Build with :meth:`from_alpha` to use the certification family
    ``b = -2 (1 - alpha) / (n - 2)``.
    """

    b: float = 0.0
    alpha: Optional[float] = None

    @classmethod
    def from_alpha(cls, n: int, alpha: float) -> "LyapunovConfig":
        if n < 3:
            raise InvalidParams(f"n must be at least 3, got {n}")
        return cls(b=-2.0 * (1.0 - alpha) / (n - 2), alpha=alpha)

    def validate(self, n: int) -> None:
        if self.b < -2.0 / (n - 2) - 1e-15:
            raise InvalidParams(f"b={self.b} < -2/(n-2): V is not nonnegative on S")


def V_value(x: Sequence[int], config: LyapunovConfig | float) -> float:
    b = config.b if isinstance(config, LyapunovConfig) else float(config)
    x = np.asarray(x, dtype=float)
    s = x.sum()
    sq = float(np.dot(x, x))
    return sq + b * (s * s - sq) / 2.0


def _V_exact(x: Sequence[int], b: Fraction) -> Fraction:
    s = sum(x)
    sq = sum(v * v for v in x)
    return sq + b * Fraction(s * s - sq, 2)


def _V_rows(Y: np.ndarray, b: float) -> np.ndarray:
    s = Y.sum(axis=1).astype(float)
    sq = (Y.astype(float) ** 2).sum(axis=1)
    return sq + b * (s * s - sq) / 2.0


def _harmonic_tail(k: int, n: int, j: int) -> Fraction:
    return sum((Fraction(1, k - n + i) for i in range(2, j + 2)), Fraction(0))


def _check_boundary_j(n: int, j: int) -> None:
    if not 1 <= j <= n - 2:
        raise IndexOutOfRange(f"j must lie in [1, {n - 2}], got {j}")


# ---------------------------------------------------------------------------
# kernel of Y


def _split_slots(x: Tuple[int, ...]) -> Tuple[List[int], List[int]]:
    ones = [i for i, v in enumerate(x) if v == 1]
    rest = [i for i, v in enumerate(x) if v != 1]
    return ones, rest


def _reentry_cut(k: int, n: int, j: int, trunc: SeriesTruncation, weight_degree: int = 0,
                 weight_scale: float = 1.0) -> Tuple[int, float]:
    scale = comb.entry_weight(k, n, j) * j / (n - 2) * weight_scale
    return comb._choose_cut(trunc, 0, weight_degree, (n - 2) / k, scale)


def _reentry_arrays(params: SwitchParams, x: Tuple[int, ...], cut: int) -> Tuple[np.ndarray, np.ndarray]:
    """Re-entry targets and their Y-probabilities from a boundary state, up to ``|r| <= cut``."""
    k, n = params.k, params.n
    ones, rest = _split_slots(x)
    j = len(ones)
    R = comb.enumerate_E(n, j, cut)
    probs = comb.q_star_array(k, n, j, R) * (k - n + 1) / k
    base = np.asarray(x, dtype=np.int64) - 1
    targets = np.empty_like(R)
    order = ones + rest
    targets[:, order] = R
    targets += base
    return targets, probs


def embedded_transitions(params: SwitchParams, x: Sequence[int],
                         trunc: SeriesTruncation = DEFAULT_TRUNCATION) -> TransitionList:
    """One-step law of Y from ``x`` (re-entry part truncated with certified missing mass).

    Arrivals come first, then either the swap move ``x - 1`` or the
    re-entry targets ordered by increasing excursion length.
    """
    k, n = params.k, params.n
    x = as_state(x, n)
    j = classify_boundary(x)
    entries = [(x[:i] + (x[i] + 1,) + x[i + 1:], 1.0 / k) for i in range(n - 1)]
    if j == 0:
        entries.append((tuple(v - 1 for v in x), (k - n + 1) / k))
        return TransitionList(tuple(entries), PROB)
    cut, tail = _reentry_cut(k, n, j, trunc)
    comb._certify(0.0, tail, cut, trunc)
    targets, probs = _reentry_arrays(params, x, cut)
    order = np.argsort(targets.sum(axis=1), kind="stable")
    entries += [(tuple(int(v) for v in targets[i]), float(probs[i])) for i in order]
    return TransitionList(tuple(entries), PROB)


# ---------------------------------------------------------------------------
# closed-form drift


def drift_closed_interior_exact(params: SwitchParams, b: Fraction, x: Sequence[int]) -> Fraction:
    k, n = params.k, params.n
    s = sum(x)
    return (-(k - n) * (2 + b * (n - 2)) * s
            + (n - 1) * (k - n + 2 + b * Fraction((k - n + 1) * (n - 2), 2))) / k


def drift_closed_interior(params: SwitchParams, config: LyapunovConfig, x: Sequence[int]) -> float:
    """Drift of V on the interior S - S* (affine in |x|)."""
    x = as_state(x, params.n)
    if classify_boundary(x) != 0:
        raise NotInterior(f"{x!r} has an entry equal to one")
    return float(drift_closed_interior_exact(params, Fraction(config.b), x))


def interior_coefficients(params: SwitchParams, config: LyapunovConfig) -> Tuple[float, float]:
    """``(slope, constant)`` with ``k * drift = slope * |x| + constant`` on S - S*."""
    k, n, b = params.k, params.n, config.b
    slope = -(k - n) * (2 + b * (n - 2))
    const = (n - 1) * (k - n + 2 + b * (k - n + 1) * (n - 2) / 2)
    return slope, const


def drift_closed_boundary_coefficient(params: SwitchParams, config: LyapunovConfig, j: int) -> float:
    """Per-unit slope of the boundary drift in the occupied slots, divided by ``k``."""
    k, n = params.k, params.n
    _check_boundary_j(n, j)
    b = config.b
    h = float(_harmonic_tail(k, n, j))
    return ((k - n + 1) * (2 + b * (k - 1)) * h - (k - n) * (2 + b * (n - 2))) / k


def C_j(k: int, n: int, alpha: float, j: int) -> float:
    """Boundary slope (times ``k``) written in terms of ``m = k - n`` and ``alpha``."""
    _check_boundary_j(n, j)
    m = k - n
    h = float(_harmonic_tail(k, n, j))
    return -(2.0 / (n - 2)) * ((m + 1) ** 2 - alpha * (m * m + m * n + n - 1)) * h - 2 * m * alpha


# ---------------------------------------------------------------------------
# T_j, Gamma_j, W_j


def T_j_closed(k: int, n: int, j: int) -> float:
    _check_boundary_j(n, j)
    return float(-(k - n) + (k - n + 1) * _harmonic_tail(k, n, j))


def _path_factor(k: int, n: int, j: int) -> int:
    """``(j + 1) C(k-n+j+1, k-n)``, equal to ``(k-n+1) C(k-n+j+1, k-n+1)``."""
    return (j + 1) * math.comb(k - n + j + 1, k - n)


def _inner_truncation(trunc: SeriesTruncation, factor: float) -> SeriesTruncation:
    """Tighten the tail tolerance of a sum that is later multiplied by ``factor``."""
    return SeriesTruncation(trunc.max_total, trunc.tail_tol / max(1.0, factor))


def _poly_add(poly: Dict[Tuple[int, ...], float], n: int, coef: float, *idx: int) -> None:
    mono = [0] * (n - 1)
    for i in idx:
        mono[i] += 1
    key = tuple(mono)
    poly[key] = poly.get(key, 0.0) + coef


def _gamma_poly(n: int, j: int) -> Dict[Tuple[int, ...], float]:
    """``r_{n-1} - 1`` (slot indices are 0-based)."""
    poly: Dict[Tuple[int, ...], float] = {}
    _poly_add(poly, n, 1.0, n - 2)
    _poly_add(poly, n, -1.0)
    return poly


def Gamma_j(k: int, n: int, j: int, mode: str = "closed",
            trunc: SeriesTruncation = DEFAULT_TRUNCATION) -> float:
    """The occupied-slot moment ``Gamma_j`` by one of three routes.

    ``direct`` sums over the excursion increments, ``F`` goes through the
    truncated F-series, ``closed`` is the finite alternating sum.
    """
    _check_boundary_j(n, j)
    if mode == "direct":
        return comb.E_expectation(k, n, j, _gamma_poly(n, j), trunc, weighted=False).value
    if mode == "F":
        total = 0.0
        for l in range(1, j + 1):
            f = comb.F_series(GKind.G3, j - l, n - l - 1, l - 1, k, trunc).value
            total += math.comb(j, l) * l / k ** l * f
        return total
    if mode == "closed":
        total = Fraction(0)
        for l in range(1, j + 1):
            total += math.comb(j, l) * (-1) ** l * l * Fraction(k - n + l, (k - n + l + 1) ** 2)
        return float(total)
    raise InvalidParams(f"unknown mode {mode!r}")


def T_j_from_Gamma(k: int, n: int, j: int, mode: str = "direct",
                   trunc: SeriesTruncation = DEFAULT_TRUNCATION) -> float:
    pf = _path_factor(k, n, j)
    return pf * Gamma_j(k, n, j, mode, _inner_truncation(trunc, pf * 2 ** j)) + 1.0


def W_j_closed(k: int, n: int, j: int) -> float:
    _check_boundary_j(n, j)
    return float((k - 1) * (k - n + 1) * _harmonic_tail(k, n, j) - (n - 2) * (k - n))


def _W_poly(n: int, j: int) -> Dict[Tuple[int, ...], float]:
    """``sum_l r_l - r_{n-1} - (n - 2)``."""
    poly: Dict[Tuple[int, ...], float] = {}
    for i in range(n - 2):
        _poly_add(poly, n, 1.0, i)
    _poly_add(poly, n, -(n - 2.0))
    return poly


def W_j(k: int, n: int, j: int, mode: str = "direct",
        trunc: SeriesTruncation = DEFAULT_TRUNCATION) -> float:
    """Cross-term slope ``W_j`` by summation (``direct``), G-series (``G``) or alternating sum."""
    _check_boundary_j(n, j)
    pf = _path_factor(k, n, j)
    trunc = _inner_truncation(trunc, pf * 2 ** j * n)
    if mode == "direct":
        s = comb.E_expectation(k, n, j, _W_poly(n, j), trunc, weighted=False).value
    elif mode == "G":
        s = (comb.G_direct(GKind.G1, 0, n, j, k, trunc)
             - comb.G_direct(GKind.G2, -1, n, j, k, trunc)
             - (n - 2) * comb.G_direct(GKind.G1, -1, n, j, k, trunc))
    elif mode == "alternating":
        s = float(sum(
            Fraction(math.comb(j, l) * l * (-1) ** (l + 1) * (k - 1 - (n - 2) * (k - n + l + 1)),
                     (k - n + l + 1) ** 2)
            for l in range(1, j + 1)))
    else:
        raise InvalidParams(f"unknown mode {mode!r}")
    return pf * s + (n - 2)


# ---------------------------------------------------------------------------
# constant terms of the boundary drift


def _gamma_const_poly(n: int, j: int) -> Dict[Tuple[int, ...], float]:
    poly: Dict[Tuple[int, ...], float] = {}
    for i in range(n - 1):
        _poly_add(poly, n, 1.0, i, i)
    for i in range(j, n - 1):
        _poly_add(poly, n, -2.0, i)
    _poly_add(poly, n, float(n - 1 - 2 * j))
    return poly


def _beta_const_poly(n: int, j: int) -> Dict[Tuple[int, ...], float]:
    d = n - 1
    poly: Dict[Tuple[int, ...], float] = {}
    for i in range(j):
        for l in range(i + 1, d):
            _poly_add(poly, n, 1.0, i, l)
        _poly_add(poly, n, -float(n - j - 1), i)
    for i in range(j, d):
        for l in range(i + 1, d):
            _poly_add(poly, n, 1.0, i, l)
            _poly_add(poly, n, -1.0, i)
            _poly_add(poly, n, -1.0, l)
            _poly_add(poly, n, 1.0)
    _poly_add(poly, n, -(j * j - j) / 2.0)
    return poly


def gamma_j(params: SwitchParams, j: int, trunc: SeriesTruncation = DEFAULT_TRUNCATION) -> float:
    """Constant term of the square-sum part of ``k`` times the boundary drift."""
    k, n = params.k, params.n
    _check_boundary_j(n, j)
    pf = _path_factor(k, n, j)
    inner = _inner_truncation(trunc, pf * n * n)
    s = comb.E_expectation(k, n, j, _gamma_const_poly(n, j), inner, weighted=False).value
    return pf * s + n - 1 + 2 * j


def beta_j(params: SwitchParams, j: int, trunc: SeriesTruncation = DEFAULT_TRUNCATION) -> float:
    """Constant term of the cross-product part of ``k`` times the boundary drift."""
    k, n = params.k, params.n
    _check_boundary_j(n, j)
    pf = _path_factor(k, n, j)
    inner = _inner_truncation(trunc, pf * n * n)
    s = comb.E_expectation(k, n, j, _beta_const_poly(n, j), inner, weighted=False).value
    return pf * s + (n - 2) * j


def delta_j(params: SwitchParams, config: LyapunovConfig, j: int,
            trunc: SeriesTruncation = DEFAULT_TRUNCATION) -> float:
    return gamma_j(params, j, trunc) + config.b * beta_j(params, j, trunc)


def gamma_j_majorant(k: int, n: int, j: int) -> float:
    """Crude finite bound on ``|gamma_j|`` obtained by dropping all sign information."""
    m1 = k - n + 1
    return ((n - 1) * j * (j + 1) * math.comb(k - n + j + 1, k - n)
            * (k / m1 + 2 * k / m1 ** 2 + (k - n + 3) * k / m1 ** 3) + n - 1 + 2 * j)


def drift_closed_boundary(params: SwitchParams, config: LyapunovConfig, x: Sequence[int],
                          trunc: SeriesTruncation = DEFAULT_TRUNCATION) -> float:
    x = as_state(x, params.n)
    j = classify_boundary(x)
    _check_boundary_j(params.n, j)
    s = sum(v for v in x if v != 1)
    coef = drift_closed_boundary_coefficient(params, config, j)
    return coef * s + delta_j(params, config, j, trunc) / params.k


# ---------------------------------------------------------------------------
# drift by enumeration


@dataclass(frozen=True)
class DriftReport:
    state: Tuple[int, ...]
    closed_form: float
    empirical: float
    truncation_tail: float
    coefficient: float
    delta_term: float

    @property
    def discrepancy(self) -> float:
        return abs(self.closed_form - self.empirical)


def _drift_tail(params: SwitchParams, x: Tuple[int, ...], b: float, cut: int) -> float:
    """Bound on the drift contribution of excursions longer than ``cut``.

    A re-entry target ``y`` with ``|r| = N`` satisfies
    ``|V(y) - V(x)| <= c (|x| + N)^2 + V(x)`` with ``c = 1 + |b| (n - 2) / 2``.
    """
    k, n = params.k, params.n
    j = classify_boundary(x)
    c = 1.0 + abs(b) * (n - 2) / 2.0
    s = float(sum(x))
    scale = comb.entry_weight(k, n, j) * j / (n - 2) * (k - n + 1) / k
    ratio = (n - 2) / k
    const = 2 * c * s * s + abs(V_value(x, b))
    t0 = comb._majorant_tail(cut + 1, 0, 0, ratio, scale * const)
    t2 = comb._majorant_tail(cut + 1, 0, 2, ratio, scale * 2 * c)
    return t0 + t2


def drift_empirical(params: SwitchParams, config: LyapunovConfig, x: Sequence[int],
                    trunc: SeriesTruncation = DEFAULT_TRUNCATION) -> DriftReport:
    """Drift of V from ``x`` by summing over the one-step law of Y.

    Interior states are handled in exact rational arithmetic.  Boundary
    states enumerate every re-entry increment up to a cut chosen so that
    the neglected contribution is below ``trunc.tail_tol``.
    """
    k, n = params.k, params.n
    x = as_state(x, n)
    j = classify_boundary(x)
    b = config.b
    if j == 0:
        bf = Fraction(b)
        v0 = _V_exact(x, bf)
        moves = [x[:i] + (x[i] + 1,) + x[i + 1:] for i in range(n - 1)]
        total = sum(Fraction(1, k) * (_V_exact(y, bf) - v0) for y in moves)
        total += Fraction(k - n + 1, k) * (_V_exact(tuple(v - 1 for v in x), bf) - v0)
        slope, const = interior_coefficients(params, config)
        closed = drift_closed_interior_exact(params, bf, x)
        return DriftReport(x, float(closed), float(total), 0.0, slope / k, const / k)

    v0 = V_value(x, b)
    arrivals = sum(V_value(x[:i] + (x[i] + 1,) + x[i + 1:], b) - v0 for i in range(n - 1)) / k
    cut = None
    for cut in range(16, comb.MAX_TOTAL_CAP + 1, 8):
        tail = _drift_tail(params, x, b, cut)
        if tail <= trunc.tail_tol or trunc.max_total is not None and cut >= trunc.max_total:
            break
    if trunc.max_total is not None:
        cut = trunc.max_total
        tail = _drift_tail(params, x, b, cut)
    if not tail <= trunc.tail_tol:
        raise TailBoundViolated(f"drift tail {tail:.3e} exceeds {trunc.tail_tol:.3e} at cut {cut}")
    targets, probs = _reentry_arrays(params, x, cut)
    reentry = float(np.dot(probs, _V_rows(targets, b) - v0))
    empirical = arrivals + reentry
    if j <= n - 2:
        coef = drift_closed_boundary_coefficient(params, config, j)
        delta = delta_j(params, config, j, trunc)
        s = sum(v for v in x if v != 1)
        closed = coef * s + delta / k
    else:
        coef, delta, closed = math.nan, math.nan, math.nan
    return DriftReport(x, closed, empirical, tail, coef, delta)


def boundary_drift_fit(params: SwitchParams, config: LyapunovConfig, j: int,
                       values: Sequence[int] = range(2, 9), slot: int | None = None,
                       trunc: SeriesTruncation = DEFAULT_TRUNCATION) -> Tuple[float, float]:
    """Least-squares slope and intercept of the empirical drift along a boundary ray.

    States have ones in the first ``j`` slots, the value ``v`` in ``slot``
    (default: the last slot) and 2 elsewhere; the abscissa is the sum of
    the occupied slots.  Returns ``(slope, k * intercept)`` so the second
    entry is directly comparable with ``delta_j``.
    """
    n = params.n
    _check_boundary_j(n, j)
    slot = n - 2 if slot is None else slot
    if not j <= slot <= n - 2:
        raise IndexOutOfRange(f"slot must be one of the occupied positions {j}..{n - 2}")
    xs, ys = [], []
    for v in values:
        state = [1] * j + [2] * (n - 1 - j)
        state[slot] = v
        rep = drift_empirical(params, config, state, trunc)
        xs.append(sum(state[j:]))
        ys.append(rep.empirical)
    A = np.column_stack([np.asarray(xs, dtype=float), np.ones(len(xs))])
    (slope, intercept), *_ = np.linalg.lstsq(A, np.asarray(ys), rcond=None)
    return float(slope), float(intercept * params.k)


# ---------------------------------------------------------------------------
# certification


@dataclass(frozen=True)
class DriftCertificate:
    k: int
    n: int
    alpha: float
    b: float
    interior_coefficient: float
    interior_constant: float
    C: Tuple[float, ...]
    delta: Tuple[float, ...]
    thresholds: Tuple[float, ...]
    M: int
    epsilon: float = EPSILON

    def rows(self) -> List[Tuple[str, float, float, float]]:
        """``(stratum, coefficient, constant, threshold)`` rows, interior first."""
        out = [("interior", self.interior_coefficient, self.interior_constant, self.thresholds[0])]
        for j, (c, d, t) in enumerate(zip(self.C, self.delta, self.thresholds[1:]), start=1):
            out.append((f"S*_{j}", c, d, t))
        return out


def certify_negative_drift(params: SwitchParams, config: LyapunovConfig,
                           M_search_cap: int = 10 ** 9,
                           trunc: SeriesTruncation = DEFAULT_TRUNCATION,
                           epsilon: float = EPSILON) -> DriftCertificate:
    """Find ``M`` with drift below ``-epsilon`` for every state of S with ``|x| > M``.

    Coefficients are reported before division by ``k``.  Any nonnegative
    coefficient raises :class:`CertificationFailed` naming the stratum.
    """
    k, n = params.k, params.n
    if config.alpha is None:
        raise InvalidParams("certification needs a config built with LyapunovConfig.from_alpha")
    if not 0.0 < config.alpha < 1.0 / (n - 1):
        raise InvalidParams(f"alpha must lie in (0, 1/(n-1)) = (0, {1 / (n - 1):.6g})")
    config.validate(n)
    slope, const = interior_coefficients(params, config)
    if not slope < 0:
        raise CertificationFailed(
            f"interior |x| coefficient {slope:.6g} is not negative (k={k}, n={n})", 0, slope)
    thresholds = [(const + k * epsilon) / -slope]
    Cs, deltas = [], []
    for j in range(1, n - 1):
        c = k * drift_closed_boundary_coefficient(params, config, j)
        if not c < 0:
            raise CertificationFailed(
                f"boundary coefficient C_{j} = {c:.6g} is not negative (k={k}, n={n})", j, c)
        d = delta_j(params, config, j, trunc)
        Cs.append(c)
        deltas.append(d)
        thresholds.append(j + (d + k * epsilon) / -c)
    M = max(n - 1, math.floor(max(thresholds)) + 1)
    if M > M_search_cap:
        raise CertificationFailed(f"threshold M={M} exceeds search cap {M_search_cap}")
    return DriftCertificate(k, n, config.alpha, config.b, slope, const, tuple(Cs), tuple(deltas),
                            tuple(thresholds), M, epsilon)


# ---------------------------------------------------------------------------
# instability at k = n


@dataclass(frozen=True)
class InstabilityReport:
    k: int
    n: int
    downward_bound: Fraction
    downward_per_coordinate: Fraction
    interior_total_drift: Fraction
    boundary_total_drift: Tuple[Fraction, ...]
    conditions_hold: bool


def _total_mean_drift(params: SwitchParams, x: Tuple[int, ...]) -> Fraction:
    from .model import dtmc_transitions

    total = Fraction(0)
    for y, p in dtmc_transitions(params, x, exact=True):
        total += p * (sum(y) - sum(x))
    return total


def instability_conditions(k: int, n: int) -> InstabilityReport:
    """Evaluate the two non-ergodicity conditions on the kernel of X.

    The downward-jump condition is checked on the interior representative
    (the only states with a downward move); the mean-drift condition on one
    representative per stratum, which suffices because kernels depend only
    on the zero pattern.
    """
    from .model import dtmc_transitions

    params = SwitchParams(k, n)
    d = n - 1
    interior = (2,) * d
    down = Fraction(0)
    per_coord = []
    for i in range(d):
        contrib = Fraction(0)
        for y, p in dtmc_transitions(params, interior, exact=True):
            if sum(y) < sum(interior):
                contrib += p * (y[i] - interior[i])
        per_coord.append(contrib)
    down = min(per_coord)
    interior_drift = _total_mean_drift(params, interior)
    boundary = []
    for j in range(1, n):
        state = (0,) * j + (3,) * (d - j)
        boundary.append(_total_mean_drift(params, state))
    bound = Fraction(k - n + 1, k)
    holds = down >= -bound and interior_drift >= 0 and all(v >= 0 for v in boundary)
    return InstabilityReport(k, n, bound, down, interior_drift, tuple(boundary), holds)
