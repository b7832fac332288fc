"""Monte Carlo estimation on the uniformized switch chain.

Each replication owns one PCG64 stream spawned from a single
``SeedSequence``, and consumes two uniforms per step: one selects the
transition (walking the entries of :func:`~entswitch.model.dtmc_transitions`
in order), the other decides swap success.  The compiled kernel and the
pure-Python :func:`reference_trajectory` read the same uniforms in the same
way, so they produce the same path.

Model time advances by exactly ``1 / (k mu)`` per step.  The total exit
rate of the chain does not depend on the state, so this has the same
mean as sampling exponential holding times and less variance.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from numba import njit
from scipy import stats

from .errors import ConfigInvalid, NotCritical
from .model import SwitchParams, dtmc_transitions

CHUNK = 1 << 18

ARRIVAL = 0
SWAP_FAIL = 1
SWAP_OK = 2


@dataclass(frozen=True)
class SimConfig:
    """Run length and batching.

    ``warmup=None`` discards the first 5% of steps.
    """

    steps: int = 1_000_000
    warmup: Optional[int] = None
    seed: int = 0
    replications: int = 1
    batches: int = 50
    workers: int = 1

    def __post_init__(self):
        if self.warmup is None:
            object.__setattr__(self, "warmup", self.steps // 20)
        if not self.steps > self.warmup >= 0:
            raise ConfigInvalid(f"need steps > warmup >= 0, got steps={self.steps}, warmup={self.warmup}")
        if self.batches < 10:
            raise ConfigInvalid(f"need at least 10 batches, got {self.batches}")
        if self.replications < 1:
            raise ConfigInvalid(f"need at least one replication, got {self.replications}")
        if self.workers < 1:
            raise ConfigInvalid(f"need at least one worker, got {self.workers}")
        if self.steps - self.warmup < self.batches:
            raise ConfigInvalid("fewer post-warmup steps than batches")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigInvalid(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    @property
    def batch_len(self) -> int:
        return (self.steps - self.warmup) // self.batches


@dataclass(frozen=True)
class Estimate:
    value: float
    halfwidth: float

    def contains(self, target: float, widths: float = 1.0) -> bool:
        return abs(self.value - target) <= widths * self.halfwidth


@dataclass(frozen=True)
class SimReport:
    """Steady-state estimates with 95% batch-means confidence halfwidths.

    ``capacity_est`` counts simulated successes; ``capacity_scaled_est`` is
    ``q`` times the swap-attempt rate, the same quantity without the
    Bernoulli noise.
    """

    k: int
    n: int
    mu: float
    q: float
    steps: int
    seed: int
    replications: int
    capacity_est: float
    capacity_hw: float
    capacity_scaled_est: float
    occupancy_est: float
    occupancy_hw: float
    r0_fraction: float
    r0_hw: float
    attempts: int
    successes: int
    elapsed_model_time: float

    @property
    def capacity(self) -> Estimate:
        return Estimate(self.capacity_est, self.capacity_hw)

    @property
    def occupancy(self) -> Estimate:
        return Estimate(self.occupancy_est, self.occupancy_hw)

    @property
    def r0(self) -> Estimate:
        return Estimate(self.r0_fraction, self.r0_hw)


@dataclass(frozen=True)
class EmbeddedReport:
    """Statistics of the chain restricted to S (all slots occupied).

    ``excursion_means[j]`` is the mean number of steps spent outside S
    after leaving it into the stratum with ``j`` empty slots.
    """

    report: SimReport
    y_occupancy_est: float
    y_occupancy_hw: float
    s_fraction: float
    excursion_counts: Dict[int, int]
    excursion_means: Dict[int, float]


# ---------------------------------------------------------------------------
# compiled kernel


@njit(cache=True, nogil=True)
def _step(k, n, q, x, u, v):
    """Advance ``x`` in place by one transition; returns the move kind."""
    d = n - 1
    zeros = 0
    for i in range(d):
        if x[i] == 0:
            zeros += 1
    if zeros == 0:
        cum = (k - d) / k
        if u < cum:
            for i in range(d):
                x[i] -= 1
            return SWAP_OK if v < q else SWAP_FAIL
        p = 1.0 / k
        for i in range(d):
            cum += p
            if u < cum or i == d - 1:
                x[i] += 1
                return ARRIVAL
    if zeros == d:
        p = 1.0 / d
        cum = 0.0
        for i in range(d):
            cum += p
            if u < cum or i == d - 1:
                x[i] += 1
                return ARRIVAL
    p_zero = (k - (d - zeros)) / (k * zeros)
    p_busy = 1.0 / k
    cum = 0.0
    for i in range(d):
        cum += p_zero if x[i] == 0 else p_busy
        if u < cum or i == d - 1:
            x[i] += 1
            return ARRIVAL
    return ARRIVAL


@njit(cache=True, nogil=True)
def _trajectory(k, n, q, x0, u, v):
    x = x0.copy()
    out = np.empty((len(u) + 1, n - 1), dtype=np.int64)
    kinds = np.empty(len(u), dtype=np.int64)
    out[0] = x
    for t in range(len(u)):
        kinds[t] = _step(k, n, q, x, u[t], v[t])
        out[t + 1] = x
    return out, kinds


@njit(cache=True, nogil=True)
def _advance(k, n, q, x, u, v, t0, warmup, batch_len, batches,
             b_occ, b_r0, b_att, b_succ, b_y_occ, b_y_cnt,
             exc_count, exc_len, exc_state):
    """Run one chunk of uniforms, accumulating per-batch sums.

    ``exc_state`` holds ``[stratum, length]`` of the excursion outside S
    in progress (stratum -1 when X is in S or the excursion began before
    warmup).
    """
    d = n - 1
    for t in range(len(u)):
        g = t0 + t
        rel = g - warmup
        active = rel >= 0 and rel < batch_len * batches
        if active:
            bi = rel // batch_len
            s = 0
            zeros = 0
            for i in range(d):
                s += x[i]
                if x[i] == 0:
                    zeros += 1
            b_occ[bi] += s
            if zeros == 0:
                b_r0[bi] += 1
                b_y_occ[bi] += s
                b_y_cnt[bi] += 1
        kind = _step(k, n, q, x, u[t], v[t])
        if active:
            if kind != ARRIVAL:
                b_att[bi] += 1
            if kind == SWAP_OK:
                b_succ[bi] += 1
        zeros = 0
        for i in range(d):
            if x[i] == 0:
                zeros += 1
        if exc_state[0] >= 0:
            exc_state[1] += 1
            if zeros == 0:
                exc_count[exc_state[0]] += 1
                exc_len[exc_state[0]] += exc_state[1]
                exc_state[0] = -1
                exc_state[1] = 0
        elif zeros > 0 and kind != ARRIVAL and active:
            exc_state[0] = zeros
            exc_state[1] = 0


@njit(cache=True, nogil=True)
def _advance_plain(k, n, q, x, u, v):
    for t in range(len(u)):
        _step(k, n, q, x, u[t], v[t])


# ---------------------------------------------------------------------------
# reference stepper


def reference_trajectory(params: SwitchParams, u: Sequence[float], v: Sequence[float],
                         x0: Optional[Sequence[int]] = None) -> Tuple[List[Tuple[int, ...]], List[int]]:
    """Pure-Python path driven by the same uniforms as the compiled kernel.

    Walks the entries of ``dtmc_transitions`` in their listed order and
    takes the first whose cumulative weight exceeds ``u``.
    """
    x = tuple(x0) if x0 is not None else (0,) * (params.n - 1)
    path, kinds = [x], []
    for ut, vt in zip(u, v):
        entries = dtmc_transitions(params, x).entries
        cum = 0.0
        target = entries[-1][0]
        for y, p in entries:
            cum += p
            if ut < cum:
                target = y
                break
        if sum(target) < sum(x):
            kinds.append(SWAP_OK if vt < params.q else SWAP_FAIL)
        else:
            kinds.append(ARRIVAL)
        x = target
        path.append(x)
    return path, kinds


def trajectory(params: SwitchParams, u: np.ndarray, v: np.ndarray,
               x0: Optional[Sequence[int]] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Compiled counterpart of :func:`reference_trajectory`."""
    x = np.zeros(params.n - 1, dtype=np.int64) if x0 is None else np.asarray(x0, dtype=np.int64)
    return _trajectory(params.k, params.n, float(params.q), x,
                       np.asarray(u, dtype=float), np.asarray(v, dtype=float))


# ---------------------------------------------------------------------------
# drivers


def replication_streams(seed: int, replications: int) -> List[np.random.Generator]:
    """One independent generator per replication, spawned from ``seed``."""
    children = np.random.SeedSequence(seed).spawn(replications)
    return [np.random.Generator(np.random.PCG64(c)) for c in children]


@dataclass
class _RepSums:
    occ: np.ndarray
    r0: np.ndarray
    att: np.ndarray
    succ: np.ndarray
    y_occ: np.ndarray
    y_cnt: np.ndarray
    exc_count: np.ndarray
    exc_len: np.ndarray


def _one_replication(params: SwitchParams, config: SimConfig, rng: np.random.Generator) -> _RepSums:
    d = params.n - 1
    B = config.batches
    sums = _RepSums(*(np.zeros(B) for _ in range(6)),
                    np.zeros(d + 1, dtype=np.int64), np.zeros(d + 1, dtype=np.int64))
    x = np.zeros(d, dtype=np.int64)
    exc_state = np.array([-1, 0], dtype=np.int64)
    done = 0
    while done < config.steps:
        m = min(CHUNK, config.steps - done)
        u = rng.random(m)
        v = rng.random(m)
        _advance(params.k, params.n, float(params.q), x, u, v, done, config.warmup,
                 config.batch_len, B, sums.occ, sums.r0, sums.att, sums.succ,
                 sums.y_occ, sums.y_cnt, sums.exc_count, sums.exc_len, exc_state)
        done += m
    return sums


def _run_all(params: SwitchParams, config: SimConfig) -> List[_RepSums]:
    rngs = replication_streams(config.seed, config.replications)
    if config.workers == 1:
        return [_one_replication(params, config, r) for r in rngs]
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        return list(pool.map(lambda r: _one_replication(params, config, r), rngs))


def _mean_ci(samples: np.ndarray, level: float = 0.95) -> Tuple[float, float]:
    samples = np.asarray(samples, dtype=float)
    m = len(samples)
    mean = float(samples.mean())
    if m < 2:
        return mean, math.inf
    sd = float(samples.std(ddof=1))
    return mean, float(stats.t.ppf(0.5 + level / 2, m - 1) * sd / math.sqrt(m))


def _report(params: SwitchParams, config: SimConfig, reps: List[_RepSums]) -> SimReport:
    L = config.batch_len
    dt = 1.0 / (params.k * params.mu)
    occ = np.concatenate([r.occ for r in reps]) / L
    r0 = np.concatenate([r.r0 for r in reps]) / L
    cap = np.concatenate([r.succ for r in reps]) / (L * dt)
    attempts = int(sum(r.att.sum() for r in reps))
    successes = int(sum(r.succ.sum() for r in reps))
    elapsed = L * config.batches * config.replications * dt
    cap_est, cap_hw = _mean_ci(cap)
    occ_est, occ_hw = _mean_ci(occ)
    r0_est, r0_hw = _mean_ci(r0)
    return SimReport(
        k=params.k, n=params.n, mu=params.mu, q=params.q, steps=config.steps, seed=config.seed,
        replications=config.replications,
        capacity_est=cap_est, capacity_hw=cap_hw,
        capacity_scaled_est=params.q * attempts / elapsed,
        occupancy_est=occ_est, occupancy_hw=occ_hw,
        r0_fraction=r0_est, r0_hw=r0_hw,
        attempts=attempts, successes=successes, elapsed_model_time=elapsed,
    )


def run(params: SwitchParams, config: SimConfig = SimConfig()) -> SimReport:
    """Estimate capacity, mean occupancy and the R_0 fraction.

    Confidence intervals pool the batch means of all replications.  The
    chain starts empty; unstable parameters are accepted, in which case the
    estimates describe growth rather than a steady state.
    """
    return _report(params, config, _run_all(params, config))


def run_embedded(params: SwitchParams, config: SimConfig = SimConfig()) -> EmbeddedReport:
    """Simulate X and read off the embedded chain Y at its visits to S.

    Excursions outside S are timed from the swap that leaves S to the first
    return, and grouped by the number of empty slots at the exit.
    """
    reps = _run_all(params, config)
    base = _report(params, config, reps)
    y_occ = np.concatenate([r.y_occ for r in reps])
    y_cnt = np.concatenate([r.y_cnt for r in reps])
    keep = y_cnt > 0
    y_est, y_hw = _mean_ci(y_occ[keep] / y_cnt[keep])
    counts = sum(r.exc_count for r in reps)
    lengths = sum(r.exc_len for r in reps)
    exc_counts = {j: int(counts[j]) for j in range(1, params.n) if counts[j] > 0}
    exc_means = {j: float(lengths[j] / counts[j]) for j in exc_counts}
    s_fraction = float(y_cnt.sum() / (config.batch_len * config.batches * config.replications))
    return EmbeddedReport(base, y_est, y_hw, s_fraction, exc_counts, exc_means)


# ---------------------------------------------------------------------------
# criticality probe


@dataclass(frozen=True)
class ProbeRow:
    horizon: int
    median: float
    mean: float
    lower_quartile: float
    upper_quartile: float


@dataclass(frozen=True)
class ProbeReport:
    k: int
    n: int
    replications: int
    seed: int
    rows: Tuple[ProbeRow, ...]

    @property
    def medians(self) -> Tuple[float, ...]:
        return tuple(r.median for r in self.rows)

    def growing(self) -> bool:
        m = self.medians
        return all(b > a for a, b in zip(m, m[1:]))


def _sizes_at(params: SwitchParams, horizons: Sequence[int], rng: np.random.Generator) -> List[int]:
    x = np.zeros(params.n - 1, dtype=np.int64)
    done, out = 0, []
    for T in horizons:
        while done < T:
            m = min(CHUNK, T - done)
            _advance_plain(params.k, params.n, float(params.q), x, rng.random(m), rng.random(m))
            done += m
        out.append(int(x.sum()))
    return out


def instability_probe(params: SwitchParams, horizons: Sequence[int] = (10 ** 4, 10 ** 6),
                      replications: int = 200, seed: int = 0, workers: int = 1) -> ProbeReport:
    """Distribution of ``|X_T|`` at increasing horizons for a critical switch (``k = n``).

    Every replication follows one path from the empty state and is read
    at each horizon, so the medians come from nested prefixes.
    """
    if params.k != params.n:
        raise NotCritical(f"probe needs k = n, got k={params.k}, n={params.n}")
    horizons = sorted(int(h) for h in horizons)
    if not horizons or horizons[0] < 1:
        raise ConfigInvalid("horizons must be positive")
    if replications < 1:
        raise ConfigInvalid(f"need at least one replication, got {replications}")
    rngs = replication_streams(seed, replications)
    if workers == 1:
        sizes = [_sizes_at(params, horizons, r) for r in rngs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            sizes = list(pool.map(lambda r: _sizes_at(params, horizons, r), rngs))
    S = np.asarray(sizes, dtype=float)
    rows = tuple(
        ProbeRow(T, float(np.median(S[:, i])), float(S[:, i].mean()),
                 float(np.quantile(S[:, i], 0.25)), float(np.quantile(S[:, i], 0.75)))
        for i, T in enumerate(horizons))
    return ProbeReport(params.k, params.n, replications, seed, rows)
