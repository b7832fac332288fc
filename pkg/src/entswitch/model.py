"""Parameters, state space and one-step kernels of the switch chain.

States are plain tuples of ``n - 1`` nonnegative integers, one entry per
tracked link slot.  The kernels below are literal transcriptions of the
uniformized chain: from every state the total outflow rate is ``k * mu``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence, Tuple, Union

from .errors import InvalidParams, NotInS, UnreachableTarget

OccupancyState = Tuple[int, ...]
Weight = Union[float, Fraction]

PROB = "prob"
RATE = "rate"


@dataclass(frozen=True)
class SwitchParams:
    """Model parameters.

    Parameters
    ----------
    k : int
        Number of links attached to the switch.
    n : int
        Size of the multipartite state being distributed.
    mu : float
        Per-link entanglement generation rate.
    q : float
        Swap success probability.
    """

    k: int
    n: int
    mu: float = 1.0
    q: float = 1.0

    def __post_init__(self):
        if int(self.k) != self.k or int(self.n) != self.n:
            raise InvalidParams(f"k and n must be integers, got k={self.k!r}, n={self.n!r}")
        if not 3 <= self.n <= self.k:
            raise InvalidParams(f"need 3 <= n <= k, got k={self.k}, n={self.n}")
        if not self.mu > 0:
            raise InvalidParams(f"mu must be positive, got {self.mu}")
        if not 0.0 <= self.q <= 1.0:
            raise InvalidParams(f"q must lie in [0, 1], got {self.q}")

    @property
    def dim(self) -> int:
        return self.n - 1

    @property
    def stable(self) -> bool:
        return self.k > self.n


def as_state(x: Sequence[int], n: int | None = None) -> OccupancyState:
    """Validate and normalise an occupancy vector to a tuple of ints."""
    state = tuple(int(v) for v in x)
    if any(int(v) != v for v in x):
        raise InvalidParams(f"state entries must be integers: {tuple(x)!r}")
    if n is not None and len(state) != n - 1:
        raise InvalidParams(f"state must have n-1={n - 1} entries, got {len(state)}")
    if any(v < 0 for v in state):
        raise InvalidParams(f"state entries must be nonnegative: {state!r}")
    return state


def size(x: Sequence[int]) -> int:
    """Total number of stored qubits, |x|."""
    return sum(x)


def classify(x: Sequence[int]) -> int:
    """Index ``j`` of the stratum R_j containing ``x`` (number of zero entries)."""
    return sum(1 for v in x if v == 0)


def classify_boundary(x: Sequence[int]) -> int:
    """Number of entries equal to one for a state with all entries >= 1.

    A nonzero result ``j`` means ``x`` lies in the boundary stratum S*_j;
    zero means ``x`` is in the interior S - S*.
    """
    if any(v <= 0 for v in x):
        raise NotInS(f"state {tuple(x)!r} has a zero entry")
    return sum(1 for v in x if v == 1)


def in_S(x: Sequence[int]) -> bool:
    return all(v >= 1 for v in x)


def _unit(x: OccupancyState, l: int) -> OccupancyState:
    return x[:l] + (x[l] + 1,) + x[l + 1:]


@dataclass(frozen=True)
class TransitionList:
    """Non-zero one-step moves out of a state, in deterministic order."""

    entries: Tuple[Tuple[OccupancyState, Weight], ...]
    mode: str = PROB

    def __iter__(self) -> Iterator[Tuple[OccupancyState, Weight]]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def total(self) -> Weight:
        return sum(w for _, w in self.entries)

    def as_dict(self) -> dict:
        out: dict = {}
        for target, w in self.entries:
            out[target] = out.get(target, 0) + w
        return out

    def targets(self) -> Tuple[OccupancyState, ...]:
        return tuple(t for t, _ in self.entries)


def _dtmc_entries(k: int, n: int, x: OccupancyState, exact: bool):
    num = Fraction if exact else float
    d = n - 1
    j = classify(x)
    entries = []
    if j == 0:
        entries.append((tuple(v - 1 for v in x), num(k - d) / k))
        for l in range(d):
            entries.append((_unit(x, l), num(1) / k))
    elif j == d:
        for l in range(d):
            entries.append((_unit(x, l), num(1) / d))
    else:
        p_zero = num(k - (d - j)) / (k * j)
        p_busy = num(1) / k
        for l in range(d):
            entries.append((_unit(x, l), p_zero if x[l] == 0 else p_busy))
    return tuple(entries)


def dtmc_transitions(params: SwitchParams, x: Sequence[int], exact: bool = False) -> TransitionList:
    """Transition probabilities of the uniformized chain out of ``x``.

    The swap-attempt move ``x - 1`` (only from R_0) is listed first, then
    the single-slot arrivals in slot order.  With ``exact=True`` the
    weights are :class:`fractions.Fraction`.
    """
    state = as_state(x, params.n)
    return TransitionList(_dtmc_entries(params.k, params.n, state, exact), PROB)


def ctmc_transitions(params: SwitchParams, x: Sequence[int]) -> TransitionList:
    """Transition rates of the continuous-time chain out of ``x``.

    Rates are the uniformized probabilities scaled by ``k * mu``, so they
    always sum to ``k * mu``.
    """
    state = as_state(x, params.n)
    total = params.k * params.mu
    entries = tuple((t, float(p) * total) for t, p in _dtmc_entries(params.k, params.n, state, True))
    return TransitionList(entries, RATE)


def is_swap_transition(params: SwitchParams, x: Sequence[int], target: Sequence[int]) -> bool:
    """True iff ``x -> target`` is the swap attempt ``x -> x - 1`` out of R_0."""
    state = as_state(x, params.n)
    target = as_state(target, params.n)
    if target not in dtmc_transitions(params, state).targets():
        raise UnreachableTarget(f"{target!r} is not reachable from {state!r} in one step")
    return classify(state) == 0 and target == tuple(v - 1 for v in state)
