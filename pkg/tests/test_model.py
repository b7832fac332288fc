from fractions import Fraction
from itertools import permutations

import pytest
from hypothesis import given, settings, strategies as st

from entswitch.errors import InvalidParams, NotInS, UnreachableTarget
from entswitch.model import (
    PROB,
    RATE,
    SwitchParams,
    as_state,
    classify,
    classify_boundary,
    ctmc_transitions,
    dtmc_transitions,
    is_swap_transition,
)


def test_params_validation():
    SwitchParams(3, 3)
    for bad in [dict(k=4, n=2), dict(k=3, n=4), dict(k=5, n=3, mu=0.0), dict(k=5, n=3, q=1.5),
                dict(k=5.5, n=3)]:
        with pytest.raises(InvalidParams):
            SwitchParams(**bad)


def test_classify_examples():
    assert classify((1, 1)) == 0
    assert classify((0, 2)) == 1
    assert classify((0, 0)) == 2


def test_classify_boundary_examples():
    assert classify_boundary((1, 1, 3)) == 2
    assert classify_boundary((2, 2)) == 0
    with pytest.raises(NotInS):
        classify_boundary((0, 1))


def test_as_state_rejects_bad_vectors():
    with pytest.raises(InvalidParams):
        as_state((1, -1))
    with pytest.raises(InvalidParams):
        as_state((1, 2, 3), n=3)


def test_dtmc_examples():
    p = SwitchParams(4, 3)
    assert dtmc_transitions(p, (1, 1), exact=True).as_dict() == {
        (0, 0): Fraction(1, 2), (2, 1): Fraction(1, 4), (1, 2): Fraction(1, 4)}
    assert dtmc_transitions(p, (0, 2), exact=True).as_dict() == {
        (1, 2): Fraction(3, 4), (0, 3): Fraction(1, 4)}
    assert dtmc_transitions(p, (0, 0), exact=True).as_dict() == {
        (1, 0): Fraction(1, 2), (0, 1): Fraction(1, 2)}


def test_dtmc_order_is_decrement_then_slots():
    tl = dtmc_transitions(SwitchParams(5, 4), (2, 1, 3))
    assert tl.mode == PROB
    assert tl.targets() == ((1, 0, 2), (3, 1, 3), (2, 2, 3), (2, 1, 4))


def test_ctmc_examples():
    tl = ctmc_transitions(SwitchParams(4, 3), (1, 1))
    assert tl.mode == RATE
    assert tl.as_dict() == {(0, 0): 2.0, (2, 1): 1.0, (1, 2): 1.0}
    assert ctmc_transitions(SwitchParams(4, 3, mu=0.5), (0, 0)).total() == pytest.approx(2.0, abs=1e-12)
    tl = ctmc_transitions(SwitchParams(5, 3), (0, 2))
    assert tl.as_dict() == pytest.approx({(1, 2): 4.0, (0, 3): 1.0})
    assert tl.total() == pytest.approx(5.0, abs=1e-12)


def test_is_swap_transition():
    p = SwitchParams(4, 3)
    assert is_swap_transition(p, (1, 1), (0, 0))
    assert not is_swap_transition(p, (1, 1), (2, 1))
    assert not is_swap_transition(p, (0, 2), (1, 2))
    with pytest.raises(UnreachableTarget):
        is_swap_transition(p, (1, 1), (3, 3))


@st.composite
def params_and_state(draw):
    k = draw(st.integers(3, 12))
    n = draw(st.integers(3, k))
    x = draw(st.lists(st.integers(0, 6), min_size=n - 1, max_size=n - 1))
    mu = draw(st.floats(0.1, 10.0))
    return SwitchParams(k, n, mu=mu), tuple(x)


@settings(max_examples=300, deadline=None)
@given(params_and_state())
def test_row_sums(ps):
    p, x = ps
    assert abs(dtmc_transitions(p, x).total() - 1.0) <= 1e-12
    assert dtmc_transitions(p, x, exact=True).total() == 1
    assert abs(ctmc_transitions(p, x).total() - p.k * p.mu) <= 1e-12 * p.k * p.mu


@settings(max_examples=200, deadline=None)
@given(params_and_state(), st.randoms(use_true_random=False))
def test_permutation_equivariance(ps, rnd):
    p, x = ps
    perm = list(range(len(x)))
    rnd.shuffle(perm)
    px = tuple(x[i] for i in perm)
    base = dtmc_transitions(p, x, exact=True).as_dict()
    moved = dtmc_transitions(p, px, exact=True).as_dict()
    assert moved == {tuple(y[i] for i in perm): w for y, w in base.items()}


def test_zero_slot_formula_extends_to_empty_state():
    # the per-empty-slot probability at j = n-1 reduces to 1/(n-1)
    for k in range(3, 12):
        for n in range(3, k + 1):
            d = n - 1
            assert Fraction(k - (d - d), k * d) == Fraction(1, d)
            probs = dtmc_transitions(SwitchParams(k, n), (0,) * d, exact=True).as_dict()
            assert set(probs.values()) == {Fraction(1, d)}
