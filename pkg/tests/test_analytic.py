import math
from fractions import Fraction

import pytest

from entswitch.analytic import (
    Stability,
    aggregates_AB,
    aggregates_AB_exact,
    capacity,
    capacity_exact,
    capacity_upper_bound_heterogeneous,
    expected_qubits,
    expected_qubits_exact,
    heatmap_grid,
    pi_R0,
    pi_R0_exact,
    psi_j,
    report,
    stability,
)
from entswitch.errors import IndexOutOfRange, InvalidParams, UnstableRegime
from entswitch.model import SwitchParams


def test_capacity_examples():
    # q * mu * k / n
    assert capacity(SwitchParams(5, 3, 1.0, 0.8)) == pytest.approx(0.8 * 5 / 3, abs=1e-15)
    assert capacity(SwitchParams(4, 3)) == pytest.approx(4 / 3, abs=1e-15)
    with pytest.raises(UnstableRegime, match="unstable: k must exceed n"):
        capacity(SwitchParams(3, 3))


def test_expected_qubits_examples():
    assert expected_qubits(4, 3) == 4.0
    assert expected_qubits(5, 3) == 2.5
    assert expected_qubits(100, 20) == 11.875
    assert expected_qubits(3, 2) == 1.5
    with pytest.raises(UnstableRegime):
        expected_qubits(3, 3)


def test_pi_R0_examples():
    assert pi_R0(4, 3) == pytest.approx(2 / 3, abs=1e-15)
    assert pi_R0(5, 3) == pytest.approx(5 / 9, abs=1e-15)
    assert pi_R0(10, 4) == pytest.approx(10 / 28, abs=1e-15)


def test_aggregates_examples():
    assert aggregates_AB_exact(5, 3) == (Fraction(35, 18), Fraction(5, 9))
    a, b = aggregates_AB(6, 4)
    assert (a, b) == (3.0, 1.5)
    assert a + b == expected_qubits(6, 4)


def test_stability():
    assert stability(4, 3) is Stability.STABLE
    assert stability(3, 3) is Stability.UNSTABLE
    with pytest.raises(InvalidParams):
        stability(2, 3)
    with pytest.raises(InvalidParams):
        stability(5, 2)


def test_heterogeneous_bound():
    assert capacity_upper_bound_heterogeneous([1] * 5, 3, 1.0) == pytest.approx(5 / 3)
    assert capacity_upper_bound_heterogeneous([1, 2], 3, 1.0) == pytest.approx(4 / 3)
    assert capacity_upper_bound_heterogeneous([0.5, 0.5, 0.5, 1.0], 4, 0.9) == pytest.approx(0.9)
    with pytest.raises(InvalidParams):
        capacity_upper_bound_heterogeneous([], 3, 1.0)


def test_psi_examples():
    assert psi_j(4, 3, 1) == pytest.approx(4 / 3)
    assert psi_j(4, 3, 2) == pytest.approx(7 / 3)
    assert psi_j(10, 3, 1) == pytest.approx(10 / 9)
    with pytest.raises(IndexOutOfRange):
        psi_j(4, 3, 3)
    with pytest.raises(IndexOutOfRange):
        psi_j(4, 3, 0)


def test_psi_increasing_and_finite_at_criticality():
    for k in range(3, 15):
        for n in range(3, k + 1):
            vals = [psi_j(k, n, j) for j in range(1, n)]
            assert all(b > a for a, b in zip(vals, vals[1:]))
            assert math.isfinite(vals[-1])


def test_aggregate_identity_exact():
    for k in range(4, 51):
        for n in range(3, k):
            a, b = aggregates_AB_exact(k, n)
            assert a + b == expected_qubits_exact(k, n)
            ra, rb = aggregates_AB(k, n)
            assert abs(ra + rb - expected_qubits(k, n)) <= 1e-12


def test_capacity_identity():
    for k in range(4, 30):
        for n in range(3, k):
            for q in (Fraction(1), Fraction(1, 2), Fraction(3, 10)):
                p = SwitchParams(k, n, 1.0, float(q))
                lhs = pi_R0_exact(k, n) * (k - (n - 1)) * q
                assert lhs == capacity_exact(SwitchParams(k, n, 1.0, q))
                assert abs(float(lhs) - capacity(p)) <= 1e-12


def test_monotonicity():
    for k in range(4, 60):
        vals = [expected_qubits(k, n) for n in range(2, k)]
        assert all(b > a for a, b in zip(vals, vals[1:]))
    for n in range(2, 40):
        vals = [expected_qubits(k, n) for k in range(n + 1, 80)]
        assert all(b < a for a, b in zip(vals, vals[1:]))


def test_report_consistency():
    r = report(SwitchParams(5, 3, 1.0, 0.8))
    assert r.stable
    assert 0 < r.pi_R0 <= 1
    assert abs(r.aggregate_A + r.aggregate_B - r.expected_qubits) <= 1e-12


def test_heatmap_grid():
    rows = heatmap_grid()
    assert len(rows) == sum(k - 2 for k in range(3, 101))
    lookup = {(r.k, r.n): r for r in rows}
    assert lookup[(100, 20)].expected_qubits == 11.875
    assert lookup[(3, 2)].expected_qubits == 1.5
    assert lookup[(21, 20)].expected_qubits == 199.5
    assert lookup[(10, 5)].log10_expected_qubits == pytest.approx(math.log10(expected_qubits(10, 5)))
    with pytest.raises(InvalidParams):
        heatmap_grid([5], lambda k: [5])
