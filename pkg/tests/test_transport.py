import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from starhub import (
    TransportInstance,
    UnbalancedMarginalsError,
    classify_hubs,
    couple_from_marginals,
    is_monge,
    is_monge_under_order,
    line_metric_costs,
    nwcr,
    plan_cost,
    transport_optimal,
)
from starhub.harness import prefix_identity_holds, random_monge_instance


def F(num, den=1):
    return Fraction(num, den)


# ---------------------------------------------------------------------------
# north-west corner rule


def test_nwcr_single_cell():
    t = TransportInstance(supply=(1,), demand=(1,), costs=((5,),))
    plan = nwcr(t)
    assert plan.matrix == ((1,),)
    assert plan.cost == 5


def test_nwcr_forced_diagonal():
    t = TransportInstance(
        supply=(0.5, 0.5), demand=(0.5, 0.5), costs=((0.0, 1.0), (1.0, 0.0))
    )
    assert nwcr(t).matrix == ((0.5, 0.0), (0.0, 0.5))


def test_nwcr_hand_case_with_all_corners():
    t = TransportInstance(
        supply=(F(2, 10), F(1, 10), F(4, 10), F(3, 10)),
        demand=(F(3, 10), F(3, 10), F(1, 10), F(3, 10)),
        costs=tuple(tuple(F(0) for _ in range(4)) for _ in range(4)),
    )
    plan = nwcr(t)
    expected = (
        (F(2, 10), 0, 0, 0),
        (F(1, 10), 0, 0, 0),
        (0, F(3, 10), F(1, 10), 0),
        (0, 0, 0, F(3, 10)),
    )
    assert plan.matrix == expected
    assert prefix_identity_holds(t, plan)


def test_nwcr_positive_cell_bound():
    rng = np.random.default_rng(4)
    for _ in range(50):
        I, J = int(rng.integers(1, 7)), int(rng.integers(1, 7))
        a = [F(int(v)) for v in rng.integers(0, 9, size=I)]
        b = [F(int(v)) for v in rng.integers(0, 9, size=J)]
        total_a, total_b = sum(a), sum(b)
        if total_b == 0:
            b[0] = F(1)
            total_b = F(1)
        b = [v * total_a / total_b for v in b] if total_a else [F(0)] * J
        if total_a == 0:
            a = [F(0)] * I
        t = TransportInstance(
            supply=tuple(a), demand=tuple(b),
            costs=tuple(tuple(F(0) for _ in range(J)) for _ in range(I)),
        )
        plan = nwcr(t)
        positives = sum(1 for row in plan.matrix for v in row if v != 0)
        assert positives <= I + J - 1
        assert prefix_identity_holds(t, plan)


def test_unbalanced_marginals_rejected():
    with pytest.raises(UnbalancedMarginalsError):
        TransportInstance(supply=(1.0,), demand=(2.0,), costs=((0.0,),))


def test_reordered_permutes_every_field():
    from starhub.transport import reordered

    t = TransportInstance(
        supply=(1, 2), demand=(2, 1), costs=((10, 20), (30, 40))
    )
    swapped = reordered(t, (1, 0), (1, 0))
    assert swapped.supply == (2, 1)
    assert swapped.demand == (1, 2)
    assert swapped.costs == ((40, 30), (20, 10))


# ---------------------------------------------------------------------------
# Monge checks


def test_monge_examples():
    assert is_monge(((3, 3), (3, 3)))  # constant: equality everywhere
    assert is_monge(((0, 2), (0, 0)))
    assert is_monge(((0, 3), (1, 0)))
    assert not is_monge(((1, 0), (0, 1)))


def test_monge_under_order_recovers_structure():
    # line positions scrambled, then sorted back
    positions = [5.0, 1.0, 9.0, 3.0]
    costs = [[abs(a - b) for b in positions] for a in positions]
    assert not is_monge(costs)
    order = sorted(range(4), key=lambda i: positions[i])
    assert is_monge_under_order(costs, order, tol=1e-12)


# ---------------------------------------------------------------------------
# class-scale line metric


def test_all_zero_spokes_give_zero_costs():
    classing = classify_hubs((0, 0, 0), 2.0, 0.3)
    costs = line_metric_costs(classing)
    assert all(v == 0 for row in costs.matrix for v in row)


def test_opposite_parity_adds_scales():
    classing = classify_hubs((1, 2), 2.0, 0.5)
    assert classing.classes == (1, 2)
    costs = line_metric_costs(classing)
    u = classing.scales
    assert costs.matrix[0][1] == u[0] + u[1]


def test_three_class_line_embedding():
    classing = classify_hubs((1, 2, 4), 2.0, 0.5)
    assert classing.classes == (1, 2, 3)
    costs = line_metric_costs(classing)
    s = (2**0.5, -(2**1.5), 2**2.5)
    assert costs.positions == pytest.approx(s)
    for i in range(3):
        for j in range(3):
            assert costs.matrix[i][j] == pytest.approx(abs(s[i] - s[j]), abs=1e-12)


def test_surrogate_costs_form_a_metric():
    rng = np.random.default_rng(9)
    for _ in range(30):
        h = int(rng.integers(2, 7))
        ell = sorted(int(v) for v in rng.integers(0, 300, size=h))
        classing = classify_hubs(ell, float(rng.uniform(1.1, 3.5)), float(rng.random()))
        costs = line_metric_costs(classing, exact=True)
        m = costs.matrix
        for i, j, k in itertools.permutations(range(h), 3):
            assert m[i][j] <= m[i][k] + m[k][j]
        order = sorted(range(h), key=lambda i: costs.positions[i])
        assert is_monge_under_order(m, order, tol=0)


# ---------------------------------------------------------------------------
# optimal transport via the LP


def test_optimal_single_cell():
    t = TransportInstance(supply=(2.0,), demand=(2.0,), costs=((3.0,),))
    plan = transport_optimal(t)
    assert plan.cost == pytest.approx(6.0)


def test_monge_ordered_instances_match_corner_rule():
    rng = np.random.default_rng(10)
    for _ in range(25):
        t = random_monge_instance(rng, max_size=6)
        assert abs(nwcr(t).cost - transport_optimal(t).cost) <= 1e-8


def test_non_monge_witness_has_strict_gap():
    t = TransportInstance(
        supply=(0.5, 0.5), demand=(0.5, 0.5), costs=((1.0, 0.0), (0.0, 1.0))
    )
    assert nwcr(t).cost == pytest.approx(1.0)
    assert transport_optimal(t).cost == pytest.approx(0.0, abs=1e-12)


# ---------------------------------------------------------------------------
# coupling from marginals


def test_equal_marginals_couple_on_diagonal():
    x = (0.25, 0.5, 0.25)
    plan = couple_from_marginals(x, x)
    for i in range(3):
        for j in range(3):
            assert plan.matrix[i][j] == (x[i] if i == j else 0)


def test_disjoint_marginals_forced_cell():
    plan = couple_from_marginals((1.0, 0.0), (0.0, 1.0))
    assert plan.matrix == ((0.0, 1.0), (0.0, 0.0))
    ell = (1, 2)
    lhs = sum(
        (ell[i] + ell[j]) * plan.matrix[i][j]
        for i in range(2)
        for j in range(2)
        if i != j
    )
    assert lhs == 3 == sum(
        ell[i] * abs((1.0, 0.0)[i] - (0.0, 1.0)[i]) for i in range(2)
    )


def test_coupling_marginals_and_row_mass_exact_rationals():
    rng = np.random.default_rng(11)
    for _ in range(60):
        h = int(rng.integers(1, 7))
        num_p = [int(v) for v in rng.integers(0, 10, size=h)]
        num_q = [int(v) for v in rng.integers(0, 10, size=h)]
        if sum(num_p) == 0:
            num_p[0] = 1
        if sum(num_q) == 0:
            num_q[0] = 1
        x_p = [F(v, sum(num_p)) for v in num_p]
        x_q = [F(v, sum(num_q)) for v in num_q]
        plan = couple_from_marginals(tuple(x_p), tuple(x_q))
        y = plan.matrix
        for i in range(h):
            assert sum(y[i]) == x_p[i]
            assert sum(y[k][i] for k in range(h)) == x_q[i]
            off_row = sum(y[i][j] for j in range(h) if j != i)
            assert off_row == max(F(0), x_p[i] - x_q[i])
            off_col = sum(y[j][i] for j in range(h) if j != i)
            assert off_col == max(F(0), x_q[i] - x_p[i])
        ell = [int(v) for v in rng.integers(0, 20, size=h)]
        lhs = sum(
            (ell[i] + ell[j]) * y[i][j]
            for i in range(h)
            for j in range(h)
            if i != j
        )
        rhs = sum(ell[i] * abs(x_p[i] - x_q[i]) for i in range(h))
        assert lhs == rhs


@settings(max_examples=150, deadline=None)
@given(st.data())
def test_coupling_identity_property(data):
    h = data.draw(st.integers(min_value=1, max_value=5))
    raw_p = data.draw(
        st.lists(st.integers(min_value=0, max_value=20), min_size=h, max_size=h)
    )
    raw_q = data.draw(
        st.lists(st.integers(min_value=0, max_value=20), min_size=h, max_size=h)
    )
    weights = data.draw(
        st.lists(st.integers(min_value=0, max_value=50), min_size=h, max_size=h)
    )
    if sum(raw_p) == 0:
        raw_p[0] = 1
    if sum(raw_q) == 0:
        raw_q[0] = 1
    x_p = [F(v, sum(raw_p)) for v in raw_p]
    x_q = [F(v, sum(raw_q)) for v in raw_q]
    y = couple_from_marginals(tuple(x_p), tuple(x_q)).matrix
    lhs = sum(
        (weights[i] + weights[j]) * y[i][j]
        for i in range(h)
        for j in range(h)
        if i != j
    )
    rhs = sum(weights[i] * abs(x_p[i] - x_q[i]) for i in range(h))
    assert lhs == rhs


def test_coupling_rejects_bad_marginals():
    with pytest.raises(ValueError):
        couple_from_marginals((0.5, 0.4), (0.5, 0.5))
    with pytest.raises(ValueError):
        couple_from_marginals((1.5, -0.5), (0.5, 0.5))
    with pytest.raises(ValueError):
        couple_from_marginals((1.0,), (0.5, 0.5))


def test_plan_cost_skips_zero_cells():
    y = ((F(1, 2), 0), (0, F(1, 2)))
    costs = ((2, 100), (100, 4))
    assert plan_cost(y, costs) == F(3)
