"""Hitchcock transportation toolkit.

Pure-Python plan construction (north-west corner rule, coupling from
marginals) so exact rational inputs stay exact; the LP-based optimal
solver runs in floats through the embedded simplex. Also holds the
class-scale surrogate cost matrix, which realizes a line metric through
a signed-parity embedding of the class scales and is therefore Monge
once rows and columns are sorted by position.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import simplex
from .rounding import HubClassing

__all__ = [
    "TransportInstance",
    "TransportPlan",
    "LineMetricCosts",
    "UnbalancedMarginalsError",
    "TransportSolveError",
    "nwcr",
    "is_monge",
    "is_monge_under_order",
    "line_metric_costs",
    "transport_optimal",
    "couple_from_marginals",
    "plan_cost",
    "reordered",
]

BALANCE_TOL = 1e-9


class UnbalancedMarginalsError(ValueError):
    pass


class TransportSolveError(RuntimeError):
    def __init__(self, status: str):
        self.status = status
        super().__init__(f"transport LP finished with status {status!r}")


@dataclass(frozen=True)
class TransportInstance:
    """Balanced supply/demand pair with a cost matrix. Entries may be
    floats or exact rationals; validation is exact for exact inputs."""

    supply: tuple
    demand: tuple
    costs: tuple

    def __post_init__(self):
        supply = tuple(self.supply)
        demand = tuple(self.demand)
        costs = tuple(tuple(row) for row in self.costs)
        object.__setattr__(self, "supply", supply)
        object.__setattr__(self, "demand", demand)
        object.__setattr__(self, "costs", costs)
        if not supply or not demand:
            raise ValueError("supply and demand must be non-empty")
        if any(a < 0 for a in supply) or any(b < 0 for b in demand):
            raise ValueError("marginals must be non-negative")
        if len(costs) != len(supply) or any(len(r) != len(demand) for r in costs):
            raise ValueError("cost matrix shape must match marginals")
        if any(not np.isfinite(float(v)) for row in costs for v in row):
            raise ValueError("costs must be finite")
        total_a = sum(supply)
        total_b = sum(demand)
        if abs(total_a - total_b) > BALANCE_TOL * max(1.0, float(total_a)):
            raise UnbalancedMarginalsError(
                f"supply total {total_a} != demand total {total_b}"
            )

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.supply), len(self.demand)


@dataclass(frozen=True)
class TransportPlan:
    """Coupling matrix with row sums = supply and column sums = demand.
    ``cost`` is None when no cost matrix was involved in building it."""

    matrix: tuple
    cost: object = None

    def __post_init__(self):
        object.__setattr__(self, "matrix", tuple(tuple(r) for r in self.matrix))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.matrix, dtype=float)


def plan_cost(matrix, costs):
    """Inner product of a plan with a cost matrix, skipping zero cells so
    rational arithmetic stays cheap."""
    total = 0
    for row, crow in zip(matrix, costs):
        for y, c in zip(row, crow):
            if y != 0:
                total += y * c
    return total


def nwcr(t: TransportInstance) -> TransportPlan:
    """North-west corner rule.

    Walks the matrix from the top-left cell, allocating the largest
    amount the remaining row supply and column demand admit, moving right
    when the column is saturated and down otherwise. The result satisfies
    the prefix identity sum_{i<=i', j<=j'} y[i][j] =
    min(prefix supply, prefix demand) at every corner and has at most
    I + J - 1 positive cells.
    """
    I, J = t.shape
    row_left = list(t.supply)
    col_left = list(t.demand)
    y = [[0] * J for _ in range(I)]
    i = j = 0
    while True:
        amount = min(row_left[i], col_left[j])
        y[i][j] = amount
        row_left[i] -= amount
        col_left[j] -= amount
        if i == I - 1 and j == J - 1:
            break
        if col_left[j] == 0 and j < J - 1:
            j += 1
        elif i < I - 1:
            i += 1
        else:
            j += 1
    return TransportPlan(matrix=y, cost=plan_cost(y, t.costs))


def reordered(t: TransportInstance, row_order: Sequence[int], col_order: Sequence[int]) -> TransportInstance:
    return TransportInstance(
        supply=tuple(t.supply[i] for i in row_order),
        demand=tuple(t.demand[j] for j in col_order),
        costs=tuple(tuple(t.costs[i][j] for j in col_order) for i in row_order),
    )


def is_monge(costs, tol=0) -> bool:
    """Exhaustive four-index check of C[i][j] + C[i'][j'] <=
    C[i][j'] + C[i'][j] for i < i', j < j'. Exact when entries are exact;
    pass a small ``tol`` for float-derived matrices."""
    rows = len(costs)
    cols = len(costs[0])
    for i in range(rows):
        for i2 in range(i + 1, rows):
            for j in range(cols):
                for j2 in range(j + 1, cols):
                    if costs[i][j] + costs[i2][j2] > costs[i][j2] + costs[i2][j] + tol:
                        return False
    return True


def is_monge_under_order(costs, order: Sequence[int], tol=0) -> bool:
    """Check the Monge property after permuting rows and columns of a
    square matrix by the same candidate order."""
    permuted = [[costs[a][b] for b in order] for a in order]
    return is_monge(permuted, tol)


@dataclass(frozen=True)
class LineMetricCosts:
    """Surrogate hub-pair costs built from class scales.

    matrix[i][j] is |scale_i - scale_j| when the hub classes share
    parity and scale_i + scale_j otherwise; positions[i] embeds hub i on
    the real line at +scale (odd class) or -scale (even class), so the
    matrix equals the pairwise line distances.
    """

    matrix: tuple
    positions: tuple

    def as_array(self) -> np.ndarray:
        return np.asarray(self.matrix, dtype=float)


def line_metric_costs(classing: HubClassing, *, exact: bool = False) -> LineMetricCosts:
    """Build the surrogate cost matrix of a hub classing. With ``exact``
    the float scales are converted to exact rationals first, making every
    derived comparison exact."""
    scales = [Fraction(s) if exact else s for s in classing.scales]
    classes = classing.classes
    h = len(scales)
    matrix = []
    for i in range(h):
        row = []
        for j in range(h):
            if (classes[i] - classes[j]) % 2 == 0:
                row.append(abs(scales[i] - scales[j]))
            else:
                row.append(scales[i] + scales[j])
        matrix.append(tuple(row))
    positions = tuple(
        s if classes[i] % 2 == 1 else -s for i, s in enumerate(scales)
    )
    return LineMetricCosts(matrix=tuple(matrix), positions=positions)


def transport_optimal(t: TransportInstance) -> TransportPlan:
    """Exact optimum of the transportation LP via the embedded simplex
    (float arithmetic)."""
    I, J = t.shape
    n_vars = I * J
    A = np.zeros((I + J, n_vars))
    b = np.empty(I + J)
    for i in range(I):
        A[i, i * J : (i + 1) * J] = 1.0
        b[i] = float(t.supply[i])
    for j in range(J):
        A[I + j, j::J] = 1.0
        b[I + j] = float(t.demand[j])
    c = np.asarray(
        [float(t.costs[i][j]) for i in range(I) for j in range(J)]
    )
    res = simplex.solve_standard_form(A, b, c)
    if res.status != simplex.OPTIMAL:
        raise TransportSolveError(res.status)
    y = res.x.reshape(I, J)
    return TransportPlan(
        matrix=tuple(tuple(float(v) for v in row) for row in y),
        cost=float(res.objective),
    )


def couple_from_marginals(x_p, x_q) -> TransportPlan:
    """Coupling with row marginals x_p and column marginals x_q.

    The diagonal first takes min(x_p[i], x_q[i]); each row's remaining
    mass then sweeps columns left to right, taking what residual column
    capacity allows. Off the diagonal, row i carries exactly
    max(0, x_p[i] - x_q[i]) and column j exactly max(0, x_q[j] - x_p[j]),
    which makes sum_{i != j} (l_i + l_j) y[i][j] equal
    sum_i l_i |x_p[i] - x_q[i]| for any length vector l.
    """
    x_p = tuple(x_p)
    x_q = tuple(x_q)
    if len(x_p) != len(x_q):
        raise ValueError("marginal vectors must have equal length")
    _check_stochastic(x_p, "x_p")
    _check_stochastic(x_q, "x_q")
    h = len(x_p)
    y = [[0] * h for _ in range(h)]
    col_used = []
    for i in range(h):
        y[i][i] = min(x_p[i], x_q[i])
        col_used.append(y[i][i])
    for i in range(h):
        row_used = y[i][i]
        j = 0
        while row_used < x_p[i] and j < h:
            if j != i:
                inc = min(x_q[j] - col_used[j], x_p[i] - row_used)
                if inc > 0:
                    y[i][j] = inc
                    row_used += inc
                    col_used[j] += inc
            j += 1
    return TransportPlan(matrix=y)


def _check_stochastic(vec, name: str) -> None:
    if any(v < 0 for v in vec):
        raise ValueError(f"{name} has negative entries")
    total = sum(vec)
    if abs(total - 1) > BALANCE_TOL:
        raise ValueError(f"{name} sums to {total}, expected 1")
