"""Linear relaxation of the hub assignment objective.

The 0-1 program relaxes to an LP over row-stochastic variables x[p][i]
plus auxiliary columns Z[p][q][k] that linearize |x[p][k] - x[q][k]|.
Demand pairs (p, q) and (q, p) share one Z block with merged weight
w[p][q] + w[q][p]; pairs with zero merged weight are dropped entirely,
which preserves the optimum and halves the Z columns.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .instance import Instance, merged_pair_weights, node_weights
from . import simplex

__all__ = [
    "LinearProgram",
    "FractionalSolution",
    "build_lrp",
    "solve",
    "relaxation_value",
    "lp_text",
]


@dataclass(frozen=True)
class LinearProgram:
    """Standard equality-form LP with named columns.

    Column kinds: ("x", p, i), ("z", p, q, k), ("slack", row). Rows are
    the n assignment equations followed by two inequality rows (converted
    to equalities via slacks) per active pair and hub.
    """

    objective: np.ndarray
    constraints: np.ndarray
    rhs: np.ndarray
    column_names: tuple[tuple, ...]
    row_names: tuple[tuple, ...]
    n: int
    h: int
    spoke_lengths: tuple[int, ...]
    node_weights: np.ndarray
    collection_costs: np.ndarray
    pairs: tuple[tuple[int, int, float], ...]  # (p, q, merged weight)


@dataclass
class FractionalSolution:
    """Cleaned LP optimum: clamped, row-renormalized x plus the objective
    recomputed from x (absolute differences in place of Z)."""

    x: np.ndarray
    objective_value: float
    solver_status: str
    raw: np.ndarray | None = None


def build_lrp(inst: Instance) -> LinearProgram:
    n, h = inst.n, inst.h
    weights = node_weights(inst)
    merged = merged_pair_weights(inst)
    pairs = [
        (p, q, float(merged[p, q]))
        for p in range(n)
        for q in range(p + 1, n)
        if merged[p, q] > 0.0
    ]
    n_x = n * h
    n_z = len(pairs) * h
    n_rows = n + 2 * len(pairs) * h
    n_cols = n_x + n_z + 2 * len(pairs) * h

    A = np.zeros((n_rows, n_cols))
    b = np.zeros(n_rows)
    c = np.zeros(n_cols)
    col_names: list[tuple] = []
    row_names: list[tuple] = []

    def x_col(p: int, i: int) -> int:
        return p * h + i

    for p in range(n):
        for i in range(h):
            col_names.append(("x", p, i))
            c[x_col(p, i)] = weights[p] * inst.collection_costs[p, i]
    for idx, (p, q, v) in enumerate(pairs):
        for k in range(h):
            col_names.append(("z", p, q, k))
            c[n_x + idx * h + k] = v * inst.spoke_lengths[k]

    for p in range(n):
        row_names.append(("assign", p))
        A[p, p * h : (p + 1) * h] = 1.0
        b[p] = 1.0

    row = n
    slack = n_x + n_z
    for idx, (p, q, _) in enumerate(pairs):
        for k in range(h):
            z = n_x + idx * h + k
            # x_pk - x_qk + Z >= 0, rewritten as -x_pk + x_qk - Z + s = 0
            A[row, x_col(p, k)] = -1.0
            A[row, x_col(q, k)] = 1.0
            A[row, z] = -1.0
            A[row, slack] = 1.0
            row_names.append(("pair-lo", p, q, k))
            col_names.append(("slack", row))
            row += 1
            slack += 1
            # x_pk - x_qk - Z <= 0, so x_pk - x_qk - Z + s = 0
            A[row, x_col(p, k)] = 1.0
            A[row, x_col(q, k)] = -1.0
            A[row, z] = -1.0
            A[row, slack] = 1.0
            row_names.append(("pair-hi", p, q, k))
            col_names.append(("slack", row))
            row += 1
            slack += 1

    return LinearProgram(
        objective=c,
        constraints=A,
        rhs=b,
        column_names=tuple(col_names),
        row_names=tuple(row_names),
        n=n,
        h=h,
        spoke_lengths=inst.spoke_lengths,
        node_weights=weights,
        collection_costs=np.array(inst.collection_costs),
        pairs=tuple(pairs),
    )


def relaxation_value(lp: LinearProgram, x: np.ndarray) -> float:
    """Relaxation objective evaluated directly from an x matrix, using
    absolute coordinate differences for the coupling term."""
    per_node = np.einsum("ph,ph->p", lp.collection_costs, x)
    value = float(lp.node_weights @ per_node)
    ell = np.asarray(lp.spoke_lengths, dtype=float)
    for p, q, v in lp.pairs:
        value += v * float(ell @ np.abs(x[p] - x[q]))
    return value


def solve(
    lp: LinearProgram,
    *,
    keep_raw: bool = False,
    max_iterations: int | None = None,
) -> FractionalSolution:
    """Solve with the embedded simplex and clean the x block: clamp to
    [0, 1], renormalize each row, recompute the objective from x. An
    iteration-limited run still returns its best (cleaned) point with
    the status flagged."""
    res = simplex.solve_standard_form(
        lp.constraints, lp.rhs, lp.objective, max_iterations=max_iterations
    )
    if res.status in (simplex.INFEASIBLE, simplex.UNBOUNDED):
        # The relaxation always admits the uniform stochastic matrix and
        # has a non-negative objective, so either report is a solver bug.
        raise RuntimeError(f"internal error: relaxation reported {res.status}")
    n_x = lp.n * lp.h
    x = res.x[:n_x].reshape(lp.n, lp.h)
    x = np.clip(x, 0.0, 1.0)
    sums = x.sum(axis=1, keepdims=True)
    if np.any(sums <= 0):
        if res.status == simplex.OPTIMAL:
            raise RuntimeError("internal error: empty assignment row after cleanup")
        # iteration-limited run may stop before phase 1 places every row;
        # keep the point stochastic for downstream rounding
        empty = (sums <= 0).ravel()
        x[empty] = 1.0 / lp.h
        sums = x.sum(axis=1, keepdims=True)
    x = x / sums
    return FractionalSolution(
        x=x,
        objective_value=relaxation_value(lp, x),
        solver_status=res.status,
        raw=res.x.copy() if keep_raw else None,
    )


def lp_text(lp: LinearProgram) -> str:
    """Dump in CPLEX-style LP text format for cross-checks with external
    solvers."""
    def xn(p, i):
        return f"x_p{p}_h{i}"

    def zn(p, q, k):
        return f"z_p{p}_q{q}_k{k}"

    terms = []
    for name, coef in zip(lp.column_names, lp.objective):
        if coef == 0.0 or name[0] == "slack":
            continue
        var = xn(name[1], name[2]) if name[0] == "x" else zn(name[1], name[2], name[3])
        terms.append(f"+ {coef:.17g} {var}")
    lines = ["Minimize", " obj: " + (" ".join(terms) if terms else "0 x_p0_h0")]
    lines.append("Subject To")
    for p in range(lp.n):
        lhs = " + ".join(xn(p, i) for i in range(lp.h))
        lines.append(f" assign_{p}: {lhs} = 1")
    for p, q, _ in lp.pairs:
        for k in range(lp.h):
            lines.append(
                f" lo_{p}_{q}_{k}: {xn(p, k)} - {xn(q, k)} + {zn(p, q, k)} >= 0"
            )
            lines.append(
                f" hi_{p}_{q}_{k}: {xn(p, k)} - {xn(q, k)} - {zn(p, q, k)} <= 0"
            )
    lines.append("End")
    return "\n".join(lines) + "\n"
