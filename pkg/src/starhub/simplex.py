"""Dense two-phase primal simplex for small standard-form LPs.

Solves  min c.v  s.t.  A v = b, v >= 0  on a dense tableau. Pricing is
Dantzig's rule, switching to Bland's rule once a run of degenerate pivots
is detected so cycling cannot occur. Intended for desk-scale problems
(a few hundred rows); no factorization, no sparsity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SimplexResult",
    "solve_standard_form",
    "OPTIMAL",
    "INFEASIBLE",
    "ITERATION_LIMIT",
    "UNBOUNDED",
]

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
ITERATION_LIMIT = "iteration-limit"
UNBOUNDED = "unbounded"

PIVOT_TOL = 1e-9
BLAND_STREAK = 50


@dataclass
class SimplexResult:
    status: str
    x: np.ndarray
    objective: float
    iterations: int


def solve_standard_form(
    A,
    b,
    c,
    *,
    pivot_tol: float = PIVOT_TOL,
    bland_streak: int = BLAND_STREAK,
    max_iterations: int | None = None,
) -> SimplexResult:
    """Two-phase simplex. Returns the best point found together with a
    status; ``x`` covers only the original columns of ``A``."""
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    c = np.asarray(c, dtype=float)
    m, n = A.shape
    if b.shape != (m,) or c.shape != (n,):
        raise ValueError("inconsistent LP dimensions")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
        raise ValueError("LP data must be finite")

    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0

    # Claim existing unit columns (slacks) as the starting basis, scanning
    # from the right where slack blocks live; add artificials elsewhere.
    basis = np.full(m, -1, dtype=int)
    for j in range(n - 1, -1, -1):
        col = A[:, j]
        nz = np.flatnonzero(col)
        if nz.size == 1 and col[nz[0]] == 1.0 and basis[nz[0]] == -1:
            basis[nz[0]] = j
    art_rows = np.flatnonzero(basis == -1)
    n_art = art_rows.size
    total = n + n_art
    T = np.zeros((m, total + 1))
    T[:, :n] = A
    T[:, total] = b
    for k, r in enumerate(art_rows):
        T[r, n + k] = 1.0
        basis[r] = n + k

    if max_iterations is None:
        max_iterations = 50 * (m + total)

    artificial = np.zeros(total, dtype=bool)
    artificial[n:] = True
    iterations = 0

    if n_art:
        phase1_cost = artificial.astype(float)
        status, it = _iterate(
            T, basis, phase1_cost, blocked=None,
            pivot_tol=pivot_tol, bland_streak=bland_streak,
            max_iterations=max_iterations,
        )
        iterations += it
        if status == ITERATION_LIMIT:
            return SimplexResult(ITERATION_LIMIT, _extract(T, basis, n), np.nan, iterations)
        residual = float(sum(T[i, total] for i in range(m) if basis[i] >= n))
        if residual > 1e-7 * max(1.0, float(np.abs(b).sum())):
            return SimplexResult(INFEASIBLE, _extract(T, basis, n), np.nan, iterations)
        _drive_out_artificials(T, basis, n, pivot_tol)

    cost2 = np.zeros(total)
    cost2[:n] = c
    status, it = _iterate(
        T, basis, cost2, blocked=artificial,
        pivot_tol=pivot_tol, bland_streak=bland_streak,
        max_iterations=max_iterations,
    )
    iterations += it
    x = _extract(T, basis, n)
    objective = float(c @ x)
    if status == OPTIMAL:
        return SimplexResult(OPTIMAL, x, objective, iterations)
    return SimplexResult(status, x, objective, iterations)


def _extract(T: np.ndarray, basis: np.ndarray, n: int) -> np.ndarray:
    x = np.zeros(T.shape[1] - 1)
    x[basis] = T[:, -1]
    return x[:n]


def _reduced_costs(T: np.ndarray, basis: np.ndarray, cost: np.ndarray) -> np.ndarray:
    rc = cost.copy()
    for i, bi in enumerate(basis):
        cb = cost[bi]
        if cb != 0.0:
            rc -= cb * T[i, :-1]
    return rc


def _iterate(T, basis, cost, blocked, *, pivot_tol, bland_streak, max_iterations):
    m = T.shape[0]
    rc = _reduced_costs(T, basis, cost)
    degenerate_run = 0
    iterations = 0
    while True:
        use_bland = degenerate_run >= bland_streak
        enter = _entering(rc, blocked, pivot_tol, use_bland)
        if enter < 0:
            return OPTIMAL, iterations
        if iterations >= max_iterations:
            return ITERATION_LIMIT, iterations
        col = T[:, enter]
        rhs = T[:, -1]
        candidates = np.flatnonzero(col > pivot_tol)
        if candidates.size == 0:
            return UNBOUNDED, iterations
        ratios = rhs[candidates] / col[candidates]
        best = ratios.min()
        tied = candidates[ratios <= best + pivot_tol * max(1.0, abs(best))]
        # Smallest basis index among ties keeps the method anti-cycling
        # friendly once Bland pricing kicks in.
        leave = int(tied[np.argmin(basis[tied])])
        degenerate = rhs[leave] <= pivot_tol
        _pivot(T, leave, enter)
        rc = rc - rc[enter] * T[leave, :-1]
        rc[enter] = 0.0
        basis[leave] = enter
        iterations += 1
        degenerate_run = degenerate_run + 1 if degenerate else 0


def _entering(rc, blocked, pivot_tol, use_bland):
    if blocked is not None:
        usable = ~blocked
    else:
        usable = np.ones(rc.shape, dtype=bool)
    negative = usable & (rc < -pivot_tol)
    idx = np.flatnonzero(negative)
    if idx.size == 0:
        return -1
    if use_bland:
        return int(idx[0])
    return int(idx[np.argmin(rc[idx])])


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    pivot_row = T[row]
    factors = T[:, col].copy()
    factors[row] = 0.0
    T -= np.outer(factors, pivot_row)
    T[:, col] = 0.0
    T[row, col] = 1.0


def _drive_out_artificials(T, basis, n, pivot_tol):
    """Pivot zero-level artificial basics onto structural columns when
    possible; redundant rows keep their artificial at level zero."""
    m = T.shape[0]
    for i in range(m):
        if basis[i] >= n:
            row = T[i, :n]
            j = -1
            nz = np.flatnonzero(np.abs(row) > pivot_tol)
            if nz.size:
                j = int(nz[0])
            if j >= 0:
                _pivot(T, i, j)
                basis[i] = j
