"""Exhaustive exact solver, the ground-truth oracle at desk scale.

Depth-first enumeration over all h**n assignments with an incremental
partial cost and an admissible bound (each unassigned non-hub can at
best pay its cheapest weighted collection cost, since hub-pair costs are
non-negative). Ties resolve to the lexicographically smallest assignment
because hubs are scanned in ascending index order and the incumbent only
moves on strict improvement.
"""

from __future__ import annotations

import numpy as np

from .instance import (
    Assignment,
    Instance,
    merged_pair_weights,
    node_weights,
    star_costs,
)

__all__ = ["solve_exact", "EnumerationLimitError"]

DEFAULT_LIMIT = 10**8


class EnumerationLimitError(RuntimeError):
    def __init__(self, size: int, limit: int):
        super().__init__(
            f"search space h**n = {size} exceeds limit {limit}; "
            "use the LP relaxation value as a lower bound instead"
        )


def solve_exact(inst: Instance, limit: int = DEFAULT_LIMIT) -> tuple[Assignment, float]:
    """Global optimum of the assignment objective."""
    n, h = inst.n, inst.h
    size = h**n
    if size > limit:
        raise EnumerationLimitError(size, limit)
    weights = node_weights(inst)
    pair_w = merged_pair_weights(inst)
    star = star_costs(inst.spoke_lengths)
    collect = weights[:, None] * inst.collection_costs  # (n, h)

    # Admissible completion bound: cheapest collection term per node.
    per_node_min = collect.min(axis=1)
    suffix = np.zeros(n + 1)
    for p in range(n - 1, -1, -1):
        suffix[p] = suffix[p + 1] + per_node_min[p]

    best_value = np.inf
    best: list[int] | None = None
    current = [0] * n

    def descend(depth: int, partial: float) -> None:
        nonlocal best_value, best
        if depth == n:
            if partial < best_value:
                best_value = partial
                best = current.copy()
            return
        for hub in range(h):
            delta = collect[depth, hub]
            for s in range(depth):
                v = pair_w[depth, s]
                if v > 0.0:
                    delta += v * star[hub, current[s]]
            total = partial + delta
            if total + suffix[depth + 1] >= best_value:
                continue
            current[depth] = hub
            descend(depth + 1, total)
        current[depth] = 0

    descend(0, 0.0)
    assert best is not None
    return Assignment(tuple(best)), float(best_value)
