import numpy as np
import pytest

from starhub import Instance, generate_random


def naive_cost(inst, hubs):
    """Straight-loop reference evaluator, independent of the library's
    vectorized implementation."""
    total = 0.0
    ell = inst.spoke_lengths
    for p in range(inst.n):
        for q in range(inst.n):
            if p == q:
                continue
            w = inst.flows[p][q]
            if w == 0:
                continue
            i, j = hubs[p], hubs[q]
            between = 0.0 if i == j else ell[i] + ell[j]
            total += w * (
                inst.collection_costs[p][i] + inst.collection_costs[q][j] + between
            )
    return total


@pytest.fixture
def small_instance():
    return generate_random(7, n=4, h=3, ell_max=9, c_max=5.0, w_max=3.0, density=0.8)


@pytest.fixture
def conflict_instance():
    """Symmetric three-node instance whose relaxation optimum is strictly
    fractional (half-integral): node p must avoid hub p, all spokes 1."""
    c = np.zeros((3, 3))
    np.fill_diagonal(c, 100.0)
    w = np.ones((3, 3))
    np.fill_diagonal(w, 0.0)
    return Instance((1, 1, 1), c, w)
