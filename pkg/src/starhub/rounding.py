"""Randomized rounding of a fractional hub assignment.

The pipeline per trial:

1. draw a shift in [0, 1) and bucket hubs into geometric classes of the
   spoke length (base r, shifted exponent grid);
2. classify every non-hub into one hub class using a single shared
   uniform threshold against prefix sums of its x row, taken in a fixed
   total hub order (dependent rounding: identical rows always land in
   the same class);
3. inside each class, repeatedly pick a hub uniformly and a fresh
   threshold, assigning every still-unassigned non-hub whose x entry
   reaches it.

The total hub order walks class labels in the parity sequence
(largest-even, ..., 4, 2, 0, 1, 3, ...), which lines classes up along a
line metric of the class scale values.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .instance import Assignment, Instance, evaluate_cost
from .lp import FractionalSolution, build_lrp, solve

__all__ = [
    "DEFAULT_R",
    "HubClassing",
    "ClassPartition",
    "RoundingTrace",
    "RoundingResult",
    "RoundingError",
    "classify_hubs",
    "classify_nonhubs",
    "assign_within_classes",
    "round_fractional",
    "replay_trace",
    "run_pipeline",
]

DEFAULT_R = 1.91065

PHASE_CAP = 10**6


class RoundingError(RuntimeError):
    """Internal failure of the rounding state machine (float pathology)."""


@dataclass(frozen=True)
class HubClassing:
    """Per-hub class labels and derived ordering for one (r, shift) draw.

    ``scales[i]`` is the right endpoint of hub i's class interval
    (r ** (class - 1 + shift)), zero for zero-length spokes. It always
    satisfies ell[i] < scales[i] <= r * ell[i] when ell[i] >= 1.
    """

    r: float
    shift: float
    classes: tuple[int, ...]
    max_class: int
    scales: tuple[float, ...]
    class_order: tuple[int, ...]
    hub_order: tuple[int, ...]

    def members(self, label: int) -> tuple[int, ...]:
        return tuple(i for i, k in enumerate(self.classes) if k == label)


@dataclass(frozen=True)
class ClassPartition:
    """Class label per non-hub plus the shared threshold that produced it."""

    labels: tuple[int, ...]
    threshold: float

    def group(self, label: int) -> tuple[int, ...]:
        return tuple(p for p, k in enumerate(self.labels) if k == label)


@dataclass(frozen=True)
class RoundingTrace:
    """Complete record of one trial; replaying it reproduces the
    assignment bit for bit."""

    shift: float
    threshold: float
    phases: tuple[tuple[int, int, float, tuple[int, ...]], ...]
    assignment: Assignment
    seed: object = None


@dataclass
class RoundingResult:
    assignment: Assignment
    cost: float
    costs: np.ndarray
    fractional: FractionalSolution
    r: float
    seed: int
    trials: int
    best_trace: RoundingTrace | None = None


def classify_hubs(spoke_lengths: Sequence[int], r: float, shift: float) -> HubClassing:
    """Bucket hubs by spoke length.

    A zero-length spoke is class 0. Otherwise the class is the unique
    positive integer k with r**max(k-2+shift, 0) <= ell < r**(k-1+shift),
    found by scanning the intervals directly so no logarithm rounding can
    misclassify a boundary value.
    """
    if not r > 1.0:
        raise ValueError(f"r must exceed 1, got {r}")
    if not 0.0 <= shift < 1.0:
        raise ValueError(f"shift must lie in [0, 1), got {shift}")
    classes = []
    scales = []
    for ell in spoke_lengths:
        if ell == 0:
            classes.append(0)
            scales.append(0.0)
            continue
        k = 1
        while True:
            hi = r ** ((k - 1) + shift)
            if r ** max((k - 2) + shift, 0.0) <= ell < hi:
                break
            k += 1
            if k > 10_000:
                raise RoundingError(f"class scan failed for ell={ell}, r={r}")
        classes.append(k)
        scales.append(hi)
    max_class = max(classes)
    class_order = _parity_order(max_class)
    by_class: dict[int, list[int]] = {}
    for i, k in enumerate(classes):
        by_class.setdefault(k, []).append(i)
    hub_order: list[int] = []
    for label in class_order:
        group = by_class.get(label, [])
        group.sort(key=lambda i: (spoke_lengths[i], i))
        hub_order.extend(group)
    return HubClassing(
        r=float(r),
        shift=float(shift),
        classes=tuple(classes),
        max_class=max_class,
        scales=tuple(scales),
        class_order=class_order,
        hub_order=tuple(hub_order),
    )


def _parity_order(max_class: int) -> tuple[int, ...]:
    top_even = max_class if max_class % 2 == 0 else max_class - 1
    top_odd = max_class - 1 if max_class % 2 == 0 else max_class
    evens = list(range(top_even, -1, -2))
    odds = list(range(1, top_odd + 1, 2))
    return tuple(evens + odds)


def classify_nonhubs(x, classing: HubClassing, threshold: float) -> ClassPartition:
    """Dependent rounding over one shared threshold.

    Non-hub p lands in the class of the first hub (in the total order)
    whose prefix sum of x[p] exceeds the threshold. If the row sum falls
    short of the threshold by float rounding, the last hub's class is
    used so the map stays total.
    """
    rows = x.tolist() if isinstance(x, np.ndarray) else x
    order = classing.hub_order
    classes = classing.classes
    labels = []
    for row in rows:
        cum = 0.0
        chosen = classes[order[-1]]
        for i in order:
            cum += row[i]
            if threshold < cum:
                chosen = classes[i]
                break
        labels.append(chosen)
    return ClassPartition(labels=tuple(labels), threshold=float(threshold))


def assign_within_classes(
    x,
    classing: HubClassing,
    partition: ClassPartition,
    rng: np.random.Generator,
    *,
    truncate: bool = True,
    phase_cap: int = PHASE_CAP,
) -> RoundingTrace:
    """Per-class phase loop.

    Each phase draws a hub of the class uniformly and a threshold, then
    assigns every remaining non-hub of the class whose x entry reaches
    the threshold. With ``truncate`` the threshold is drawn from
    [0, M) where M is the largest x entry still alive in the class; that
    skips only phases which could not assign anybody, so the resulting
    assignment distribution is unchanged.
    """
    rows = x.tolist() if isinstance(x, np.ndarray) else x
    n = len(rows)
    assigned = [-1] * n
    phases: list[tuple[int, int, float, tuple[int, ...]]] = []
    for label in range(classing.max_class + 1):
        pending = [p for p in range(n) if partition.labels[p] == label]
        if not pending:
            continue
        hubs = classing.members(label)
        assert hubs, f"non-hubs classified into empty hub class {label}"
        for p in pending:
            assert sum(rows[p][i] for i in hubs) > 0.0, (
                f"non-hub {p} has zero mass on class {label}"
            )
        count = 0
        while pending:
            bound = 1.0
            if truncate:
                bound = max(rows[p][i] for p in pending for i in hubs)
                if bound <= 0.0:
                    raise RoundingError(
                        f"class {label} has no remaining positive mass"
                    )
            hub = hubs[int(rng.integers(len(hubs)))]
            u = rng.random() * bound
            hit = tuple(p for p in pending if u <= rows[p][hub])
            phases.append((label, hub, u, hit))
            if hit:
                for p in hit:
                    assigned[p] = hub
                pending = [p for p in pending if assigned[p] < 0]
            count += 1
            if count > phase_cap:
                raise RoundingError(
                    f"phase cap {phase_cap} exceeded in class {label}"
                )
    return RoundingTrace(
        shift=classing.shift,
        threshold=partition.threshold,
        phases=tuple(phases),
        assignment=Assignment(tuple(assigned)),
    )


def round_fractional(
    x,
    spoke_lengths: Sequence[int],
    r: float,
    rng: np.random.Generator,
    *,
    shift: float | None = None,
    truncate: bool = True,
) -> RoundingTrace:
    """One full trial: draw the shift (unless fixed), classify hubs and
    non-hubs, then assign within classes."""
    if shift is None:
        shift = float(rng.random())
    classing = classify_hubs(spoke_lengths, r, shift)
    partition = classify_nonhubs(x, classing, float(rng.random()))
    return assign_within_classes(x, classing, partition, rng, truncate=truncate)


def replay_trace(x, spoke_lengths: Sequence[int], r: float, trace: RoundingTrace) -> Assignment:
    """Re-run a recorded trial deterministically and return its assignment.

    Raises RoundingError if the recorded per-phase hit sets cannot be
    reproduced, which would indicate the inputs differ from the original
    run.
    """
    rows = x.tolist() if isinstance(x, np.ndarray) else x
    classing = classify_hubs(spoke_lengths, r, trace.shift)
    partition = classify_nonhubs(rows, classing, trace.threshold)
    n = len(rows)
    assigned = [-1] * n
    pending = {
        label: [p for p in range(n) if partition.labels[p] == label]
        for label in range(classing.max_class + 1)
    }
    for label, hub, u, recorded in trace.phases:
        hit = tuple(p for p in pending[label] if u <= rows[p][hub])
        if hit != recorded:
            raise RoundingError("trace replay diverged from recorded phases")
        for p in hit:
            assigned[p] = hub
        pending[label] = [p for p in pending[label] if assigned[p] < 0]
    if any(a < 0 for a in assigned):
        raise RoundingError("trace replay left non-hubs unassigned")
    return Assignment(tuple(assigned))


def trial_rng(master_seed: int, index: int) -> np.random.Generator:
    """Independent per-trial stream derived from the master seed."""
    return np.random.default_rng([int(master_seed), int(index)])


def run_pipeline(
    inst: Instance,
    r: float = DEFAULT_R,
    trials: int = 1,
    seed: int = 0,
    *,
    truncate_u: bool = True,
    fractional: FractionalSolution | None = None,
    keep_best_trace: bool = False,
) -> RoundingResult:
    """Solve the relaxation once, then run independent rounding trials and
    keep the cheapest assignment."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not r > 1.0:
        raise ValueError(f"r must exceed 1, got {r}")
    if fractional is None:
        fractional = solve(build_lrp(inst))
    rows = fractional.x.tolist()
    costs = np.empty(trials)
    best_cost = np.inf
    best_assignment: Assignment | None = None
    best_trace: RoundingTrace | None = None
    for t in range(trials):
        rng = trial_rng(seed, t)
        trace = round_fractional(
            rows, inst.spoke_lengths, r, rng, truncate=truncate_u
        )
        cost = evaluate_cost(inst, trace.assignment)
        costs[t] = cost
        if cost < best_cost:
            best_cost = cost
            best_assignment = trace.assignment
            best_trace = replace(trace, seed=(seed, t))
    return RoundingResult(
        assignment=best_assignment,
        cost=float(best_cost),
        costs=costs,
        fractional=fractional,
        r=r,
        seed=seed,
        trials=trials,
        best_trace=best_trace if keep_best_trace else None,
    )
