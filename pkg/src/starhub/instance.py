"""Problem instances for star-star hub assignment.

An instance couples ``h`` hub nodes with ``n`` non-hub nodes. Every hub
hangs off a central depot by a spoke of integer length, so routing one
unit of flow between hubs ``i`` and ``j`` costs ``l[i] + l[j]`` (zero if
``i == j``). Sending the demand ``w[p][q]`` from non-hub ``p`` to non-hub
``q`` through their assigned hubs additionally pays the collection costs
``c[p][i]`` and ``c[q][j]``.

Spoke lengths are canonically kept sorted non-decreasing; loaders record
the original hub order in ``hub_ids`` so external labels survive.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "Instance",
    "Assignment",
    "InstanceError",
    "InvalidInstanceError",
    "InstanceParseError",
    "DimensionMismatchError",
    "star_costs",
    "evaluate_cost",
    "node_weights",
    "merged_pair_weights",
    "generate_random",
    "read_instance",
    "write_instance",
    "load_instance",
    "save_instance",
]


class InstanceError(ValueError):
    """Base class for instance construction and parsing errors."""


class InvalidInstanceError(InstanceError):
    """An instance violates a structural rule; ``rule`` names it."""

    def __init__(self, rule: str, message: str):
        self.rule = rule
        super().__init__(f"{rule}: {message}")


class InstanceParseError(InstanceError):
    """A serialized instance could not be parsed; ``field`` gives context."""

    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"field {field_name!r}: {message}")


class DimensionMismatchError(InstanceError):
    pass


@dataclass(frozen=True)
class Instance:
    """Immutable problem data.

    Attributes:
        spoke_lengths: integer spoke length per hub, sorted non-decreasing.
        collection_costs: (n, h) matrix, cost per unit flow non-hub <-> hub.
        flows: (n, n) demand matrix with zero diagonal.
        hub_ids: external label of each (internally sorted) hub; identity
            for generated instances.
    """

    spoke_lengths: tuple[int, ...]
    collection_costs: np.ndarray
    flows: np.ndarray
    hub_ids: tuple[int, ...] = field(default=())

    def __post_init__(self):
        ell = tuple(int(v) for v in self.spoke_lengths)
        c = np.array(self.collection_costs, dtype=float)
        w = np.array(self.flows, dtype=float)
        object.__setattr__(self, "spoke_lengths", ell)
        object.__setattr__(self, "collection_costs", c)
        object.__setattr__(self, "flows", w)
        if not self.hub_ids:
            object.__setattr__(self, "hub_ids", tuple(range(len(ell))))
        self.validate()
        c.setflags(write=False)
        w.setflags(write=False)

    @property
    def h(self) -> int:
        return len(self.spoke_lengths)

    @property
    def n(self) -> int:
        return self.collection_costs.shape[0]

    def validate(self) -> None:
        """Check every structural invariant, raising InvalidInstanceError."""
        ell = self.spoke_lengths
        if len(ell) < 1:
            raise InvalidInstanceError("hub-count-positive", "need at least one hub")
        for i, v in enumerate(ell):
            if v < 0:
                raise InvalidInstanceError(
                    "spoke-lengths-nonnegative", f"ell[{i}] = {v} < 0"
                )
        if any(ell[i] > ell[i + 1] for i in range(len(ell) - 1)):
            raise InvalidInstanceError(
                "spoke-lengths-sorted", f"ell = {ell} is not non-decreasing"
            )
        c = self.collection_costs
        if c.ndim != 2 or c.shape[0] < 1 or c.shape[1] != len(ell):
            raise InvalidInstanceError(
                "collection-costs-shape",
                f"expected (n, {len(ell)}) matrix, got {c.shape}",
            )
        if not np.all(np.isfinite(c)) or np.any(c < 0):
            raise InvalidInstanceError(
                "collection-costs-nonnegative", "entries must be finite and >= 0"
            )
        w = self.flows
        n = c.shape[0]
        if w.shape != (n, n):
            raise InvalidInstanceError(
                "flows-shape", f"expected ({n}, {n}) matrix, got {w.shape}"
            )
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise InvalidInstanceError(
                "flows-nonnegative", "entries must be finite and >= 0"
            )
        if np.any(np.diagonal(w) != 0):
            bad = int(np.flatnonzero(np.diagonal(w))[0])
            raise InvalidInstanceError(
                "flows-zero-diagonal", f"w[{bad}][{bad}] must be 0"
            )
        if len(self.hub_ids) != len(ell):
            raise InvalidInstanceError(
                "hub-ids-shape", "hub_ids length must equal hub count"
            )


@dataclass(frozen=True)
class Assignment:
    """Total map non-hub -> hub (0-based hub indices)."""

    hubs: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "hubs", tuple(int(i) for i in self.hubs))


def star_costs(spoke_lengths: Sequence[int]) -> np.ndarray:
    """Hub-pair cost matrix: l[i] + l[j] off the diagonal, 0 on it."""
    ell = np.asarray(spoke_lengths, dtype=float)
    costs = ell[:, None] + ell[None, :]
    np.fill_diagonal(costs, 0.0)
    return costs


def node_weights(inst: Instance) -> np.ndarray:
    """Total flow touching each non-hub (in plus out)."""
    return inst.flows.sum(axis=1) + inst.flows.sum(axis=0)


def merged_pair_weights(inst: Instance) -> np.ndarray:
    """Symmetric demand matrix w + w^T (zero diagonal)."""
    return inst.flows + inst.flows.T


def _as_hub_vector(inst: Instance, assignment) -> np.ndarray:
    hubs = assignment.hubs if isinstance(assignment, Assignment) else assignment
    f = np.asarray(hubs, dtype=int)
    if f.shape != (inst.n,):
        raise DimensionMismatchError(
            f"assignment length {f.shape} does not match n = {inst.n}"
        )
    if np.any(f < 0) or np.any(f >= inst.h):
        raise DimensionMismatchError(
            f"assignment targets must lie in [0, {inst.h})"
        )
    return f


def evaluate_cost(inst: Instance, assignment) -> float:
    """Exact objective of an integral assignment.

    Sums, over ordered demand pairs (p, q), the collection costs at both
    endpoints plus the hub-pair cost between their assigned hubs.
    """
    f = _as_hub_vector(inst, assignment)
    weights = node_weights(inst)
    collect = float(weights @ inst.collection_costs[np.arange(inst.n), f])
    star = star_costs(inst.spoke_lengths)
    between = 0.5 * float((merged_pair_weights(inst) * star[f][:, f]).sum())
    return collect + between


def generate_random(
    seed,
    n: int,
    h: int,
    ell_max: int = 20,
    c_max: float = 10.0,
    w_max: float = 5.0,
    density: float = 0.5,
) -> Instance:
    """Deterministic random instance. Out-of-range parameters are clamped
    with a warning rather than rejected."""
    if n < 1 or h < 1:
        warnings.warn(f"clamping n={n}, h={h} up to 1", stacklevel=2)
        n, h = max(n, 1), max(h, 1)
    if not 0.0 <= density <= 1.0:
        warnings.warn(f"clamping density={density} into [0, 1]", stacklevel=2)
        density = min(max(density, 0.0), 1.0)
    if ell_max < 0 or c_max < 0 or w_max < 0:
        warnings.warn("clamping negative ranges up to 0", stacklevel=2)
        ell_max, c_max, w_max = max(ell_max, 0), max(c_max, 0.0), max(w_max, 0.0)
    rng = np.random.default_rng(seed)
    ell = np.sort(rng.integers(0, ell_max + 1, size=h))
    c = rng.uniform(0.0, c_max, size=(n, h))
    w = rng.uniform(0.0, w_max, size=(n, n))
    keep = rng.random((n, n)) < density
    w = np.where(keep, w, 0.0)
    np.fill_diagonal(w, 0.0)
    return Instance(tuple(int(v) for v in ell), c, w)


_SIG_DIGITS = ".17g"


def _fmt_real(x: float) -> str:
    return format(float(x), _SIG_DIGITS)


def write_instance(inst: Instance) -> str:
    """Serialize to the JSON schema {"h","n","ell","c","w"}, keys in that
    order, reals written with 17 significant digits."""
    c_rows = ",\n    ".join(
        "[" + ", ".join(_fmt_real(v) for v in row) + "]"
        for row in inst.collection_costs
    )
    w_rows = ",\n    ".join(
        "[" + ", ".join(_fmt_real(v) for v in row) + "]" for row in inst.flows
    )
    ell = ", ".join(str(int(v)) for v in inst.spoke_lengths)
    return (
        "{\n"
        f'  "h": {inst.h},\n'
        f'  "n": {inst.n},\n'
        f'  "ell": [{ell}],\n'
        f'  "c": [\n    {c_rows}\n  ],\n'
        f'  "w": [\n    {w_rows}\n  ]\n'
        "}\n"
    )


def read_instance(text: str) -> Instance:
    """Parse the JSON schema. Unsorted spoke lengths are accepted: hubs are
    re-sorted canonically and collection-cost columns permuted to match,
    with the original positions recorded in ``hub_ids``."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceParseError("<document>", f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InstanceParseError("<document>", "top level must be an object")
    for key in ("h", "n", "ell", "c", "w"):
        if key not in data:
            raise InstanceParseError(key, "missing required key")
    try:
        h = int(data["h"])
        n = int(data["n"])
    except (TypeError, ValueError) as exc:
        raise InstanceParseError("h/n", f"must be integers: {exc}") from exc
    ell_raw = data["ell"]
    if not isinstance(ell_raw, list) or len(ell_raw) != h:
        raise InstanceParseError("ell", f"must be a list of {h} integers")
    for i, v in enumerate(ell_raw):
        if not isinstance(v, (int, float)) or int(v) != v:
            raise InstanceParseError("ell", f"ell[{i}] = {v!r} is not an integer")
        if v < 0:
            raise InstanceParseError("ell", f"ell[{i}] = {v} is negative")
    ell = np.asarray([int(v) for v in ell_raw], dtype=int)
    c = _read_matrix(data["c"], "c", n, h)
    w = _read_matrix(data["w"], "w", n, n)
    for p in range(n):
        if w[p, p] != 0:
            raise InstanceParseError("w", f"w[{p}][{p}] = {w[p, p]} must be 0")
    order = np.argsort(ell, kind="stable")
    try:
        return Instance(
            tuple(int(v) for v in ell[order]),
            c[:, order],
            w,
            hub_ids=tuple(int(v) for v in order),
        )
    except InvalidInstanceError as exc:
        raise InstanceParseError("<instance>", str(exc)) from exc


def _read_matrix(raw, name: str, rows: int, cols: int) -> np.ndarray:
    if not isinstance(raw, list) or len(raw) != rows:
        raise InstanceParseError(name, f"must be a list of {rows} rows")
    out = np.empty((rows, cols), dtype=float)
    for r, row in enumerate(raw):
        if not isinstance(row, list) or len(row) != cols:
            raise InstanceParseError(name, f"row {r} must have {cols} entries")
        for k, v in enumerate(row):
            if not isinstance(v, (int, float)):
                raise InstanceParseError(name, f"entry [{r}][{k}] = {v!r} not a number")
            if v < 0 or not np.isfinite(float(v)):
                raise InstanceParseError(
                    name, f"entry [{r}][{k}] = {v} must be finite and >= 0"
                )
            out[r, k] = float(v)
    return out


def load_instance(path) -> Instance:
    with open(path, "r", encoding="utf-8") as fh:
        return read_instance(fh.read())


def save_instance(inst: Instance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(write_instance(inst))
