"""Fault tree analysis: minimal cut sets and top-event probability.

Trees are coherent by construction (AND/OR gates only, immutable nested
structure), so the structure function is monotone and acyclic. Minimal cut
sets come from top-down gate expansion (OR splits rows, AND extends rows)
followed by absorption; the exact top probability comes from full state
enumeration over the basic events.
"""

from __future__ import annotations

from typing import Iterator, Mapping

import numpy as np

from .errors import CapExceededError, MissingAssignmentError
from .model import BasicEvent, FaultTree, Gate, GateOp, Probability, UncertainQuantity

EXACT_EVENT_CAP = 20
MCS_EVENT_CAP = 64

CutSet = frozenset[str]


def _walk(gate: Gate) -> Iterator[Gate | BasicEvent]:
    yield gate
    for child in gate.children:
        if isinstance(child, Gate):
            yield from _walk(child)
        else:
            yield child


def basic_events(tree: FaultTree) -> dict[str, UncertainQuantity]:
    """Basic events by id (first declaration wins), in sorted id order."""
    found: dict[str, UncertainQuantity] = {}
    for node in _walk(tree.top):
        if isinstance(node, BasicEvent) and node.id not in found:
            found[node.id] = node.probability
    return {eid: found[eid] for eid in sorted(found)}


def point_assignment(tree: FaultTree) -> dict[str, float]:
    """Mean-reduced point probabilities for every basic event."""
    return {eid: q.point_value() for eid, q in basic_events(tree).items()}


def minimal_cut_sets(tree: FaultTree, *, event_cap: int = MCS_EVENT_CAP) -> tuple[CutSet, ...]:
    """All minimal cut sets, ordered by cardinality then lexicographically.

    Every returned set is a cut set, none contains another as a proper
    subset, and the collection is complete.
    """
    events = basic_events(tree)
    if len(events) > event_cap:
        raise CapExceededError(f"minimal cut sets for {tree.id}", len(events), event_cap)

    # Rows are partial cut sets mixing event ids with unexpanded gates.
    rows: set[frozenset] = {frozenset({tree.top})}
    while True:
        expandable = next((row for row in rows if any(isinstance(x, Gate) for x in row)), None)
        if expandable is None:
            break
        rows.discard(expandable)
        gate = next(x for x in expandable if isinstance(x, Gate))
        rest = expandable - {gate}
        children = [c.id if isinstance(c, BasicEvent) else c for c in gate.children]
        if gate.op is GateOp.AND:
            rows.add(rest | frozenset(children))
        else:
            for child in children:
                rows.add(rest | frozenset({child}))

    cut_sets = [frozenset(row) for row in rows]  # all elements are event ids now
    cut_sets.sort(key=lambda s: (len(s), sorted(s)))
    minimal: list[CutSet] = []
    for cs in cut_sets:
        if not any(kept <= cs for kept in minimal):
            minimal.append(cs)
    return tuple(minimal)


def _resolve_assignment(tree: FaultTree, assignment: Mapping[str, float] | None) -> tuple[list[str], np.ndarray]:
    events = basic_events(tree)
    if assignment is None:
        assignment = point_assignment(tree)
    ids = sorted(events)
    probs = np.empty(len(ids))
    for i, eid in enumerate(ids):
        if eid not in assignment:
            raise MissingAssignmentError(f"no probability assigned to basic event {eid}")
        p = float(assignment[eid])
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"probability for {eid} out of range: {p!r}")
        probs[i] = p
    return ids, probs


def structure_table(tree: FaultTree, ids: list[str]) -> np.ndarray:
    """Boolean top-event state for every failure combination of ``ids``.

    Entry ``m`` corresponds to the state where event ``ids[i]`` has failed
    iff bit ``i`` of ``m`` is set.
    """
    n = len(ids)
    index = {eid: i for i, eid in enumerate(ids)}
    masks = np.arange(1 << n, dtype=np.uint64)
    bit_cache: dict[int, np.ndarray] = {}

    def bits(i: int) -> np.ndarray:
        if i not in bit_cache:
            bit_cache[i] = (masks >> np.uint64(i)) & np.uint64(1) != 0
        return bit_cache[i]

    def eval_node(node) -> np.ndarray:
        if isinstance(node, BasicEvent):
            return bits(index[node.id])
        child_states = [eval_node(c) for c in node.children]
        if node.op is GateOp.AND:
            return np.logical_and.reduce(child_states)
        return np.logical_or.reduce(child_states)

    return eval_node(tree.top)


def top_probability_exact(
    tree: FaultTree,
    assignment: Mapping[str, float] | None = None,
    *,
    event_cap: int = EXACT_EVENT_CAP,
) -> Probability:
    """Exact top-event probability under independent basic events.

    Computed by full enumeration of the 2^n failure states; limited to
    ``event_cap`` basic events.
    """
    ids, probs = _resolve_assignment(tree, assignment)
    n = len(ids)
    if n > event_cap:
        raise CapExceededError(f"exact top probability for {tree.id}", n, event_cap)
    top = structure_table(tree, ids)
    masks = np.arange(1 << n, dtype=np.uint64)
    state_p = np.ones(1 << n)
    for i in range(n):
        failed = (masks >> np.uint64(i)) & np.uint64(1) != 0
        state_p *= np.where(failed, probs[i], 1.0 - probs[i])
    total = float(state_p[top].sum())
    return Probability(min(1.0, max(0.0, total)))


def top_probability_rare(
    tree: FaultTree,
    assignment: Mapping[str, float] | None = None,
    *,
    event_cap: int = MCS_EVENT_CAP,
) -> Probability:
    """Rare-event upper bound: min(1, sum over minimal cut sets of the product
    of event probabilities). Always >= the exact probability for coherent trees."""
    ids, probs = _resolve_assignment(tree, assignment)
    lookup = dict(zip(ids, probs))
    total = 0.0
    for cs in minimal_cut_sets(tree, event_cap=event_cap):
        term = 1.0
        for eid in sorted(cs):
            term *= lookup[eid]
        total += term
    return Probability(min(1.0, total))
