"""Shared fixtures: independent oracles and seeded random model generators.

Oracles here are deliberately written against the raw model structures,
separately from the package's analysis code paths.
"""

from __future__ import annotations

import itertools
import random

import numpy as np

from riskforge.model import (
    BasicEvent,
    BayesNet,
    BayesNode,
    Branch,
    CptRow,
    EventTree,
    FaultTree,
    Gate,
    GateOp,
    HarmUnit,
    Outcome,
    QuantityRole,
    Severity,
    UncertainQuantity,
    ValueKind,
)

# --------------------------------------------------------------------------
# fault tree oracles
# --------------------------------------------------------------------------


def tree_fails(gate, failed: set[str]) -> bool:
    """Structure function evaluated by direct recursion."""
    if isinstance(gate, BasicEvent):
        return gate.id in failed
    results = [tree_fails(c, failed) for c in gate.children]
    return all(results) if gate.op is GateOp.AND else any(results)


def _mask_table(tree: FaultTree) -> tuple[list[str], np.ndarray]:
    """Top-event state for every one of the 2^n failure combinations."""
    ids = sorted({n.id for n in _walk(tree.top) if isinstance(n, BasicEvent)})
    index = {eid: i for i, eid in enumerate(ids)}
    masks = np.arange(1 << len(ids))

    def ev(node):
        if isinstance(node, BasicEvent):
            return (masks >> index[node.id]) & 1 == 1
        parts = np.stack([ev(c) for c in node.children])
        return parts.all(axis=0) if node.op is GateOp.AND else parts.any(axis=0)

    return ids, ev(tree.top)


def brute_force_cut_sets(tree: FaultTree) -> set[frozenset[str]]:
    """All minimal cut sets by enumerating every failure state."""
    ids, fails = _mask_table(tree)
    n = len(ids)
    minimal = set()
    for mask in np.nonzero(fails)[0]:
        mask = int(mask)
        if mask == 0:
            continue
        bits = [i for i in range(n) if mask >> i & 1]
        if all(not fails[mask & ~(1 << i)] for i in bits):
            minimal.add(frozenset(ids[i] for i in bits))
    return minimal


def brute_force_top_probability(tree: FaultTree, assignment: dict[str, float]) -> float:
    """Exact top probability by independent state enumeration."""
    ids, fails = _mask_table(tree)
    masks = np.arange(1 << len(ids))
    state_p = np.ones(1 << len(ids))
    for i, eid in enumerate(ids):
        failed = (masks >> i) & 1 == 1
        state_p *= np.where(failed, assignment[eid], 1.0 - assignment[eid])
    return float(state_p[fails].sum())


def _walk(gate):
    yield gate
    if isinstance(gate, Gate):
        for child in gate.children:
            yield from _walk(child)


def random_fault_tree(rng: random.Random, max_events: int = 12, tree_id: str = "T") -> FaultTree:
    """A random coherent AND/OR tree over up to ``max_events`` basic events.

    Event ids are drawn with replacement so repeats (shared events) occur.
    """
    n_events = rng.randint(1, max_events)
    ids = [f"E{i}" for i in range(n_events)]
    probs = {eid: UncertainQuantity.point(round(rng.uniform(0.01, 0.5), 6), role=QuantityRole.PROBABILITY) for eid in ids}
    used: set[str] = set()

    def event(eid: str) -> BasicEvent:
        used.add(eid)
        return BasicEvent(eid, probs[eid])

    def build(depth: int) -> Gate | BasicEvent:
        if depth >= 3 or rng.random() < 0.4:
            return event(rng.choice(ids))
        op = rng.choice((GateOp.AND, GateOp.OR))
        width = rng.randint(1, 3)
        return Gate(op, tuple(build(depth + 1) for _ in range(width)))

    top = build(0)
    if isinstance(top, BasicEvent):
        top = Gate(GateOp.OR, (top,))
    return FaultTree(tree_id, top)


# --------------------------------------------------------------------------
# event tree helpers
# --------------------------------------------------------------------------


def random_event_tree(rng: random.Random, tree_id: str = "ET") -> EventTree:
    counter = itertools.count()

    def build(depth: int):
        if depth >= 4 or rng.random() < 0.35:
            magnitude = round(rng.uniform(0, 1e6), 3)
            return Outcome(f"O{next(counter)}", Severity(magnitude, HarmUnit.MONETARY_LOSS))
        p = UncertainQuantity.point(round(rng.uniform(0.0, 1.0), 6), role=QuantityRole.PROBABILITY)
        return Branch(f"C{next(counter)}", p, build(depth + 1), build(depth + 1))

    root = build(0)
    if isinstance(root, Outcome):
        p = UncertainQuantity.point(0.5, role=QuantityRole.PROBABILITY)
        root = Branch(f"C{next(counter)}", p, root, Outcome(f"O{next(counter)}", Severity(0.0, HarmUnit.MONETARY_LOSS)))
    if rng.random() < 0.5:
        initiating = UncertainQuantity.point(round(rng.uniform(0, 1), 6), role=QuantityRole.PROBABILITY)
        kind = ValueKind.PROBABILITY
    else:
        initiating = UncertainQuantity.point(round(rng.uniform(0, 10), 6), role=QuantityRole.FREQUENCY)
        kind = ValueKind.FREQUENCY
    return EventTree(tree_id, initiating, kind, root)


# --------------------------------------------------------------------------
# Bayesian network oracle and generator
# --------------------------------------------------------------------------


def independent_joint(net: BayesNet) -> dict[tuple[str, ...], float]:
    """Full joint by direct assignment enumeration, keyed by state tuples
    following the net's canonical node order."""
    nodes = list(net.nodes)
    cpts = {node.id: {row.key: row.values for row in node.cpt} for node in nodes}
    joint: dict[tuple[str, ...], float] = {}
    for combo in itertools.product(*(node.states for node in nodes)):
        state_of = {node.id: combo[i] for i, node in enumerate(nodes)}
        p = 1.0
        for node in nodes:
            key = tuple(state_of[parent] for parent in node.parents)
            row = cpts[node.id][key]
            p *= row[node.states.index(state_of[node.id])]
        joint[combo] = p
    total = sum(joint.values())
    return {combo: p / total for combo, p in joint.items()}


def oracle_posterior(
    net: BayesNet,
    target: str,
    evidence: dict[str, str],
    joint: dict[tuple[str, ...], float] | None = None,
) -> dict[str, float]:
    """P(target | evidence) from the enumerated joint."""
    nodes = list(net.nodes)
    idx = {node.id: i for i, node in enumerate(nodes)}
    if joint is None:
        joint = independent_joint(net)
    target_states = net.node_map[target].states
    mass = {s: 0.0 for s in target_states}
    for combo, p in joint.items():
        if any(combo[idx[var]] != state for var, state in evidence.items()):
            continue
        mass[combo[idx[target]]] += p
    total = sum(mass.values())
    if total == 0:
        raise ZeroDivisionError("evidence has zero probability")
    return {s: v / total for s, v in mass.items()}


def random_bayes_net(rng: random.Random, max_nodes: int = 10, max_states: int = 3, net_id: str = "B") -> BayesNet:
    n = rng.randint(1, max_nodes)
    names = [f"N{i}" for i in range(n)]
    nodes = []
    for i, name in enumerate(names):
        n_states = rng.randint(2, max_states)
        states = tuple(f"s{j}" for j in range(n_states))
        n_parents = rng.randint(0, min(i, 2))
        parents = tuple(sorted(rng.sample(names[:i], n_parents)))
        parent_states = [next(nd.states for nd in nodes if nd.id == p) for p in parents]
        rows = []
        for key in itertools.product(*parent_states):
            raw = [rng.uniform(0.05, 1.0) for _ in states]
            total = sum(raw)
            values = tuple(v / total for v in raw)
            rows.append(CptRow(tuple(key), values))
        nodes.append(BayesNode(name, states, parents, tuple(rows)))
    return BayesNet(net_id, tuple(nodes))


# --------------------------------------------------------------------------
# interpolation / step oracles
# --------------------------------------------------------------------------


def segment_interpolation(anchors: list[tuple[float, float]], score: float) -> float:
    """Per-segment line equations, clamped at the terminal anchors."""
    if score <= anchors[0][0]:
        return anchors[0][1]
    if score >= anchors[-1][0]:
        return anchors[-1][1]
    for (x0, y0), (x1, y1) in zip(anchors, anchors[1:]):
        if x0 <= score <= x1:
            slope = (y1 - y0) / (x1 - x0)
            return y0 + slope * (score - x0)
    raise AssertionError("unreachable")


def step_lookup(points: list[tuple[float, float]], x: float) -> float:
    """Manual right-continuous step evaluation."""
    value = points[0][1]
    for s, p in points:
        if s <= x:
            value = p
        else:
            break
    return value
