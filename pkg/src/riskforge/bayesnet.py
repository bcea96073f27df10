"""Discrete Bayesian networks: exact inference by variable elimination.

Only finite-state nodes are supported; continuous quantities must be
discretized upstream. Elimination uses the min-fill heuristic with a
lexicographic tie-break, so query results are reproducible; posteriors are
identical (to ~1e-12) under any valid elimination order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    CapExceededError,
    InconsistentEvidenceError,
    ModelError,
    UnknownNodeError,
    UnknownStateError,
)
from .model import BayesNet, BayesNode
from .validation import ValidationReport, _report, bayes_net_findings

JOINT_ENTRY_CAP = 4096


@dataclass(frozen=True)
class Factor:
    """A non-negative table over the joint states of ``scope``."""

    scope: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.values.ndim != len(self.scope):
            raise ValueError("factor rank does not match scope length")


@dataclass(frozen=True)
class Posterior:
    """P(node | evidence): a distribution over the node's states."""

    node: str
    states: tuple[str, ...]
    probabilities: tuple[float, ...]

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.states, self.probabilities))

    def __getitem__(self, state: str) -> float:
        return self.as_dict()[state]


def validate_cpts(net: BayesNet) -> ValidationReport:
    """Findings for row-sum violations, missing/duplicate rows, and cycles."""
    return _report(bayes_net_findings(net))


def _topological_order(net: BayesNet) -> list[BayesNode]:
    remaining = {n.id: set(n.parents) for n in net.nodes}
    ordered: list[BayesNode] = []
    while remaining:
        ready = sorted(nid for nid, deps in remaining.items() if not deps)
        if not ready:
            raise ModelError(f"bnet {net.id} contains a directed cycle")
        for nid in ready:
            del remaining[nid]
            ordered.append(net.node_map[nid])
        for deps in remaining.values():
            deps.difference_update(ready)
    return ordered


def _node_factor(net: BayesNet, node: BayesNode) -> Factor:
    """CPT as a factor over (parents..., node)."""
    parents = [net.node_map[p] for p in node.parents]
    shape = tuple(len(p.states) for p in parents) + (len(node.states),)
    values = np.zeros(shape)
    rows = {row.key: row.values for row in node.cpt}
    for combo_idx in itertools.product(*(range(len(p.states)) for p in parents)):
        key = tuple(parents[i].states[combo_idx[i]] for i in range(len(parents)))
        if key not in rows:
            raise ModelError(f"node {node.id}: no CPT row for parent states {key}")
        values[combo_idx] = rows[key]
    return Factor(tuple(node.parents) + (node.id,), values)


def _restrict(factor: Factor, evidence: Mapping[str, int]) -> Factor:
    """Fix evidence variables to their observed state indices."""
    scope = list(factor.scope)
    values = factor.values
    for var in [v for v in scope if v in evidence]:
        axis = scope.index(var)
        values = np.take(values, evidence[var], axis=axis)
        scope.pop(axis)
    return Factor(tuple(scope), values)


def _multiply(a: Factor, b: Factor) -> Factor:
    scope = list(a.scope) + [v for v in b.scope if v not in a.scope]
    av = _expand(a, scope)
    bv = _expand(b, scope)
    return Factor(tuple(scope), av * bv)


def _expand(factor: Factor, scope: Sequence[str]) -> np.ndarray:
    """Broadcast a factor's values to the axis order of ``scope``."""
    src = list(factor.scope)
    perm = [src.index(v) for v in scope if v in src]
    values = factor.values.transpose(perm) if perm else factor.values
    shape = [values.shape[[v for v in scope if v in src].index(v)] if v in src else 1 for v in scope]
    return values.reshape(shape)


def _sum_out(factor: Factor, var: str) -> Factor:
    axis = factor.scope.index(var)
    scope = factor.scope[:axis] + factor.scope[axis + 1 :]
    return Factor(scope, factor.values.sum(axis=axis))


def _min_fill_order(scopes: list[tuple[str, ...]], to_eliminate: set[str]) -> list[str]:
    """Min-fill elimination order with deterministic lexicographic tie-break."""
    neighbors: dict[str, set[str]] = {}
    for scope in scopes:
        for v in scope:
            neighbors.setdefault(v, set()).update(u for u in scope if u != v)
    remaining = set(to_eliminate)
    order: list[str] = []
    while remaining:
        best: tuple[int, str] | None = None
        for v in sorted(remaining):
            nbrs = [u for u in neighbors.get(v, ()) if u != v]
            fill = sum(
                1
                for a, b in itertools.combinations(sorted(nbrs), 2)
                if b not in neighbors.get(a, ())
            )
            if best is None or fill < best[0]:
                best = (fill, v)
        v = best[1]
        order.append(v)
        remaining.discard(v)
        nbrs = {u for u in neighbors.pop(v, set()) if u != v}
        for a in nbrs:
            neighbors[a].discard(v)
            neighbors[a].update(u for u in nbrs if u != a)
    return order


def _check_evidence(net: BayesNet, evidence: Mapping[str, str]) -> dict[str, int]:
    resolved: dict[str, int] = {}
    for var, state in evidence.items():
        node = net.node_map.get(var)
        if node is None:
            raise UnknownNodeError(f"unknown node {var}")
        if state not in node.states:
            raise UnknownStateError(f"node {var} has no state {state!r}")
        resolved[var] = node.states.index(state)
    return resolved


def query(
    net: BayesNet,
    target: str,
    evidence: Mapping[str, str] | None = None,
    *,
    elimination_order: Sequence[str] | None = None,
) -> Posterior:
    """Exact posterior P(target | evidence) via variable elimination.

    ``elimination_order`` overrides the min-fill heuristic (it must cover
    exactly the non-target, non-evidence variables); results are identical
    either way up to floating-point roundoff.
    """
    evidence = evidence or {}
    node = net.node_map.get(target)
    if node is None:
        raise UnknownNodeError(f"unknown node {target}")
    if target in evidence:
        raise ModelError(f"query target {target} is also evidence")
    evidence_idx = _check_evidence(net, evidence)

    factors = [_restrict(_node_factor(net, n), evidence_idx) for n in net.nodes]
    to_eliminate = {n.id for n in net.nodes} - set(evidence_idx) - {target}
    if elimination_order is not None:
        if set(elimination_order) != to_eliminate:
            raise ValueError("elimination order must cover exactly the hidden variables")
        order = list(elimination_order)
    else:
        order = _min_fill_order([f.scope for f in factors], to_eliminate)

    for var in order:
        related = [f for f in factors if var in f.scope]
        if not related:
            continue
        product = related[0]
        for f in related[1:]:
            product = _multiply(product, f)
        factors = [f for f in factors if var not in f.scope]
        factors.append(_sum_out(product, var))

    result = factors[0]
    for f in factors[1:]:
        result = _multiply(result, f)
    if result.scope != (target,):
        result = Factor((target,), np.atleast_1d(np.squeeze(_expand(result, [target]))))
    total = float(result.values.sum())
    if total <= 0.0:
        raise InconsistentEvidenceError(f"evidence has probability zero in bnet {net.id}")
    probs = result.values / total
    return Posterior(target, node.states, tuple(float(p) for p in probs))


def joint_enumerate(net: BayesNet, *, entry_cap: int = JOINT_ENTRY_CAP) -> Factor:
    """The full normalized joint distribution over all nodes.

    Scope follows the net's canonical (sorted) node order; intended as a
    small-model oracle, capped at ``entry_cap`` joint entries.
    """
    ordered = _topological_order(net)  # also rejects cyclic nets
    total_entries = 1
    for n in net.nodes:
        total_entries *= len(n.states)
        if total_entries > entry_cap:
            raise CapExceededError(f"joint enumeration for {net.id}", total_entries, entry_cap)
    scope = [n.id for n in net.nodes]
    joint = Factor((), np.array(1.0))
    for node in ordered:
        joint = _multiply(joint, _node_factor(net, node))
    values = _expand(joint, scope)
    values = values / values.sum()
    return Factor(tuple(scope), values)
