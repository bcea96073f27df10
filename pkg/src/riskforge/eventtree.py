"""Event tree analysis: sequence enumeration and bow-tie composition.

Sequence values inherit the initiating unit (probability or events/year).
Branch failure probability is always the complement of the stored success
probability, so each node's two branch probabilities sum to one by
construction.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterator

from .errors import UnresolvedReferenceError
from .faulttree import EXACT_EVENT_CAP, MCS_EVENT_CAP, basic_events, top_probability_exact, top_probability_rare
from .model import (
    BowTie,
    Branch,
    EventTree,
    Outcome,
    QuantityRole,
    ScenarioModel,
    Severity,
    UncertainQuantity,
    ValueKind,
)

SUCCESS = "success"
FAILURE = "failure"


@dataclass(frozen=True)
class SequenceOutcome:
    """One root-to-outcome path with its probability/frequency and severity."""

    path: tuple[tuple[str, str], ...]
    outcome: str
    value: float
    kind: ValueKind
    severity: Severity


def walk_branches(node) -> Iterator[Branch | Outcome]:
    if isinstance(node, Branch):
        yield node
        yield from walk_branches(node.on_success)
        yield from walk_branches(node.on_failure)
    else:
        yield node


def condition_ids(tree: EventTree) -> tuple[str, ...]:
    """Distinct branch condition ids in sorted order."""
    return tuple(sorted({n.condition for n in walk_branches(tree.root) if isinstance(n, Branch)}))


def enumerate_sequences(
    tree: EventTree,
    *,
    branch_probabilities: dict[str, float] | None = None,
    initiating_value: float | None = None,
) -> list[SequenceOutcome]:
    """One entry per root-to-outcome path, success branch first, depth first.

    Each value is the initiating value times the product of the branch
    probabilities along the path. ``branch_probabilities`` and
    ``initiating_value`` override the tree's own (mean-reduced) values.
    """
    if initiating_value is None:
        initiating_value = tree.initiating.point_value()
    probs = branch_probabilities or {}
    sequences: list[SequenceOutcome] = []

    def descend(node, value: float, path: tuple[tuple[str, str], ...]) -> None:
        if isinstance(node, Outcome):
            sequences.append(SequenceOutcome(path, node.id, value, tree.initiating_kind, node.severity))
            return
        p = probs.get(node.condition)
        if p is None:
            p = node.success_probability.point_value()
        descend(node.on_success, value * p, path + ((node.condition, SUCCESS),))
        descend(node.on_failure, value * (1.0 - p), path + ((node.condition, FAILURE),))

    descend(tree.root, initiating_value, ())
    return sequences


def outcome_frequencies(sequences: list[SequenceOutcome]) -> dict[str, float]:
    """Aggregate sequence values by outcome id (first-encounter order)."""
    totals: dict[str, float] = {}
    for seq in sequences:
        totals[seq.outcome] = totals.get(seq.outcome, 0.0) + seq.value
    return totals


def compose_bowtie(
    bowtie: BowTie,
    model: ScenarioModel,
    *,
    exact_cap: int = EXACT_EVENT_CAP,
    mcs_cap: int = MCS_EVENT_CAP,
) -> EventTree:
    """Event tree whose initiating probability is the fault tree's top probability.

    Exact mode is used when the fault tree fits the exact-enumeration cap,
    otherwise the rare-event bound; the chosen mode is recorded on the
    returned tree's ``derived_mode``.
    """
    ft = model.fault_tree(bowtie.fault_tree)
    if ft is None:
        raise UnresolvedReferenceError(f"bowtie {bowtie.id}: unresolved reference {bowtie.fault_tree}")
    et = model.event_tree(bowtie.event_tree)
    if et is None:
        raise UnresolvedReferenceError(f"bowtie {bowtie.id}: unresolved reference {bowtie.event_tree}")
    if len(basic_events(ft)) <= exact_cap:
        top = top_probability_exact(ft, event_cap=exact_cap)
        mode = "exact"
    else:
        top = top_probability_rare(ft, event_cap=mcs_cap)
        mode = "rare-event-bound"
    initiating = UncertainQuantity.point(float(top), role=QuantityRole.PROBABILITY)
    return replace(et, initiating=initiating, initiating_kind=ValueKind.PROBABILITY, derived_mode=mode)
