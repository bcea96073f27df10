"""Deterministic and probabilistic evaluation: design-basis checks, tolerance
comparison, KRI monitoring, and Bayesian evidence updates.

Design-basis (DSA) checks run in point mode only: overrides are applied, the
metric is computed deterministically, and the comparison is binary. Models
are immutable; evidence updates emit a new model version.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping, Sequence

from .errors import UnresolvedReferenceError
from .eventtree import enumerate_sequences, outcome_frequencies, walk_branches
from .faulttree import EXACT_EVENT_CAP, basic_events, top_probability_exact, top_probability_rare
from .model import (
    Branch,
    DesignBasisCheck,
    Gate,
    KriDefinition,
    KriDirection,
    MetricKind,
    Outcome,
    OverrideKind,
    QuantityKind,
    ScenarioModel,
    ToleranceCurve,
    UncertainQuantity,
)
from .quant.curves import RiskCurve, step_value

_COMPARE = {
    "<=": lambda measured, limit: measured <= limit,
    "<": lambda measured, limit: measured < limit,
    ">=": lambda measured, limit: measured >= limit,
    ">": lambda measured, limit: measured > limit,
}


# --------------------------------------------------------------------------
# design-basis checks
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DsaResult:
    check_id: str
    scenario: str
    metric: MetricKind
    measured: float
    comparator: str
    limit: float
    passed: bool
    mode: str | None = None


def _override_map(check: DesignBasisCheck, *, failure_means_one: bool) -> dict[str, float]:
    """Target -> pinned probability; forcing a failure pins an event to 1
    (the component fails) or a branch success to 0 (the barrier fails)."""
    pinned: dict[str, float] = {}
    for ov in check.overrides:
        if ov.kind is OverrideKind.SET_PROBABILITY:
            pinned[ov.target] = float(ov.value)
        else:
            pinned[ov.target] = 1.0 if failure_means_one else 0.0
    return pinned


def dsa_check(check: DesignBasisCheck, model: ScenarioModel, *, exact_cap: int = EXACT_EVENT_CAP) -> DsaResult:
    """Apply worst-case overrides, compute the metric in point mode, compare."""
    ft = model.fault_tree(check.scenario)
    et = model.event_tree(check.scenario)
    crit = check.criterion
    if ft is not None:
        if crit.metric is not MetricKind.TOP_PROBABILITY:
            raise ValueError(f"dsa {check.id}: metric {crit.metric.value} needs an event tree scenario")
        assignment = {eid: q.point_value() for eid, q in basic_events(ft).items()}
        overrides = _override_map(check, failure_means_one=True)
        unknown = sorted(set(overrides) - set(assignment))
        if unknown:
            raise UnresolvedReferenceError(f"dsa {check.id}: unresolved reference {unknown[0]}")
        assignment.update(overrides)
        if len(assignment) <= exact_cap:
            measured = float(top_probability_exact(ft, assignment, event_cap=exact_cap))
            mode = "exact"
        else:
            measured = float(top_probability_rare(ft, assignment))
            mode = "rare-event-bound"
    elif et is not None:
        if crit.metric is MetricKind.TOP_PROBABILITY:
            raise ValueError(f"dsa {check.id}: metric top needs a fault tree scenario")
        conditions = {node.condition for node in walk_branches(et.root) if isinstance(node, Branch)}
        overrides = _override_map(check, failure_means_one=False)
        unknown = sorted(set(overrides) - conditions)
        if unknown:
            raise UnresolvedReferenceError(f"dsa {check.id}: unresolved reference {unknown[0]}")
        sequences = enumerate_sequences(et, branch_probabilities=overrides)
        totals = outcome_frequencies(sequences)
        mode = "point"
        if crit.metric is MetricKind.OUTCOME_FREQUENCY:
            if crit.outcome_id is not None:
                if crit.outcome_id not in totals:
                    raise UnresolvedReferenceError(f"dsa {check.id}: unresolved reference {crit.outcome_id}")
                measured = totals[crit.outcome_id]
            else:
                measured = max(totals.values())
        else:  # MAX_SEVERITY: worst severity actually reachable
            reachable = [seq.severity.magnitude for seq in sequences if seq.value > 0.0]
            measured = max(reachable) if reachable else 0.0
    else:
        raise UnresolvedReferenceError(f"dsa {check.id}: unresolved reference {check.scenario}")
    passed = _COMPARE[crit.comparator](measured, crit.limit)
    return DsaResult(check.id, check.scenario, crit.metric, measured, crit.comparator, crit.limit, passed, mode)


# --------------------------------------------------------------------------
# tolerance comparison
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ToleranceViolation:
    severity: float
    profile_exceedance: float
    tolerance_exceedance: float


@dataclass(frozen=True)
class ToleranceResult:
    curve_id: str
    acceptable: bool
    violations: tuple[ToleranceViolation, ...]


def compare_to_tolerance(profile: RiskCurve, tolerance: ToleranceCurve) -> ToleranceResult:
    """Acceptable iff the profile's exceedance stays at or below the
    tolerance at every severity on the union grid (step interpolation)."""
    grid = sorted({s for s, _ in profile.points} | {s for s, _ in tolerance.points})
    violations = []
    for s in grid:
        have = profile.exceedance_at(s)
        allowed = step_value(tolerance.points, s)
        if have > allowed:
            violations.append(ToleranceViolation(s, have, allowed))
    return ToleranceResult(tolerance.id, not violations, tuple(violations))


# --------------------------------------------------------------------------
# KRI monitoring
# --------------------------------------------------------------------------


def kri_check(values: Mapping[str, float], definitions: Sequence[KriDefinition]) -> tuple[str, ...]:
    """Ids whose value strictly violates its threshold, in sorted order.

    Equality never triggers. Every supplied value must have a definition.
    """
    by_id = {d.id: d for d in definitions}
    unknown = sorted(set(values) - set(by_id))
    if unknown:
        raise UnresolvedReferenceError(f"no KRI definition for indicator {unknown[0]}")
    triggered = []
    for kri_id in sorted(values):
        definition = by_id[kri_id]
        value = values[kri_id]
        if definition.direction is KriDirection.ABOVE and value > definition.threshold:
            triggered.append(kri_id)
        elif definition.direction is KriDirection.BELOW and value < definition.threshold:
            triggered.append(kri_id)
    return tuple(triggered)


# --------------------------------------------------------------------------
# verdicts
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    """Combined evaluation outcome: DSA results, tolerance comparisons, and
    triggered KRIs. ``ok`` iff every check passed and no tolerance was
    exceeded (KRI triggers are monitoring signals, not failures)."""

    dsa: tuple[DsaResult, ...] = ()
    tolerance: tuple[tuple[str, ToleranceResult], ...] = ()  # (target id, result)
    triggered_kris: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        for result in self.dsa:
            if result.passed != _COMPARE[result.comparator](result.measured, result.limit):
                raise ValueError(f"dsa result {result.check_id} is internally inconsistent")
        for _, result in self.tolerance:
            if result.acceptable != (not result.violations):
                raise ValueError(f"tolerance result {result.curve_id} is internally inconsistent")

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.dsa) and all(r.acceptable for _, r in self.tolerance)

    def to_dict(self) -> dict:
        """JSON-ready form with stable key order."""
        return {
            "ok": self.ok,
            "tolerance": [
                {
                    "target": target,
                    "curve": result.curve_id,
                    "acceptable": result.acceptable,
                    "violations": [
                        {
                            "severity": v.severity,
                            "profile": v.profile_exceedance,
                            "tolerance": v.tolerance_exceedance,
                        }
                        for v in result.violations
                    ],
                }
                for target, result in self.tolerance
            ],
            "dsa": [
                {
                    "id": r.check_id,
                    "scenario": r.scenario,
                    "metric": r.metric.value,
                    "measured": r.measured,
                    "comparator": r.comparator,
                    "limit": r.limit,
                    "passed": r.passed,
                }
                for r in self.dsa
            ],
            "kri_triggered": list(self.triggered_kris),
        }


# --------------------------------------------------------------------------
# Bayesian updates
# --------------------------------------------------------------------------


def update_beta(prior: UncertainQuantity, successes: int, trials: int) -> UncertainQuantity:
    """Conjugate update: beta(a, b) + s/t -> beta(a+s, b+t-s)."""
    if prior.kind is not QuantityKind.BETA:
        raise ValueError(f"prior must be a beta quantity, got {prior.kind.value}")
    prior.check_valid()
    if not (isinstance(successes, int) and isinstance(trials, int)):
        raise ValueError("successes and trials must be integers")
    if successes < 0 or trials < 0 or successes > trials:
        raise ValueError(f"need 0 <= successes <= trials, got {successes}/{trials}")
    a, b = prior.params
    return replace(prior, params=(a + successes, b + (trials - successes)))


def update_model_quantity(model: ScenarioModel, path: str, successes: int, trials: int) -> ScenarioModel:
    """New model version with the beta quantity at ``path`` updated.

    ``path`` is ``TREE_ID/NODE_ID``: a fault tree's basic event or an event
    tree's branch condition. Every occurrence of the node id in that tree is
    updated (occurrences share one declared quantity).
    """
    if "/" not in path:
        raise UnresolvedReferenceError(f"quantity path must be TREE_ID/NODE_ID, got {path!r}")
    tree_id, node_id = path.split("/", 1)

    ft = model.fault_tree(tree_id)
    if ft is not None:
        events = basic_events(ft)
        if node_id not in events:
            raise UnresolvedReferenceError(f"fault tree {tree_id} has no event {node_id}")
        posterior = update_beta(events[node_id], successes, trials)

        def rebuild_gate(gate: Gate) -> Gate:
            children = tuple(
                rebuild_gate(c)
                if isinstance(c, Gate)
                else (replace(c, probability=posterior) if c.id == node_id else c)
                for c in gate.children
            )
            return replace(gate, children=children)

        new_tree = replace(ft, top=rebuild_gate(ft.top))
        trees = tuple(new_tree if t is ft else t for t in model.fault_trees)
        return replace(model, fault_trees=trees)

    et = model.event_tree(tree_id)
    if et is not None:
        target = next((n for n in walk_branches(et.root) if isinstance(n, Branch) and n.condition == node_id), None)
        if target is None:
            raise UnresolvedReferenceError(f"event tree {tree_id} has no condition {node_id}")
        posterior = update_beta(target.success_probability, successes, trials)

        def rebuild_branch(node):
            if isinstance(node, Outcome):
                return node
            prob = posterior if node.condition == node_id else node.success_probability
            return replace(
                node,
                success_probability=prob,
                on_success=rebuild_branch(node.on_success),
                on_failure=rebuild_branch(node.on_failure),
            )

        new_tree = replace(et, root=rebuild_branch(et.root))
        trees = tuple(new_tree if t is et else t for t in model.event_trees)
        return replace(model, event_trees=trees)

    raise UnresolvedReferenceError(f"no fault tree or event tree named {tree_id}")
