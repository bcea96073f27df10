"""Structural validation of scenario models.

Findings are data, not failures: :func:`validate` never raises. A model whose
report has no errors satisfies the structural preconditions of every analysis
engine in the package.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable

from .errors import SourceSpan
from .model import (
    BasicEvent,
    BayesNet,
    Branch,
    DesignBasisCheck,
    EventTree,
    FaultTree,
    Gate,
    MetricKind,
    Outcome,
    OverrideKind,
    QuantityKind,
    QuantityRole,
    ScenarioModel,
    UncertainQuantity,
    ValueKind,
)

CPT_ROW_SUM_TOL = 1e-9

ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True)
class Finding:
    severity: str  # "error" | "warning"
    location: str
    code: str
    message: str
    span: SourceSpan | None = None

    def __str__(self) -> str:
        at = f" [{self.span}]" if self.span else ""
        return f"{self.severity}: {self.location}: {self.message}{at}"


@dataclass(frozen=True)
class ValidationReport:
    findings: tuple[Finding, ...]

    @property
    def errors(self) -> tuple[Finding, ...]:
        return tuple(f for f in self.findings if f.severity == ERROR)

    @property
    def warnings(self) -> tuple[Finding, ...]:
        return tuple(f for f in self.findings if f.severity == WARNING)

    @property
    def ok(self) -> bool:
        return not self.errors

    def __bool__(self) -> bool:
        return self.ok

    def __iter__(self):
        return iter(self.findings)


def _report(findings: Iterable[Finding]) -> ValidationReport:
    ordered = tuple(sorted(findings, key=lambda f: (f.location, f.code, f.message)))
    return ValidationReport(ordered)


def validate(model: ScenarioModel) -> ValidationReport:
    """Check every structural invariant; deterministic finding order."""
    fs: list[Finding] = []
    _check_duplicates(model, fs)
    for tree in model.fault_trees:
        _check_fault_tree(tree, fs)
    for tree in model.event_trees:
        _check_event_tree(tree, fs)
    for bt in model.bow_ties:
        _check_bow_tie(bt, model, fs)
    for ws in model.fmeca_worksheets:
        for row in ws.rows:
            loc = f"fmeca {ws.id}/mode {row.id}"
            for label, score in (("sev", row.severity), ("occ", row.occurrence), ("det", row.detection)):
                if not 1 <= score <= 10:
                    fs.append(Finding(ERROR, loc, "score-out-of-range", f"{label} score {score} outside 1..10", row.span))
    for net in model.bayes_nets:
        fs.extend(bayes_net_findings(net))
    for curve in model.tolerance_curves:
        _check_tolerance(curve, fs)
    for kri in model.kri_definitions:
        if math.isnan(kri.threshold) or math.isinf(kri.threshold):
            fs.append(Finding(ERROR, f"kri {kri.id}", "threshold-not-finite", f"threshold {kri.threshold!r} is not finite", kri.span))
    for check in model.dsa_checks:
        _check_dsa(check, model, fs)
    return _report(fs)


# --------------------------------------------------------------------------
# collection-level checks
# --------------------------------------------------------------------------

_COLLECTIONS = (
    ("hazard", "hazards"),
    ("ftree", "fault_trees"),
    ("etree", "event_trees"),
    ("bowtie", "bow_ties"),
    ("fmeca", "fmeca_worksheets"),
    ("bnet", "bayes_nets"),
    ("tolerance", "tolerance_curves"),
    ("kri", "kri_definitions"),
    ("dsa", "dsa_checks"),
)


def _check_duplicates(model: ScenarioModel, fs: list[Finding]) -> None:
    for label, attr in _COLLECTIONS:
        seen: set[str] = set()
        for item in getattr(model, attr):
            if item.id in seen:
                fs.append(
                    Finding(ERROR, f"{label} {item.id}", "duplicate-id", f"duplicate {label} identifier {item.id}", item.span)
                )
            seen.add(item.id)


# --------------------------------------------------------------------------
# quantities
# --------------------------------------------------------------------------


def _check_probability_quantity(q: UncertainQuantity, loc: str, fs: list[Finding]) -> None:
    problems = q.problems()
    for msg in problems:
        code = "probability-out-of-range" if "out of range" in msg else "invalid-parameter"
        fs.append(Finding(ERROR, loc, code, msg, q.span))
    if not problems and q.may_exceed_unit_interval():
        fs.append(
            Finding(
                WARNING,
                loc,
                "probability-truncation",
                f"{q.kind.value} distribution has support outside [0,1]; samples will be truncated",
                q.span,
            )
        )


# --------------------------------------------------------------------------
# fault trees
# --------------------------------------------------------------------------


def _walk_gate(gate: Gate):
    yield gate
    for child in gate.children:
        if isinstance(child, Gate):
            yield from _walk_gate(child)
        else:
            yield child


def _check_fault_tree(tree: FaultTree, fs: list[Finding]) -> None:
    declared: dict[str, UncertainQuantity] = {}
    for node in _walk_gate(tree.top):
        if isinstance(node, Gate):
            if not node.children:
                fs.append(Finding(ERROR, f"ftree {tree.id}", "empty-gate", f"{node.op.value} gate has no children", node.span))
            continue
        loc = f"ftree {tree.id}/event {node.id}"
        if node.probability.role is QuantityRole.FREQUENCY:
            fs.append(
                Finding(ERROR, loc, "frequency-in-gate", "frequency-valued quantity used as an event probability", node.span)
            )
            continue
        prev = declared.get(node.id)
        if prev is None:
            declared[node.id] = node.probability
            _check_probability_quantity(node.probability, loc, fs)
        elif prev != node.probability:
            fs.append(
                Finding(ERROR, loc, "event-probability-conflict", f"event {node.id} declared with conflicting probabilities", node.span)
            )


# --------------------------------------------------------------------------
# event trees
# --------------------------------------------------------------------------


def _walk_branches(node):
    if isinstance(node, Branch):
        yield node
        yield from _walk_branches(node.on_success)
        yield from _walk_branches(node.on_failure)
    else:
        yield node


def _check_event_tree(tree: EventTree, fs: list[Finding]) -> None:
    loc_init = f"etree {tree.id}/init"
    if tree.initiating_kind is ValueKind.FREQUENCY:
        if tree.initiating.kind is not QuantityKind.POINT:
            fs.append(Finding(ERROR, loc_init, "invalid-parameter", "initiating frequency must be a point value", tree.initiating.span))
        elif tree.initiating.params[0] < 0:
            fs.append(
                Finding(ERROR, loc_init, "frequency-negative", f"initiating frequency {tree.initiating.params[0]!r} is negative", tree.initiating.span)
            )
    else:
        _check_probability_quantity(tree.initiating, loc_init, fs)
    units = set()
    declared: dict[str, UncertainQuantity] = {}
    for node in _walk_branches(tree.root):
        if isinstance(node, Branch):
            loc = f"etree {tree.id}/branch {node.condition}"
            prev = declared.get(node.condition)
            if prev is None:
                declared[node.condition] = node.success_probability
                _check_probability_quantity(node.success_probability, loc, fs)
            elif prev != node.success_probability:
                fs.append(
                    Finding(ERROR, loc, "event-probability-conflict", f"condition {node.condition} declared with conflicting probabilities", node.span)
                )
        else:
            units.add(node.severity.unit)
    if len(units) > 1:
        fs.append(
            Finding(
                WARNING,
                f"etree {tree.id}",
                "mixed-units",
                "outcomes use more than one harm unit; severity aggregation is per-unit only",
                tree.span,
            )
        )


def _check_bow_tie(bt, model: ScenarioModel, fs: list[Finding]) -> None:
    loc = f"bowtie {bt.id}"
    ft = model.fault_tree(bt.fault_tree)
    et = model.event_tree(bt.event_tree)
    if ft is None:
        fs.append(Finding(ERROR, loc, "unresolved-reference", f"unresolved reference {bt.fault_tree}", bt.span))
    if et is None:
        fs.append(Finding(ERROR, loc, "unresolved-reference", f"unresolved reference {bt.event_tree}", bt.span))
    if ft is not None and et is not None:
        event_ids = {n.id for n in _walk_gate(ft.top) if isinstance(n, BasicEvent)}
        condition_ids = {n.condition for n in _walk_branches(et.root) if isinstance(n, Branch)}
        shared = sorted(event_ids & condition_ids)
        if shared:
            fs.append(
                Finding(
                    ERROR,
                    loc,
                    "ambiguous-shared-id",
                    f"ids used both as fault-tree events and event-tree conditions: {', '.join(shared)}",
                    bt.span,
                )
            )


# --------------------------------------------------------------------------
# Bayesian networks
# --------------------------------------------------------------------------


def bayes_net_findings(net: BayesNet) -> list[Finding]:
    """All CPT/structure findings for one network (shared with bayesnet.validate_cpts)."""
    fs: list[Finding] = []
    ids = [n.id for n in net.nodes]
    id_set = set(ids)
    for node in net.nodes:
        loc = f"bnet {net.id}/node {node.id}"
        if not node.states:
            fs.append(Finding(ERROR, loc, "no-states", "node declares no states", node.span))
            continue
        if len(set(node.states)) != len(node.states):
            fs.append(Finding(ERROR, loc, "duplicate-state", "node declares duplicate states", node.span))
        for parent in node.parents:
            if parent not in id_set:
                fs.append(Finding(ERROR, loc, "unresolved-reference", f"unresolved reference {parent}", node.span))
            if parent == node.id:
                fs.append(Finding(ERROR, loc, "cycle", f"node {node.id} lists itself as a parent", node.span))
        _check_cpt(net, node, fs)
    cycle = _find_cycle(net)
    if cycle:
        fs.append(
            Finding(ERROR, f"bnet {net.id}", "cycle", f"directed cycle through nodes: {' -> '.join(cycle)}", net.span)
        )
    return fs


def _check_cpt(net: BayesNet, node, fs: list[Finding]) -> None:
    loc = f"bnet {net.id}/node {node.id}"
    parents = [net.node_map.get(p) for p in node.parents]
    if any(p is None for p in parents):
        return  # unresolved parents already reported
    expected = [tuple(combo) for combo in itertools.product(*(p.states for p in parents))] if parents else [()]
    expected_set = set(expected)
    seen: set[tuple[str, ...]] = set()
    for row in node.cpt:
        row_label = " ".join(row.key) if row.key else "(prior)"
        if row.key not in expected_set:
            fs.append(
                Finding(ERROR, loc, "cpt-unknown-row", f"row [{row_label}] does not match any parent-state combination", row.span)
            )
            continue
        if row.key in seen:
            fs.append(Finding(ERROR, loc, "cpt-duplicate-row", f"row [{row_label}] appears more than once", row.span))
            continue
        seen.add(row.key)
        if len(row.values) != len(node.states):
            fs.append(
                Finding(
                    ERROR,
                    loc,
                    "cpt-row-arity",
                    f"row [{row_label}] has {len(row.values)} entries for {len(node.states)} states",
                    row.span,
                )
            )
            continue
        if any(v < 0 for v in row.values):
            fs.append(Finding(ERROR, loc, "cpt-negative", f"row [{row_label}] contains a negative probability", row.span))
        total = sum(row.values)
        if abs(total - 1.0) > CPT_ROW_SUM_TOL:
            fs.append(
                Finding(ERROR, loc, "cpt-row-sum", f"row [{row_label}] sums to {total!r}, expected 1", row.span)
            )
    for combo in expected:
        if combo not in seen:
            label = " ".join(combo) if combo else "(prior)"
            fs.append(Finding(ERROR, loc, "cpt-missing-row", f"no row for parent states [{label}]", node.span))


def _find_cycle(net: BayesNet) -> list[str] | None:
    """Return one directed cycle (node ids, in order) or None."""
    color: dict[str, int] = {}  # 0 unseen, 1 on stack, 2 done
    stack: list[str] = []
    children: dict[str, list[str]] = {n.id: [] for n in net.nodes}
    for node in net.nodes:
        for parent in node.parents:
            if parent in children:
                children[parent].append(node.id)

    def visit(nid: str) -> list[str] | None:
        color[nid] = 1
        stack.append(nid)
        for child in sorted(children[nid]):
            c = color.get(child, 0)
            if c == 1:
                return stack[stack.index(child):] + [child]
            if c == 0:
                found = visit(child)
                if found:
                    return found
        stack.pop()
        color[nid] = 2
        return None

    for node in net.nodes:
        if color.get(node.id, 0) == 0:
            found = visit(node.id)
            if found:
                return found
    return None


# --------------------------------------------------------------------------
# tolerance curves and DSA checks
# --------------------------------------------------------------------------


def _check_tolerance(curve, fs: list[Finding]) -> None:
    loc = f"tolerance {curve.id}"
    if not curve.points:
        fs.append(Finding(ERROR, loc, "empty-curve", "tolerance curve has no points", curve.span))
        return
    prev_s, prev_p = None, None
    for s, p in curve.points:
        if math.isnan(s) or math.isinf(s) or s < 0:
            fs.append(Finding(ERROR, loc, "severity-negative", f"severity {s!r} is not a finite non-negative value", curve.span))
        if not 0.0 <= p <= 1.0:
            fs.append(Finding(ERROR, loc, "probability-out-of-range", f"exceedance probability {p!r} outside [0,1]", curve.span))
        if prev_s is not None and s <= prev_s:
            fs.append(Finding(ERROR, loc, "severity-not-increasing", f"severities must strictly increase ({prev_s!r} then {s!r})", curve.span))
        if prev_p is not None and p > prev_p:
            fs.append(Finding(ERROR, loc, "probability-increasing", f"exceedance must be non-increasing ({prev_p!r} then {p!r})", curve.span))
        prev_s, prev_p = s, p


def _check_dsa(check: DesignBasisCheck, model: ScenarioModel, fs: list[Finding]) -> None:
    loc = f"dsa {check.id}"
    ft = model.fault_tree(check.scenario)
    et = model.event_tree(check.scenario)
    if ft is None and et is None:
        fs.append(Finding(ERROR, loc, "unresolved-reference", f"unresolved reference {check.scenario}", check.span))
        return
    if ft is not None:
        targets = {n.id for n in _walk_gate(ft.top) if isinstance(n, BasicEvent)}
        outcome_ids: set[str] = set()
        if check.criterion.metric is not MetricKind.TOP_PROBABILITY:
            fs.append(
                Finding(ERROR, loc, "metric-mismatch", f"metric {check.criterion.metric.value} requires an event tree scenario", check.span)
            )
    else:
        targets = {n.condition for n in _walk_branches(et.root) if isinstance(n, Branch)}
        outcome_ids = {n.id for n in _walk_branches(et.root) if isinstance(n, Outcome)}
        if check.criterion.metric is MetricKind.TOP_PROBABILITY:
            fs.append(Finding(ERROR, loc, "metric-mismatch", "metric top requires a fault tree scenario", check.span))
    for ov in check.overrides:
        if ov.target not in targets:
            fs.append(Finding(ERROR, loc, "unresolved-reference", f"unresolved reference {ov.target}", ov.span))
        if ov.kind is OverrideKind.SET_PROBABILITY and not 0.0 <= (ov.value or 0.0) <= 1.0:
            fs.append(Finding(ERROR, loc, "probability-out-of-range", f"override probability {ov.value!r} outside [0,1]", ov.span))
    crit = check.criterion
    if crit.metric is MetricKind.OUTCOME_FREQUENCY and crit.outcome_id is not None and crit.outcome_id not in outcome_ids:
        fs.append(Finding(ERROR, loc, "unresolved-reference", f"unresolved reference {crit.outcome_id}", check.span))
    if crit.metric is MetricKind.TOP_PROBABILITY and not 0.0 <= crit.limit <= 1.0:
        fs.append(Finding(ERROR, loc, "limit-out-of-domain", f"limit {crit.limit!r} outside [0,1] for a probability metric", check.span))
    if crit.metric is not MetricKind.TOP_PROBABILITY and crit.limit < 0:
        fs.append(Finding(ERROR, loc, "limit-out-of-domain", f"limit {crit.limit!r} is negative", check.span))
