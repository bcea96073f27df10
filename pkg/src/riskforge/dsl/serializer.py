"""Canonical serialization of scenario models back to .rsk text.

Canonical form: top-level items sorted by id (one blank line between items),
two-space indentation, LF line endings, and shortest round-trip decimals for
numbers. ``parse(serialize(m))`` is structurally equal to ``m`` for any model
that validates without errors.
"""

from __future__ import annotations

from ..model import (
    BasicEvent,
    BayesNet,
    BowTie,
    Branch,
    DesignBasisCheck,
    EventTree,
    FaultTree,
    FmecaWorksheet,
    Gate,
    Hazard,
    KriDefinition,
    MetricKind,
    Outcome,
    OverrideKind,
    QuantityKind,
    ScenarioModel,
    ToleranceCurve,
    UncertainQuantity,
    ValueKind,
)
from ..validation import validate

_INDENT = "  "

_ESCAPES = {'"': '\\"', "\\": "\\\\", "\n": "\\n", "\t": "\\t", "\r": "\\r"}


def _num(x: float) -> str:
    return repr(float(x))


def _string(s: str) -> str:
    return '"' + "".join(_ESCAPES.get(c, c) for c in s) + '"'


def _quantity(q: UncertainQuantity) -> str:
    k = q.kind
    if k is QuantityKind.POINT:
        return f"p={_num(q.params[0])}"
    if k is QuantityKind.EMPIRICAL:
        return f"~empirical({', '.join(_num(s) for s in q.samples)})"
    if k is QuantityKind.MIXTURE:
        raise ValueError("mixture quantities have no document syntax and cannot be serialized")
    return f"~{k.value}({', '.join(_num(p) for p in q.params)})"


def serialize(model: ScenarioModel) -> str:
    """Emit the canonical document; rejects models with validation errors."""
    report = validate(model)
    if not report.ok:
        first = report.errors[0]
        raise ValueError(f"cannot serialize a model with validation errors: {first}")
    blocks: list[str] = []
    for hazard in model.hazards:
        blocks.append(_hazard(hazard))
    for tree in model.fault_trees:
        blocks.append(_ftree(tree))
    for tree in model.event_trees:
        blocks.append(_etree(tree))
    for bt in model.bow_ties:
        blocks.append(_bowtie(bt))
    for ws in model.fmeca_worksheets:
        blocks.append(_fmeca(ws))
    for net in model.bayes_nets:
        blocks.append(_bnet(net))
    for curve in model.tolerance_curves:
        blocks.append(_tolerance(curve))
    for kri in model.kri_definitions:
        blocks.append(_kri(kri))
    for check in model.dsa_checks:
        blocks.append(_dsa(check))
    return "\n".join(blocks)


def _hazard(h: Hazard) -> str:
    desc = f" {_string(h.description)}" if h.description else ""
    return f"hazard {h.id}{desc}\n"


def _ftree(tree: FaultTree) -> str:
    lines = [f"ftree {tree.id} {tree.top.op.value} {{"]
    _gate_children(tree.top, 1, lines)
    lines.append("}")
    return "\n".join(lines) + "\n"


def _gate_children(gate: Gate, depth: int, lines: list[str]) -> None:
    pad = _INDENT * depth
    for child in gate.children:
        if isinstance(child, BasicEvent):
            lines.append(f"{pad}event {child.id} {_quantity(child.probability)}")
        else:
            lines.append(f"{pad}{child.op.value} {{")
            _gate_children(child, depth + 1, lines)
            lines.append(f"{pad}}}")


def _etree(tree: EventTree) -> str:
    if tree.initiating_kind is ValueKind.FREQUENCY:
        init = f"freq={_num(tree.initiating.params[0])}/yr"
    else:
        init = _quantity(tree.initiating)
    lines: list[str] = []
    _branch(tree.root, 0, lines, prefix=f"etree {tree.id} init {init} ")
    return "\n".join(lines) + "\n"


def _branch(node: Branch, depth: int, lines: list[str], prefix: str = "") -> None:
    pad = _INDENT * depth
    lines.append(f"{pad}{prefix}branch {node.condition} {_quantity(node.success_probability)} {{")
    for child in (node.on_success, node.on_failure):
        if isinstance(child, Outcome):
            pad2 = _INDENT * (depth + 1)
            lines.append(f"{pad2}outcome {child.id} severity={_num(child.severity.magnitude)} {child.severity.unit.value}")
        else:
            _branch(child, depth + 1, lines)
    lines.append(f"{pad}}}")


def _bowtie(bt: BowTie) -> str:
    return f"bowtie {bt.id} critical {bt.critical_event} left {bt.fault_tree} right {bt.event_tree}\n"


def _fmeca(ws: FmecaWorksheet) -> str:
    lines = [f"fmeca {ws.id} {{"]
    for row in ws.rows:  # rows are already canonically sorted by id
        notes = f" {_string(row.notes)}" if row.notes else ""
        lines.append(f"{_INDENT}mode {row.id} sev {row.severity} occ {row.occurrence} det {row.detection}{notes}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _bnet(net: BayesNet) -> str:
    lines = [f"bnet {net.id} {{"]
    for node in net.nodes:  # nodes canonically sorted by id
        lines.append(f"{_INDENT}node {node.id} {{")
        lines.append(f"{_INDENT * 2}states {' '.join(node.states)}")
        if node.parents:
            lines.append(f"{_INDENT * 2}parents {' '.join(node.parents)}")
        lines.append(f"{_INDENT * 2}cpt {{")
        for row in node.cpt:  # rows canonically sorted by key
            values = " ".join(_num(v) for v in row.values)
            if row.key:
                lines.append(f"{_INDENT * 3}{' '.join(row.key)} : {values}")
            else:
                lines.append(f"{_INDENT * 3}{values}")
        lines.append(f"{_INDENT * 2}}}")
        lines.append(f"{_INDENT}}}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _tolerance(curve: ToleranceCurve) -> str:
    lines = [f"tolerance {curve.id} unit {curve.unit.value} {{"]
    for severity, prob in curve.points:
        lines.append(f"{_INDENT}point {_num(severity)} {_num(prob)}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _kri(kri: KriDefinition) -> str:
    desc = f" {_string(kri.description)}" if kri.description else ""
    return f"kri {kri.id} threshold {_num(kri.threshold)} {kri.direction.value}{desc}\n"


def _dsa(check: DesignBasisCheck) -> str:
    lines = [f"dsa {check.id} scenario {check.scenario} {{"]
    for ov in check.overrides:
        if ov.kind is OverrideKind.SET_PROBABILITY:
            lines.append(f"{_INDENT}set {ov.target} p={_num(ov.value)}")
        else:
            lines.append(f"{_INDENT}fail {ov.target}")
    crit = check.criterion
    if crit.metric is MetricKind.TOP_PROBABILITY:
        metric = "top"
    elif crit.metric is MetricKind.MAX_SEVERITY:
        metric = "severity"
    elif crit.outcome_id is not None:
        metric = f"outcome {crit.outcome_id}"
    else:
        metric = "outcome"
    lines.append(f"{_INDENT}require {metric} {crit.comparator} {_num(crit.limit)}")
    lines.append("}")
    return "\n".join(lines) + "\n"
