"""Command-line front end.

Data goes to stdout in the requested format; error text goes to stderr.
Exit codes: 0 success; 1 analysis found a violation (validation errors,
DSA fail, tolerance exceeded); 2 usage error; 3 input error (parse/IO);
4 internal limit exceeded. Outputs are deterministic for fixed inputs and
seed: JSON keys in fixed order, CSV with a header row.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Sequence

from . import estimate
from .bayesnet import query
from .dsl import parse, serialize
from .errors import (
    CapExceededError,
    InconsistentEvidenceError,
    ParseError,
    RiskforgeError,
    UnknownNodeError,
    UnknownStateError,
    UnresolvedReferenceError,
)
from .eventtree import compose_bowtie, enumerate_sequences, outcome_frequencies
from .evaluate import Verdict, compare_to_tolerance, dsa_check, kri_check, update_model_quantity
from .faulttree import minimal_cut_sets
from .model import ScenarioModel
from .quant import CorrelationSpec, RandomStream, propagate

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_LIMIT = 4

BANDS_ENV = "RISKFORGE_BANDS"

DEFAULT_SEED = 42
DEFAULT_TRIALS = 10000


class _UsageError(Exception):
    pass


class _InputError(Exception):
    pass


def _emit_json(payload) -> None:
    sys.stdout.write(json.dumps(payload, indent=2) + "\n")


def _emit_csv(header: Sequence[str], rows: Sequence[Sequence]) -> None:
    out = [",".join(header)]
    for row in rows:
        out.append(",".join(str(v) for v in row))
    sys.stdout.write("\n".join(out) + "\n")


def _emit_text(lines: Sequence[str]) -> None:
    sys.stdout.write("\n".join(lines) + "\n")


def _read_file(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise _InputError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _load_model(path: str) -> ScenarioModel:
    return parse(_read_file(path), file=path)


def _load_valid_model(path: str) -> ScenarioModel:
    from .validation import validate

    model = _load_model(path)
    report = validate(model)
    if not report.ok:
        lines = [str(f) for f in report.errors]
        raise _InputError(f"{path} has validation errors:\n  " + "\n  ".join(lines))
    return model


def _load_correlations(path: str | None) -> CorrelationSpec | None:
    if path is None:
        return None
    try:
        data = json.loads(_read_file(path))
        return CorrelationSpec(tuple(data["ids"]), tuple(tuple(row) for row in data["matrix"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise _InputError(f"bad correlation file {path}: {exc}") from exc


def _band_table(args) -> estimate.BandTable:
    path = getattr(args, "bands", None) or os.environ.get(BANDS_ENV) or None
    try:
        return estimate.load_band_table(path)
    except (OSError, ValueError, KeyError, RiskforgeError) as exc:
        raise _InputError(f"cannot load band table: {exc}") from exc


def _find_target(model: ScenarioModel, target: str):
    """A quantifiable element by id: fault tree, event tree, or bow-tie."""
    for getter, kind in ((model.fault_tree, "ftree"), (model.event_tree, "etree"), (model.bow_tie, "bowtie")):
        found = getter(target)
        if found is not None:
            return found, kind
    raise _UsageError(f"no fault tree, event tree, or bow-tie named {target}")


def _reject_csv(args) -> None:
    if args.format == "csv":
        raise _UsageError("csv output is not supported for this command (use json or text)")


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def _cmd_validate(args) -> int:
    from .validation import validate

    _reject_csv(args)
    model = _load_model(args.file)
    report = validate(model)
    findings = [
        {
            "severity": f.severity,
            "location": f.location,
            "code": f.code,
            "message": f.message,
            "line": f.span.line if f.span else None,
            "column": f.span.column if f.span else None,
        }
        for f in report.findings
    ]
    if args.format == "text":
        lines = [str(f) for f in report.findings] or ["ok"]
        _emit_text(lines)
    else:
        _emit_json({"file": args.file, "findings": findings, "errors": len(report.errors), "warnings": len(report.warnings)})
    return EXIT_OK if report.ok else EXIT_VIOLATION


def _cmd_mcs(args) -> int:
    model = _load_valid_model(args.file)
    tree = model.fault_tree(args.tree)
    if tree is None:
        raise _UsageError(f"no fault tree named {args.tree}")
    cut_sets = [sorted(cs) for cs in minimal_cut_sets(tree)]
    if args.format == "csv":
        _emit_csv(["cut_set"], [[" ".join(cs)] for cs in cut_sets])
    elif args.format == "text":
        _emit_text([f"{{{', '.join(cs)}}}" for cs in cut_sets] or ["(none)"])
    else:
        _emit_json(cut_sets)
    return EXIT_OK


def _cmd_quantify(args) -> int:
    _reject_csv(args)
    model = _load_valid_model(args.file)
    element, kind = _find_target(model, args.target)
    correlations = _load_correlations(args.correlations)
    stream = RandomStream(args.seed)
    profile = propagate(element, stream, args.n, correlations=correlations, model=model)
    if args.samples_out:
        try:
            with open(args.samples_out, "w", encoding="utf-8", newline="\n") as fh:
                if args.samples_out.endswith(".json"):
                    fh.write(json.dumps({"samples": profile.samples.tolist()}) + "\n")
                else:
                    fh.write("sample\n")
                    for value in profile.samples:
                        fh.write(f"{value!r}\n")
        except OSError as exc:
            raise _InputError(f"cannot write {args.samples_out}: {exc.strerror or exc}") from exc
    payload = {
        "target": args.target,
        "kind": kind,
        "seed": args.seed,
        "n": args.n,
        "mean": profile.summary.mean,
        "standard_error": profile.summary.standard_error,
        "percentiles": {"p5": profile.summary.p5, "p50": profile.summary.p50, "p95": profile.summary.p95},
        "unit": profile.unit.value if profile.unit else None,
        "value_kind": profile.value_kind.value if profile.value_kind else None,
        "mode": profile.mode,
        "truncated": profile.truncated_total,
    }
    if args.format == "text":
        _emit_text([f"{k}: {v}" for k, v in payload.items()])
    else:
        _emit_json(payload)
    return EXIT_OK


def _sequences_payload(tree) -> dict:
    sequences = enumerate_sequences(tree)
    return {
        "initiating": tree.initiating.point_value(),
        "value_kind": tree.initiating_kind.value,
        "sequences": [
            {
                "path": [[cond, result] for cond, result in seq.path],
                "outcome": seq.outcome,
                "value": seq.value,
                "severity": seq.severity.magnitude,
                "unit": seq.severity.unit.value,
            }
            for seq in sequences
        ],
        "outcome_totals": outcome_frequencies(sequences),
    }


def _cmd_sequences(args) -> int:
    model = _load_valid_model(args.file)
    tree = model.event_tree(args.etree)
    if tree is None:
        raise _UsageError(f"no event tree named {args.etree}")
    payload = {"etree": args.etree, **_sequences_payload(tree)}
    if args.format == "csv":
        rows = [
            [";".join(f"{c}={r}" for c, r in seq["path"]), seq["outcome"], seq["value"], seq["severity"], seq["unit"]]
            for seq in payload["sequences"]
        ]
        _emit_csv(["path", "outcome", "value", "severity", "unit"], rows)
    elif args.format == "text":
        _emit_text(
            [f"init {payload['initiating']} ({payload['value_kind']})"]
            + [f"{s['outcome']}: {s['value']}" for s in payload["sequences"]]
        )
    else:
        _emit_json(payload)
    return EXIT_OK


def _cmd_bowtie(args) -> int:
    _reject_csv(args)
    model = _load_valid_model(args.file)
    bt = model.bow_tie(args.id)
    if bt is None:
        raise _UsageError(f"no bow-tie named {args.id}")
    composed = compose_bowtie(bt, model)
    payload = {
        "bowtie": bt.id,
        "critical_event": bt.critical_event,
        "fault_tree": bt.fault_tree,
        "event_tree": bt.event_tree,
        "mode": composed.derived_mode,
        **_sequences_payload(composed),
    }
    if args.format == "text":
        _emit_text([f"initiating {payload['initiating']} ({payload['mode']})"] + [f"{s['outcome']}: {s['value']}" for s in payload["sequences"]])
    else:
        _emit_json(payload)
    return EXIT_OK


def _cmd_infer(args) -> int:
    _reject_csv(args)
    model = _load_valid_model(args.file)
    net = model.bayes_net(args.bnet)
    if net is None:
        raise _UsageError(f"no Bayesian network named {args.bnet}")
    evidence: dict[str, str] = {}
    for item in args.evidence or []:
        if "=" not in item:
            raise _UsageError(f"evidence must be NODE=STATE, got {item!r}")
        node, state = item.split("=", 1)
        evidence[node] = state
    try:
        posterior = query(net, args.query, evidence)
    except (UnknownNodeError, UnknownStateError) as exc:
        raise _UsageError(str(exc)) from exc
    payload = {
        "bnet": args.bnet,
        "query": args.query,
        "evidence": dict(sorted(evidence.items())),
        "posterior": posterior.as_dict(),
    }
    if args.format == "text":
        _emit_text([f"P({args.query}={s} | evidence) = {p}" for s, p in posterior.as_dict().items()])
    else:
        _emit_json(payload)
    return EXIT_OK


def _cmd_fmeca(args) -> int:
    model = _load_valid_model(args.file)
    worksheets = []
    for ws in model.fmeca_worksheets:
        ranked = estimate.rank_failure_modes(ws.rows)
        worksheets.append(
            {
                "id": ws.id,
                "rows": [
                    {
                        "id": row.id,
                        "severity": row.severity,
                        "occurrence": row.occurrence,
                        "detection": row.detection,
                        "rpn": estimate.rpn(row.severity, row.occurrence, row.detection),
                        "notes": row.notes,
                    }
                    for row in ranked
                ],
            }
        )
    if args.format == "csv":
        rows = [
            [ws["id"], r["id"], r["severity"], r["occurrence"], r["detection"], r["rpn"]]
            for ws in worksheets
            for r in ws["rows"]
        ]
        _emit_csv(["worksheet", "mode", "severity", "occurrence", "detection", "rpn"], rows)
    elif args.format == "text":
        lines = []
        for ws in worksheets:
            lines.append(f"{ws['id']}:")
            lines.extend(f"  {r['id']}  rpn={r['rpn']}" for r in ws["rows"])
        _emit_text(lines or ["(no worksheets)"])
    else:
        _emit_json({"worksheets": worksheets})
    return EXIT_OK


def _cmd_matrix(args) -> int:
    _reject_csv(args)
    _load_valid_model(args.file)  # the model is context; banding needs only the table
    table = _band_table(args)
    try:
        ll = estimate.band_likelihood(args.likelihood, table)
        hsl = estimate.band_severity(args.severity, args.unit, table)
    except (ValueError, RiskforgeError) as exc:
        raise _UsageError(str(exc)) from exc
    payload = {
        "likelihood": args.likelihood,
        "severity": args.severity,
        "unit": args.unit,
        "likelihood_level": ll,
        "severity_level": hsl,
        "risk_level": estimate.matrix_cell(ll, hsl, table),
    }
    if args.format == "text":
        _emit_text([f"{ll} x {hsl} -> {payload['risk_level']}"])
    else:
        _emit_json(payload)
    return EXIT_OK


def _target_curve(model: ScenarioModel, target: str, seed: int, n: int, correlations):
    element, kind = _find_target(model, target)
    if kind == "ftree":
        raise _InputError(f"{target} is a fault tree; exceedance curves need severity-bearing targets")
    profile = propagate(element, RandomStream(seed), n, correlations=correlations, model=model)
    if profile.curve is None:
        raise _InputError(f"{target} yields no exceedance curve (frequency-valued sequences)")
    return profile


def _write_curve_file(curve, path: str) -> None:
    """CSV (severity,exceedance) or, for .json paths, a JSON point array."""
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            if path.endswith(".json"):
                fh.write(json.dumps({"points": [[s, p] for s, p in curve.points]}, indent=2) + "\n")
            else:
                fh.write("severity,exceedance\n")
                for s, p in curve.points:
                    fh.write(f"{s!r},{p!r}\n")
    except OSError as exc:
        raise _InputError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _cmd_curves(args) -> int:
    model = _load_valid_model(args.file)
    profile = _target_curve(model, args.target, args.seed, args.n, _load_correlations(args.correlations))
    curve = profile.curve
    _write_curve_file(curve, args.out)
    payload = {
        "target": args.target,
        "seed": args.seed,
        "n": args.n,
        "points": len(curve.points),
        "curve": [[s, p] for s, p in curve.points],
        "out": args.out,
    }
    if args.format == "csv":
        _emit_csv(["severity", "exceedance"], [[repr(s), repr(p)] for s, p in curve.points])
    elif args.format == "text":
        _emit_text([f"wrote {len(curve.points)} points to {args.out}"])
    else:
        _emit_json(payload)
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    _reject_csv(args)
    model = _load_valid_model(args.file)
    tolerance_model = _load_valid_model(args.tolerance)
    if not tolerance_model.tolerance_curves:
        raise _InputError(f"{args.tolerance} declares no tolerance curves")
    correlations = _load_correlations(args.correlations)

    targets = [args.target] if args.target else [bt.id for bt in model.bow_ties]
    if not targets:
        targets = [et.id for et in model.event_trees]
    if not targets:
        raise _InputError(f"{args.file} has no bow-ties or event trees to evaluate")

    tolerance_results = []
    for target in targets:
        profile = _target_curve(model, target, args.seed, args.n, correlations)
        matching = [tc for tc in tolerance_model.tolerance_curves if tc.unit == profile.unit]
        if not matching:
            raise _InputError(f"no tolerance curve in {args.tolerance} uses unit {profile.unit.value}")
        for tc in matching:
            tolerance_results.append((target, compare_to_tolerance(profile.curve, tc)))

    dsa_results = []
    if args.dsa:
        dsa_results = [dsa_check(check, model) for check in model.dsa_checks]

    triggered: tuple[str, ...] = ()
    if args.kri:
        try:
            values = json.loads(_read_file(args.kri))
            values = {str(k): float(v) for k, v in values.items()}
        except (TypeError, ValueError, AttributeError) as exc:
            raise _InputError(f"bad KRI value file {args.kri}: {exc}") from exc
        try:
            triggered = kri_check(values, model.kri_definitions)
        except UnresolvedReferenceError as exc:
            raise _InputError(str(exc)) from exc

    verdict = Verdict(tuple(dsa_results), tuple(tolerance_results), triggered)
    payload = {"file": args.file, "seed": args.seed, "n": args.n, **verdict.to_dict()}
    if args.format == "text":
        lines = [
            f"{target} vs {r.curve_id}: {'acceptable' if r.acceptable else 'EXCEEDED'}"
            for target, r in verdict.tolerance
        ]
        lines += [
            f"dsa {r.check_id}: {'pass' if r.passed else 'FAIL'} ({r.measured} {r.comparator} {r.limit})"
            for r in verdict.dsa
        ]
        lines += [f"kri triggered: {k}" for k in verdict.triggered_kris]
        _emit_text(lines)
    else:
        _emit_json(payload)
    return EXIT_OK if verdict.ok else EXIT_VIOLATION


def _cmd_update(args) -> int:
    _reject_csv(args)
    model = _load_valid_model(args.file)
    try:
        updated = update_model_quantity(model, args.quantity, args.successes, args.trials)
    except UnresolvedReferenceError as exc:
        raise _UsageError(str(exc)) from exc
    except ValueError as exc:
        raise _InputError(str(exc)) from exc
    tree_id, node_id = args.quantity.split("/", 1)
    before = _quantity_at(model, tree_id, node_id)
    after = _quantity_at(updated, tree_id, node_id)
    try:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(serialize(updated))
    except OSError as exc:
        raise _InputError(f"cannot write {args.out}: {exc.strerror or exc}") from exc
    payload = {
        "quantity": args.quantity,
        "successes": args.successes,
        "trials": args.trials,
        "prior": {"alpha": before.params[0], "beta": before.params[1]},
        "posterior": {"alpha": after.params[0], "beta": after.params[1]},
        "posterior_mean": after.mean(),
        "out": args.out,
    }
    if args.format == "text":
        _emit_text([f"{args.quantity}: beta{before.params} -> beta{after.params}"])
    else:
        _emit_json(payload)
    return EXIT_OK


def _quantity_at(model: ScenarioModel, tree_id: str, node_id: str):
    from .faulttree import basic_events
    from .eventtree import walk_branches
    from .model import Branch

    ft = model.fault_tree(tree_id)
    if ft is not None:
        return basic_events(ft)[node_id]
    et = model.event_tree(tree_id)
    for node in walk_branches(et.root):
        if isinstance(node, Branch) and node.condition == node_id:
            return node.success_probability
    raise _UsageError(f"no quantity at {tree_id}/{node_id}")


# --------------------------------------------------------------------------
# parser and dispatch
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="riskforge", description="Quantitative risk modeling engine")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "csv", "text"], default="json", help="data stream format")

    def positive_int(text: str) -> int:
        value = int(text)
        if value < 1:
            raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
        return value

    seeded = argparse.ArgumentParser(add_help=False)
    seeded.add_argument("--seed", type=int, default=DEFAULT_SEED, help="random seed (echoed in output)")
    seeded.add_argument("--n", type=positive_int, default=DEFAULT_TRIALS, help="Monte Carlo trial count")
    seeded.add_argument("--correlations", help="JSON file with correlation ids and matrix")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check a model's structural invariants")
    p.add_argument("file")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("mcs", parents=[common], help="minimal cut sets of a fault tree")
    p.add_argument("file")
    p.add_argument("--tree", required=True)
    p.set_defaults(func=_cmd_mcs)

    p = sub.add_parser("quantify", parents=[common, seeded], help="Monte Carlo risk profile of a target")
    p.add_argument("file")
    p.add_argument("--target", required=True)
    p.add_argument("--samples-out", help="write per-trial samples (.csv column or .json array)")
    p.set_defaults(func=_cmd_quantify)

    p = sub.add_parser("sequences", parents=[common], help="enumerate event tree sequences")
    p.add_argument("file")
    p.add_argument("--etree", required=True)
    p.set_defaults(func=_cmd_sequences)

    p = sub.add_parser("bowtie", parents=[common], help="compose a bow-tie and enumerate its sequences")
    p.add_argument("file")
    p.add_argument("--id", required=True)
    p.set_defaults(func=_cmd_bowtie)

    p = sub.add_parser("infer", parents=[common], help="exact posterior in a Bayesian network")
    p.add_argument("file")
    p.add_argument("--bnet", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--evidence", action="append", metavar="NODE=STATE")
    p.set_defaults(func=_cmd_infer)

    p = sub.add_parser("fmeca", parents=[common], help="rank FMECA failure modes by RPN")
    p.add_argument("file")
    p.set_defaults(func=_cmd_fmeca)

    p = sub.add_parser("matrix", parents=[common], help="band a likelihood/severity pair into the risk matrix")
    p.add_argument("file")
    p.add_argument("--likelihood", type=float, required=True)
    p.add_argument("--severity", type=float, required=True)
    p.add_argument("--unit", required=True)
    p.add_argument("--bands", help="band table JSON override")
    p.set_defaults(func=_cmd_matrix)

    p = sub.add_parser("curves", parents=[common, seeded], help="export a target's exceedance curve as CSV")
    p.add_argument("file")
    p.add_argument("--target", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_curves)

    p = sub.add_parser("evaluate", parents=[common, seeded], help="compare profiles to tolerance; run DSA and KRI checks")
    p.add_argument("file")
    p.add_argument("--tolerance", required=True, help=".rsk file declaring tolerance curves")
    p.add_argument("--dsa", action="store_true", help="also run the model's design-basis checks")
    p.add_argument("--kri", help="JSON file of indicator values")
    p.add_argument("--target", help="evaluate one target instead of every bow-tie")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("update", parents=[common], help="Bayesian-update a beta quantity; write the new model")
    p.add_argument("file")
    p.add_argument("--quantity", required=True, metavar="TREE_ID/NODE_ID")
    p.add_argument("--successes", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_update)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except _InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CapExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except InconsistentEvidenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except RiskforgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
