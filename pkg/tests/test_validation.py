"""Structural validation findings."""

from riskforge import parse, validate
from riskforge.bayesnet import validate_cpts
from riskforge.model import (
    BasicEvent,
    FaultTree,
    Gate,
    GateOp,
    QuantityRole,
    ScenarioModel,
    UncertainQuantity,
)


def find(report, code):
    return [f for f in report.findings if f.code == code]


class TestCrossReferences:
    def test_unresolved_bowtie_reference(self):
        model = parse(
            """
            etree ET1 init p=0.5 branch C p=0.5 {
              outcome A severity=1.0 abstract-index
              outcome B severity=2.0 abstract-index
            }
            bowtie BT critical X left FT9 right ET1
            """
        )
        report = validate(model)
        errors = find(report, "unresolved-reference")
        assert len(errors) == 1
        assert "FT9" in errors[0].message

    def test_empty_model_is_valid(self):
        assert validate(ScenarioModel()).findings == ()

    def test_duplicate_ids_reported(self):
        model = parse('hazard H1 "one"\nhazard H1 "two"\n')
        assert len(find(validate(model), "duplicate-id")) == 1


class TestQuantityFindings:
    def test_out_of_range_point_probability(self):
        model = parse("ftree TOP and {\n  event A p=1.5\n}\n")
        report = validate(model)
        errors = find(report, "probability-out-of-range")
        assert len(errors) == 1
        assert "ftree TOP/event A" == errors[0].location
        assert not report.ok

    def test_lognormal_probability_warns_truncation(self):
        model = parse("ftree TOP and {\n  event A ~lognormal(-2, 0.5)\n}\n")
        report = validate(model)
        assert report.ok  # warning only
        assert len(find(report, "probability-truncation")) == 1

    def test_invalid_beta_parameters(self):
        model = parse("ftree TOP and {\n  event A ~beta(-1, 2)\n}\n")
        assert find(validate(model), "invalid-parameter")

    def test_conflicting_event_probability(self):
        model = parse(
            "ftree TOP or {\n  event A p=0.1\n  and {\n    event A p=0.2\n    event B p=0.1\n  }\n}\n"
        )
        assert find(validate(model), "event-probability-conflict")

    def test_frequency_quantity_in_gate_rejected(self):
        tree = FaultTree(
            "T",
            Gate(GateOp.OR, (BasicEvent("A", UncertainQuantity.point(2.0, role=QuantityRole.FREQUENCY)),)),
        )
        report = validate(ScenarioModel(fault_trees=(tree,)))
        assert find(report, "frequency-in-gate")

    def test_empty_gate_flagged_for_programmatic_models(self):
        tree = FaultTree("T", Gate(GateOp.AND, ()))
        assert find(validate(ScenarioModel(fault_trees=(tree,))), "empty-gate")


class TestCptFindings:
    def test_row_sum_error_names_node_and_row(self):
        model = parse(
            """
            bnet B {
              node A {
                states t f
                cpt { 0.7 0.2 }
              }
            }
            """
        )
        report = validate(model)
        errors = find(report, "cpt-row-sum")
        assert len(errors) == 1
        assert errors[0].location == "bnet B/node A"
        assert "sums to 0.8999999999999999" in errors[0].message  # 0.7 + 0.2 in floats

    def test_row_sum_within_tolerance_passes(self):
        model = parse(
            """
            bnet B {
              node A {
                states t f
                cpt { 0.7000000000001 0.2999999999999 }
              }
            }
            """
        )
        assert not find(validate(model), "cpt-row-sum")

    def test_cycle_finding_lists_nodes(self):
        model = parse(
            """
            bnet B {
              node A {
                states t f
                parents C
                cpt {
                  t : 0.5 0.5
                  f : 0.5 0.5
                }
              }
              node B {
                states t f
                parents A
                cpt {
                  t : 0.5 0.5
                  f : 0.5 0.5
                }
              }
              node C {
                states t f
                parents B
                cpt {
                  t : 0.5 0.5
                  f : 0.5 0.5
                }
              }
            }
            """
        )
        cycle = find(validate(model), "cycle")
        assert cycle
        for node in ("A", "B", "C"):
            assert node in cycle[0].message

    def test_missing_row_reported(self):
        model = parse(
            """
            bnet B {
              node A {
                states t f
                cpt { 0.5 0.5 }
              }
              node C {
                states t f
                parents A
                cpt {
                  t : 0.9 0.1
                }
              }
            }
            """
        )
        missing = find(validate(model), "cpt-missing-row")
        assert len(missing) == 1 and "f" in missing[0].message

    def test_validate_cpts_matches_model_validation(self):
        model = parse(
            """
            bnet B {
              node A {
                states t f
                cpt { 0.6 0.3 }
              }
            }
            """
        )
        direct = validate_cpts(model.bayes_nets[0])
        assert [f.code for f in direct.findings] == ["cpt-row-sum"]

    def test_valid_chain_is_clean(self):
        model = parse(
            """
            bnet B {
              node A {
                states t f
                cpt { 0.5 0.5 }
              }
              node C {
                states t f
                parents A
                cpt {
                  t : 0.8 0.2
                  f : 0.2 0.8
                }
              }
            }
            """
        )
        assert validate_cpts(model.bayes_nets[0]).findings == ()


class TestReportProperties:
    def test_validation_is_idempotent(self):
        model = parse("ftree TOP and {\n  event A p=1.5\n}\nhazard H1\nhazard H1\n")
        assert validate(model) == validate(model)

    def test_findings_deterministically_ordered(self):
        model = parse(
            "ftree Z and {\n  event A p=2.0\n}\nftree A and {\n  event B p=-1.0\n}\n"
        )
        report = validate(model)
        locations = [f.location for f in report.findings]
        assert locations == sorted(locations)

    def test_tolerance_monotonicity_findings(self):
        model = parse(
            "tolerance T unit fatalities {\n  point 10.0 0.1\n  point 5.0 0.5\n}\n"
        )
        assert find(validate(model), "severity-not-increasing")
        assert find(validate(model), "probability-increasing")

    def test_dsa_checks_validated(self):
        model = parse(
            """
            ftree FT and {
              event A p=0.1
            }
            dsa D scenario FT {
              set NOPE p=1.0
              require top <= 2.0
            }
            """
        )
        report = validate(model)
        assert find(report, "unresolved-reference")
        assert find(report, "limit-out-of-domain")

    def test_dsa_metric_mismatch(self):
        model = parse(
            """
            ftree FT and {
              event A p=0.1
            }
            dsa D scenario FT {
              require severity <= 10.0
            }
            """
        )
        assert find(validate(model), "metric-mismatch")

    def test_fmeca_score_range(self):
        model = parse("fmeca W {\n  mode M sev 11 occ 1 det 1\n}\n")
        assert find(validate(model), "score-out-of-range")


class TestEnginePreconditions:
    def test_error_free_models_pass_every_engine(self):
        """A model with an empty error report is never rejected structurally."""
        from corpus import DOCUMENTS
        from riskforge.bayesnet import joint_enumerate, query
        from riskforge.errors import CapExceededError
        from riskforge.eventtree import compose_bowtie, enumerate_sequences
        from riskforge.evaluate import dsa_check
        from riskforge.faulttree import minimal_cut_sets, top_probability_exact

        for doc in DOCUMENTS:
            model = parse(doc)
            if not validate(model).ok:
                continue
            for tree in model.fault_trees:
                minimal_cut_sets(tree)
                top_probability_exact(tree)
            for tree in model.event_trees:
                enumerate_sequences(tree)
            for bt in model.bow_ties:
                compose_bowtie(bt, model)
            for net in model.bayes_nets:
                query(net, net.nodes[0].id)
                try:
                    joint_enumerate(net)
                except CapExceededError:
                    pass  # a size cap, not a structural rejection
            for check in model.dsa_checks:
                dsa_check(check, model)
