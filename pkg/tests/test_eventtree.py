"""Event tree enumeration, conservation, and bow-tie composition."""

import random

import pytest

from corpus import BOWTIE_DOC, FREQ_ETREE, SIMPLE_ETREE, THREE_LEVEL_ETREE
from helpers import random_event_tree
from riskforge import parse
from riskforge.eventtree import compose_bowtie, enumerate_sequences, outcome_frequencies
from riskforge.faulttree import top_probability_exact
from riskforge.model import ValueKind


class TestEnumerateSequences:
    def test_single_condition_products(self):
        tree = parse(SIMPLE_ETREE).event_tree("ET1")
        sequences = enumerate_sequences(tree)
        assert [(s.outcome, s.value) for s in sequences] == [
            ("Contained", pytest.approx(0.09)),
            ("Released", pytest.approx(0.01, abs=1e-15)),
        ]
        assert all(s.kind is ValueKind.PROBABILITY for s in sequences)

    def test_frequency_symmetry(self):
        tree = parse(
            "etree E init freq=2.0/yr branch C1 p=0.5 {\n"
            "  branch C2 p=0.5 {\n"
            "    outcome A severity=1.0 fatalities\n"
            "    outcome B severity=2.0 fatalities\n"
            "  }\n"
            "  branch C3 p=0.5 {\n"
            "    outcome C severity=3.0 fatalities\n"
            "    outcome D severity=4.0 fatalities\n"
            "  }\n"
            "}"
        ).event_tree("E")
        sequences = enumerate_sequences(tree)
        assert len(sequences) == 4
        for seq in sequences:
            assert seq.value == pytest.approx(0.5)
            assert seq.kind is ValueKind.FREQUENCY

    def test_three_level_hand_multiplied(self):
        tree = parse(THREE_LEVEL_ETREE).event_tree("ET3")
        sequences = enumerate_sequences(tree)
        # spreadsheet-style products: init 0.8, then the branch factors
        expected = [
            ("O1", 0.8 * 0.5 * 0.25 * 0.125),
            ("O2", 0.8 * 0.5 * 0.25 * 0.875),
            ("O3", 0.8 * 0.5 * 0.75 * 0.75),
            ("O4", 0.8 * 0.5 * 0.75 * 0.25),
            ("O5", 0.8 * 0.5 * 0.5 * 0.25),
            ("O6", 0.8 * 0.5 * 0.5 * 0.75),
            ("O7", 0.8 * 0.5 * 0.5 * 0.625),
            ("O8", 0.8 * 0.5 * 0.5 * 0.375),
        ]
        assert [(s.outcome, s.value) for s in sequences] == [
            (o, pytest.approx(v, abs=1e-15)) for o, v in expected
        ]

    def test_success_branch_enumerated_first(self):
        tree = parse(SIMPLE_ETREE).event_tree("ET1")
        sequences = enumerate_sequences(tree)
        assert sequences[0].path == (("Detection", "success"),)
        assert sequences[1].path == (("Detection", "failure"),)

    @pytest.mark.parametrize("seed", range(30))
    def test_conservation(self, seed):
        tree = random_event_tree(random.Random(seed))
        sequences = enumerate_sequences(tree)
        total = sum(s.value for s in sequences)
        assert total == pytest.approx(tree.initiating.point_value(), abs=1e-12)

    def test_branch_probabilities_sum_to_one_by_construction(self):
        tree = parse(SIMPLE_ETREE).event_tree("ET1")
        sequences = enumerate_sequences(tree)
        success = next(s for s in sequences if s.path[0][1] == "success")
        failure = next(s for s in sequences if s.path[0][1] == "failure")
        assert success.value + failure.value == pytest.approx(0.1)

    def test_perturbation_monotonicity(self):
        tree = parse(SIMPLE_ETREE).event_tree("ET1")
        before = {s.outcome: s.value for s in enumerate_sequences(tree)}
        after = {s.outcome: s.value for s in enumerate_sequences(tree, branch_probabilities={"Detection": 0.95})}
        assert after["Contained"] >= before["Contained"]


class TestOutcomeFrequencies:
    def test_distinct_outcomes(self):
        tree = parse(SIMPLE_ETREE).event_tree("ET1")
        totals = outcome_frequencies(enumerate_sequences(tree))
        assert totals == {"Contained": pytest.approx(0.09), "Released": pytest.approx(0.01, abs=1e-15)}

    def test_shared_outcome_summed(self):
        tree = parse(
            "etree E init p=1.0 branch C1 p=0.5 {\n"
            "  outcome Same severity=1.0 abstract-index\n"
            "  branch C2 p=0.5 {\n"
            "    outcome Same severity=1.0 abstract-index\n"
            "    outcome Other severity=2.0 abstract-index\n"
            "  }\n"
            "}"
        ).event_tree("E")
        totals = outcome_frequencies(enumerate_sequences(tree))
        assert totals["Same"] == pytest.approx(0.75)
        assert totals["Other"] == pytest.approx(0.25)

    def test_totals_conserve_initiating_frequency(self):
        tree = parse(FREQ_ETREE).event_tree("ET2")
        totals = outcome_frequencies(enumerate_sequences(tree))
        assert sum(totals.values()) == pytest.approx(2.0, abs=1e-12)


class TestComposeBowtie:
    def test_single_event_chain(self):
        model = parse(
            "ftree FT or {\n  event A p=0.05\n}\n"
            "etree ET init p=1.0 branch C p=0.8 {\n"
            "  outcome Good severity=1.0 abstract-index\n"
            "  outcome Bad severity=2.0 abstract-index\n"
            "}\n"
            "bowtie BT critical X left FT right ET\n"
        )
        composed = compose_bowtie(model.bow_tie("BT"), model)
        sequences = enumerate_sequences(composed)
        assert composed.derived_mode == "exact"
        assert [s.value for s in sequences] == [pytest.approx(0.04), pytest.approx(0.01, abs=1e-15)]

    def test_composition_matches_manual_initiating(self):
        model = parse(BOWTIE_DOC)
        composed = compose_bowtie(model.bow_tie("BT1"), model)
        top = float(top_probability_exact(model.fault_tree("CAUSES")))
        assert composed.initiating.params[0] == pytest.approx(top, abs=1e-15)
        manual = enumerate_sequences(model.event_tree("CONSEQ"), initiating_value=top)
        composed_seqs = enumerate_sequences(composed)
        assert [(a.outcome, a.value) for a in composed_seqs] == [(b.outcome, b.value) for b in manual]

    def test_zero_probability_causes(self):
        model = parse(
            "ftree FT and {\n  event A p=0.0\n  event B p=0.5\n}\n"
            "etree ET init p=1.0 branch C p=0.5 {\n"
            "  outcome G severity=1.0 abstract-index\n"
            "  outcome B2 severity=2.0 abstract-index\n"
            "}\n"
            "bowtie BT critical X left FT right ET\n"
        )
        composed = compose_bowtie(model.bow_tie("BT"), model)
        assert all(s.value == 0.0 for s in enumerate_sequences(composed))
