"""riskforge: a quantitative risk-modeling engine.

Scenario building (fault trees, event trees, bow-ties, FMECA worksheets,
Bayesian networks) described in a declarative ``.rsk`` language, coupled with
dependency-aware estimation (seeded Monte Carlo, Gaussian copulas, Markov
pipelines, expert pooling) and evaluation against deterministic design-basis
criteria and probabilistic risk-tolerance curves.
"""

from .dsl import ParseError, parse, serialize
from .model import (
    BasicEvent,
    BayesNet,
    BayesNode,
    BowTie,
    Branch,
    CptRow,
    Criterion,
    DesignBasisCheck,
    EventTree,
    FaultTree,
    FmecaRow,
    FmecaWorksheet,
    Gate,
    GateOp,
    HarmUnit,
    Hazard,
    KriDefinition,
    KriDirection,
    MetricKind,
    Outcome,
    Override,
    OverrideKind,
    Probability,
    QuantityKind,
    QuantityRole,
    RiskEstimate,
    ScenarioModel,
    Severity,
    ToleranceCurve,
    UncertainQuantity,
    ValueKind,
)
from .validation import Finding, ValidationReport, validate

__version__ = "0.1.0"

__all__ = [
    "BasicEvent",
    "BayesNet",
    "BayesNode",
    "BowTie",
    "Branch",
    "CptRow",
    "Criterion",
    "DesignBasisCheck",
    "EventTree",
    "FaultTree",
    "Finding",
    "FmecaRow",
    "FmecaWorksheet",
    "Gate",
    "GateOp",
    "HarmUnit",
    "Hazard",
    "KriDefinition",
    "KriDirection",
    "MetricKind",
    "Outcome",
    "Override",
    "OverrideKind",
    "ParseError",
    "Probability",
    "QuantityKind",
    "QuantityRole",
    "RiskEstimate",
    "ScenarioModel",
    "Severity",
    "ToleranceCurve",
    "UncertainQuantity",
    "ValidationReport",
    "ValueKind",
    "parse",
    "serialize",
    "validate",
]
