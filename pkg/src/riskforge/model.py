"""Shared domain types for scenario and estimation artifacts.

Everything here is an immutable dataclass; models are safe to share across
concurrent readers. Construction is deliberately permissive for values that
arrive from parsed documents (distribution parameters, CPT entries, scores):
semantic violations are reported by :func:`riskforge.validation.validate`
rather than raised at construction time. The two exceptions are
:class:`Probability` and :class:`Severity`, whose invariants are enforced on
construction because they only appear as computed results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Union

import numpy as np
from scipy import stats

from .errors import InvalidParameterError, SourceSpan


class HarmUnit(str, Enum):
    """Enumerated units in which harm severity is expressed."""

    MONETARY_LOSS = "monetary-loss"
    FATALITIES = "fatalities"
    AFFECTED_PERSONS = "affected-persons"
    ABSTRACT_INDEX = "abstract-index"


@dataclass(frozen=True)
class Probability:
    """A dimensionless probability in [0, 1]; out-of-range values are rejected."""

    value: float

    def __post_init__(self) -> None:
        v = self.value
        if not isinstance(v, (int, float)) or math.isnan(v) or not 0.0 <= v <= 1.0:
            raise ValueError(f"probability out of range: {v!r}")

    def __float__(self) -> float:
        return float(self.value)


@dataclass(frozen=True)
class Severity:
    """A non-negative harm magnitude in one of the enumerated units."""

    magnitude: float
    unit: HarmUnit

    def __post_init__(self) -> None:
        if not math.isfinite(self.magnitude) or self.magnitude < 0:
            raise ValueError(f"severity magnitude must be finite and non-negative: {self.magnitude!r}")
        if not isinstance(self.unit, HarmUnit):
            object.__setattr__(self, "unit", HarmUnit(self.unit))


class QuantityKind(str, Enum):
    POINT = "point"
    INTERVAL = "interval"
    BETA = "beta"
    LOGNORMAL = "lognormal"
    TRIANGULAR = "triangular"
    EMPIRICAL = "empirical"
    POISSON = "poisson"
    MIXTURE = "mixture"


class QuantityRole(str, Enum):
    """Semantic type of a quantity; probabilities and frequencies never mix."""

    PROBABILITY = "probability"
    FREQUENCY = "frequency"
    GENERIC = "generic"


# Kinds whose sampling distribution can place mass outside [0, 1]; when such a
# quantity is probability-typed, samples are truncated and a warning finding
# is raised instead of rejecting the model.
_UNBOUNDED_KINDS = (
    QuantityKind.INTERVAL,
    QuantityKind.LOGNORMAL,
    QuantityKind.TRIANGULAR,
    QuantityKind.EMPIRICAL,
)


@dataclass(frozen=True)
class UncertainQuantity:
    """A value given as a point, interval, parametric distribution, or sample set.

    ``params`` holds the kind-specific parameters:

    ==========  =============================
    point       (value,)
    interval    (lower, upper)  -- sampled uniformly
    beta        (alpha, beta)
    lognormal   (mu, sigma)     -- of log(X)
    triangular  (low, mode, high)
    empirical   ()              -- samples carried in ``samples``
    poisson     (rate,)         -- event counts
    mixture     ()              -- ``components`` with ``weights``
    ==========  =============================
    """

    kind: QuantityKind
    params: tuple[float, ...] = ()
    samples: tuple[float, ...] = ()
    components: tuple["UncertainQuantity", ...] = ()
    weights: tuple[float, ...] = ()
    role: QuantityRole = QuantityRole.GENERIC
    provenance: str = field(default="", compare=False)
    span: SourceSpan | None = field(default=None, compare=False, repr=False)

    # -- constructors ------------------------------------------------------

    @classmethod
    def point(cls, value: float, role: QuantityRole = QuantityRole.GENERIC, **kw) -> "UncertainQuantity":
        return cls(QuantityKind.POINT, (float(value),), role=role, **kw)

    @classmethod
    def interval(cls, lower: float, upper: float, role: QuantityRole = QuantityRole.GENERIC, **kw) -> "UncertainQuantity":
        return cls(QuantityKind.INTERVAL, (float(lower), float(upper)), role=role, **kw)

    @classmethod
    def beta(cls, alpha: float, beta: float, role: QuantityRole = QuantityRole.GENERIC, **kw) -> "UncertainQuantity":
        return cls(QuantityKind.BETA, (float(alpha), float(beta)), role=role, **kw)

    @classmethod
    def lognormal(cls, mu: float, sigma: float, role: QuantityRole = QuantityRole.GENERIC, **kw) -> "UncertainQuantity":
        return cls(QuantityKind.LOGNORMAL, (float(mu), float(sigma)), role=role, **kw)

    @classmethod
    def triangular(cls, low: float, mode: float, high: float, role: QuantityRole = QuantityRole.GENERIC, **kw) -> "UncertainQuantity":
        return cls(QuantityKind.TRIANGULAR, (float(low), float(mode), float(high)), role=role, **kw)

    @classmethod
    def empirical(cls, samples, role: QuantityRole = QuantityRole.GENERIC, **kw) -> "UncertainQuantity":
        return cls(QuantityKind.EMPIRICAL, (), samples=tuple(float(s) for s in samples), role=role, **kw)

    @classmethod
    def poisson(cls, rate: float, role: QuantityRole = QuantityRole.GENERIC, **kw) -> "UncertainQuantity":
        return cls(QuantityKind.POISSON, (float(rate),), role=role, **kw)

    @classmethod
    def mixture(cls, components, weights, role: QuantityRole = QuantityRole.GENERIC, **kw) -> "UncertainQuantity":
        return cls(
            QuantityKind.MIXTURE,
            (),
            components=tuple(components),
            weights=tuple(float(w) for w in weights),
            role=role,
            **kw,
        )

    # -- introspection -----------------------------------------------------

    def problems(self) -> list[str]:
        """Parameter-validity violations, empty when the quantity is usable."""
        k, p = self.kind, self.params
        out: list[str] = []
        if any(math.isnan(x) or math.isinf(x) for x in p):
            return [f"{k.value} parameters must be finite: {p}"]
        if k is QuantityKind.POINT:
            if self.role is QuantityRole.PROBABILITY and not 0.0 <= p[0] <= 1.0:
                out.append(f"point probability out of range [0,1]: {p[0]!r}")
            if self.role is QuantityRole.FREQUENCY and p[0] < 0:
                out.append(f"frequency must be non-negative: {p[0]!r}")
        elif k is QuantityKind.INTERVAL:
            if p[0] > p[1]:
                out.append(f"interval lower {p[0]!r} exceeds upper {p[1]!r}")
        elif k is QuantityKind.BETA:
            if p[0] <= 0 or p[1] <= 0:
                out.append(f"beta parameters must be positive: {p}")
        elif k is QuantityKind.LOGNORMAL:
            if p[1] <= 0:
                out.append(f"lognormal sigma must be positive: {p[1]!r}")
        elif k is QuantityKind.TRIANGULAR:
            if not p[0] <= p[1] <= p[2]:
                out.append(f"triangular parameters must satisfy low <= mode <= high: {p}")
        elif k is QuantityKind.EMPIRICAL:
            if not self.samples:
                out.append("empirical sample list is empty")
            elif any(math.isnan(s) or math.isinf(s) for s in self.samples):
                out.append("empirical samples must be finite")
        elif k is QuantityKind.POISSON:
            if p[0] < 0:
                out.append(f"poisson rate must be non-negative: {p[0]!r}")
            if self.role is QuantityRole.PROBABILITY:
                out.append("count distribution used where a probability is required")
        elif k is QuantityKind.MIXTURE:
            if not self.components:
                out.append("mixture has no components")
            elif len(self.components) != len(self.weights):
                out.append("mixture component/weight lengths differ")
            else:
                if any(w < 0 for w in self.weights):
                    out.append("mixture weights must be non-negative")
                if abs(sum(self.weights) - 1.0) > 1e-9:
                    out.append(f"mixture weights sum to {sum(self.weights)!r}, not 1")
                for c in self.components:
                    out.extend(c.problems())
        return out

    def check_valid(self) -> None:
        probs = self.problems()
        if probs:
            raise InvalidParameterError("; ".join(probs))

    def may_exceed_unit_interval(self) -> bool:
        """True when the sampling distribution can put mass outside [0, 1]."""
        k, p = self.kind, self.params
        if k is QuantityKind.LOGNORMAL:
            return True
        if k is QuantityKind.INTERVAL:
            return p[0] < 0 or p[1] > 1
        if k is QuantityKind.TRIANGULAR:
            return p[0] < 0 or p[2] > 1
        if k is QuantityKind.EMPIRICAL:
            return any(s < 0 or s > 1 for s in self.samples)
        if k is QuantityKind.MIXTURE:
            return any(c.may_exceed_unit_interval() for c in self.components)
        return False

    def mean(self) -> float:
        """Mean of the (untruncated) distribution."""
        k, p = self.kind, self.params
        if k is QuantityKind.POINT:
            return p[0]
        if k is QuantityKind.INTERVAL:
            return 0.5 * (p[0] + p[1])
        if k is QuantityKind.BETA:
            return p[0] / (p[0] + p[1])
        if k is QuantityKind.LOGNORMAL:
            return math.exp(p[0] + 0.5 * p[1] ** 2)
        if k is QuantityKind.TRIANGULAR:
            return (p[0] + p[1] + p[2]) / 3.0
        if k is QuantityKind.EMPIRICAL:
            return float(np.mean(self.samples))
        if k is QuantityKind.POISSON:
            return p[0]
        if k is QuantityKind.MIXTURE:
            return float(sum(w * c.mean() for w, c in zip(self.weights, self.components)))
        raise InvalidParameterError(f"unknown quantity kind {k!r}")

    def point_value(self) -> float:
        """Mean reduced for point analyses; probabilities are clamped to [0, 1]."""
        m = self.mean()
        if self.role is QuantityRole.PROBABILITY:
            return min(1.0, max(0.0, m))
        return m

    def transform(self, u: np.ndarray) -> np.ndarray:
        """Map uniform [0,1) draws through the quantity's inverse CDF.

        Mixtures are sampled by composition (component chosen by cumulative
        weight, residual uniform rescaled), which preserves the mixture
        distribution but is not a monotone quantile transform.
        """
        k, p = self.kind, self.params
        u = np.asarray(u, dtype=float)
        if k is QuantityKind.POINT:
            return np.full(u.shape, p[0])
        if k is QuantityKind.INTERVAL:
            return p[0] + u * (p[1] - p[0])
        if k is QuantityKind.BETA:
            return stats.beta.ppf(u, p[0], p[1])
        if k is QuantityKind.LOGNORMAL:
            return np.exp(p[0] + p[1] * stats.norm.ppf(u))
        if k is QuantityKind.TRIANGULAR:
            a, m, b = p
            if b == a:
                return np.full(u.shape, a)
            c = (m - a) / (b - a)
            return stats.triang.ppf(u, c, loc=a, scale=b - a)
        if k is QuantityKind.EMPIRICAL:
            return np.quantile(np.asarray(self.samples), u, method="inverted_cdf").astype(float)
        if k is QuantityKind.POISSON:
            return np.maximum(stats.poisson.ppf(u, p[0]), 0.0)
        if k is QuantityKind.MIXTURE:
            cum = np.cumsum(self.weights)
            cum[-1] = 1.0  # guard against rounding on the last edge
            idx = np.searchsorted(cum, u, side="right")
            idx = np.minimum(idx, len(self.components) - 1)
            out = np.empty(u.shape)
            lo = np.concatenate(([0.0], cum[:-1]))
            for i, comp in enumerate(self.components):
                mask = idx == i
                if not mask.any():
                    continue
                w = self.weights[i]
                inner = (u[mask] - lo[i]) / w if w > 0 else np.zeros(mask.sum())
                out[mask] = comp.transform(np.clip(inner, 0.0, 1.0))
            return out
        raise InvalidParameterError(f"unknown quantity kind {k!r}")


@dataclass(frozen=True)
class Hazard:
    """A declared source of risk."""

    id: str
    description: str = ""
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


class ValueKind(str, Enum):
    """Unit of a likelihood-like value: probability or frequency (events/year)."""

    PROBABILITY = "probability"
    FREQUENCY = "per-year"


@dataclass(frozen=True)
class RiskEstimate:
    """Likelihood (probability or events/year) combined with a severity."""

    likelihood: float
    severity: Severity
    kind: ValueKind = ValueKind.PROBABILITY
    confidence: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if self.kind is ValueKind.PROBABILITY and not 0.0 <= self.likelihood <= 1.0:
            raise ValueError(f"likelihood out of range: {self.likelihood!r}")
        if self.kind is ValueKind.FREQUENCY and self.likelihood < 0:
            raise ValueError(f"frequency must be non-negative: {self.likelihood!r}")
        if self.confidence is not None:
            lo, hi = self.confidence
            if not lo <= self.likelihood <= hi:
                raise ValueError("confidence interval must contain the point likelihood")


# --------------------------------------------------------------------------
# Fault trees
# --------------------------------------------------------------------------


class GateOp(str, Enum):
    AND = "and"
    OR = "or"


@dataclass(frozen=True)
class BasicEvent:
    """A fault-tree leaf: a failure with an (uncertain) probability."""

    id: str
    probability: UncertainQuantity
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Gate:
    """An AND/OR gate over gates and basic events (coherent: no NOT)."""

    op: GateOp
    children: tuple[Union["Gate", BasicEvent], ...]
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class FaultTree:
    id: str
    top: Gate
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


# --------------------------------------------------------------------------
# Event trees and bow-ties
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Outcome:
    id: str
    severity: Severity
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Branch:
    """A binary branch point; failure probability is always the complement."""

    condition: str
    success_probability: UncertainQuantity
    on_success: Union["Branch", Outcome]
    on_failure: Union["Branch", Outcome]
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class EventTree:
    id: str
    initiating: UncertainQuantity
    initiating_kind: ValueKind
    root: Branch
    span: SourceSpan | None = field(default=None, compare=False, repr=False)
    derived_mode: str | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class BowTie:
    """A fault tree (causes) and an event tree (consequences) around a critical event."""

    id: str
    critical_event: str
    fault_tree: str
    event_tree: str
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


# --------------------------------------------------------------------------
# FMECA worksheets
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class FmecaRow:
    """One failure mode with 1-10 severity/occurrence/detection scores."""

    id: str
    severity: int
    occurrence: int
    detection: int
    notes: str = ""
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class FmecaWorksheet:
    id: str
    rows: tuple[FmecaRow, ...]
    span: SourceSpan | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "rows", tuple(sorted(self.rows, key=lambda r: r.id)))


# --------------------------------------------------------------------------
# Bayesian networks
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CptRow:
    """P(node states | one parent-state combination); empty key for root nodes."""

    key: tuple[str, ...]
    values: tuple[float, ...]
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class BayesNode:
    id: str
    states: tuple[str, ...]
    parents: tuple[str, ...]
    cpt: tuple[CptRow, ...]
    span: SourceSpan | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "cpt", tuple(sorted(self.cpt, key=lambda r: r.key)))


@dataclass(frozen=True)
class BayesNet:
    id: str
    nodes: tuple[BayesNode, ...]
    span: SourceSpan | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", tuple(sorted(self.nodes, key=lambda n: n.id)))

    @cached_property
    def node_map(self) -> dict[str, BayesNode]:
        return {n.id: n for n in self.nodes}


# --------------------------------------------------------------------------
# Tolerance curves, KRIs, design-basis checks
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ToleranceCurve:
    """Maximum acceptable exceedance probability per severity level."""

    id: str
    unit: HarmUnit
    points: tuple[tuple[float, float], ...]
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


class KriDirection(str, Enum):
    ABOVE = "above"
    BELOW = "below"


@dataclass(frozen=True)
class KriDefinition:
    id: str
    threshold: float
    direction: KriDirection
    description: str = ""
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


class OverrideKind(str, Enum):
    SET_PROBABILITY = "set"
    FORCE_FAILURE = "fail"


@dataclass(frozen=True)
class Override:
    """A worst-case override: pin an event/branch probability or force a failure."""

    kind: OverrideKind
    target: str
    value: float | None = None
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


class MetricKind(str, Enum):
    TOP_PROBABILITY = "top"
    OUTCOME_FREQUENCY = "outcome"
    MAX_SEVERITY = "severity"


@dataclass(frozen=True)
class Criterion:
    metric: MetricKind
    comparator: str  # one of <=, <, >=, >
    limit: float
    outcome_id: str | None = None


@dataclass(frozen=True)
class DesignBasisCheck:
    """A deterministic pass/fail check on a scenario under worst-case overrides."""

    id: str
    scenario: str
    overrides: tuple[Override, ...]
    criterion: Criterion
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


# --------------------------------------------------------------------------
# The model
# --------------------------------------------------------------------------


def _sorted_by_id(items) -> tuple:
    return tuple(sorted(items, key=lambda e: e.id))


@dataclass(frozen=True)
class ScenarioModel:
    """The parsed universe of scenario and evaluation artifacts.

    Collections are canonically ordered by id on construction, so two models
    that differ only in declaration order compare (and serialize) equal.
    Duplicate ids are retained for validation to report.
    """

    hazards: tuple[Hazard, ...] = ()
    fault_trees: tuple[FaultTree, ...] = ()
    event_trees: tuple[EventTree, ...] = ()
    bow_ties: tuple[BowTie, ...] = ()
    fmeca_worksheets: tuple[FmecaWorksheet, ...] = ()
    bayes_nets: tuple[BayesNet, ...] = ()
    tolerance_curves: tuple[ToleranceCurve, ...] = ()
    kri_definitions: tuple[KriDefinition, ...] = ()
    dsa_checks: tuple[DesignBasisCheck, ...] = ()

    def __post_init__(self) -> None:
        for name in (
            "hazards",
            "fault_trees",
            "event_trees",
            "bow_ties",
            "fmeca_worksheets",
            "bayes_nets",
            "tolerance_curves",
            "kri_definitions",
            "dsa_checks",
        ):
            object.__setattr__(self, name, _sorted_by_id(getattr(self, name)))

    def _first_by_id(self, collection, id: str):
        for item in collection:
            if item.id == id:
                return item
        return None

    def fault_tree(self, id: str) -> FaultTree | None:
        return self._first_by_id(self.fault_trees, id)

    def event_tree(self, id: str) -> EventTree | None:
        return self._first_by_id(self.event_trees, id)

    def bow_tie(self, id: str) -> BowTie | None:
        return self._first_by_id(self.bow_ties, id)

    def bayes_net(self, id: str) -> BayesNet | None:
        return self._first_by_id(self.bayes_nets, id)

    def tolerance_curve(self, id: str) -> ToleranceCurve | None:
        return self._first_by_id(self.tolerance_curves, id)

    def is_empty(self) -> bool:
        return not any(
            (
                self.hazards,
                self.fault_trees,
                self.event_trees,
                self.bow_ties,
                self.fmeca_worksheets,
                self.bayes_nets,
                self.tolerance_curves,
                self.kri_definitions,
                self.dsa_checks,
            )
        )


def replace_quantity(q: UncertainQuantity, **changes) -> UncertainQuantity:
    """dataclasses.replace, re-exported for quantity updates."""
    return replace(q, **changes)
