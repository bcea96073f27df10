"""Monte Carlo propagation through scenario elements, plus stage pipelines
and compound (frequency x severity) loss aggregation.

Per trial, every uncertain input is drawn (jointly through the Gaussian
copula when a correlation spec is given) and the element's point computation
is evaluated; trials are vectorized but chunked by the fixed substream rule,
so results are bit-identical regardless of internal partitioning.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ..errors import InvalidParameterError, NonStochasticMatrixError, UnresolvedReferenceError
from ..eventtree import walk_branches
from ..faulttree import EXACT_EVENT_CAP, basic_events, minimal_cut_sets, structure_table
from ..model import (
    BowTie,
    Branch,
    EventTree,
    FaultTree,
    HarmUnit,
    Outcome,
    QuantityKind,
    ScenarioModel,
    UncertainQuantity,
    ValueKind,
)
from .curves import RiskCurve, exceedance_curve
from .rng import RandomStream
from .sampling import CorrelationSpec, copula_sample, sample

ROW_SUM_TOL = 1e-9

# Initiating-value input key for event trees; "::" keeps it out of the
# identifier namespace so it can never collide with a condition id.
INITIATING_KEY = "::init"


@dataclass(frozen=True)
class Summary:
    mean: float
    standard_error: float
    p5: float
    p50: float
    p95: float


@dataclass(frozen=True)
class RiskProfile:
    """Monte Carlo output: per-trial samples plus summary statistics.

    ``curve`` is the severity exceedance curve for severity-bearing elements
    (event trees, bow-ties); ``mode`` records how fault-tree tops were
    computed ("exact" or "rare-event-bound").
    """

    samples: np.ndarray
    summary: Summary
    curve: RiskCurve | None = None
    unit: HarmUnit | None = None
    value_kind: ValueKind | None = None
    truncated: Mapping[str, int] | None = None
    mode: str | None = None

    @property
    def truncated_total(self) -> int:
        return sum((self.truncated or {}).values())


@dataclass(frozen=True)
class LikelihoodChain:
    """The three-factor misuse chain: capability, misuse given capability,
    harm given misuse."""

    p_capability: UncertainQuantity
    p_misuse_given_capability: UncertainQuantity
    p_harm_given_misuse: UncertainQuantity

    def inputs(self) -> list[tuple[str, UncertainQuantity]]:
        return [
            ("capability", self.p_capability),
            ("misuse_given_capability", self.p_misuse_given_capability),
            ("harm_given_misuse", self.p_harm_given_misuse),
        ]


def summarize(samples: np.ndarray) -> Summary:
    n = samples.size
    first = float(samples[0])
    if np.all(samples == first):
        # degenerate trials: the mean is the common value exactly, not a
        # rounding-accumulated np.mean of it
        return Summary(first, 0.0, first, first, first)
    se = float(np.std(samples, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    p5, p50, p95 = (float(v) for v in np.percentile(samples, [5, 50, 95]))
    return Summary(float(np.mean(samples)), se, p5, p50, p95)


# --------------------------------------------------------------------------
# input drawing
# --------------------------------------------------------------------------


def _draw_inputs(
    inputs: list[tuple[str, UncertainQuantity]],
    stream: RandomStream,
    n: int,
    correlations: CorrelationSpec | None,
) -> tuple[dict[str, np.ndarray], dict[str, int]]:
    """One column of n draws per input id; correlated ids drawn jointly."""
    index = {key: i for i, (key, _) in enumerate(inputs)}
    if len(index) != len(inputs):
        raise ValueError("input ids must be distinct")
    columns: dict[str, np.ndarray] = {}
    truncated: dict[str, int] = {}
    correlated: set[str] = set()
    if correlations is not None:
        unknown = [i for i in correlations.ids if i not in index]
        if unknown:
            raise UnresolvedReferenceError(f"correlation ids not among element inputs: {', '.join(unknown)}")
        marginals = {key: q for key, q in inputs if key in set(correlations.ids)}
        joint = copula_sample(
            correlations,
            marginals,
            stream,
            n,
            variable_indices=[index[i] for i in correlations.ids],
        )
        columns.update(joint.values)
        truncated.update(joint.truncated)
        correlated = set(correlations.ids)
    for key, q in inputs:
        if key in correlated:
            continue
        result = sample(q, stream, n, variable=index[key])
        columns[key] = result.values
        truncated[key] = result.truncated
    return columns, truncated


# --------------------------------------------------------------------------
# vectorized element evaluations
# --------------------------------------------------------------------------

_STATE_BUDGET = 1 << 22  # trials-per-block x states, keeps memory modest


def _fault_tree_tops(tree: FaultTree, columns: Mapping[str, np.ndarray], n: int, *, exact_cap: int = EXACT_EVENT_CAP) -> tuple[np.ndarray, str]:
    ids = sorted(basic_events(tree))
    k = len(ids)
    if k <= exact_cap:
        top = structure_table(tree, ids)
        states = 1 << k
        masks = np.arange(states, dtype=np.uint64)
        bits = [((masks >> np.uint64(i)) & np.uint64(1)) != 0 for i in range(k)]
        out = np.empty(n)
        block = max(1, _STATE_BUDGET // states)
        for lo in range(0, n, block):
            hi = min(n, lo + block)
            state_p = np.ones((hi - lo, states))
            for i, eid in enumerate(ids):
                col = columns[eid][lo:hi, None]
                state_p *= np.where(bits[i][None, :], col, 1.0 - col)
            out[lo:hi] = state_p[:, top].sum(axis=1)
        return np.clip(out, 0.0, 1.0), "exact"
    tops = np.zeros(n)
    for cs in minimal_cut_sets(tree):
        term = np.ones(n)
        for eid in sorted(cs):
            term = term * columns[eid]
        tops += term
    return np.minimum(tops, 1.0), "rare-event-bound"


def _event_tree_unit(tree: EventTree) -> HarmUnit:
    units = {node.severity.unit for node in walk_branches(tree.root) if isinstance(node, Outcome)}
    if len(units) != 1:
        raise ValueError(
            f"etree {tree.id}: outcomes mix harm units ({', '.join(sorted(u.value for u in units))}); "
            "severity aggregation needs a single unit"
        )
    return units.pop()


def _sequence_values(tree: EventTree, init: np.ndarray, columns: Mapping[str, np.ndarray]) -> list[tuple[Outcome, np.ndarray]]:
    """Per-sequence per-trial values (success branch first, depth first)."""
    out: list[tuple[Outcome, np.ndarray]] = []

    def descend(node, value: np.ndarray) -> None:
        if isinstance(node, Outcome):
            out.append((node, value))
            return
        p = columns[node.condition]
        descend(node.on_success, value * p)
        descend(node.on_failure, value * (1.0 - p))

    descend(tree.root, init)
    return out


# --------------------------------------------------------------------------
# propagate
# --------------------------------------------------------------------------


def propagate(
    element: FaultTree | EventTree | BowTie | LikelihoodChain,
    stream: RandomStream,
    n: int,
    *,
    correlations: CorrelationSpec | None = None,
    model: ScenarioModel | None = None,
) -> RiskProfile:
    """Monte Carlo risk profile of a scenario element.

    Fault trees and likelihood chains yield per-trial probabilities; event
    trees and bow-ties yield per-trial expected severities plus a pooled
    severity exceedance curve. Bow-ties need ``model`` to resolve their
    tree references.
    """
    if n < 1:
        raise ValueError(f"trial count must be >= 1, got {n}")

    if isinstance(element, FaultTree):
        inputs = [(eid, q) for eid, q in basic_events(element).items()]
        columns, truncated = _draw_inputs(inputs, stream, n, correlations)
        tops, mode = _fault_tree_tops(element, columns, n)
        return RiskProfile(tops, summarize(tops), value_kind=ValueKind.PROBABILITY, truncated=truncated, mode=mode)

    if isinstance(element, LikelihoodChain):
        columns, truncated = _draw_inputs(element.inputs(), stream, n, correlations)
        chained = (
            columns["capability"] * columns["misuse_given_capability"] * columns["harm_given_misuse"]
        )
        return RiskProfile(chained, summarize(chained), value_kind=ValueKind.PROBABILITY, truncated=truncated)

    if isinstance(element, BowTie):
        if model is None:
            raise ValueError("propagating a bow-tie requires the containing model")
        ft = model.fault_tree(element.fault_tree)
        et = model.event_tree(element.event_tree)
        if ft is None:
            raise UnresolvedReferenceError(f"bowtie {element.id}: unresolved reference {element.fault_tree}")
        if et is None:
            raise UnresolvedReferenceError(f"bowtie {element.id}: unresolved reference {element.event_tree}")
        ft_inputs = [(eid, q) for eid, q in basic_events(ft).items()]
        et_conditions = _condition_quantities(et)
        shared = {eid for eid, _ in ft_inputs} & {cid for cid, _ in et_conditions}
        if shared:
            raise ValueError(f"bowtie {element.id}: ids shared between fault and event tree: {', '.join(sorted(shared))}")
        inputs = ft_inputs + et_conditions
        columns, truncated = _draw_inputs(inputs, stream, n, correlations)
        init, mode = _fault_tree_tops(ft, columns, n)
        return _severity_profile(et, init, columns, truncated, mode)

    if isinstance(element, EventTree):
        inputs = [(INITIATING_KEY, element.initiating)] + _condition_quantities(element)
        columns, truncated = _draw_inputs(inputs, stream, n, correlations)
        init = columns[INITIATING_KEY]
        if element.initiating_kind is ValueKind.FREQUENCY and np.any(init < 0):
            raise InvalidParameterError(f"etree {element.id}: initiating frequency must be non-negative")
        return _severity_profile(element, init, columns, truncated, None)

    raise TypeError(f"cannot propagate element of type {type(element).__name__}")


def _condition_quantities(tree: EventTree) -> list[tuple[str, UncertainQuantity]]:
    found: dict[str, UncertainQuantity] = {}
    for node in walk_branches(tree.root):
        if isinstance(node, Branch) and node.condition not in found:
            found[node.condition] = node.success_probability
    return [(cid, found[cid]) for cid in sorted(found)]


def _severity_profile(
    tree: EventTree,
    init: np.ndarray,
    columns: Mapping[str, np.ndarray],
    truncated: dict[str, int],
    mode: str | None,
) -> RiskProfile:
    unit = _event_tree_unit(tree)
    n = init.size
    sequences = _sequence_values(tree, init, columns)
    expected = np.zeros(n)
    severities: list[float] = []
    weights: list[float] = []
    for outcome, values in sequences:
        expected += values * outcome.severity.magnitude
        severities.append(outcome.severity.magnitude)
        weights.append(float(values.mean()))
    kind = tree.initiating_kind
    # An exceedance curve is a probability curve; frequency-initiated trees
    # have no bounded exceedance to report.
    curve = exceedance_curve(severities, np.asarray(weights)) if kind is ValueKind.PROBABILITY else None
    return RiskProfile(expected, summarize(expected), curve=curve, unit=unit, value_kind=kind, truncated=truncated, mode=mode)


# --------------------------------------------------------------------------
# Markov stage pipelines
# --------------------------------------------------------------------------


def markov_distribution(matrices: Sequence, initial) -> np.ndarray:
    """Distribution after applying row-stochastic transition matrices in order."""
    dist = np.asarray(initial, dtype=float)
    if dist.ndim != 1:
        raise ValueError("initial state must be a distribution vector")
    if abs(dist.sum() - 1.0) > ROW_SUM_TOL or np.any(dist < 0):
        raise NonStochasticMatrixError(f"initial distribution sums to {dist.sum()!r}, not 1")
    for step, matrix in enumerate(matrices):
        m = np.asarray(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] != dist.size:
            raise ValueError(f"transition matrix {step} has shape {m.shape}, expected {(dist.size, dist.size)}")
        if np.any(m < 0) or np.any(np.abs(m.sum(axis=1) - 1.0) > ROW_SUM_TOL):
            raise NonStochasticMatrixError(f"transition matrix {step} is not row-stochastic")
        dist = dist @ m
    return dist


def markov_pipeline(stages, *, initial=None, success_state: int | None = None) -> float:
    """Cumulative success probability of a multi-stage process.

    With scalar stage probabilities, returns their product (independent
    stages). With transition matrices, returns the probability mass in
    ``success_state`` after applying every matrix to ``initial`` (an index
    or a distribution vector).
    """
    stages = list(stages)
    if not stages:
        raise ValueError("at least one stage is required")
    if all(np.isscalar(s) or getattr(s, "ndim", None) == 0 for s in stages):
        product = 1.0
        for i, s in enumerate(stages):
            p = float(s)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"stage {i} probability out of range: {p!r}")
            product *= p
        return product
    if initial is None or success_state is None:
        raise ValueError("matrix-form pipelines need an initial state and a success state")
    first = np.asarray(stages[0], dtype=float)
    size = first.shape[0]
    if np.isscalar(initial) or getattr(initial, "ndim", None) == 0:
        idx = int(initial)
        dist = np.zeros(size)
        dist[idx] = 1.0
    else:
        dist = np.asarray(initial, dtype=float)
    final = markov_distribution(stages, dist)
    return float(final[int(success_state)])


# --------------------------------------------------------------------------
# compound loss aggregation
# --------------------------------------------------------------------------


def aggregate_loss(
    frequency: UncertainQuantity,
    severity: UncertainQuantity,
    stream: RandomStream,
    n: int,
    *,
    unit: HarmUnit = HarmUnit.MONETARY_LOSS,
) -> RiskProfile:
    """Loss-distribution aggregation: per trial, draw an event count and sum
    that many severity draws.

    The frequency quantity must yield non-negative integer counts (a point
    count or a poisson rate).
    """
    if n < 1:
        raise ValueError(f"trial count must be >= 1, got {n}")
    frequency.check_valid()
    severity.check_valid()
    if frequency.kind is QuantityKind.POINT:
        count_value = frequency.params[0]
        if count_value < 0 or not float(count_value).is_integer():
            raise InvalidParameterError(f"point event count must be a non-negative integer, got {count_value!r}")
        counts = np.full(n, int(count_value), dtype=np.int64)
        trunc_freq = 0
    elif frequency.kind is QuantityKind.POISSON:
        drawn = sample(frequency, stream, n, variable=0)
        counts = drawn.values.astype(np.int64)
        trunc_freq = drawn.truncated
    else:
        raise InvalidParameterError(f"frequency must be a point count or poisson, got {frequency.kind.value}")

    total = int(counts.sum())
    losses = np.zeros(n)
    if total > 0:
        draws = sample(severity, stream, total, variable=1)
        bounds = np.concatenate(([0], np.cumsum(counts)))
        sums = np.add.reduceat(np.concatenate((draws.values, [0.0])), bounds[:-1])
        # reduceat yields the next segment's first element for empty segments
        losses = np.where(counts > 0, sums, 0.0)
        trunc_sev = draws.truncated
    else:
        trunc_sev = 0
    curve = exceedance_curve(losses)
    truncated = {"frequency": trunc_freq, "severity": trunc_sev}
    return RiskProfile(losses, summarize(losses), curve=curve, unit=unit, truncated=truncated)
