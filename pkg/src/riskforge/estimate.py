"""Semi-quantitative estimation: FMECA criticality, likelihood chains,
HSL/LL banding with the risk-level matrix, expert pooling, calibration
weights, and capability-score mapping.

Band boundaries and the 9x6 risk-level matrix ship as JSON data
(``data/bands.json``) and can be overridden with a file of the same schema;
tables are fully validated at load time.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Mapping, Sequence

from .errors import BandTableError, UnknownUnitError, WeightSumError, ZeroWeightPanelError
from .model import FmecaRow, HarmUnit, Probability, QuantityKind, UncertainQuantity

WEIGHT_SUM_TOL = 1e-9

LIKELIHOOD_LEVELS = tuple(f"LL-{i}" for i in range(9))
SEVERITY_LEVELS = tuple(f"HSL-{i}" for i in range(1, 7))
RISK_LEVELS = tuple(f"RL-{i}" for i in range(1, 11))


# --------------------------------------------------------------------------
# FMECA
# --------------------------------------------------------------------------


def rpn(severity: int, occurrence: int, detection: int) -> int:
    """Risk Priority Number: severity x occurrence x detection, each 1-10."""
    for label, score in (("severity", severity), ("occurrence", occurrence), ("detection", detection)):
        if not isinstance(score, int) or not 1 <= score <= 10:
            raise ValueError(f"{label} score must be an integer in 1..10, got {score!r}")
    return severity * occurrence * detection


def rank_failure_modes(rows: Sequence[FmecaRow]) -> list[FmecaRow]:
    """Rows by descending RPN; ties by severity descending, then id."""
    return sorted(rows, key=lambda r: (-rpn(r.severity, r.occurrence, r.detection), -r.severity, r.id))


# --------------------------------------------------------------------------
# likelihood chain
# --------------------------------------------------------------------------


def likelihood_chain(
    p_capability: float,
    p_misuse_given_capability: float,
    p_harm_given_misuse: float,
) -> Probability:
    """P(harmful scenario) as the product of the three chain factors."""
    factors = (p_capability, p_misuse_given_capability, p_harm_given_misuse)
    for p in factors:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"chain factor out of range: {p!r}")
    return Probability(factors[0] * factors[1] * factors[2])


# --------------------------------------------------------------------------
# band tables
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Band:
    """A half-open [lower, upper) cell; ``upper`` None means +infinity.

    The last likelihood band closes at 1.0 inclusive so the nine bands
    partition [0, 1] exactly.
    """

    level: str
    lower: float
    upper: float | None

    def contains(self, x: float, *, last: bool) -> bool:
        if self.upper is None:
            return x >= self.lower
        if last:
            return self.lower <= x <= self.upper
        return self.lower <= x < self.upper


@dataclass(frozen=True)
class BandTable:
    likelihood: tuple[Band, ...]
    severity: dict[HarmUnit, tuple[Band, ...]]
    risk_matrix: tuple[tuple[int, ...], ...]


def _parse_bands(raw, expected_levels, *, first_lower: float, last_upper: float | None, where: str) -> tuple[Band, ...]:
    bands = tuple(Band(b["level"], float(b["lower"]), None if b["upper"] is None else float(b["upper"])) for b in raw)
    if tuple(b.level for b in bands) != tuple(expected_levels):
        raise BandTableError(f"{where}: levels must be {', '.join(expected_levels)} in order")
    if bands[0].lower != first_lower:
        raise BandTableError(f"{where}: first band must start at {first_lower}")
    if bands[-1].upper != last_upper:
        raise BandTableError(f"{where}: last band must end at {last_upper}")
    for prev, cur in zip(bands, bands[1:]):
        if prev.upper != cur.lower:
            raise BandTableError(f"{where}: bands must be contiguous ({prev.level} ends {prev.upper}, {cur.level} starts {cur.lower})")
        if prev.upper is not None and prev.upper <= prev.lower:
            raise BandTableError(f"{where}: {prev.level} is empty")
    return bands


def _parse_table(data) -> BandTable:
    likelihood = _parse_bands(data["likelihood"], LIKELIHOOD_LEVELS, first_lower=0.0, last_upper=1.0, where="likelihood")
    severity: dict[HarmUnit, tuple[Band, ...]] = {}
    for unit in HarmUnit:
        if unit.value not in data["severity"]:
            raise BandTableError(f"severity: missing unit {unit.value}")
        severity[unit] = _parse_bands(
            data["severity"][unit.value], SEVERITY_LEVELS, first_lower=0.0, last_upper=None, where=f"severity[{unit.value}]"
        )
    matrix = tuple(tuple(int(v) for v in row) for row in data["risk_matrix"])
    if len(matrix) != 9 or any(len(row) != 6 for row in matrix):
        raise BandTableError("risk_matrix must be 9 rows (LL-0..LL-8) of 6 cells (HSL-1..HSL-6)")
    for row in matrix:
        for v in row:
            if not 1 <= v <= 10:
                raise BandTableError(f"risk_matrix entry {v} outside 1..10")
    for i in range(9):
        for j in range(6):
            if i + 1 < 9 and matrix[i + 1][j] < matrix[i][j]:
                raise BandTableError(f"risk_matrix not monotone in likelihood at ({i},{j})")
            if j + 1 < 6 and matrix[i][j + 1] < matrix[i][j]:
                raise BandTableError(f"risk_matrix not monotone in severity at ({i},{j})")
    return BandTable(likelihood, severity, matrix)


@lru_cache(maxsize=1)
def default_band_table() -> BandTable:
    data = json.loads(resources.files("riskforge").joinpath("data/bands.json").read_text("utf-8"))
    return _parse_table(data)


def load_band_table(path: str | None = None) -> BandTable:
    """The shipped band table, or one loaded (and validated) from ``path``."""
    if path is None:
        return default_band_table()
    with open(path, encoding="utf-8") as fh:
        return _parse_table(json.load(fh))


def band_likelihood(p: float, table: BandTable | None = None) -> str:
    """The LL level whose half-open cell contains p (boundaries go up)."""
    if math.isnan(p) or not 0.0 <= p <= 1.0:
        raise ValueError(f"probability out of range: {p!r}")
    table = table or default_band_table()
    bands = table.likelihood
    for i, band in enumerate(bands):
        if band.contains(p, last=i == len(bands) - 1):
            return band.level
    raise BandTableError(f"no likelihood band contains {p!r}")  # unreachable for a valid table


def band_severity(magnitude: float, unit: HarmUnit | str, table: BandTable | None = None) -> str:
    """The HSL level for a severity magnitude in the given harm unit."""
    if math.isnan(magnitude) or magnitude < 0:
        raise ValueError(f"severity must be non-negative: {magnitude!r}")
    table = table or default_band_table()
    try:
        unit = HarmUnit(unit)
    except ValueError:
        raise UnknownUnitError(f"unknown harm unit {unit!r}") from None
    bands = table.severity[unit]
    for i, band in enumerate(bands):
        if band.contains(magnitude, last=i == len(bands) - 1):
            return band.level
    raise BandTableError(f"no severity band contains {magnitude!r}")  # unreachable for a valid table


def matrix_cell(likelihood_level: str, severity_level: str, table: BandTable | None = None) -> str:
    """Risk level (RL-1..RL-10) from the shipped 9x6 matrix."""
    table = table or default_band_table()
    if likelihood_level not in LIKELIHOOD_LEVELS:
        raise ValueError(f"unknown likelihood level {likelihood_level!r}")
    if severity_level not in SEVERITY_LEVELS:
        raise ValueError(f"unknown severity level {severity_level!r}")
    ll = LIKELIHOOD_LEVELS.index(likelihood_level)
    hsl = SEVERITY_LEVELS.index(severity_level)
    return f"RL-{table.risk_matrix[ll][hsl]}"


# --------------------------------------------------------------------------
# expert pooling and calibration
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ExpertEstimate:
    expert: str
    quantity: UncertainQuantity
    weight: float | None = None

    def __post_init__(self) -> None:
        if self.weight is not None and self.weight < 0:
            raise ValueError(f"expert weight must be non-negative: {self.weight!r}")


def pool_experts(
    estimates: Sequence[ExpertEstimate],
    weights: Sequence[float] | None = None,
) -> UncertainQuantity:
    """Linear opinion pool of the experts' distributions.

    Explicit ``weights`` win over per-estimate weights; the default is equal
    weighting. Point estimates pool to their weighted mean; identical
    estimates pool to themselves; anything else yields a mixture quantity.
    """
    estimates = list(estimates)
    if not estimates:
        raise ValueError("cannot pool an empty expert panel")
    k = len(estimates)
    if weights is None:
        if any(e.weight is not None for e in estimates):
            if any(e.weight is None for e in estimates):
                raise WeightSumError("either every estimate carries a weight or none does")
            w = [float(e.weight) for e in estimates]
        else:
            w = [1.0 / k] * k
    else:
        w = [float(x) for x in weights]
    if len(w) != k:
        raise WeightSumError(f"{k} estimates but {len(w)} weights")
    if any(x < 0 for x in w):
        raise WeightSumError("weights must be non-negative")
    if abs(sum(w) - 1.0) > WEIGHT_SUM_TOL:
        raise WeightSumError(f"weights sum to {sum(w)!r}, not 1")

    quantities = [e.quantity for e in estimates]
    first = quantities[0]
    if all(q == first for q in quantities[1:]):
        return first
    role = first.role
    if all(q.kind is QuantityKind.POINT for q in quantities):
        pooled = sum(wi * q.params[0] for wi, q in zip(w, quantities))
        return UncertainQuantity.point(pooled, role=role, provenance="pooled")
    return UncertainQuantity.mixture(quantities, w, role=role, provenance="pooled")


def brier_score(answers: Sequence[float], truths: Sequence[bool]) -> float:
    """Mean squared error of probability forecasts against binary outcomes."""
    if len(answers) != len(truths):
        raise ValueError("one answer per question is required")
    if not answers:
        raise ValueError("at least one question is required")
    total = 0.0
    for p, truth in zip(answers, truths):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"forecast probability out of range: {p!r}")
        total += (p - (1.0 if truth else 0.0)) ** 2
    return total / len(answers)


def calibration_weights(
    answers: Mapping[str, Sequence[float]],
    truths: Sequence[bool],
) -> dict[str, float]:
    """Normalized panel weights from Brier scores on seed questions.

    Each expert's raw weight is the squared skill above a chance-level
    forecaster, max(0, 1 - 2B)^2, where B is the expert's Brier score: a
    perfect record (B=0) gets the maximum raw weight 1, a coin-flip record
    (B=1/4) keeps weight 1/4, and anything at or past B=1/2 drops to zero.
    """
    if not answers:
        raise ValueError("at least one expert is required")
    raw: dict[str, float] = {}
    for expert, forecast in answers.items():
        b = brier_score(forecast, truths)
        raw[expert] = max(0.0, 1.0 - 2.0 * b) ** 2
    total = sum(raw.values())
    if total <= 0.0:
        raise ZeroWeightPanelError(
            "every expert scored zero calibration weight; choose equal weights explicitly if pooling must proceed"
        )
    return {expert: value / total for expert, value in raw.items()}


# --------------------------------------------------------------------------
# capability-score mapping
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CapabilityMapping:
    """Anchor points mapping benchmark scores to step probabilities."""

    anchors: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        anchors = tuple((float(s), float(p)) for s, p in self.anchors)
        object.__setattr__(self, "anchors", anchors)
        if len(anchors) < 2:
            raise ValueError("capability mapping needs at least two anchors")
        prev_s, prev_p = None, None
        for s, p in anchors:
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"anchor probability out of range: {p!r}")
            if prev_s is not None and s <= prev_s:
                raise ValueError(f"anchor scores must strictly increase ({prev_s!r} then {s!r})")
            if prev_p is not None and p < prev_p:
                raise ValueError(f"anchor probabilities must be non-decreasing ({prev_p!r} then {p!r})")
            prev_s, prev_p = s, p


def capability_to_step_probability(mapping: CapabilityMapping, score: float) -> Probability:
    """Monotone piecewise-linear interpolation, clamped outside the anchors."""
    anchors = mapping.anchors
    if score <= anchors[0][0]:
        return Probability(anchors[0][1])
    if score >= anchors[-1][0]:
        return Probability(anchors[-1][1])
    for (s0, p0), (s1, p1) in zip(anchors, anchors[1:]):
        if s0 <= score <= s1:
            t = (score - s0) / (s1 - s0)
            return Probability(p0 + t * (p1 - p0))
    raise ValueError(f"score {score!r} not covered by mapping")  # unreachable
