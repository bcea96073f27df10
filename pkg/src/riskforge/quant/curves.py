"""Exceedance (risk) curves and curve families.

A curve is a right-continuous step function given by (severity, exceedance)
points with strictly increasing severities and non-increasing exceedance
probabilities; evaluation at any severity takes the value of the last point
at or below it (the first point's value below the curve's range).
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import WeightSumError

WEIGHT_SUM_TOL = 1e-9


def step_value(points: Sequence[tuple[float, float]], x: float) -> float:
    """Right-continuous step evaluation of (severity, value) points at x."""
    severities = [s for s, _ in points]
    i = bisect_right(severities, x)
    return points[max(i - 1, 0)][1]


@dataclass(frozen=True)
class RiskCurve:
    """P(severity >= x) sampled at each distinct severity."""

    points: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        pts = tuple((float(s), float(p)) for s, p in self.points)
        object.__setattr__(self, "points", pts)
        if not pts:
            raise ValueError("risk curve must have at least one point")
        prev_s, prev_p = None, None
        for s, p in pts:
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"exceedance probability {p!r} outside [0,1]")
            if prev_s is not None and s <= prev_s:
                raise ValueError(f"severities must strictly increase ({prev_s!r} then {s!r})")
            if prev_p is not None and p > prev_p:
                raise ValueError(f"exceedance must be non-increasing ({prev_p!r} then {p!r})")
            prev_s, prev_p = s, p

    def severities(self) -> tuple[float, ...]:
        return tuple(s for s, _ in self.points)

    def exceedance_at(self, x: float) -> float:
        return step_value(self.points, x)


def exceedance_curve(samples, weights=None) -> RiskCurve:
    """Empirical exceedance curve from severity samples.

    Unweighted samples count 1/n each; ``weights`` supplies probability
    weights instead (pairs of equal severities are merged either way).
    """
    values = np.asarray(samples, dtype=float)
    if values.size == 0:
        raise ValueError("exceedance curve needs at least one sample")
    if weights is None:
        w = np.full(values.size, 1.0 / values.size)
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != values.shape:
            raise ValueError("weights must match samples one-to-one")
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
    order = np.argsort(values, kind="stable")
    values = values[order]
    w = w[order]
    distinct, start_idx = np.unique(values, return_index=True)
    group_w = np.add.reduceat(w, start_idx)
    # tail mass at s_i = sum of group weights from i on; clipped into [0, 1]
    tail = np.cumsum(group_w[::-1])[::-1]
    tail = np.clip(tail, 0.0, 1.0)
    return RiskCurve(tuple(zip(distinct.tolist(), tail.tolist())))


@dataclass(frozen=True)
class RiskCurveFamily:
    """Labeled member curves with their pooled curve and pointwise envelopes."""

    members: tuple[tuple[str, RiskCurve], ...]
    pooled: RiskCurve
    lower: RiskCurve
    upper: RiskCurve


def curve_family(
    members: Sequence[tuple[str, RiskCurve]],
    weights: Sequence[float] | None = None,
) -> RiskCurveFamily:
    """Linear pool of member curves on the union severity grid.

    The pooled value at each grid severity is the weighted average of the
    members' step-interpolated exceedances; envelopes are the pointwise
    min/max. Weights must sum to 1 within 1e-9 (default: equal).
    """
    members = tuple(members)
    if not members:
        raise ValueError("curve family needs at least one member")
    k = len(members)
    if weights is None:
        w = [1.0 / k] * k
    else:
        w = [float(x) for x in weights]
        if len(w) != k:
            raise WeightSumError(f"{k} members but {len(w)} weights")
        if abs(sum(w) - 1.0) > WEIGHT_SUM_TOL:
            raise WeightSumError(f"weights sum to {sum(w)!r}, not 1")
        if any(x < 0 for x in w):
            raise WeightSumError("weights must be non-negative")
    grid = sorted({s for _, curve in members for s in curve.severities()})
    pooled_pts, lower_pts, upper_pts = [], [], []
    for s in grid:
        vals = [curve.exceedance_at(s) for _, curve in members]
        pooled_pts.append((s, float(sum(wi * v for wi, v in zip(w, vals)))))
        lower_pts.append((s, min(vals)))
        upper_pts.append((s, max(vals)))
    return RiskCurveFamily(
        members=members,
        pooled=RiskCurve(tuple(pooled_pts)),
        lower=RiskCurve(tuple(lower_pts)),
        upper=RiskCurve(tuple(upper_pts)),
    )
