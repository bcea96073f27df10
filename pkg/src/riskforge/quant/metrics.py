"""Value-at-Risk and Conditional Value-at-Risk on loss samples.

CVaR uses the Rockafellar-Uryasev discrete estimator with fractional weight
on the VaR atom, which is unambiguous on finite samples: with samples sorted
and F the empirical CDF,

    VaR  = smallest sample x with F(x) >= alpha
    CVaR = [ (F(VaR) - alpha) * VaR + sum_{x > VaR} x / n ] / (1 - alpha)

evaluated so that exact-fraction fixtures reproduce exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..model import HarmUnit, Severity


@dataclass(frozen=True)
class LossMetrics:
    """VaR/CVaR at confidence level alpha; cvar >= var always holds."""

    var: Severity
    cvar: Severity
    alpha: float

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if self.cvar.magnitude < self.var.magnitude:
            raise ValueError("cvar must be >= var")


def var_cvar(samples, alpha: float, *, unit: HarmUnit = HarmUnit.ABSTRACT_INDEX) -> LossMetrics:
    """Empirical VaR and CVaR of loss samples at confidence level alpha."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    xs = np.sort(np.asarray(samples, dtype=float))
    n = xs.size
    if n == 0:
        raise ValueError("var_cvar needs at least one sample")
    if xs[0] < 0:
        raise ValueError("loss samples must be non-negative severities")
    k = int(math.ceil(alpha * n - 1e-12))
    var = float(xs[k - 1])
    m = int(np.searchsorted(xs, var, side="right"))  # count of samples <= VaR
    if m == n:
        cvar = var
    else:
        atom_weight = max(0.0, m / n - alpha) * n  # in sample-count units
        tail_sum = float(xs[m:].sum())
        cvar = (atom_weight * var + tail_sum) / (atom_weight + (n - m))
        cvar = max(cvar, var)
    return LossMetrics(Severity(var, unit), Severity(cvar, unit), alpha)
