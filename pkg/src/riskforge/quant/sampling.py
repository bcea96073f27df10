"""Seeded sampling of uncertain quantities and Gaussian-copula joint draws."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.special import ndtr

from ..errors import InvalidParameterError, NotPositiveSemidefiniteError
from ..model import QuantityRole, UncertainQuantity
from .rng import RandomStream, chunked_normals, chunked_uniforms

# Escalating diagonal jitter applied before declaring a matrix non-PSD.
_JITTERS = (0.0, 1e-12, 1e-10, 1e-8)


@dataclass(frozen=True)
class SampleResult:
    """Draws plus the number of values truncated into [0, 1]."""

    values: np.ndarray
    truncated: int


def _truncate_probability(values: np.ndarray, role: QuantityRole) -> tuple[np.ndarray, int]:
    if role is not QuantityRole.PROBABILITY:
        return values, 0
    outside = int(np.count_nonzero((values < 0.0) | (values > 1.0)))
    if outside:
        values = np.clip(values, 0.0, 1.0)
    return values, outside


def sample(q: UncertainQuantity, stream: RandomStream, n: int, *, variable: int = 0) -> SampleResult:
    """n deterministic draws from ``q``.

    Probability-typed quantities are truncated to [0, 1]; the truncation
    count is reported on the result. Point quantities consume no randomness.
    """
    if n < 1:
        raise ValueError(f"sample count must be >= 1, got {n}")
    q.check_valid()
    if q.kind.value == "point":
        values = np.full(n, q.params[0])
    else:
        u = chunked_uniforms(stream, variable, n)
        values = q.transform(u)
    values, truncated = _truncate_probability(values, q.role)
    return SampleResult(values, truncated)


@dataclass(frozen=True)
class CorrelationSpec:
    """Pairwise correlations between named variables.

    The matrix must be symmetric with unit diagonal and positive
    semi-definite; PSD is established by Cholesky success after the diagonal
    jitter rule (up to 1e-8).
    """

    ids: tuple[str, ...]
    matrix: tuple[tuple[float, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "ids", tuple(self.ids))
        object.__setattr__(self, "matrix", tuple(tuple(float(v) for v in row) for row in self.matrix))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.matrix, dtype=float)

    def check_valid(self) -> None:
        k = len(self.ids)
        m = self.as_array()
        if len(set(self.ids)) != k:
            raise ValueError("correlation variable ids must be distinct")
        if m.shape != (k, k):
            raise ValueError(f"correlation matrix shape {m.shape} does not match {k} ids")
        if not np.allclose(m, m.T, atol=1e-12, rtol=0.0):
            raise ValueError("correlation matrix must be symmetric")
        if not np.allclose(np.diag(m), 1.0, atol=1e-12, rtol=0.0):
            raise ValueError("correlation matrix must have a unit diagonal")
        if np.any(np.abs(m) > 1.0 + 1e-12):
            raise ValueError("correlations must lie in [-1, 1]")
        _cholesky_with_jitter(m)  # raises when not PSD


def _cholesky_with_jitter(m: np.ndarray) -> np.ndarray:
    for jitter in _JITTERS:
        try:
            return np.linalg.cholesky(m + jitter * np.eye(len(m)))
        except np.linalg.LinAlgError:
            continue
    raise NotPositiveSemidefiniteError(
        f"correlation matrix is not positive semi-definite (jitter up to {_JITTERS[-1]} tried)"
    )


def _unit_correlation_classes(m: np.ndarray) -> list[int]:
    """Representative index per variable, grouping pairs correlated exactly 1.

    Variables with correlation exactly 1.0 are comonotone and must share
    normal scores; factoring the deduplicated matrix keeps their sampled
    columns identical bit-for-bit while the representatives' matrix stays
    Cholesky-factorable.
    """
    k = len(m)
    rep = list(range(k))

    def find(i: int) -> int:
        while rep[i] != i:
            rep[i] = rep[rep[i]]
            i = rep[i]
        return i

    for i in range(k):
        for j in range(i + 1, k):
            if m[i, j] == 1.0:
                ri, rj = find(i), find(j)
                if ri != rj:
                    rep[max(ri, rj)] = min(ri, rj)
    return [find(i) for i in range(k)]


@dataclass(frozen=True)
class CopulaSample:
    """Joint draws: shared uniforms plus per-variable marginal values."""

    ids: tuple[str, ...]
    uniforms: np.ndarray  # shape (n, len(ids))
    values: dict[str, np.ndarray]
    truncated: dict[str, int]


def copula_sample(
    spec: CorrelationSpec,
    marginals: Mapping[str, UncertainQuantity],
    stream: RandomStream,
    n: int,
    *,
    variable_indices: Sequence[int] | None = None,
) -> CopulaSample:
    """Gaussian copula: correlated normals -> uniforms -> marginal inverse CDFs.

    Marginal distributions are preserved; the dependence structure is
    governed by ``spec``. ``variable_indices`` pins each column's substream
    index (defaults to the column position).
    """
    if n < 1:
        raise ValueError(f"sample count must be >= 1, got {n}")
    spec.check_valid()
    missing = [i for i in spec.ids if i not in marginals]
    if missing:
        raise InvalidParameterError(f"no marginal distribution for: {', '.join(missing)}")
    for vid in spec.ids:
        marginals[vid].check_valid()

    k = len(spec.ids)
    indices = list(variable_indices) if variable_indices is not None else list(range(k))
    if len(indices) != k:
        raise ValueError("variable_indices must match the number of correlation ids")

    m = spec.as_array()
    reps = _unit_correlation_classes(m)
    rep_order = sorted(set(reps))
    sub = m[np.ix_(rep_order, rep_order)]
    chol = _cholesky_with_jitter(sub)

    eps = np.column_stack([chunked_normals(stream, indices[rep_order[j]], n) for j in range(len(rep_order))])
    z_reps = eps @ chol.T
    col_of = {r: j for j, r in enumerate(rep_order)}
    z = np.column_stack([z_reps[:, col_of[reps[i]]] for i in range(k)])

    # ndtr saturates to exactly 1.0 for extreme scores; keep uniforms in
    # [0, 1) so unbounded inverse CDFs stay finite
    uniforms = np.minimum(ndtr(z), np.nextafter(1.0, 0.0))
    values: dict[str, np.ndarray] = {}
    truncated: dict[str, int] = {}
    for i, vid in enumerate(spec.ids):
        q = marginals[vid]
        col = q.transform(uniforms[:, i])
        col, cut = _truncate_probability(col, q.role)
        values[vid] = col
        truncated[vid] = cut
    return CopulaSample(spec.ids, uniforms, values, truncated)
