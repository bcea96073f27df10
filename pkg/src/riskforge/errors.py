"""Exception types shared across the riskforge package."""

from __future__ import annotations

from dataclasses import dataclass


class RiskforgeError(Exception):
    """Base class for all riskforge errors."""


@dataclass(frozen=True)
class SourceSpan:
    """Location of a construct in a source document (1-based line/column)."""

    file: str
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


class ParseError(RiskforgeError):
    """Raised on the first syntax violation while parsing a document.

    Carries the offending location and, when available, the tokens the
    parser would have accepted there.
    """

    def __init__(self, span: SourceSpan, message: str, expected: tuple[str, ...] = ()):
        self.span = span
        self.message = message
        self.expected = expected
        hint = f" (expected {', '.join(expected)})" if expected else ""
        super().__init__(f"{span}: {message}{hint}")


class ModelError(RiskforgeError):
    """A model is structurally unusable for the requested operation."""


class UnresolvedReferenceError(ModelError):
    """An identifier does not resolve to a declared entity."""


class CapExceededError(RiskforgeError):
    """An analysis exceeded a configured size cap."""

    def __init__(self, what: str, size: int, cap: int):
        self.size = size
        self.cap = cap
        super().__init__(f"{what}: size {size} exceeds cap {cap}")


class MissingAssignmentError(RiskforgeError):
    """A basic event has no probability assignment."""


class InvalidParameterError(RiskforgeError):
    """An uncertain quantity has invalid parameters for the operation."""


class NonStochasticMatrixError(RiskforgeError):
    """A transition matrix row does not sum to one (within tolerance)."""


class NotPositiveSemidefiniteError(RiskforgeError):
    """A correlation matrix failed the positive semi-definiteness check."""


class InconsistentEvidenceError(RiskforgeError):
    """Bayesian evidence has probability zero under the network."""


class UnknownNodeError(ModelError):
    """A Bayesian network node id is not declared."""


class UnknownStateError(ModelError):
    """A state is not in the node's declared state list."""


class UnknownUnitError(RiskforgeError):
    """A harm unit is not one of the enumerated units."""


class WeightSumError(RiskforgeError):
    """Pooling weights do not sum to one (within tolerance)."""


class ZeroWeightPanelError(RiskforgeError):
    """Every expert received zero calibration weight.

    Callers must opt into equal weights explicitly in this case.
    """


class BandTableError(RiskforgeError):
    """A band or risk-matrix table failed its load-time validation."""
