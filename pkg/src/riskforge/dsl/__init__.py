"""The ``.rsk`` scenario description language: parsing and serialization.

Documents are UTF-8 without BOM; LF or CRLF line endings are accepted and LF
is emitted. The full grammar reference lives in ``docs/grammar.md``.
"""

from ..errors import ParseError, SourceSpan
from .parser import parse
from .serializer import serialize

__all__ = ["parse", "serialize", "ParseError", "SourceSpan"]
