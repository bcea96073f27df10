"""Recursive descent parser for .rsk documents.

Fail-fast: the first syntax violation raises :class:`ParseError` with the
offending line/column and an expected-token hint. Semantic violations (bad
probability ranges, CPT sums, unresolved references) are left for
:func:`riskforge.validation.validate` to report.
"""

from __future__ import annotations

from ..errors import ParseError, SourceSpan
from ..model import (
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
    QuantityRole,
    ScenarioModel,
    Severity,
    ToleranceCurve,
    UncertainQuantity,
    ValueKind,
)
from .lexer import Token, TokenType, tokenize

_BLOCK_KEYWORDS = ("hazard", "ftree", "etree", "bowtie", "fmeca", "bnet", "tolerance", "kri", "dsa")

_DIST_ARITY = {
    "interval": 2,
    "beta": 2,
    "lognormal": 2,
    "triangular": 3,
    "poisson": 1,
    # empirical takes any positive number of samples
}

_UNIT_NAMES = tuple(u.value for u in HarmUnit)

_COMPARATORS = ("<=", "<", ">=", ">")


def parse(text: str, file: str = "<input>") -> ScenarioModel:
    """Parse a UTF-8 document into a ScenarioModel.

    Every entity carries the SourceSpan of its introducing keyword for
    diagnostics. The returned model may still have validation findings.
    """
    if text.startswith("﻿"):
        raise ParseError(SourceSpan(file, 1, 1), "byte order mark not allowed; documents are UTF-8 without BOM")
    return _Parser(tokenize(text, file), file).document()


class _Parser:
    def __init__(self, tokens: list[Token], file: str):
        self.tokens = tokens
        self.file = file
        self.pos = 0

    # -- token plumbing ----------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.type is not TokenType.EOF:
            self.pos += 1
        return tok

    def error(self, message: str, expected: tuple[str, ...] = (), tok: Token | None = None) -> ParseError:
        tok = tok or self.peek()
        return ParseError(tok.span(self.file), message, expected)

    def at_keyword(self, *words: str) -> bool:
        tok = self.peek()
        return tok.type is TokenType.IDENT and tok.text in words

    def expect_keyword(self, *words: str) -> Token:
        if not self.at_keyword(*words):
            raise self.error(f"unexpected {self._describe(self.peek())}", expected=words)
        return self.advance()

    def expect_ident(self, what: str = "identifier") -> Token:
        tok = self.peek()
        if tok.type is not TokenType.IDENT:
            raise self.error(f"unexpected {self._describe(tok)}", expected=(what,))
        return self.advance()

    def expect_punct(self, sym: str) -> Token:
        tok = self.peek()
        if tok.type is not TokenType.PUNCT or tok.text != sym:
            raise self.error(f"unexpected {self._describe(tok)}", expected=(f"'{sym}'",))
        return self.advance()

    def at_punct(self, *syms: str) -> bool:
        tok = self.peek()
        return tok.type is TokenType.PUNCT and tok.text in syms

    def expect_number(self) -> float:
        tok = self.peek()
        if tok.type is not TokenType.NUMBER:
            raise self.error(f"unexpected {self._describe(tok)}", expected=("number",))
        self.advance()
        return float(tok.text)

    def expect_integer(self, what: str) -> int:
        tok = self.peek()
        value = self.expect_number()
        if not value.is_integer():
            raise self.error(f"{what} must be an integer, got {tok.text}", tok=tok)
        return int(value)

    def optional_string(self) -> str:
        if self.peek().type is TokenType.STRING:
            return self.advance().text
        return ""

    @staticmethod
    def _describe(tok: Token) -> str:
        if tok.type is TokenType.EOF:
            return "end of input"
        return f"{tok.type.value} {tok.text!r}"

    # -- grammar ------------------------------------------------------------

    def document(self) -> ScenarioModel:
        hazards, ftrees, etrees, bowties = [], [], [], []
        fmecas, bnets, tolerances, kris, dsas = [], [], [], [], []
        while self.peek().type is not TokenType.EOF:
            tok = self.peek()
            if not self.at_keyword(*_BLOCK_KEYWORDS):
                raise self.error(f"unexpected {self._describe(tok)}", expected=_BLOCK_KEYWORDS)
            word = tok.text
            if word == "hazard":
                hazards.append(self.hazard())
            elif word == "ftree":
                ftrees.append(self.ftree())
            elif word == "etree":
                etrees.append(self.etree())
            elif word == "bowtie":
                bowties.append(self.bowtie())
            elif word == "fmeca":
                fmecas.append(self.fmeca())
            elif word == "bnet":
                bnets.append(self.bnet())
            elif word == "tolerance":
                tolerances.append(self.tolerance())
            elif word == "kri":
                kris.append(self.kri())
            else:
                dsas.append(self.dsa())
        return ScenarioModel(
            hazards=tuple(hazards),
            fault_trees=tuple(ftrees),
            event_trees=tuple(etrees),
            bow_ties=tuple(bowties),
            fmeca_worksheets=tuple(fmecas),
            bayes_nets=tuple(bnets),
            tolerance_curves=tuple(tolerances),
            kri_definitions=tuple(kris),
            dsa_checks=tuple(dsas),
        )

    def hazard(self) -> Hazard:
        span = self.expect_keyword("hazard").span(self.file)
        name = self.expect_ident().text
        return Hazard(name, self.optional_string(), span=span)

    # fault trees -----------------------------------------------------------

    def ftree(self) -> FaultTree:
        span = self.expect_keyword("ftree").span(self.file)
        name = self.expect_ident().text
        return FaultTree(name, self.gate(), span=span)

    def gate(self) -> Gate:
        tok = self.expect_keyword("and", "or")
        op = GateOp.AND if tok.text == "and" else GateOp.OR
        self.expect_punct("{")
        children: list[Gate | BasicEvent] = []
        while not self.at_punct("}"):
            if self.at_keyword("and", "or"):
                children.append(self.gate())
            elif self.at_keyword("event"):
                span = self.advance().span(self.file)
                name = self.expect_ident().text
                children.append(BasicEvent(name, self.quantity(QuantityRole.PROBABILITY), span=span))
            else:
                raise self.error(f"unexpected {self._describe(self.peek())}", expected=("and", "or", "event", "'}'"))
        if not children:
            raise self.error("gate must have at least one child", expected=("and", "or", "event"), tok=self.peek())
        self.expect_punct("}")
        return Gate(op, tuple(children), span=tok.span(self.file))

    def quantity(self, role: QuantityRole) -> UncertainQuantity:
        """prob := "p=" NUMBER | "~" NAME "(" NUMBER ("," NUMBER)* ")"."""
        if self.at_keyword("p"):
            tok = self.advance()
            self.expect_punct("=")
            value = self.expect_number()
            return UncertainQuantity.point(value, role=role, span=tok.span(self.file))
        if self.at_punct("~"):
            tilde = self.advance()
            name_tok = self.expect_ident("distribution name")
            name = name_tok.text
            self.expect_punct("(")
            args = [self.expect_number()]
            while self.at_punct(","):
                self.advance()
                args.append(self.expect_number())
            self.expect_punct(")")
            span = tilde.span(self.file)
            if name == "empirical":
                return UncertainQuantity.empirical(args, role=role, span=span)
            arity = _DIST_ARITY.get(name)
            if arity is None:
                raise self.error(
                    f"unknown distribution {name!r}",
                    expected=tuple(sorted(_DIST_ARITY)) + ("empirical",),
                    tok=name_tok,
                )
            if len(args) != arity:
                raise self.error(f"{name} takes {arity} parameters, got {len(args)}", tok=name_tok)
            ctor = getattr(UncertainQuantity, name)
            return ctor(*args, role=role, span=span)
        raise self.error(f"unexpected {self._describe(self.peek())}", expected=("p=", "~"))

    # event trees ------------------------------------------------------------

    def etree(self) -> EventTree:
        span = self.expect_keyword("etree").span(self.file)
        name = self.expect_ident().text
        self.expect_keyword("init")
        if self.at_keyword("freq"):
            self.advance()
            self.expect_punct("=")
            value = self.expect_number()
            self.expect_punct("/")
            self.expect_keyword("yr")
            initiating = UncertainQuantity.point(value, role=QuantityRole.FREQUENCY)
            kind = ValueKind.FREQUENCY
        else:
            initiating = self.quantity(QuantityRole.PROBABILITY)
            kind = ValueKind.PROBABILITY
        root = self.branch()
        return EventTree(name, initiating, kind, root, span=span)

    def branch(self) -> Branch:
        span = self.expect_keyword("branch").span(self.file)
        name = self.expect_ident().text
        prob = self.quantity(QuantityRole.PROBABILITY)
        self.expect_punct("{")
        on_success = self.branch_child()
        on_failure = self.branch_child()
        self.expect_punct("}")
        return Branch(name, prob, on_success, on_failure, span=span)

    def branch_child(self) -> Branch | Outcome:
        if self.at_keyword("branch"):
            return self.branch()
        if self.at_keyword("outcome"):
            span = self.advance().span(self.file)
            name = self.expect_ident().text
            self.expect_keyword("severity")
            self.expect_punct("=")
            magnitude = self.expect_number()
            unit_tok = self.expect_ident("harm unit")
            if unit_tok.text not in _UNIT_NAMES:
                raise self.error(f"unknown harm unit {unit_tok.text!r}", expected=_UNIT_NAMES, tok=unit_tok)
            if magnitude < 0:
                raise self.error(f"severity must be non-negative, got {magnitude!r}", tok=unit_tok)
            return Outcome(name, Severity(magnitude, HarmUnit(unit_tok.text)), span=span)
        raise self.error(f"unexpected {self._describe(self.peek())}", expected=("branch", "outcome"))

    # bow-ties ----------------------------------------------------------------

    def bowtie(self) -> BowTie:
        span = self.expect_keyword("bowtie").span(self.file)
        name = self.expect_ident().text
        self.expect_keyword("critical")
        critical = self.expect_ident().text
        self.expect_keyword("left")
        left = self.expect_ident().text
        self.expect_keyword("right")
        right = self.expect_ident().text
        return BowTie(name, critical, left, right, span=span)

    # FMECA ---------------------------------------------------------------------

    def fmeca(self) -> FmecaWorksheet:
        span = self.expect_keyword("fmeca").span(self.file)
        name = self.expect_ident().text
        self.expect_punct("{")
        rows: list[FmecaRow] = []
        while not self.at_punct("}"):
            row_span = self.expect_keyword("mode").span(self.file)
            mode = self.expect_ident().text
            self.expect_keyword("sev")
            sev = self.expect_integer("sev score")
            self.expect_keyword("occ")
            occ = self.expect_integer("occ score")
            self.expect_keyword("det")
            det = self.expect_integer("det score")
            rows.append(FmecaRow(mode, sev, occ, det, self.optional_string(), span=row_span))
        self.expect_punct("}")
        if not rows:
            raise self.error("fmeca worksheet must declare at least one mode", expected=("mode",))
        return FmecaWorksheet(name, tuple(rows), span=span)

    # Bayesian networks ----------------------------------------------------------

    def bnet(self) -> BayesNet:
        span = self.expect_keyword("bnet").span(self.file)
        name = self.expect_ident().text
        self.expect_punct("{")
        nodes: list[BayesNode] = []
        while not self.at_punct("}"):
            nodes.append(self.bnet_node())
        self.expect_punct("}")
        if not nodes:
            raise self.error("bnet must declare at least one node", expected=("node",))
        return BayesNet(name, tuple(nodes), span=span)

    def bnet_node(self) -> BayesNode:
        span = self.expect_keyword("node").span(self.file)
        name = self.expect_ident().text
        self.expect_punct("{")
        self.expect_keyword("states")
        states = [self.expect_ident("state name").text]
        while self.peek().type is TokenType.IDENT and not self.at_keyword("parents", "cpt"):
            states.append(self.advance().text)
        parents: list[str] = []
        if self.at_keyword("parents"):
            self.advance()
            parents.append(self.expect_ident("parent id").text)
            while self.peek().type is TokenType.IDENT and not self.at_keyword("cpt"):
                parents.append(self.advance().text)
        self.expect_keyword("cpt")
        self.expect_punct("{")
        rows: list[CptRow] = []
        if not parents:
            row_tok = self.peek()
            values = [self.expect_number()]
            while self.peek().type is TokenType.NUMBER:
                values.append(self.expect_number())
            rows.append(CptRow((), tuple(values), span=row_tok.span(self.file)))
        else:
            while not self.at_punct("}"):
                row_tok = self.peek()
                key = [self.expect_ident("parent state").text]
                while not self.at_punct(":"):
                    key.append(self.expect_ident("parent state").text)
                self.expect_punct(":")
                values = [self.expect_number()]
                while self.peek().type is TokenType.NUMBER:
                    values.append(self.expect_number())
                rows.append(CptRow(tuple(key), tuple(values), span=row_tok.span(self.file)))
        self.expect_punct("}")
        self.expect_punct("}")
        return BayesNode(name, tuple(states), tuple(parents), tuple(rows), span=span)

    # tolerance curves -------------------------------------------------------------

    def tolerance(self) -> ToleranceCurve:
        span = self.expect_keyword("tolerance").span(self.file)
        name = self.expect_ident().text
        self.expect_keyword("unit")
        unit_tok = self.expect_ident("harm unit")
        if unit_tok.text not in _UNIT_NAMES:
            raise self.error(f"unknown harm unit {unit_tok.text!r}", expected=_UNIT_NAMES, tok=unit_tok)
        self.expect_punct("{")
        points: list[tuple[float, float]] = []
        while not self.at_punct("}"):
            self.expect_keyword("point")
            severity = self.expect_number()
            points.append((severity, self.expect_number()))
        self.expect_punct("}")
        if not points:
            raise self.error("tolerance curve must declare at least one point", expected=("point",))
        return ToleranceCurve(name, HarmUnit(unit_tok.text), tuple(points), span=span)

    # KRIs ----------------------------------------------------------------------------

    def kri(self) -> KriDefinition:
        span = self.expect_keyword("kri").span(self.file)
        name = self.expect_ident().text
        self.expect_keyword("threshold")
        threshold = self.expect_number()
        direction_tok = self.expect_keyword("above", "below")
        direction = KriDirection(direction_tok.text)
        return KriDefinition(name, threshold, direction, self.optional_string(), span=span)

    # design-basis checks -----------------------------------------------------------------

    def dsa(self) -> DesignBasisCheck:
        span = self.expect_keyword("dsa").span(self.file)
        name = self.expect_ident().text
        self.expect_keyword("scenario")
        scenario = self.expect_ident().text
        self.expect_punct("{")
        overrides: list[Override] = []
        while self.at_keyword("set", "fail"):
            tok = self.advance()
            target = self.expect_ident().text
            if tok.text == "set":
                self.expect_keyword("p")
                self.expect_punct("=")
                value = self.expect_number()
                overrides.append(Override(OverrideKind.SET_PROBABILITY, target, value, span=tok.span(self.file)))
            else:
                overrides.append(Override(OverrideKind.FORCE_FAILURE, target, span=tok.span(self.file)))
        self.expect_keyword("require")
        metric_tok = self.expect_keyword("top", "outcome", "severity")
        outcome_id = None
        if metric_tok.text == "top":
            metric = MetricKind.TOP_PROBABILITY
        elif metric_tok.text == "severity":
            metric = MetricKind.MAX_SEVERITY
        else:
            metric = MetricKind.OUTCOME_FREQUENCY
            if self.peek().type is TokenType.IDENT:
                outcome_id = self.advance().text
        cmp_tok = self.peek()
        if cmp_tok.type is not TokenType.PUNCT or cmp_tok.text not in _COMPARATORS:
            raise self.error(f"unexpected {self._describe(cmp_tok)}", expected=_COMPARATORS)
        self.advance()
        limit = self.expect_number()
        self.expect_punct("}")
        return DesignBasisCheck(name, scenario, tuple(overrides), Criterion(metric, cmp_tok.text, limit, outcome_id), span=span)
