"""Abstract syntax, parser and printer for PrASP programs and queries.

Statements are ``.``-terminated.  A statement is an optionally weighted
formula (``[0.3] p.``, ``[[0.5]] q(X) :- r(X).``), a domain declaration
(``#domain p(X).``) or, in query text, a query (``[?] f.`` / ``[?|c] f.``).

Connective precedence, loosest first: ``->``, ``|``, ``&``, then the unary
operators ``not``, ``-`` (strong negation, atoms only) and the quantifiers
``![X]:`` / ``?[X]:``.  A quantifier scopes over a single unary formula, so
``![X]: p(X) & q`` reads ``(![X]: p(X)) & q``.  Commas in a rule body are
conjunction.  See ``docs/grammar.md`` for the full grammar.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Union

__all__ = [
    "Var", "Range", "Term",
    "Atom", "Not", "And", "Or", "Implies", "Forall", "Exists",
    "Compare", "CardElement", "Cardinality", "Parity", "Rule", "Formula",
    "WeightedFormula", "DomainDecl", "Program", "Query",
    "ParseError", "parse_program", "parse_query", "parse_queries",
    "parse_formula", "print_formula", "print_term", "print_statement",
    "is_variable",
]


# --------------------------------------------------------------------------
# Terms
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Range:
    """Integer interval ``lo..hi``; only legal inside facts."""
    lo: int
    hi: int

    def __str__(self) -> str:
        return f"{self.lo}..{self.hi}"


# constants are plain ``str``, integers plain ``int``
Term = Union[str, int, Var, Range]


def is_variable(t: Term) -> bool:
    return isinstance(t, Var)


def print_term(t: Term) -> str:
    return str(t)


def term_key(t: Term) -> tuple:
    """Total order on ground terms: integers before symbolic constants."""
    if isinstance(t, bool):
        raise TypeError("bool is not a term")
    if isinstance(t, int):
        return (0, t, "")
    return (1, 0, str(t))


# --------------------------------------------------------------------------
# Formulas
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple = ()
    strong: bool = False  # strong (classical) negation ``-p``

    def __str__(self) -> str:
        return print_formula(self)

    @property
    def key(self) -> str:
        return print_formula(self)


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    args: tuple


@dataclass(frozen=True)
class Or:
    args: tuple


@dataclass(frozen=True)
class Implies:
    antecedent: "Formula"
    consequent: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Compare:
    op: str
    left: Term
    right: Term


@dataclass(frozen=True)
class CardElement:
    literal: Atom
    conditions: tuple = ()


@dataclass(frozen=True)
class Cardinality:
    lower: int | None
    upper: int | None
    elements: tuple


@dataclass(frozen=True)
class Parity:
    """``#even{a1, ..., an}``: true iff an even number of the atoms hold."""
    atoms: tuple


@dataclass(frozen=True)
class Rule:
    head: "Formula | None"  # None: integrity constraint
    body: "Formula | None"  # None: empty body


Formula = Union[Atom, Not, And, Or, Implies, Forall, Exists, Compare,
                Cardinality, Parity, Rule]


@dataclass(frozen=True)
class WeightedFormula:
    formula: Formula
    weight: float | None = None      # None: unannotated, i.e. weight 1
    kind: str = "single"             # "single" ([w]) or "per_instance" ([[w]])

    @property
    def effective_weight(self) -> float:
        return 1.0 if self.weight is None else self.weight

    def __str__(self) -> str:
        return print_statement(self)


@dataclass(frozen=True)
class DomainDecl:
    pred: str
    var: str


@dataclass
class Program:
    statements: list[WeightedFormula] = field(default_factory=list)
    domains: list[DomainDecl] = field(default_factory=list)

    @property
    def ranges(self) -> list[Atom]:
        """Range facts such as ``coin(1..3)``."""
        return [s.formula for s in self.statements
                if isinstance(s.formula, Atom)
                and any(isinstance(a, Range) for a in s.formula.args)]

    def __str__(self) -> str:
        lines = [f"#domain {d.pred}({d.var})." for d in self.domains]
        lines += [print_statement(s) for s in self.statements]
        return "\n".join(lines)


@dataclass(frozen=True)
class Query:
    target: Formula
    condition: Formula | None = None

    def __str__(self) -> str:
        tgt = print_formula(self.target)
        if self.condition is None:
            return f"[?] {tgt}."
        return f"[?|{print_formula(self.condition)}] {tgt}."


# --------------------------------------------------------------------------
# Tokenizer
# --------------------------------------------------------------------------

class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"line {line}, column {col}: {message}")
        self.message = message
        self.line = line
        self.col = col


_TOKEN_SPEC = [
    ("WS", r"[ \t\r\n]+"),
    ("COMMENT", r"%[^\n]*"),
    ("NUMBER", r"\d+(?:\.\d+)?(?:[eE][-+]?\d+)?"),
    ("DIRECTIVE", r"#[a-z]+"),
    ("VAR", r"[A-Z_][A-Za-z0-9_']*"),
    ("ID", r"[a-z][A-Za-z0-9_']*"),
    ("OP", r":-|<-|->|!=|<=|>=|\.\.|\[\[|\]\]|[\[\]\(\)\{\},;:.&|!?<>=\-]"),
]
_TOKEN_RE = re.compile("|".join(f"(?P<{n}>{p})" for n, p in _TOKEN_SPEC))


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}",
                             line, pos - line_start + 1)
        kind, value = m.lastgroup, m.group()
        if kind not in ("WS", "COMMENT"):
            if kind == "ID" and value == "not":
                kind = "NOT"
            tokens.append(Token(kind, value, line, pos - line_start + 1))
        nl = value.count("\n")
        if nl:
            line += nl
            line_start = pos + value.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("EOF", "", line, pos - line_start + 1))
    return tokens


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------

_COMPARE_OPS = ("!=", "<=", ">=", "<", ">", "=")


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    # token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in ("OP", "DIRECTIVE") and t.text in texts

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def fail(self, expected: str) -> ParseError:
        t = self.tok
        found = "end of input" if t.kind == "EOF" else repr(t.text)
        return ParseError(f"expected {expected}, found {found}", t.line, t.col)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.fail(repr(text))
        return self.advance()

    # statements
    def statements(self, allow_queries: bool) -> Iterator[object]:
        while self.tok.kind != "EOF":
            yield self.statement(allow_queries)

    def statement(self, allow_queries: bool):
        if self.at("#domain"):
            self.advance()
            pred = self.ident()
            self.expect("(")
            if self.tok.kind != "VAR":
                raise self.fail("variable")
            var = self.advance().text
            self.expect(")")
            self.expect(".")
            return DomainDecl(pred, var)
        if allow_queries and self.at("[") and self.peek().text == "?":
            return self.query()
        weight, kind = None, "single"
        if self.at("[["):
            self.advance()
            weight, kind = self.weight(), "per_instance"
            self.expect("]]")
        elif self.at("["):
            self.advance()
            weight = self.weight()
            self.expect("]")
        f = self.clause()
        self.expect(".")
        return WeightedFormula(f, weight, kind)

    def weight(self) -> float:
        t = self.tok
        if t.kind != "NUMBER":
            raise self.fail("weight")
        self.advance()
        w = float(t.text)
        if not 0.0 <= w <= 1.0:
            raise ParseError(f"weight {t.text} outside [0,1]", t.line, t.col)
        return w

    def query(self) -> Query:
        self.expect("[")
        self.expect("?")
        cond = None
        if self.at("|"):
            self.advance()
            cond = self.formula()
        elif not self.at("]"):
            raise self.fail("']' or '|' after '[?'")
        self.expect("]")
        target = self.formula()
        self.expect(".")
        return Query(target, cond)

    def clause(self) -> Formula:
        if self.at(":-", "<-"):
            self.advance()
            return Rule(None, self.body())
        head = self.formula()
        if self.at(":-", "<-"):
            self.advance()
            body = None if self.at(".") else self.body()
            return Rule(head, body)
        return head

    def body(self) -> Formula:
        elems = [self.disjunction()]
        while self.at(","):
            self.advance()
            elems.append(self.disjunction())
        return elems[0] if len(elems) == 1 else And(tuple(elems))

    # formulas
    def formula(self) -> Formula:
        left = self.disjunction()
        if self.at("->"):
            self.advance()
            return Implies(left, self.formula())
        return left

    def disjunction(self) -> Formula:
        args = [self.conjunction()]
        while self.at("|"):
            self.advance()
            args.append(self.conjunction())
        return args[0] if len(args) == 1 else Or(tuple(args))

    def conjunction(self) -> Formula:
        args = [self.unary()]
        while self.at("&"):
            self.advance()
            args.append(self.unary())
        return args[0] if len(args) == 1 else And(tuple(args))

    def unary(self) -> Formula:
        t = self.tok
        if t.kind == "NOT":
            self.advance()
            return Not(self.unary())
        if self.at("!", "?") and self.peek().text == "[":
            q = self.advance().text
            self.expect("[")
            if self.tok.kind != "VAR":
                raise self.fail("quantified variable")
            var = self.advance().text
            self.expect("]")
            self.expect(":")
            body = self.unary()
            return Forall(var, body) if q == "!" else Exists(var, body)
        if self.at("("):
            self.advance()
            f = self.clause()
            self.expect(")")
            return f
        if self.at("#even"):
            self.advance()
            self.expect("{")
            atoms = []
            if not self.at("}"):
                atoms.append(self.literal())
                while self.at(",", ";"):
                    self.advance()
                    atoms.append(self.literal())
            self.expect("}")
            return Parity(tuple(atoms))
        if self.at("{") or (t.kind == "NUMBER" and self.peek().text == "{"):
            return self.cardinality()
        if self.at("-") and self.peek().kind == "ID":
            return self.literal()
        if t.kind == "ID" and self.peek().text not in _COMPARE_OPS:
            return self.literal()
        if t.kind in ("ID", "VAR", "NUMBER") or self.at("-"):
            left = self.term()
            if not self.at(*_COMPARE_OPS):
                raise self.fail("comparison operator")
            op = self.advance().text
            return Compare(op, left, self.term())
        raise self.fail("formula")

    def cardinality(self) -> Cardinality:
        lower = None
        if self.tok.kind == "NUMBER":
            lower = self.integer()
        self.expect("{")
        elems = []
        if not self.at("}"):
            elems.append(self.card_element())
            while self.at(",", ";"):
                self.advance()
                elems.append(self.card_element())
        self.expect("}")
        upper = None
        if self.tok.kind == "NUMBER":
            upper = self.integer()
        return Cardinality(lower, upper, tuple(elems))

    def card_element(self) -> CardElement:
        lit = self.literal()
        conds = []
        while self.at(":"):
            self.advance()
            conds.append(self.condition_literal())
        return CardElement(lit, tuple(conds))

    def condition_literal(self) -> Formula:
        if self.tok.kind == "NOT":
            self.advance()
            return Not(self.literal())
        if self.tok.kind == "ID" and self.peek().text not in _COMPARE_OPS:
            return self.literal()
        left = self.term()
        if not self.at(*_COMPARE_OPS):
            raise self.fail("comparison operator")
        op = self.advance().text
        return Compare(op, left, self.term())

    def literal(self) -> Atom:
        strong = False
        if self.at("-"):
            self.advance()
            strong = True
        pred = self.ident()
        args: list[Term] = []
        if self.at("("):
            self.advance()
            args.append(self.term(allow_range=True))
            while self.at(","):
                self.advance()
                args.append(self.term(allow_range=True))
            self.expect(")")
        return Atom(pred, tuple(args), strong)

    def ident(self) -> str:
        if self.tok.kind != "ID":
            raise self.fail("identifier")
        return self.advance().text

    def integer(self) -> int:
        t = self.tok
        if t.kind != "NUMBER" or not t.text.isdigit():
            raise self.fail("integer")
        self.advance()
        return int(t.text)

    def term(self, allow_range: bool = False) -> Term:
        t = self.tok
        if t.kind == "VAR":
            self.advance()
            return Var(t.text)
        if t.kind == "ID":
            self.advance()
            if self.at("("):
                raise self.fail("term (function symbols are not supported)")
            return t.text
        neg = False
        if self.at("-") and self.peek().kind == "NUMBER":
            self.advance()
            neg = True
        if self.tok.kind == "NUMBER":
            value = self.integer()
            value = -value if neg else value
            if allow_range and self.at(".."):
                self.advance()
                neg_hi = False
                if self.at("-"):
                    self.advance()
                    neg_hi = True
                hi = self.integer()
                return Range(value, -hi if neg_hi else hi)
            return value
        raise self.fail("term")


def parse_program(text: str) -> Program:
    """Parse program text into weighted formulas and domain declarations."""
    p = _Parser(text)
    prog = Program()
    for st in p.statements(allow_queries=False):
        if isinstance(st, DomainDecl):
            prog.domains.append(st)
        else:
            _check_ranges(st.formula, st)
            prog.statements.append(st)
    if not prog.statements and not prog.domains:
        raise ParseError("empty program", 1, 1)
    return prog


def _check_ranges(f: Formula, st: WeightedFormula) -> None:
    if isinstance(f, Atom):
        if any(isinstance(a, Range) for a in f.args) and st.weight is not None:
            raise ParseError("range terms are only allowed in unweighted facts")
        return
    for sub in _children(f):
        if isinstance(sub, Atom) and any(isinstance(a, Range) for a in sub.args):
            raise ParseError("range terms are only allowed in facts")
        _check_ranges(sub, st)


def parse_queries(text: str) -> tuple[list[Query], list[DomainDecl]]:
    """Parse a query file; empty text yields no queries."""
    queries, domains = [], []
    for st in _Parser(text).statements(allow_queries=True):
        if isinstance(st, Query):
            queries.append(st)
        elif isinstance(st, DomainDecl):
            domains.append(st)
        else:
            raise ParseError(f"expected a query, found statement "
                             f"{print_statement(st)!r}")
    return queries, domains


def parse_query(text: str) -> Query:
    s = text.strip()
    if not (s.startswith("[?]") or s.startswith("[?|")):
        raise ParseError("query must start with '[?]' or '[?|'", 1, 1)
    if not s.endswith("."):
        s += "."
    p = _Parser(s)
    q = p.query()
    if p.tok.kind != "EOF":
        raise p.fail("end of query")
    return q


def parse_formula(text: str) -> Formula:
    """Parse a single formula or rule, with or without the final period."""
    s = text.strip()
    if not s.endswith("."):
        s += "."
    p = _Parser(s)
    f = p.clause()
    p.expect(".")
    if p.tok.kind != "EOF":
        raise p.fail("end of formula")
    return f


# --------------------------------------------------------------------------
# Printer
# --------------------------------------------------------------------------

_LEVEL_IMPLIES, _LEVEL_OR, _LEVEL_AND, _LEVEL_UNARY = 1, 2, 3, 4


def _level(f: Formula) -> int:
    if isinstance(f, Implies):
        return _LEVEL_IMPLIES
    if isinstance(f, Or):
        return _LEVEL_OR
    if isinstance(f, And):
        return _LEVEL_AND
    if isinstance(f, Rule):
        return 0
    return _LEVEL_UNARY


def _wrap(f: Formula, min_level: int, *, strict: bool = False) -> str:
    s = print_formula(f)
    lv = _level(f)
    if lv < min_level or (strict and lv == min_level):
        return f"({s})"
    return s


def _children(f: Formula) -> tuple:
    if isinstance(f, (Not,)):
        return (f.arg,)
    if isinstance(f, (And, Or)):
        return f.args
    if isinstance(f, Implies):
        return (f.antecedent, f.consequent)
    if isinstance(f, (Forall, Exists)):
        return (f.body,)
    if isinstance(f, Rule):
        return tuple(x for x in (f.head, f.body) if x is not None)
    if isinstance(f, Cardinality):
        out = []
        for e in f.elements:
            out.append(e.literal)
            out.extend(e.conditions)
        return tuple(out)
    if isinstance(f, Parity):
        return f.atoms
    return ()


def print_formula(f: Formula) -> str:
    """Canonical text of a formula; re-parses to an identical AST."""
    if isinstance(f, Atom):
        s = ("-" if f.strong else "") + f.pred
        if f.args:
            s += "(" + ",".join(print_term(a) for a in f.args) + ")"
        return s
    if isinstance(f, Not):
        return "not " + _wrap(f.arg, _LEVEL_UNARY)
    if isinstance(f, And):
        return " & ".join(_wrap(a, _LEVEL_AND, strict=True) for a in f.args)
    if isinstance(f, Or):
        return " | ".join(_wrap(a, _LEVEL_OR, strict=True) for a in f.args)
    if isinstance(f, Implies):
        return (_wrap(f.antecedent, _LEVEL_IMPLIES, strict=True) + " -> "
                + _wrap(f.consequent, _LEVEL_IMPLIES))
    if isinstance(f, Forall):
        return f"![{f.var}]: " + _wrap(f.body, _LEVEL_UNARY)
    if isinstance(f, Exists):
        return f"?[{f.var}]: " + _wrap(f.body, _LEVEL_UNARY)
    if isinstance(f, Compare):
        return f"{print_term(f.left)} {f.op} {print_term(f.right)}"
    if isinstance(f, Cardinality):
        elems = []
        for e in f.elements:
            s = print_formula(e.literal)
            for c in e.conditions:
                s += ":" + print_formula(c)
            elems.append(s)
        lo = "" if f.lower is None else str(f.lower)
        hi = "" if f.upper is None else str(f.upper)
        return f"{lo}{{{', '.join(elems)}}}{hi}"
    if isinstance(f, Parity):
        return "#even{" + ", ".join(print_formula(a) for a in f.atoms) + "}"
    if isinstance(f, Rule):
        body = ""
        if f.body is not None:
            parts = f.body.args if isinstance(f.body, And) else (f.body,)
            body = ", ".join(_wrap(p, _LEVEL_OR) for p in parts)
        if f.head is None:
            return f":- {body}"
        head = _wrap(f.head, _LEVEL_IMPLIES)
        return f"{head} :- {body}" if f.body is not None else f"{head} :-"
    raise TypeError(f"not a formula: {f!r}")


def format_weight(w: float) -> str:
    return str(int(w)) if float(w).is_integer() else repr(float(w))


def print_statement(st: WeightedFormula) -> str:
    text = print_formula(st.formula) + "."
    if st.weight is None:
        return text
    w = format_weight(st.weight)
    if st.kind == "per_instance":
        return f"[[{w}]] {text}"
    return f"[{w}] {text}"
