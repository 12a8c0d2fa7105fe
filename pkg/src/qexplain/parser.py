"""Datalog-style surface syntax for queries and integrity constraints.

::

    % comment
    q(X) :- S(X), R(X,Y), S(Y).        rule (rules sharing a head form a union)
    :- P(X), Q(X,Y).                   denial constraint
    Dep(X,Y) -> Course(_, Y, X).       inclusion dependency

Variables start with an uppercase letter or ``_``; constants are lowercase
identifiers, numbers, or quoted strings. A bare ``_`` is a fresh variable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import ArityMismatch, HeadVariableNotInBody, ParseError
from .model import Atom, ConstraintSet, DenialConstraint, InclusionDependency, Var
from .query import ConjunctiveQuery, UnionQuery

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>%[^\n]*)
  | (?P<implies>:-)
  | (?P<arrow>->)
  | (?P<string>"(?:[^"\\]|\\.)*"|'(?:[^'\\]|\\.)*')
  | (?P<number>-?\d+(?:\.\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[(),.])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            toks.append(_Tok(kind, m.group(), line, pos - line_start + 1))
        nl = m.group().count("\n")
        if nl:
            line += nl
            line_start = m.start() + m.group().rfind("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


@dataclass
class Program:
    """Everything parsed from one source text."""

    rules: dict = field(default_factory=dict)  # head name -> list of ConjunctiveQuery
    dcs: list = field(default_factory=list)
    inds: list = field(default_factory=list)

    @property
    def queries(self) -> dict[str, UnionQuery]:
        return {name: UnionQuery(tuple(rs)) for name, rs in self.rules.items()}

    @property
    def constraints(self) -> ConstraintSet:
        return ConstraintSet(tuple(self.dcs), tuple(self.inds))


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0
        self.fresh = 0
        self.arities: dict[str, int] = {}

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.tok
        found = tok.text or "end of input"
        return ParseError(f"{msg}, found {found!r}", tok.line, tok.col)

    def expect(self, text: str) -> _Tok:
        if self.tok.text != text or self.tok.kind == "string":
            raise self.error(f"expected {text!r}")
        self.i += 1
        return self.toks[self.i - 1]

    def accept(self, text: str) -> bool:
        if self.tok.text == text and self.tok.kind != "string":
            self.i += 1
            return True
        return False

    def program(self) -> Program:
        prog = Program()
        while self.tok.kind != "eof":
            self.statement(prog)
        return prog

    def statement(self, prog: Program) -> None:
        start = self.tok
        if self.accept(":-"):
            self.fresh = 0
            prog.dcs.append(DenialConstraint(self.body()))
            self.expect(".")
            return
        if self.tok.kind != "ident":
            raise self.error("expected a rule, denial constraint or inclusion dependency")
        name_tok = self.tok
        self.i += 1
        self.fresh = 0
        head_terms: tuple = ()
        if self.tok.text == "(":
            head_terms = self.terms()
        if self.accept("->"):
            lhs = self.make_atom(name_tok, head_terms)
            rhs = self.atom()
            self.expect(".")
            lhs_vars = set(lhs.variables)
            for t in rhs.terms:
                if isinstance(t, Var) and t.name.startswith("_") and t in lhs_vars:
                    raise ParseError("anonymous variable shared between sides", start.line, start.col)
            prog.inds.append(InclusionDependency(lhs, rhs))
            return
        self.expect(":-")
        body = self.body()
        self.expect(".")
        for t in head_terms:
            if not isinstance(t, Var) or t.name.startswith("_"):
                raise ParseError("rule heads may only contain named variables", name_tok.line, name_tok.col)
        body_vars = {v for a in body for v in a.variables}
        for v in head_terms:
            if v not in body_vars:
                raise HeadVariableNotInBody(f"head variable {v} does not occur in the body", name_tok.line, name_tok.col)
        name = name_tok.text
        existing = prog.rules.get(name)
        if existing and len(existing[0].head) != len(head_terms):
            raise ArityMismatch(name, tuple(map(str, head_terms)), len(existing[0].head))
        prog.rules.setdefault(name, []).append(ConjunctiveQuery(tuple(head_terms), body, name))

    def body(self) -> tuple[Atom, ...]:
        atoms = [self.atom()]
        while self.accept(","):
            atoms.append(self.atom())
        return tuple(atoms)

    def atom(self) -> Atom:
        if self.tok.kind != "ident":
            raise self.error("expected a predicate name")
        name_tok = self.tok
        self.i += 1
        return self.make_atom(name_tok, self.terms())

    def make_atom(self, name_tok: _Tok, terms: tuple) -> Atom:
        if not terms:
            raise ParseError(f"atom {name_tok.text} needs at least one term", name_tok.line, name_tok.col)
        known = self.arities.setdefault(name_tok.text, len(terms))
        if known != len(terms):
            raise ArityMismatch(name_tok.text, tuple(map(str, terms)), known)
        return Atom(name_tok.text, terms)

    def terms(self) -> tuple:
        self.expect("(")
        out = [self.term()]
        while self.accept(","):
            out.append(self.term())
        self.expect(")")
        return tuple(out)

    def term(self):
        tok = self.tok
        self.i += 1
        if tok.kind == "ident":
            if tok.text == "_":
                self.fresh += 1
                return Var(f"_{self.fresh}")
            if tok.text[0].isupper() or tok.text[0] == "_":
                return Var(tok.text)
            return tok.text
        if tok.kind == "number":
            return tok.text
        if tok.kind == "string":
            return re.sub(r"\\(.)", r"\1", tok.text[1:-1])
        self.i -= 1
        raise self.error("expected a variable or constant")


def parse_program(text: str) -> Program:
    return _Parser(text).program()


def parse(text: str) -> UnionQuery | ConstraintSet:
    """Parse either a query (all rules share one head) or a constraint set."""
    prog = parse_program(text)
    if prog.rules and (prog.dcs or prog.inds):
        raise ParseError("query rules and constraints must live in separate sources", 1, 1)
    if prog.rules:
        if len(prog.rules) > 1:
            raise ParseError(f"several query heads: {', '.join(sorted(prog.rules))}", 1, 1)
        return next(iter(prog.queries.values()))
    return prog.constraints


def parse_query(text: str, name: str | None = None) -> UnionQuery:
    queries = parse_program(text).queries
    if not queries:
        raise ParseError("no query rule found", 1, 1)
    if name is None:
        if len(queries) > 1:
            raise ParseError(f"several query heads ({', '.join(sorted(queries))}); pick one", 1, 1)
        return next(iter(queries.values()))
    if name not in queries:
        raise ParseError(f"no rule with head {name!r}", 1, 1)
    return queries[name]


def parse_constraints(text: str) -> ConstraintSet:
    prog = parse_program(text)
    if prog.rules:
        raise ParseError("constraint source contains query rules", 1, 1)
    return prog.constraints
