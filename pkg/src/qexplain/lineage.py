"""Lineage of Boolean queries as positive DNF over tuple variables."""

from __future__ import annotations

from collections import Counter
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import TooManyVariables, UnboundVariable
from .model import Database, tid_key
from .query import QueryLike, require_boolean, witnesses

DEFAULT_MAX_VARS = 30


def minimize(clauses: Iterable[frozenset]) -> frozenset[frozenset]:
    """Drop every clause that strictly contains another one (absorption)."""
    uniq = sorted(set(map(frozenset, clauses)), key=len)
    kept: list[frozenset] = []
    for c in uniq:
        if not any(k <= c for k in kept):
            kept.append(c)
    return frozenset(kept)


def _clause_key(clause):
    return [tid_key(t) for t in sorted(clause, key=tid_key)]


class Lineage:
    """Positive DNF: a disjunction of conjunctions of tuple variables.

    ``clauses`` is kept absorbed, so the clauses are exactly the minimal
    witnesses. No clauses means false; the empty clause means true.
    """

    __slots__ = ("clauses",)

    def __init__(self, clauses: Iterable[Iterable[str]] = ()):
        self.clauses = minimize(frozenset(c) for c in clauses)

    TRUE: Lineage
    FALSE: Lineage

    @property
    def variables(self) -> frozenset[str]:
        return frozenset().union(*self.clauses) if self.clauses else frozenset()

    @property
    def is_true(self) -> bool:
        return frozenset() in self.clauses

    @property
    def is_false(self) -> bool:
        return not self.clauses

    def sorted_clauses(self) -> list[list[str]]:
        return sorted((sorted(c, key=tid_key) for c in self.clauses), key=lambda c: [tid_key(t) for t in c])

    def __eq__(self, other) -> bool:
        return isinstance(other, Lineage) and self.clauses == other.clauses

    def __hash__(self) -> int:
        return hash(self.clauses)

    def __str__(self) -> str:
        if self.is_false:
            return "false"
        if self.is_true:
            return "true"
        return " | ".join("(" + " & ".join(c) + ")" for c in self.sorted_clauses())

    def __repr__(self) -> str:
        return f"Lineage({self})"


Lineage.TRUE = Lineage([()])
Lineage.FALSE = Lineage()


def build_lineage(q: QueryLike, db: Database) -> Lineage:
    """One conjunct per valuation's witness set, absorbed."""
    u = require_boolean(q)
    return Lineage(v.witness for v in witnesses(u, db))


def eval_formula(f: Lineage, truth: Mapping[str, bool]) -> bool:
    for v in sorted(f.variables, key=tid_key):
        if v not in truth:
            raise UnboundVariable(v)
    return any(all(truth[t] for t in c) for c in f.clauses)


def intervene(f: Lineage, tid: str, value: bool) -> Lineage:
    """Apply ``do(X_tid = value)`` and simplify."""
    if value:
        return Lineage(c - {tid} for c in f.clauses)
    return Lineage(c for c in f.clauses if tid not in c)


def minimal_witnesses(f: Lineage) -> set[frozenset[str]]:
    return set(f.clauses)


def uniform_probabilities(tids: Iterable[str], p: Fraction = Fraction(1, 2)) -> dict[str, Fraction]:
    return {t: Fraction(p) for t in tids}


def probability(f: Lineage, p: Mapping[str, Fraction] | None = None, max_vars: int = DEFAULT_MAX_VARS) -> Fraction:
    """Exact probability that ``f`` is true with independent tuple events.

    ``p`` defaults to 1/2 for every variable. Uses Shannon expansion on the
    most frequent variable with memoization and splitting into
    variable-disjoint components.
    """
    variables = f.variables
    if len(variables) > max_vars:
        raise TooManyVariables(len(variables), max_vars)
    if p is None:
        probs = {v: Fraction(1, 2) for v in variables}
    else:
        missing = sorted(variables - set(p), key=tid_key)
        if missing:
            raise UnboundVariable(missing[0])
        probs = {v: Fraction(p[v]) for v in variables}
        for v, x in probs.items():
            if not 0 <= x <= 1:
                raise ValueError(f"probability of {v} outside [0, 1]: {x}")
    return _prob(f.clauses, probs, {})


def _components(clauses: frozenset[frozenset]) -> list[frozenset[frozenset]]:
    rest = list(clauses)
    comps = []
    while rest:
        group = [rest.pop()]
        vars_ = set(group[0])
        changed = True
        while changed:
            changed = False
            keep = []
            for c in rest:
                if vars_ & c:
                    group.append(c)
                    vars_ |= c
                    changed = True
                else:
                    keep.append(c)
            rest = keep
        comps.append(frozenset(group))
    return comps


def _prob(clauses: frozenset[frozenset], probs, memo) -> Fraction:
    if not clauses:
        return Fraction(0)
    if frozenset() in clauses:
        return Fraction(1)
    hit = memo.get(clauses)
    if hit is not None:
        return hit
    if len(clauses) == 1:
        (c,) = clauses
        result = Fraction(1)
        for v in c:
            result *= probs[v]
    else:
        comps = _components(clauses)
        if len(comps) > 1:
            miss = Fraction(1)
            for comp in comps:
                miss *= 1 - _prob(comp, probs, memo)
            result = 1 - miss
        else:
            counts = Counter(v for c in clauses for v in c)
            v = min(counts, key=lambda t: (-counts[t], tid_key(t)))
            pv = probs[v]
            on = minimize(c - {v} for c in clauses)
            off = frozenset(c for c in clauses if v not in c)
            result = pv * _prob(on, probs, memo) + (1 - pv) * _prob(off, probs, memo)
    memo[clauses] = result
    return result
