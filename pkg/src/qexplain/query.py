"""Conjunctive queries and their unions: evaluation, witnesses, classification."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

from .errors import ArityMismatch, NonBooleanQuery, ValidationError
from .model import Atom, Database, DenialConstraint, Var, match_atoms


@dataclass(frozen=True)
class ConjunctiveQuery:
    head: tuple[Var, ...]
    body: tuple[Atom, ...]
    name: str = "q"

    def __post_init__(self):
        if not self.body:
            raise ValidationError("query body must be nonempty")
        body_vars = set(self.variables)
        for v in self.head:
            if v not in body_vars:
                raise ValidationError(f"head variable {v} does not occur in the body")

    @property
    def variables(self) -> tuple[Var, ...]:
        seen: dict[Var, None] = {}
        for a in self.body:
            for v in a.variables:
                seen.setdefault(v, None)
        return tuple(seen)

    @property
    def existential(self) -> tuple[Var, ...]:
        return tuple(v for v in self.variables if v not in self.head)

    @property
    def is_boolean(self) -> bool:
        return not self.head

    def instantiate(self, answer: Sequence[str]) -> ConjunctiveQuery | None:
        """Boolean query obtained by fixing the head to ``answer``.

        Returns None when ``answer`` conflicts with a repeated head variable.
        """
        if len(answer) != len(self.head):
            raise ArityMismatch(self.name, tuple(answer), len(self.head))
        binding: dict[Var, str] = {}
        for v, c in zip(self.head, answer):
            if binding.setdefault(v, str(c)) != str(c):
                return None
        return ConjunctiveQuery((), tuple(a.substitute(binding) for a in self.body), self.name)

    def __str__(self) -> str:
        head = self.name + (f"({','.join(map(str, self.head))})" if self.head else "")
        return f"{head} :- {', '.join(map(str, self.body))}."


@dataclass(frozen=True)
class UnionQuery:
    disjuncts: tuple[ConjunctiveQuery, ...]

    def __post_init__(self):
        if not self.disjuncts:
            raise ValidationError("union query needs at least one disjunct")
        arities = {len(d.head) for d in self.disjuncts}
        if len(arities) > 1:
            raise ArityMismatch(self.disjuncts[0].name, None)

    @property
    def arity(self) -> int:
        return len(self.disjuncts[0].head)

    @property
    def is_boolean(self) -> bool:
        return self.arity == 0

    @property
    def name(self) -> str:
        return self.disjuncts[0].name

    def instantiate(self, answer: Sequence[str]) -> UnionQuery:
        parts = [d.instantiate(answer) for d in self.disjuncts]
        parts = [p for p in parts if p is not None]
        if not parts:
            raise ValidationError(f"answer {tuple(answer)} is incompatible with every disjunct of {self.name}")
        return UnionQuery(tuple(parts))

    def __str__(self) -> str:
        return "\n".join(map(str, self.disjuncts))


QueryLike = Union[ConjunctiveQuery, UnionQuery]


def as_union(q: QueryLike) -> UnionQuery:
    return q if isinstance(q, UnionQuery) else UnionQuery((q,))


def require_boolean(q: QueryLike) -> UnionQuery:
    u = as_union(q)
    if not u.is_boolean:
        raise NonBooleanQuery(f"query {u.name} has {u.arity} free variables; instantiate it with an answer first")
    return u


@dataclass(frozen=True)
class Valuation:
    binding: dict
    witness: frozenset
    disjunct: int = 0


def evaluate(q: QueryLike, db: Database) -> set[tuple[str, ...]]:
    """Answers of ``q`` on ``db``; ``{()}`` for a true Boolean query."""
    out: set[tuple[str, ...]] = set()
    for d in as_union(q).disjuncts:
        for binding, _ in match_atoms(db, d.body):
            out.add(tuple(binding[v] for v in d.head))
    return out


def holds(q: QueryLike, db: Database) -> bool:
    u = require_boolean(q)
    for d in u.disjuncts:
        for _ in match_atoms(db, d.body):
            return True
    return False


def witnesses(q: QueryLike, db: Database, answer: Sequence[str] = ()) -> list[Valuation]:
    """Every valuation, across disjuncts, that produces ``answer``."""
    u = as_union(q)
    answer = tuple(str(a) for a in answer)
    if len(answer) != u.arity:
        raise ArityMismatch(u.name, answer, u.arity)
    out = []
    for i, d in enumerate(u.disjuncts):
        bq = d.instantiate(answer) if d.head else d
        if bq is None:
            continue
        for binding, witness in match_atoms(db, bq.body):
            full = {v: binding[v] for v in bq.variables}
            full.update(zip(d.head, answer))
            out.append(Valuation(full, witness, i))
    return out


@dataclass(frozen=True)
class QueryClassification:
    hierarchical: bool
    self_join_free: bool
    atoms_of: dict

    def to_json(self) -> dict:
        return {
            "hierarchical": self.hierarchical,
            "self_join_free": self.self_join_free,
            "atoms_of": {str(v): sorted(ix) for v, ix in self.atoms_of.items()},
        }


def classify(q: QueryLike) -> QueryClassification:
    """Hierarchical and self-join-free flags of a Boolean CQ.

    A query is hierarchical when the atom sets of any two existential
    variables are nested or disjoint.
    """
    if isinstance(q, UnionQuery):
        if len(q.disjuncts) != 1:
            raise ValidationError("classification is defined for a single conjunctive query")
        q = q.disjuncts[0]
    if not q.is_boolean:
        raise NonBooleanQuery(f"query {q.name} is not Boolean")
    atoms_of = {v: frozenset(i for i, a in enumerate(q.body) if v in a.variables) for v in q.existential}
    hierarchical = True
    sets = list(atoms_of.values())
    for i in range(len(sets)):
        for j in range(i + 1, len(sets)):
            a, b = sets[i], sets[j]
            if not (a <= b or b <= a or not (a & b)):
                hierarchical = False
    preds = [a.predicate for a in q.body]
    return QueryClassification(hierarchical, len(set(preds)) == len(preds), atoms_of)


def query_to_dc(q: QueryLike) -> DenialConstraint:
    """The denial constraint forbidding a Boolean CQ (same atoms)."""
    if isinstance(q, UnionQuery):
        if len(q.disjuncts) != 1:
            raise ValidationError("use query_to_dcs for unions")
        q = q.disjuncts[0]
    if not q.is_boolean:
        raise NonBooleanQuery(f"query {q.name} is not Boolean")
    return DenialConstraint(q.body)


def query_to_dcs(q: QueryLike) -> tuple[DenialConstraint, ...]:
    """One denial constraint per disjunct of a Boolean union query."""
    return tuple(query_to_dc(d) for d in require_boolean(q).disjuncts)
