"""Schemas, database instances with tuple identifiers, and integrity constraints."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence, Union

from .errors import ArityMismatch, DuplicateTid, UnknownPredicate, ValidationError


@dataclass(frozen=True, order=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


Term = Union[Var, str]


def tid_key(tid: str):
    """Natural sort key so that t2 sorts before t10."""
    return tuple(int(p) if p.isdigit() else p for p in re.split(r"(\d+)", tid))


def _render_const(value: str) -> str:
    if re.fullmatch(r"[a-z][A-Za-z0-9_]*|-?\d+(\.\d+)?", value):
        return value
    return '"' + value.replace('"', '\\"') + '"'


@dataclass(frozen=True)
class Atom:
    predicate: str
    terms: tuple

    @property
    def variables(self) -> tuple[Var, ...]:
        seen = []
        for t in self.terms:
            if isinstance(t, Var) and t not in seen:
                seen.append(t)
        return tuple(seen)

    def substitute(self, binding: Mapping[Var, str]) -> Atom:
        return Atom(self.predicate, tuple(binding.get(t, t) if isinstance(t, Var) else t for t in self.terms))

    def __str__(self) -> str:
        inner = ",".join(str(t) if isinstance(t, Var) else _render_const(t) for t in self.terms)
        return f"{self.predicate}({inner})"


@dataclass(frozen=True)
class Predicate:
    name: str
    arity: int
    attrs: tuple[str, ...] = ()


class Schema:
    """A set of predicates with arities and attribute names."""

    def __init__(self, predicates: Iterable[Predicate]):
        self.predicates: dict[str, Predicate] = {}
        for p in predicates:
            if p.name in self.predicates:
                raise ValidationError(f"duplicate predicate {p.name!r}")
            if p.arity < 1:
                raise ValidationError(f"predicate {p.name!r} must have arity >= 1")
            attrs = tuple(p.attrs) or tuple(f"A{i + 1}" for i in range(p.arity))
            if len(attrs) != p.arity:
                raise ArityMismatch(p.name, attrs, p.arity)
            if len(set(attrs)) != len(attrs):
                raise ValidationError(f"duplicate attribute names in {p.name!r}")
            self.predicates[p.name] = Predicate(p.name, p.arity, attrs)

    @classmethod
    def from_arities(cls, arities: Mapping[str, int]) -> Schema:
        return cls(Predicate(name, arity) for name, arity in arities.items())

    def arity(self, name: str) -> int:
        try:
            return self.predicates[name].arity
        except KeyError:
            raise UnknownPredicate(name) from None

    def check_atom(self, atom: Atom) -> None:
        if len(atom.terms) != self.arity(atom.predicate):
            raise ArityMismatch(atom.predicate, str(atom), self.arity(atom.predicate))

    def __contains__(self, name: str) -> bool:
        return name in self.predicates

    def __iter__(self) -> Iterator[Predicate]:
        return iter(self.predicates.values())

    def __eq__(self, other) -> bool:
        return isinstance(other, Schema) and self.predicates == other.predicates

    def __repr__(self) -> str:
        return "Schema(" + ", ".join(f"{p.name}/{p.arity}" for p in self) + ")"


@dataclass(frozen=True)
class Fact:
    """A ground atom with its tuple identifier."""

    tid: str
    predicate: str
    values: tuple[str, ...]

    def __str__(self) -> str:
        return f"{self.predicate}({','.join(self.values)})"


class Database:
    """Immutable set of identified facts over a schema.

    The constructor trusts its input; use :func:`validate_database` for raw rows.
    """

    def __init__(self, schema: Schema, facts: Iterable[Fact]):
        self.schema = schema
        self._by_tid: dict[str, Fact] = {}
        self._by_pred: dict[str, list[Fact]] = {}
        for f in facts:
            self._by_tid[f.tid] = f
            self._by_pred.setdefault(f.predicate, []).append(f)

    @property
    def tids(self) -> frozenset[str]:
        return frozenset(self._by_tid)

    def facts_of(self, predicate: str) -> Sequence[Fact]:
        return self._by_pred.get(predicate, ())

    def fact(self, tid: str) -> Fact:
        return self._by_tid[tid]

    def sorted_tids(self) -> list[str]:
        return sorted(self._by_tid, key=tid_key)

    def without(self, tids: Iterable[str]) -> Database:
        drop = set(tids)
        return Database(self.schema, (f for f in self._by_tid.values() if f.tid not in drop))

    def restrict(self, tids: Iterable[str]) -> Database:
        keep = set(tids)
        return Database(self.schema, (f for f in self._by_tid.values() if f.tid in keep))

    def lookup(self, predicate: str, values: Sequence[str]) -> Fact | None:
        values = tuple(values)
        for f in self.facts_of(predicate):
            if f.values == values:
                return f
        return None

    def __contains__(self, tid: str) -> bool:
        return tid in self._by_tid

    def __len__(self) -> int:
        return len(self._by_tid)

    def __iter__(self) -> Iterator[Fact]:
        return (self._by_tid[t] for t in self.sorted_tids())

    def __repr__(self) -> str:
        return "Database{" + ", ".join(f"{f.tid}:{f}" for f in self) + "}"


def validate_database(schema: Schema, rows: Iterable) -> Database:
    """Build a database from raw rows.

    Each row is ``(predicate, values)`` or ``(predicate, values, tid)``. Rows
    without a tid get ``t1, t2, ...`` in input order, skipping tids that are
    already taken. Duplicate facts collapse onto the first occurrence.
    """
    parsed = []
    for row in rows:
        if isinstance(row, Fact):
            pred, values, tid = row.predicate, row.values, row.tid
        elif len(row) == 3:
            pred, values, tid = row
        else:
            (pred, values), tid = row, None
        if pred not in schema:
            raise UnknownPredicate(pred)
        values = tuple(str(v) for v in values)
        if len(values) != schema.arity(pred):
            raise ArityMismatch(pred, values, schema.arity(pred))
        parsed.append((pred, values, None if tid is None else str(tid)))

    taken: set[str] = set()
    for _, _, tid in parsed:
        if tid is not None:
            if tid in taken:
                raise DuplicateTid(tid)
            taken.add(tid)

    facts: list[Fact] = []
    seen: set[tuple[str, tuple[str, ...]]] = set()
    counter = 0
    for pred, values, tid in parsed:
        if (pred, values) in seen:
            continue
        seen.add((pred, values))
        if tid is None:
            counter += 1
            while f"t{counter}" in taken:
                counter += 1
            tid = f"t{counter}"
            taken.add(tid)
        facts.append(Fact(tid, pred, values))
    return Database(schema, facts)


def match_atoms(db: Database, atoms: Sequence[Atom], binding: Mapping[Var, str] | None = None):
    """Yield ``(binding, witness)`` for every valuation mapping all atoms into ``db``.

    Naive nested-loop join; ``witness`` is the frozenset of matched tids.
    """
    for a in atoms:
        db.schema.check_atom(a)
    yield from _match(db, list(atoms), 0, dict(binding or {}), ())


def _match(db, atoms, i, binding, tids):
    if i == len(atoms):
        yield dict(binding), frozenset(tids)
        return
    atom = atoms[i]
    for f in db.facts_of(atom.predicate):
        added = []
        ok = True
        for term, value in zip(atom.terms, f.values):
            if isinstance(term, Var):
                bound = binding.get(term)
                if bound is None:
                    binding[term] = value
                    added.append(term)
                elif bound != value:
                    ok = False
                    break
            elif term != value:
                ok = False
                break
        if ok:
            yield from _match(db, atoms, i + 1, binding, tids + (f.tid,))
        for v in added:
            del binding[v]


@dataclass(frozen=True)
class DenialConstraint:
    """Forbids the conjunction of ``atoms`` from holding under any valuation."""

    atoms: tuple[Atom, ...]

    def __post_init__(self):
        if not self.atoms:
            raise ValidationError("denial constraint needs at least one atom")

    def __str__(self) -> str:
        return ":- " + ", ".join(map(str, self.atoms)) + "."


@dataclass(frozen=True)
class InclusionDependency:
    """Every ``lhs`` fact needs an ``rhs`` fact agreeing on the shared variables.

    Variables of ``rhs`` that do not occur in ``lhs`` are existential.
    """

    lhs: Atom
    rhs: Atom

    @property
    def exported(self) -> dict[int, Var]:
        lhs_vars = set(self.lhs.variables)
        return {i: t for i, t in enumerate(self.rhs.terms) if isinstance(t, Var) and t in lhs_vars}

    def __str__(self) -> str:
        lhs_vars = set(self.lhs.variables)
        terms = [
            ("_" if isinstance(t, Var) and t not in lhs_vars else str(t) if isinstance(t, Var) else _render_const(t))
            for t in self.rhs.terms
        ]
        return f"{self.lhs} -> {self.rhs.predicate}({', '.join(terms)})."


@dataclass(frozen=True)
class ConstraintSet:
    dcs: tuple[DenialConstraint, ...] = ()
    inds: tuple[InclusionDependency, ...] = ()

    def check(self, schema: Schema) -> None:
        for dc in self.dcs:
            for a in dc.atoms:
                schema.check_atom(a)
        for ind in self.inds:
            schema.check_atom(ind.lhs)
            schema.check_atom(ind.rhs)

    def __len__(self) -> int:
        return len(self.dcs) + len(self.inds)


@dataclass(frozen=True)
class Violation:
    kind: str  # "dc" or "ind"
    index: int
    tids: frozenset[str] = field(default_factory=frozenset)


def dc_violation_sets(db: Database, dc: DenialConstraint) -> list[frozenset[str]]:
    """Distinct tid sets of the valuations that violate ``dc``, in discovery order."""
    out: dict[frozenset[str], None] = {}
    for _, witness in match_atoms(db, dc.atoms):
        out.setdefault(witness, None)
    return list(out)


def satisfies_dc(db: Database, dc: DenialConstraint) -> bool:
    for _ in match_atoms(db, dc.atoms):
        return False
    return True


def ind_matches(db: Database, ind: InclusionDependency) -> dict[str, frozenset[str]]:
    """Map each lhs fact's tid to the tids of the rhs facts that satisfy it."""
    db.schema.check_atom(ind.rhs)
    out = {}
    for binding, witness in match_atoms(db, [ind.lhs]):
        (tid,) = witness
        rhs = ind.rhs.substitute(binding)
        out[tid] = frozenset(w for _, ws in match_atoms(db, [rhs]) for w in ws)
    return out


def satisfies_ind(db: Database, ind: InclusionDependency) -> bool:
    return all(ind_matches(db, ind).values())


def satisfies(db: Database, cs: ConstraintSet) -> bool:
    return all(satisfies_dc(db, dc) for dc in cs.dcs) and all(satisfies_ind(db, ind) for ind in cs.inds)


def violations(db: Database, cs: ConstraintSet) -> list[Violation]:
    """All DC violations (one per distinct violating tid set) and unmatched IND lhs facts."""
    out = []
    for i, dc in enumerate(cs.dcs):
        sets = dc_violation_sets(db, dc)
        sets.sort(key=lambda s: sorted(map(tid_key, s)))
        out.extend(Violation("dc", i, s) for s in sets)
    for i, ind in enumerate(cs.inds):
        for tid, matches in sorted(ind_matches(db, ind).items(), key=lambda kv: tid_key(kv[0])):
            if not matches:
                out.append(Violation("ind", i, frozenset([tid])))
    return out
