"""Subset and cardinality repairs w.r.t. denial constraints, CQA, and causes read off repairs."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .causality import CauseReport, _sort_sets
from .errors import ExplosionGuard, QueryNotTrue
from .lineage import minimize
from .model import ConstraintSet, Database, DenialConstraint, dc_violation_sets, tid_key
from .query import QueryLike, evaluate, holds, query_to_dcs, require_boolean

DEFAULT_MAX_REPAIRS = 100_000

DCs = Union[ConstraintSet, Sequence[DenialConstraint]]


def _dcs(dcs: DCs) -> tuple[DenialConstraint, ...]:
    return tuple(dcs.dcs) if isinstance(dcs, ConstraintSet) else tuple(dcs)


def _set_key(s):
    return (len(s), [tid_key(t) for t in sorted(s, key=tid_key)])


@dataclass(frozen=True)
class ConflictHypergraph:
    vertices: frozenset[str]
    edges: tuple[frozenset[str], ...]


@dataclass(frozen=True)
class Repair:
    removed: frozenset[str]
    database: Database

    def to_json(self) -> dict:
        return {"removed": sorted(self.removed, key=tid_key)}


@dataclass(frozen=True)
class RepairSet:
    kind: str  # "S" or "C"
    repairs: tuple[Repair, ...]

    @property
    def removed_sets(self) -> set[frozenset[str]]:
        return {r.removed for r in self.repairs}

    def __len__(self) -> int:
        return len(self.repairs)

    def to_json(self) -> dict:
        return {"kind": self.kind, "count": len(self.repairs), "repairs": [r.to_json() for r in self.repairs]}


def conflict_hypergraph(db: Database, dcs: DCs) -> ConflictHypergraph:
    edges = []
    for dc in _dcs(dcs):
        edges.extend(dc_violation_sets(db, dc))
    return ConflictHypergraph(db.tids, tuple(sorted(minimize(edges), key=_set_key)))


def minimal_hitting_sets(edges: Iterable[frozenset[str]], cap: int = DEFAULT_MAX_REPAIRS) -> list[frozenset[str]]:
    """All inclusion-minimal hitting sets, by depth-first search.

    Branches on the vertices of an unhit edge; vertices tried in earlier
    sibling branches are forbidden below, so no set is produced twice. A
    partial set is abandoned once some member has no private edge left.
    """
    edges = sorted(minimize(edges), key=_set_key)
    if not edges:
        return [frozenset()]
    if frozenset() in edges:
        return []
    out: list[frozenset[str]] = []

    def all_private(chosen: frozenset) -> bool:
        for u in chosen:
            if not any(e & chosen == {u} for e in edges):
                return False
        return True

    def dfs(chosen: frozenset, forbidden: frozenset) -> None:
        unhit = [e for e in edges if not (e & chosen)]
        if not unhit:
            out.append(chosen)
            if len(out) > cap:
                raise ExplosionGuard(f"more than {cap} repairs")
            return
        edge = min(unhit, key=lambda e: (len(e - forbidden), _set_key(e)))
        banned = set(forbidden)
        for v in sorted(edge - forbidden, key=tid_key):
            new = chosen | {v}
            if all_private(new):
                dfs(new, frozenset(banned))
            banned.add(v)

    dfs(frozenset(), frozenset())
    return sorted(out, key=_set_key)


def _repair_set(db: Database, removed: Iterable[frozenset[str]], kind: str) -> RepairSet:
    return RepairSet(kind, tuple(Repair(r, db.without(r)) for r in sorted(removed, key=_set_key)))


def s_repairs(db: Database, dcs: DCs, max_repairs: int = DEFAULT_MAX_REPAIRS) -> RepairSet:
    """Subset-maximal consistent subinstances: complements of minimal hitting sets."""
    hg = conflict_hypergraph(db, dcs)
    return _repair_set(db, minimal_hitting_sets(hg.edges, max_repairs), "S")


def c_repairs(db: Database, dcs: DCs, max_repairs: int = DEFAULT_MAX_REPAIRS) -> RepairSet:
    """Maximum-cardinality consistent subinstances."""
    hs = minimal_hitting_sets(conflict_hypergraph(db, dcs).edges, max_repairs)
    best = min(map(len, hs))
    return _repair_set(db, [h for h in hs if len(h) == best], "C")


def repairs(db: Database, dcs: DCs, kind: str = "S", max_repairs: int = DEFAULT_MAX_REPAIRS) -> RepairSet:
    kind = kind.upper()
    if kind == "S":
        return s_repairs(db, dcs, max_repairs)
    if kind == "C":
        return c_repairs(db, dcs, max_repairs)
    raise ValueError(f"repair kind must be S or C, not {kind!r}")


def consistent_answers(
    db: Database, dcs: DCs, q: QueryLike, kind: str = "S", max_repairs: int = DEFAULT_MAX_REPAIRS
) -> set[tuple[str, ...]]:
    """Answers returned by ``q`` on every repair."""
    answers = None
    for r in repairs(db, dcs, kind, max_repairs).repairs:
        got = evaluate(q, r.database)
        answers = got if answers is None else answers & got
    return answers or set()


def causes_via_repairs(db: Database, q: QueryLike, max_repairs: int = DEFAULT_MAX_REPAIRS) -> list[CauseReport]:
    """Causes and minimal contingency sets read off the S-repairs w.r.t. the query's denial constraints.

    A tuple is a cause with minimal contingency set G exactly when removing G
    plus the tuple yields an S-repair, so G ranges over the removed sets that
    contain the tuple. Responsibility comes from the smallest such set.
    """
    u = require_boolean(q)
    if not holds(u, db):
        raise QueryNotTrue(f"query {u.name} is false on the database")
    removed_sets = s_repairs(db, query_to_dcs(u), max_repairs).removed_sets
    members = sorted(frozenset().union(*removed_sets), key=tid_key)
    reports = []
    for tid in members:
        gammas = _sort_sets(r - {tid} for r in removed_sets if tid in r)
        reports.append(
            CauseReport(
                tid=tid,
                fact=str(db.fact(tid)),
                is_actual=True,
                is_counterfactual=len(gammas[0]) == 0,
                minimal_contingencies=gammas,
                responsibility=Fraction(1, 1 + len(gammas[0])),
            )
        )
    return reports


def most_responsible_causes(db: Database, q: QueryLike, max_repairs: int = DEFAULT_MAX_REPAIRS) -> dict[str, Fraction]:
    """Maximum-responsibility causes, read off the C-repairs."""
    u = require_boolean(q)
    if not holds(u, db):
        raise QueryNotTrue(f"query {u.name} is false on the database")
    out = {}
    for r in c_repairs(db, query_to_dcs(u), max_repairs).repairs:
        for tid in r.removed:
            out[tid] = Fraction(1, len(r.removed))
    return dict(sorted(out.items(), key=lambda kv: tid_key(kv[0])))
