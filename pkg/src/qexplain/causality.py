"""Actual causes, contingency sets and responsibility, optionally under integrity constraints."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .errors import InconsistentInput, QueryNotTrue, TooManyVariables, UnknownTid
from .lineage import build_lineage
from .model import ConstraintSet, Database, ind_matches, satisfies, tid_key
from .query import QueryLike, require_boolean
from .report import rational_json

DEFAULT_MAX_TUPLES = 25


@dataclass(frozen=True)
class ContingencySet:
    subject: str
    tids: frozenset[str]

    def sorted(self) -> list[str]:
        return sorted(self.tids, key=tid_key)


@dataclass(frozen=True)
class CauseReport:
    tid: str
    fact: str
    is_actual: bool
    is_counterfactual: bool
    minimal_contingencies: tuple[frozenset[str], ...]
    responsibility: Fraction

    def to_json(self) -> dict:
        return {
            "tid": self.tid,
            "fact": self.fact,
            "is_actual": self.is_actual,
            "is_counterfactual": self.is_counterfactual,
            "responsibility": rational_json(self.responsibility),
            "minimal_contingencies": [sorted(g, key=tid_key) for g in self.minimal_contingencies],
        }


def _sort_sets(sets) -> tuple[frozenset[str], ...]:
    return tuple(sorted(sets, key=lambda s: (len(s), [tid_key(t) for t in sorted(s, key=tid_key)])))


class _Deletions:
    """Bitmask model of query truth and IND satisfaction after deleting tuples."""

    def __init__(self, db: Database, q: QueryLike, ics: ConstraintSet | None):
        self.db = db
        self.lineage = build_lineage(q, db)
        if self.lineage.is_false:
            raise QueryNotTrue(f"query {require_boolean(q).name} is false on the database")
        self.with_ics = ics is not None and len(ics) > 0
        if self.with_ics:
            ics.check(db.schema)
            if not satisfies(db, ics):
                raise InconsistentInput("the database violates the given integrity constraints")
            universe = db.sorted_tids()
        else:
            universe = sorted(self.lineage.variables, key=tid_key)
        self.universe = universe
        self.bit = {t: 1 << i for i, t in enumerate(universe)}
        self.witness_masks = [self.mask(c) for c in self.lineage.clauses]
        # deletions preserve denial constraints, so only INDs can break
        self.ind_reqs: list[tuple[int, int]] = []
        if self.with_ics:
            for ind in ics.inds:
                for lhs, rhs in ind_matches(db, ind).items():
                    self.ind_reqs.append((self.bit[lhs], self.mask(rhs)))

    def mask(self, tids) -> int:
        m = 0
        for t in tids:
            m |= self.bit[t]
        return m

    def unmask(self, m: int) -> frozenset[str]:
        return frozenset(t for t in self.universe if m & self.bit[t])

    def query_true(self, removed: int) -> bool:
        return any(not (w & removed) for w in self.witness_masks)

    def consistent(self, removed: int) -> bool:
        for lhs, rhs in self.ind_reqs:
            if not (removed & lhs) and not (rhs & ~removed):
                return False
        return True

    def admissible(self, gamma: int, subject: int) -> bool:
        if not self.query_true(gamma) or not self.consistent(gamma):
            return False
        after = gamma | subject
        return not self.query_true(after) and self.consistent(after)

    def search(self, tid: str, mode: str, max_tuples: int) -> list[int]:
        """Admissible contingency masks for ``tid``, inclusion-minimal, ordered by size.

        ``mode="minimum"`` stops at the first size that has any.
        """
        if tid not in self.bit:
            return []
        subject = self.bit[tid]
        pool = [self.bit[t] for t in self.universe if t != tid]
        if len(pool) > max_tuples:
            raise TooManyVariables(len(pool), max_tuples)
        found: list[int] = []
        for k in range(len(pool) + 1):
            for combo in combinations(pool, k):
                g = sum(combo)
                if any(f & g == f for f in found):
                    continue
                if self.admissible(g, subject):
                    found.append(g)
            if mode == "minimum" and found:
                break
        return found


def _check_tid(db: Database, tid: str) -> None:
    if tid not in db:
        raise UnknownTid(tid)


def is_counterfactual_cause(db: Database, q: QueryLike, tid: str) -> bool:
    _check_tid(db, tid)
    model = _Deletions(db, q, None)
    return tid in model.bit and not model.query_true(model.bit[tid])


def contingency_sets(
    db: Database,
    q: QueryLike,
    tid: str,
    ics: ConstraintSet | None = None,
    mode: str = "minimal",
    max_tuples: int = DEFAULT_MAX_TUPLES,
) -> set[ContingencySet]:
    if mode not in ("minimal", "minimum"):
        raise ValueError(f"mode must be 'minimal' or 'minimum', not {mode!r}")
    _check_tid(db, tid)
    model = _Deletions(db, q, ics)
    return {ContingencySet(tid, model.unmask(g)) for g in model.search(tid, mode, max_tuples)}


def responsibility(
    db: Database, q: QueryLike, tid: str, ics: ConstraintSet | None = None, max_tuples: int = DEFAULT_MAX_TUPLES
) -> Fraction:
    _check_tid(db, tid)
    model = _Deletions(db, q, ics)
    found = model.search(tid, "minimum", max_tuples)
    if not found:
        return Fraction(0)
    return Fraction(1, 1 + bin(found[0]).count("1"))


def find_causes(
    db: Database, q: QueryLike, ics: ConstraintSet | None = None, max_tuples: int = DEFAULT_MAX_TUPLES
) -> list[CauseReport]:
    """One report per tuple of some minimal witness, sorted by tid.

    Tuples outside every minimal witness have responsibility 0 and are
    omitted. With ``ics``, both the contingency set and its extension by the
    candidate must keep the database consistent.
    """
    model = _Deletions(db, q, ics)
    reports = []
    for tid in sorted(model.lineage.variables, key=tid_key):
        found = model.search(tid, "minimal", max_tuples)
        gammas = _sort_sets(model.unmask(g) for g in found)
        actual = bool(gammas)
        resp = Fraction(1, 1 + min(map(len, gammas))) if actual else Fraction(0)
        reports.append(
            CauseReport(
                tid=tid,
                fact=str(db.fact(tid)),
                is_actual=actual,
                is_counterfactual=actual and len(gammas[0]) == 0,
                minimal_contingencies=gammas,
                responsibility=resp,
            )
        )
    return reports
