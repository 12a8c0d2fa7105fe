"""Random small instances and brute-force oracles for cross-checking.

The oracles only use query evaluation and constraint checks on concrete
subinstances; they never touch lineage, bitmasks or hitting sets.
"""

from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction
from pathlib import Path

from qexplain.io import fixture_paths, load_database, load_schema
from qexplain.model import Atom, ConstraintSet, Database, Predicate, Schema, Var, satisfies, validate_database
from qexplain.parser import parse_constraints, parse_program, parse_query
from qexplain.query import ConjunctiveQuery, UnionQuery, evaluate

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
DOMAIN = ("a", "b", "c")
VARS = (Var("X"), Var("Y"), Var("Z"))


def load_fixture(name: str, head: str | None = None, answer=None):
    paths = fixture_paths(FIXTURES / name)
    schema = load_schema(paths["schema"]) if paths["schema"] else None
    db = load_database(paths["data"], schema)
    q = None
    if paths["query"]:
        text = paths["query"].read_text()
        q = parse_query(text, head if head or len(parse_program(text).queries) == 1 else "q")
    if q is not None and answer is not None:
        q = q.instantiate(answer)
    cs = parse_constraints(paths["constraints"].read_text()) if paths["constraints"] else None
    return db, q, cs


def _random_cq(rng: random.Random, arities: dict[str, int]) -> ConjunctiveQuery:
    preds = list(arities)
    body = []
    for _ in range(rng.randint(2, 3)):
        p = rng.choice(preds)
        terms = tuple(rng.choice(DOMAIN) if rng.random() < 0.1 else rng.choice(VARS) for _ in range(arities[p]))
        body.append(Atom(p, terms))
    return ConjunctiveQuery((), tuple(body))


def random_instance(seed: int, max_tuples: int = 10, union: bool = False) -> tuple[Database, UnionQuery]:
    """A database with at most ``max_tuples`` facts on which a random BCQ is true."""
    rng = random.Random(seed)
    names = ["R", "S", "T"][: rng.randint(2, 3)]
    arities = {n: rng.randint(1, 2) for n in names}
    schema = Schema(Predicate(n, a) for n, a in arities.items())
    disjuncts = [_random_cq(rng, arities) for _ in range(2 if union else 1)]
    q = UnionQuery(tuple(disjuncts))

    facts: list[tuple[str, tuple[str, ...]]] = []
    seed_q = rng.choice(disjuncts)
    binding = {v: rng.choice(DOMAIN) for v in VARS}
    for atom in seed_q.body:
        facts.append((atom.predicate, tuple(binding[t] if isinstance(t, Var) else t for t in atom.terms)))
    room = sum(len(DOMAIN) ** a for a in arities.values())
    target = rng.randint(len(set(facts)), min(max_tuples, room))
    while len(set(facts)) < target:
        p = rng.choice(names)
        facts.append((p, tuple(rng.choice(DOMAIN) for _ in range(arities[p]))))
    rng.shuffle(facts)
    return validate_database(schema, facts), q


def random_suite(n: int = 500, start: int = 0, **kw):
    return [random_instance(start + i, **kw) for i in range(n)]


def subsets(items):
    items = list(items)
    for k in range(len(items) + 1):
        yield from itertools.combinations(items, k)


def brute_minimal_witness_sets(q, db: Database) -> set[frozenset[str]]:
    sat = [frozenset(s) for s in subsets(db.sorted_tids()) if evaluate(q, db.restrict(s))]
    return {s for s in sat if not any(o < s for o in sat)}


def brute_causes(db: Database, q, ics: ConstraintSet | None = None) -> dict[str, tuple[Fraction, set[frozenset[str]]]]:
    """tid -> (responsibility, minimal contingency sets) straight from the definition."""
    def ok(removed):
        sub = db.without(removed)
        return (ics is None or satisfies(sub, ics)), bool(evaluate(q, sub))

    out = {}
    for tid in db.sorted_tids():
        rest = [t for t in db.sorted_tids() if t != tid]
        admissible = []
        for g in subsets(rest):
            g = frozenset(g)
            cons_a, true_a = ok(g)
            if not (cons_a and true_a):
                continue
            cons_b, true_b = ok(g | {tid})
            if cons_b and not true_b:
                admissible.append(g)
        minimal = {g for g in admissible if not any(o < g for o in admissible)}
        resp = Fraction(1, 1 + min(map(len, minimal))) if minimal else Fraction(0)
        out[tid] = (resp, minimal)
    return out


def brute_repairs(db: Database, dcs) -> tuple[set[frozenset[str]], set[frozenset[str]]]:
    """Removed-tid sets of S-repairs and C-repairs by subset enumeration."""
    cs = ConstraintSet(tuple(dcs))
    tids = db.sorted_tids()
    consistent = [frozenset(s) for s in subsets(tids) if satisfies(db.restrict(s), cs)]
    maximal = [s for s in consistent if not any(s < o for o in consistent)]
    s_removed = {db.tids - s for s in maximal}
    best = max(map(len, maximal))
    c_removed = {db.tids - s for s in maximal if len(s) == best}
    return s_removed, c_removed


def permutation_shapley(game, db: Database, players) -> dict[str, Fraction]:
    """Shapley values as the average marginal contribution over all orders of ``players``."""
    players = list(players)
    memo: dict[frozenset, Fraction] = {}

    def G(s):
        if s not in memo:
            memo[s] = game(db.restrict(s))
        return memo[s]

    totals = {p: Fraction(0) for p in players}
    for order in itertools.permutations(players):
        current = frozenset()
        before = G(current)
        for p in order:
            current = current | {p}
            after = G(current)
            totals[p] += after - before
            before = after
    n_orders = math.factorial(len(players))
    return {p: v / n_orders for p, v in totals.items()}


def definition_banzhaf(game, db: Database) -> dict[str, Fraction]:
    tids = db.sorted_tids()
    out = {}
    for tid in tids:
        rest = [t for t in tids if t != tid]
        total = sum((game(db.restrict(set(s) | {tid})) - game(db.restrict(s)) for s in subsets(rest)), Fraction(0))
        out[tid] = total / 2 ** (len(tids) - 1)
    return out


def world_probability(clauses, probs) -> Fraction:
    """Exhaustive world enumeration over the variables of a positive DNF."""
    variables = sorted(set().union(*clauses)) if clauses else []
    total = Fraction(0)
    for bits in itertools.product((False, True), repeat=len(variables)):
        world = dict(zip(variables, bits))
        if any(all(world[v] for v in c) for c in clauses):
            w = Fraction(1)
            for v in variables:
                w *= probs[v] if world[v] else 1 - probs[v]
            total += w
    return total
