"""Causal effect, Shapley value and Banzhaf index of database tuples.

Exact values are computed over the players that occur in some minimal
witness; every other tuple is a null player, and adding null players leaves
both Shapley and Banzhaf values of the others unchanged.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np

from .errors import InvalidParams, NonBooleanQuery, NonNumericPosition, TooManyVariables, UnknownTid
from .lineage import DEFAULT_MAX_VARS, build_lineage, intervene, minimize, probability
from .model import Database, tid_key
from .query import QueryLike, as_union, evaluate, require_boolean, witnesses
from .report import rational_json

DEFAULT_MAX_PLAYERS = 25
GENERIC_MAX_PLAYERS = 18  # min/max/avg games evaluate every coalition in Python
MC_MAX_PLAYERS = 64
AGGREGATES = ("boolean", "sum", "max", "min", "avg")
HARD_AGGREGATES = ("max", "min", "avg")


@dataclass(frozen=True)
class GameFunction:
    """Wealth function on subinstances: Boolean query truth or an aggregate over answers."""

    kind: str
    query: object
    position: int | None = None

    @property
    def exact_only(self) -> bool:
        return self.kind in HARD_AGGREGATES

    def __call__(self, sub: Database) -> Fraction:
        if self.kind == "boolean":
            return Fraction(1) if evaluate(self.query, sub) else Fraction(0)
        vals = [_numeric(a[self.position]) for a in evaluate(self.query, sub)]
        return _aggregate(self.kind, vals)


def _numeric(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise NonNumericPosition(f"answer value {text!r} is not numeric") from None


def _aggregate(kind: str, vals) -> Fraction:
    if not vals:
        return Fraction(0)
    if kind == "sum":
        return sum(vals, Fraction(0))
    if kind == "max":
        return max(vals)
    if kind == "min":
        return min(vals)
    return sum(vals, Fraction(0)) / len(vals)


def make_game(q: QueryLike, kind: str = "boolean", position: int | None = None) -> GameFunction:
    """Game from a query: ``boolean`` needs a Boolean query, aggregates an open one."""
    if kind not in AGGREGATES:
        raise ValueError(f"unknown game kind {kind!r}")
    u = as_union(q)
    if kind == "boolean":
        return GameFunction("boolean", require_boolean(u))
    if u.is_boolean:
        raise NonBooleanQuery(f"{kind} game needs an open query with a numeric head position")
    if position is None:
        position = 0
    if not 0 <= position < u.arity:
        raise NonNumericPosition(f"head position {position} out of range for arity {u.arity}")
    return GameFunction(kind, u, position)


def _as_game(g) -> GameFunction:
    return g if isinstance(g, GameFunction) else make_game(g)


class _Outcomes:
    """A game bound to a database: each answer with its value and minimal witnesses."""

    def __init__(self, db: Database, g: GameFunction, restrict: bool = True):
        self.kind = g.kind
        if g.kind == "boolean":
            items = [((), Fraction(1), build_lineage(g.query, db).clauses)]
        else:
            items = []
            for ans in sorted(evaluate(g.query, db)):
                value = _numeric(ans[g.position])
                clauses = minimize(v.witness for v in witnesses(g.query, db, ans))
                items.append((ans, value, clauses))
        self.items = items
        relevant = frozenset().union(*(c for _, _, cl in items for c in cl)) if items else frozenset()
        self.players = sorted(relevant if restrict else db.tids, key=tid_key)
        self.bit = {t: 1 << i for i, t in enumerate(self.players)}
        self.outcomes = [
            (value, [sum(self.bit[t] for t in c) for c in clauses]) for _, value, clauses in items
        ]

    @property
    def n(self) -> int:
        return len(self.players)

    def value_range(self) -> float:
        """Width of an interval that contains every marginal contribution."""
        vals = [float(v) for v, _ in self.outcomes]
        if self.kind == "boolean":
            return 1.0
        if self.kind == "sum":
            if all(v >= 0 for v in vals):
                return max(sum(vals), 1e-12)
            return max(2 * sum(abs(v) for v in vals), 1e-12)
        hi = max([0.0] + vals)
        lo = min([0.0] + vals)
        return max(2 * (hi - lo), 1e-12)

    def vector_values(self, masks: np.ndarray) -> np.ndarray:
        """Float game values on an array of coalition masks."""
        present = []
        for _, wmasks in self.outcomes:
            sat = np.zeros(masks.shape, dtype=bool)
            for w in wmasks:
                w = np.uint64(w)
                sat |= (masks & w) == w
            present.append(sat)
        vals = np.array([float(v) for v, _ in self.outcomes])
        if not present:
            return np.zeros(masks.shape)
        P = np.stack(present, axis=-1)
        if self.kind in ("boolean", "sum"):
            return P.astype(float) @ vals
        count = P.sum(axis=-1)
        if self.kind == "avg":
            total = P.astype(float) @ vals
            return np.where(count > 0, total / np.maximum(count, 1), 0.0)
        fill = -np.inf if self.kind == "max" else np.inf
        pick = np.where(P, vals, fill)
        agg = pick.max(axis=-1) if self.kind == "max" else pick.min(axis=-1)
        return np.where(count > 0, agg, 0.0)


def _shapley_weights(n: int) -> list[Fraction]:
    # |S|!(n-|S|-1)!/n! for |S| = 0..n-1
    return [Fraction(1, n * math.comb(n - 1, k)) for k in range(n)]


def _pivot_counts(sat: np.ndarray, masks: np.ndarray, popcount: np.ndarray, bit: int, n: int) -> np.ndarray:
    """Per coalition size k, #{S not containing bit, |S|=k} weighted by G(S+bit)-G(S) in {-1,0,1}."""
    without = masks[(masks & bit) == 0]
    up = sat[without | bit] & ~sat[without]
    down = ~sat[without | bit] & sat[without]
    sizes = popcount[without]
    return np.bincount(sizes[up], minlength=n).astype(object) - np.bincount(sizes[down], minlength=n).astype(object)


def _exact_scores(db: Database, g, restrict: bool, max_players: int) -> tuple[dict, dict, int]:
    g = _as_game(g)
    game = _Outcomes(db, g, restrict)
    n = game.n
    shap = {t: Fraction(0) for t in db.sorted_tids()}
    banz = dict(shap)
    if n == 0:
        return shap, banz, 0
    if g.kind in ("boolean", "sum"):
        if n > max_players:
            raise TooManyVariables(n, max_players)
        dtype = np.uint32 if n < 32 else np.uint64
        masks = np.arange(1 << n, dtype=dtype)
        popcount = np.bitwise_count(masks).astype(np.intp)
        weights = _shapley_weights(n)
        for value, wmasks in game.outcomes:
            sat = np.zeros(masks.shape, dtype=bool)
            for w in wmasks:
                w = dtype(w)
                sat |= (masks & w) == w
            involved = set()
            for w in wmasks:
                involved |= {t for t in game.players if w & game.bit[t]}
            for t in involved:
                counts = _pivot_counts(sat, masks, popcount, dtype(game.bit[t]), n)
                shap[t] += value * sum((int(c) * w for c, w in zip(counts, weights)), Fraction(0))
                banz[t] += value * Fraction(int(sum(counts)), 1 << (n - 1))
        return shap, banz, n
    if n > min(max_players, GENERIC_MAX_PLAYERS):
        raise TooManyVariables(n, min(max_players, GENERIC_MAX_PLAYERS))
    G = _generic_values(game)
    weights = _shapley_weights(n)
    for t in game.players:
        bit = game.bit[t]
        s_sum = Fraction(0)
        b_sum = Fraction(0)
        for S in range(1 << n):
            if S & bit:
                continue
            d = G[S | bit] - G[S]
            if d:
                s_sum += weights[bin(S).count("1")] * d
                b_sum += d
        shap[t] = s_sum
        banz[t] = b_sum / (1 << (n - 1))
    return shap, banz, n


def _generic_values(game: _Outcomes) -> list[Fraction]:
    out = []
    for S in range(1 << game.n):
        vals = [v for v, wm in game.outcomes if any(w & S == w for w in wm)]
        out.append(_aggregate(game.kind, vals))
    return out


def _check(db: Database, tid: str) -> None:
    if tid not in db:
        raise UnknownTid(tid)


def shapley_values(db: Database, g, restrict: bool = True, max_players: int = DEFAULT_MAX_PLAYERS) -> dict[str, Fraction]:
    """Exact Shapley value of every tuple (null players get 0)."""
    return _exact_scores(db, g, restrict, max_players)[0]


def banzhaf_values(db: Database, g, restrict: bool = True, max_players: int = DEFAULT_MAX_PLAYERS) -> dict[str, Fraction]:
    return _exact_scores(db, g, restrict, max_players)[1]


def shapley(db: Database, g, tid: str, restrict: bool = True, max_players: int = DEFAULT_MAX_PLAYERS) -> Fraction:
    _check(db, tid)
    return shapley_values(db, g, restrict, max_players)[tid]


def banzhaf(db: Database, g, tid: str, restrict: bool = True, max_players: int = DEFAULT_MAX_PLAYERS) -> Fraction:
    _check(db, tid)
    return banzhaf_values(db, g, restrict, max_players)[tid]


def causal_effect(
    db: Database,
    q: QueryLike,
    tid: str,
    p: Mapping[str, Fraction] | None = None,
    max_vars: int = DEFAULT_MAX_VARS,
) -> Fraction:
    """E(Q | do(X=1)) - E(Q | do(X=0)) with independent tuple probabilities (default 1/2)."""
    _check(db, tid)
    f = build_lineage(q, db)
    return _ce(f, tid, p, max_vars)


def _ce(f, tid, p, max_vars) -> Fraction:
    if tid not in f.variables:
        return Fraction(0)
    return probability(intervene(f, tid, True), p, max_vars) - probability(intervene(f, tid, False), p, max_vars)


def causal_effects(
    db: Database, q: QueryLike, p: Mapping[str, Fraction] | None = None, max_vars: int = DEFAULT_MAX_VARS
) -> dict[str, Fraction]:
    f = build_lineage(q, db)
    return {t: _ce(f, t, p, max_vars) for t in db.sorted_tids()}


def tuple_probabilities(
    db: Database, default: Fraction = Fraction(1, 2), overrides: Mapping[str, Fraction] | None = None,
    potential: Mapping[str, Fraction] | None = None,
) -> dict[str, Fraction]:
    """Tuple-independent probabilities: ``default`` for database tuples, 0 for potential tuples."""
    probs = {t: Fraction(default) for t in db.tids}
    for t, x in (potential or {}).items():
        probs[t] = Fraction(x) if x is not None else Fraction(0)
    for t, x in (overrides or {}).items():
        probs[t] = Fraction(x)
    return probs


@dataclass(frozen=True)
class ApproxParams:
    epsilon: float
    delta: float
    seed: int = 0
    max_samples: int = 1_000_000
    chunk: int = 256

    def __post_init__(self):
        if not float(self.epsilon) > 0:
            raise InvalidParams(f"epsilon must be positive, got {self.epsilon}")
        if not 0 < float(self.delta) < 1:
            raise InvalidParams(f"delta must lie in (0, 1), got {self.delta}")
        if self.max_samples < 1 or self.chunk < 1:
            raise InvalidParams("max_samples and chunk must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidParams("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class MCEstimate:
    tid: str
    fact: str
    value: float
    samples: int
    converged: bool
    params: ApproxParams

    def to_json(self) -> dict:
        return {
            "tid": self.tid,
            "fact": self.fact,
            "kind": "shapley",
            "method": "monte-carlo",
            "estimate": self.value,
            "samples": self.samples,
            "converged": self.converged,
            "epsilon": float(self.params.epsilon),
            "delta": float(self.params.delta),
            "seed": int(self.params.seed),
            "bound": "empirical-bernstein stopping, union bound over checkpoints",
        }


# checkpoint k spends delta * (P-1) / (P * k**P); the sum over k stays below delta
_P = 1.1


def _marginal_chunk(game: _Outcomes, index: int, n_samples: int, seed: int, chunk_id: int) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, chunk_id])))
    n = game.n
    perms = rng.permuted(np.tile(np.arange(n, dtype=np.uint64), (n_samples, 1)), axis=1)
    bits = np.left_shift(np.uint64(1), perms)
    prefix = np.cumsum(bits, axis=1, dtype=np.uint64) - bits
    pos = np.argmax(perms == np.uint64(index), axis=1)
    before = prefix[np.arange(n_samples), pos]
    me = np.uint64(1) << np.uint64(index)
    return game.vector_values(before | me) - game.vector_values(before)


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get("QEXPLAIN_THREADS", "1")))
    except ValueError:
        return 1


def shapley_mc(db: Database, g, tid: str, params: ApproxParams, threads: int | None = None) -> MCEstimate:
    """Monte Carlo Shapley estimate from uniformly random permutations of the relevant tuples.

    Samples come in fixed-size chunks, chunk ``c`` drawing from a Philox
    stream keyed by ``(seed, c)``, so the result depends on the seed only.
    At geometrically spaced checkpoints an empirical Bernstein interval of
    half-width ``h`` is formed; sampling stops once ``(1+eps) h <= eps |mean|``,
    which puts the mean within relative ``eps`` of the true value with
    probability at least ``1 - delta``.
    """
    _check(db, tid)
    g = _as_game(g)
    game = _Outcomes(db, g)
    fact = str(db.fact(tid))
    if tid not in game.bit:
        return MCEstimate(tid, fact, 0.0, 0, True, params)
    if game.n > MC_MAX_PLAYERS:
        raise TooManyVariables(game.n, MC_MAX_PLAYERS)
    threads = threads or _default_threads()
    index = game.players.index(tid)
    eps, delta = float(params.epsilon), float(params.delta)
    R = game.value_range()
    max_chunks = max(1, -(-params.max_samples // params.chunk))

    total = 0.0
    total_sq = 0.0
    done = 0  # chunks consumed
    k = 0
    target = 1
    mean = 0.0
    pool = ThreadPoolExecutor(threads) if threads > 1 else None
    try:
        while True:
            ids = list(range(done, min(target, max_chunks)))
            run = lambda c: _marginal_chunk(game, index, params.chunk, int(params.seed), c)  # noqa: E731
            batches = list(pool.map(run, ids)) if pool else [run(c) for c in ids]
            for b in batches:
                total += float(b.sum())
                total_sq += float((b * b).sum())
            done = ids[-1] + 1 if ids else done
            t = done * params.chunk
            mean = total / t
            var = max(total_sq / t - mean * mean, 0.0)
            k += 1
            d_k = delta * (_P - 1) / (_P * k**_P)
            x = math.log(3 / d_k)
            half = math.sqrt(2 * var * x / t) + 3 * R * x / t
            if (1 + eps) * half <= eps * abs(mean):
                return MCEstimate(tid, fact, mean, t, True, params)
            if done >= max_chunks:
                return MCEstimate(tid, fact, mean, t, False, params)
            target = max(done + 1, math.ceil(done * 1.25))
    finally:
        if pool:
            pool.shutdown()


@dataclass(frozen=True)
class ScoreReport:
    tid: str
    fact: str
    kind: str  # "ce", "shapley" or "banzhaf"
    value: Fraction
    players: int | None = None

    def to_json(self) -> dict:
        out = {"tid": self.tid, "fact": self.fact, "kind": self.kind, "method": "exact", "value": rational_json(self.value)}
        if self.players is not None:
            out["players"] = self.players
        return out


def score_reports(db: Database, g, kind: str, tids=None, max_players: int = DEFAULT_MAX_PLAYERS,
                  max_vars: int = DEFAULT_MAX_VARS, p=None) -> list[ScoreReport]:
    """Exact reports for ``tids`` (default: every tuple), sorted by tid."""
    tids = db.sorted_tids() if tids is None else sorted(tids, key=tid_key)
    for t in tids:
        _check(db, t)
    if kind == "ce":
        g = _as_game(g)
        if g.kind != "boolean":
            raise NonBooleanQuery("causal effect needs a Boolean query")
        values = causal_effects(db, g.query, p, max_vars)
        n = None
    elif kind in ("shapley", "banzhaf"):
        shap, banz, n = _exact_scores(db, g, True, max_players)
        values = shap if kind == "shapley" else banz
    else:
        raise ValueError(f"unknown score kind {kind!r}")
    return [ScoreReport(t, str(db.fact(t)), kind, values[t], n) for t in tids]
