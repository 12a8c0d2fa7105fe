"""Command-line front end.

Exit status: 0 on success, 1 on domain errors, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import causality, repairs, scores
from .errors import QExplainError
from .io import fixture_paths, load_database, load_schema
from .lineage import DEFAULT_MAX_VARS, build_lineage
from .model import Database, tid_key
from .parser import parse_constraints, parse_query
from .query import classify, evaluate, query_to_dcs
from .report import dumps, fmt_rational, rational_json, table


class UsageError(Exception):
    pass


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("inputs")
    g.add_argument("--fixture", metavar="DIR", help="directory with schema.json, <pred>.csv or data.json, query.dl, constraints.dl")
    g.add_argument("--schema", metavar="PATH")
    g.add_argument("--data", metavar="PATH", nargs="+", help="CSV files (one per predicate) or a JSON document")
    g.add_argument("--query", metavar="PATH")
    g.add_argument("--head", metavar="NAME", help="rule head to use when the query file defines several")
    g.add_argument("--answer", metavar="VALUES", help="comma-separated answer that instantiates an open query")
    g.add_argument("--constraints", metavar="PATH")
    o = p.add_argument_group("output")
    o.add_argument("--format", choices=("json", "table"), default="json")
    o.add_argument("--threads", type=int, default=None, help="worker bound (default: $QEXPLAIN_THREADS or 1)")
    o.add_argument("--max-vars", type=int, default=None,
                   help=f"enumeration cap for lineage variables and players (default {DEFAULT_MAX_VARS} / {scores.DEFAULT_MAX_PLAYERS})")
    o.add_argument("--max-repairs", type=int, default=repairs.DEFAULT_MAX_REPAIRS)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="qexplain", description="Explanation scores for query answers.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    sub.add_parser("eval", parents=[common], help="query answers")
    sub.add_parser("lineage", parents=[common], help="lineage of the (instantiated) Boolean query")
    p = sub.add_parser("causes", parents=[common], help="actual causes with responsibilities")
    p.add_argument("--ics", action="store_true", help="honor the integrity constraints")
    p = sub.add_parser("resp", parents=[common], help="responsibility of one tuple")
    p.add_argument("--tid", required=True)
    p.add_argument("--ics", action="store_true")
    p = sub.add_parser("repairs", parents=[common], help="S- or C-repairs w.r.t. the denial constraints")
    p.add_argument("--kind", choices=("s", "c", "S", "C"), default="s")
    p.add_argument("--kappa", action="store_true", help="repair w.r.t. the denial constraints of the Boolean query")
    p = sub.add_parser("cqa", parents=[common], help="consistent answers over all repairs")
    p.add_argument("--kind", choices=("s", "c", "S", "C"), default="s")
    p = sub.add_parser("ce", parents=[common], help="causal effect")
    p.add_argument("--tid", action="append")
    for name in ("shapley", "banzhaf"):
        p = sub.add_parser(name, parents=[common], help=f"{name} scores")
        p.add_argument("--tid", action="append")
        p.add_argument("--game", choices=scores.AGGREGATES, default="boolean")
        p.add_argument("--position", type=int, default=0, help="head position aggregated by non-Boolean games")
        if name == "shapley":
            p.add_argument("--method", choices=("exact", "mc"), default="exact")
            p.add_argument("--epsilon", type=float)
            p.add_argument("--delta", type=float)
            p.add_argument("--seed", type=int, default=0)
            p.add_argument("--max-samples", type=int, default=1_000_000)
    sub.add_parser("classify", parents=[common], help="hierarchical / self-join-free classification")
    return parser


class _Inputs:
    def __init__(self, args):
        self.args = args
        paths = fixture_paths(args.fixture) if args.fixture else {"schema": None, "query": None, "constraints": None, "data": []}
        if args.fixture and not Path(args.fixture).is_dir():
            raise UsageError(f"--fixture: no such directory: {args.fixture}")
        self.schema_path = args.schema or paths["schema"]
        self.data_paths = args.data or paths["data"]
        self.query_path = args.query or paths["query"]
        self.constraints_path = args.constraints or paths["constraints"]
        for flag, path in (("--schema", self.schema_path), ("--query", self.query_path), ("--constraints", self.constraints_path)):
            if path is not None and not Path(path).exists():
                raise UsageError(f"{flag}: no such file: {path}")
        for path in self.data_paths:
            if not Path(path).exists():
                raise UsageError(f"--data: no such file: {path}")

    def db(self) -> Database:
        if not self.data_paths:
            raise UsageError("--data (or --fixture) is required")
        schema = load_schema(self.schema_path) if self.schema_path else None
        return load_database(self.data_paths, schema)

    def query(self):
        if not self.query_path:
            raise UsageError("--query (or --fixture) is required")
        q = parse_query(Path(self.query_path).read_text(encoding="utf-8"), self.args.head)
        if self.args.answer is not None:
            q = q.instantiate([v.strip() for v in self.args.answer.split(",")] if q.arity else [])
        return q

    def constraints(self):
        if not self.constraints_path:
            raise UsageError("--constraints (or a fixture with constraints.dl) is required")
        return parse_constraints(Path(self.constraints_path).read_text(encoding="utf-8"))


def _threads(args) -> int:
    if args.threads is not None:
        if args.threads < 1:
            raise UsageError("--threads must be at least 1")
        return args.threads
    try:
        return max(1, int(os.environ.get("QEXPLAIN_THREADS", "1")))
    except ValueError:
        return 1


def _tids(args):
    return getattr(args, "tid", None) or None


def _cap(args, default: int) -> int:
    return default if args.max_vars is None else args.max_vars


def _score_table(reports) -> str:
    rows = []
    for r in reports:
        j = r.to_json()
        if "value" in j:
            rows.append([j["tid"], j["fact"], j["kind"], fmt_rational(r.value), j["value"]["decimal"]])
        else:
            rows.append([j["tid"], j["fact"], j["kind"], f"~{j['estimate']:.6g}", f"n={j['samples']}"])
    return table(["tid", "fact", "kind", "value", "decimal"], rows)


def run(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        text = _dispatch(args)
    except UsageError as e:
        print(f"qexplain {args.command}: usage error: {e}", file=sys.stderr)
        return 2
    except QExplainError as e:
        print(f"qexplain {args.command}: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    out.write(text)
    return 0


def _dispatch(args) -> str:
    inp = _Inputs(args)
    fmt = args.format
    cmd = args.command

    if cmd == "classify":
        q = inp.query()
        results = [classify(d) for d in q.disjuncts]
        if fmt == "table":
            return table(["disjunct", "hierarchical", "self_join_free"],
                         [[str(d), c.hierarchical, c.self_join_free] for d, c in zip(q.disjuncts, results)])
        payload = [c.to_json() for c in results]
        return dumps(payload[0] if len(payload) == 1 else payload)

    db = inp.db()

    if cmd == "eval":
        q = inp.query()
        answers = sorted(evaluate(q, db))
        if fmt == "table":
            if q.is_boolean:
                return table(["query", "value"], [[q.name, "true" if answers else "false"]])
            return table([f"#{i + 1}" for i in range(q.arity)], [list(a) for a in answers])
        payload = {"query": q.name, "boolean": q.is_boolean, "answers": [list(a) for a in answers]}
        if q.is_boolean:
            payload["value"] = bool(answers)
        return dumps(payload)

    if cmd == "lineage":
        f = build_lineage(inp.query(), db)
        if fmt == "table":
            return str(f) + "\n"
        facts = {t: str(db.fact(t)) for t in sorted(f.variables, key=tid_key)}
        return dumps({"lineage": str(f), "clauses": f.sorted_clauses(), "facts": facts})

    if cmd in ("causes", "resp"):
        q = inp.query()
        ics = inp.constraints() if args.ics else None
        if cmd == "resp":
            value = causality.responsibility(db, q, args.tid, ics, max_tuples=_cap(args, causality.DEFAULT_MAX_TUPLES))
            if fmt == "table":
                return table(["tid", "fact", "responsibility"], [[args.tid, str(db.fact(args.tid)), fmt_rational(value)]])
            return dumps({"tid": args.tid, "fact": str(db.fact(args.tid)), "responsibility": rational_json(value)})
        reports = causality.find_causes(db, q, ics, max_tuples=_cap(args, causality.DEFAULT_MAX_TUPLES))
        if fmt == "table":
            return table(
                ["tid", "fact", "actual", "counterfactual", "responsibility", "minimal contingencies"],
                [[r.tid, r.fact, r.is_actual, r.is_counterfactual, fmt_rational(r.responsibility),
                  " ".join("{" + ",".join(sorted(g, key=tid_key)) + "}" for g in r.minimal_contingencies)]
                 for r in reports],
            )
        return dumps([r.to_json() for r in reports])

    if cmd == "repairs":
        dcs = query_to_dcs(inp.query()) if args.kappa else inp.constraints().dcs
        rs = repairs.repairs(db, dcs, args.kind.upper(), args.max_repairs)
        if fmt == "table":
            return table(["#", "removed", "kept"],
                         [[i + 1, ",".join(sorted(r.removed, key=tid_key)), ",".join(r.database.sorted_tids())]
                          for i, r in enumerate(rs.repairs)])
        return dumps(rs.to_json())

    if cmd == "cqa":
        q = inp.query()
        answers = sorted(repairs.consistent_answers(db, inp.constraints().dcs, q, args.kind.upper(), args.max_repairs))
        if fmt == "table":
            return table([f"#{i + 1}" for i in range(max(q.arity, 1))], [list(a) or ["true"] for a in answers])
        return dumps({"query": q.name, "kind": args.kind.upper(), "answers": [list(a) for a in answers]})

    if cmd in ("ce", "shapley", "banzhaf"):
        q = inp.query()
        tids = _tids(args)
        kind = getattr(args, "game", "boolean")
        game = scores.make_game(q, kind, args.position if kind != "boolean" else None) if cmd != "ce" else scores.make_game(q)
        if cmd == "shapley" and args.method == "mc":
            if args.epsilon is None or args.delta is None:
                raise UsageError("--method mc requires --epsilon and --delta")
            params = scores.ApproxParams(args.epsilon, args.delta, args.seed, args.max_samples)
            threads = _threads(args)
            reports = [scores.shapley_mc(db, game, t, params, threads) for t in (sorted(tids, key=tid_key) if tids else db.sorted_tids())]
        else:
            reports = scores.score_reports(db, game, cmd, tids, max_players=_cap(args, scores.DEFAULT_MAX_PLAYERS),
                                           max_vars=_cap(args, DEFAULT_MAX_VARS))
        if fmt == "table":
            return _score_table(reports)
        return dumps([r.to_json() for r in reports])

    raise UsageError(f"unknown command {cmd}")


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
