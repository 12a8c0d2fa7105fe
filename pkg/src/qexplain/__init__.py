"""Score-based explanations for query answers over small relational databases."""

from .causality import CauseReport, ContingencySet, contingency_sets, find_causes, is_counterfactual_cause, responsibility
from .errors import QExplainError
from .io import load_database, load_schema
from .lineage import Lineage, build_lineage, eval_formula, intervene, minimal_witnesses, probability
from .model import (
    Atom,
    ConstraintSet,
    Database,
    DenialConstraint,
    Fact,
    InclusionDependency,
    Predicate,
    Schema,
    Var,
    satisfies,
    satisfies_dc,
    satisfies_ind,
    validate_database,
    violations,
)
from .parser import parse, parse_constraints, parse_program, parse_query
from .query import ConjunctiveQuery, UnionQuery, classify, evaluate, query_to_dc, query_to_dcs, witnesses
from .repairs import (
    c_repairs,
    causes_via_repairs,
    conflict_hypergraph,
    consistent_answers,
    most_responsible_causes,
    s_repairs,
)
from .scores import (
    ApproxParams,
    banzhaf,
    banzhaf_values,
    causal_effect,
    causal_effects,
    make_game,
    shapley,
    shapley_mc,
    shapley_values,
)

__version__ = "0.1.0"
