"""Strategy-graph engine: goal-typed tactics wired as string graphs,
evaluated by propagating goal nodes through the diagram via graph
rewriting, with an interactive stepping service for debugging runs."""

from .graph import (
    Edge, GoalData, MergeData, PortLabel, Signature, StringGraph, TacticData,
    Var, WireData, check_well_formed, find_matchings, is_isomorphic,
    normalized, plug, verify_matching,
)
from .goaltypes import (
    ANY, BOTTOM, Feature, FeatureType, GoalType, GoalTypeTable,
    builtin_registry, matches, meet, orthogonal,
)
from .kernel import Goal, ProofState, parse_goal, parse_term, term_str
from .rewrite import RewriteRule, Substitution, apply_rewrite, bb_instantiate
from .tactics import AtomicTactic, TacticRegistry, TacticSignature, partitions
from .engine import (
    EvalContext, EvalState, Evaluator, Stepper, eval_to_enf, initial_state,
    is_enf, output_goal_lists,
)
from .combinators import GraphTactic, OrElseTactic, OrTactic, repeat, then, unfold
from .strategy import Strategy, load_strategy, resolve_strategy, run_strategy

__version__ = "0.1.0"
