"""The evaluation engine.

Evaluation places goal nodes on the wires of a strategy graph and drives
them toward the output wires by rewriting: an eval step consumes a
singleton goal node at a tactic input and deposits the tactic's typed
goal lists on the output wires, unfold steps reduce goal lists to
singletons, and merge steps carry goals through merge nodes. A state is
in evaluation normal form (ENF) when every remaining goal node sits on an
output wire.

Branching arises only from tactics returning several evaluations; the
choice of which goal to move next is fixed by the evaluation order and
does not branch. The search is a lazily expanded tree walked depth-first
with explicit backtracking, which is also what the interactive stepper
exposes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Callable, Iterator, Optional

from .goaltypes import FeatureRegistry, GoalType, GoalTypeTable, matches
from .graph import (
    GoalData, GraphError, MergeData, Signature, StringGraph, TacticData,
    WireData, find_matchings, is_wire, normalized, port_in, port_out,
)
from .kernel import Goal, ProofState
from .rewrite import (
    Substitution, apply_rewrite, goal_list_empty_rule, goal_list_split_rule,
    make_eval_rule, make_merge_rule,
)
from .tactics import TacticRegistry, TacticSignature


class EngineError(GraphError):
    pass


class NoSuchSite(EngineError):
    pass


class TypeViolation(EngineError):
    pass


DEFAULT_FUEL = 10_000

LEFTMOST = "leftmost"
OLDEST = "oldest"
EVAL_ORDERS = (LEFTMOST, OLDEST)


@dataclass
class EvalContext:
    """Shared, read-only session context: the signature, goal-type and
    tactic tables, and evaluation defaults."""

    signature: Signature
    types: GoalTypeTable
    features: FeatureRegistry
    tactics: TacticRegistry
    order: str = LEFTMOST
    fuel: Optional[int] = DEFAULT_FUEL
    max_depth: int = 32
    depth: int = 0  # current graph-tactic nesting, bumped by nested runs

    def resolve(self, wiretype) -> GoalType:
        if not isinstance(wiretype, str):
            raise EngineError(f"wire type {wiretype!r} is not concrete")
        return self.types.get(wiretype)


@dataclass(frozen=True)
class Site:
    kind: str  # 'eval' | 'unfold' | 'merge'
    goal_node: str
    node: Optional[str] = None
    port: Optional[int] = None

    def to_json(self) -> dict:
        return {"kind": self.kind, "goal_node": self.goal_node,
                "node": self.node, "port": self.port}


@dataclass(frozen=True)
class EvalState:
    """One branch of an evaluation: the graph with embedded goal nodes,
    the proof state, and the trace of applied steps."""

    graph: StringGraph
    proof: ProofState
    ctx: EvalContext
    trace: tuple = ()

    def goal_ids_in_graph(self) -> list[str]:
        out = []
        for gn in self.graph.goal_nodes():
            d = self.graph.data(gn)
            out.extend(d.goals)
        return out


def trace_json(entry: dict) -> str:
    """Canonical serialization used everywhere a trace record crosses a
    boundary, so batch and interactive runs compare byte-for-byte."""
    return json.dumps(entry, sort_keys=True, separators=(",", ":"))


# ---------------------------------------------------------------------------
# Placing goals and reading results

def place_goal(state: EvalState, input_id: str, goal: Goal) -> EvalState:
    """Put a singleton goal node on a graph input wire. The goal must
    already be open in the proof state and match the wire's type."""
    g = state.graph
    if input_id not in g.inputs():
        raise NoSuchSite(f"{input_id!r} is not a graph input")
    alpha_name = g.wire_type(input_id)
    alpha = state.ctx.resolve(alpha_name)
    if not matches(goal, alpha, state.ctx.features):
        raise TypeViolation(
            f"goal {goal.sequent_str()!r} does not match input type {alpha.name!r}")

    out = g.copy()
    gn = out.add_vertex(GoalData((goal.id,), alpha_name))
    w2 = out.add_vertex(WireData(alpha_name))
    old_out = g.out_edges(input_id)
    for e in old_out:
        out.remove_edge(e)
        out.add_edge(w2, e.tgt, e.port)
    out.add_edge(input_id, gn, port_in(1))
    out.add_edge(gn, w2, port_out(1))
    outputs = [w2 if v == input_id else v for v in g.outputs()]
    out.set_io_order(g.inputs(), outputs)
    return replace(state, graph=out)


def initial_state(graph: StringGraph, ctx: EvalContext, goal: Goal,
                  input_index: int = 0) -> EvalState:
    proof = ProofState()
    proof.add_root(goal)
    state = EvalState(graph, proof, ctx)
    inputs = graph.inputs()
    if not inputs:
        raise NoSuchSite("strategy graph has no input wires")
    return place_goal(state, inputs[input_index], goal)


def on_output_wire(g: StringGraph, gn: str) -> bool:
    """A goal node is on an output wire when walking forward through
    wire-vertices and other goal nodes reaches a graph output."""
    cur = gn
    while True:
        outs = g.out_edges(cur)
        if not outs:
            return is_wire(g.data(cur))
        nxt = outs[0].tgt
        d = g.data(nxt)
        if isinstance(d, (GoalData, WireData)):
            cur = nxt
        else:
            return False


def is_enf(state: EvalState) -> bool:
    """Every remaining goal node sits on an output wire (vacuously true
    when no goal nodes remain: all goals discharged)."""
    return all(on_output_wire(state.graph, gn) for gn in state.graph.goal_nodes())


def output_goal_lists(state: EvalState) -> list[tuple[str, list[Goal]]]:
    """Per output wire, the goals remaining on it in wire-position order
    (upstream to downstream)."""
    g = state.graph
    result = []
    for o in g.outputs():
        groups: list[list[str]] = []
        cur = o
        while True:
            ins = g.in_edges(cur)
            if not ins:
                break
            u = ins[0].src
            d = g.data(u)
            if isinstance(d, GoalData):
                groups.append(list(d.goals))
                uin = g.in_edges(u)
                if not uin:
                    break
                cur = uin[0].src
            elif is_wire(d):
                cur = u
            else:
                break
        goals = [state.proof.goals[gid]
                 for grp in reversed(groups) for gid in grp]
        result.append((o, goals))
    return result


# ---------------------------------------------------------------------------
# Sites

def _distances(g: StringGraph) -> dict[str, int]:
    dist = {v: 0 for v in g.inputs()}
    queue = list(g.inputs())
    while queue:
        v = queue.pop(0)
        for e in g.out_edges(v):
            if e.tgt not in dist:
                dist[e.tgt] = dist[v] + 1
                queue.append(e.tgt)
    return dist


def enumerate_sites(state: EvalState) -> list[Site]:
    """Actionable steps: goal nodes already on output wires have exited
    and offer none."""
    g = state.graph
    sites = []
    for gn in g.goal_nodes():
        if on_output_wire(g, gn):
            continue
        d = g.data(gn)
        if len(d.goals) != 1:
            sites.append(Site("unfold", gn))
            continue
        outs = g.out_edges(gn)
        if not outs:
            continue
        w = outs[0].tgt
        if not is_wire(g.data(w)):
            continue
        for e in g.out_edges(w):
            nd = g.data(e.tgt)
            if isinstance(nd, TacticData) and e.port is not None:
                sites.append(Site("eval", gn, e.tgt, e.port.index))
            elif isinstance(nd, MergeData) and e.port is not None:
                sites.append(Site("merge", gn, e.tgt, e.port.index))
    return sites


_PRIORITY = {"unfold": 0, "merge": 1, "eval": 2}


def next_site(state: EvalState, order: str = LEFTMOST) -> Optional[Site]:
    sites = enumerate_sites(state)
    if not sites:
        return None
    if order == LEFTMOST:
        dist = _distances(state.graph)

        def key(s: Site):
            return (_PRIORITY[s.kind], dist.get(s.goal_node, 1 << 30), s.goal_node)
    elif order == OLDEST:
        def key(s: Site):
            ages = [state.proof.age[gid] for gid in state.graph.data(s.goal_node).goals]
            return (_PRIORITY[s.kind], min(ages, default=1 << 30), s.goal_node)
    else:
        raise EngineError(f"unknown evaluation order {order!r}")
    return min(sites, key=key)


# ---------------------------------------------------------------------------
# Steps

def _neighbourhood_signature(state: EvalState, t: str) -> TacticSignature:
    g, ctx = state.graph, state.ctx
    ins = sorted((e.port.index, e.src) for e in g.in_edges(t))
    outs = sorted((e.port.index, e.tgt) for e in g.out_edges(t))
    return TacticSignature(
        tuple(ctx.resolve(g.wire_type(w)) for _, w in ins),
        tuple(ctx.resolve(g.wire_type(w)) for _, w in outs))


def _entry(state: EvalState, site: Site, tactic: Optional[str], branch: int,
           new_goals: list[str]) -> dict:
    return {"step_no": len(state.trace) + 1, "site": site.to_json(),
            "tactic": tactic, "branch_index": branch, "new_goals": new_goals}


def _admin_step(state: EvalState, site: Site) -> EvalState:
    """Apply an unfold or merge step (deterministic, single successor)."""
    g = state.graph
    gd = g.data(site.goal_node)
    if site.kind == "unfold":
        k = len(gd.goals)
        rule = goal_list_split_rule(k) if k >= 2 else goal_list_empty_rule()
        seed = {"goal": site.goal_node}
    else:
        merge = site.node
        out_w = state.graph.out_edges(merge)[0].tgt
        out_ty = state.ctx.resolve(g.wire_type(out_w))
        goal = state.proof.goals[gd.goals[0]]
        if not matches(goal, out_ty, state.ctx.features):
            raise TypeViolation(
                f"goal {goal.sequent_str()!r} fails the merge output type {out_ty.name!r}")
        rule = make_merge_rule(g, merge, site.port)
        seed = {"goal": site.goal_node, "m": merge}
    m = next(find_matchings(rule.lhs, g, seed=seed), None)
    if m is None:
        raise NoSuchSite(f"no {site.kind} step at {site.goal_node!r}")
    out = apply_rewrite(g, rule, m)
    out, _ = normalized(out)
    entry = _entry(state, site, None, 0, [])
    return replace(state, graph=out, trace=state.trace + (entry,))


def eval_step(state: EvalState, site: Site) -> Iterator[EvalState]:
    """The evaluation meta-step at one site, lazily, one successor per
    tactic evaluation.

    Generates the rule for the tactic's neighbourhood, matches it at the
    site (binding the goal variable), resolves the tactic function for
    the matched signature and input port, and applies the fully
    instantiated rule once per evaluation, extending the proof state with
    the new subgoals.
    """
    g, ctx = state.graph, state.ctx
    gn, t, port = site.goal_node, site.node, site.port
    if (not g.has_vertex(gn) or not g.has_vertex(t)
            or not isinstance(g.data(gn), GoalData)
            or not isinstance(g.data(t), TacticData)):
        raise NoSuchSite(f"no tactic node/goal node pair at {gn!r}/{t!r}")
    gd = g.data(gn)
    if len(gd.goals) != 1:
        raise NoSuchSite(f"goal node {gn!r} is not a singleton")
    gid = gd.goals[0]
    goal = state.proof.goals[gid]
    alpha = ctx.resolve(gd.wiretype)
    if not matches(goal, alpha, ctx.features):
        raise NoSuchSite(
            f"goal {goal.sequent_str()!r} does not match wire type {alpha.name!r}")

    rule = make_eval_rule(g, t, port)
    m = next(find_matchings(rule.lhs, g, seed={"t": t, "goal": gn}), None)
    if m is None:
        raise NoSuchSite(f"goal node {gn!r} is not directly on input {port} of {t!r}")

    sig = _neighbourhood_signature(state, t)
    tacname = g.data(t).name
    fn = ctx.tactics.lookup(tacname, sig, port)
    out_indices = sorted(e.port.index for e in g.out_edges(t))

    def run() -> Iterator[EvalState]:
        branch = 0
        for ev in fn(goal):
            proof2 = state.proof.copy()
            final = proof2.record(gid, tacname, ev)
            bindings = {f"gs{k}": tuple(goal.id for goal in cell)
                        for k, cell in zip(out_indices, final)}
            new_graph = apply_rewrite(g, rule, m, Substitution(bindings))
            new_graph, _ = normalized(new_graph)
            new_ids = [goal.id for cell in final for goal in cell]
            entry = _entry(state, site, tacname, branch, new_ids)
            yield replace(state, graph=new_graph, proof=proof2,
                          trace=state.trace + (entry,))
            branch += 1

    return run()


def successors(state: EvalState, site: Site) -> Iterator[EvalState]:
    if site.kind == "eval":
        return eval_step(state, site)
    return iter([_admin_step(state, site)])


# ---------------------------------------------------------------------------
# Batch operations (spec-level conveniences over the stepping machinery)

def unfold_goal_lists(state: EvalState) -> EvalState:
    """Rewrite every non-singleton goal list to singletons (empty lists
    are deleted and their wire restored). Idempotent; unlike site-driven
    stepping this also unfolds lists already on output wires."""
    while True:
        target = next((gn for gn in state.graph.goal_nodes()
                       if len(state.graph.data(gn).goals) != 1), None)
        if target is None:
            return state
        state = _admin_step(state, Site("unfold", target))


def propagate_merge(state: EvalState, site: Optional[Site] = None) -> EvalState:
    """Move one singleton goal node through the merge node it feeds."""
    if site is None:
        site = next((s for s in enumerate_sites(state) if s.kind == "merge"), None)
        if site is None:
            raise NoSuchSite("no goal node sits on a merge input")
    if site.kind != "merge":
        raise NoSuchSite(f"not a merge site: {site}")
    return _admin_step(state, site)


# ---------------------------------------------------------------------------
# Search: depth-first over the evaluation tree

class Evaluator:
    """Depth-first search for ENF states.

    `fuel` bounds the total number of applied steps across the whole
    search; None means unbounded (safe for acyclic graphs). When the
    budget runs out `fuel_exhausted` is set, distinguishing an aborted
    search from an exhausted one.
    """

    def __init__(self, state: EvalState, order: Optional[str] = None,
                 fuel: Optional[int] = DEFAULT_FUEL,
                 on_state: Optional[Callable[[EvalState], None]] = None) -> None:
        self.root = state
        self.order = order or state.ctx.order
        self.fuel = fuel
        self.fuel_exhausted = False
        self.on_state = on_state

    def results(self) -> Iterator[EvalState]:
        remaining = [self.fuel]

        def counted(it: Iterator[EvalState]) -> Iterator[EvalState]:
            for s in it:
                if remaining[0] is not None:
                    if remaining[0] <= 0:
                        self.fuel_exhausted = True
                        return
                    remaining[0] -= 1
                if self.on_state is not None:
                    self.on_state(s)
                yield s

        stack: list[Iterator[EvalState]] = [iter([self.root])]
        while stack:
            state = next(stack[-1], None)
            if state is None:
                stack.pop()
                continue
            if self.fuel_exhausted:
                return
            if is_enf(state):
                yield state
                continue
            site = next_site(state, self.order)
            if site is None:
                continue  # stuck: some goal can never move again
            stack.append(counted(successors(state, site)))


def eval_to_enf(state: EvalState, order: Optional[str] = None,
                fuel: Optional[int] = DEFAULT_FUEL) -> Iterator[EvalState]:
    return Evaluator(state, order=order, fuel=fuel).results()


# ---------------------------------------------------------------------------
# Interactive stepping

class NoStep(EngineError):
    pass


class HistoryEmpty(EngineError):
    pass


class Stepper:
    """One-step-at-a-time drive over the same machinery the batch search
    uses, with an explicit history stack for backtracking."""

    def __init__(self, state: EvalState, order: Optional[str] = None) -> None:
        self.state = state
        self.order = order or state.ctx.order
        self.history: list[EvalState] = []
        self._branches: Optional[list[EvalState]] = None

    def site(self) -> Optional[Site]:
        return next_site(self.state, self.order)

    def branches(self) -> list[EvalState]:
        """Successor states of the current site (eval branches; admin
        steps always offer exactly one)."""
        if self._branches is None:
            site = self.site()
            self._branches = [] if site is None else list(successors(self.state, site))
        return self._branches

    def step(self, branch: int = 0) -> EvalState:
        options = self.branches()
        if not options or branch >= len(options):
            raise NoStep(f"no step available (branch {branch} of {len(options)})")
        self.history.append(self.state)
        self.state = options[branch]
        self._branches = None
        return self.state

    def backtrack(self) -> EvalState:
        if not self.history:
            raise HistoryEmpty("already at the initial state")
        self.state = self.history.pop()
        self._branches = None
        return self.state


# ---------------------------------------------------------------------------
# Invariant helpers (used by tests and the debug server)

def conservation_ok(state: EvalState) -> bool:
    """Open proof goals and goals held in graph nodes agree as multisets."""
    in_graph = sorted(state.goal_ids_in_graph())
    in_proof = sorted(state.proof.open)
    return in_graph == in_proof
