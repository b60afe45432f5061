"""Strategy combinators.

THEN and REPEAT compose graphs; OR and ORELSE combine the evaluation
sets of two graph tactics with identical signatures. A graph tactic wraps
an inner strategy graph as a tactic: evaluating it seeds the inner graph
with the goal, runs it to ENF, and reads the output wires. The unfold
rewrite replaces a graph-tactic node by its inner graph in place, which
is how hierarchical strategies are inspected interactively.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Optional

from .engine import (
    EvalContext, EvalState, Evaluator, output_goal_lists, place_goal,
)
from .graph import (
    ArityMismatch, GraphError, MergeData, StringGraph, TacticData,
    TypeMismatch, WireData, fresh_name, plug, port_in, port_out,
)
from .kernel import Goal, ProofState
from .rewrite import RewriteRule
from .tactics import Evaluation, TacticSignature, TypedTacticFn


class CombinatorError(GraphError):
    pass


class SignatureMismatch(CombinatorError):
    pass


class StrategyRecursionError(CombinatorError):
    """Nested graph tactics exceeded the recursion cap (self-referential
    strategy)."""


def then(g: StringGraph, h: StringGraph) -> StringGraph:
    """Plug all outputs of `g` into all inputs of `h`, in order."""
    outs, ins = g.outputs(), h.inputs()
    if len(outs) != len(ins):
        raise ArityMismatch(
            f"cannot compose: {len(outs)} outputs against {len(ins)} inputs")
    return plug(g, h, list(zip(outs, ins)))


def repeat(g: StringGraph, loop: list[tuple[str, str]]) -> StringGraph:
    """Feed the named outputs back into the named inputs.

    A merge node is inserted at each target input, taking the original
    feed plus every feedback wire, so the wire fan-in invariant holds.
    Pair types must be strictly equal.
    """
    if not loop:
        return g.copy()
    for o, i in loop:
        if o not in g.outputs():
            raise ArityMismatch(f"{o!r} is not an output of the graph")
        if i not in g.inputs():
            raise ArityMismatch(f"{i!r} is not an input of the graph")
        if g.wire_type(o) != g.wire_type(i):
            raise TypeMismatch(
                f"feedback pairs {g.wire_type(o)!r} output with {g.wire_type(i)!r} input")

    by_target: dict[str, list[str]] = {}
    for o, i in loop:
        by_target.setdefault(i, []).append(o)

    out = g.copy()
    new_inputs = list(g.inputs())
    fed_back = {o for o, _ in loop}
    for target, sources in by_target.items():
        alpha = g.wire_type(target)
        m = out.add_vertex(MergeData())
        w_new = out.add_vertex(WireData(alpha))
        out.add_edge(w_new, m, port_in(1))
        for k, o in enumerate(sources, start=2):
            out.add_edge(o, m, port_in(k))
        out.add_edge(m, target, port_out(1))
        new_inputs[new_inputs.index(target)] = w_new
    new_outputs = [o for o in g.outputs() if o not in fed_back]
    out.set_io_order(new_inputs, new_outputs)
    return out


def _evaluation_key(ev: Evaluation) -> tuple:
    return tuple(tuple((g.hyps, g.concl) for g in cell) for cell in ev)


@dataclass
class GraphTactic:
    """A tactic whose behaviour is recursive evaluation of an inner
    strategy graph. Carries its own evaluation order and fuel so
    different strategies can drive different parts of a proof."""

    name: str
    inner: StringGraph
    signature: TacticSignature
    ctx: EvalContext
    order: Optional[str] = None
    fuel: Optional[int] = None

    def __post_init__(self) -> None:
        ins = self.inner.inputs()
        outs = self.inner.outputs()
        want_in = [t.name for t in self.signature.inputs]
        want_out = [t.name for t in self.signature.outputs]
        have_in = [self.inner.wire_type(v) for v in ins]
        have_out = [self.inner.wire_type(v) for v in outs]
        if have_in != want_in or have_out != want_out:
            raise SignatureMismatch(
                f"graph tactic {self.name!r}: inner boundary {have_in}->{have_out} "
                f"does not carry the declared signature {want_in}->{want_out}")

    def lifted(self, features, port: int = 1) -> TypedTacticFn:
        def tac(goal: Goal) -> Iterator[Evaluation]:
            return graph_tac_eval(self, port, goal)
        return tac


def graph_tac_eval(tactic: GraphTactic, port: int, goal: Goal) -> Iterator[Evaluation]:
    """Evaluate a graph tactic on one goal arriving at the given input.

    Seeds the inner graph with the goal, runs to ENF, and yields one
    evaluation per ENF result: the goals remaining on each output wire,
    in wire-position order.
    """
    ctx = tactic.ctx
    if not matches_input(tactic, port, goal):
        return
    if ctx.depth + 1 > ctx.max_depth:
        raise StrategyRecursionError(
            f"graph tactics nested deeper than {ctx.max_depth}")
    ctx.depth += 1
    try:
        proof = ProofState()
        proof.add_root(goal)
        state = EvalState(tactic.inner, proof, ctx)
        state = place_goal(state, tactic.inner.inputs()[port - 1], goal)
        fuel = tactic.fuel if tactic.fuel is not None else ctx.fuel
        search = Evaluator(state, order=tactic.order or ctx.order, fuel=fuel)
        for enf in search.results():
            yield tuple(tuple(goals) for _, goals in output_goal_lists(enf))
    finally:
        ctx.depth -= 1


def matches_input(tactic: GraphTactic, port: int, goal: Goal) -> bool:
    from .goaltypes import matches
    alpha = tactic.signature.inputs[port - 1]
    return matches(goal, alpha, tactic.ctx.features)


@dataclass
class _Combinator:
    name: str
    first: GraphTactic
    second: GraphTactic

    def __post_init__(self) -> None:
        if self.first.signature.key() != self.second.signature.key():
            raise SignatureMismatch(
                f"{type(self).__name__} operands disagree: "
                f"{self.first.signature} vs {self.second.signature}")
        self.signature = self.first.signature


class OrTactic(_Combinator):
    """Union of both operands' evaluation sets."""

    def lifted(self, features, port: int = 1) -> TypedTacticFn:
        def tac(goal: Goal) -> Iterator[Evaluation]:
            return or_eval(self.first, self.second, port, goal)
        return tac


class OrElseTactic(_Combinator):
    """First operand's evaluations; the second is consulted (and its
    tactics run) only when the first yields none."""

    def lifted(self, features, port: int = 1) -> TypedTacticFn:
        def tac(goal: Goal) -> Iterator[Evaluation]:
            return orelse_eval(self.first, self.second, port, goal)
        return tac


def or_eval(g: GraphTactic, h: GraphTactic, port: int, goal: Goal) -> Iterator[Evaluation]:
    seen: set[tuple] = set()
    for ev in itertools.chain(graph_tac_eval(g, port, goal),
                              graph_tac_eval(h, port, goal)):
        key = _evaluation_key(ev)
        if key not in seen:
            seen.add(key)
            yield ev


def orelse_eval(g: GraphTactic, h: GraphTactic, port: int, goal: Goal) -> Iterator[Evaluation]:
    first = graph_tac_eval(g, port, goal)
    head = next(first, None)
    if head is not None:
        yield head
        yield from first
        return
    yield from graph_tac_eval(h, port, goal)


# ---------------------------------------------------------------------------
# Unfolding a graph-tactic node into its inner graph

def unfold(tactic: GraphTactic) -> RewriteRule:
    """A rule replacing a node named after the tactic by its inner graph
    on the same boundary.

    A bare pass-through wire of the inner graph (one wire-vertex that is
    both input and output) splits into the two boundary stubs joined by a
    wire-wire edge; normalisation fuses it back after application.
    """
    inner = tactic.inner
    lhs = StringGraph()
    lhs.add_vertex(TacticData(tactic.name), "t")
    in_ids, out_ids = [], []
    for j, v in enumerate(inner.inputs(), start=1):
        wid = f"bin{j}"
        lhs.add_vertex(WireData(inner.wire_type(v)), wid)
        lhs.add_edge(wid, "t", port_in(j))
        in_ids.append(wid)
    for k, v in enumerate(inner.outputs(), start=1):
        wid = f"bout{k}"
        lhs.add_vertex(WireData(inner.wire_type(v)), wid)
        lhs.add_edge("t", wid, port_out(k))
        out_ids.append(wid)
    lhs.set_io_order(in_ids, out_ids)

    rhs = StringGraph()
    for wid, v in zip(in_ids + out_ids, inner.inputs() + inner.outputs()):
        rhs.add_vertex(WireData(inner.wire_type(v)), wid)
    in_map = dict(zip(inner.inputs(), in_ids))
    out_map = dict(zip(inner.outputs(), out_ids))
    passthrough = set(inner.inputs()) & set(inner.outputs())
    ren: dict[str, str] = {}
    used = set(rhs.vertices()) | {"t"}
    for v in inner.vertices():
        if v in passthrough:
            continue
        if v in in_map:
            ren[v] = in_map[v]
        elif v in out_map:
            ren[v] = out_map[v]
        else:
            ren[v] = fresh_name(v, used)
            used.add(ren[v])
            rhs.add_vertex(inner.data(v), ren[v])
    for e in inner.edges():
        rhs.add_edge(ren[e.src], ren[e.tgt], e.port)
    for v in passthrough:
        rhs.add_edge(in_map[v], out_map[v])
    rhs.set_io_order(in_ids, out_ids)
    return RewriteRule(lhs, rhs, name=f"unfold:{tactic.name}")


def unfold_rules(entry) -> list[RewriteRule]:
    """Unfold rules for a registry entry: one for a graph tactic, one per
    operand for an OR/ORELSE combinator."""
    if isinstance(entry, GraphTactic):
        return [unfold(entry)]
    if isinstance(entry, _Combinator):
        rules = []
        for i, op in enumerate((entry.first, entry.second)):
            proxy = GraphTactic(entry.name, op.inner, entry.signature, op.ctx)
            rule = unfold(proxy)
            rule.name = f"unfold:{entry.name}[{i}]"
            rules.append(rule)
        return rules
    raise CombinatorError(f"cannot unfold {entry!r}")
