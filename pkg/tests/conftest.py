from __future__ import annotations

import random

import pytest

from strategraph.engine import EvalContext
from strategraph.goaltypes import GoalTypeTable, builtin_registry
from strategraph.graph import (
    Matching, Signature, StringGraph, TacticData, WireData, fresh_name,
    port_in, port_out,
)
from strategraph.rewrite import RewriteRule
from strategraph.strategy import resolve_strategy
from strategraph.tactics import AtomicTactic, TacticRegistry, TacticSignature

# Arities used by the random generators: name -> (inputs, outputs).
ARITIES = {"f": (1, 1), "g2": (2, 1), "h2": (1, 2)}


def build_ctx(tactics=(), goaltypes=()) -> EvalContext:
    """A minimal session context: built-in features, `any` plus the given
    goal types, and the given (name, in_names, out_names, primitive)
    tactics."""
    feats = builtin_registry()
    types = GoalTypeTable(feats)
    for gt in goaltypes:
        types.define(gt)
    sig = Signature(types=set(types.names()))
    registry = TacticRegistry(feats)
    for name, ins, outs, prim in tactics:
        tsig = TacticSignature(tuple(types.get(t) for t in ins),
                               tuple(types.get(t) for t in outs))
        sig.declare(name, list(ins), list(outs))
        registry.register(AtomicTactic(name, tsig, prim))
    return EvalContext(sig, types, feats, registry)


def single_tactic_graph(name: str, in_ty: str = "any", out_tys=("any",)) -> StringGraph:
    g = StringGraph()
    t = g.add_vertex(TacticData(name), "t")
    w_in = g.add_vertex(WireData(in_ty), "w_in")
    g.add_edge(w_in, t, port_in(1))
    outs = []
    for k, ty in enumerate(out_tys, start=1):
        w = g.add_vertex(WireData(ty), f"w_out{k}")
        g.add_edge(t, w, port_out(k))
        outs.append(w)
    g.set_io_order([w_in], outs)
    return g


@pytest.fixture
def intro_v1():
    return resolve_strategy("intro-v1")


@pytest.fixture
def intro_v2():
    return resolve_strategy("intro-v2")


@pytest.fixture
def intro_v3():
    return resolve_strategy("intro-v3")


@pytest.fixture
def induct_example():
    return resolve_strategy("induct-example")


# ---------------------------------------------------------------------------
# Random string graphs with a prescribed boundary (single wire type "a").
#
# Producers (graph inputs, node out-ports) are paired bijectively with
# consumers (graph outputs, node in-ports), which keeps every port wired
# exactly once and every wire-vertex within fan-in/fan-out one.

def random_graph_on_boundary(rng: random.Random, in_ids: list[str],
                             out_ids: list[str],
                             max_nodes: int = 3) -> StringGraph:
    names = list(ARITIES)
    for _ in range(500):
        nodes = [rng.choice(names) for _ in range(rng.randint(0, max_nodes))]
        produce = len(in_ids) + sum(ARITIES[n][1] for n in nodes)
        consume = len(out_ids) + sum(ARITIES[n][0] for n in nodes)
        if produce == consume:
            break
    else:
        nodes = []
        if len(in_ids) != len(out_ids):
            raise AssertionError("cannot balance boundary")

    g = StringGraph()
    for w in in_ids + out_ids:
        g.add_vertex(WireData("a"), w)
    node_ids = []
    for k, name in enumerate(nodes):
        node_ids.append(g.add_vertex(TacticData(name), f"n{k}"))

    producers: list[tuple] = [("inp", w) for w in in_ids]
    consumers: list[tuple] = [("out", w) for w in out_ids]
    for nid, name in zip(node_ids, nodes):
        n_in, n_out = ARITIES[name]
        producers += [("port", nid, i) for i in range(1, n_out + 1)]
        consumers += [("port", nid, i) for i in range(1, n_in + 1)]
    rng.shuffle(consumers)

    for prod, cons in zip(producers, consumers):
        if prod[0] == "inp" and cons[0] == "out":
            g.add_edge(prod[1], cons[1])
        elif prod[0] == "inp":
            g.add_edge(prod[1], cons[1], port_in(cons[2]))
        elif cons[0] == "out":
            g.add_edge(prod[1], cons[1], port_out(prod[2]))
        else:
            w = g.add_vertex(WireData("a"))
            g.add_edge(prod[1], w, port_out(prod[2]))
            g.add_edge(w, cons[1], port_in(cons[2]))
    g.set_io_order(in_ids, out_ids)
    return g


def random_rule(rng: random.Random, max_io: int = 3) -> RewriteRule:
    n_in = rng.randint(1, max_io)
    n_out = rng.randint(1, max_io)
    in_ids = [f"bi{i}" for i in range(n_in)]
    out_ids = [f"bo{i}" for i in range(n_out)]
    lhs = random_graph_on_boundary(rng, in_ids, out_ids)
    rhs = random_graph_on_boundary(rng, in_ids, out_ids)
    return RewriteRule(lhs, rhs)


def identity_matching(pat: StringGraph) -> Matching:
    return Matching({v: v for v in pat.vertices()},
                    {e: e for e in pat.edges()}, {})


def embed_in_host(rng: random.Random, lhs: StringGraph) -> tuple[StringGraph, Matching]:
    """A host containing `lhs` verbatim, with random structure attached at
    the boundary and a disconnected junk component. The identity map is a
    valid matching."""
    host = lhs.copy()
    used = set(host.vertices())

    def fresh(base: str) -> str:
        vid = fresh_name(base, used)
        used.add(vid)
        return vid

    ins = list(lhs.inputs())
    outs = list(lhs.outputs())
    new_inputs = []
    for w in ins:
        if w in outs or rng.random() < 0.4:
            new_inputs.append(w)
            continue
        feeder = host.add_vertex(TacticData("f"), fresh("att"))
        src = host.add_vertex(WireData("a"), fresh("hx"))
        host.add_edge(src, feeder, port_in(1))
        host.add_edge(feeder, w, port_out(1))
        new_inputs.append(src)
    new_outputs = []
    for w in outs:
        if w in ins or rng.random() < 0.4:
            new_outputs.append(w)
            continue
        sink = host.add_vertex(TacticData("f"), fresh("att"))
        tgt = host.add_vertex(WireData("a"), fresh("hx"))
        host.add_edge(w, sink, port_in(1))
        host.add_edge(sink, tgt, port_out(1))
        new_outputs.append(tgt)
    if rng.random() < 0.5:
        junk = host.add_vertex(TacticData("f"), fresh("junk"))
        a = host.add_vertex(WireData("a"), fresh("hx"))
        b = host.add_vertex(WireData("a"), fresh("hx"))
        host.add_edge(a, junk, port_in(1))
        host.add_edge(junk, b, port_out(1))
        new_inputs.append(a)
        new_outputs.append(b)
    host.set_io_order(new_inputs, new_outputs)
    return host, identity_matching(lhs)
