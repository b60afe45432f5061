from __future__ import annotations

import random

import pytest

from strategraph.graph import (
    GoalData, MergeData, StringGraph, TacticData, Var, WireData,
    check_well_formed, find_matchings, is_isomorphic, verify_matching,
    port_in, port_out,
)
from strategraph.rewrite import (
    COPY, DROP, KILL, InvalidMatch, PartialInstantiation, RewriteRule,
    Substitution, UnknownBangBox, apply_rewrite, bb_instantiate,
    eval_rule_template, goal_list_empty_rule, goal_list_split_rule,
    make_eval_rule, make_merge_rule, merge_fusion_rule,
)

from conftest import embed_in_host, identity_matching, random_rule


def wire(g, ty="a", vid=None):
    return g.add_vertex(WireData(ty), vid)


def _goal_chain_host(goals: tuple) -> StringGraph:
    """w1 -> [goals] -> w2, an isolated goal node on a wire."""
    g = StringGraph()
    w1 = wire(g, "any", "w1")
    gn = g.add_vertex(GoalData(goals, "any"), "host_gn")
    w2 = wire(g, "any", "w2")
    g.add_edge(w1, gn, port_in(1))
    g.add_edge(gn, w2, port_out(1))
    g.set_io_order([w1], [w2])
    return g


# ---------------------------------------------------------------------------
# Goal-list rules

def test_goal_list_split_rule_two_goals():
    host = _goal_chain_host(("g1", "g2"))
    rule = goal_list_split_rule(2)
    m = next(find_matchings(rule.lhs, host))
    assert m.subst["v1"] == "g1" and m.subst["v2"] == "g2"
    out = apply_rewrite(host, rule, m)
    nodes = [out.data(v) for v in out.goal_nodes()]
    assert sorted(d.goals for d in nodes) == [("g1",), ("g2",)]
    # list order is laid out along the wire: g1 upstream of g2
    first = next(v for v in out.goal_nodes() if out.data(v).goals == ("g1",))
    walk = out.out_edges(first)[0].tgt
    assert any(isinstance(out.data(e.tgt), GoalData) and out.data(e.tgt).goals == ("g2",)
               for e in out.out_edges(walk))


def test_goal_list_empty_rule_restores_wire():
    host = _goal_chain_host(())
    rule = goal_list_empty_rule()
    m = next(find_matchings(rule.lhs, host))
    out = apply_rewrite(host, rule, m)
    assert out.goal_nodes() == []
    # the two boundary wires survive, joined by a wire-wire edge
    assert len(out.vertices()) == 2
    assert len(out.edges()) == 1


def test_identity_rule_yields_isomorphic_graph():
    def tac_graph():
        g = StringGraph()
        t = g.add_vertex(TacticData("f"), "t")
        w1, w2 = wire(g, "a", "wi"), wire(g, "a", "wo")
        g.add_edge(w1, t, port_in(1))
        g.add_edge(t, w2, port_out(1))
        g.set_io_order([w1], [w2])
        return g

    rule = RewriteRule(tac_graph(), tac_graph())
    host, m = embed_in_host(random.Random(1), tac_graph())
    out = apply_rewrite(host, rule, m)
    assert is_isomorphic(out, host)


def test_merge_fusion_rule_on_three_input_tree():
    # host: two chained merges forming a 3-input tree
    host = StringGraph()
    m_in = host.add_vertex(MergeData(), "m_in")
    m_out = host.add_vertex(MergeData(), "m_out")
    a, b, c = (wire(host, "a", x) for x in ("wa", "wb", "wc"))
    host.add_edge(a, m_in, port_in(1))
    host.add_edge(b, m_in, port_in(2))
    link = wire(host, "a", "wl")
    host.add_edge(m_in, link, port_out(1))
    host.add_edge(link, m_out, port_in(1))
    host.add_edge(c, m_out, port_in(2))
    out_w = wire(host, "a", "wo")
    host.add_edge(m_out, out_w, port_out(1))
    host.set_io_order([a, b, c], [out_w])

    rule = merge_fusion_rule(outer_arity=2, inner_arity=2, at=1)
    m = next(find_matchings(rule.lhs, host))
    out = apply_rewrite(host, rule, m)
    merges = [v for v in out.vertices() if isinstance(out.data(v), MergeData)]
    assert len(merges) == 1
    assert len(out.in_edges(merges[0])) == 3
    assert set(out.inputs()) == {"wa", "wb", "wc"}
    assert set(out.outputs()) == {"wo"}


# ---------------------------------------------------------------------------
# Error paths

def test_apply_rewrite_invalid_match():
    host = _goal_chain_host(("g1",))
    rule = goal_list_split_rule(2)
    bogus = identity_matching(rule.lhs)  # maps pattern ids onto themselves
    bogus.subst.update({"alpha": "any", "v1": "g1", "v2": "g2"})
    with pytest.raises(InvalidMatch):
        apply_rewrite(host, rule, bogus)


def test_apply_rewrite_partial_instantiation():
    host = StringGraph()
    w_in = wire(host, "a", "wi")
    t = host.add_vertex(TacticData("f"), "t")
    host.add_edge(w_in, t, port_in(1))
    w_out = wire(host, "a", "wo")
    host.add_edge(t, w_out, port_out(1))
    gn = host.add_vertex(GoalData(("g1",), "a"), "gn")
    # splice the goal onto the input wire
    host.remove_edge(host.out_edges(w_in)[0])
    mid = wire(host, "a", "wm")
    host.add_edge(w_in, gn, port_in(1))
    host.add_edge(gn, mid, port_out(1))
    host.add_edge(mid, t, port_in(1))

    rule = make_eval_rule(host, "t", 1)
    m = next(find_matchings(rule.lhs, host, seed={"t": "t", "goal": "gn"}))
    with pytest.raises(PartialInstantiation):
        apply_rewrite(host, rule, m)  # gs1 left unbound


# ---------------------------------------------------------------------------
# Generated eval rules

def _host_with_tactic(name: str, in_types: list[str], out_types: list[str]) -> StringGraph:
    g = StringGraph()
    t = g.add_vertex(TacticData(name), "t")
    ins, outs = [], []
    for i, ty in enumerate(in_types, start=1):
        w = wire(g, ty, f"wi{i}")
        g.add_edge(w, t, port_in(i))
        ins.append(w)
    for k, ty in enumerate(out_types, start=1):
        w = wire(g, ty, f"wo{k}")
        g.add_edge(t, w, port_out(k))
        outs.append(w)
    g.set_io_order(ins, outs)
    return g


def test_make_eval_rule_two_outputs():
    host = _host_with_tactic("induct", ["inductable"], ["notstep", "step"])
    rule = make_eval_rule(host, "t", 1)
    rhs_goal_vars = [host_d.goals for v in rule.rhs.goal_nodes()
                     for host_d in [rule.rhs.data(v)]]
    assert sorted(v.name for v in rhs_goal_vars) == ["gs1", "gs2"]
    lhs_goals = [rule.lhs.data(v).goals for v in rule.lhs.goal_nodes()]
    assert lhs_goals == [(Var("g"),)]


def test_make_eval_rule_single_output():
    host = _host_with_tactic("f", ["any"], ["any"])
    rule = make_eval_rule(host, "t", 1)
    assert [rule.rhs.data(v).goals for v in rule.rhs.goal_nodes()] == [Var("gs1")]


def test_make_eval_rule_three_outputs_types():
    host = _host_with_tactic("split", ["any"], ["imp", "conj", "other"])
    rule = make_eval_rule(host, "t", 1)
    out_types = [rule.rhs.wire_type(v) for v in rule.rhs.outputs()]
    assert out_types == ["imp", "conj", "other"]
    assert len(rule.rhs.goal_nodes()) == 3


def test_make_merge_rule_moves_goal_downstream():
    g = StringGraph()
    m = g.add_vertex(MergeData(), "m")
    w1, w2 = wire(g, "any", "w1"), wire(g, "any", "w2")
    g.add_edge(w1, m, port_in(1))
    g.add_edge(w2, m, port_in(2))
    wo = wire(g, "any", "wo")
    g.add_edge(m, wo, port_out(1))
    gn = g.add_vertex(GoalData(("g1",), "any"), "gn")
    g.remove_edge(g.out_edges(w1)[0])
    mid = wire(g, "any", "mid")
    g.add_edge(w1, gn, port_in(1))
    g.add_edge(gn, mid, port_out(1))
    g.add_edge(mid, m, port_in(1))
    g.set_io_order([w1, w2], [wo])

    rule = make_merge_rule(g, "m", 1)
    match = next(find_matchings(rule.lhs, g, seed={"m": "m", "goal": "gn"}))
    out = apply_rewrite(g, rule, match)
    [new_gn] = out.goal_nodes()
    assert out.data(new_gn).goals == ("g1",)
    # the goal now sits between the merge and the output wire
    up = out.in_edges(new_gn)[0].src
    assert out.in_edges(up)[0].src in [v for v in out.vertices()
                                       if isinstance(out.data(v), MergeData)]


# ---------------------------------------------------------------------------
# The randomized DPO suite

def test_dpo_random_suite():
    rng = random.Random(2024)
    cases = 0
    while cases < 200:
        rule = random_rule(rng)
        host, m = embed_in_host(rng, rule.lhs)
        assert verify_matching(rule.lhs, host, m)
        result = apply_rewrite(host, rule, m)

        # untouched subgraph is bit-identical
        touched = set(rule.lhs.vertices())
        for v in host.vertices():
            if v not in touched:
                assert result.data(v) == host.data(v)
        matched = set(m.emap.values())
        assert set(host.edges()) - matched <= set(result.edges())

        # boundary vertices survive with their typing
        for b in rule.lhs_inputs() + rule.lhs_outputs():
            assert result.wire_type(b) == host.wire_type(b)

        assert check_well_formed(result) == []

        # reverse application at the residual match restores the host
        rev = rule.reversed()
        seed = {b: b for b in rule.lhs_inputs() + rule.lhs_outputs()}
        restored = False
        for m2 in find_matchings(rule.rhs, result, seed=seed):
            back = apply_rewrite(result, rev, m2)
            if is_isomorphic(back, host):
                restored = True
                break
        assert restored
        cases += 1


def test_rewrite_keeps_graph_boundary_when_interior_matched():
    rng = random.Random(77)
    seen = 0
    while seen < 30:
        rule = random_rule(rng)
        host, m = embed_in_host(rng, rule.lhs)
        # only consider hosts where every pattern boundary vertex got an
        # attachment, so the match touches no graph inputs/outputs
        pat_boundary = set(rule.lhs_inputs()) | set(rule.lhs_outputs())
        if pat_boundary & (set(host.inputs()) | set(host.outputs())):
            continue
        result = apply_rewrite(host, rule, m)
        assert set(result.inputs()) == set(host.inputs())
        assert set(result.outputs()) == set(host.outputs())
        seen += 1


# ---------------------------------------------------------------------------
# !-box instantiation

def test_bb_copy_freshens_phi_variables():
    lhs, rhs = StringGraph(), StringGraph()
    for side in (lhs, rhs):
        side.add_vertex(WireData(Var("k")), "w")
    from strategraph.rewrite import BangBox
    rule = RewriteRule(lhs, rhs, bang_boxes=[
        BangBox("b", frozenset({"w"}), frozenset({"w"}), (("w", "w"),),
                frozenset({"k"}))])
    out = bb_instantiate(rule, [(COPY, "b")])
    types = [out.lhs.data(v).wiretype for v in out.lhs.vertices()]
    assert len(types) == 2
    assert len({t.name for t in types}) == 2  # distinct fresh variables


def test_bb_drop_output_box_gives_zero_output_rule():
    template = eval_rule_template()
    out = bb_instantiate(template, [(DROP, "outs"), (DROP, "ins")])
    assert out.rhs_outputs() == []
    assert out.lhs_outputs() == []
    assert not out.bang_boxes
    assert len(out.rhs.goal_nodes()) == 0


def test_bb_kill_keeps_contents_once():
    template = eval_rule_template()
    out = bb_instantiate(template, [(KILL, "outs"), (DROP, "ins")])
    assert len(out.rhs_outputs()) == 1
    assert len(out.rhs.goal_nodes()) == 1
    assert not out.bang_boxes


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
def test_bb_copy_arity_equals_op_count(k):
    template = eval_rule_template()
    ops = [(COPY, "outs")] * k + [(DROP, "outs"), (DROP, "ins")]
    out = bb_instantiate(template, ops)
    assert len(out.rhs_outputs()) == k
    assert len(out.lhs_outputs()) == k
    assert len(out.rhs.goal_nodes()) == k


def test_bb_unknown_box():
    template = eval_rule_template()
    with pytest.raises(UnknownBangBox):
        bb_instantiate(template, [(COPY, "nonesuch")])


def test_template_instantiation_matches_direct_rule():
    template = eval_rule_template()
    inst = bb_instantiate(template, [(COPY, "outs"), (COPY, "outs"),
                                     (DROP, "outs"), (DROP, "ins")])
    subst = Substitution({
        "t": "induct", "alpha": "inductable", "i": 1,
        "bk_c1": "notstep", "k_c1": 1, "gs_c1": Var("gs1"),
        "bk_c2": "step", "k_c2": 2, "gs_c2": Var("gs2"),
    })
    lhs = subst.apply_graph(inst.lhs)
    rhs = subst.apply_graph(inst.rhs)

    host = _host_with_tactic("induct", ["inductable"], ["notstep", "step"])
    direct = make_eval_rule(host, "t", 1)
    assert is_isomorphic(lhs, direct.lhs)
    assert is_isomorphic(rhs, direct.rhs)
