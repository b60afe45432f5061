"""Rewrite rules and the three-step rewrite procedure.

A rule is a pair of string graphs sharing a boundary. Rewriting renames
the right-hand side so its interior is fresh in the host, deletes the
matched interior of the left-hand side, and glues the right-hand side in
along the preserved boundary. Rules may carry free variables in vertex
data (instantiated through a Substitution) and !-boxes marking repeatable
subgraphs (instantiated through COPY/DROP/KILL/MERGE operations).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .graph import (
    IN, OUT, GoalData, GraphError, Matching, MergeData, PortLabel,
    StringGraph, TacticData, Var, WireData, fresh_name, port_in, port_out,
    subst_data, verify_matching,
)


class RewriteError(GraphError):
    pass


class InvalidMatch(RewriteError):
    """The supplied matching does not embed the instantiated LHS."""


class PartialInstantiation(RewriteError):
    """Free variables or !-boxes remain where concrete data is required."""


class UnknownBangBox(RewriteError):
    pass


class MismatchedCorrespondence(RewriteError):
    """LHS and RHS !-box contents do not pair up."""


# ---------------------------------------------------------------------------
# Substitution

@dataclass
class Substitution:
    """Bindings from free-variable names to data values.

    Values are wire-type names, tactic names, goal ids, tuples of goal
    ids, or concrete port indices. Application is idempotent: applying a
    substitution to an already-instantiated value is the identity.
    """

    bindings: dict[str, object] = field(default_factory=dict)

    def extended(self, more: dict[str, object]) -> Substitution:
        merged = dict(self.bindings)
        for k, v in more.items():
            if k in merged and merged[k] != v:
                raise RewriteError(f"conflicting binding for {k!r}")
            merged[k] = v
        return Substitution(merged)

    def value(self, v):
        if isinstance(v, Var) and v.name in self.bindings:
            return self.bindings[v.name]
        if isinstance(v, str) and v in self.bindings:
            # symbolic port index
            return self.bindings[v]
        return v

    def apply_port(self, port: Optional[PortLabel]) -> Optional[PortLabel]:
        if port is None or isinstance(port.index, int):
            return port
        idx = self.bindings.get(port.index, port.index)
        return PortLabel(port.direction, idx)

    def apply_graph(self, g: StringGraph) -> StringGraph:
        out = StringGraph()
        for v in g.vertices():
            out.add_vertex(subst_data(g.data(v), self.bindings), v)
        for e in g.edges():
            out.add_edge(e.src, e.tgt, self.apply_port(e.port))
        out.set_io_order(g.inputs(), g.outputs())
        return out


def free_vars(g: StringGraph) -> set[str]:
    names: set[str] = set()

    def val(v) -> None:
        if isinstance(v, Var):
            names.add(v.name)

    for v in g.vertices():
        d = g.data(v)
        if isinstance(d, WireData):
            val(d.wiretype)
        elif isinstance(d, TacticData):
            val(d.name)
        elif isinstance(d, GoalData):
            val(d.wiretype)
            if isinstance(d.goals, Var):
                val(d.goals)
            else:
                for x in d.goals:
                    val(x)
    for e in g.edges():
        if e.port is not None and isinstance(e.port.index, str):
            names.add(e.port.index)
    return names


# ---------------------------------------------------------------------------
# !-boxes

@dataclass
class BangBox:
    """A marked repeatable subgraph spanning both sides of a rule.

    `boundary_pairs` relates boxed boundary wire-vertices on the LHS to
    their RHS counterparts; when the box is instantiated these become
    ordinary shared-boundary vertices. `fresh` names the variables bound
    fresh per copy (the phi-marked names, including symbolic port
    indices).
    """

    name: str
    lhs_vertices: frozenset[str]
    rhs_vertices: frozenset[str]
    boundary_pairs: tuple[tuple[str, str], ...] = ()
    fresh: frozenset[str] = frozenset()


class RewriteRule:
    """A left graph, a right graph, and a shared boundary.

    The boundary vertices of both sides carry identical ids (pass
    `boundary_map` to rename an RHS with differing ids on construction).
    """

    def __init__(self, lhs: StringGraph, rhs: StringGraph,
                 boundary_map: Optional[dict[str, str]] = None,
                 bang_boxes: Iterable[BangBox] = (),
                 name: str = "") -> None:
        if boundary_map is not None:
            inverse = {r: l for l, r in boundary_map.items()}
            if len(inverse) != len(boundary_map):
                raise RewriteError("boundary_map is not a bijection")
            rhs = rhs.renamed(inverse)
        self.lhs = lhs
        self.rhs = rhs
        self.name = name
        self.bang_boxes: dict[str, BangBox] = {}
        for bb in bang_boxes:
            if bb.name in self.bang_boxes:
                raise RewriteError(f"duplicate !-box {bb.name!r}")
            self.bang_boxes[bb.name] = bb
        self._boxed_lhs = {v for bb in self.bang_boxes.values() for v in bb.lhs_vertices}
        self._boxed_rhs = {v for bb in self.bang_boxes.values() for v in bb.rhs_vertices}
        self._validate()
        self._copies = 0

    # Boundary of a rule side, excluding !-box contents: box contents only
    # become part of the concrete boundary once instantiated.
    def lhs_inputs(self) -> list[str]:
        return [v for v in self.lhs.inputs() if v not in self._boxed_lhs]

    def lhs_outputs(self) -> list[str]:
        return [v for v in self.lhs.outputs() if v not in self._boxed_lhs]

    def rhs_inputs(self) -> list[str]:
        return [v for v in self.rhs.inputs() if v not in self._boxed_rhs]

    def rhs_outputs(self) -> list[str]:
        return [v for v in self.rhs.outputs() if v not in self._boxed_rhs]

    def _validate(self) -> None:
        if set(self.lhs_inputs()) != set(self.rhs_inputs()):
            raise RewriteError("rule sides disagree on inputs")
        if set(self.lhs_outputs()) != set(self.rhs_outputs()):
            raise RewriteError("rule sides disagree on outputs")
        for v in set(self.lhs_inputs()) | set(self.lhs_outputs()):
            if self.lhs.wire_type(v) != self.rhs.wire_type(v):
                raise RewriteError(f"boundary vertex {v!r} changes wire type across the rule")
        for bb in self.bang_boxes.values():
            if not bb.lhs_vertices <= set(self.lhs.vertices()):
                raise MismatchedCorrespondence(f"!-box {bb.name!r} names vertices missing from the LHS")
            if not bb.rhs_vertices <= set(self.rhs.vertices()):
                raise MismatchedCorrespondence(f"!-box {bb.name!r} names vertices missing from the RHS")
            for l, r in bb.boundary_pairs:
                if l not in bb.lhs_vertices or r not in bb.rhs_vertices:
                    raise MismatchedCorrespondence(
                        f"!-box {bb.name!r} pairs vertices outside its contents")

    def boundary_map(self) -> dict[str, str]:
        return {v: v for v in set(self.lhs_inputs()) | set(self.lhs_outputs())}

    def reversed(self) -> RewriteRule:
        return RewriteRule(self.rhs, self.lhs, bang_boxes=[
            BangBox(bb.name, bb.rhs_vertices, bb.lhs_vertices,
                    tuple((r, l) for l, r in bb.boundary_pairs), bb.fresh)
            for bb in self.bang_boxes.values()
        ], name=f"-{self.name}" if self.name else "")

    def is_concrete(self) -> bool:
        return not self.bang_boxes and not free_vars(self.lhs) and not free_vars(self.rhs)

    def __repr__(self) -> str:
        return f"RewriteRule({self.name or '?'}: {self.lhs!r} ~> {self.rhs!r})"


# ---------------------------------------------------------------------------
# !-box instantiation

COPY, DROP, KILL, MERGE = "COPY", "DROP", "KILL", "MERGE"


def bb_instantiate(rule: RewriteRule, ops: list[tuple]) -> RewriteRule:
    """Instantiate !-boxes by a sequence of operations.

    Each op is ("COPY", box), ("DROP", box), ("KILL", box) or
    ("MERGE", box_a, box_b). COPY adds a concrete copy of the contents
    with phi-marked variables freshened; DROP removes box and contents;
    KILL removes the box marker keeping the contents once; MERGE combines
    two boxes. Operations act on both sides of the rule at once.
    """
    lhs, rhs = rule.lhs.copy(), rule.rhs.copy()
    boxes = dict(rule.bang_boxes)
    copies = rule._copies

    def need(name: str) -> BangBox:
        if name not in boxes:
            raise UnknownBangBox(f"no !-box named {name!r}")
        return boxes[name]

    def freshen_vars(counter: int):
        def ren(v):
            if isinstance(v, Var) and v.name in box.fresh:
                return Var(f"{v.name}_c{counter}")
            return v

        def ren_port(p: Optional[PortLabel]) -> Optional[PortLabel]:
            if p is None or not isinstance(p.index, str) or p.index not in box.fresh:
                return p
            return PortLabel(p.direction, f"{p.index}_c{counter}")

        def ren_data(d):
            if isinstance(d, WireData):
                return WireData(ren(d.wiretype))
            if isinstance(d, TacticData):
                return TacticData(ren(d.name))
            if isinstance(d, GoalData):
                goals = d.goals
                if isinstance(goals, Var):
                    goals = ren(goals)
                else:
                    goals = tuple(ren(x) for x in goals)
                return GoalData(goals, ren(d.wiretype))
            return d

        return ren_data, ren_port

    def copy_side(g: StringGraph, contents: frozenset[str], ren_data, ren_port,
                  used: set[str]) -> dict[str, str]:
        vmap: dict[str, str] = {}
        for v in contents:
            nv = fresh_name(v, used)
            used.add(nv)
            vmap[v] = nv
            g.add_vertex(ren_data(g.data(v)), nv)
        for e in list(g.edges()):
            s_in, t_in = e.src in contents, e.tgt in contents
            if not (s_in or t_in):
                continue
            g.add_edge(vmap.get(e.src, e.src), vmap.get(e.tgt, e.tgt), ren_port(e.port))
        return vmap

    for op in ops:
        kind = op[0]
        if kind == MERGE:
            a, b = need(op[1]), need(op[2])
            if a.name == b.name:
                raise RewriteError("cannot MERGE a !-box with itself")
            del boxes[b.name]
            boxes[a.name] = BangBox(
                a.name, a.lhs_vertices | b.lhs_vertices,
                a.rhs_vertices | b.rhs_vertices,
                a.boundary_pairs + b.boundary_pairs, a.fresh | b.fresh)
            continue
        box = need(op[1])
        if kind == COPY:
            copies += 1
            ren_data, ren_port = freshen_vars(copies)
            used = set(lhs.vertices()) | set(rhs.vertices())
            lmap = copy_side(lhs, box.lhs_vertices, ren_data, ren_port, used)
            rmap = copy_side(rhs, box.rhs_vertices, ren_data, ren_port, used)
            # copied boundary pairs become shared-boundary vertices
            for l, r in box.boundary_pairs:
                rhs2 = rhs.renamed({rmap[r]: lmap[l]})
                rhs = rhs2
        elif kind == DROP:
            for v in box.lhs_vertices:
                lhs.remove_vertex(v)
            for v in box.rhs_vertices:
                rhs.remove_vertex(v)
            del boxes[box.name]
        elif kind == KILL:
            for l, r in box.boundary_pairs:
                rhs = rhs.renamed({r: l})
            del boxes[box.name]
        else:
            raise RewriteError(f"unknown !-box operation {kind!r}")

    out = RewriteRule(lhs, rhs, bang_boxes=boxes.values(), name=rule.name)
    out._copies = copies
    return out


# ---------------------------------------------------------------------------
# Applying a rewrite

def apply_rewrite(g: StringGraph, rule: RewriteRule, m: Matching,
                  subst: Optional[Substitution] = None) -> StringGraph:
    """Rewrite `g` at the matched site.

    The substitution (together with the bindings collected by the
    matching) must instantiate both rule sides fully. The result is `g`
    with the interior of the matched LHS removed and a freshly renamed
    copy of the RHS glued in along the preserved boundary.
    """
    if rule.bang_boxes:
        raise PartialInstantiation(
            f"rule still carries !-boxes: {sorted(rule.bang_boxes)}")
    full = Substitution(dict(m.subst))
    if subst is not None:
        full = full.extended(subst.bindings)

    lhs = full.apply_graph(rule.lhs)
    remaining = free_vars(lhs)
    if remaining:
        raise PartialInstantiation(f"LHS variables left unbound: {sorted(remaining)}")
    check = Matching(m.vmap, m.emap, {})
    if not verify_matching(lhs, g, check):
        raise InvalidMatch("matching does not embed the instantiated LHS "
                           "(or violates the boundary condition)")

    rhs = full.apply_graph(rule.rhs)
    remaining = free_vars(rhs)
    if remaining:
        raise PartialInstantiation(f"RHS variables left unbound: {sorted(remaining)}")

    boundary = set(rule.lhs_inputs()) | set(rule.lhs_outputs())
    out = g.copy()
    for v in lhs.interior():
        out.remove_vertex(m.vmap[v])
    for he in m.emap.values():
        # edges between boundary images survive vertex removal; drop them too
        if he in set(out.edges()):
            out.remove_edge(he)

    used = set(g.vertices())
    ren: dict[str, str] = {}
    for v in rhs.vertices():
        if v in boundary:
            ren[v] = m.vmap[v]
        else:
            ren[v] = fresh_name(v, used)
            used.add(ren[v])
    for v in rhs.vertices():
        if v not in boundary:
            out.add_vertex(rhs.data(v), ren[v])
    for e in rhs.edges():
        out.add_edge(ren[e.src], ren[e.tgt], e.port)

    out.set_io_order(g.inputs(), g.outputs())
    return out


# ---------------------------------------------------------------------------
# Generated rules: evaluation, goal-list unfolding, merge handling

def _tactic_ports(g: StringGraph, t: str) -> tuple[list[tuple[int, str]], list[tuple[int, str]]]:
    """(index, adjacent wire-vertex) for each in and out port, sorted."""
    ins, outs = [], []
    for e in g.in_edges(t):
        if e.port is None or not isinstance(e.port.index, int):
            raise RewriteError(f"node {t!r} has an unlabelled or symbolic in-edge")
        ins.append((e.port.index, e.src))
    for e in g.out_edges(t):
        if e.port is None or not isinstance(e.port.index, int):
            raise RewriteError(f"node {t!r} has an unlabelled or symbolic out-edge")
        outs.append((e.port.index, e.tgt))
    return sorted(ins), sorted(outs)


def make_eval_rule(g: StringGraph, t: str, port: int) -> RewriteRule:
    """Concrete evaluation rule for the neighbourhood of tactic node `t`.

    LHS: a singleton goal node (variable ``g``) sitting directly on input
    wire `port` of the tactic. RHS: the tactic with a goal-list variable
    ``gs<k>`` on each of its output wires. Wire types are taken from the
    host neighbourhood, so the rule is fully concrete except for the goal
    variables.
    """
    d = g.data(t)
    if not isinstance(d, TacticData) or isinstance(d.name, Var):
        raise RewriteError(f"{t!r} is not a concrete tactic node")
    ins, outs = _tactic_ports(g, t)
    if port not in [i for i, _ in ins]:
        raise RewriteError(f"tactic {t!r} has no input port {port}")

    lhs, rhs = StringGraph(), StringGraph()
    for side in (lhs, rhs):
        side.add_vertex(TacticData(d.name), "t")

    in_ids, out_ids = [], []
    for i, wv in ins:
        ty = g.wire_type(wv)
        if i == port:
            lhs.add_vertex(WireData(ty), "wa")
            lhs.add_vertex(GoalData((Var("g"),), ty), "goal")
            lhs.add_vertex(WireData(ty), "wb")
            lhs.add_edge("wa", "goal", port_in(1))
            lhs.add_edge("goal", "wb", port_out(1))
            lhs.add_edge("wb", "t", port_in(i))
            rhs.add_vertex(WireData(ty), "wa")
            rhs.add_edge("wa", "t", port_in(i))
            in_ids.append("wa")
        else:
            vid = f"win{i}"
            for side in (lhs, rhs):
                side.add_vertex(WireData(ty), vid)
                side.add_edge(vid, "t", port_in(i))
            in_ids.append(vid)
    for k, wv in outs:
        ty = g.wire_type(wv)
        vid = f"wout{k}"
        lhs.add_vertex(WireData(ty), vid)
        lhs.add_edge("t", vid, port_out(k))
        rhs.add_vertex(WireData(ty), vid)
        mid = f"wmid{k}"
        rhs.add_vertex(WireData(ty), mid)
        rhs.add_vertex(GoalData(Var(f"gs{k}"), ty), f"goals{k}")
        rhs.add_edge("t", mid, port_out(k))
        rhs.add_edge(mid, f"goals{k}", port_in(1))
        rhs.add_edge(f"goals{k}", vid, port_out(1))
        out_ids.append(vid)

    lhs.set_io_order(in_ids, out_ids)
    rhs.set_io_order(in_ids, out_ids)
    return RewriteRule(lhs, rhs, name=f"eval:{d.name}@{port}")


def eval_rule_template() -> RewriteRule:
    """The generic evaluation rule with !-boxes over the extra input wires
    and the output wires.

    Instantiating the boxes (COPY per wanted wire, then DROP, or KILL to
    keep a single boxed copy) and substituting the remaining variables
    yields the same rules `make_eval_rule` builds directly.
    """
    lhs, rhs = StringGraph(), StringGraph()
    for side in (lhs, rhs):
        side.add_vertex(TacticData(Var("t")), "t")
    alpha = Var("alpha")
    lhs.add_vertex(WireData(alpha), "wa")
    lhs.add_vertex(GoalData((Var("g"),), alpha), "goal")
    lhs.add_vertex(WireData(alpha), "wb")
    lhs.add_edge("wa", "goal", port_in(1))
    lhs.add_edge("goal", "wb", port_out(1))
    lhs.add_edge("wb", "t", PortLabel(IN, "i"))
    rhs.add_vertex(WireData(alpha), "wa")
    rhs.add_edge("wa", "t", PortLabel(IN, "i"))

    # extra-input box: one wire stub, freshened per copy
    for side in (lhs, rhs):
        side.add_vertex(WireData(Var("aj")), "wj")
        side.add_edge("wj", "t", PortLabel(IN, "j"))
    inbox = BangBox("ins", frozenset({"wj"}), frozenset({"wj"}),
                    (("wj", "wj"),), frozenset({"aj", "j"}))

    # output box: LHS bare wire, RHS wire with a goal-list node on it
    beta = Var("bk")
    lhs.add_vertex(WireData(beta), "wk")
    lhs.add_edge("t", "wk", PortLabel(OUT, "k"))
    rhs.add_vertex(WireData(beta), "wk")
    rhs.add_vertex(WireData(beta), "wmid")
    rhs.add_vertex(GoalData(Var("gs"), beta), "goals")
    rhs.add_edge("t", "wmid", PortLabel(OUT, "k"))
    rhs.add_edge("wmid", "goals", port_in(1))
    rhs.add_edge("goals", "wk", port_out(1))
    outbox = BangBox("outs", frozenset({"wk"}), frozenset({"wk", "wmid", "goals"}),
                     (("wk", "wk"),), frozenset({"bk", "k", "gs"}))

    return RewriteRule(lhs, rhs, bang_boxes=[inbox, outbox], name="eval")


def goal_list_split_rule(k: int) -> RewriteRule:
    """Unfold a k-goal list node into k singleton goal nodes in sequence
    (k >= 2). Goal entries bind to variables v1..vk, the wire type to
    ``alpha``; list order is laid out along the wire direction."""
    if k < 2:
        raise RewriteError("split rule needs k >= 2")
    alpha = Var("alpha")
    lhs, rhs = StringGraph(), StringGraph()
    for side in (lhs, rhs):
        side.add_vertex(WireData(alpha), "wa")
        side.add_vertex(WireData(alpha), "wb")
    lhs.add_vertex(GoalData(tuple(Var(f"v{i}") for i in range(1, k + 1)), alpha), "goal")
    lhs.add_edge("wa", "goal", port_in(1))
    lhs.add_edge("goal", "wb", port_out(1))

    prev = "wa"
    for i in range(1, k + 1):
        gn = f"g{i}"
        rhs.add_vertex(GoalData((Var(f"v{i}"),), alpha), gn)
        rhs.add_edge(prev, gn, port_in(1))
        if i < k:
            mid = f"wm{i}"
            rhs.add_vertex(WireData(alpha), mid)
            rhs.add_edge(gn, mid, port_out(1))
            prev = mid
        else:
            rhs.add_edge(gn, "wb", port_out(1))
    for side in (lhs, rhs):
        side.set_io_order(["wa"], ["wb"])
    return RewriteRule(lhs, rhs, name=f"unfold:{k}")


def goal_list_empty_rule() -> RewriteRule:
    """Delete an empty goal-list node, restoring the wire (the resulting
    wire-wire edge is fused away by normalisation)."""
    alpha = Var("alpha")
    lhs, rhs = StringGraph(), StringGraph()
    for side in (lhs, rhs):
        side.add_vertex(WireData(alpha), "wa")
        side.add_vertex(WireData(alpha), "wb")
    lhs.add_vertex(GoalData((), alpha), "goal")
    lhs.add_edge("wa", "goal", port_in(1))
    lhs.add_edge("goal", "wb", port_out(1))
    rhs.add_edge("wa", "wb")
    for side in (lhs, rhs):
        side.set_io_order(["wa"], ["wb"])
    return RewriteRule(lhs, rhs, name="unfold:0")


def make_merge_rule(g: StringGraph, merge: str, port: int) -> RewriteRule:
    """Move a singleton goal node from input wire `port` of a merge node
    onto its output wire (inserted adjacent to the merge, so goals pass
    the merge in propagation order)."""
    d = g.data(merge)
    if not isinstance(d, MergeData):
        raise RewriteError(f"{merge!r} is not a merge node")
    ins, outs = _tactic_ports(g, merge)
    if port not in [i for i, _ in ins] or len(outs) != 1:
        raise RewriteError(f"no merge site at {merge!r} port {port}")
    out_idx, out_wv = outs[0]
    out_ty = g.wire_type(out_wv)

    lhs, rhs = StringGraph(), StringGraph()
    for side in (lhs, rhs):
        side.add_vertex(MergeData(), "m")
    in_ids = []
    for i, wv in ins:
        ty = g.wire_type(wv)
        if i == port:
            for side in (lhs, rhs):
                side.add_vertex(WireData(ty), "wa")
            lhs.add_vertex(GoalData((Var("g"),), ty), "goal")
            lhs.add_vertex(WireData(ty), "wb")
            lhs.add_edge("wa", "goal", port_in(1))
            lhs.add_edge("goal", "wb", port_out(1))
            lhs.add_edge("wb", "m", port_in(i))
            rhs.add_edge("wa", "m", port_in(i))
            in_ids.append("wa")
        else:
            vid = f"win{i}"
            for side in (lhs, rhs):
                side.add_vertex(WireData(ty), vid)
                side.add_edge(vid, "m", port_in(i))
            in_ids.append(vid)
    for side in (lhs, rhs):
        side.add_vertex(WireData(out_ty), "wout")
    lhs.add_edge("m", "wout", port_out(out_idx))
    rhs.add_vertex(WireData(out_ty), "wmid")
    rhs.add_vertex(GoalData((Var("g"),), out_ty), "goal2")
    rhs.add_edge("m", "wmid", port_out(out_idx))
    rhs.add_edge("wmid", "goal2", port_in(1))
    rhs.add_edge("goal2", "wout", port_out(1))
    for side in (lhs, rhs):
        side.set_io_order(in_ids, ["wout"])
    return RewriteRule(lhs, rhs, name=f"merge@{port}")


def merge_fusion_rule(outer_arity: int, inner_arity: int, at: int) -> RewriteRule:
    """Combine two adjacent merge nodes (an inner merge feeding input `at`
    of an outer one) into a single merge with the joint arity."""
    if not (1 <= at <= outer_arity):
        raise RewriteError("fusion port out of range")
    alpha = Var("alpha")
    lhs, rhs = StringGraph(), StringGraph()
    lhs.add_vertex(MergeData(), "m_out")
    lhs.add_vertex(MergeData(), "m_in")
    rhs.add_vertex(MergeData(), "m")

    in_ids = []
    idx = 0
    for i in range(1, outer_arity + 1):
        if i == at:
            for j in range(1, inner_arity + 1):
                idx += 1
                vid = f"wi{idx}"
                for side in (lhs, rhs):
                    side.add_vertex(WireData(alpha), vid)
                lhs.add_edge(vid, "m_in", port_in(j))
                rhs.add_edge(vid, "m", port_in(idx))
                in_ids.append(vid)
            lhs.add_vertex(WireData(alpha), "wlink")
            lhs.add_edge("m_in", "wlink", port_out(1))
            lhs.add_edge("wlink", "m_out", port_in(i))
        else:
            idx += 1
            vid = f"wi{idx}"
            for side in (lhs, rhs):
                side.add_vertex(WireData(alpha), vid)
            lhs.add_edge(vid, "m_out", port_in(i))
            rhs.add_edge(vid, "m", port_in(idx))
            in_ids.append(vid)
    for side in (lhs, rhs):
        side.add_vertex(WireData(alpha), "wout")
    lhs.add_edge("m_out", "wout", port_out(1))
    rhs.add_edge("m", "wout", port_out(1))
    for side in (lhs, rhs):
        side.set_io_order(in_ids, ["wout"])
    return RewriteRule(lhs, rhs, name="merge_fusion")
