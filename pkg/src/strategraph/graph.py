"""Typed string graphs: the carrier structure for strategy diagrams.

A string graph has two kinds of vertices. Node-vertices are the "logical"
boxes of a diagram (tactic boxes, merge points, goal carriers) and
wire-vertices stand for the wires connecting them. Wire-vertices have
fan-in and fan-out at most one, every edge touches at least one
wire-vertex, and an edge incident to a node-vertex carries a port label
(``in_1``, ``out_2``, ...) identifying the port on the node end.

Graphs are treated as values: operations return new graphs and never
mutate their arguments. The mutating ``add_*`` methods exist for
construction only.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union


class GraphError(Exception):
    pass


class TypeMismatch(GraphError):
    """Two wire endpoints were composed with unequal wire types."""


class ArityMismatch(GraphError):
    """A pairing of boundary vertices is not a bijection."""


@dataclass(frozen=True)
class Var:
    """Free variable standing in for data inside a rule pattern."""

    name: str

    def __repr__(self) -> str:
        return f"?{self.name}"


WireType = Union[str, Var]

# Port indices are ints everywhere except inside !-box templates, where a
# string names an index variable that is concretised on instantiation.
PortIndex = Union[int, str]

IN = "in"
OUT = "out"


@dataclass(frozen=True)
class PortLabel:
    direction: str  # IN or OUT
    index: PortIndex

    def __str__(self) -> str:
        return f"{self.direction}_{self.index}"


def port_in(i: PortIndex) -> PortLabel:
    return PortLabel(IN, i)


def port_out(i: PortIndex) -> PortLabel:
    return PortLabel(OUT, i)


@dataclass(frozen=True)
class Edge:
    src: str
    tgt: str
    port: Optional[PortLabel] = None


# ---------------------------------------------------------------------------
# Vertex payloads

@dataclass(frozen=True)
class WireData:
    wiretype: WireType


@dataclass(frozen=True)
class TacticData:
    name: Union[str, Var]


@dataclass(frozen=True)
class MergeData:
    pass


GoalEntry = Union[str, Var]


@dataclass(frozen=True)
class GoalData:
    """A goal node: a list of proof-goal ids travelling on a wire."""

    goals: Union[tuple, Var]  # tuple[GoalEntry, ...] or a whole-list Var
    wiretype: WireType


VertexData = Union[WireData, TacticData, MergeData, GoalData]

_PREFIX = {WireData: "w", TacticData: "t", MergeData: "m", GoalData: "gn"}


def is_wire(data: VertexData) -> bool:
    return isinstance(data, WireData)


def fresh_name(base: str, used) -> str:
    """`base` if unused, else the first free `base_2`, `base_3`, ..."""
    if base not in used:
        return base
    for k in itertools.count(2):
        cand = f"{base}_{k}"
        if cand not in used:
            return cand
    raise AssertionError


# ---------------------------------------------------------------------------
# Signature

@dataclass
class Signature:
    """Declared node names and the wire types on their ports."""

    maps: set[str] = field(default_factory=set)
    types: set[str] = field(default_factory=set)
    dom: dict[str, list[str]] = field(default_factory=dict)
    cod: dict[str, list[str]] = field(default_factory=dict)

    def declare(self, name: str, dom: list[str], cod: list[str]) -> None:
        for t in itertools.chain(dom, cod):
            if t not in self.types:
                raise GraphError(f"signature: unknown wire type {t!r} in {name!r}")
        self.maps.add(name)
        self.dom[name] = list(dom)
        self.cod[name] = list(cod)

    def validate(self) -> None:
        if set(self.dom) != self.maps or set(self.cod) != self.maps:
            raise GraphError("signature: every map needs exactly one dom and cod entry")
        for name in self.maps:
            for t in itertools.chain(self.dom[name], self.cod[name]):
                if t not in self.types:
                    raise GraphError(f"signature: unknown wire type {t!r} in {name!r}")


# ---------------------------------------------------------------------------
# The graph itself

class StringGraph:
    def __init__(self) -> None:
        self._vdata: dict[str, VertexData] = {}
        self._edges: dict[Edge, None] = {}  # insertion-ordered set
        self._input_order: Optional[list[str]] = None
        self._output_order: Optional[list[str]] = None

    # -- construction ------------------------------------------------------

    def add_vertex(self, data: VertexData, vid: Optional[str] = None) -> str:
        if vid is None:
            vid = fresh_name(f"{_PREFIX[type(data)]}{len(self._vdata)}", self._vdata)
        if vid in self._vdata:
            raise GraphError(f"duplicate vertex id {vid!r}")
        self._vdata[vid] = data
        return vid

    def add_edge(self, src: str, tgt: str, port: Optional[PortLabel] = None) -> Edge:
        for v in (src, tgt):
            if v not in self._vdata:
                raise GraphError(f"edge endpoint {v!r} not in graph")
        e = Edge(src, tgt, port)
        if e in self._edges:
            raise GraphError(f"duplicate edge {e}")
        self._edges[e] = None
        return e

    def remove_vertex(self, vid: str) -> None:
        del self._vdata[vid]
        for e in [e for e in self._edges if vid in (e.src, e.tgt)]:
            del self._edges[e]

    def remove_edge(self, e: Edge) -> None:
        del self._edges[e]

    def set_data(self, vid: str, data: VertexData) -> None:
        if vid not in self._vdata:
            raise GraphError(f"no vertex {vid!r}")
        self._vdata[vid] = data

    def set_io_order(self, inputs: list[str], outputs: list[str]) -> None:
        for v in itertools.chain(inputs, outputs):
            if v not in self._vdata:
                raise GraphError(f"boundary vertex {v!r} not in graph")
        self._input_order = list(inputs)
        self._output_order = list(outputs)

    def connect(self, src_node: str, out_index: int, tgt_node: str, in_index: int,
                wiretype: WireType, wid: Optional[str] = None) -> str:
        """Wire two node-vertices through a fresh wire-vertex."""
        w = self.add_vertex(WireData(wiretype), wid)
        self.add_edge(src_node, w, port_out(out_index))
        self.add_edge(w, tgt_node, port_in(in_index))
        return w

    # -- reading -----------------------------------------------------------

    def vertices(self) -> list[str]:
        return list(self._vdata)

    def has_vertex(self, vid: str) -> bool:
        return vid in self._vdata

    def data(self, vid: str) -> VertexData:
        return self._vdata[vid]

    def edges(self) -> list[Edge]:
        return list(self._edges)

    def in_edges(self, vid: str) -> list[Edge]:
        return [e for e in self._edges if e.tgt == vid]

    def out_edges(self, vid: str) -> list[Edge]:
        return [e for e in self._edges if e.src == vid]

    def wire_vertices(self) -> list[str]:
        return [v for v, d in self._vdata.items() if is_wire(d)]

    def node_vertices(self) -> list[str]:
        return [v for v, d in self._vdata.items() if not is_wire(d)]

    def goal_nodes(self) -> list[str]:
        return [v for v, d in self._vdata.items() if isinstance(d, GoalData)]

    def inputs(self) -> list[str]:
        """Wire-vertices with no in-edges, in declared order if one was set."""
        have = [v for v, d in self._vdata.items() if is_wire(d) and not self.in_edges(v)]
        return self._ordered(have, self._input_order)

    def outputs(self) -> list[str]:
        have = [v for v, d in self._vdata.items() if is_wire(d) and not self.out_edges(v)]
        return self._ordered(have, self._output_order)

    @staticmethod
    def _ordered(have: list[str], order: Optional[list[str]]) -> list[str]:
        if order is None:
            return have
        present = [v for v in order if v in have]
        return present + [v for v in have if v not in present]

    def boundary(self) -> set[str]:
        return set(self.inputs()) | set(self.outputs())

    def interior(self) -> set[str]:
        return set(self._vdata) - self.boundary()

    def wire_type(self, vid: str) -> WireType:
        d = self._vdata[vid]
        if isinstance(d, WireData):
            return d.wiretype
        if isinstance(d, GoalData):
            return d.wiretype
        raise GraphError(f"{vid!r} carries no wire type")

    def port_neighbor(self, node: str, direction: str, index: PortIndex) -> Optional[str]:
        """The wire-vertex attached at a given port, if any."""
        if direction == IN:
            for e in self.in_edges(node):
                if e.port == PortLabel(IN, index):
                    return e.src
        else:
            for e in self.out_edges(node):
                if e.port == PortLabel(OUT, index):
                    return e.tgt
        return None

    # -- copying / renaming -------------------------------------------------

    def copy(self) -> StringGraph:
        g = StringGraph()
        g._vdata = dict(self._vdata)
        g._edges = dict(self._edges)
        g._input_order = None if self._input_order is None else list(self._input_order)
        g._output_order = None if self._output_order is None else list(self._output_order)
        return g

    def renamed(self, mapping: dict[str, str]) -> StringGraph:
        """Rename vertices; ids absent from the mapping are kept."""
        def m(v: str) -> str:
            return mapping.get(v, v)

        g = StringGraph()
        for v, d in self._vdata.items():
            g.add_vertex(d, m(v))
        for e in self._edges:
            g.add_edge(m(e.src), m(e.tgt), e.port)
        if self._input_order is not None:
            g._input_order = [m(v) for v in self._input_order]
        if self._output_order is not None:
            g._output_order = [m(v) for v in self._output_order]
        return g

    def fresh_id(self, base: str) -> str:
        return fresh_name(base, self._vdata)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, StringGraph):
            return NotImplemented
        return (self._vdata == other._vdata
                and set(self._edges) == set(other._edges)
                and self.inputs() == other.inputs()
                and self.outputs() == other.outputs())

    def __repr__(self) -> str:
        return (f"StringGraph({len(self._vdata)} vertices, "
                f"{len(self._edges)} edges)")


# ---------------------------------------------------------------------------
# Well-formedness

@dataclass(frozen=True)
class Violation:
    code: str
    subject: tuple[str, ...]
    message: str

    def __str__(self) -> str:
        return f"[{self.code}] {self.message}"


def check_well_formed(g: StringGraph, sig: Optional[Signature] = None) -> list[Violation]:
    """All violated graph invariants; the empty list means well-formed.

    With a signature, node port counts and adjacent wire types are checked
    against the declared dom/cod; without one only structural invariants
    are checked. Violations are data, not exceptions.
    """
    out: list[Violation] = []

    def bad(code: str, subject, message: str) -> None:
        out.append(Violation(code, tuple(subject), message))

    for e in g.edges():
        sd, td = g.data(e.src), g.data(e.tgt)
        if not is_wire(sd) and not is_wire(td):
            bad("node_node_edge", (e.src, e.tgt), f"edge {e.src}->{e.tgt} joins two node-vertices")
        if is_wire(sd) and is_wire(td):
            if e.port is not None:
                bad("port_on_wire_edge", (e.src, e.tgt), f"wire-wire edge {e.src}->{e.tgt} carries a port label")
            st, tt = sd.wiretype, td.wiretype
            if isinstance(st, str) and isinstance(tt, str) and st != tt:
                bad("chain_type", (e.src, e.tgt), f"wire chain mixes types {st!r} and {tt!r}")
        if not is_wire(sd) and (e.port is None or e.port.direction != OUT):
            bad("port_side", (e.src, e.tgt), f"edge out of node {e.src} needs an out-port label")
        if not is_wire(td) and (e.port is None or e.port.direction != IN):
            bad("port_side", (e.src, e.tgt), f"edge into node {e.tgt} needs an in-port label")
        if e.port is not None and not isinstance(e.port.index, int):
            bad("symbolic_port", (e.src, e.tgt), f"port index {e.port.index!r} is not concrete")

    for v in g.wire_vertices():
        if len(g.in_edges(v)) > 1:
            bad("fan_in", (v,), f"wire-vertex {v} has more than one in-edge")
        if len(g.out_edges(v)) > 1:
            bad("fan_out", (v,), f"wire-vertex {v} has more than one out-edge")
        wt = g.data(v).wiretype
        if sig is not None and isinstance(wt, str) and wt not in sig.types:
            bad("unknown_wiretype", (v,), f"wire-vertex {v} has undeclared type {wt!r}")

    # Closed wire circles: cycles within the wire-wire subgraph.
    seen: set[str] = set()
    for v in g.wire_vertices():
        if v in seen:
            continue
        trail = []
        cur: Optional[str] = v
        on_trail: set[str] = set()
        while cur is not None and cur not in seen and is_wire(g.data(cur)):
            if cur in on_trail:
                bad("circle", tuple(trail), "closed wire loop")
                break
            on_trail.add(cur)
            trail.append(cur)
            nxt = [e.tgt for e in g.out_edges(cur) if is_wire(g.data(e.tgt))]
            cur = nxt[0] if nxt else None
        seen.update(on_trail)

    def check_ports(v: str, edges: list[Edge], direction: str,
                    expected: Optional[list[str]]) -> None:
        idxs = [e.port.index for e in edges
                if e.port is not None and e.port.direction == direction]
        if len(idxs) != len(set(idxs)):
            bad("port_dup", (v,), f"node {v} repeats a {direction}-port index")
        if expected is not None:
            want = set(range(1, len(expected) + 1))
            if set(i for i in idxs if isinstance(i, int)) != want:
                bad("arity", (v,), f"node {v} wires {sorted(idxs, key=str)} for declared "
                                   f"{direction}-arity {len(expected)}")
            else:
                for e in edges:
                    if e.port is None or not isinstance(e.port.index, int):
                        continue
                    wv = e.src if direction == IN else e.tgt
                    wt = g.wire_type(wv)
                    want_t = expected[e.port.index - 1]
                    if isinstance(wt, str) and wt != want_t:
                        bad("port_type", (v, wv),
                            f"port {direction}_{e.port.index} of {v} expects {want_t!r}, "
                            f"wire {wv} has {wt!r}")

    for v in g.node_vertices():
        d = g.data(v)
        ins, outs = g.in_edges(v), g.out_edges(v)
        if isinstance(d, GoalData):
            if len(ins) != 1 or len(outs) != 1:
                bad("goal_arity", (v,), f"goal node {v} must have exactly one input and one output wire")
            for e in itertools.chain(ins, outs):
                wv = e.src if e.tgt == v else e.tgt
                wt = g.wire_type(wv)
                if isinstance(wt, str) and isinstance(d.wiretype, str) and wt != d.wiretype:
                    bad("goal_type", (v, wv),
                        f"goal node {v} is typed {d.wiretype!r} but sits on a {wt!r} wire")
        elif isinstance(d, MergeData):
            if len(ins) < 1 or len(outs) != 1:
                bad("merge_arity", (v,), f"merge node {v} needs >=1 inputs and exactly one output")
            check_ports(v, ins, IN, None)
            check_ports(v, outs, OUT, None)
        elif isinstance(d, TacticData):
            if sig is not None and isinstance(d.name, str):
                if d.name not in sig.maps:
                    bad("unknown_tactic", (v,), f"node {v} names undeclared tactic {d.name!r}")
                else:
                    check_ports(v, ins, IN, sig.dom[d.name])
                    check_ports(v, outs, OUT, sig.cod[d.name])
            else:
                check_ports(v, ins, IN, None)
                check_ports(v, outs, OUT, None)
    return out


# ---------------------------------------------------------------------------
# Matching

@dataclass
class Matching:
    """An injective structure- and data-preserving map of a pattern into a host."""

    vmap: dict[str, str]
    emap: dict[Edge, Edge]
    subst: dict[str, object]


def _unify_value(pat, host, subst: dict) -> Optional[dict]:
    if isinstance(pat, Var):
        if pat.name in subst:
            return subst if subst[pat.name] == host else None
        s = dict(subst)
        s[pat.name] = host
        return s
    return subst if pat == host else None


def _unify_data(pat: VertexData, host: VertexData, subst: dict) -> Optional[dict]:
    if type(pat) is not type(host):
        return None
    if isinstance(pat, WireData):
        return _unify_value(pat.wiretype, host.wiretype, subst)
    if isinstance(pat, TacticData):
        return _unify_value(pat.name, host.name, subst)
    if isinstance(pat, MergeData):
        return subst
    assert isinstance(pat, GoalData) and isinstance(host, GoalData)
    s = _unify_value(pat.wiretype, host.wiretype, subst)
    if s is None:
        return None
    if isinstance(pat.goals, Var):
        return _unify_value(pat.goals, host.goals, s)
    if isinstance(host.goals, Var) or len(pat.goals) != len(host.goals):
        return None
    for p, h in zip(pat.goals, host.goals):
        s = _unify_value(p, h, s)
        if s is None:
            return None
    return s


def _pattern_order(pat: StringGraph, seed: dict[str, str]) -> list[str]:
    """BFS order over the undirected pattern, seeded vertices first."""
    adj: dict[str, list[str]] = {v: [] for v in pat.vertices()}
    for e in pat.edges():
        adj[e.src].append(e.tgt)
        adj[e.tgt].append(e.src)
    order: list[str] = []
    seen: set[str] = set()

    def bfs(start: str) -> None:
        queue = [start]
        seen.add(start)
        while queue:
            v = queue.pop(0)
            order.append(v)
            for n in sorted(adj[v]):
                if n not in seen:
                    seen.add(n)
                    queue.append(n)

    for s in sorted(seed):
        if s not in seen:
            bfs(s)
    for v in sorted(pat.vertices()):
        if v not in seen:
            bfs(v)
    return order


def find_matchings(pat: StringGraph, host: StringGraph,
                   seed: Optional[dict[str, str]] = None) -> Iterator[Matching]:
    """All matchings of `pat` into `host`.

    A matching is an injective homomorphism preserving vertex kind, edge
    ports and (up to unification of pattern variables) vertex data, such
    that no host edge outside the image touches the image of the pattern's
    interior. `seed` pins pattern vertices to host vertices up front.
    """
    seed = dict(seed or {})
    order = _pattern_order(pat, seed)
    pat_interior = pat.interior()
    host_vertices = host.vertices()
    host_edges = set(host.edges())
    pat_edges = pat.edges()

    def edges_ok(vmap: dict[str, str]) -> Optional[dict[Edge, Edge]]:
        emap: dict[Edge, Edge] = {}
        for pe in pat_edges:
            he = Edge(vmap[pe.src], vmap[pe.tgt], pe.port)
            if he not in host_edges:
                return None
            emap[pe] = he
        return emap

    def boundary_ok(vmap: dict[str, str], emap: dict[Edge, Edge]) -> bool:
        im_interior = {vmap[v] for v in pat_interior}
        matched = set(emap.values())
        for he in host.edges():
            if he in matched:
                continue
            if he.src in im_interior or he.tgt in im_interior:
                return False
        return True

    def extend(i: int, vmap: dict[str, str], used: set[str],
               subst: dict) -> Iterator[Matching]:
        if i == len(order):
            emap = edges_ok(vmap)
            if emap is not None and boundary_ok(vmap, emap):
                yield Matching(dict(vmap), emap, dict(subst))
            return
        pv = order[i]
        pd = pat.data(pv)
        if pv in seed:
            candidates = [seed[pv]]
        else:
            candidates = host_vertices
        for hv in candidates:
            if hv in used:
                continue
            s = _unify_data(pd, host.data(hv), subst)
            if s is None:
                continue
            if len(host.in_edges(hv)) < len(pat.in_edges(pv)):
                continue
            if len(host.out_edges(hv)) < len(pat.out_edges(pv)):
                continue
            # local consistency against already-mapped neighbours
            ok = True
            for pe in pat_edges:
                if pe.src == pv and pe.tgt in vmap:
                    if Edge(hv, vmap[pe.tgt], pe.port) not in host_edges:
                        ok = False
                        break
                if pe.tgt == pv and pe.src in vmap:
                    if Edge(vmap[pe.src], hv, pe.port) not in host_edges:
                        ok = False
                        break
            if not ok:
                continue
            vmap[pv] = hv
            used.add(hv)
            yield from extend(i + 1, vmap, used, s)
            del vmap[pv]
            used.remove(hv)

    yield from extend(0, {}, set(), {})


def subst_data(data: VertexData, bindings: dict) -> VertexData:
    """Apply variable bindings to one vertex payload."""
    def val(v):
        if isinstance(v, Var) and v.name in bindings:
            return bindings[v.name]
        return v

    if isinstance(data, WireData):
        return WireData(val(data.wiretype))
    if isinstance(data, TacticData):
        return TacticData(val(data.name))
    if isinstance(data, GoalData):
        goals = data.goals
        if isinstance(goals, Var):
            goals = val(goals)
        if isinstance(goals, (tuple, list)):
            goals = tuple(val(x) for x in goals)
        return GoalData(goals, val(data.wiretype))
    return data


def verify_matching(pat: StringGraph, host: StringGraph, m: Matching) -> bool:
    """Independent checker for a claimed matching (used as a test oracle
    and defensively by the rewriter)."""
    vmap = m.vmap
    if set(vmap) != set(pat.vertices()):
        return False
    if len(set(vmap.values())) != len(vmap):
        return False
    for v in pat.vertices():
        if not host.has_vertex(vmap[v]):
            return False
        if subst_data(pat.data(v), m.subst) != host.data(vmap[v]):
            return False
    host_edges = set(host.edges())
    images = set()
    for pe in pat.edges():
        he = Edge(vmap[pe.src], vmap[pe.tgt], pe.port)
        if he not in host_edges:
            return False
        images.add(he)
    if len(images) != len(pat.edges()):
        return False
    im_interior = {vmap[v] for v in pat.interior()}
    for he in host_edges - images:
        if he.src in im_interior or he.tgt in im_interior:
            return False
    return True


# ---------------------------------------------------------------------------
# Composition and normalisation

def plug(g: StringGraph, h: StringGraph,
         pairing: list[tuple[str, str]]) -> StringGraph:
    """Compose by fusing paired outputs of `g` onto inputs of `h`.

    Raises ArityMismatch when the pairing repeats or misses vertices of
    the stated boundary subsets, TypeMismatch when a paired output/input
    disagree on wire type (matching is strict).
    """
    g_outs, h_ins = [p[0] for p in pairing], [p[1] for p in pairing]
    if len(set(g_outs)) != len(g_outs) or len(set(h_ins)) != len(h_ins):
        raise ArityMismatch("pairing repeats a boundary vertex")
    if not set(g_outs) <= set(g.outputs()):
        raise ArityMismatch("pairing names non-outputs of the first graph")
    if not set(h_ins) <= set(h.inputs()):
        raise ArityMismatch("pairing names non-inputs of the second graph")
    for o, i in pairing:
        to, ti = g.wire_type(o), h.wire_type(i)
        if to != ti:
            raise TypeMismatch(f"cannot plug {to!r} output into {ti!r} input")

    used = set(g.vertices())
    ren: dict[str, str] = {}
    for v in h.vertices():
        ren[v] = fresh_name(v, used)
        used.add(ren[v])
    h2 = h.renamed(ren)

    out = g.copy()
    for v in h2.vertices():
        out.add_vertex(h2.data(v), v)
    for e in h2.edges():
        out.add_edge(e.src, e.tgt, e.port)

    fused = {ren[i]: o for o, i in pairing}
    for o, i in pairing:
        i2 = ren[i]
        for e in out.out_edges(i2):
            out.remove_edge(e)
            out.add_edge(o, e.tgt, e.port)
        out.remove_vertex(i2)

    ins = list(g.inputs()) + [v for v in h2.inputs() if v not in fused]
    outs = [v for v in g.outputs() if v not in set(g_outs)]
    outs += [fused.get(v, v) for v in h2.outputs()]
    out.set_io_order(ins, outs)
    return out


def normalized(g: StringGraph) -> tuple[StringGraph, dict[str, str]]:
    """Fuse wire-vertex chains down to single wire-vertices.

    Returns the normal form and a map from fused-away ids to the
    surviving id (the downstream end of each chain).
    """
    parent: dict[str, str] = {v: v for v in g.vertices()}

    def find(v: str) -> str:
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    chain_edges = []
    for e in g.edges():
        if is_wire(g.data(e.src)) and is_wire(g.data(e.tgt)):
            st, tt = g.wire_type(e.src), g.wire_type(e.tgt)
            if st != tt:
                raise GraphError(f"cannot fuse wires of different types {st!r}/{tt!r}")
            chain_edges.append(e)
            a, b = find(e.src), find(e.tgt)
            if a == b:
                raise GraphError("closed wire loop cannot be normalised")
            parent[a] = b  # downstream survives

    if not chain_edges:
        return g.copy(), {}

    mapping = {v: find(v) for v in g.vertices() if find(v) != v}
    out = StringGraph()
    for v, d in g._vdata.items():
        if v not in mapping:
            out.add_vertex(d, v)
    dead = set(chain_edges)
    for e in g.edges():
        if e in dead:
            continue
        out.add_edge(mapping.get(e.src, e.src), mapping.get(e.tgt, e.tgt), e.port)

    def remap(order: list[str]) -> list[str]:
        seen: set[str] = set()
        res = []
        for v in order:
            v = mapping.get(v, v)
            if v not in seen:
                seen.add(v)
                res.append(v)
        return res

    out.set_io_order(remap(g.inputs()), remap(g.outputs()))
    return out, mapping


# ---------------------------------------------------------------------------
# Isomorphism (exact, for tests and fixtures; graphs here are small)

def _data_key(d: VertexData):
    return (type(d).__name__, repr(d))


def is_isomorphic(a: StringGraph, b: StringGraph) -> bool:
    if len(a.vertices()) != len(b.vertices()) or len(a.edges()) != len(b.edges()):
        return False
    a_keys = sorted(_data_key(a.data(v)) for v in a.vertices())
    b_keys = sorted(_data_key(b.data(v)) for v in b.vertices())
    if a_keys != b_keys:
        return False

    b_by_key: dict[tuple, list[str]] = {}
    for v in b.vertices():
        b_by_key.setdefault(_data_key(b.data(v)), []).append(v)
    order = sorted(a.vertices(), key=lambda v: len(b_by_key[_data_key(a.data(v))]))
    b_edges = set(b.edges())

    def extend(i: int, vmap: dict[str, str], used: set[str]) -> bool:
        if i == len(order):
            return {Edge(vmap[e.src], vmap[e.tgt], e.port) for e in a.edges()} == b_edges
        av = order[i]
        for bv in b_by_key[_data_key(a.data(av))]:
            if bv in used:
                continue
            if len(a.in_edges(av)) != len(b.in_edges(bv)):
                continue
            if len(a.out_edges(av)) != len(b.out_edges(bv)):
                continue
            ok = True
            for e in a.edges():
                if e.src == av and e.tgt in vmap and Edge(bv, vmap[e.tgt], e.port) not in b_edges:
                    ok = False
                    break
                if e.tgt == av and e.src in vmap and Edge(vmap[e.src], bv, e.port) not in b_edges:
                    ok = False
                    break
            if not ok:
                continue
            vmap[av] = bv
            used.add(bv)
            if extend(i + 1, vmap, used):
                return True
            del vmap[av]
            used.remove(bv)
        return False

    return extend(0, {}, set())
