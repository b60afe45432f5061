"""Strategy files and the on-disk registry.

A strategy file is versioned JSON declaring goal types, tactics and the
strategy graph::

    {
      "psgraph_version": 1,
      "name": "intro-v1",
      "goaltypes": [{"name": "imp",
                     "features": [{"ftype": "top_level_symbol",
                                   "args": ["imp"],
                                   "polarity": "positive"}]}],
      "tactics": [{"name": "impI", "inputs": ["imp"], "outputs": ["any"],
                   "impl": "impI"}],
      "graph": {"vertices": [{"id": "w_in", "kind": "wire", "wiretype": "any"},
                             {"id": "t1", "kind": "tactic", "tactic": "impI"},
                             {"id": "m1", "kind": "merge"}],
                "edges": [{"source": "w_in", "target": "t1", "port": "in_1"}],
                "inputs": ["w_in"], "outputs": ["w_out"]}
    }

Tactic `impl` forms: a primitive name (``impI``, ``identity``,
``induct_nat:<var>``, ...), ``graph:<name>`` referencing another
registered strategy as a graph tactic, or ``{"or"|"orelse": [a, b]}``
over two such references. Strategies registered on disk live one file
per strategy, keyed by the `name` field (falling back to the file's base
name).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional, Union

from .combinators import GraphTactic, OrElseTactic, OrTactic
from .engine import (
    EvalContext, EvalState, Evaluator, initial_state, output_goal_lists,
)
from .goaltypes import (
    Feature, GoalType, GoalTypeTable, NEGATIVE, POSITIVE, builtin_registry,
)
from .graph import (
    GoalData, MergeData, PortLabel, Signature, StringGraph, TacticData,
    WireData, check_well_formed,
)
from .kernel import Goal, parse_goal, resolve_primitive
from .tactics import AtomicTactic, TacticRegistry, TacticSignature

FORMAT_VERSION = 1


class StrategyError(Exception):
    pass


class UnknownStrategy(StrategyError):
    pass


class StrategyFormatError(StrategyError):
    def __init__(self, message: str, where: str = "") -> None:
        super().__init__(f"{where}: {message}" if where else message)
        self.where = where


@dataclass
class Strategy:
    name: str
    graph: StringGraph
    ctx: EvalContext
    source: dict


# ---------------------------------------------------------------------------
# Graph (de)serialization

def port_from_str(s: Optional[str]) -> Optional[PortLabel]:
    if s is None:
        return None
    direction, _, idx = s.partition("_")
    if direction not in ("in", "out") or not idx.isdigit():
        raise StrategyFormatError(f"bad port label {s!r}")
    return PortLabel(direction, int(idx))


def port_to_str(p: Optional[PortLabel]) -> Optional[str]:
    return None if p is None else str(p)


def graph_from_json(data: dict, where: str = "graph") -> StringGraph:
    g = StringGraph()
    for v in data.get("vertices", []):
        vid, kind = v.get("id"), v.get("kind")
        if not vid or not kind:
            raise StrategyFormatError("vertex needs id and kind", where)
        if kind == "wire":
            g.add_vertex(WireData(v["wiretype"]), vid)
        elif kind == "tactic":
            g.add_vertex(TacticData(v["tactic"]), vid)
        elif kind == "merge":
            g.add_vertex(MergeData(), vid)
        elif kind == "goal":
            g.add_vertex(GoalData(tuple(v.get("goals", [])), v["wiretype"]), vid)
        else:
            raise StrategyFormatError(f"unknown vertex kind {kind!r}", f"{where}.{vid}")
    for e in data.get("edges", []):
        g.add_edge(e["source"], e["target"], port_from_str(e.get("port")))
    g.set_io_order(data.get("inputs", g.inputs()), data.get("outputs", g.outputs()))
    return g


def graph_to_json(g: StringGraph) -> dict:
    vertices = []
    for v in g.vertices():
        d = g.data(v)
        if isinstance(d, WireData):
            vertices.append({"id": v, "kind": "wire", "wiretype": d.wiretype})
        elif isinstance(d, TacticData):
            vertices.append({"id": v, "kind": "tactic", "tactic": d.name})
        elif isinstance(d, MergeData):
            vertices.append({"id": v, "kind": "merge"})
        elif isinstance(d, GoalData):
            vertices.append({"id": v, "kind": "goal", "goals": list(d.goals),
                             "wiretype": d.wiretype})
    return {
        "vertices": vertices,
        "edges": [{"source": e.src, "target": e.tgt, "port": port_to_str(e.port)}
                  for e in g.edges()],
        "inputs": g.inputs(),
        "outputs": g.outputs(),
    }


# ---------------------------------------------------------------------------
# Loading

class Loader:
    """Resolves strategies by name from registry directories (and the
    bundled fixtures), guarding against reference cycles."""

    def __init__(self, registry_dirs: Optional[list[Union[str, Path]]] = None) -> None:
        self.dirs = [Path(d) for d in (registry_dirs or [])]
        self._loading: list[str] = []
        self._cache: dict[str, Strategy] = {}

    def path_for(self, name: str) -> Path:
        for d in self.dirs:
            p = d / f"{name}.json"
            if p.exists():
                return p
        builtin = resources.files("strategraph").joinpath(f"strategies/{name}.json")
        if builtin.is_file():
            return Path(str(builtin))
        raise UnknownStrategy(f"no strategy named {name!r} in the registry")

    def by_name(self, name: str) -> Strategy:
        if name in self._cache:
            return self._cache[name]
        if name in self._loading:
            raise StrategyFormatError(
                f"strategy reference cycle: {' -> '.join(self._loading + [name])}")
        strat = self.load(self.path_for(name))
        self._cache[name] = strat
        return strat

    def load(self, path: Union[str, Path]) -> Strategy:
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise StrategyFormatError(f"not valid JSON: {exc}", str(path)) from exc
        name = data.get("name", path.stem)
        self._loading.append(name)
        try:
            strat = load_strategy_data(data, name, self)
        finally:
            self._loading.pop()
        self._cache[name] = strat
        return strat


def load_strategy_data(data: dict, name: str, loader: Optional[Loader] = None) -> Strategy:
    where = name
    if data.get("psgraph_version") != FORMAT_VERSION:
        raise StrategyFormatError(
            f"psgraph_version must be {FORMAT_VERSION}", where)
    loader = loader or Loader()

    features = builtin_registry()
    types = GoalTypeTable(features)
    for decl in data.get("goaltypes", []):
        fs = []
        for f in decl.get("features", []):
            polarity = f.get("polarity", POSITIVE)
            if polarity not in (POSITIVE, NEGATIVE):
                raise StrategyFormatError(
                    f"bad polarity {polarity!r}", f"{where}.goaltypes.{decl.get('name')}")
            fs.append(Feature(f["ftype"], tuple(f.get("args", [])), polarity))
        types.define(GoalType(decl["name"], frozenset(fs)))

    sig = Signature(types=set(types.names()))
    registry = TacticRegistry(features)
    ctx = EvalContext(sig, types, features, registry)

    def resolve_types(names: list[str], spot: str) -> tuple[GoalType, ...]:
        out = []
        for n in names:
            if n not in types:
                raise StrategyFormatError(f"undeclared goal type {n!r}", spot)
            out.append(types.get(n))
        return tuple(out)

    def graph_ref(ref: str, tsig: TacticSignature, label: str) -> GraphTactic:
        target = loader.by_name(ref)
        return GraphTactic(label, target.graph, tsig, target.ctx)

    for decl in data.get("tactics", []):
        tname = decl.get("name")
        spot = f"{where}.tactics.{tname}"
        tsig = TacticSignature(resolve_types(decl["inputs"], spot),
                               resolve_types(decl["outputs"], spot))
        sig.declare(tname, list(decl["inputs"]), list(decl["outputs"]))
        impl = decl.get("impl")
        if isinstance(impl, str) and impl.startswith("graph:"):
            registry.register(graph_ref(impl.split(":", 1)[1], tsig, tname))
        elif isinstance(impl, str):
            try:
                prim = resolve_primitive(impl)
            except Exception as exc:
                raise StrategyFormatError(str(exc), spot) from exc
            registry.register(AtomicTactic(tname, tsig, prim))
        elif isinstance(impl, dict) and ("or" in impl or "orelse" in impl):
            kind = "or" if "or" in impl else "orelse"
            refs = impl[kind]
            if not (isinstance(refs, list) and len(refs) == 2):
                raise StrategyFormatError(f"{kind} needs two operand references", spot)
            first = graph_ref(refs[0], tsig, refs[0])
            second = graph_ref(refs[1], tsig, refs[1])
            cls = OrTactic if kind == "or" else OrElseTactic
            registry.register(cls(tname, first, second))
        else:
            raise StrategyFormatError(f"bad tactic impl {impl!r}", spot)

    graph = graph_from_json(data.get("graph", {}), where)
    violations = check_well_formed(graph, sig)
    if violations:
        raise StrategyFormatError(
            "graph is not well-formed: " + "; ".join(str(v) for v in violations), where)
    return Strategy(name, graph, ctx, data)


def load_strategy(path: Union[str, Path],
                  registry_dirs: Optional[list[Union[str, Path]]] = None) -> Strategy:
    return Loader(registry_dirs).load(path)


def save_strategy(strategy: Strategy) -> dict:
    """The strategy as file-format JSON (canonical graph section)."""
    data = dict(strategy.source)
    data["psgraph_version"] = FORMAT_VERSION
    data["name"] = strategy.name
    data["graph"] = graph_to_json(strategy.graph)
    return data


def check_strategy(path: Union[str, Path],
                   registry_dirs: Optional[list[Union[str, Path]]] = None
                   ) -> tuple[Optional[Strategy], list[str]]:
    """Load with diagnostics-as-data for the `check` command."""
    try:
        return Loader(registry_dirs).load(path), []
    except Exception as exc:  # diagnostics sink
        return None, [str(exc)]


def resolve_strategy(name_or_path: str,
                     registry_dirs: Optional[list[Union[str, Path]]] = None) -> Strategy:
    p = Path(name_or_path)
    loader = Loader(registry_dirs)
    if p.suffix == ".json" or p.exists():
        return loader.load(p)
    return loader.by_name(name_or_path)


# ---------------------------------------------------------------------------
# Running

@dataclass
class RunResult:
    enf_states: list[EvalState]
    fuel_exhausted: bool

    @property
    def succeeded(self) -> bool:
        return bool(self.enf_states)


def run_strategy(strategy: Strategy, goal: Union[str, Goal],
                 order: Optional[str] = None,
                 fuel: Optional[int] = None,
                 max_results: Optional[int] = 1) -> RunResult:
    if isinstance(goal, str):
        goal = parse_goal(goal)
    state = initial_state(strategy.graph, strategy.ctx, goal)
    search = Evaluator(state, order=order,
                       fuel=strategy.ctx.fuel if fuel is None else fuel)
    found = []
    for enf in search.results():
        found.append(enf)
        if max_results is not None and len(found) >= max_results:
            break
    return RunResult(found, search.fuel_exhausted)


def format_enf(state: EvalState) -> list[str]:
    lines = []
    for wire, goals in output_goal_lists(state):
        ty = state.graph.wire_type(wire)
        shown = ", ".join(g.sequent_str() for g in goals)
        lines.append(f"{wire} ({ty}): [{shown}]")
    return lines


# ---------------------------------------------------------------------------
# Export

def export_dot(strategy: Strategy) -> str:
    """Graphviz text for the strategy graph: boxes for tactics, points
    for merges, wire-vertices elided to labelled edges where possible."""
    g = strategy.graph
    lines = ["digraph strategy {", "  rankdir=LR;"]
    for v in g.vertices():
        d = g.data(v)
        if isinstance(d, TacticData):
            lines.append(f'  "{v}" [shape=box,label="{d.name}"];')
        elif isinstance(d, MergeData):
            lines.append(f'  "{v}" [shape=point,width=0.15,label=""];')
        elif isinstance(d, GoalData):
            goals = ",".join(d.goals)
            lines.append(f'  "{v}" [shape=cds,label="[{goals}]"];')
        else:
            style = "circle" if v in g.boundary() else "point"
            lines.append(f'  "{v}" [shape={style},width=0.08,label="",xlabel="{d.wiretype}"];')
    for e in g.edges():
        label = f' [label="{e.port}"]' if e.port is not None else ""
        lines.append(f'  "{e.src}" -> "{e.tgt}"{label};')
    lines.append("}")
    return "\n".join(lines)
