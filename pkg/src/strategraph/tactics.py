"""Typed tactics: signatures, goal-list partitioning and the registry.

A typed tactic maps a goal to a set of evaluations, each a tuple of goal
lists typed by the declared output types. Atomic tactics arise by lifting
an untyped primitive through the partition function: every way of
distributing the primitive's subgoals over the output types, preserving
their relative order. Evaluation sets are produced lazily.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterator

from .goaltypes import FeatureRegistry, GoalType, matches
from .kernel import Goal, Primitive

# One evaluation: a tuple of goal lists, one per output type.
Evaluation = tuple[tuple[Goal, ...], ...]

TypedTacticFn = Callable[[Goal], Iterator[Evaluation]]


@dataclass(frozen=True)
class TacticSignature:
    inputs: tuple[GoalType, ...]
    outputs: tuple[GoalType, ...]

    def __post_init__(self) -> None:
        if len(self.inputs) < 1:
            raise ValueError("a tactic needs at least one input")

    def key(self) -> tuple:
        return (tuple(t.name for t in self.inputs),
                tuple(t.name for t in self.outputs))

    def __str__(self) -> str:
        ins = ",".join(t.name for t in self.inputs)
        outs = ",".join(t.name for t in self.outputs)
        return f"{ins} -> [{outs}]"


def partitions(types: list[GoalType], goals: list[Goal],
               registry: FeatureRegistry) -> Iterator[Evaluation]:
    """All assignments of each goal to an output list whose type it
    matches, keeping the goals' relative order within each list.

    Duplicate tuples are collapsed. A goal matching no type kills the
    whole enumeration (yields nothing).
    """
    n = len(types)
    candidates = []
    for g in goals:
        idxs = [i for i, t in enumerate(types) if matches(g, t, registry)]
        if not idxs:
            return
        candidates.append(idxs)

    seen: set[tuple] = set()
    for assign in itertools.product(*candidates):
        cells: list[list[Goal]] = [[] for _ in range(n)]
        for g, i in zip(goals, assign):
            cells[i].append(g)
        ev: Evaluation = tuple(tuple(c) for c in cells)
        key = tuple(tuple(g.id for g in c) for c in ev)
        if key not in seen:
            seen.add(key)
            yield ev


@dataclass
class AtomicTactic:
    """A primitive tactic plus an I/O type signature, lifted per-port
    into a typed tactic (the same function on every input port)."""

    name: str
    signature: TacticSignature
    primitive: Primitive

    def lifted(self, registry: FeatureRegistry, port: int = 1) -> TypedTacticFn:
        alpha = self.signature.inputs[port - 1]
        outputs = list(self.signature.outputs)
        prim = self.primitive

        def tac(g: Goal) -> Iterator[Evaluation]:
            if not matches(g, alpha, registry):
                return
            for subgoals in prim(g):
                yield from partitions(outputs, list(subgoals), registry)

        return tac


def lift(t: AtomicTactic, registry: FeatureRegistry) -> TypedTacticFn:
    return t.lifted(registry)


def fail_fn(g: Goal) -> Iterator[Evaluation]:
    return iter(())


class TacticRegistry:
    """Tactics keyed by (name, signature). Lookup of an unregistered
    combination resolves to the fail function rather than an error."""

    def __init__(self, features: FeatureRegistry) -> None:
        self.features = features
        self._entries: dict[tuple, object] = {}

    def register(self, tactic) -> None:
        key = (tactic.name, tactic.signature.key())
        if key in self._entries:
            raise ValueError(f"tactic {tactic.name!r} already registered for {tactic.signature}")
        self._entries[key] = tactic

    def entry(self, name: str, sig: TacticSignature):
        return self._entries.get((name, sig.key()))

    def lookup(self, name: str, sig: TacticSignature, port: int = 1) -> TypedTacticFn:
        e = self.entry(name, sig)
        if e is None:
            return fail_fn
        return e.lifted(self.features, port)

    def names(self) -> set[str]:
        return {name for name, _ in self._entries}
