"""Goal types: named sets of (possibly negated) feature predicates.

A goal type is a conjunction of features; a goal matches the type when
every positive feature's predicate holds and every negative one fails.
Types form a poset under feature-set inclusion with ``any`` (no features)
at the top and a distinguished unsatisfiable ``bottom``. The meet of two
types is the feature-set union, collapsed to bottom when the union is
syntactically contradictory.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable


class GoalTypeError(Exception):
    pass


class UnknownFeatureType(GoalTypeError):
    pass


POSITIVE = "positive"
NEGATIVE = "negative"


@dataclass(frozen=True)
class FeatureType:
    """A named predicate over goals.

    `functional` marks predicates that can hold for at most one argument
    tuple per goal (e.g. the top-level symbol of a conclusion), which
    lets the meet detect conflicts between different positive arguments.
    """

    name: str
    arity: int
    predicate: Callable
    functional: bool = False


@dataclass(frozen=True)
class Feature:
    ftype: str
    args: tuple = ()
    polarity: str = POSITIVE

    def negated(self) -> Feature:
        return Feature(self.ftype, self.args,
                       NEGATIVE if self.polarity == POSITIVE else POSITIVE)

    def __str__(self) -> str:
        sign = "" if self.polarity == POSITIVE else "~"
        args = ",".join(str(a) for a in self.args)
        return f"{sign}{self.ftype}({args})"


@dataclass(frozen=True)
class GoalType:
    name: str
    features: frozenset[Feature] = frozenset()
    is_bottom: bool = False

    def __str__(self) -> str:
        return self.name


ANY = GoalType("any")
BOTTOM = GoalType("bottom", is_bottom=True)


class FeatureRegistry:
    """Write-once table of feature types, read-only after startup."""

    def __init__(self) -> None:
        self._types: dict[str, FeatureType] = {}

    def register(self, ft: FeatureType) -> None:
        if ft.name in self._types:
            raise GoalTypeError(f"feature type {ft.name!r} already registered")
        self._types[ft.name] = ft

    def get(self, name: str) -> FeatureType:
        try:
            return self._types[name]
        except KeyError:
            raise UnknownFeatureType(f"no feature type named {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._types


def matches(goal, gtype: GoalType, registry: FeatureRegistry) -> bool:
    """True iff the goal satisfies every feature of the type."""
    if gtype.is_bottom:
        return False
    for f in gtype.features:
        ft = registry.get(f.ftype)
        if len(f.args) != ft.arity:
            raise GoalTypeError(
                f"feature {f.ftype!r} expects {ft.arity} args, got {len(f.args)}")
        holds = bool(ft.predicate(goal, *f.args))
        if f.polarity == POSITIVE and not holds:
            return False
        if f.polarity == NEGATIVE and holds:
            return False
    return True


def meet(a: GoalType, b: GoalType, registry: FeatureRegistry) -> GoalType:
    """Feature-set union, collapsed to bottom on syntactic conflict.

    Conflicts: the same (feature, args) with both polarities, or two
    positive occurrences of a functional feature with different args.
    """
    if a.is_bottom or b.is_bottom:
        return BOTTOM
    fs = a.features | b.features
    positive_functional: dict[str, tuple] = {}
    for f in fs:
        if f.negated() in fs:
            return BOTTOM
        if f.polarity == POSITIVE and registry.get(f.ftype).functional:
            seen = positive_functional.get(f.ftype)
            if seen is not None and seen != f.args:
                return BOTTOM
            positive_functional[f.ftype] = f.args
    if fs == a.features:
        return a
    if fs == b.features:
        return b
    return GoalType(f"{a.name}∧{b.name}", fs)


def orthogonal(a: GoalType, b: GoalType, registry: FeatureRegistry) -> bool:
    """Conservative disjointness: the syntactic meet is bottom. May return
    False for types no goal can satisfy together."""
    return meet(a, b, registry).is_bottom


def subsumes(a: GoalType, b: GoalType) -> bool:
    """a's features are a subset of b's, so matching b implies matching a."""
    if b.is_bottom:
        return True
    if a.is_bottom:
        return False
    return a.features <= b.features


class GoalTypeTable:
    """The named goal types in scope for one strategy, keyed by the names
    used as wire labels."""

    def __init__(self, registry: FeatureRegistry) -> None:
        self.registry = registry
        self._types: dict[str, GoalType] = {ANY.name: ANY, BOTTOM.name: BOTTOM}

    def define(self, gtype: GoalType) -> None:
        if gtype.name in self._types:
            raise GoalTypeError(f"goal type {gtype.name!r} already defined")
        for f in gtype.features:
            self.registry.get(f.ftype)  # raises UnknownFeatureType
        self._types[gtype.name] = gtype

    def get(self, name: str) -> GoalType:
        try:
            return self._types[name]
        except KeyError:
            raise GoalTypeError(f"no goal type named {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._types

    def names(self) -> list[str]:
        return list(self._types)


# ---------------------------------------------------------------------------
# Built-in feature types over the kernel's goals

def builtin_registry() -> FeatureRegistry:
    from . import kernel

    reg = FeatureRegistry()
    reg.register(FeatureType(
        "top_level_symbol", 1,
        lambda g, sym: kernel.top_symbol(g.concl) == sym,
        functional=True))
    reg.register(FeatureType(
        "concl_is_atom", 0,
        lambda g: kernel.is_atomic(g.concl)))
    reg.register(FeatureType(
        "hyp_count_ge", 1,
        lambda g, n: len(g.hyps) >= int(n)))
    reg.register(FeatureType(
        "contains_symbol", 1,
        lambda g, sym: sym in kernel.symbols_of_goal(g)))
    return reg
