"""Minimal self-contained logic kernel.

Terms cover propositional connectives, universal quantification and a
small nat fragment (zero, successor, multiplication, an ``even``
predicate). Goals are sequents ``hyps |- concl``. Primitive tactics map a
goal to a set of goal lists; the empty set signals failure. There is no
justification checking: the parent forest kept by the proof state is the
audit trail.

Concrete syntax: ``A --> B & C``, ``!x. P x``, ``even(2*n)``, with
precedence ``~`` > ``&`` > ``|`` > ``-->`` and right-associative binary
connectives. Uppercase identifiers are atoms, lowercase are variables.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Union


class KernelError(Exception):
    pass


class ParseError(KernelError):
    def __init__(self, message: str, pos: int) -> None:
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


# ---------------------------------------------------------------------------
# Terms

@dataclass(frozen=True)
class Atom:
    name: str
    args: tuple = ()


@dataclass(frozen=True)
class TermVar:
    name: str


@dataclass(frozen=True)
class Imp:
    a: "Term"
    b: "Term"


@dataclass(frozen=True)
class Conj:
    a: "Term"
    b: "Term"


@dataclass(frozen=True)
class Disj:
    a: "Term"
    b: "Term"


@dataclass(frozen=True)
class Neg:
    a: "Term"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Term"


@dataclass(frozen=True)
class Zero:
    pass


@dataclass(frozen=True)
class Suc:
    a: "Term"


@dataclass(frozen=True)
class Mult:
    a: "Term"
    b: "Term"


@dataclass(frozen=True)
class Even:
    a: "Term"


Term = Union[Atom, TermVar, Imp, Conj, Disj, Neg, Forall, Zero, Suc, Mult, Even]

_NAT = (Zero, Suc, Mult, TermVar)


def nat(n: int) -> Term:
    t: Term = Zero()
    for _ in range(n):
        t = Suc(t)
    return t


def top_symbol(t: Term) -> str:
    """The head symbol: the constructor tag for compound terms, the name
    itself for atoms and variables."""
    if isinstance(t, Atom):
        return t.name
    if isinstance(t, TermVar):
        return t.name
    return {Imp: "imp", Conj: "conj", Disj: "disj", Neg: "neg",
            Forall: "forall", Zero: "zero", Suc: "suc", Mult: "mult",
            Even: "even"}[type(t)]


def is_atomic(t: Term) -> bool:
    return isinstance(t, (Atom, TermVar))


def subterms(t: Term) -> Iterator[Term]:
    yield t
    if isinstance(t, Atom):
        for a in t.args:
            yield from subterms(a)
    elif isinstance(t, (Imp, Conj, Disj, Mult)):
        yield from subterms(t.a)
        yield from subterms(t.b)
    elif isinstance(t, (Neg, Suc, Even)):
        yield from subterms(t.a)
    elif isinstance(t, Forall):
        yield from subterms(t.body)


def symbols_of(t: Term) -> set[str]:
    return {top_symbol(s) for s in subterms(t)}


def free_term_vars(t: Term, bound: frozenset[str] = frozenset()) -> set[str]:
    if isinstance(t, TermVar):
        return set() if t.name in bound else {t.name}
    if isinstance(t, Atom):
        out: set[str] = set()
        for a in t.args:
            out |= free_term_vars(a, bound)
        return out
    if isinstance(t, (Imp, Conj, Disj, Mult)):
        return free_term_vars(t.a, bound) | free_term_vars(t.b, bound)
    if isinstance(t, (Neg, Suc, Even)):
        return free_term_vars(t.a, bound)
    if isinstance(t, Forall):
        return free_term_vars(t.body, bound | {t.var})
    return set()


def subst_var(t: Term, name: str, repl: Term) -> Term:
    if isinstance(t, TermVar):
        return repl if t.name == name else t
    if isinstance(t, Atom):
        return Atom(t.name, tuple(subst_var(a, name, repl) for a in t.args))
    if isinstance(t, Imp):
        return Imp(subst_var(t.a, name, repl), subst_var(t.b, name, repl))
    if isinstance(t, Conj):
        return Conj(subst_var(t.a, name, repl), subst_var(t.b, name, repl))
    if isinstance(t, Disj):
        return Disj(subst_var(t.a, name, repl), subst_var(t.b, name, repl))
    if isinstance(t, Neg):
        return Neg(subst_var(t.a, name, repl))
    if isinstance(t, Forall):
        if t.var == name:  # shadowed
            return t
        return Forall(t.var, subst_var(t.body, name, repl))
    if isinstance(t, Suc):
        return Suc(subst_var(t.a, name, repl))
    if isinstance(t, Mult):
        return Mult(subst_var(t.a, name, repl), subst_var(t.b, name, repl))
    if isinstance(t, Even):
        return Even(subst_var(t.a, name, repl))
    return t


def alpha_eq(s: Term, t: Term, senv: tuple = (), tenv: tuple = ()) -> bool:
    """Equality up to renaming of bound variables."""
    if type(s) is not type(t):
        return False
    if isinstance(s, TermVar):
        assert isinstance(t, TermVar)
        sdepth = next((i for i, n in enumerate(reversed(senv)) if n == s.name), None)
        tdepth = next((i for i, n in enumerate(reversed(tenv)) if n == t.name), None)
        if sdepth is None and tdepth is None:
            return s.name == t.name
        return sdepth == tdepth
    if isinstance(s, Atom):
        assert isinstance(t, Atom)
        return (s.name == t.name and len(s.args) == len(t.args)
                and all(alpha_eq(a, b, senv, tenv) for a, b in zip(s.args, t.args)))
    if isinstance(s, (Imp, Conj, Disj, Mult)):
        return alpha_eq(s.a, t.a, senv, tenv) and alpha_eq(s.b, t.b, senv, tenv)
    if isinstance(s, (Neg, Suc, Even)):
        return alpha_eq(s.a, t.a, senv, tenv)
    if isinstance(s, Forall):
        assert isinstance(t, Forall)
        return alpha_eq(s.body, t.body, senv + (s.var,), tenv + (t.var,))
    return True  # Zero


# ---------------------------------------------------------------------------
# Parser

_SYMBOLS = ["-->", "&", "|", "~", "!", ".", "(", ")", ",", "*"]


def _tokenize(src: str) -> list[tuple[str, str, int]]:
    toks = []
    i = 0
    while i < len(src):
        c = src[i]
        if c.isspace():
            i += 1
            continue
        for s in _SYMBOLS:
            if src.startswith(s, i):
                toks.append(("sym", s, i))
                i += len(s)
                break
        else:
            if c.isdigit():
                j = i
                while j < len(src) and src[j].isdigit():
                    j += 1
                toks.append(("num", src[i:j], i))
                i = j
            elif c.isalpha() or c == "_":
                j = i
                while j < len(src) and (src[j].isalnum() or src[j] in "_'"):
                    j += 1
                toks.append(("ident", src[i:j], i))
                i = j
            else:
                raise ParseError(f"unexpected character {c!r}", i)
    toks.append(("eof", "", len(src)))
    return toks


class _Parser:
    def __init__(self, src: str) -> None:
        self.toks = _tokenize(src)
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.toks[self.i]

    def next(self) -> tuple[str, str, int]:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, value: str) -> None:
        kind, val, pos = self.next()
        if val != value:
            raise ParseError(f"expected {value!r}, found {val or 'end of input'!r}", pos)

    def parse(self) -> Term:
        t = self.imp()
        kind, val, pos = self.peek()
        if kind != "eof":
            raise ParseError(f"unexpected {val!r}", pos)
        return t

    def imp(self) -> Term:
        left = self.disj()
        if self.peek()[1] == "-->":
            self.next()
            return Imp(left, self.imp())
        return left

    def disj(self) -> Term:
        left = self.conj()
        if self.peek()[1] == "|":
            self.next()
            return Disj(left, self.disj())
        return left

    def conj(self) -> Term:
        left = self.unary()
        if self.peek()[1] == "&":
            self.next()
            return Conj(left, self.conj())
        return left

    def unary(self) -> Term:
        kind, val, pos = self.peek()
        if val == "~":
            self.next()
            return Neg(self.unary())
        if val == "!":
            self.next()
            kind, name, pos = self.next()
            if kind != "ident" or not name[0].islower():
                raise ParseError("expected a bound variable after '!'", pos)
            self.expect(".")
            return Forall(name, self.imp())
        return self.mult()

    def mult(self) -> Term:
        left = self.app()
        if self.peek()[1] == "*":
            _, _, pos = self.next()
            right = self.mult()
            for side in (left, right):
                if not isinstance(side, _NAT):
                    raise ParseError("'*' applies to nat terms only", pos)
            return Mult(left, right)
        return left

    def app(self) -> Term:
        head = self.primary()
        if self.peek()[0] not in ("ident", "num"):
            return head
        # juxtaposed application: P x y
        args = []
        while self.peek()[0] in ("ident", "num"):
            args.append(self.primary())
        if not isinstance(head, Atom) or head.args:
            raise ParseError("only atoms can be applied to arguments",
                             self.peek()[2])
        return Atom(head.name, tuple(args))

    def primary(self) -> Term:
        kind, val, pos = self.next()
        if val == "(":
            t = self.imp()
            self.expect(")")
            return t
        if kind == "num":
            return nat(int(val))
        if kind == "ident":
            if val == "zero":
                return Zero()
            if val in ("even", "S", "suc"):
                self.expect("(")
                arg = self.imp()
                self.expect(")")
                if val == "even":
                    if not isinstance(arg, _NAT):
                        raise ParseError("'even' applies to a nat term", pos)
                    return Even(arg)
                if not isinstance(arg, _NAT):
                    raise ParseError("successor applies to a nat term", pos)
                return Suc(arg)
            if self.peek()[1] == "(":
                self.next()
                args = [self.imp()]
                while self.peek()[1] == ",":
                    self.next()
                    args.append(self.imp())
                self.expect(")")
                return Atom(val, tuple(args))
            if val[0].islower():
                return TermVar(val)
            return Atom(val)
        raise ParseError(f"unexpected {val or 'end of input'!r}", pos)


def parse_term(src: str) -> Term:
    return _Parser(src).parse()


# ---------------------------------------------------------------------------
# Printing

def _as_numeral(t: Term) -> Optional[int]:
    n = 0
    while isinstance(t, Suc):
        n += 1
        t = t.a
    return n if isinstance(t, Zero) else None


def term_str(t: Term, prec: int = 0) -> str:
    # precedence levels: imp 1, disj 2, conj 3, unary 4, mult 5
    num = _as_numeral(t)
    if num is not None:
        return str(num)
    if isinstance(t, Atom):
        if not t.args:
            return t.name
        return t.name + " " + " ".join(term_str(a, 6) for a in t.args)
    if isinstance(t, TermVar):
        return t.name
    if isinstance(t, Imp):
        s = f"{term_str(t.a, 2)} --> {term_str(t.b, 1)}"
        return f"({s})" if prec > 1 else s
    if isinstance(t, Disj):
        s = f"{term_str(t.a, 3)} | {term_str(t.b, 2)}"
        return f"({s})" if prec > 2 else s
    if isinstance(t, Conj):
        s = f"{term_str(t.a, 4)} & {term_str(t.b, 3)}"
        return f"({s})" if prec > 3 else s
    if isinstance(t, Neg):
        return f"~{term_str(t.a, 4)}"
    if isinstance(t, Forall):
        s = f"!{t.var}. {term_str(t.body, 1)}"
        return f"({s})" if prec > 1 else s
    if isinstance(t, Suc):
        return f"S({term_str(t.a)})"
    if isinstance(t, Mult):
        s = f"{term_str(t.a, 6)}*{term_str(t.b, 5)}"
        return f"({s})" if prec > 5 else s
    if isinstance(t, Even):
        return f"even({term_str(t.a)})"
    raise AssertionError(t)


# ---------------------------------------------------------------------------
# Goals and the proof state

@dataclass(frozen=True)
class Goal:
    id: str
    hyps: tuple[Term, ...]
    concl: Term

    def sequent_str(self) -> str:
        left = ", ".join(term_str(h) for h in self.hyps)
        return f"{left} |- {term_str(self.concl)}" if left else f"|- {term_str(self.concl)}"


def parse_goal(src: str, gid: str = "g0") -> Goal:
    """Parse ``H1, H2 |- C`` or a bare conclusion."""
    if "|-" in src:
        left, right = src.split("|-", 1)
        hyps = tuple(parse_term(h) for h in left.split(",") if h.strip())
        return Goal(gid, hyps, parse_term(right))
    return Goal(gid, (), parse_term(src))


class ProofState:
    """Every goal ever created, its parentage, and the open set.

    The parent relation is a forest: each non-root goal records the goal
    and primitive that produced it.
    """

    def __init__(self) -> None:
        self.goals: dict[str, Goal] = {}
        self.parent: dict[str, tuple[str, str]] = {}
        self.open: set[str] = set()
        self.age: dict[str, int] = {}
        self._next_age = 0

    def add_root(self, goal: Goal) -> Goal:
        if goal.id in self.goals:
            raise KernelError(f"goal id {goal.id!r} already present")
        self.goals[goal.id] = goal
        self.open.add(goal.id)
        self.age[goal.id] = self._next_age
        self._next_age += 1
        return goal

    def record(self, parent_id: str, rule: str,
               evaluation: tuple[tuple[Goal, ...], ...]) -> tuple[tuple[Goal, ...], ...]:
        """Close `parent_id`, install the evaluation's goals as its open
        children (re-identified on collision), and return the evaluation
        with final ids."""
        if parent_id not in self.open:
            raise KernelError(f"goal {parent_id!r} is not open")
        self.open.remove(parent_id)
        out = []
        for cell in evaluation:
            new_cell = []
            for g in cell:
                gid = g.id
                if gid in self.goals:
                    k = 2
                    while f"{gid}_{k}" in self.goals:
                        k += 1
                    gid = f"{gid}_{k}"
                final = Goal(gid, g.hyps, g.concl)
                self.goals[gid] = final
                self.parent[gid] = (parent_id, rule)
                self.open.add(gid)
                self.age[gid] = self._next_age
                self._next_age += 1
                new_cell.append(final)
            out.append(tuple(new_cell))
        return tuple(out)

    def copy(self) -> ProofState:
        ps = ProofState()
        ps.goals = dict(self.goals)
        ps.parent = dict(self.parent)
        ps.open = set(self.open)
        ps.age = dict(self.age)
        ps._next_age = self._next_age
        return ps

    def open_goals(self) -> list[Goal]:
        return [self.goals[g] for g in sorted(self.open, key=lambda g: self.age[g])]


# ---------------------------------------------------------------------------
# Primitive tactics
#
# A primitive maps a goal to a list of evaluations; each evaluation is a
# list of subgoals carrying provisional ids derived from the parent's.
# The empty list means the tactic does not apply.

Primitive = Callable[[Goal], list[list[Goal]]]


def _children(g: Goal, sequents: list[tuple[tuple[Term, ...], Term]]) -> list[Goal]:
    return [Goal(f"{g.id}.{i}", hyps, concl)
            for i, (hyps, concl) in enumerate(sequents, start=1)]


def impI(g: Goal) -> list[list[Goal]]:
    if isinstance(g.concl, Imp):
        return [_children(g, [(g.hyps + (g.concl.a,), g.concl.b)])]
    return []


def conjI(g: Goal) -> list[list[Goal]]:
    if isinstance(g.concl, Conj):
        return [_children(g, [(g.hyps, g.concl.a), (g.hyps, g.concl.b)])]
    return []


def allI(g: Goal) -> list[list[Goal]]:
    if not isinstance(g.concl, Forall):
        return []
    used = symbols_of(g.concl)
    for h in g.hyps:
        used |= symbols_of(h)
    base = g.concl.var
    k = 0
    while f"{base}{k}" in used:
        k += 1
    eigen = TermVar(f"{base}{k}")
    return [_children(g, [(g.hyps, subst_var(g.concl.body, g.concl.var, eigen))])]


def assumption(g: Goal) -> list[list[Goal]]:
    if any(alpha_eq(h, g.concl) for h in g.hyps):
        return [[]]
    return []


def identity(g: Goal) -> list[list[Goal]]:
    """Pass the goal through unchanged (fresh id, same sequent)."""
    return [_children(g, [(g.hyps, g.concl)])]


def induct_nat(g: Goal, var: str) -> list[list[Goal]]:
    """Structural induction on a nat variable in the conclusion: a base
    case at zero and a step case with the induction hypothesis."""
    if var not in free_term_vars(g.concl):
        return []
    base = subst_var(g.concl, var, Zero())
    step = subst_var(g.concl, var, Suc(TermVar(var)))
    return [_children(g, [(g.hyps, base), (g.hyps + (g.concl,), step)])]


def induct_paper(g: Goal) -> list[list[Goal]]:
    """Scripted induction-by-two for conclusions of the exact shape
    ``even(2*v)``: two base cases at 0 and 1, and a step from v to
    ``S(S(v))`` under the original conclusion as hypothesis."""
    c = g.concl
    if (not g.hyps and isinstance(c, Even) and isinstance(c.a, Mult)
            and c.a.a == nat(2) and isinstance(c.a.b, TermVar)):
        v = c.a.b
        return [_children(g, [
            ((), Even(Mult(nat(2), Zero()))),
            ((), Even(Mult(nat(2), nat(1)))),
            ((c,), Even(Mult(nat(2), Suc(Suc(v))))),
        ])]
    return []


def fail(g: Goal) -> list[list[Goal]]:
    return []


PRIMITIVES: dict[str, Primitive] = {
    "impI": impI,
    "conjI": conjI,
    "allI": allI,
    "assumption": assumption,
    "identity": identity,
    "induct_paper": induct_paper,
    "fail": fail,
}


def resolve_primitive(spec: str) -> Primitive:
    """Look up a primitive by name; ``induct_nat:<var>`` binds the
    induction variable."""
    if spec.startswith("induct_nat:"):
        var = spec.split(":", 1)[1]
        return lambda g: induct_nat(g, var)
    if spec in PRIMITIVES:
        return PRIMITIVES[spec]
    raise KernelError(f"unknown primitive tactic {spec!r}")


def symbols_of_goal(g: Goal) -> set[str]:
    out = symbols_of(g.concl)
    for h in g.hyps:
        out |= symbols_of(h)
    return out
