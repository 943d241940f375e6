"""Abstract syntax of terms, programs and formulas, declarations and sort checking.

Variables (`sets.Variable`) and channel names (`sets.Channel`) double as
term nodes.  All nodes are frozen dataclasses, so structural equality is
plain ``==`` once set annotations are normalized.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, is_dataclass
from fractions import Fraction

from . import sets as S
from .sets import MU, MU_PRIME, Channel, SetExpr, Variable


class SortError(ValueError):
    pass


# -- terms -----------------------------------------------------------------------

@dataclass(frozen=True)
class RealLit:
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value))


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class EmptyTrace:
    pass


@dataclass(frozen=True)
class Dot:
    index: int = 0
    sort: str = "real"


@dataclass(frozen=True)
class FuncApp:
    symbol: str
    chans: SetExpr = S.ALL_CHANS
    args: tuple = ()


@dataclass(frozen=True)
class Plus:
    l: object
    r: object


@dataclass(frozen=True)
class Times:
    l: object
    r: object


@dataclass(frozen=True)
class IntPlus:
    l: object
    r: object


@dataclass(frozen=True)
class Differential:
    e: object


@dataclass(frozen=True)
class Val:
    e: object


@dataclass(frozen=True)
class Stamp:
    e: object


@dataclass(frozen=True)
class Len:
    e: object


@dataclass(frozen=True)
class ChanOf:
    e: object


@dataclass(frozen=True)
class CommItem:
    ch: object
    value: object
    stamp: object


@dataclass(frozen=True)
class Concat:
    l: object
    r: object


@dataclass(frozen=True)
class Proj:
    e: object
    chans: SetExpr


@dataclass(frozen=True)
class At:
    e: object
    index: object


Term = (Variable | Channel | RealLit | IntLit | EmptyTrace | Dot | FuncApp | Plus | Times
        | IntPlus | Differential | Val | Stamp | Len | ChanOf | CommItem | Concat | Proj | At)

# -- programs ----------------------------------------------------------------------

DEFAULT_PROG_VARS = S.union(S.RVAR, S.TVAR)


@dataclass(frozen=True)
class ProgConst:
    symbol: str
    chans: SetExpr = S.ALL_CHANS
    vars: SetExpr = DEFAULT_PROG_VARS


@dataclass(frozen=True)
class Assign:
    x: Variable
    rhs: object


@dataclass(frozen=True)
class Random:
    x: Variable


@dataclass(frozen=True)
class Test:
    cond: object


@dataclass(frozen=True)
class ODE:
    eqs: tuple
    constraint: object = None

    def __post_init__(self):
        object.__setattr__(self, "eqs", tuple(tuple(e) for e in self.eqs))
        if self.constraint is None:
            object.__setattr__(self, "constraint", TRUE)


@dataclass(frozen=True)
class Seq:
    l: object
    r: object


@dataclass(frozen=True)
class Choice:
    l: object
    r: object


@dataclass(frozen=True)
class Star:
    body: object


@dataclass(frozen=True)
class Send:
    ch: Channel
    rec: Variable
    payload: object


@dataclass(frozen=True)
class Receive:
    ch: Channel
    rec: Variable
    x: Variable


@dataclass(frozen=True)
class Par:
    l: object
    r: object


Program = ProgConst | Assign | Random | Test | ODE | Seq | Choice | Star | Send | Receive | Par

# -- formulas --------------------------------------------------------------------

REL_OPS = ("=", ">=", ">", "pre")


@dataclass(frozen=True)
class TrueF:
    pass


TRUE = TrueF()


@dataclass(frozen=True)
class Rel:
    op: str
    l: object
    r: object


@dataclass(frozen=True)
class PredApp:
    symbol: str
    chans: SetExpr = S.ALL_CHANS
    args: tuple = ()


@dataclass(frozen=True)
class SpacePred:
    symbol: str
    chans: SetExpr = S.ALL_CHANS
    vars: SetExpr = S.ALL_VARS


@dataclass(frozen=True)
class InSet:
    elem: object
    set: SetExpr


@dataclass(frozen=True)
class SetEq:
    l: SetExpr
    r: SetExpr


@dataclass(frozen=True)
class Not:
    f: object


@dataclass(frozen=True)
class And:
    l: object
    r: object


@dataclass(frozen=True)
class Forall:
    var: Variable
    body: object


@dataclass(frozen=True)
class Box:
    prog: object
    post: object


@dataclass(frozen=True)
class AcBox:
    prog: object
    assm: object
    comm: object
    post: object


Formula = TrueF | Rel | PredApp | SpacePred | InSet | SetEq | Not | And | Forall | Box | AcBox

PROGRAM_TYPES = (ProgConst, Assign, Random, Test, ODE, Seq, Choice, Star, Send, Receive, Par)
FORMULA_TYPES = (TrueF, Rel, PredApp, SpacePred, InSet, SetEq, Not, And, Forall, Box, AcBox)


def is_program(x) -> bool:
    return isinstance(x, PROGRAM_TYPES)


def is_formula(x) -> bool:
    return isinstance(x, FORMULA_TYPES)


def is_term(x) -> bool:
    return not is_program(x) and not is_formula(x) and not isinstance(x, (S.Finite, S.Cofinite, S.SetVar, S.Inter, S.Union, S.Minus, S.Complement))


# derived connectives, expanded structurally into the core

def Or(a, b):
    return Not(And(Not(a), Not(b)))


def Imply(a, b):
    return Not(And(a, Not(b)))


def Equiv(a, b):
    return And(Imply(a, b), Imply(b, a))


def Exists(x, body):
    return Not(Forall(x, Not(body)))


FALSE = Not(TRUE)


def conj(*fs):
    out = fs[0]
    for f in fs[1:]:
        out = And(out, f)
    return out


def power(alpha, n: int):
    """alpha^0 = ?true, alpha^(n+1) = alpha ; alpha^n"""
    return Test(TRUE) if n == 0 else Seq(alpha, power(alpha, n - 1))


# -- generic traversal -------------------------------------------------------------

def walk_map(x, fn):
    """Rebuild `x` bottom-up, applying `fn` to every dataclass node (atoms and sets included)."""
    if isinstance(x, tuple):
        return tuple(walk_map(y, fn) for y in x)
    if is_dataclass(x) and not isinstance(x, type):
        vals = {f.name: walk_map(getattr(x, f.name), fn) for f in fields(x)}
        return fn(type(x)(**vals))
    return x


def subnodes(x):
    """Yield every dataclass node inside `x`, pre-order."""
    if isinstance(x, tuple):
        for y in x:
            yield from subnodes(y)
        return
    if is_dataclass(x) and not isinstance(x, type):
        yield x
        for f in fields(x):
            yield from subnodes(getattr(x, f.name))


def normalize_sets(x):
    """Normalize every set annotation (idempotent)."""
    set_types = (S.Inter, S.Union, S.Minus, S.Complement)
    return walk_map(x, lambda n: S.normalize(n) if isinstance(n, set_types) else n)


def syntactic_eq(a, b) -> bool:
    return normalize_sets(a) == normalize_sets(b)


def symbols(x) -> set[str]:
    """Signature: names of function, predicate, program and set symbols."""
    out = set()
    for n in subnodes(x):
        if isinstance(n, (FuncApp, PredApp, SpacePred, ProgConst, S.SetVar)):
            out.add(n.name if isinstance(n, S.SetVar) else n.symbol)
    return out


# -- declarations ----------------------------------------------------------------

SORTS = ("real", "int", "trace", "channel", "chan")


@dataclass(frozen=True)
class SymbolDecl:
    name: str
    kind: str                  # func | pred | spred | prog | setvar
    args: tuple = ()
    result: str | None = None  # result sort for func, universe for setvar
    restricted: bool = False

    def __post_init__(self):
        if self.restricted:
            if self.kind == "func" and self.result != "real":
                raise SortError(f"restricted function {self.name} must be real-sorted")
            if self.kind in ("func", "pred") and any(a != "real" for a in self.args):
                raise SortError(f"restricted symbol {self.name} takes only real arguments")


@dataclass
class Decls:
    vars: dict = field(default_factory=dict)       # name -> sort
    chans: set = field(default_factory=set)
    symbols: dict = field(default_factory=dict)    # name -> SymbolDecl

    def __post_init__(self):
        self.vars.setdefault("mu", "real")

    def copy(self) -> Decls:
        return Decls(dict(self.vars), set(self.chans), dict(self.symbols))

    def merged(self, other: Decls) -> Decls:
        d = self.copy()
        for n, s in other.vars.items():
            d.add_var(n, s)
        for c in other.chans:
            d.add_chan(c)
        for sym in other.symbols.values():
            d.add_symbol(sym)
        return d

    def _free(self, name: str, what: str):
        if name in self.vars or name in self.chans or name in self.symbols:
            raise SortError(f"{what} {name} is already declared")

    def add_var(self, name: str, sort: str):
        if self.vars.get(name) == sort:
            return
        self._free(name, "variable")
        self.vars[name] = sort

    def add_chan(self, name: str):
        if name in self.chans:
            return
        self._free(name, "channel")
        self.chans.add(name)

    def add_symbol(self, decl: SymbolDecl):
        if self.symbols.get(decl.name) == decl:
            return
        self._free(decl.name, "symbol")
        self.symbols[decl.name] = decl

    def var(self, name: str, primed: bool = False) -> Variable:
        return Variable(name, self.vars[name], primed)

    def chan(self, name: str) -> Channel:
        return Channel(name)

    def lookup(self, name: str, kind: str | None = None) -> SymbolDecl:
        if name not in self.symbols:
            raise SortError(f"undeclared symbol {name}")
        d = self.symbols[name]
        if kind is not None and d.kind != kind:
            raise SortError(f"symbol {name} is a {d.kind}, not a {kind}")
        return d


# -- sort checking ---------------------------------------------------------------

class Checker:
    """Bidirectional sort checker; numeric literals take their sort from context."""

    def __init__(self, decls: Decls | None):
        self.decls = decls

    # terms
    def term(self, e, expected: str | None = None):
        e, srt = self._term(e, expected)
        if expected is not None and srt != expected:
            raise SortError(f"expected a {expected} term, got {srt}: {e!r}")
        return e, srt

    def _decl(self, name, kind):
        if self.decls is None:
            return None
        return self.decls.lookup(name, kind)

    def _term(self, e, expected):
        match e:
            case Variable(name, srt, primed):
                if self.decls is not None and name != "mu":
                    if name not in self.decls.vars:
                        raise SortError(f"undeclared variable {name}")
                    if self.decls.vars[name] != srt:
                        raise SortError(f"variable {name} is declared {self.decls.vars[name]}")
                return e, ("channel" if srt == "chan" else srt)
            case Channel(name):
                if self.decls is not None and name not in self.decls.chans:
                    raise SortError(f"undeclared channel {name}")
                return e, "channel"
            case RealLit(v):
                if expected == "int":
                    if v.denominator != 1:
                        raise SortError(f"non-integer literal {v} in integer position")
                    return IntLit(int(v)), "int"
                return e, "real"
            case IntLit(v):
                if expected == "real":
                    return RealLit(v), "real"
                return e, "int"
            case EmptyTrace():
                return e, "trace"
            case Dot(_, srt):
                return e, srt
            case FuncApp(sym, chans, args):
                d = self._decl(sym, "func")
                chans = self.chanset(chans)
                if d is None:
                    args = tuple(self.term(a)[0] for a in args)
                    return FuncApp(sym, chans, args), expected or "real"
                if len(args) != len(d.args):
                    raise SortError(f"{sym} expects {len(d.args)} arguments, got {len(args)}")
                args = tuple(self.term(a, s)[0] for a, s in zip(args, d.args))
                return FuncApp(sym, chans, args), d.result
            case Plus(l, r) | IntPlus(l, r):
                l, r, srt = self._arith(l, r, expected)
                if srt == "int":
                    return IntPlus(l, r), "int"
                return Plus(l, r), "real"
            case Times(l, r):
                l, _ = self.term(l, "real")
                r, _ = self.term(r, "real")
                return Times(l, r), "real"
            case Differential(x):
                x, _ = self.term(x, "real")
                self.require_poly(x, "differential")
                return Differential(x), "real"
            case Val(x) | Stamp(x):
                x, _ = self.term(x, "trace")
                return type(e)(x), "real"
            case Len(x):
                x, _ = self.term(x, "trace")
                return Len(x), "int"
            case ChanOf(x):
                x, _ = self.term(x, "trace")
                return ChanOf(x), "channel"
            case CommItem(ch, v, s):
                ch, _ = self.term(ch, "channel")
                v, _ = self.term(v, "real")
                s, _ = self.term(s, "real")
                self.require_poly(v, "communication value")
                self.require_poly(s, "communication timestamp")
                return CommItem(ch, v, s), "trace"
            case Concat(l, r):
                return Concat(self.term(l, "trace")[0], self.term(r, "trace")[0]), "trace"
            case Proj(x, chans):
                return Proj(self.term(x, "trace")[0], self.chanset(chans)), "trace"
            case At(x, i):
                return At(self.term(x, "trace")[0], self.term(i, "int")[0]), "trace"
        raise SortError(f"not a term: {e!r}")

    def _arith(self, l, r, expected):
        lit = (RealLit, IntLit)
        if expected in ("real", "int"):
            return self.term(l, expected)[0], self.term(r, expected)[0], expected
        if isinstance(l, lit) and not isinstance(r, lit):
            r, srt = self.term(r)
            l, _ = self.term(l, srt)
        else:
            l, srt = self.term(l)
            r, _ = self.term(r, srt)
        if srt not in ("real", "int"):
            raise SortError(f"arithmetic on {srt} terms")
        return l, r, srt

    def chanset(self, s):
        if S.universe(s) != S.CHANS:
            raise SortError("expected a channel set")
        self._setvars(s, S.CHANS)
        return S.normalize(s)

    def varset(self, s):
        if S.universe(s) != S.VARS:
            raise SortError("expected a variable set")
        self._setvars(s, S.VARS)
        return S.normalize(s)

    def _setvars(self, s, u):
        if self.decls is None:
            return
        for n in S.set_vars(s):
            d = self.decls.lookup(n, "setvar")
            if d.result != u:
                raise SortError(f"set variable {n} ranges over {d.result}")

    # polynomial / FOLR recognizers
    def is_poly(self, e) -> bool:
        match e:
            case Variable(_, "real", False) | RealLit() | Dot(_, "real"):
                return True
            case Plus(l, r) | Times(l, r):
                return self.is_poly(l) and self.is_poly(r)
            case FuncApp(sym, _, args):
                d = self._decl(sym, "func")
                return d is not None and d.restricted and all(self.is_poly(a) for a in args)
        return False

    def require_poly(self, e, what):
        if not self.is_poly(e):
            raise SortError(f"{what} must be a polynomial in real variables: {e!r}")

    def is_folr(self, f) -> bool:
        match f:
            case TrueF():
                return True
            case Rel(op, l, r):
                return op in ("=", ">=", ">") and self.is_poly(l) and self.is_poly(r)
            case Not(x):
                return self.is_folr(x)
            case And(l, r):
                return self.is_folr(l) and self.is_folr(r)
            case Forall(x, body):
                return x.sort == "real" and not x.primed and self.is_folr(body)
            case PredApp(sym, _, args):
                d = self._decl(sym, "pred")
                return d is not None and d.restricted and all(self.is_poly(a) for a in args)
        return False

    def require_folr(self, f, what):
        if not self.is_folr(f):
            raise SortError(f"{what} must be a first-order real arithmetic formula: {f!r}")

    # formulas
    def formula(self, f):
        match f:
            case TrueF():
                return f
            case Rel(op, l, r):
                if op not in REL_OPS:
                    raise SortError(f"unknown relation {op}")
                if op == "pre":
                    return Rel(op, self.term(l, "trace")[0], self.term(r, "trace")[0])
                lit = (RealLit, IntLit)
                if isinstance(l, lit) and not isinstance(r, lit):
                    r, srt = self.term(r)
                    l, _ = self.term(l, srt)
                else:
                    l, srt = self.term(l)
                    r, _ = self.term(r, srt)
                if op != "=" and srt not in ("real", "int"):
                    raise SortError(f"{op} compares numbers, got {srt}")
                return Rel(op, l, r)
            case PredApp(sym, chans, args):
                d = self._decl(sym, "pred")
                chans = self.chanset(chans)
                if d is None:
                    return PredApp(sym, chans, tuple(self.term(a)[0] for a in args))
                if len(args) != len(d.args):
                    raise SortError(f"{sym} expects {len(d.args)} arguments, got {len(args)}")
                return PredApp(sym, chans, tuple(self.term(a, s)[0] for a, s in zip(args, d.args)))
            case SpacePred(sym, chans, vs):
                self._decl(sym, "spred")
                return SpacePred(sym, self.chanset(chans), self.varset(vs))
            case InSet(x, s):
                return InSet(self.term(x, "channel")[0], self.chanset(s))
            case SetEq(l, r):
                if S.universe(l) != S.universe(r):
                    raise SortError("set equation between different universes")
                return SetEq(S.normalize(l), S.normalize(r))
            case Not(x):
                return Not(self.formula(x))
            case And(l, r):
                return And(self.formula(l), self.formula(r))
            case Forall(x, body):
                self.term(x)
                return Forall(x, self.formula(body))
            case Box(a, post):
                return Box(self.program(a), self.formula(post))
            case AcBox(a, assm, comm, post):
                return AcBox(self.program(a), self.formula(assm), self.formula(comm), self.formula(post))
        raise SortError(f"not a formula: {f!r}")

    # programs
    def program(self, a):
        match a:
            case ProgConst(sym, chans, vs):
                self._decl(sym, "prog")
                # annotations are upper bounds; only their real/trace part can ever be bound
                return ProgConst(sym, self.chanset(chans), self.varset(vs))
            case Assign(x, rhs):
                self._real_var(x, "assignment")
                rhs, _ = self.term(rhs, "real")
                self.require_poly(rhs, "assigned term")
                return Assign(x, rhs)
            case Random(x):
                self._real_var(x, "random assignment")
                return a
            case Test(c):
                c = self.formula(c)
                self.require_folr(c, "test")
                return Test(c)
            case ODE(eqs, c):
                seen = set()
                out = []
                for x, rhs in eqs:
                    self._real_var(x, "differential equation")
                    if x in seen:
                        raise SortError(f"duplicate ODE variable {x}")
                    seen.add(x)
                    rhs, _ = self.term(rhs, "real")
                    self.require_poly(rhs, "ODE right-hand side")
                    if x == MU and rhs != RealLit(1):
                        raise SortError("global time may only evolve as mu' = 1")
                    out.append((x, rhs))
                c = self.formula(c)
                self.require_folr(c, "evolution domain")
                return ODE(tuple(out), c)
            case Seq(l, r) | Choice(l, r) | Par(l, r):
                return type(a)(self.program(l), self.program(r))
            case Star(b):
                return Star(self.program(b))
            case Send(ch, h, e):
                self.term(ch, "channel")
                self._trace_var(h)
                e, _ = self.term(e, "real")
                self.require_poly(e, "sent value")
                return Send(ch, h, e)
            case Receive(ch, h, x):
                self.term(ch, "channel")
                self._trace_var(h)
                self._real_var(x, "receive")
                return a
        raise SortError(f"not a program: {a!r}")

    def _real_var(self, x, what):
        if not isinstance(x, Variable) or x.sort != "real" or x.primed:
            raise SortError(f"{what} needs an unprimed real variable, got {x}")
        self.term(x)

    def _trace_var(self, h):
        if not isinstance(h, Variable) or h.sort != "trace":
            raise SortError(f"recorder must be a trace variable, got {h}")
        self.term(h)


def sort_check(x, decls: Decls | None = None):
    """Return the sort-annotated AST (literals and `+` resolved by context)."""
    c = Checker(decls)
    if is_program(x):
        return c.program(x)
    if is_formula(x):
        return c.formula(x)
    return c.term(x)[0]


def sort_of(e, decls: Decls | None = None) -> str:
    return Checker(decls).term(e)[1]


def is_program_polynomial(e, decls: Decls | None = None) -> bool:
    return Checker(decls).is_poly(e)


def is_folr(f, decls: Decls | None = None) -> bool:
    return Checker(decls).is_folr(f)


# -- well-formedness -----------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    node: object
    atoms: object
    reason: str

    def __str__(self):
        return self.reason


PAR_SHARED = S.union(S.GT, S.TVAR)


def wellformedness_violations(x) -> list[Violation]:
    from .statics import statics_formula, statics_program

    out = []
    for n in subnodes(x):
        if isinstance(n, Par):
            bl = statics_program(n.l).bv
            br = statics_program(n.r).bv
            shared = S.inter(bl, br)
            if not S.entails_subset(shared, PAR_SHARED):
                out.append(Violation(n, S.minus(shared, PAR_SHARED),
                                     "parallel components share bound variables"))
        elif isinstance(n, AcBox):
            bv = statics_program(n.prog).bv
            fa = S.union(statics_formula(n.assm).fv, statics_formula(n.comm).fv)
            bad = S.inter(fa, bv)
            if not S.entails_subset(bad, S.TVAR):
                out.append(Violation(n, S.minus(bad, S.TVAR),
                                     "assumption or commitment reads variables bound by the program"))
    return out


def check_wellformed(x) -> list[Violation]:
    """Empty list iff `x` is well-formed."""
    return wellformedness_violations(x)
