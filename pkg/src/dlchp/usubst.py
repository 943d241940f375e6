"""One-pass uniform substitution with taboo sets and parallel contexts.

Replacements are checked against the taboo only where a symbol is replaced;
everything else is a structural recursion that threads the taboo through
binders and program effects.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import sets as S
from .sets import MU, MU_PRIME, Channel, Variable
from .statics import statics
from .syntax import (
    AcBox, And, Assign, At, Box, ChanOf, Checker, Choice, CommItem, Concat, Decls,
    Differential, Dot, EmptyTrace, Forall, FuncApp, InSet, IntLit, IntPlus, Len, Not, ODE,
    PAR_SHARED, Par, Plus, PredApp, ProgConst, Proj, Random, RealLit, Receive, Rel, Send,
    Seq, SetEq, SortError, SpacePred, Stamp, Star, Test, Times, TrueF, Val, is_formula,
    is_program, subnodes,
)


class Clash(Exception):
    """Substitution is undefined; `phase` is taboo, progconst-bound, spacepred-space or dot-capture."""

    def __init__(self, phase: str, symbol: str, atoms, site: str = ""):
        self.phase, self.symbol, self.atoms, self.site = phase, symbol, atoms, site
        super().__init__(str(self))

    def __str__(self):
        from .textio import show_set

        shown = ", ".join(show_set(a) for a in self.atoms if not _set_empty(a))
        where = f" in {self.site}" if self.site else ""
        return f"clash ({self.phase}) on {self.symbol}: {shown}{where}"


class StarPassMismatch(RuntimeError):
    """The second pass over a repetition produced a different program (never expected)."""


class SubstitutionError(ValueError):
    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("; ".join(problems))


def _set_empty(s) -> bool:
    return S.is_ground(s) and S.is_empty(s)


@dataclass(frozen=True)
class Taboo:
    vars: S.SetExpr = S.NO_VARS
    chans: S.SetExpr = S.NO_CHANS

    def __post_init__(self):
        object.__setattr__(self, "vars", S.normalize(self.vars))
        object.__setattr__(self, "chans", S.normalize(self.chans))
        if not (S.is_ground(self.vars) and S.is_ground(self.chans)):
            raise S.SetError("taboo sets must be ground")

    def union(self, vars=S.NO_VARS, chans=S.NO_CHANS) -> Taboo:
        return Taboo(S.union(self.vars, vars), S.union(self.chans, chans))

    def join(self, other: Taboo) -> Taboo:
        return self.union(other.vars, other.chans)

    def covers(self, other: Taboo) -> bool:
        return S.subset_eq(other.vars, self.vars) and S.subset_eq(other.chans, self.chans)


EMPTY_TABOO = Taboo()
TOTAL_TABOO = Taboo(S.ALL_VARS, S.ALL_CHANS)


class Substitution:
    """Symbol name -> replacement.  Function and predicate replacements use
    `Dot(i, sort)` placeholders for their arguments; `dots` is only set for the
    nested argument-plugging substitution."""

    def __init__(self, mapping: dict | None = None, arities: dict | None = None, dots=None):
        self.mapping = dict(mapping or {})
        self.arities = dict(arities or {})
        self.dots = dots

    def bind(self, name: str, replacement, arity: tuple | None = None) -> Substitution:
        m, a = dict(self.mapping), dict(self.arities)
        m[name] = replacement
        if arity is not None:
            a[name] = tuple(arity)
        return Substitution(m, a)

    def __contains__(self, name):
        return name in self.mapping

    def __getitem__(self, name):
        return self.mapping[name]

    def __len__(self):
        return len(self.mapping)

    def __eq__(self, other):
        return isinstance(other, Substitution) and self.mapping == other.mapping and self.dots == other.dots

    def items(self):
        return sorted(self.mapping.items())

    def set_env(self) -> dict:
        return {n: r for n, r in self.mapping.items() if _is_set(r)}

    def show(self) -> str:
        from .textio import show, show_set

        lines = []
        for name, r in self.items():
            if _is_set(r):
                lines.append(f"{name} -> {show_set(r)}")
                continue
            lhs = name
            arity = self.arities.get(name)
            if arity is None:
                arity = _dot_arity(r)
            if arity:
                lhs += "(" + ", ".join(f".{i}" for i in range(len(arity))) + ")"
            lines.append(f"{lhs} -> {show(r)}")
        return "\n".join(lines)

    def __repr__(self):
        return f"Substitution({self.mapping!r})"


def _is_set(x) -> bool:
    return isinstance(x, (S.Finite, S.Cofinite, S.SetVar, S.Inter, S.Union, S.Minus, S.Complement))


def _dot_arity(x) -> tuple:
    dots = {n.index: n.sort for n in subnodes(x) if isinstance(n, Dot)}
    if not dots:
        return ()
    return tuple(dots.get(i, "real") for i in range(max(dots) + 1))


# -- validation -----------------------------------------------------------------

def validate_substitution(sigma: Substitution, decls: Decls) -> Substitution:
    """Check kinds, sorts, dot discipline, restrictions and groundness.

    Returns the substitution with sort-annotated replacements; raises
    SubstitutionError listing every problem.
    """
    problems = []
    out = Substitution(arities=sigma.arities)
    checker = Checker(decls)
    for name, r in sigma.items():
        d = decls.symbols.get(name)
        if d is None:
            problems.append(f"{name}: undeclared symbol")
            continue
        try:
            if d.kind == "setvar":
                if not _is_set(r):
                    raise SortError("set variable needs a set replacement")
                if S.universe(r) != d.result:
                    raise SortError(f"expects a {d.result} set")
                if not S.is_ground(r):
                    raise SortError("set replacement must be ground")
                r = S.normalize(r)
            elif d.kind == "func":
                if is_formula(r) or is_program(r) or _is_set(r):
                    raise SortError("function symbol needs a term replacement")
                _check_dots(r, d.args)
                r, srt = checker.term(r, d.result)
                if d.restricted and not checker.is_poly(r):
                    raise SortError("restricted function needs a polynomial in real variables")
            elif d.kind in ("pred", "spred"):
                if not is_formula(r):
                    raise SortError(f"{d.kind} symbol needs a formula replacement")
                _check_dots(r, d.args if d.kind == "pred" else ())
                r = checker.formula(r)
                if d.restricted and not checker.is_folr(r):
                    raise SortError("restricted predicate needs a first-order real arithmetic formula")
            elif d.kind == "prog":
                if not is_program(r):
                    raise SortError("program constant needs a program replacement")
                _check_dots(r, ())
                r = checker.program(r)
            else:
                raise SortError(f"cannot substitute a {d.kind}")
            for n in subnodes(r):
                if _is_set(n) and not S.is_ground(n):
                    raise SortError("sets inside replacements must be ground")
        except (SortError, S.SetError) as e:
            problems.append(f"{name}: {e}")
            continue
        out = out.bind(name, r)
    if problems:
        raise SubstitutionError(problems)
    return out


def _check_dots(r, arity):
    for n in subnodes(r):
        if isinstance(n, Dot):
            if n.index >= len(arity):
                raise SortError(f"placeholder .{n.index} exceeds arity {len(arity)}")
            if n.sort != arity[n.index]:
                raise SortError(f"placeholder .{n.index} has sort {n.sort}, expected {arity[n.index]}")


# -- projection push-down -------------------------------------------------------------

def project_term(e, chans):
    """A term whose value in state v equals the value of `e` in v projected to `chans`.

    Only trace variables read the state's channel history, so projection lands
    on them; function and predicate applications intersect their channel set.
    """
    chans = S.normalize(chans)
    if chans == S.ALL_CHANS:
        return e
    return _project(e, chans)


def _project(e, chans):
    match e:
        case Variable(_, "trace"):
            return Proj(e, chans)
        case Variable() | Channel() | RealLit() | IntLit() | EmptyTrace() | Dot() | Differential():
            return e
        case FuncApp(sym, c0, args):
            return FuncApp(sym, S.inter(c0, chans), args)
        case Proj(Variable(_, "trace") as h, c1):
            return Proj(h, S.inter(c1, chans))
        case Proj(x, c1):
            return Proj(_project(x, chans), c1)
        case Plus(l, r) | Times(l, r) | IntPlus(l, r) | Concat(l, r) | At(l, r):
            return type(e)(_project(l, chans), _project(r, chans))
        case Val(x) | Stamp(x) | Len(x) | ChanOf(x):
            return type(e)(_project(x, chans))
        case CommItem(ch, v, s):
            return CommItem(_project(ch, chans), _project(v, chans), _project(s, chans))
    raise TypeError(f"not a term: {e!r}")


# -- application ----------------------------------------------------------------------

def _site(node) -> str:
    from .textio import show

    try:
        return show(node)
    except TypeError:
        return repr(node)


def _inst(sigma: Substitution, s):
    env = sigma.set_env()
    return S.substitute(s, env) if env else S.normalize(s)


def _check_taboo(Z: Taboo, repl, symbol: str, node, phase="taboo"):
    st = statics(repl)
    bad_v = S.inter(st.fv, Z.vars)
    bad_c = S.inter(st.cn, Z.chans)
    if not (S.is_empty(bad_v) and S.is_empty(bad_c)):
        raise Clash(phase, symbol, (bad_v, bad_c), _site(node))


def _plug(repl, args):
    """Fill the dots of `repl` with `args` by a nested substitution under empty taboo."""
    if not args:
        return repl
    inner = Substitution(dots=tuple(args))
    if is_formula(repl):
        return usub_formula(inner, EMPTY_TABOO, repl)
    return usub_term(inner, EMPTY_TABOO, repl)


def usub_term(sigma: Substitution, Z: Taboo, e):
    match e:
        case Variable() | Channel() | RealLit() | IntLit() | EmptyTrace():
            return e
        case Dot(i):
            if sigma.dots is None:
                return e
            arg = sigma.dots[i]
            _check_taboo(Z, arg, f".{i}", e, "dot-capture")
            return arg
        case FuncApp(sym, chans, args):
            chans = _inst(sigma, chans)
            if sym in sigma:
                repl = sigma[sym]
                _check_taboo(Z, repl, sym, e)
                plugged = [usub_term(sigma, Z, project_term(a, chans)) for a in args]
                return _plug(repl, plugged)
            return FuncApp(sym, chans, tuple(usub_term(sigma, Z, a) for a in args))
        case Differential(x):
            return Differential(usub_term(sigma, TOTAL_TABOO, x))
        case Proj(x, chans):
            return Proj(usub_term(sigma, Z, x), _inst(sigma, chans))
        case Plus(l, r) | Times(l, r) | IntPlus(l, r) | Concat(l, r) | At(l, r):
            return type(e)(usub_term(sigma, Z, l), usub_term(sigma, Z, r))
        case Val(x) | Stamp(x) | Len(x) | ChanOf(x):
            return type(e)(usub_term(sigma, Z, x))
        case CommItem(ch, v, s):
            return CommItem(usub_term(sigma, Z, ch), usub_term(sigma, Z, v), usub_term(sigma, Z, s))
    raise TypeError(f"not a term: {e!r}")


def usub_formula(sigma: Substitution, Z: Taboo, f):
    match f:
        case TrueF():
            return f
        case Rel(op, l, r):
            return Rel(op, usub_term(sigma, Z, l), usub_term(sigma, Z, r))
        case PredApp(sym, chans, args):
            chans = _inst(sigma, chans)
            if sym in sigma:
                repl = sigma[sym]
                _check_taboo(Z, repl, sym, f)
                plugged = [usub_term(sigma, Z, project_term(a, chans)) for a in args]
                return _plug(repl, plugged)
            return PredApp(sym, chans, tuple(usub_term(sigma, Z, a) for a in args))
        case SpacePred(sym, chans, vs):
            chans, vs = _inst(sigma, chans), _inst(sigma, vs)
            if sym not in sigma:
                return SpacePred(sym, chans, vs)
            repl = sigma[sym]
            if not (S.is_ground(chans) and S.is_ground(vs)):
                raise Clash("spacepred-space", sym, (), _site(f) + " (annotation not ground)")
            st = statics(repl)
            extra_v, extra_c = S.minus(st.fv, vs), S.minus(st.cn, chans)
            if not (S.is_empty(extra_v) and S.is_empty(extra_c)):
                raise Clash("spacepred-space", sym, (extra_v, extra_c), _site(f))
            return repl
        case InSet(x, s):
            return InSet(usub_term(sigma, Z, x), _inst(sigma, s))
        case SetEq(l, r):
            return SetEq(_inst(sigma, l), _inst(sigma, r))
        case Not(x):
            return Not(usub_formula(sigma, Z, x))
        case And(l, r):
            return And(usub_formula(sigma, Z, l), usub_formula(sigma, Z, r))
        case Forall(x, body):
            return Forall(x, usub_formula(sigma, Z.union(S.of(x)), body))
        case Box(a, post):
            a2, W = usub_program(sigma, Z, S.NO_VARS, a)
            return Box(a2, usub_formula(sigma, W, post))
        case AcBox(a, assm, comm, post):
            a2, W = usub_program(sigma, Z, S.NO_VARS, a)
            return AcBox(a2, usub_formula(sigma, W, assm), usub_formula(sigma, W, comm),
                         usub_formula(sigma, W, post))
    raise TypeError(f"not a formula: {f!r}")


def usub_program(sigma: Substitution, Z: Taboo, B, a):
    """Returns (substituted program, output taboo)."""
    B = S.normalize(B)
    ZB = Z.union(B)
    match a:
        case ProgConst(sym, chans, vs):
            chans, vs = _inst(sigma, chans), _inst(sigma, vs)
            if sym not in sigma:
                return ProgConst(sym, chans, vs), Z.union(vs, chans)
            repl = sigma[sym]
            if not (S.is_ground(chans) and S.is_ground(vs)):
                raise Clash("progconst-bound", sym, (), _site(a) + " (annotation not ground)")
            st = statics(repl)
            extra_v, extra_c = S.minus(st.bv, vs), S.minus(st.cn, chans)
            if not (S.is_empty(extra_v) and S.is_empty(extra_c)):
                raise Clash("progconst-bound", sym, (extra_v, extra_c), _site(a))
            return repl, Z.union(st.bv, st.cn)
        case Assign(x, rhs):
            return Assign(x, usub_term(sigma, ZB, rhs)), Z.union(S.of(x))
        case Random(x):
            return a, Z.union(S.of(x))
        case Test(c):
            return Test(usub_formula(sigma, ZB, c)), Z
        case ODE(eqs, c):
            bound = S.of(*[x for x, _ in eqs], *[x.prime() for x, _ in eqs], MU, MU_PRIME)
            inner = ZB.union(bound)
            eqs2 = tuple((x, usub_term(sigma, inner, r)) for x, r in eqs)
            return ODE(eqs2, usub_formula(sigma, inner, c)), Z.union(bound)
        case Send(ch, h, e):
            return Send(ch, h, usub_term(sigma, ZB, e)), Z.union(S.of(h), S.of(ch))
        case Receive(ch, h, x):
            return a, Z.union(S.of(h, x), S.of(ch))
        case Choice(l, r):
            l2, W1 = usub_program(sigma, Z, B, l)
            r2, W2 = usub_program(sigma, Z, B, r)
            return Choice(l2, r2), W1.join(W2)
        case Seq(l, r):
            l2, W1 = usub_program(sigma, Z, B, l)
            r2, W2 = usub_program(sigma, W1, B, r)
            return Seq(l2, r2), W2
        case Star(body):
            first, W = usub_program(sigma, Z, B, body)
            second, _ = usub_program(sigma, W, B, body)
            if second != first:
                raise StarPassMismatch(f"star passes disagree at {_site(a)}")
            return Star(second), W
        case Par(l, r):
            ctx_l = _par_context(sigma, Z, B, r)
            ctx_r = _par_context(sigma, Z, B, l)
            l2, W1 = usub_program(sigma, Z, ctx_l, l)
            r2, W2 = usub_program(sigma, Z, ctx_r, r)
            return Par(l2, r2), W1.join(W2)
    raise TypeError(f"not a program: {a!r}")


def _par_context(sigma, Z, B, sibling):
    done, _ = usub_program(sigma, Z, B, sibling)
    return S.minus(S.union(B, statics(done).bv), PAR_SHARED)


# -- entry points ---------------------------------------------------------------------

def apply(sigma: Substitution, x, taboo: Taboo = EMPTY_TABOO, context=S.NO_VARS):
    """Apply `sigma` to a term, formula or program (programs return (program, W))."""
    if is_program(x):
        return usub_program(sigma, taboo, context, x)
    if is_formula(x):
        return usub_formula(sigma, taboo, x)
    return usub_term(sigma, taboo, x)


def us(sigma: Substitution, phi):
    """Rule US: substitution with empty taboo."""
    return usub_formula(sigma, EMPTY_TABOO, phi)


def us_total(sigma: Substitution, phi):
    """Substitution under the total taboo, as used to instantiate whole rules."""
    return usub_formula(sigma, TOTAL_TABOO, phi)
