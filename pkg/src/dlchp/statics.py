"""Syntactic free/bound/must-bound variables and accessed/written channels."""

from __future__ import annotations

from dataclasses import dataclass

from . import sets as S
from .sets import MU, MU_PRIME, Channel, Variable
from .syntax import (
    AcBox, And, Assign, At, Box, ChanOf, Choice, CommItem, Concat, Differential, Dot,
    EmptyTrace, Forall, FuncApp, InSet, IntLit, IntPlus, Len, Not, ODE, Par, Plus,
    PredApp, ProgConst, Proj, RealLit, Receive, Rel, Random, Send, Seq, SetEq,
    SpacePred, Stamp, Star, Test, Times, TrueF, Val, symbols,
)

NO_V, NO_C = S.NO_VARS, S.NO_CHANS


@dataclass(frozen=True)
class Report:
    fv: S.SetExpr
    cn: S.SetExpr
    bv: S.SetExpr = S.NO_VARS
    mbv: S.SetExpr = S.NO_VARS
    signature: tuple = ()


def _vs(*xs):
    return S.Finite(S.VARS, xs)


def primes(s: S.SetExpr) -> S.SetExpr:
    g = S.normalize(s)
    if isinstance(g, S.Cofinite) and "real" in g.sorts:
        # a cofinite real part: every primed variable may occur
        return S.RVAR
    return _vs(*[a.prime() for a in g.atoms if a.sort == "real" and not a.primed])


def statics_term(e) -> Report:
    fv, cn = _term(e)
    return Report(fv, cn, signature=tuple(sorted(symbols(e))))


def _term(e):
    match e:
        case Variable():
            return _vs(e), (S.ALL_CHANS if e.sort == "trace" else NO_C)
        case Channel() | RealLit() | IntLit() | EmptyTrace() | Dot():
            return NO_V, NO_C
        case FuncApp(_, chans, args):
            fv, cn = _union_terms(args)
            return fv, S.inter(chans, cn)
        case Differential(x):
            fv, _ = _term(x)
            return S.union(fv, primes(fv)), NO_C
        case Proj(x, chans):
            fv, cn = _term(x)
            return fv, S.inter(cn, chans)
        case Val(x) | Stamp(x) | Len(x) | ChanOf(x):
            return _term(x)
        case Plus(l, r) | Times(l, r) | IntPlus(l, r) | Concat(l, r) | At(l, r):
            return _union_terms((l, r))
        case CommItem(ch, v, s):
            return _union_terms((ch, v, s))
    raise TypeError(f"not a term: {e!r}")


def _union_terms(ts):
    fv, cn = NO_V, NO_C
    for t in ts:
        f, c = _term(t)
        fv, cn = S.union(fv, f), S.union(cn, c)
    return fv, cn


def statics_formula(f) -> Report:
    fv, cn = _formula(f)
    return Report(fv, cn, signature=tuple(sorted(symbols(f))))


def _formula(f):
    match f:
        case TrueF():
            return NO_V, NO_C
        case Rel(_, l, r):
            return _union_terms((l, r))
        case PredApp(_, chans, args):
            fv, cn = _union_terms(args)
            return fv, S.inter(chans, cn)
        case SpacePred(_, chans, vs):
            return vs, chans
        case InSet(x, _):
            return _term(x)[0], NO_C
        case SetEq():
            return NO_V, NO_C
        case Not(x):
            return _formula(x)
        case And(l, r):
            fl, cl = _formula(l)
            fr, cr = _formula(r)
            return S.union(fl, fr), S.union(cl, cr)
        case Forall(x, body):
            fv, cn = _formula(body)
            return S.minus(fv, _vs(x)), cn
        case Box(a, post):
            pfv, _, pmbv, _ = _program(a)
            fv, cn = _formula(post)
            return S.union(pfv, S.minus(fv, pmbv)), cn
        case AcBox(a, assm, comm, post):
            fv, cn = _formula(Box(a, post))
            fa, ca = _formula(assm)
            fc, cc = _formula(comm)
            return S.union(fv, fa, fc), S.union(cn, ca, cc)
    raise TypeError(f"not a formula: {f!r}")


def _ode_bound(eqs):
    xs = [x for x, _ in eqs]
    return _vs(*xs, *[x.prime() for x in xs], MU, MU_PRIME)


def statics_program(a) -> Report:
    fv, bv, mbv, cn = _program(a)
    return Report(fv, cn, bv, mbv, tuple(sorted(symbols(a))))


def _program(a):
    match a:
        case ProgConst(_, chans, vs):
            return _DEFAULT_FV, vs, NO_V, chans
        case Assign(x, rhs):
            return _term(rhs)[0], _vs(x), _vs(x), NO_C
        case Random(x):
            return NO_V, _vs(x), _vs(x), NO_C
        case Test(c):
            return _formula(c)[0], NO_V, NO_V, NO_C
        case ODE(eqs, c):
            fv = S.union(_vs(*[x for x, _ in eqs], MU), _union_terms([r for _, r in eqs])[0],
                         _formula(c)[0])
            bv = _ode_bound(eqs)
            return fv, bv, bv, NO_C
        case Send(ch, h, e):
            # the event is stamped with the current global time, so mu is read too
            return S.union(_term(e)[0], _vs(h, MU)), _vs(h), _vs(h), S.Finite(S.CHANS, (ch,))
        case Receive(ch, h, x):
            return _vs(h, MU), _vs(h, x), _vs(h, x), S.Finite(S.CHANS, (ch,))
        case Seq(l, r):
            fl, bl, ml, cl = _program(l)
            fr, br, mr, cr = _program(r)
            return S.union(fl, S.minus(fr, ml)), S.union(bl, br), S.union(ml, mr), S.union(cl, cr)
        case Choice(l, r):
            fl, bl, ml, cl = _program(l)
            fr, br, mr, cr = _program(r)
            return S.union(fl, fr), S.union(bl, br), S.inter(ml, mr), S.union(cl, cr)
        case Par(l, r):
            fl, bl, ml, cl = _program(l)
            fr, br, mr, cr = _program(r)
            return S.union(fl, fr), S.union(bl, br), S.union(ml, mr), S.union(cl, cr)
        case Star(b):
            fv, bv, _, cn = _program(b)
            return fv, bv, NO_V, cn
    raise TypeError(f"not a program: {a!r}")


_DEFAULT_FV = S.union(S.RVAR, S.TVAR)


def fv(x) -> S.SetExpr:
    return _dispatch(x).fv


def cn(x) -> S.SetExpr:
    return _dispatch(x).cn


def bv(a) -> S.SetExpr:
    return statics_program(a).bv


def mbv(a) -> S.SetExpr:
    return statics_program(a).mbv


def _dispatch(x) -> Report:
    from .syntax import is_formula, is_program

    if is_program(x):
        return statics_program(x)
    if is_formula(x):
        return statics_formula(x)
    return statics_term(x)


def statics(x) -> Report:
    return _dispatch(x)
