"""Registry of axioms and rules, the trace algebra rewriter and a ground set decider.

Every entry is stored as concrete text over one shared declaration header and
parsed once.  Entries flagged `imported` are trusted extensions (standard
first-order or trace facts) that are not part of the core calculus.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from . import sets as S
from .sets import Channel, Variable
from .syntax import (
    And, At, ChanOf, CommItem, Concat, EmptyTrace, Forall, InSet, IntLit, IntPlus, Len, Not,
    Proj, Rel, SetEq, Stamp, TrueF, Val, check_wellformed, subnodes, walk_map,
)

DECLS_TEXT = """
real x, y; trace h, h0; chan ch, dh, gh; cvar e;
prog a, b;
chanset Cset, Cset2, Ca, Cb; varset Vset, Vb;
spred P, P1, P2, A, A1, A2, C, C1, C2;
func f: real restricted; pred p(real); pred q restricted;
func g(real, real): real restricted; pred qt(real, real) restricted; pred pt(real, real);
pred Pc(chan, trace); pred Ac(chan, trace); pred Cc(chan, trace); pred Pr(chan, trace, real);
func t1: trace; func t2: trace; func t3: trace;
func r1: real restricted; func r2: real restricted;
func c: chan; func k: int;
pred ptr(trace); func u1: real; func u2: real; func u3: real;
"""

# assumptions and commitments only read recorders
_A, _A1, _A2 = "A{~{}}{TVar}", "A1{~{}}{TVar}", "A2{~{}}{TVar}"
_C, _C1, _C2 = "C{~{}}{TVar}", "C1{~{}}{TVar}", "C2{~{}}{TVar}"
_AC = "{" + _A + ", " + _C + "}"
_UPSILON = f"({_A} & {_C1} -> {_A2}) & ({_A} & {_C2} -> {_A1})"
_A_DROP, _C_DROP = "A{Cset}{TVar}", "C{Cset}{TVar}"
_AC_DROP = "{" + _A_DROP + ", " + _C_DROP + "}"
_PAR_A = "a{Ca}{Vset | TVar | GT}"
_PAR_B = "b{Cb}{~Vset | TVar | GT}"

CALCULUS = {
    "assign": "[x := f] p(x) <-> p(f)",
    "nondetAssign": "[x := *] P <-> forall x P",
    "test": "[?q] P <-> (q -> P)",
    "boxesDual": "[a] P <-> [a]{true, true} P",
    "acComposition": f"[a; b]{_AC} P <-> [a]{_AC} [b]{_AC} P",
    "acChoice": f"[a ++ b]{_AC} P <-> [a]{_AC} P & [b]{_AC} P",
    "acIteration": f"[a*]{_AC} P <-> [?true]{_AC} P & [a]{_AC} [a*]{_AC} P",
    "assumptionWeak": (f"[a]{{true, {_UPSILON}}} true & [a]{{{_A1} & {_A2}, {_C1} & {_C2}}} P"
                       f" -> [a]{{{_A}, {_C1} & {_C2}}} P"),
    "acDropComp": (f"[a{{Ca}}{{Vb}}]{_AC_DROP} P{{Cset}}{{Vset}} -> "
                   f"[a{{Ca}}{{(Vb & Vset) | TVar | GT}} || b{{~Cset | Ca}}{{~Vset | TVar | GT}}]"
                   f"{_AC_DROP} P{{Cset}}{{Vset}}"),
    "gtime": ("[{x' = g(x, mu) & qt(x, mu)}] pt(x, mu) <-> "
              "[{mu' = 1, x' = g(x, mu) & qt(x, mu)}] pt(x, mu)"),
    "send": "[ch(h)!f] Pc(ch, h) <-> forall h0 (h0 = h . <ch, f, mu> -> Pc(ch, h0))",
    "acCom": ("[ch(h)!f]{Ac(ch, h), Cc(ch, h)} Pc(ch, h) <-> "
              "Cc(ch, h) & (Ac(ch, h) -> [ch(h)!f](Cc(ch, h) & (Ac(ch, h) -> Pc(ch, h))))"),
    "comDual": ("[ch(h)?x]{Ac(ch, h), Cc(ch, h)} Pr(ch, h, x) <-> "
                "[x := *][ch(h)!x]{Ac(ch, h), Cc(ch, h)} Pr(ch, h, x)"),
    "acNoCom": f"[a{{{{}}}}{{RVar}}]{_AC} P <-> {_C} & ({_A} -> [a{{{{}}}}{{RVar}}] P)",
    "acWeak": f"[a]{_AC} P <-> {_C} & [a]{_AC} ({_C} & ({_A} -> P))",
    "acInduction": (f"[a*]{_AC} P <-> [?true]{_AC} P & "
                    f"[a*]{{{_A}, true}} (P -> [a]{_AC} P)"),
    "acModalMP": (f"[a]{{{_A}, {_C1} -> {_C2}}} (P1 -> P2) -> "
                  f"([a]{{{_A}, {_C1}}} P1 -> [a]{{{_A}, {_C2}}} P2)"),
}

TRACE_ALGEBRA = {
    "concatDist": "(t1 . t2) down Cset = t1 down Cset . t2 down Cset",
    "projCut": "(t1 down Cset2) down Cset = t1 down (Cset2 & Cset)",
    "projNeutral": "eps down Cset = eps",
    "val": "val(<c, r1, r2>) = r1",
    "time": "stamp(<c, r1, r2>) = r2",
    "chan": "chanof(<c, r1, r2>) = c",
    "concatAssoc": "(t1 . t2) . t3 = t1 . (t2 . t3)",
    "concatNeutral": "t1 . eps = t1 & t1 = eps . t1",
    "projIn": "c in Cset -> <c, r1, r2> down Cset = <c, r1, r2>",
    "projNotIn": "!c in Cset -> <c, r1, r2> down Cset = eps",
    "nonNegative": "len(t1) >= 0",
    "unroll": "len(t1 . <c, r1, r2>) = len(t1) + 1",
    "accessBase": "len(t1) = k -> (t1 . <c, r1, r2>)[k] = <c, r1, r2>",
    "accessInd": "len(t1) > k -> (t1 . <c, r1, r2>)[k] = t1[k]",
}

SET_AXIOMS = {
    "memberEmpty": "!e in {}",
    "memberSingleton": "e in ({ch} & Cset) <-> e = ch & e in Cset",
    "memberFull": "e in ~{}",
    "memberMinus": "e in (Cset \\ Cset2) <-> e in Cset & !e in Cset2",
    "extensionality": "Cset == Cset2 <-> forall e (e in Cset <-> e in Cset2)",
}

IMPORTED = {
    "parComm": (f"[{_PAR_A} || {_PAR_B}]{_AC} P <-> [{_PAR_B} || {_PAR_A}]{_AC} P"),
    "traceOnePoint": "forall h0 (h0 = t1 -> ptr(h0)) <-> ptr(t1)",
    "eqTrans": "u1 = u2 & u2 = u3 -> u1 = u3",
    "valLast": "val(t1 . <c, r1, r2>) = r1",
    "stampLast": "stamp(t1 . <c, r1, r2>) = r2",
    "chanLast": "chanof(t1 . <c, r1, r2>) = c",
    "lenEmpty": "len(eps) = 0",
}

RULES = {
    "MP": (("P1 -> P2", "P1"), "P2"),
    "acG": ((f"{_C} & P",), f"[a]{_AC} P"),
}


class UnknownAxiom(KeyError):
    pass


@dataclass(frozen=True)
class AxiomEntry:
    id: str
    kind: str                # axiom | rule
    premises: tuple          # formulas, empty for axioms
    conclusion: object
    group: str               # calculus | trace | set | imported | rule | derived
    imported: bool = False

    @property
    def formula(self):
        return self.conclusion

    @property
    def arity(self) -> int:
        return len(self.premises)


@lru_cache(maxsize=1)
def decls():
    from .textio import parse_decls

    return parse_decls(DECLS_TEXT)


def _parse(text: str):
    from .textio import parse

    return parse("formula", text, decls().copy(), source="<registry>")


@lru_cache(maxsize=1)
def registry() -> dict:
    out = {}
    groups = (("calculus", CALCULUS), ("trace", TRACE_ALGEBRA), ("set", SET_AXIOMS), ("imported", IMPORTED))
    for group, table in groups:
        for name, text in table.items():
            out[name] = AxiomEntry(name, "axiom", (), _parse(text), group, group == "imported")
    for name, (prems, concl) in RULES.items():
        out[name] = AxiomEntry(name, "rule", tuple(_parse(t) for t in prems), _parse(concl), "rule")
    for entry in out.values():
        for f in (*entry.premises, entry.conclusion):
            bad = check_wellformed(f)
            assert not bad, f"{entry.id}: {bad}"
    return out


def get_axiom(id: str) -> AxiomEntry:
    try:
        return registry()[id]
    except KeyError:
        raise UnknownAxiom(f"unknown axiom or rule {id!r}") from None


def axiom_ids(group: str | None = None) -> list[str]:
    return [n for n, e in registry().items() if group is None or e.group == group]


# -- trace algebra normalizer ------------------------------------------------------

def _factors(e) -> list:
    if isinstance(e, Concat):
        return _factors(e.l) + _factors(e.r)
    if isinstance(e, EmptyTrace):
        return []
    return [e]


def _spine(fs: list):
    if not fs:
        return EmptyTrace()
    out = fs[-1]
    for f in reversed(fs[:-1]):
        out = Concat(f, out)
    return out


def _last_item(e):
    """(prefix, item) when `e` is a concatenation spine ending in a communication item."""
    fs = _factors(e)
    if fs and isinstance(fs[-1], CommItem):
        return _spine(fs[:-1]), fs[-1]
    return None


def _step(e):
    """One bottom-up rewrite of a node whose children are already normal."""
    match e:
        case Concat():
            fs = _factors(e)
            out = _spine(fs)
            return out
        case Proj(EmptyTrace(), _):
            return EmptyTrace()
        case Proj(Concat(l, r), cs):
            return Concat(_norm(Proj(l, cs)), _norm(Proj(r, cs)))
        case Proj(Proj(x, c1), c2):
            return Proj(x, S.inter(c1, c2))
        case Proj(CommItem(Channel() as ch, _, _) as item, cs) if S.is_ground(cs):
            return item if S.member(ch, cs) else EmptyTrace()
        case Val(CommItem(_, v, _)):
            return v
        case Stamp(CommItem(_, _, s)):
            return s
        case ChanOf(CommItem(ch, _, _)):
            return ch
        case Val(x) | Stamp(x) | ChanOf(x) if isinstance(x, Concat):
            got = _last_item(x)
            if got:
                return _norm(type(e)(got[1]))
        case Len(EmptyTrace()):
            return IntLit(0)
        case Len(CommItem()):
            return IntLit(1)
        case Len(Concat() as x):
            got = _last_item(x)
            if got:
                return _norm(IntPlus(_norm(Len(got[0])), IntLit(1)))
        case IntPlus(IntLit(m), IntLit(n)):
            return IntLit(m + n)
        case IntPlus(IntPlus(x, IntLit(m)), IntLit(n)):
            return IntPlus(x, IntLit(m + n))
        case At(x, IntLit(k)):
            items = _factors(x)
            if items and isinstance(items[-1], CommItem):
                n = _norm(Len(_spine(items[:-1])))
                if isinstance(n, IntLit):
                    if n.value == k:
                        return items[-1]
                    if n.value > k:
                        return _norm(At(_spine(items[:-1]), IntLit(k)))
    return e


def _norm(e):
    while True:
        e2 = _step(e)
        if e2 == e:
            return e
        e = e2


def trace_simplify(e):
    """Normalize a term with the trace algebra oriented left to right."""
    def visit(n):
        if isinstance(n, (S.Finite, S.Cofinite, S.SetVar, S.Inter, S.Union, S.Minus, S.Complement)):
            return S.normalize(n)
        return _norm(n)
    prev = None
    while prev != e:
        prev, e = e, walk_map(e, visit)
    return e


# -- ground set formulas ------------------------------------------------------------

def _ground_sets(f) -> bool:
    return all(S.is_ground(n) for n in subnodes(f)
               if isinstance(n, (S.SetVar, S.Inter, S.Union, S.Minus, S.Complement)))


def _bind_chan(f, var: Variable, ch: Channel):
    """Replace free occurrences of `var`; an inner quantifier over `var` shadows it."""
    match f:
        case Forall(v, _) if v == var:
            return f
        case Variable() if f == var:
            return ch
        case Not(x):
            return Not(_bind_chan(x, var, ch))
        case And(l, r):
            return And(_bind_chan(l, var, ch), _bind_chan(r, var, ch))
        case Forall(v, body):
            return Forall(v, _bind_chan(body, var, ch))
    return walk_map(f, lambda n: ch if n == var else n)


def decide_set_formula(f):
    """True/False for ground set formulas, None when not ground or out of fragment."""
    match f:
        case TrueF():
            return True
        case InSet(Channel() as ch, s) if S.is_ground(s):
            return S.member(ch, s)
        case InSet(_, s) if S.is_ground(s):
            if S.is_empty(s):
                return False
            if S.eq(s, S.ALL_CHANS):
                return True
            return None
        case SetEq(l, r) if S.is_ground(l) and S.is_ground(r):
            return S.eq(l, r)
        case Rel("=", Channel() as l, Channel() as r):
            return l == r
        case Rel("=", Variable() as l, Variable() as r) if l == r:
            return True
        case Not(x):
            v = decide_set_formula(x)
            return None if v is None else not v
        case And(l, r):
            vl, vr = decide_set_formula(l), decide_set_formula(r)
            if vl is False or vr is False:
                return False
            if vl is None or vr is None:
                return None
            return True
        case Forall(Variable(_, "chan") as v, body) if _ground_sets(body):
            atoms = {n for n in subnodes(body) if isinstance(n, Channel)}
            for n in subnodes(body):
                if isinstance(n, (S.Finite, S.Cofinite)):
                    atoms |= set(n.atoms)
            probes = sorted(atoms, key=S.atom_key) + S._fresh_probes(S.CHANS, atoms)
            seen = []
            for ch in probes:
                seen.append(decide_set_formula(_bind_chan(body, v, ch)))
            if False in seen:
                return False
            if None in seen:
                return None
            return True
    return None
