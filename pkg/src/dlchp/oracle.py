"""Executable denotational semantics for the discrete fragment (no ODEs).

Values: reals are `Fraction`, integers `int`, channels their name, traces
tuples of ``(channel, value, stamp)``.  A computation is ``(trace, final)``
for a fixed initial state, where the trace holds recorded events
``(recorder, channel, value, stamp)`` and ``final`` is a `State` or None for
an unfinished computation.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction

from . import sets as S
from .sets import MU, Channel, Variable
from .statics import bv as bound_vars, cn as written_chans
from .syntax import (
    AcBox, And, Assign, At, Box, ChanOf, Choice, CommItem, Concat, Differential, Dot,
    EmptyTrace, Forall, FuncApp, InSet, IntLit, IntPlus, Len, Not, ODE, Par, Plus, PredApp,
    ProgConst, Proj, Random, RealLit, Receive, Rel, Send, Seq, SetEq, SpacePred, Stamp, Star,
    Test, Times, TrueF, Val, subnodes,
)


class FragmentError(ValueError):
    """The input leaves the fragment the oracle can evaluate."""


_DEFAULTS = {"real": Fraction(0), "int": 0, "trace": ()}


class State:
    """Immutable variable assignment; unset real/int/trace variables read 0/0/eps."""

    __slots__ = ("_items", "_map", "_hash")

    def __init__(self, values: dict | None = None):
        m = {}
        for x, val in (values or {}).items():
            val = _coerce(x, val)
            if _DEFAULTS.get(x.sort, object()) != val:
                m[x] = val
        self._map = m
        self._items = tuple(sorted(m.items(), key=lambda kv: S.atom_key(kv[0])))
        self._hash = hash(self._items)

    def get(self, x: Variable, default=None):
        if x in self._map:
            return self._map[x]
        return _DEFAULTS.get(x.sort, default)

    def set(self, x: Variable, val) -> State:
        m = dict(self._map)
        m[x] = val
        return State(m)

    def items(self):
        return self._items

    def __eq__(self, other):
        return isinstance(other, State) and self._items == other._items

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return "State(" + ", ".join(f"{x}={show_value(v)}" for x, v in self._items) + ")"


def _coerce(x: Variable, val):
    if x.sort == "real":
        return Fraction(val)
    if x.sort == "int":
        return int(val)
    if x.sort == "trace":
        return tuple((str(c), Fraction(a), Fraction(s)) for c, a, s in val)
    return val


def show_value(v) -> str:
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(v, tuple):
        return "[" + ", ".join("(" + ", ".join(show_value(p) for p in ev) + ")" for ev in v) + "]"
    return str(v)


def project_state(v: State, chans) -> State:
    """Filter every trace variable down to events on `chans`."""
    m = {}
    for x, val in v.items():
        m[x] = _proj(val, chans) if x.sort == "trace" else val
    return State(m)


def _proj(trace, chans):
    return tuple(ev for ev in trace if S.member(Channel(ev[0]), chans))


def append_recorded(v: State, rec) -> State:
    """State-trace concatenation: append each recorder's events to its variable."""
    if not rec:
        return v
    m = dict(v.items())
    for h, ch, val, st in rec:
        hv = Variable(h, "trace")
        m[hv] = m.get(hv, ()) + ((ch, val, st),)
    return State(m)


@dataclass
class Interp:
    """Interpretation of uninterpreted symbols as Python callables.

    funcs/preds take evaluated arguments; spreds take a state (already projected
    and masked to the annotation); progs take an initial state and return
    complete computations ``(recorded trace, final state or None)``.
    """
    funcs: dict = field(default_factory=dict)
    preds: dict = field(default_factory=dict)
    spreds: dict = field(default_factory=dict)
    progs: dict = field(default_factory=dict)


@dataclass
class OracleConfig:
    real_domain: tuple = (0, 1, 2)
    int_domain: tuple = (0, 1, 2)
    trace_domain: tuple = ((), (("ch", 0, 0),))
    channels: tuple = ("ch", "dh")
    fuel: int = 4
    exact_star: bool = False
    max_states: int = 512
    seed: int = 0

    def __post_init__(self):
        if not self.real_domain or not self.channels:
            raise ValueError("oracle domains must be non-empty")
        if self.fuel < 1:
            raise ValueError("star fuel must be at least 1")


class Oracle:
    def __init__(self, interp: Interp | None = None, cfg: OracleConfig | None = None):
        self.I = interp or Interp()
        self.cfg = cfg or OracleConfig()
        self._cache = {}
        self._extra = frozenset()
        self.unstable = []

    # -- terms -------------------------------------------------------------------

    def lookup(self, v: State, x: Variable):
        if x.sort == "chan":
            return v.get(x, self.cfg.channels[0])
        return v.get(x)

    def eval_term(self, v: State, e):
        match e:
            case Variable():
                return self.lookup(v, e)
            case Channel(name):
                return name
            case RealLit(val):
                return val
            case IntLit(val):
                return val
            case EmptyTrace():
                return ()
            case FuncApp(sym, chans, args):
                fn = self._symbol(self.I.funcs, sym)
                vp = v if chans == S.ALL_CHANS else project_state(v, chans)
                return fn(*[self.eval_term(vp, a) for a in args])
            case Plus(l, r) | IntPlus(l, r):
                return self.eval_term(v, l) + self.eval_term(v, r)
            case Times(l, r):
                return self.eval_term(v, l) * self.eval_term(v, r)
            case Val(x):
                t = self.eval_term(v, x)
                return t[-1][1] if t else Fraction(0)
            case Stamp(x):
                t = self.eval_term(v, x)
                return t[-1][2] if t else Fraction(0)
            case ChanOf(x):
                t = self.eval_term(v, x)
                return t[-1][0] if t else self.cfg.channels[0]
            case Len(x):
                return len(self.eval_term(v, x))
            case CommItem(ch, val, st):
                return ((self.eval_term(v, ch), Fraction(self.eval_term(v, val)),
                         Fraction(self.eval_term(v, st))),)
            case Concat(l, r):
                return self.eval_term(v, l) + self.eval_term(v, r)
            case Proj(x, chans):
                return _proj(self.eval_term(v, x), self._ground(chans))
            case At(x, i):
                t, k = self.eval_term(v, x), self.eval_term(v, i)
                return (t[k],) if 0 <= k < len(t) else ()
            case Differential() | Dot():
                raise FragmentError(f"cannot evaluate {type(e).__name__}")
        raise TypeError(f"not a term: {e!r}")

    def _symbol(self, table, sym):
        if sym not in table:
            raise FragmentError(f"symbol {sym} is not interpreted")
        return table[sym]

    def _ground(self, s):
        if not S.is_ground(s):
            raise FragmentError("set variables are not interpreted")
        return S.normalize(s)

    # -- formulas ----------------------------------------------------------------

    def eval_formula(self, v: State, f) -> bool:
        match f:
            case TrueF():
                return True
            case Rel(op, l, r):
                a, b = self.eval_term(v, l), self.eval_term(v, r)
                if op == "=":
                    return a == b
                if op == ">=":
                    return a >= b
                if op == ">":
                    return a > b
                return b[:len(a)] == a
            case PredApp(sym, chans, args):
                fn = self._symbol(self.I.preds, sym)
                vp = v if chans == S.ALL_CHANS else project_state(v, chans)
                return bool(fn(*[self.eval_term(vp, a) for a in args]))
            case SpacePred(sym, chans, vs):
                fn = self._symbol(self.I.spreds, sym)
                return bool(fn(self._mask(v, self._ground(chans), self._ground(vs))))
            case InSet(x, s):
                return S.member(Channel(self.eval_term(v, x)), self._ground(s))
            case SetEq(l, r):
                return S.eq(self._ground(l), self._ground(r))
            case Not(x):
                return not self.eval_formula(v, x)
            case And(l, r):
                return self.eval_formula(v, l) and self.eval_formula(v, r)
            case Forall(x, body):
                return all(self.eval_formula(v.set(x, d), body) for d in self._domain(v, x, body))
            case Box(a, post):
                return all(self.eval_formula(append_recorded(w, tau), post)
                           for tau, w in self.denote(v, a) if w is not None)
            case AcBox(a, assm, comm, post):
                return all(self._ac_holds(v, tau, w, assm, comm, post) for tau, w in self.denote(v, a))
        raise TypeError(f"not a formula: {f!r}")

    def _ac_holds(self, v, tau, w, assm, comm, post) -> bool:
        strict = all(self.eval_formula(append_recorded(v, tau[:k]), assm) for k in range(len(tau)))
        if strict and not self.eval_formula(append_recorded(v, tau), comm):
            return False
        if w is None or not strict:
            return True
        if not self.eval_formula(append_recorded(v, tau), assm):
            return True
        return self.eval_formula(append_recorded(w, tau), post)

    def _mask(self, v: State, chans, vs) -> State:
        m = {}
        for x, val in project_state(v, chans).items():
            if S.member(x, vs):
                m[x] = val
        return State(m)

    def _domain(self, v: State, x: Variable, body):
        if x.sort == "real":
            base = [Fraction(d) for d in self.cfg.real_domain] + sorted(self._extra)
        elif x.sort == "int":
            base = list(self.cfg.int_domain)
        elif x.sort == "trace":
            base = [_coerce(x, t) for t in self.cfg.trace_domain]
        else:
            return list(self.cfg.channels) + ["_other"]
        # values pinned by an equation x = t are always tried
        for n in subnodes(body):
            if isinstance(n, Rel) and n.op == "=":
                for side, other in ((n.l, n.r), (n.r, n.l)):
                    if side == x and x not in set(subnodes(other)):
                        try:
                            base.append(self.eval_term(v, other))
                        except (FragmentError, TypeError, IndexError):
                            pass
        out = []
        for d in base:
            if d not in out:
                out.append(d)
        return out

    # -- programs ----------------------------------------------------------------

    def denote(self, v: State, a) -> frozenset:
        key = (v, a, self._extra)
        if key not in self._cache:
            self._cache[key] = frozenset(self._denote(v, a))
        return self._cache[key]

    def _denote(self, v: State, a):
        least = ((), None)
        match a:
            case Assign(x, rhs):
                return {least, ((), v.set(x, self.eval_term(v, rhs)))}
            case Random(x):
                return {least} | {((), v.set(x, d)) for d in self._domain(v, x, TrueF())}
            case Test(c):
                return {least, ((), v)} if self.eval_formula(v, c) else {least}
            case Send(ch, h, e):
                ev = ((h.name, ch.name, Fraction(self.eval_term(v, e)), self.lookup(v, MU)),)
                return {least, (ev, None), (ev, v)}
            case Receive(ch, h, x):
                out = {least}
                for d in self._domain(v, x, TrueF()):
                    ev = ((h.name, ch.name, d, self.lookup(v, MU)),)
                    out |= {(ev, None), (ev, v.set(x, d))}
                return out
            case Choice(l, r):
                return self.denote(v, l) | self.denote(v, r)
            case Seq(l, r):
                out = set()
                for t1, u in self.denote(v, l):
                    out.add((t1, None))
                    if u is not None:
                        out |= {(t1 + t2, w) for t2, w in self.denote(u, r)}
                return out
            case Star(body):
                return self._star(v, body)
            case Par(l, r):
                return self._par(v, l, r)
            case ProgConst(sym, chans, vs):
                return self._progconst(v, sym, self._ground(chans), self._ground(vs))
            case ODE():
                raise FragmentError("differential equations are outside the oracle fragment")
        raise TypeError(f"not a program: {a!r}")

    def _star(self, v, body):
        total = {((), None), ((), v)}
        frontier = {((), v)}
        for _ in range(self.cfg.fuel):
            step = set()
            for t1, u in frontier:
                if u is None:
                    continue
                for t2, w in self.denote(u, body):
                    step.add((t1 + t2, w))
            new = step - total
            if not new:
                return total
            total |= new
            frontier = {c for c in new if c[1] is not None}
        self.unstable.append((v, Star(body)))
        if self.cfg.exact_star:
            raise FragmentError("repetition did not stabilize within fuel")
        return total

    def _par(self, v, l, r):
        cl, cr = S.normalize(written_chans(l)), S.normalize(written_chans(r))
        bl = S.normalize(bound_vars(l))
        # receivers also try every value the components send
        extra, saved = self._extra, self._extra
        for _ in range(3):
            self._extra = extra
            dl, dr = self.denote(v, l), self.denote(v, r)
            self._extra = saved
            sent = {ev[2] for t, _ in dl | dr for ev in t}
            if sent <= extra:
                break
            extra = extra | sent
        out = set()
        for t1, w1 in dl:
            for t2, w2 in dr:
                if w1 is not None and w2 is not None:
                    if self.lookup(w1, MU) != self.lookup(w2, MU):
                        continue
                    w = _merge(w1, w2, bl)
                else:
                    w = None
                for tau in _interleave(t1, t2, cl, cr):
                    out.add((tau, w))
        return out

    def _progconst(self, v, sym, chans, vs):
        fn = self._symbol(self.I.progs, sym)
        out = set()
        for tau, w in fn(v):
            tau = tuple(tau)
            for h, ch, _, _ in tau:
                if not S.member(Channel(ch), chans):
                    raise FragmentError(f"{sym} communicates on {ch} outside its annotation")
            if w is not None:
                for x, val in set(w.items()) ^ set(v.items()):
                    if not S.member(x, vs):
                        raise FragmentError(f"{sym} binds {x} outside its annotation")
            out |= _prefixes(tau, w)
        out.add(((), None))
        return out

    # -- validation --------------------------------------------------------------

    def sample_states(self, variables, n: int | None = None):
        """Cartesian grid over the declared variables, or a seeded sample when too large."""
        doms = []
        for x in variables:
            if x.sort == "real":
                doms.append([Fraction(d) for d in self.cfg.real_domain])
            elif x.sort == "int":
                doms.append(list(self.cfg.int_domain))
            elif x.sort == "trace":
                doms.append([_coerce(x, t) for t in self.cfg.trace_domain])
            else:
                doms.append(list(self.cfg.channels))
        limit = n if n is not None else self.cfg.max_states
        size = 1
        for d in doms:
            size *= len(d)
        if size <= limit:
            for combo in itertools.product(*doms):
                yield State(dict(zip(variables, combo)))
            return
        rng = random.Random(self.cfg.seed)
        for _ in range(limit):
            yield State({x: rng.choice(d) for x, d in zip(variables, doms)})


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    checked: int
    counterexample: State | None = None

    def __str__(self):
        if self.valid:
            return f"valid-on-samples ({self.checked} states)"
        return f"counterexample: {self.counterexample}"


def validate_on_samples(phi, variables, oracle: Oracle | None = None, n: int | None = None) -> ValidationReport:
    oracle = oracle or Oracle()
    checked = 0
    for v in oracle.sample_states(list(variables), n):
        checked += 1
        if not oracle.eval_formula(v, phi):
            return ValidationReport(False, checked, v)
    return ValidationReport(True, checked)


def _merge(w1: State, w2: State, bound_left) -> State:
    m = {}
    keys = {x for x, _ in w1.items()} | {x for x, _ in w2.items()}
    for x in keys:
        m[x] = w1.get(x) if S.member(x, bound_left) else w2.get(x)
    return State(m)


def _interleave(t1, t2, cl, cr):
    """Merged traces whose restrictions to each side's channels are t1 and t2."""
    out = []

    def go(i, j, acc, last):
        if i == len(t1) and j == len(t2):
            out.append(tuple(acc))
            return
        if i < len(t1):
            ev = t1[i]
            shared = S.member(Channel(ev[1]), cr)
            if not shared:
                if ev[3] >= last:
                    go(i + 1, j, acc + [ev], ev[3])
            elif j < len(t2) and t2[j] == ev and ev[3] >= last:
                go(i + 1, j + 1, acc + [ev], ev[3])
        if j < len(t2):
            ev = t2[j]
            if not S.member(Channel(ev[1]), cl) and ev[3] >= last:
                go(i, j + 1, acc + [ev], ev[3])

    start = min([ev[3] for ev in t1 + t2], default=Fraction(0))
    go(0, 0, [], start)
    return out


def _prefixes(tau, w):
    out = {(tau[:k], None) for k in range(len(tau) + 1)}
    out.add((tau, w))
    return out


def check_denotation(v: State, comps) -> list[str]:
    """Problems with prefix-closure, totality and chronology (empty when fine)."""
    problems = []
    comps = set(comps)
    if ((), None) not in comps:
        problems.append("not total: (v, eps, bottom) missing")
    t0 = v.get(MU)
    for tau, w in comps:
        for k in range(len(tau) + 1):
            if (tau[:k], None) not in comps:
                problems.append(f"not prefix-closed at {tau[:k]}")
        stamps = [ev[3] for ev in tau]
        if any(a > b for a, b in zip(stamps, stamps[1:])) or (stamps and stamps[0] < t0):
            problems.append(f"not chronological: {tau}")
        if w is not None and stamps and stamps[-1] > w.get(MU):
            problems.append(f"final time precedes communication: {tau}")
    return problems


def _split_top(text: str) -> list[str]:
    out, depth, cur = [], 0, ""
    for ch in text:
        depth += {"(": 1, "[": 1, ")": -1, "]": -1}.get(ch, 0)
        if ch == "," and depth == 0:
            out.append(cur)
            cur = ""
        else:
            cur += ch
    if cur.strip():
        out.append(cur)
    return out


def parse_state(text: str, decls) -> State:
    """Read ``x=1, y=1/2, h=[(ch,4,0)], e=dh`` using the sorts in `decls`."""
    import ast
    import re

    m = {}
    for part in _split_top(text):
        if "=" not in part:
            raise ValueError(f"expected name=value, got {part.strip()!r}")
        name, raw = (s.strip() for s in part.split("=", 1))
        if name not in decls.vars:
            raise ValueError(f"undeclared variable {name}")
        x = decls.var(name)
        if x.sort == "trace":
            quoted = re.sub(r"-?\d+(?:/\d+)?|[A-Za-z_]\w*", lambda t: repr(t.group()), raw)
            events = ast.literal_eval(quoted)
            m[x] = tuple((c, Fraction(a), Fraction(s)) for c, a, s in events)
        else:
            m[x] = raw
    return State(m)
