"""Concrete instances of calculus axioms that the oracle can evaluate.

Each instance substitutes concrete programs, terms and formulas for every
uninterpreted symbol of an axiom, so the result is closed under the empty
interpretation and can be validated on a grid of states.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from . import sets as S
from .axioms import decls as registry_decls, get_axiom
from .oracle import Oracle, OracleConfig, ValidationReport, validate_on_samples
from .sets import MU, Channel, Variable
from .syntax import CommItem, Concat, EmptyTrace, IntLit, RealLit, Rel, subnodes
from .textio import parse_substitution
from .usubst import Substitution, us, validate_substitution

# axioms whose instances leave the discrete fragment or need unbounded repetition
EXEMPT = {
    "gtime": "needs a differential equation",
    "acIteration": "repetition of a communicating body does not stabilize on a finite grid",
    "acInduction": "repetition of a communicating body does not stabilize on a finite grid",
}

_AS = "A -> len(h down {dh}) = 0 | val(h down {dh}) >= 1"
_CS = "C -> len(h down {ch}) <= 2"

INSTANCES = {
    "assign": ("assign", "f -> x + 1, p(.) -> . >= 2"),
    "nondetAssign": ("nondetAssign", "P -> x * x >= 0 & y >= y"),
    "test": ("test", "q -> x >= 1, P -> y + x >= 1"),
    "boxesDual": ("boxesDual", "a -> x := x + 1; ch(h)!x, P -> x >= 1 & len(h) >= 1"),
    "acComposition": ("acComposition",
                      f"a -> ch(h)!x, b -> x := x + 1 ++ dh(h)?y, {_AS}, {_CS}, P -> x >= y | y >= 1"),
    "acChoice": ("acChoice", f"a -> ch(h)!1, b -> ?x >= 1; dh(h)!x, {_AS}, {_CS}, P -> len(h) >= 1"),
    "acNoCom": ("acNoCom", f"a -> x := y + 1; ?x >= 2, {_AS}, {_CS}, P -> x >= y"),
    "acWeak": ("acWeak", f"a -> ch(h)!x; dh(h)?y, {_AS}, {_CS}, P -> y >= 1"),
    "acCom": ("acCom", "f -> x + 1, Ac(.0, .1) -> len(.1) >= 1, Cc(.0, .1) -> val(.1 down {ch}) >= 1,"
                       " Pc(.0, .1) -> val(.1) = x + 1"),
    "send": ("send", "f -> x + y, Pc(.0, .1) -> val(.1 down {ch}) = x + y"),
    "comDual": ("comDual", "Ac(.0, .1) -> val(.1) >= 1, Cc(.0, .1) -> len(.1 down {ch}) >= 1,"
                           " Pr(.0, .1, .2) -> .2 = val(.1) & .2 >= 1"),
    "acModalMP": ("acModalMP", "a -> ch(h)!x ++ x := 1, A -> len(h) >= 0, C1 -> len(h) <= 1,"
                               " C2 -> len(h down {ch}) <= 1, P1 -> x >= 1, P2 -> x + 1 >= 2"),
    "assumptionWeak": ("assumptionWeak",
                       "a -> ch(h)?x; dh(h)!x, A -> true, A1 -> val(h down {ch}) >= 1,"
                       " A2 -> val(h down {ch}) <= 1, C1 -> len(h) >= 1, C2 -> val(h) = 1, P -> x = 1"),
    "acDropComp": ("acDropComp",
                   "a -> ch(h)!x, b -> dh(h)?y, Ca -> {ch}, Cset -> {ch}, Vb -> {h}, Vset -> {h, x},"
                   " A -> true, C -> len(h down {ch}) <= 1, P -> val(h down {ch}) = x"),
}

X, Y, H = Variable("x"), Variable("y"), Variable("h", "trace")
STATE_VARS = (X, Y, H, MU)
TRACE_DOMAIN = ((), (("ch", 1, 0),), (("dh", 2, 0),), (("ch", 0, 0), ("dh", 1, 1)))


@dataclass(frozen=True)
class Instance:
    name: str
    axiom: str
    bindings: str
    formula: object


@lru_cache(maxsize=None)
def instance(name: str) -> Instance:
    ax, text = INSTANCES[name]
    d = registry_decls().copy()
    sigma = validate_substitution(parse_substitution(text, d), d)
    return Instance(name, ax, text, us(sigma, get_axiom(ax).formula))


def instance_oracle() -> Oracle:
    return Oracle(cfg=OracleConfig(real_domain=(0, 1, 2), trace_domain=TRACE_DOMAIN,
                                   channels=("ch", "dh", "gh"), fuel=3))


def validate_instance(name: str, n: int | None = None) -> ValidationReport:
    inst = instance(name)
    return validate_on_samples(inst.formula, STATE_VARS, instance_oracle(), n)


# -- ground trace algebra samples ---------------------------------------------------

CHANNEL_POOL = (Channel("ch"), Channel("dh"), Channel("gh"))


def trace_literal(value):
    """The concatenation term denoting a trace value (a tuple of events)."""
    out = EmptyTrace()
    for ch, val, st in value:
        item = CommItem(Channel(ch), RealLit(Fraction(val)), RealLit(Fraction(st)))
        out = item if isinstance(out, EmptyTrace) else Concat(out, item)
    return out


def random_trace(rng: random.Random, max_len: int = 3, values=(0, 1, 2)):
    return tuple((rng.choice(CHANNEL_POOL).name, Fraction(rng.choice(values)), Fraction(rng.choice(values)))
                 for _ in range(rng.randrange(max_len + 1)))


def random_chan_set(rng: random.Random):
    atoms = [c for c in CHANNEL_POOL if rng.random() < 0.5]
    return S.Cofinite(S.CHANS, tuple(atoms)) if rng.random() < 0.3 else S.of(*atoms, universe=S.CHANS)


def ground_trace_instance(name: str, rng: random.Random):
    """Instantiate a trace algebra axiom with random ground traces, sets and values."""
    values = (0, 1, 2)
    sigma = Substitution()
    for t in ("t1", "t2", "t3"):
        sigma = sigma.bind(t, trace_literal(random_trace(rng)))
    for r in ("r1", "r2"):
        sigma = sigma.bind(r, RealLit(Fraction(rng.choice(values))))
    sigma = sigma.bind("c", rng.choice(CHANNEL_POOL))
    sigma = sigma.bind("k", IntLit(rng.randrange(4)))
    sigma = sigma.bind("Cset", random_chan_set(rng)).bind("Cset2", random_chan_set(rng))
    return us(sigma, get_axiom(name).formula)


def equations(f) -> list:
    """Every equation or comparison inside `f`, as (left, right) term pairs."""
    return [(n.l, n.r) for n in subnodes(f) if isinstance(n, Rel)]
