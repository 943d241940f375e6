"""Seeded random syntax for property suites and the experiment scripts.

Everything here is well-sorted against `SIGNATURE`; the generators make no
attempt at well-formedness beyond what the sort checker enforces.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from . import sets as S
from .sets import MU, Channel, Variable
from .syntax import (
    AcBox, And, Assign, Box, Choice, CommItem, Concat, Dot, EmptyTrace, Forall, FuncApp, Len,
    Not, Par, Plus, PredApp, ProgConst, Proj, Random, RealLit, Receive, Rel, Send, Seq,
    SpacePred, Star, Test, Times, TRUE, Val, sort_check,
)
from .textio import parse_decls
from .usubst import Substitution, Taboo

SIGNATURE = """
real x, y, z; trace h, h2; chan ch, dh, gh;
func f: real restricted; func g(real, real): real restricted;
pred q restricted; pred r(real) restricted;
spred P; prog a, b;
"""

REALS = tuple(Variable(n) for n in ("x", "y", "z"))
TRACES = (Variable("h", "trace"), Variable("h2", "trace"))
CHANS = tuple(Channel(n) for n in ("ch", "dh", "gh"))


def signature():
    return parse_decls(SIGNATURE)


@dataclass
class GenConfig:
    depth: int = 5
    reals: tuple = REALS
    traces: tuple = TRACES
    chans: tuple = CHANS
    prog_consts: bool = True
    symbols: bool = True
    literals: tuple = (0, 1, 2)


class Gen:
    def __init__(self, seed: int = 0, cfg: GenConfig | None = None):
        self.rng = random.Random(seed)
        self.cfg = cfg or GenConfig()

    def pick(self, xs):
        return xs[self.rng.randrange(len(xs))]

    # sets
    def var_set(self, pool=None):
        pool = pool or (*self.cfg.reals, *self.cfg.traces)
        atoms = [v for v in pool if self.rng.random() < 0.4]
        if self.rng.random() < 0.25:
            return S.Cofinite(S.VARS, tuple(atoms))
        return S.of(*atoms, universe=S.VARS)

    def chan_set(self):
        atoms = [c for c in self.cfg.chans if self.rng.random() < 0.4]
        if self.rng.random() < 0.25:
            return S.Cofinite(S.CHANS, tuple(atoms))
        return S.of(*atoms, universe=S.CHANS)

    # terms
    def poly(self, depth: int, dots: int = 0):
        """Polynomial over real variables, literals, restricted symbols and `dots` placeholders."""
        leaves = ["var", "lit"] + (["dot"] if dots else []) + (["f"] if self.cfg.symbols else [])
        if depth <= 0 or self.rng.random() < 0.35:
            kind = self.pick(leaves)
        else:
            kind = self.pick(leaves + ["plus", "times"] + (["g"] if self.cfg.symbols else []))
        match kind:
            case "var":
                return self.pick(self.cfg.reals)
            case "lit":
                return RealLit(self.pick(self.cfg.literals))
            case "dot":
                return Dot(self.rng.randrange(dots))
            case "f":
                return FuncApp("f", S.ALL_CHANS, ())
            case "plus":
                return Plus(self.poly(depth - 1, dots), self.poly(depth - 1, dots))
            case "times":
                return Times(self.poly(depth - 1, dots), self.poly(depth - 1, dots))
            case "g":
                return FuncApp("g", S.ALL_CHANS, (self.poly(depth - 1, dots), self.poly(depth - 1, dots)))

    def folr(self, depth: int, dots: int = 0):
        if depth <= 0 or self.rng.random() < 0.4:
            kind = self.pick(["rel", "rel", "true"] + (["q", "r"] if self.cfg.symbols else []))
        else:
            kind = self.pick(["not", "and", "forall", "rel"])
        match kind:
            case "rel":
                return Rel(self.pick((">=", ">", "=")), self.poly(1, dots), self.poly(1, dots))
            case "true":
                return TRUE
            case "q":
                return PredApp("q", S.ALL_CHANS, ())
            case "r":
                return PredApp("r", S.ALL_CHANS, (self.poly(1, dots),))
            case "not":
                return Not(self.folr(depth - 1, dots))
            case "and":
                return And(self.folr(depth - 1, dots), self.folr(depth - 1, dots))
            case "forall":
                return Forall(self.pick(self.cfg.reals), self.folr(depth - 1, dots))

    def trace_term(self, depth: int):
        if depth <= 0 or self.rng.random() < 0.4:
            return self.pick([*self.cfg.traces, EmptyTrace()])
        kind = self.pick(["proj", "concat", "item"])
        if kind == "proj":
            return Proj(self.trace_term(depth - 1), self.chan_set())
        if kind == "concat":
            return Concat(self.trace_term(depth - 1), self.trace_term(depth - 1))
        return CommItem(self.pick(self.cfg.chans), self.poly(1), self.poly(0))

    # programs
    def program(self, depth: int | None = None):
        depth = self.cfg.depth if depth is None else depth
        atoms = ["assign", "random", "test", "send", "receive"] + (["const"] if self.cfg.prog_consts else [])
        if depth <= 1 or self.rng.random() < 0.3:
            kind = self.pick(atoms)
        else:
            kind = self.pick(["seq", "choice", "star", "par", "seq", "choice"])
        match kind:
            case "assign":
                return Assign(self.pick(self.cfg.reals), self.poly(2))
            case "random":
                return Random(self.pick(self.cfg.reals))
            case "test":
                return Test(self.folr(2))
            case "send":
                return Send(self.pick(self.cfg.chans), self.pick(self.cfg.traces), self.poly(1))
            case "receive":
                return Receive(self.pick(self.cfg.chans), self.pick(self.cfg.traces), self.pick(self.cfg.reals))
            case "const":
                vs = S.union(self.var_set(self.cfg.reals), S.TVAR)
                return ProgConst(self.pick(("a", "b")), self.chan_set(), vs)
            case "seq":
                return Seq(self.program(depth - 1), self.program(depth - 1))
            case "choice":
                return Choice(self.program(depth - 1), self.program(depth - 1))
            case "star":
                return Star(self.program(depth - 1))
            case "par":
                return self.parallel(depth)

    def parallel(self, depth: int):
        """A parallel composition whose sides bind disjoint real variables."""
        reals = list(self.cfg.reals)
        if len(reals) < 2:
            # nothing left to split between the sides
            return Seq(self.program(depth - 1), self.program(depth - 1))
        self.rng.shuffle(reals)
        cut = self.rng.randrange(1, len(reals))
        left_cfg = GenConfig(depth, tuple(reals[:cut]), self.cfg.traces, self.cfg.chans,
                             self.cfg.prog_consts, self.cfg.symbols, self.cfg.literals)
        right_cfg = GenConfig(depth, tuple(reals[cut:]), self.cfg.traces, self.cfg.chans,
                              self.cfg.prog_consts, self.cfg.symbols, self.cfg.literals)
        lg, rg = Gen(0, left_cfg), Gen(0, right_cfg)
        lg.rng = rg.rng = self.rng
        return Par(lg.program(depth - 1), rg.program(depth - 1))

    def formula(self, depth: int = 3):
        if depth <= 0 or self.rng.random() < 0.3:
            kind = self.pick(["folr", "spred", "trace"])
        else:
            kind = self.pick(["not", "and", "box", "acbox", "forall"])
        match kind:
            case "folr":
                return self.folr(1)
            case "spred":
                return SpacePred("P", self.chan_set(), self.var_set())
            case "trace":
                return Rel(">=", Len(self.trace_term(1)), Len(self.trace_term(1))) if self.rng.random() < 0.5 \
                    else Rel("=", Val(self.trace_term(1)), self.poly(1))
            case "not":
                return Not(self.formula(depth - 1))
            case "and":
                return And(self.formula(depth - 1), self.formula(depth - 1))
            case "box":
                return Box(self.program(min(depth, 3)), self.formula(depth - 1))
            case "acbox":
                return AcBox(self.program(min(depth, 3)), self.formula(0), self.formula(0), self.formula(depth - 1))
            case "forall":
                return Forall(self.pick(self.cfg.reals), self.formula(depth - 1))

    # substitutions and taboos
    def substitution(self, prog_depth: int = 2) -> Substitution:
        sigma = Substitution()
        if self.rng.random() < 0.6:
            sigma = sigma.bind("f", self.poly(2))
        if self.rng.random() < 0.5:
            sigma = sigma.bind("g", self.poly(2, dots=2), ("real", "real"))
        if self.rng.random() < 0.4:
            sigma = sigma.bind("q", self.folr(1))
        if self.rng.random() < 0.4:
            sigma = sigma.bind("r", self.folr(1, dots=1), ("real",))
        sub = Gen(self.rng.randrange(1 << 30), GenConfig(prog_depth, self.cfg.reals, self.cfg.traces,
                                                         self.cfg.chans, False, True, self.cfg.literals))
        for name in ("a", "b"):
            if self.rng.random() < 0.6:
                sigma = sigma.bind(name, sub.program(prog_depth))
        return sigma

    def taboo(self) -> Taboo:
        vs = [v for v in (*self.cfg.reals, *self.cfg.traces, MU) if self.rng.random() < 0.3]
        cs = [c for c in self.cfg.chans if self.rng.random() < 0.3]
        return Taboo(S.of(*vs, universe=S.VARS), S.of(*cs, universe=S.CHANS))

    def context(self):
        return S.of(*[v for v in self.cfg.reals if self.rng.random() < 0.25], universe=S.VARS)

    # states for the oracle
    def trace_value(self, max_len: int = 3, values=(0, 1, 2)):
        n = self.rng.randrange(max_len + 1)
        return tuple((self.pick(self.cfg.chans).name, Fraction(self.pick(values)), Fraction(self.pick(values)))
                     for _ in range(n))


def sorted_program(g: Gen, decls=None, depth: int | None = None):
    """Draw until the sort checker accepts (it normally does on the first try)."""
    decls = decls or signature()
    while True:
        try:
            return sort_check(g.program(depth), decls)
        except ValueError:
            continue
