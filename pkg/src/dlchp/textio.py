"""Concrete ASCII syntax: tokenizer, recursive-descent parser and canonical printer.

The printer emits minimal parentheses; ``parse(print(ast)) == ast`` for every
sort-checked AST whose numeric literals are resolvable from context.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from . import sets as S
from .sets import Channel, Variable
from .syntax import (
    AcBox, And, Assign, At, Box, ChanOf, Checker, Choice, CommItem, Concat, Decls,
    Differential, Dot, EmptyTrace, Equiv, Exists, FALSE, Forall, FuncApp, Imply, InSet,
    IntLit, IntPlus, Len, Not, ODE, Or, Par, Plus, PredApp, ProgConst, Proj, Random,
    RealLit, Receive, Rel, Send, Seq, SetEq, SortError, SpacePred, Stamp, Star,
    SymbolDecl, TRUE, Test, Times, TrueF, Val, DEFAULT_PROG_VARS, is_formula, is_program,
    sort_check,
)


class ParseError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0, source: str = "<input>"):
        self.msg, self.line, self.col, self.source = msg, line, col, source
        super().__init__(f"{source}:{line}:{col}: {msg}")


# -- tokens ------------------------------------------------------------------------

@dataclass(frozen=True)
class Tok:
    kind: str      # ident num dotidx sym eof
    text: str
    line: int
    col: int
    primed: bool = False


_SYMBOLS = ["<->", "->", "<=", ">=", ":=", "||", "++", "==", "!", "?", "*", ";", ",", "(", ")",
            "[", "]", "{", "}", "<", ">", "=", "&", "|", "\\", "~", "+", "'", ":", "."]
_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r\n]+)|(?P<comment>//[^\n]*)"
    r"|(?P<num>-?\d+(?:/\d+|\.\d+)?)"
    r"|(?P<dotidx>\.\d+)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*'?)"
    r"|(?P<sym>" + "|".join(re.escape(s) for s in _SYMBOLS) + ")"
)


def tokenize(text: str, source: str = "<input>") -> list[Tok]:
    toks = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col, source)
        kind, s = m.lastgroup, m.group()
        if kind == "ident":
            primed = s.endswith("'")
            toks.append(Tok("ident", s.rstrip("'"), line, col, primed))
        elif kind not in ("ws", "comment"):
            toks.append(Tok(kind, s, line, col))
        nl = s.count("\n")
        if nl:
            line += nl
            col = len(s) - s.rfind("\n")
        else:
            col += len(s)
        pos = m.end()
    toks.append(Tok("eof", "", line, col))
    return toks


KEYWORDS = {"forall", "exists", "true", "false", "val", "stamp", "len", "chanof", "down", "pre",
            "in", "eps", "RVar", "NVar", "TVar", "CVar", "GT", "step", "qed", "using"}
DECL_SORTS = {"real": "real", "int": "int", "trace": "trace", "cvar": "chan"}
DECL_KEYWORDS = set(DECL_SORTS) | {"chan", "func", "pred", "spred", "prog", "chanset", "varset"}
SORT_CONSTS = {"RVar": S.RVAR, "NVar": S.NVAR, "TVar": S.TVAR, "CVar": S.sort_set("chan"), "GT": S.GT}


# -- parser ----------------------------------------------------------------------

class Parser:
    def __init__(self, text: str, decls: Decls | None = None, source: str = "<input>"):
        self.toks = tokenize(text, source)
        self.i = 0
        self.decls = decls.copy() if decls is not None else Decls()
        self.source = source
        self.dot_sorts: tuple = ()

    # token helpers
    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str, tok: Tok | None = None):
        tok = tok or self.tok
        return ParseError(msg, tok.line, tok.col, self.source)

    def at(self, *texts) -> bool:
        t = self.tok
        return t.kind in ("sym", "ident") and t.text in texts and not t.primed

    def eat(self, text: str) -> Tok:
        if not self.at(text):
            shown = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {shown!r}")
        t = self.tok
        self.i += 1
        return t

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def ident(self) -> Tok:
        t = self.tok
        if t.kind != "ident" or t.text in KEYWORDS:
            raise self.error(f"expected a name, found {t.text or 'end of input'!r}")
        self.i += 1
        return t

    def expect_eof(self):
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r}")

    def attempt(self, fn):
        """Run `fn`; on ParseError restore the position and return None."""
        save = self.i
        try:
            return fn()
        except ParseError:
            self.i = save
            return None

    def checked(self, fn, tok: Tok):
        try:
            return fn()
        except (SortError, S.SetError) as e:
            raise self.error(str(e), tok) from None

    # declarations
    def declarations(self):
        while self.tok.kind == "ident" and self.tok.text in DECL_KEYWORDS and not self.tok.primed:
            self.declaration()

    def declaration(self):
        kw = self.ident_any()
        try:
            if kw.text in DECL_SORTS:
                for n in self._names():
                    self.decls.add_var(n.text, DECL_SORTS[kw.text])
            elif kw.text == "chan":
                for n in self._names():
                    self.decls.add_chan(n.text)
            elif kw.text in ("chanset", "varset"):
                u = S.CHANS if kw.text == "chanset" else S.VARS
                for n in self._names():
                    self.decls.add_symbol(SymbolDecl(n.text, "setvar", (), u))
            elif kw.text in ("spred", "prog"):
                kind = "spred" if kw.text == "spred" else "prog"
                for n in self._names():
                    self.decls.add_symbol(SymbolDecl(n.text, kind))
            else:
                name = self.ident()
                args = []
                if self.accept("("):
                    if not self.at(")"):
                        args.append(self._sort_name())
                        while self.accept(","):
                            args.append(self._sort_name())
                    self.eat(")")
                result = None
                if kw.text == "func":
                    self.eat(":")
                    result = self._sort_name()
                restricted = self.accept("restricted")
                self.decls.add_symbol(SymbolDecl(name.text, kw.text, tuple(args), result, restricted))
        except SortError as e:
            raise self.error(str(e), kw) from None
        self.eat(";")

    def ident_any(self) -> Tok:
        t = self.tok
        if t.kind != "ident":
            raise self.error("expected a declaration")
        self.i += 1
        return t

    def _names(self):
        out = [self.ident()]
        while self.accept(","):
            out.append(self.ident())
        return out

    def _sort_name(self) -> str:
        t = self.ident_any()
        name = {"chan": "channel", "channel": "channel"}.get(t.text, t.text)
        if name not in ("real", "int", "trace", "channel"):
            raise self.error(f"unknown sort {t.text}", t)
        return name

    # sets
    def set_expr(self, universe: str):
        l = self._set_minus(universe)
        while (r := self._set_operand("|", self._set_minus, universe)) is not None:
            l = S.Union(l, r)
        return l

    def _set_minus(self, universe):
        l = self._set_inter(universe)
        while (r := self._set_operand("\\", self._set_inter, universe)) is not None:
            l = S.Minus(l, r)
        return l

    def _set_inter(self, universe):
        l = self._set_unary(universe)
        while (r := self._set_operand("&", self._set_unary, universe)) is not None:
            l = S.Inter(l, r)
        return l

    def _set_operand(self, op, sub, universe):
        # the operators double as formula connectives, so back off when no set follows
        if not self.at(op):
            return None
        save = self.i
        self.eat(op)
        r = self.attempt(lambda: sub(universe))
        if r is None:
            self.i = save
        return r

    def _set_unary(self, universe):
        if self.accept("~"):
            return S.Complement(self._set_unary(universe))
        return self.set_primary(universe)

    def set_primary(self, universe: str):
        t = self.tok
        if self.accept("("):
            s = self.set_expr(universe)
            self.eat(")")
            return s
        if self.accept("~"):
            return S.Complement(self.set_primary(universe))
        if self.accept("{"):
            atoms = []
            if not self.at("}"):
                atoms.append(self.set_atom(universe))
                while self.accept(","):
                    atoms.append(self.set_atom(universe))
            self.eat("}")
            return S.Finite(universe, atoms)
        if t.kind == "ident" and t.text in SORT_CONSTS:
            if universe != S.VARS:
                raise self.error(f"{t.text} is a variable set, expected a channel set")
            self.i += 1
            return SORT_CONSTS[t.text]
        if t.kind == "ident":
            d = self.decls.symbols.get(t.text)
            if d is not None and d.kind == "setvar":
                if d.result != universe:
                    raise self.error(f"set variable {t.text} ranges over {d.result}")
                self.i += 1
                return S.SetVar(t.text, universe)
        raise self.error(f"expected a set, found {t.text or 'end of input'!r}")

    def set_atom(self, universe):
        t = self.ident()
        if universe == S.CHANS:
            if t.text not in self.decls.chans or t.primed:
                raise self.error(f"{t.text} is not a declared channel", t)
            return Channel(t.text)
        if t.text not in self.decls.vars:
            raise self.error(f"{t.text} is not a declared variable", t)
        return self._var(t)

    def _var(self, t: Tok) -> Variable:
        try:
            return self.decls.var(t.text, t.primed)
        except S.SetError as e:
            raise self.error(str(e), t) from None

    def starts_set(self) -> bool:
        t = self.tok
        if t.text in ("{", "~"):
            return True
        if t.kind == "ident" and t.text in SORT_CONSTS:
            return True
        d = self.decls.symbols.get(t.text) if t.kind == "ident" else None
        return d is not None and d.kind == "setvar"

    # terms
    def term(self):
        l = self._concat()
        while self.at("+") and not self.at("++"):
            self.eat("+")
            l = Plus(l, self._concat())
        return l

    def _concat(self):
        l = self._times()
        if self.at(".") and self._dot_is_infix():
            self.eat(".")
            return Concat(l, self._concat())
        return l

    def _dot_is_infix(self) -> bool:
        # `.` is concatenation when followed by an operand
        nxt = self.peek()
        return nxt.kind in ("ident", "num", "dotidx") or nxt.text in ("(", "<", ".")

    def _times(self):
        l = self._postfix()
        while self.at("*") and self._star_is_times():
            self.eat("*")
            l = Times(l, self._postfix())
        return l

    def _star_is_times(self) -> bool:
        nxt = self.peek()
        return nxt.kind in ("ident", "num", "dotidx") or nxt.text in ("(", "<", ".")

    def _postfix(self):
        e = self.term_primary()
        while True:
            if self.accept("down"):
                e = Proj(e, self.set_primary(S.CHANS))
            elif self.at("["):
                save = self.i
                self.eat("[")
                idx = self.attempt(self.term)
                if idx is None or not self.accept("]"):
                    self.i = save
                    break
                e = At(e, idx)
            else:
                break
        return e

    def term_primary(self):
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return RealLit(Fraction(t.text))
        if t.kind == "dotidx" or self.at("."):
            self.i += 1
            idx = int(t.text[1:]) if t.kind == "dotidx" else 0
            if idx >= len(self.dot_sorts):
                raise self.error(f"placeholder .{idx} is out of range here", t)
            return Dot(idx, self.dot_sorts[idx])
        if self.accept("("):
            e = self.term()
            self.eat(")")
            if self.at("'"):
                self.eat("'")
                return Differential(e)
            return e
        if self.accept("<"):
            ch = self.term()
            self.eat(",")
            v = self.term()
            self.eat(",")
            s = self.term()
            self.eat(">")
            return CommItem(ch, v, s)
        if t.kind != "ident":
            raise self.error(f"expected a term, found {t.text or 'end of input'!r}")
        if t.text == "eps":
            self.i += 1
            return EmptyTrace()
        builtin = {"val": Val, "stamp": Stamp, "len": Len, "chanof": ChanOf}
        if t.text in builtin:
            self.i += 1
            self.eat("(")
            e = self.term()
            self.eat(")")
            return builtin[t.text](e)
        if t.text in KEYWORDS:
            raise self.error(f"unexpected keyword {t.text!r}")
        self.i += 1
        if t.text in self.decls.vars:
            return self._var(t)
        if t.text in self.decls.chans:
            return Channel(t.text)
        d = self.decls.symbols.get(t.text)
        if d is not None and d.kind == "func":
            chans, args = self.application(d)
            return FuncApp(t.text, chans, args)
        if d is not None:
            raise self.error(f"{t.text} is a {d.kind}, not a function", t)
        raise self.error(f"undeclared name {t.text}", t)

    def application(self, d: SymbolDecl):
        chans, args = S.ALL_CHANS, []
        if self.accept("("):
            if not self.at(")"):
                got = self.attempt(self._chan_arg)
                if got is not None:
                    chans = got
                    if self.accept(","):
                        args.append(self.term())
                else:
                    args.append(self.term())
                while self.accept(","):
                    args.append(self.term())
            self.eat(")")
        return chans, tuple(args)

    def _chan_arg(self):
        if not (self.starts_set() or self.at("(")):
            raise self.error("no channel set")
        s = self.set_expr(S.CHANS)
        if not self.at(",", ")"):
            raise self.error("no channel set")
        return s

    # formulas
    def formula(self):
        l = self._imply()
        if self.accept("<->"):
            r = self._imply()
            return Equiv(l, r)
        return l

    def _imply(self):
        l = self._or()
        if self.accept("->"):
            return Imply(l, self._imply())
        return l

    def _or(self):
        l = self._and()
        while self.at("|") and not self.at("||"):
            self.eat("|")
            l = Or(l, self._and())
        return l

    def _and(self):
        l = self._unary()
        while self.accept("&"):
            l = And(l, self._unary())
        return l

    def _unary(self):
        t = self.tok
        if self.accept("!"):
            return Not(self._unary())
        if self.at("forall", "exists"):
            self.i += 1
            x = self.ident()
            if x.text not in self.decls.vars:
                raise self.error(f"{x.text} is not a declared variable", x)
            var = self._var(x)
            body = self._unary()
            return Forall(var, body) if t.text == "forall" else Exists(var, body)
        if self.accept("["):
            prog = self.program()
            self.eat("]")
            if self.accept("{"):
                a = self.formula()
                self.eat(",")
                c = self.formula()
                self.eat("}")
                return AcBox(prog, a, c, self._unary())
            return Box(prog, self._unary())
        return self.formula_primary()

    def formula_primary(self):
        t = self.tok
        if self.accept("true"):
            return TRUE
        if self.accept("false"):
            return FALSE
        if self.at("("):
            save = self.i

            def paren():
                self.eat("(")
                f = self.formula()
                self.eat(")")
                if self._continues_term():
                    raise self.error("parenthesized term")
                return f
            f = self.attempt(paren)
            if f is not None:
                return f
            self.i = save
            seteq = self.attempt(self._set_equation)
            if seteq is not None:
                return seteq
            return self.relation()
        if self.starts_set():
            return self._set_equation()
        if t.kind == "ident" and t.text in self.decls.symbols:
            d = self.decls.symbols[t.text]
            if d.kind == "pred":
                self.i += 1
                chans, args = self.application(d)
                return self.checked(lambda: Checker(self.decls).formula(PredApp(t.text, chans, args)), t)
            if d.kind == "spred":
                self.i += 1
                chans, vs = S.ALL_CHANS, S.ALL_VARS
                if self.accept("{"):
                    chans = self.set_expr(S.CHANS)
                    self.eat("}")
                    self.eat("{")
                    vs = self.set_expr(S.VARS)
                    self.eat("}")
                return SpacePred(t.text, S.normalize(chans), S.normalize(vs))
        return self.relation()

    def _continues_term(self) -> bool:
        return self.at("=", ">=", ">", "<=", "<", "pre", "in", "+", "*", "down", "[", "'") or (
            self.at(".") and self._dot_is_infix())

    def _set_equation(self):
        u = self._guess_universe()
        l = self.set_expr(u)
        self.eat("==")
        r = self.set_expr(u)
        return SetEq(S.normalize(l), S.normalize(r))

    def _guess_universe(self) -> str:
        # look ahead for the first atom or set variable to learn the universe
        depth = 0
        for t in self.toks[self.i:]:
            if t.kind == "ident":
                if t.text in SORT_CONSTS or t.text in self.decls.vars:
                    return S.VARS
                if t.text in self.decls.chans:
                    return S.CHANS
                d = self.decls.symbols.get(t.text)
                if d is not None and d.kind == "setvar":
                    return d.result
            if t.text in ("(", "{"):
                depth += 1
            elif t.text in (")", "}"):
                depth -= 1
            elif t.text == "==" and depth == 0:
                continue
            elif depth < 0 or t.kind == "eof":
                break
        return S.CHANS

    def relation(self):
        t = self.tok
        l = self.term()
        if self.accept("in"):
            s = self.set_primary(S.CHANS)
            return self.checked(lambda: Checker(self.decls).formula(InSet(l, s)), t)
        op = self.tok.text
        if not self.at("=", ">=", ">", "<=", "<", "pre"):
            raise self.error(f"expected a relation, found {op or 'end of input'!r}")
        self.i += 1
        r = self.term()
        rel = {"<=": Rel(">=", r, l), "<": Rel(">", r, l)}.get(op) or Rel(op, l, r)
        return self.checked(lambda: Checker(self.decls).formula(rel), t)

    # programs
    def program(self):
        l = self._choice()
        if self.accept("||"):
            return Par(l, self.program())
        return l

    def _choice(self):
        l = self._seq()
        if self.accept("++"):
            return Choice(l, self._choice())
        return l

    def _seq(self):
        l = self._star()
        if self.accept(";"):
            return Seq(l, self._seq())
        return l

    def _star(self):
        a = self.program_primary()
        while self.accept("*"):
            a = Star(a)
        return a

    def program_primary(self):
        t = self.tok
        if self.accept("("):
            a = self.program()
            self.eat(")")
            return a
        if self.accept("?"):
            f = self.formula()
            return self.checked(lambda: Checker(self.decls).program(Test(f)), t)
        if self.accept("{"):
            eqs = [self._ode_eq()]
            while self.accept(","):
                eqs.append(self._ode_eq())
            c = self.formula() if self.accept("&") else TRUE
            self.eat("}")
            return self.checked(lambda: Checker(self.decls).program(ODE(tuple(eqs), c)), t)
        name = self.ident()
        if name.text in self.decls.vars:
            x = self._var(name)
            self.eat(":=")
            if self.accept("*"):
                return self.checked(lambda: Checker(self.decls).program(Random(x)), name)
            e = self.term()
            return self.checked(lambda: Checker(self.decls).program(Assign(x, e)), name)
        if name.text in self.decls.chans:
            ch = Channel(name.text)
            self.eat("(")
            h = self.ident()
            self.eat(")")
            if h.text not in self.decls.vars:
                raise self.error(f"{h.text} is not a declared variable", h)
            rec = self._var(h)
            if self.accept("!"):
                e = self.term()
                return self.checked(lambda: Checker(self.decls).program(Send(ch, rec, e)), name)
            self.eat("?")
            x = self.ident()
            if x.text not in self.decls.vars:
                raise self.error(f"{x.text} is not a declared variable", x)
            return self.checked(lambda: Checker(self.decls).program(Receive(ch, rec, self._var(x))), name)
        d = self.decls.symbols.get(name.text)
        if d is not None and d.kind == "prog":
            chans, vs = S.ALL_CHANS, DEFAULT_PROG_VARS
            if self.accept("{"):
                chans = self.set_expr(S.CHANS)
                self.eat("}")
                self.eat("{")
                vs = self.set_expr(S.VARS)
                self.eat("}")
            return ProgConst(name.text, S.normalize(chans), S.normalize(vs))
        raise self.error(f"{name.text} is not a variable, channel or program constant", name)

    def _ode_eq(self):
        x = self.ident()
        if not x.primed or x.text not in self.decls.vars:
            raise self.error("expected x' = e in a differential equation", x)
        self.eat("=")
        return self._var(Tok("ident", x.text, x.line, x.col)), self.term()

    # top-level entry points
    def whole(self, kind: str):
        t = self.tok
        if kind == "term":
            x = self.term()
        elif kind == "formula":
            x = self.formula()
        elif kind == "program":
            x = self.program()
        elif kind == "set":
            x = self.set_expr(self._guess_universe())
        else:
            raise ValueError(kind)
        self.expect_eof()
        if kind == "set":
            return S.normalize(x)
        return self.checked(lambda: sort_check(x, self.decls), t)


def parse(kind: str, text: str, decls: Decls | None = None, source: str = "<input>"):
    """Parse `text` as term|formula|program|set|substitution|proof.

    A declaration header may precede the body; `decls` supplies declarations
    known in advance.
    """
    if kind == "substitution":
        return parse_substitution(text, decls, source)
    if kind == "proof":
        return parse_proof(text, decls, source)
    p = Parser(text, decls, source)
    p.declarations()
    return p.whole(kind)


def parse_with_decls(kind: str, text: str, decls: Decls | None = None, source: str = "<input>"):
    p = Parser(text, decls, source)
    p.declarations()
    return p.whole(kind), p.decls


def parse_decls(text: str, decls: Decls | None = None) -> Decls:
    p = Parser(text, decls)
    p.declarations()
    p.expect_eof()
    return p.decls


# substitutions

def parse_bindings(p: Parser, stop=("}",)):
    from .usubst import Substitution

    sigma = Substitution()
    while not p.at(*stop) and p.tok.kind != "eof":
        name = p.ident()
        d = p.decls.symbols.get(name.text)
        if d is None:
            raise p.error(f"undeclared symbol {name.text}", name)
        if d.kind in ("func", "pred"):
            if p.accept("("):
                n = 0
                if not p.at(")"):
                    p._dot_placeholder(n)
                    n += 1
                    while p.accept(","):
                        p._dot_placeholder(n)
                        n += 1
                p.eat(")")
                if n != len(d.args):
                    raise p.error(f"{name.text} takes {len(d.args)} arguments", name)
        elif d.kind in ("spred", "prog") and p.accept("{"):
            # annotations on the left are informative only
            depth = 1
            while depth:
                if p.tok.kind == "eof":
                    raise p.error("unterminated annotation")
                depth += {"{": 1, "}": -1}.get(p.tok.text, 0)
                p.i += 1
            if p.accept("{"):
                depth = 1
                while depth:
                    if p.tok.kind == "eof":
                        raise p.error("unterminated annotation")
                    depth += {"{": 1, "}": -1}.get(p.tok.text, 0)
                    p.i += 1
        p.eat("->")
        p.dot_sorts = d.args if d.kind in ("func", "pred") else ()
        t = p.tok
        try:
            if d.kind == "func":
                sigma = sigma.bind(name.text, p.checked(lambda: sort_check_term(p.term(), d.result, p.decls), t), d.args)
            elif d.kind == "pred":
                sigma = sigma.bind(name.text, p.checked(lambda: sort_check(p.formula(), p.decls), t), d.args)
            elif d.kind == "spred":
                sigma = sigma.bind(name.text, p.checked(lambda: sort_check(p.formula(), p.decls), t))
            elif d.kind == "prog":
                sigma = sigma.bind(name.text, p.checked(lambda: sort_check(p.program(), p.decls), t))
            elif d.kind == "setvar":
                sigma = sigma.bind(name.text, S.normalize(p.set_expr(d.result)))
        except ValueError as e:
            if isinstance(e, ParseError):
                raise
            raise p.error(str(e), t) from None
        p.dot_sorts = ()
        p.accept(",")
    return sigma


def _dot_placeholder(self, n):
    t = self.tok
    if t.kind == "dotidx":
        if int(t.text[1:]) != n:
            raise self.error(f"expected placeholder .{n}")
        self.i += 1
    else:
        self.eat(".")


Parser._dot_placeholder = _dot_placeholder


def sort_check_term(e, expected, decls):
    return Checker(decls).term(e, expected)[0]


def parse_substitution(text: str, decls: Decls | None = None, source: str = "<input>"):
    p = Parser(text, decls, source)
    p.declarations()
    sigma = parse_bindings(p, stop=())
    p.expect_eof()
    return sigma


def parse_proof(text: str, decls: Decls | None = None, source: str = "<input>"):
    from .kernel import parse_script

    return parse_script(text, decls, source)


# -- printer ---------------------------------------------------------------------

def show_number(v) -> str:
    v = Fraction(v)
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def show_atom(a) -> str:
    return str(a)


_CONST_NAMES = {"real": "RVar", "int": "NVar", "trace": "TVar", "chan": "CVar"}


def _set_prec(s) -> int:
    match s:
        case S.Finite():
            return 5
        case S.Cofinite():
            if s.full_sorts:
                return 5
            flips_out = [a for a in s.atoms if a.sort in s.sorts]
            flips_in = [a for a in s.atoms if a.sort not in s.sorts]
            if len(s.sorts) == 1 and not flips_out and not flips_in:
                return 5
            return 2 if flips_out and not flips_in else 1
        case S.SetVar():
            return 5
        case S.Union():
            return 1
        case S.Minus():
            return 2
        case S.Inter():
            return 3
        case S.Complement():
            return 4
    raise TypeError(f"not a set: {s!r}")


def show_set(s, prec: int = 0) -> str:
    text = _show_set(s)
    return f"({text})" if _set_prec(s) < prec else text


def _atoms_text(atoms) -> str:
    return "{" + ", ".join(show_atom(a) for a in atoms) + "}"


def _show_set(s) -> str:
    match s:
        case S.Finite(_, atoms):
            return _atoms_text(atoms)
        case S.Cofinite(_, atoms, sorts):
            if s.full_sorts:
                return "~" + _atoms_text(atoms)
            base = " | ".join(_CONST_NAMES[x] for x in sorts)
            out_ = [a for a in atoms if a.sort in sorts]
            in_ = [a for a in atoms if a.sort not in sorts]
            text = base
            if out_:
                if len(sorts) > 1:
                    text = f"({text})"
                text = f"{text} \\ {_atoms_text(out_)}"
            if in_:
                text = f"{text} | {_atoms_text(in_)}"
            return text
        case S.SetVar(name):
            return name
        case S.Union(l, r):
            return f"{show_set(l, 1)} | {show_set(r, 2)}"
        case S.Minus(l, r):
            return f"{show_set(l, 2)} \\ {show_set(r, 3)}"
        case S.Inter(l, r):
            return f"{show_set(l, 3)} & {show_set(r, 4)}"
        case S.Complement(x):
            return "~" + show_set(x, 5)
    raise TypeError(f"not a set: {s!r}")


# terms: 1 '+', 2 '.', 3 '*', 4 postfix, 5 primary

def _term_prec(e) -> int:
    match e:
        case Plus() | IntPlus():
            return 1
        case Concat():
            return 2
        case Times():
            return 3
        case Proj() | At():
            return 4
        case RealLit(v) if v < 0:
            return 4
        case IntLit(v) if v < 0:
            return 4
    return 5


def show_term(e, prec: int = 0) -> str:
    text = _show_term(e)
    return f"({text})" if _term_prec(e) < prec else text


def _app(symbol, chans, args, default_chans) -> str:
    parts = []
    if S.normalize(chans) != default_chans:
        parts.append(show_set(chans))
    parts += [show_term(a) for a in args]
    if not parts:
        return symbol
    return f"{symbol}({', '.join(parts)})"


def _show_term(e) -> str:
    match e:
        case Variable() | Channel():
            return show_atom(e)
        case RealLit(v) | IntLit(v):
            return show_number(v)
        case EmptyTrace():
            return "eps"
        case Dot(i):
            return f".{i}"
        case FuncApp(sym, chans, args):
            return _app(sym, chans, args, S.ALL_CHANS)
        case Plus(l, r) | IntPlus(l, r):
            return f"{show_term(l, 1)} + {show_term(r, 2)}"
        case Concat(l, r):
            return f"{show_term(l, 3)} . {show_term(r, 2)}"
        case Times(l, r):
            return f"{show_term(l, 3)} * {show_term(r, 4)}"
        case Differential(x):
            return f"({show_term(x)})'"
        case Val(x):
            return f"val({show_term(x)})"
        case Stamp(x):
            return f"stamp({show_term(x)})"
        case Len(x):
            return f"len({show_term(x)})"
        case ChanOf(x):
            return f"chanof({show_term(x)})"
        case CommItem(ch, v, s):
            return f"<{show_term(ch)}, {show_term(v)}, {show_term(s)}>"
        case Proj(x, chans):
            return f"{show_term(x, 4)} down {show_set(chans, 5)}"
        case At(x, i):
            return f"{show_term(x, 4)}[{show_term(i)}]"
    raise TypeError(f"not a term: {e!r}")


# formulas: 1 '<->', 2 '->', 3 '|', 4 '&', 5 prefix, 6 atom

def _view(f):
    """Recognize derived connectives in the core encoding."""
    match f:
        case And(Not(And(a, Not(b))), Not(And(b2, Not(a2)))) if a == a2 and b == b2:
            return "equiv", a, b
        case Not(TrueF()):
            return "false",
        case Not(And(Not(a), Not(b))):
            return "or", a, b
        case Not(And(a, Not(b))):
            return "imply", a, b
        case Not(Forall(x, Not(b))):
            return "exists", x, b
    return None


_VIEW_PREC = {"equiv": 1, "imply": 2, "or": 3, "false": 6, "exists": 5}


def _formula_prec(f) -> int:
    v = _view(f)
    if v is not None:
        return _VIEW_PREC[v[0]]
    match f:
        case And():
            return 4
        case Not() | Forall() | Box() | AcBox():
            return 5
    return 6


def show_formula(f, prec: int = 0) -> str:
    text = _show_formula(f)
    return f"({text})" if _formula_prec(f) < prec else text


def _show_formula(f) -> str:
    v = _view(f)
    if v is not None:
        match v:
            case ("equiv", a, b):
                return f"{show_formula(a, 2)} <-> {show_formula(b, 2)}"
            case ("imply", a, b):
                return f"{show_formula(a, 3)} -> {show_formula(b, 2)}"
            case ("or", a, b):
                return f"{show_formula(a, 3)} | {show_formula(b, 4)}"
            case ("false",):
                return "false"
            case ("exists", x, b):
                return f"exists {show_atom(x)} {show_formula(b, 5)}"
    match f:
        case TrueF():
            return "true"
        case Rel(op, l, r):
            return f"{show_term(l)} {op} {show_term(r)}"
        case PredApp(sym, chans, args):
            return _app(sym, chans, args, S.ALL_CHANS)
        case SpacePred(sym, chans, vs):
            if S.normalize(chans) == S.ALL_CHANS and S.normalize(vs) == S.ALL_VARS:
                return sym
            return f"{sym}{{{show_set(chans)}}}{{{show_set(vs)}}}"
        case InSet(x, s):
            return f"{show_term(x)} in {show_set(s, 5)}"
        case SetEq(l, r):
            return f"{show_set(l, 5)} == {show_set(r, 5)}"
        case Not(x):
            return "!" + show_formula(x, 5)
        case And(l, r):
            return f"{show_formula(l, 4)} & {show_formula(r, 5)}"
        case Forall(x, body):
            return f"forall {show_atom(x)} {show_formula(body, 5)}"
        case Box(a, post):
            return f"[{show_program(a)}] {show_formula(post, 5)}"
        case AcBox(a, assm, comm, post):
            return f"[{show_program(a)}]{{{show_formula(assm)}, {show_formula(comm)}}} {show_formula(post, 5)}"
    raise TypeError(f"not a formula: {f!r}")


# programs: 1 '||', 2 '++', 3 ';', 4 '*', 5 primary

def _program_prec(a) -> int:
    match a:
        case Par():
            return 1
        case Choice():
            return 2
        case Seq():
            return 3
        case Star():
            return 4
        case ProgConst() | ODE():
            return 5
    return 4  # atomic statements end in a term or formula and cannot take a postfix *


def show_program(a, prec: int = 0) -> str:
    text = _show_program(a)
    return f"({text})" if _program_prec(a) < prec else text


def _show_program(a) -> str:
    match a:
        case ProgConst(sym, chans, vs):
            if S.normalize(chans) == S.ALL_CHANS and S.normalize(vs) == DEFAULT_PROG_VARS:
                return sym
            return f"{sym}{{{show_set(chans)}}}{{{show_set(vs)}}}"
        case Assign(x, rhs):
            return f"{show_atom(x)} := {show_term(rhs)}"
        case Random(x):
            return f"{show_atom(x)} := *"
        case Test(c):
            return "?" + show_formula(c)
        case ODE(eqs, c):
            body = ", ".join(f"{show_atom(x)}' = {show_term(r)}" for x, r in eqs)
            if c != TRUE:
                body += f" & {show_formula(c)}"
            return "{" + body + "}"
        case Send(ch, h, e):
            return f"{show_atom(ch)}({show_atom(h)})!{show_term(e)}"
        case Receive(ch, h, x):
            return f"{show_atom(ch)}({show_atom(h)})?{show_atom(x)}"
        case Seq(l, r):
            return f"{show_program(l, 4)}; {show_program(r, 3)}"
        case Choice(l, r):
            return f"{show_program(l, 3)} ++ {show_program(r, 2)}"
        case Par(l, r):
            return f"{show_program(l, 2)} || {show_program(r, 1)}"
        case Star(b):
            return show_program(b, 5) + "*"
    raise TypeError(f"not a program: {a!r}")


def show(x) -> str:
    if is_program(x):
        return show_program(x)
    if is_formula(x):
        return show_formula(x)
    if isinstance(x, (S.Finite, S.Cofinite, S.SetVar, S.Inter, S.Union, S.Minus, S.Complement)):
        return show_set(x)
    return show_term(x)


def show_substitution(sigma) -> str:
    return sigma.show()


# -- unicode display (never parsed) ---------------------------------------------

_UNICODE = [("<->", "↔"), ("->", "→"), ("forall ", "∀"), ("exists ", "∃"), (" down ", "↓"),
            (" || ", " ∥ "), (" ++ ", " ∪ "), (" & ", " ∧ "), (" | ", " ∨ "), (">=", "≥"),
            (" pre ", " ⪯ ")]
_UNICODE_WORDS = [(re.compile(r"\beps\b"), "ε"), (re.compile(r"\bmu\b"), "μ")]


def show_unicode(x) -> str:
    text = show(x)
    for a, b in _UNICODE:
        text = text.replace(a, b)
    for rx, b in _UNICODE_WORDS:
        text = rx.sub(b, text)
    return text
