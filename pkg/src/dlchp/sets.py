"""Finite/cofinite set algebra over variable and channel names.

A ground set is kept per sort: for every sort of its universe the set is
either a finite collection of atoms of that sort or everything of that sort
except finitely many atoms.  `Finite` and `Cofinite` encode this compactly
with a list of *flipped* atoms: an atom is a member iff
``(atom.sort in sorts) != (atom in atoms)``.  `Finite` is the case with no
covered sorts.  Symbolic set expressions (with `SetVar`) only occur inside
schematic axioms.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

VARS = "vars"
CHANS = "chans"

# sort order doubles as canonical atom order
VAR_SORTS = ("real", "int", "trace", "chan")
UNIVERSE_SORTS = {VARS: VAR_SORTS, CHANS: ("channel",)}
_SORT_RANK = {"real": 0, "int": 1, "trace": 2, "chan": 3, "channel": 4}


class SetError(ValueError):
    pass


@dataclass(frozen=True)
class Variable:
    name: str
    sort: str = "real"
    primed: bool = False

    def __post_init__(self):
        if self.sort not in VAR_SORTS:
            raise SetError(f"unknown variable sort {self.sort!r}")
        if self.primed and self.sort != "real":
            raise SetError(f"only real variables may be primed: {self.name}'")

    def prime(self) -> Variable:
        return Variable(self.name, self.sort, True)

    def base(self) -> Variable:
        return Variable(self.name, self.sort, False)

    def __str__(self):
        return self.name + ("'" if self.primed else "")


@dataclass(frozen=True)
class Channel:
    name: str

    @property
    def sort(self) -> str:
        return "channel"

    def __str__(self):
        return self.name


Atom = Variable | Channel

MU = Variable("mu")
MU_PRIME = Variable("mu", "real", True)


def universe_of(a: Atom) -> str:
    return CHANS if isinstance(a, Channel) else VARS


def atom_key(a: Atom):
    primed = getattr(a, "primed", False)
    return (_SORT_RANK[a.sort], a.name, primed)


def _canon(atoms) -> tuple:
    return tuple(sorted(set(atoms), key=atom_key))


@dataclass(frozen=True)
class Finite:
    universe: str
    atoms: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "atoms", _canon(self.atoms))
        _check_atoms(self.universe, self.atoms)


@dataclass(frozen=True)
class Cofinite:
    """All atoms of the covered sorts except `atoms` of those sorts, plus
    the `atoms` of uncovered sorts."""

    universe: str
    atoms: tuple = ()
    sorts: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "atoms", _canon(self.atoms))
        sorts = UNIVERSE_SORTS[self.universe] if self.sorts is None else self.sorts
        sorts = tuple(s for s in UNIVERSE_SORTS[self.universe] if s in set(sorts))
        if not sorts:
            raise SetError("Cofinite needs at least one covered sort")
        object.__setattr__(self, "sorts", sorts)
        _check_atoms(self.universe, self.atoms)

    @property
    def full_sorts(self) -> bool:
        return self.sorts == UNIVERSE_SORTS[self.universe]


@dataclass(frozen=True)
class SetVar:
    name: str
    universe: str


@dataclass(frozen=True)
class Inter:
    l: SetExpr
    r: SetExpr


@dataclass(frozen=True)
class Union:
    l: SetExpr
    r: SetExpr


@dataclass(frozen=True)
class Minus:
    l: SetExpr
    r: SetExpr


@dataclass(frozen=True)
class Complement:
    s: SetExpr


SetExpr = Finite | Cofinite | SetVar | Inter | Union | Minus | Complement
Ground = Finite | Cofinite


def _check_atoms(universe, atoms):
    if universe not in UNIVERSE_SORTS:
        raise SetError(f"unknown universe {universe!r}")
    for a in atoms:
        if universe_of(a) != universe:
            raise SetError(f"atom {a} does not belong to universe {universe}")


# -- constructors ------------------------------------------------------------

def empty(universe: str) -> Finite:
    return Finite(universe, ())


def full(universe: str) -> Cofinite:
    return Cofinite(universe, ())


def of(*atoms: Atom, universe: str | None = None) -> Finite:
    if universe is None:
        if not atoms:
            raise SetError("cannot infer the universe of an empty set")
        universe = universe_of(atoms[0])
    return Finite(universe, atoms)


def all_but(*atoms: Atom, universe: str | None = None) -> Cofinite:
    if universe is None:
        if not atoms:
            raise SetError("cannot infer the universe of an empty set")
        universe = universe_of(atoms[0])
    return Cofinite(universe, atoms)


def sort_set(*sorts: str) -> Cofinite:
    return Cofinite(VARS, (), sorts)


RVAR = sort_set("real")
NVAR = sort_set("int")
TVAR = sort_set("trace")
GT = Finite(VARS, (MU, MU_PRIME))
ALL_VARS = full(VARS)
ALL_CHANS = full(CHANS)
NO_VARS = empty(VARS)
NO_CHANS = empty(CHANS)


# -- structure -----------------------------------------------------------------

def universe(s: SetExpr) -> str:
    match s:
        case Finite(u) | Cofinite(u) | SetVar(_, u):
            return u
        case Inter(l, r) | Union(l, r) | Minus(l, r):
            ul, ur = universe(l), universe(r)
            if ul != ur:
                raise SetError(f"universe mismatch: {ul} vs {ur}")
            return ul
        case Complement(x):
            return universe(x)
    raise TypeError(f"not a set expression: {s!r}")


def is_ground(s: SetExpr) -> bool:
    match s:
        case Finite() | Cofinite():
            return True
        case SetVar():
            return False
        case Inter(l, r) | Union(l, r) | Minus(l, r):
            return is_ground(l) and is_ground(r)
        case Complement(x):
            return is_ground(x)
    raise TypeError(f"not a set expression: {s!r}")


def set_vars(s: SetExpr) -> set[str]:
    match s:
        case Finite() | Cofinite():
            return set()
        case SetVar(n):
            return {n}
        case Inter(l, r) | Union(l, r) | Minus(l, r):
            return set_vars(l) | set_vars(r)
        case Complement(x):
            return set_vars(x)
    raise TypeError(f"not a set expression: {s!r}")


def mentioned_atoms(s: SetExpr) -> set:
    match s:
        case Finite(_, atoms) | Cofinite(_, atoms):
            return set(atoms)
        case SetVar():
            return set()
        case Inter(l, r) | Union(l, r) | Minus(l, r):
            return mentioned_atoms(l) | mentioned_atoms(r)
        case Complement(x):
            return mentioned_atoms(x)
    raise TypeError(f"not a set expression: {s!r}")


# -- ground algebra via per-sort parts ------------------------------------------

def _parts(g: Ground) -> dict:
    """sort -> (cofinite?, atoms of that sort)"""
    sorts = g.sorts if isinstance(g, Cofinite) else ()
    out = {}
    for srt in UNIVERSE_SORTS[g.universe]:
        out[srt] = (srt in sorts, frozenset(a for a in g.atoms if a.sort == srt))
    return out


def _build(u: str, parts: dict) -> Ground:
    sorts = tuple(s for s, (co, _) in parts.items() if co)
    atoms = [a for _, (_, xs) in parts.items() for a in xs]
    if sorts:
        return Cofinite(u, atoms, sorts)
    return Finite(u, atoms)


def _part_op(op, p, q):
    (cp, ap), (cq, aq) = p, q
    if op == "inter":
        if cp and cq:
            return True, ap | aq
        if cp:
            return False, aq - ap
        if cq:
            return False, ap - aq
        return False, ap & aq
    if op == "union":
        if cp and cq:
            return True, ap & aq
        if cp:
            return True, ap - aq
        if cq:
            return True, aq - ap
        return False, ap | aq
    raise ValueError(op)


def _binop(op, l: Ground, r: Ground) -> Ground:
    if l.universe != r.universe:
        raise SetError(f"universe mismatch: {l.universe} vs {r.universe}")
    pl, pr = _parts(l), _parts(r)
    return _build(l.universe, {s: _part_op(op, pl[s], pr[s]) for s in pl})


def _complement(g: Ground) -> Ground:
    return _build(g.universe, {s: (not co, xs) for s, (co, xs) in _parts(g).items()})


def _is_empty(s: SetExpr) -> bool:
    return isinstance(s, Finite) and not s.atoms


def _is_full(s: SetExpr) -> bool:
    return isinstance(s, Cofinite) and s.full_sorts and not s.atoms


def normalize(s: SetExpr) -> SetExpr:
    match s:
        case Finite() | Cofinite() | SetVar():
            return s
        case Complement(x):
            x = normalize(x)
            if isinstance(x, (Finite, Cofinite)):
                return _complement(x)
            if isinstance(x, Complement):
                return x.s
            return Complement(x)
        case Inter(l, r) | Union(l, r) | Minus(l, r):
            universe(s)
            l, r = normalize(l), normalize(r)
            ground = isinstance(l, (Finite, Cofinite)) and isinstance(r, (Finite, Cofinite))
            if isinstance(s, Minus):
                if ground:
                    return _binop("inter", l, _complement(r))
                if _is_empty(r) or _is_empty(l):
                    return l
                if _is_full(r) or l == r:
                    return empty(universe(s))
                return Minus(l, r)
            op = "inter" if isinstance(s, Inter) else "union"
            if ground:
                return _binop(op, l, r)
            if l == r:
                return l
            neutral, absorbing = (_is_full, _is_empty) if op == "inter" else (_is_empty, _is_full)
            if neutral(l):
                return r
            if neutral(r):
                return l
            if absorbing(l):
                return l
            if absorbing(r):
                return r
            return Inter(l, r) if op == "inter" else Union(l, r)
    raise TypeError(f"not a set expression: {s!r}")


def _ground(s: SetExpr) -> Ground:
    n = normalize(s)
    if not isinstance(n, (Finite, Cofinite)):
        raise SetError(f"set expression is not ground: {s!r}")
    return n


def union(*xs: SetExpr) -> SetExpr:
    out = xs[0]
    for x in xs[1:]:
        out = normalize(Union(out, x))
    return normalize(out)


def inter(*xs: SetExpr) -> SetExpr:
    out = xs[0]
    for x in xs[1:]:
        out = normalize(Inter(out, x))
    return normalize(out)


def minus(l: SetExpr, r: SetExpr) -> SetExpr:
    return normalize(Minus(l, r))


def complement(s: SetExpr) -> SetExpr:
    return normalize(Complement(s))


def member(a: Atom, s: SetExpr) -> bool:
    g = _ground(s)
    if universe_of(a) != g.universe:
        raise SetError(f"atom {a} does not belong to universe {g.universe}")
    covered = isinstance(g, Cofinite) and a.sort in g.sorts
    return covered != (a in g.atoms)


def subset_eq(l: SetExpr, r: SetExpr) -> bool:
    l, r = _ground(l), _ground(r)
    if l.universe != r.universe:
        raise SetError(f"universe mismatch: {l.universe} vs {r.universe}")
    # l \ r must be empty; every sort's part of a cofinite remainder is infinite
    return _is_empty(_binop("inter", l, _complement(r)))


def eq(l: SetExpr, r: SetExpr) -> bool:
    return subset_eq(l, r) and subset_eq(r, l)


def is_empty(s: SetExpr) -> bool:
    return _is_empty(_ground(s))


def disjoint(l: SetExpr, r: SetExpr) -> bool:
    return is_empty(inter(l, r))


def substitute(s: SetExpr, env: dict) -> SetExpr:
    """Replace set variables by the sets bound in `env` and normalize."""
    match s:
        case Finite() | Cofinite():
            return s
        case SetVar(n, u):
            if n in env:
                v = env[n]
                if universe(v) != u:
                    raise SetError(f"set variable {n} expects a {u} set")
                return v
            return s
        case Inter(l, r):
            return normalize(Inter(substitute(l, env), substitute(r, env)))
        case Union(l, r):
            return normalize(Union(substitute(l, env), substitute(r, env)))
        case Minus(l, r):
            return normalize(Minus(substitute(l, env), substitute(r, env)))
        case Complement(x):
            return normalize(Complement(substitute(x, env)))
    raise TypeError(f"not a set expression: {s!r}")


def map_atoms(s: SetExpr, f) -> SetExpr:
    """Apply an atom permutation `f` to every literal atom of `s`."""
    match s:
        case Finite(u, atoms):
            return Finite(u, [f(a) for a in atoms])
        case Cofinite(u, atoms, sorts):
            return Cofinite(u, [f(a) for a in atoms], sorts)
        case SetVar():
            return s
        case Inter(l, r):
            return Inter(map_atoms(l, f), map_atoms(r, f))
        case Union(l, r):
            return Union(map_atoms(l, f), map_atoms(r, f))
        case Minus(l, r):
            return Minus(map_atoms(l, f), map_atoms(r, f))
        case Complement(x):
            return Complement(map_atoms(x, f))
    raise TypeError(f"not a set expression: {s!r}")


# -- symbolic reasoning for schematic well-formedness ------------------------------

def _fresh_probes(u: str, taken: set) -> list:
    probes = []
    for srt in UNIVERSE_SORTS[u]:
        i = 0
        while True:
            a = Channel(f"_probe{i}") if u == CHANS else Variable(f"_probe{i}", srt)
            if a not in taken:
                probes.append(a)
                break
            i += 1
    return probes


def _member_sym(a: Atom, s: SetExpr, env: dict) -> bool:
    match s:
        case Finite() | Cofinite():
            return member(a, s)
        case SetVar(n):
            return env[n]
        case Inter(l, r):
            return _member_sym(a, l, env) and _member_sym(a, r, env)
        case Union(l, r):
            return _member_sym(a, l, env) or _member_sym(a, r, env)
        case Minus(l, r):
            return _member_sym(a, l, env) and not _member_sym(a, r, env)
        case Complement(x):
            return not _member_sym(a, x, env)
    raise TypeError(f"not a set expression: {s!r}")


def entails_subset(l: SetExpr, r: SetExpr) -> bool:
    """Decide whether l is a subset of r for every instantiation of set variables.

    Membership of one atom in a set variable is independent of every other
    atom, so it suffices to probe each mentioned atom plus one fresh atom per
    sort under all truth assignments to the set variables.
    """
    u = universe(l)
    if universe(r) != u:
        raise SetError(f"universe mismatch: {u} vs {universe(r)}")
    names = sorted(set_vars(l) | set_vars(r))
    atoms = mentioned_atoms(l) | mentioned_atoms(r)
    probes = sorted(atoms, key=atom_key) + _fresh_probes(u, atoms)
    for a in probes:
        for bits in product((False, True), repeat=len(names)):
            env = dict(zip(names, bits))
            if _member_sym(a, l, env) and not _member_sym(a, r, env):
                return False
    return True
