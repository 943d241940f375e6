import itertools

import pytest
from hypothesis import given, strategies as st

from dlchp import sets as S
from dlchp.sets import Channel, SetError, Variable
from dlchp.textio import parse, show_set

POOL = tuple(Channel(n) for n in ("ch", "dh", "gh", "kh", "lh"))
OUTSIDE = Channel("zh")


def ground_sets():
    atoms = st.lists(st.sampled_from(POOL), unique=True, max_size=5)
    return st.one_of(atoms.map(lambda xs: S.of(*xs, universe=S.CHANS)),
                     atoms.map(lambda xs: S.Cofinite(S.CHANS, tuple(xs))))


def members(s):
    return frozenset(a for a in (*POOL, OUTSIDE) if S.member(a, s))


def test_complement_prints_canonically(decls):
    s = parse("set", "~{ch, dh} | {ch, gh}", decls)
    assert show_set(s) == "~{dh}"


def test_finite_atoms_are_canonical():
    assert S.of(Channel("dh"), Channel("ch"), Channel("dh")) == S.of(Channel("ch"), Channel("dh"))


def test_sort_constants():
    x, h = Variable("x"), Variable("h", "trace")
    assert S.member(x, S.RVAR) and not S.member(h, S.RVAR)
    assert S.member(h, S.TVAR)
    assert S.member(S.MU, S.GT) and S.member(S.MU_PRIME, S.GT)


def test_universe_mismatch_raises():
    with pytest.raises(SetError):
        S.union(S.of(Channel("ch")), S.of(Variable("x")))
    with pytest.raises(SetError):
        S.member(Variable("x"), S.ALL_CHANS)


def test_symbolic_normalization_keeps_set_variables():
    v = S.SetVar("Cset", S.CHANS)
    assert S.normalize(S.Union(v, S.NO_CHANS)) == v
    assert S.normalize(S.Inter(v, S.ALL_CHANS)) == v
    assert S.normalize(S.Complement(S.Complement(v))) == v
    assert S.normalize(S.Minus(v, v)) == S.NO_CHANS


def test_substitute_instantiates_variables():
    v = S.SetVar("Cset", S.CHANS)
    out = S.substitute(S.Union(v, S.of(Channel("gh"))), {"Cset": S.of(Channel("ch"))})
    assert out == S.of(Channel("ch"), Channel("gh"))


def test_entails_subset_symbolic():
    a, b = S.SetVar("A", S.CHANS), S.SetVar("B", S.CHANS)
    assert S.entails_subset(S.Inter(a, b), a)
    assert not S.entails_subset(a, S.Inter(a, b))
    assert S.entails_subset(S.Minus(a, S.of(Channel("ch"))), S.Union(a, b))


@given(ground_sets(), ground_sets())
def test_operations_match_membership(l, r):
    ml, mr = members(l), members(r)
    assert members(S.union(l, r)) == ml | mr
    assert members(S.inter(l, r)) == ml & mr
    assert members(S.minus(l, r)) == ml - mr
    assert members(S.complement(l)) == frozenset((*POOL, OUTSIDE)) - ml
    assert S.subset_eq(l, r) == (ml <= mr and (not isinstance(l, S.Cofinite) or isinstance(r, S.Cofinite)))


@given(ground_sets(), ground_sets(), ground_sets())
def test_lattice_laws(a, b, c):
    assert S.eq(S.union(a, S.inter(b, c)), S.inter(S.union(a, b), S.union(a, c)))
    assert S.eq(S.complement(S.union(a, b)), S.inter(S.complement(a), S.complement(b)))
    assert S.normalize(S.Union(a, b)) == S.normalize(S.Union(b, a))


def test_exhaustive_pool_equality_is_extensional():
    sets = [S.of(*xs, universe=S.CHANS) for n in range(3) for xs in itertools.combinations(POOL[:3], n)]
    sets += [S.Cofinite(S.CHANS, s.atoms) for s in sets]
    for l, r in itertools.product(sets, repeat=2):
        assert S.eq(l, r) == (members(l) == members(r))
