from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from ghostsym.errors import SortMismatch, UnboundSymbol, UnsatAssignment
from ghostsym.symcore import (BOOL, BV32, REAL, TRUE, Assignment, SymbolicState, bv, evaluate,
                              fresh_symbol, free_symbols, holds, mk_and, mk_arith, mk_eq, mk_lt,
                              real, realize, substitute)


def test_fresh_distinct():
    assert fresh_symbol(BV32) != fresh_symbol(BV32)
    assert fresh_symbol(BV32, "a").name != fresh_symbol(BV32, "a").name


def test_fresh_real_sort():
    x = fresh_symbol(REAL, "alpha")
    assert x.sort == REAL
    assert evaluate(mk_lt(x, real(1)), {x.name: Fraction(1, 2)}) is True


def test_fresh_many():
    names = {fresh_symbol(BV32, "v").name for _ in range(100_000)}
    assert len(names) == 100_000


def test_substitute_literal():
    x = fresh_symbol(BV32, "x")
    phi = mk_lt(bv(0), x)
    out = substitute(phi, x, bv(5))
    assert out.args == (bv(0), bv(5))       # syntactic, not folded
    assert str(out) == "(0 < 5)"
    assert evaluate(out, {}) is True


def test_substitute_term():
    x, y = fresh_symbol(BV32, "x"), fresh_symbol(BV32, "y")
    phi = mk_and(mk_lt(bv(0), x), mk_eq(y, x))
    y1 = mk_arith("+", y, bv(1))
    out = substitute(phi, x, y1)
    assert x.name not in free_symbols(out)
    assert str(out) == f"((0 < ({y} + 1)) && ({y} == ({y} + 1)))"


def test_substitute_sort_mismatch():
    with pytest.raises(SortMismatch):
        substitute(mk_lt(bv(0), fresh_symbol(BV32)), fresh_symbol(BV32), real(1))


# random formulas over two int symbols

X, Y = fresh_symbol(BV32, "px"), fresh_symbol(BV32, "py")
i32 = st.integers(-2 ** 31, 2 ** 31 - 1)
terms = st.recursive(
    st.one_of(st.sampled_from([X, Y]), i32.map(bv)),
    lambda sub: st.tuples(st.sampled_from(["+", "-", "*", "&", "^"]), sub, sub)
                  .map(lambda t: mk_arith(*t)),
    max_leaves=6)
formulas = st.tuples(terms, terms, st.sampled_from(["<", "=="])).map(
    lambda t: mk_lt(t[0], t[1]) if t[2] == "<" else mk_eq(t[0], t[1]))


@settings(max_examples=500, deadline=None)
@given(formulas, terms, i32, i32)
def test_substitution_lemma(phi, t, vx, vy):
    A = {X.name: vx, Y.name: vy}
    lhs = evaluate(substitute(phi, X, t), A)
    rhs = evaluate(phi, {**A, X.name: evaluate(t, A)})
    assert lhs == rhs


@settings(max_examples=200, deadline=None)
@given(terms, i32, i32)
def test_evaluation_stays_int32(t, vx, vy):
    v = evaluate(t, {X.name: vx, Y.name: vy})
    assert isinstance(v, int) and -2 ** 31 <= v < 2 ** 31


def test_realize_simple():
    a = fresh_symbol(BV32, "alpha")
    st_ = SymbolicState(store={"x": a}, inputs={"x": a})
    assert realize(st_, {a.name: 7}).store == {"x": 7}


def test_realize_branch_state():
    a = fresh_symbol(BV32, "alpha")
    st_ = SymbolicState(store={"x": a, "y": mk_arith("+", a, bv(1))}, pc=(mk_lt(bv(0), a),),
                        inputs={"x": a})
    assert realize(st_, {a.name: 2}).store == {"x": 2, "y": 3}
    assert realize(st_, {a.name: 2}, initial=True).store == {"x": 2}


def test_realize_unsat():
    a = fresh_symbol(BV32, "alpha")
    st_ = SymbolicState(store={"x": a}, pc=(mk_lt(bv(0), a),))
    with pytest.raises(UnsatAssignment):
        realize(st_, {a.name: -1})


def test_realize_unbound():
    a, b = fresh_symbol(BV32), fresh_symbol(BV32)
    st_ = SymbolicState(store={"x": b}, pc=(mk_lt(bv(0), a),))
    with pytest.raises(UnboundSymbol):
        realize(st_, {a.name: 1})


def test_assignment_complete_and_holds():
    a, p = fresh_symbol(BV32), fresh_symbol(BOOL)
    A = Assignment().complete([mk_and(p, mk_eq(a, bv(0)))])
    assert A == {a.name: 0, p.name: False}
    assert holds(TRUE, A)
