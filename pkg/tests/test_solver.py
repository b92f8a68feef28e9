import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from ghostsym.errors import BackendError
from ghostsym.solver import EPS_OPT, SAT, UNKNOWN, UNSAT, Solver, get_solver
from ghostsym.symcore import (BV32, REAL, bv, evaluate, fresh_symbol, mk_abs, mk_and, mk_arith,
                              mk_eq, mk_fn, mk_le, mk_lt, mk_not, real)

from .oracles import l1_instance, soft_instance


@pytest.fixture(scope="module")
def solver():
    return get_solver()


def test_equality_model(solver):
    a = fresh_symbol(BV32, "a")
    r = solver.check_sat(mk_eq(a, bv(5)))
    assert r.status is SAT and r.model[a.name] == 5


def test_contradiction(solver):
    a = fresh_symbol(BV32, "a")
    assert solver.check_sat(mk_and(mk_lt(bv(0), a), mk_lt(a, bv(0)))).status is UNSAT


def test_suffix_model_verifies(solver):
    a, b = fresh_symbol(BV32, "alpha"), fresh_symbol(BV32, "beta")
    phi = mk_and(mk_eq(b, bv(42)), mk_lt(bv(20), a))
    r = solver.check_sat(phi)
    assert r.is_sat and evaluate(phi, r.model)


def test_wraparound_is_bitvector(solver):
    a = fresh_symbol(BV32, "a")
    r = solver.check_sat(mk_and(mk_lt(bv(0), a), mk_lt(mk_arith("+", a, bv(1)), bv(0))))
    assert r.model[a.name] == 2 ** 31 - 1


def test_mixed_sorts(solver):
    a, x = fresh_symbol(BV32, "a"), fresh_symbol(REAL, "x")
    phi = mk_and(mk_eq(a, bv(3)), mk_lt(real(Fraction(1, 3)), x), mk_lt(x, real(Fraction(1, 2))))
    r = solver.check_sat(phi)
    assert r.is_sat and evaluate(phi, r.model)


def test_hostile_is_unknown(solver):
    x = fresh_symbol(REAL, "x")
    r = solver.check_sat(mk_lt(real(0), mk_fn("sin", x)))
    assert r.status is UNKNOWN
    assert solver.feasible(mk_lt(real(0), mk_fn("sin", x)))


def test_optimize_boundary_int(solver):
    x = fresh_symbol(BV32, "x")
    opt = solver.optimize(mk_abs(mk_arith("-", x, bv(2))), mk_le(bv(5), x))
    assert opt.model[x.name] == 5 and opt.optimal


def test_optimize_max(solver):
    x = fresh_symbol(BV32, "x")
    opt = solver.optimize(x, mk_and(mk_le(bv(0), x), mk_le(x, bv(900))), "max")
    assert opt.value == 900


def test_min_l1_real_boundary(solver):
    x = fresh_symbol(REAL, "x")
    opt = solver.min_l1(x, Fraction(167, 100), mk_le(real(2), mk_abs(x)))
    assert opt.model[x.name] == 2


def test_min_l1_unsat(solver):
    x = fresh_symbol(BV32, "x")
    assert solver.min_l1(x, 0, mk_and(mk_lt(x, bv(0)), mk_lt(bv(0), x))) is None


def test_min_l1_target_feasible(solver):
    x = fresh_symbol(REAL, "x")
    opt = solver.min_l1(x, Fraction(7, 3), mk_lt(real(0), x))
    assert opt.value == 0 and opt.model[x.name] == Fraction(7, 3)


def test_min_l1_mod7(solver):
    x = fresh_symbol(BV32, "x")
    opt = solver.min_l1(x, 100, mk_and(mk_le(bv(0), x), mk_eq(mk_arith("%", x, bv(7)), bv(3))))
    assert opt.model[x.name] == 101


def test_min_l1_real_within_eps(solver):
    x = fresh_symbol(REAL, "x")
    opt = solver.min_l1(x, 0, mk_lt(real(Fraction(1, 3)), x))   # open bound: infimum only
    assert abs(Fraction(opt.model[x.name]) - Fraction(1, 3)) <= Fraction(EPS_OPT) * 2


def test_soft_all(solver):
    a, b = fresh_symbol(BV32, "a"), fresh_symbol(BV32, "b")
    opt = solver.max_soft_equalities([a, b], [3, 4], mk_eq(a, a))
    assert opt.value == 2 and (opt.model[a.name], opt.model[b.name]) == (3, 4)


def test_soft_forced_violation(solver):
    a, b = fresh_symbol(BV32, "a"), fresh_symbol(BV32, "b")
    opt = solver.max_soft_equalities([a, b], [1, 1], mk_not(mk_eq(a, bv(1))))
    assert opt.value == 1 and opt.model[b.name] == 1


def test_soft_length_mismatch(solver):
    with pytest.raises(ValueError):
        solver.max_soft_equalities([fresh_symbol(BV32)], [1, 2], mk_eq(bv(0), bv(0)))


def test_backend_error_on_bad_command():
    s = Solver(["/nonexistent/solver-binary"])
    with pytest.raises(BackendError):
        s.check_sat(mk_eq(fresh_symbol(BV32), bv(1)))


def test_stats_count(solver):
    before = solver.stats.queries
    solver.check_sat(mk_eq(fresh_symbol(BV32), bv(1)))
    assert solver.stats.queries == before + 1


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32))
def test_min_l1_matches_sweep(seed):
    x, target, phi, best = l1_instance(random.Random(seed))
    opt = get_solver().min_l1(x, target, phi)
    if best is None:
        assert opt is None
    else:
        assert opt.optimal and opt.value == best
        assert evaluate(phi, opt.model)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32))
def test_soft_matches_enumeration(seed):
    vs, targets, phi, best = soft_instance(random.Random(seed))
    opt = get_solver().max_soft_equalities(vs, targets, phi)
    if best is None:
        assert opt is None
    else:
        assert opt.value == best
        assert evaluate(phi, opt.model)
        assert sum(opt.model[v.name] == t for v, t in zip(vs, targets)) == best
