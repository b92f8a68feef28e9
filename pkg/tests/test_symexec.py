import itertools

import pytest
from hypothesis import given, settings, strategies as st

from ghostsym.errors import CutNotOnPath, MultipleCutOccurrences, PathBudgetExceeded
from ghostsym.footprint import footprint, havoc_of
from ghostsym.minilang import ConcreteState, exec_program, parse_program, replace_fragment
from ghostsym.solver import get_solver
from ghostsym.symcore import (TRUE, BV32, bv, conj, evaluate, fresh_symbol, mk_and, mk_arith,
                              mk_eq, mk_lt, mk_not, realize)
from ghostsym.symexec import Executor, SymexConfig, decompose, feasible, symex

TWO_PATHS = """
int main(symbolic int x) {
    int y = 0;
    if (x > 0) { y = x + 1; }
    return y;
}
"""

HASH_PLAIN = """
int hard_func(int x) { return (x * x + 3) % 97; }
int main(symbolic int a) {
    int b = 0;
    @f { b = hard_func(a); }
    if (b == 42) { assert(a > 20); }
    return b;
}
"""


def equivalent(p, q):
    s = get_solver()
    return (s.check_sat(mk_and(p, mk_not(q))).is_unsat
            and s.check_sat(mk_and(q, mk_not(p))).is_unsat)


def havocked(src, label="f"):
    prog = parse_program(src)
    fp = footprint(prog, label)
    stmts, _ = havoc_of(fp)
    return replace_fragment(prog, label, stmts), fp


def test_two_path_states():
    states = symex(parse_program(TWO_PATHS))
    assert len(states) == 2
    alpha = states[0].inputs["x"]
    pos = mk_lt(bv(0), alpha)
    by_pc = {str(s.path_condition): s for s in states}
    taken = [s for s in states if equivalent(s.path_condition, pos)]
    other = [s for s in states if equivalent(s.path_condition, mk_not(pos))]
    assert len(taken) == len(other) == 1 and len(by_pc) == 2
    assert equivalent(mk_eq(taken[0].store["y"], mk_arith("+", alpha, bv(1))), TRUE)
    assert other[0].store["y"] == bv(0)


def test_straight_line_singleton():
    states = symex(parse_program("int main(symbolic int x){ int y = x * 3; return y - 1; }"))
    assert len(states) == 1 and states[0].status == "done"


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_independent_branches(k):
    params = ", ".join(f"symbolic int x{i}" for i in range(k))
    body = "".join(f"if (x{i} > 0) {{ r = r + {1 << i}; }}\n" for i in range(k))
    prog = parse_program(f"int main({params}) {{ int r = 0; {body} return r; }}")
    states = symex(prog)
    assert len(states) == 2 ** k
    # every input corner satisfies exactly one pc, and the pc's return agrees
    for corner in itertools.product([-1, 1], repeat=k):
        store = {f"x{i}": v for i, v in enumerate(corner)}
        out = exec_program(prog, ConcreteState(store=dict(store)))
        hits = []
        for s in states:
            A = {s.inputs[n].name: v for n, v in store.items()}
            if evaluate(s.path_condition, A):
                hits.append(evaluate(s.ret, A))
        assert hits == [out.ret]


def test_feasible():
    a = fresh_symbol(BV32, "alpha")
    assert feasible(TRUE)
    assert not feasible(mk_and(mk_lt(bv(0), a), mk_not(mk_lt(bv(0), a))))
    h = mk_arith("%", mk_arith("+", mk_arith("*", a, a), bv(3)), bv(97))
    assert feasible(mk_and(mk_le0(a), mk_lt(a, bv(97)), mk_eq(h, bv(6))))


def mk_le0(a):
    return mk_not(mk_lt(a, bv(0)))


def test_decompose_hash_paths():
    prog, fp = havocked(HASH_PLAIN)
    states = symex(prog)
    taken = [s for s in states if ("main#0", True) in s.trace]
    other = [s for s in states if ("main#0", False) in s.trace]
    assert taken and other
    for s in taken:
        pre, suf = decompose(s, "f")
        assert pre == TRUE
        beta = s.cutlog[0].writes[0][1]
        alpha = s.inputs["a"]
        want = mk_and(mk_eq(beta, bv(42)), mk_lt(bv(20), alpha))
        if s.status == "done":
            assert equivalent(suf, want)
    pre, suf = decompose(other[0], "f")
    assert pre == TRUE
    beta = other[0].cutlog[0].writes[0][1]
    assert equivalent(suf, mk_not(mk_eq(beta, bv(42))))


def test_decompose_cut_at_end():
    prog, _ = havocked("int main(symbolic int a){ int b = 0; if (a > 3) { a = 3; } @f { b = a; } return b; }")
    for s in symex(prog):
        pre, suf = decompose(s, "f")
        assert suf == TRUE and pre == s.path_condition


def test_cut_not_on_path():
    prog, _ = havocked("int main(symbolic int a){ int b = 0; if (a > 3) { @f { b = a; } } return b; }")
    states = symex(prog)
    missing = [s for s in states if not s.cutlog]
    with pytest.raises(CutNotOnPath):
        decompose(missing[0], "f")


def test_cut_in_loop_rejected():
    prog, _ = havocked("""
    int main(symbolic int a){
        int b = 0; int i = 0;
        while (i < 2) { @f { b = b + a; } i = i + 1; }
        return b;
    }""")
    states = symex(prog)
    with pytest.raises(MultipleCutOccurrences):
        decompose(states[0], "f")


def test_path_budget():
    body = "".join(f"if (x{i} > 0) {{ r = r + 1; }}\n" for i in range(8))
    params = ", ".join(f"symbolic int x{i}" for i in range(8))
    prog = parse_program(f"int main({params}) {{ int r = 0; {body} return r; }}")
    with pytest.raises(PathBudgetExceeded):
        symex(prog, config=SymexConfig(max_live=16))


def test_unroll_truncates():
    prog = parse_program("int main(symbolic int n){ int i = 0; while (i < n) { i = i + 1; } return i; }")
    states = symex(prog, config=SymexConfig(unroll=3))
    assert {s.status for s in states} == {"done", "truncated"}
    assert sum(s.status == "done" for s in states) == 4


def test_no_unsat_pcs():
    prog = parse_program("""
    int main(symbolic int x){
        if (x > 5) { if (x < 3) { return 1; } }
        return 0;
    }""")
    states = symex(prog)
    assert len(states) == 2
    assert all(get_solver().check_sat(s.path_condition).is_sat for s in states)


def test_lazy_heap_mode():
    src = """
    struct N { int v; struct N *next; };
    int main(symbolic struct N *p){
        if (p == null) { return 0; }
        if (p->v == 7) { return 1; }
        return 2;
    }"""
    prog = parse_program(src)
    plain = symex(prog)
    lazy = symex(prog, config=SymexConfig(heap_mode="lazy"))
    assert any(s.status == "fault" for s in plain)
    assert {s.ret for s in lazy if s.status == "done"} == {bv(0), bv(1), bv(2)}


# realize(initial) of any model reproduces the recorded branch trace

SMALL = [TWO_PATHS, """
int main(symbolic int x, symbolic int y){
    int r = 0;
    if (x > y) { r = x - y; } else { r = y - x; }
    if (r % 3 == 1 && x != 0) { r = r + 10; }
    while (r > 20) { r = r - 7; }
    assert(r != 19);
    return r;
}""", """
int main(symbolic int x){
    int s = 0; int i = 0;
    while (i < 4) { if ((x >> i) & 1) { s = s + 1; } i = i + 1; }
    return s;
}"""]


@pytest.mark.parametrize("src", SMALL)
def test_models_replay_traces(src):
    prog = parse_program(src)
    s = get_solver()
    for state in symex(prog):
        if state.status == "truncated":
            continue
        r = s.check_sat(state.path_condition)
        assert r.is_sat
        inp = realize(state, r.model.complete(state.all_terms()), initial=True)
        try:
            trace = exec_program(prog, inp).trace
        except Exception as exc:
            trace = exc.trace
        assert tuple(trace) == tuple(state.trace)


@settings(max_examples=60, deadline=None)
@given(st.integers(-50, 50), st.integers(-50, 50))
def test_concrete_inputs_follow_one_state(x, y):
    prog = parse_program(SMALL[1])
    states = _small_states()
    try:
        trace = exec_program(prog, ConcreteState(store={"x": x, "y": y})).trace
    except Exception as exc:
        trace = exc.trace
    match = [st_ for st_ in states
             if evaluate(st_.path_condition, {st_.inputs["x"].name: x, st_.inputs["y"].name: y})]
    assert len(match) == 1
    want = tuple(match[0].trace)
    if match[0].status == "truncated":     # unroll bound hit: a prefix of the run
        assert tuple(trace)[:len(want)] == want
    else:
        assert tuple(trace) == want


_CACHE = {}


def _small_states():
    if "s" not in _CACHE:
        _CACHE["s"] = symex(parse_program(SMALL[1]))
    return _CACHE["s"]
