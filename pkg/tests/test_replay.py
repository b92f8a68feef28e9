from fractions import Fraction

import pytest

from ghostsym.harness import corpus_names, corpus_program
from ghostsym.minilang import ConcreteState, parse_program
from ghostsym.replay import Confirmed, Rejected, confirm, near_miss, parse_target, tighten
from ghostsym.solver import get_solver
from ghostsym.symcore import Assignment, realize
from ghostsym.symexec import symex

HASH = corpus_program("hash_guard").program


def test_parse_target():
    assert parse_target("p#3") == ("p#3", True)
    assert parse_target("p#3:F") == ("p#3", False)
    assert parse_target(("p#1", 0)) == ("p#1", False)


def test_hash_87_confirmed():
    res = confirm(HASH, ConcreteState(store={"a": 87}), "main#1")    # b == 6 taken
    assert isinstance(res, Confirmed) and res.ret == 6


def test_hash_10_rejected():
    res = confirm(HASH, ConcreteState(store={"a": 10}), "main#2")    # a > 20 claimed
    assert isinstance(res, Rejected) and not res
    assert res.fault and ("main#2", False) in res.trace


def test_failing_assert_still_confirms_earlier_branch():
    res = confirm(HASH, ConcreteState(store={"a": 10}), "main#1")
    assert res and res.fault


def test_unexecuted_procedure():
    assert not confirm(HASH, ConcreteState(store={"a": 87}), "nowhere#0")
    prog = parse_program("int h(int x){ if (x > 0) { return 1; } return 0; } int main(int a){ return a; }")
    assert not confirm(prog, ConcreteState(store={"a": 1}), "h#0")


def test_unbound_input():
    res = confirm(HASH, ConcreteState(store={}), "main#1")
    assert not res and "does not bind" in res.reason


@pytest.mark.parametrize("name", corpus_names())
def test_witnesses_trigger_bombs(name):
    prog = corpus_program(name)
    from ghostsym.harness.campaign import branch_sites
    _, bombs = branch_sites(prog.program)
    for w in prog.witnesses:
        assert any(confirm(prog.program, w.copy(), b) for b in bombs)


@pytest.mark.parametrize("name", corpus_names())
def test_unreachable_never_hit_by_witnesses(name):
    prog = corpus_program(name)
    for w in prog.witnesses:
        for t in prog.unreachable:
            assert not confirm(prog.program, w.copy(), t)


FLOAT = "int main(symbolic float x){ if (x * 3.0 > 1.0) { return 1; } return 0; }"


def _float_state():
    prog = parse_program(FLOAT)
    st = [s for s in symex(prog) if ("main#0", True) in s.trace][0]
    return prog, st


def test_near_miss_and_retry():
    prog, st = _float_state()
    x = st.inputs["x"]
    model = Assignment({x.name: Fraction(1, 3) + Fraction(1, 10 ** 18)})
    res = confirm(prog, realize(st, model, initial=True), "main#0")
    assert not res
    nm = near_miss(st, model, res.trace)
    assert nm.site == "main#0" and nm.gap == Fraction(3, 10 ** 18)
    r = get_solver().check_sat(list(st.pc) + [tighten(nm)])
    assert confirm(prog, realize(st, r.model, initial=True), "main#0")


def test_no_near_miss_for_large_gap():
    prog, st = _float_state()
    x = st.inputs["x"]
    model = Assignment({x.name: Fraction(1, 2)})
    assert near_miss(st, model, (("main#0", False),)) is None


def test_no_near_miss_on_int_guard():
    prog = parse_program("int main(symbolic int x){ if (x > 3) { return 1; } return 0; }")
    st = [s for s in symex(prog) if ("main#0", True) in s.trace][0]
    x = st.inputs["x"]
    assert near_miss(st, Assignment({x.name: 4}), (("main#0", False),)) is None
