import pytest
from hypothesis import given, settings, strategies as st

from ghostsym.errors import (MiniCSyntaxError, RuntimeFault, SortError, StepBudgetExceeded,
                             UnknownLabel)
from ghostsym.harness import corpus_names, corpus_program
from ghostsym.minilang import (ConcreteState, ast as A, exec_program, fragment_body,
                               parse_program, pretty_print, replace_fragment)

HASH = corpus_program("hash_guard").source


def run(src, **store):
    return exec_program(parse_program(src), ConcreteState(store=store))


def test_identity_procedure():
    p = parse_program("int f(int x){ return x; }")
    assert [q.name for q in p.procs] == ["f"]
    assert run("int f(int x){ return x; }", x=9).ret == 9


def test_hash_procedures():
    p = parse_program(HASH)
    assert {q.name for q in p.procs} == {"hard_func", "main"}
    assert p.entry == "main"


def test_syntax_error_offset():
    with pytest.raises(MiniCSyntaxError) as e:
        parse_program("int f({")
    assert e.value.offset == 7
    assert (e.value.line, e.value.col) == (1, 7)


def test_sort_error():
    with pytest.raises(SortError):
        parse_program("int f(bool x){ return x + 1; }")


def test_increment():
    out = run("void main(int x){ x = x + 1; }", x=41)
    assert out.store["x"] == 42


def test_empty_body_keeps_state():
    out = run("void main(int x){ }", x=5)
    assert out.store == {"x": 5}
    assert out.trace == ()


def test_hash_run_at_87():
    out = run(HASH, a=87)
    assert out.ret == 6
    assert ("main#4", False) in out.trace
    assert ("main#3", True) in out.trace


def test_int32_wraps():
    assert run("int f(int x){ return x + 1; }", x=2 ** 31 - 1).ret == -2 ** 31
    assert run("int f(int x){ return x * 65536; }", x=65536).ret == 0


def test_truncated_remainder():
    assert run("int f(int x){ return x % 7; }", x=-10).ret == -3
    assert run("int f(int x){ return x / 7; }", x=-10).ret == -1


def test_div_zero_faults():
    with pytest.raises(RuntimeFault):
        run("int f(int x){ return 10 / x; }", x=0)


def test_failed_assert_keeps_trace():
    with pytest.raises(RuntimeFault) as e:
        run("void f(int x){ assert(x > 0); }", x=0)
    assert ("f#0", False) in e.value.trace


def test_step_budget():
    p = parse_program("void f(int x){ while (x >= 0) { x = x; } }")
    with pytest.raises(StepBudgetExceeded):
        exec_program(p, ConcreteState(store={"x": 0}), budget=1000)


def test_hi_bits():
    assert run("int f(float x){ return hi_bits(x); }", x=2.0).ret == 0x40000000
    assert run("int f(float x){ return hi_bits(x); }", x=-2.0).ret == -0x40000000


def test_malloc_starts_at_one():
    src = """
    struct N { int v; struct N *next; };
    int f(int x){
        struct N *a = malloc(N);
        struct N *b = malloc(N);
        a->next = b;
        if (b == a->next) { return 1; }
        return 0;
    }
    """
    out = run(src, x=0)
    assert out.ret == 1
    assert sorted(out.heap) == [1, 2]
    assert out.heap[1]["next"] == 2


def test_replace_identity():
    p = parse_program(HASH)
    assert replace_fragment(p, "f", fragment_body(p, "f")) == p


def test_replace_with_havoc():
    p = parse_program(HASH)
    q = replace_fragment(p, "f", (A.Havoc("b", "beta_b"),))
    assert q != p
    assert isinstance(fragment_body(q, "f")[0], A.Havoc)
    assert fragment_body(p, "f") != fragment_body(q, "f")   # original untouched


def test_replace_unknown_label():
    with pytest.raises(UnknownLabel):
        replace_fragment(parse_program(HASH), "nope", ())


@pytest.mark.parametrize("name", corpus_names())
def test_round_trip_corpus(name):
    p = corpus_program(name).program
    assert parse_program(pretty_print(p)) == p


@pytest.mark.parametrize("name", corpus_names())
def test_deterministic(name):
    prog = corpus_program(name)
    for w in prog.witnesses:
        try:
            a = exec_program(prog.program, w.copy())
            b = exec_program(prog.program, w.copy())
        except RuntimeFault as exc:
            with pytest.raises(RuntimeFault) as again:
                exec_program(prog.program, w.copy())
            assert again.value.trace == exc.trace
            continue
        assert (a.store, a.heap, a.trace, a.ret) == (b.store, b.heap, b.trace, b.ret)


# expression programs against big-integer arithmetic

_OPS = ["+", "-", "*", "&", "|", "^"]


def _wrap(v):
    v &= 0xFFFFFFFF
    return v - (1 << 32) if v >= 1 << 31 else v


exprs = st.recursive(
    st.one_of(st.sampled_from(["x", "y"]), st.integers(-2 ** 31, 2 ** 31 - 1).map(str)),
    lambda sub: st.tuples(sub, st.sampled_from(_OPS), sub).map(lambda t: f"({t[0]} {t[1]} {t[2]})"),
    max_leaves=8)


def _oracle(text, x, y):
    env = {"x": x, "y": y}
    return _wrap(eval(text, {}, env))


@settings(max_examples=200, deadline=None)
@given(exprs, st.integers(-2 ** 31, 2 ** 31 - 1), st.integers(-2 ** 31, 2 ** 31 - 1))
def test_int_expressions_match_bigint(text, x, y):
    src = f"int f(int x, int y){{ return {text}; }}"
    assert run(src, x=x, y=y).ret == _oracle(text, x, y)
