import random

import pytest

from ghostsym.errors import EmptyWriteSet, UnknownLabel
from ghostsym.footprint import Footprint, footprint, havoc_of
from ghostsym.harness import corpus_program
from ghostsym.minilang import ast as A, fragment_body, parse_program, run_stmts


def test_hash_call():
    fp = footprint(corpus_program("hash_guard").program, "f")
    assert set(fp.rd_vars) == {"a"} and set(fp.wr_vars) == {"b"}


def test_increment():
    fp = footprint(parse_program("void main(int x){ @f { x = x + 1; } }"), "f")
    assert fp.rd_vars == ("x",) and fp.wr_vars == ("x",)


def test_unknown_label():
    with pytest.raises(UnknownLabel):
        footprint(parse_program("void main(int x){ x = 1; }"), "f")


def test_field_locations():
    src = """
    struct N { int v; struct N *next; };
    void main(struct N *p, int k){ @f { p->v = k; k = p->next->v; } }"""
    fp = footprint(parse_program(src), "f")
    assert ("N", "v") in fp.wr_locs
    assert ("N", "next") in fp.rd_locs
    assert {"p", "k"} <= set(fp.rd_vars)


def test_fragment_temporaries_excluded():
    fp = footprint(corpus_program("digit_count").program, "f")
    assert fp.rd_vars == ("x", "d") and fp.wr_vars == ("d",)


COND = "void main(int y, int z, int w, int q){ @f { if (y > 0) { z = w; } } }"


def test_conditional_over_approximation():
    prog = parse_program(COND)
    fp = footprint(prog, "f")
    assert {"y", "w"} <= set(fp.rd_vars) and "z" in fp.wr_vars
    body = fragment_body(prog, "f")
    rng = random.Random(7)
    names = ["y", "z", "w", "q"]
    for _ in range(200):
        store = {n: rng.randint(-5, 5) for n in names}
        out = run_stmts(prog, body, dict(store)).store
        mutated = dict(store)
        for n in names:
            if n not in fp.rd:
                mutated[n] = rng.randint(-100, 100)
        out2 = run_stmts(prog, body, mutated).store
        # a variable written on one run but not the other keeps its own input,
        # so compare only runs where the write happened on both
        for v in fp.wr_vars:
            if out[v] != store[v] or out2[v] != mutated[v]:
                assert out[v] == out2[v]


def test_havoc_single():
    fp = footprint(corpus_program("hash_guard").program, "f")
    stmts, syms = havoc_of(fp)
    assert [type(s) for s in stmts] == [A.Havoc]
    assert stmts[0].name == "b" and syms["b"].startswith("beta_b")


def test_havoc_pair():
    fp = footprint(corpus_program("bessel_j0").program, "f")
    stmts, syms = havoc_of(fp)
    assert [s.name for s in stmts] == ["s", "c"]
    assert len(set(syms.values())) == 2


def test_havoc_empty():
    with pytest.raises(EmptyWriteSet):
        havoc_of(Footprint(frozenset({"x"}), frozenset(), "f"))
