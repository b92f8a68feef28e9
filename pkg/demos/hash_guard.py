"""A many-to-one integer hash in front of an equality guard.

b = (a*a + 3) % 97 has exactly two preimages of 6 in [0, 97): 10 and 87.  The
suffix also demands a > 20, so the first preimage an inverse finds may be the
wrong one.  Reconciliation feeds the contradiction back and settles on 87.
"""

from ghostsym.bidi import reconcile
from ghostsym.ghost import INVERSE, FixtureProvider, default_fixture_dir, fragment_info, request_ghost
from ghostsym.harness import corpus_program
from ghostsym.replay import confirm
from ghostsym.minilang.interp import ConcreteState
from ghostsym.symcore import BV32, TRUE, bv, fresh_symbol, mk_and, mk_eq, mk_lt


def main():
    prog = corpus_program("hash_guard").program
    print("brute force preimages of 6:", [a for a in range(97) if (a * a + 3) % 97 == 6])

    info = fragment_info(prog, "f", INVERSE)
    art = request_ghost(info, INVERSE, FixtureProvider(default_fixture_dir()))
    a, b = fresh_symbol(BV32, "a"), fresh_symbol(BV32, "beta_b")
    res = reconcile(TRUE, mk_and(mk_eq(b, bv(6)), mk_lt(bv(20), a)), info, art)
    for step in res.history:
        print("  step:", step)
    print("model:", res.model[a.name], "->", res.model[b.name])

    for value in (10, 87):
        verdict = confirm(prog, ConcreteState(store={"a": value}), "main#3")
        print(f"replay a={value} on the bomb branch:", verdict)


if __name__ == "__main__":
    main()
