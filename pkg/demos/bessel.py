"""Bessel kernel: a transcendental guard crossed with an inverse ghost.

The kernel branches on the sign of sin(x) * cos(x).  Plain symbolic
execution hands the solver sin and cos, which it cannot reason about, so the
branch stays uncovered.  In ghost mode the sincos fragment is havocked, the
solver picks target values for (s, c), and the golden-section inverse turns
them back into an x that the original program really drives there.
"""

import math

from ghostsym.bidi import reconcile, run_inverse
from ghostsym.ghost import FixtureProvider, default_fixture_dir
from ghostsym.harness import corpus_program, prepare_ghost, run_program
from ghostsym.symexec import Executor, cut_record, decompose


def main():
    print(corpus_program("bessel_j0").source)
    for mode in ("baseline", "ghost"):
        rep = run_program("bessel_j0", mode)
        print(f"{mode:9s} bombs={rep.bombs_triggered} coverage={rep.branch_coverage:.1%} "
              f"({rep.elapsed:.2f} s)")

    # one reconciliation step by hand, from a deliberately bad suffix model
    plan = prepare_ghost(corpus_program("bessel_j0").program, FixtureProvider(default_fixture_dir()))
    info, art = plan.inverses["f"]
    st = next(s for s in Executor(plan.program, plan.symex_config()).run()
              if ("j0_kernel#3", True) in s.trace)
    pre, suf = decompose(st, "f")
    print("inverse of (s=10, c=-1):", run_inverse(art, {"s": 10, "c": -1}))
    res = reconcile(pre, suf, info, art, cut=cut_record(st, "f"), initial_suffix={"s": 10, "c": -1})
    x = float(res.model[st.inputs["x"].name])
    print(f"reconciled in {res.iterations} iteration(s): x={x}, "
          f"sin|x|={math.sin(abs(x)):.3f} cos|x|={math.cos(abs(x)):.3f}")


if __name__ == "__main__":
    main()
