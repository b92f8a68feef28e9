"""Acceptance criteria, one test (or a few clauses) per criterion.

Each clause records its verdict before asserting; the terminal summary prints
one PASS/FAIL line per criterion.  Run directly with ``python3 -m
tests.test_acceptance`` to get the same lines.
"""

import math
import random
import time

import pytest

from ghostsym.bidi import reconcile
from ghostsym.ghost import INVERSE, fragment_info, request_ghost, validate_inverse
from ghostsym.harness import CampaignConfig, campaign, corpus_names, corpus_program, run_campaign, run_program
from ghostsym.minilang import parse_program
from ghostsym.solver import SAT, get_solver
from ghostsym.symcore import BV32, TRUE, bv, fresh_symbol, mk_and, mk_eq, mk_lt, mk_not
from ghostsym.symexec import Executor, cut_record, decompose, symex

from .conftest import ACCEPTANCE, acceptance_lines, ghost_plan, ghost_states, reaching
from .corrupt import corrupted, variants
from .oracles import instances, l1_instance, soft_instance

pytestmark = pytest.mark.slow

BUDGET = 60.0


def record(n, clause, ok, detail=""):
    ACCEPTANCE.setdefault(n, []).append((clause, bool(ok), detail))
    return ok


def equivalent(p, q):
    s = get_solver()
    return (s.check_sat(mk_and(p, mk_not(q))).is_unsat
            and s.check_sat(mk_and(q, mk_not(p))).is_unsat)


def timed(fn, *a, **kw):
    t0 = time.perf_counter()
    out = fn(*a, **kw)
    return out, time.perf_counter() - t0


def cfg(**kw):
    return CampaignConfig(modes=("ghost",), budget=BUDGET, **kw)


# 1

def test_c1_bessel():
    rep, dt = timed(run_program, "bessel_j0", "ghost", cfg())
    both = {"j0_kernel#3:T", "j0_kernel#3:F"} <= set(rep.as_dict()["covered"])
    record(1, "ghost covers s*c<0 both ways", both, f"bombs {rep.bombs_triggered}")
    record(1, "ghost runtime <= 10 s", dt <= 10.0, f"{dt:.2f} s")

    plan, states = ghost_states("bessel_j0")
    info, art = plan.inverses["f"]
    st = reaching(states, "j0_kernel#3", True)[0]
    pre, suf = decompose(st, "f")
    rec = cut_record(st, "f")
    res = reconcile(pre, suf, info, art, cut=rec, initial_suffix={"s": 10, "c": -1})
    x = float(res.model[st.inputs["x"].name]) if res.status is SAT else math.nan
    s, c = (float(res.model[sym.name]) for _, sym in rec.writes) if res.status is SAT else (0, 0)
    forced = (res.status is SAT and abs(x) >= 2.0
              and abs(s - 0.909) <= 1e-3 and abs(c + 0.416) <= 1e-3)
    record(1, "forced suffix (10,-1)", forced, f"x={x:.4f} s={s:.4f} c={c:.4f}")

    base, bdt = timed(run_program, "bessel_j0", "baseline", CampaignConfig(modes=("baseline",), budget=BUDGET))
    missed = "j0_kernel#3:T" not in base.as_dict()["covered"]
    record(1, "baseline misses it in 60 s", missed, f"{bdt:.2f} s, timed out {base.timed_out}")
    assert both and dt <= 10.0 and forced and missed


# 2

def hash_preimages(target):
    return {a for a in range(97) if (a * a + 3) % 97 == target}


def test_c2_hash_guard():
    t0 = time.perf_counter()
    oracle = hash_preimages(6)
    exact = oracle == {10, 87}
    record(2, "oracle preimages of 6", exact, str(sorted(oracle)))
    info = fragment_info(corpus_program("hash_guard").program, "f", INVERSE)
    art = ghost_plan("hash_guard").inverses["f"][1]
    a, b = fresh_symbol(BV32, "a"), fresh_symbol(BV32, "beta_b")
    res = reconcile(TRUE, mk_and(mk_eq(b, bv(6)), mk_lt(bv(20), a)), info, art)
    dt = time.perf_counter() - t0
    got = res.model.get(a.name) if res.status is SAT else None
    record(2, "reconcile gives a=87", got == 87, f"a={got}")
    record(2, "<= 1 s", dt <= 1.0, f"{dt:.2f} s")
    assert exact and got == 87 and dt <= 1.0


# 3

def test_c3_skiplist_topology():
    rep, dt = timed(run_program, "skiplist_ring", "ghost", cfg())
    hit = "proc_ring_values#0" in rep.bombs_triggered
    record(3, "topology covers proc_ring_values", hit, f"{dt:.2f} s")
    record(3, "<= 5 s", dt <= 5.0, f"{dt:.2f} s")
    plain = run_program("skiplist_ring", "baseline", CampaignConfig(modes=("baseline",), budget=BUDGET))
    record(3, "plain baseline misses it", not plain.bombs_triggered, f"bombs {plain.bombs_triggered}")
    assert hit and dt <= 5.0 and not plain.bombs_triggered


@pytest.mark.xfail(strict=True, reason="bounded lazy enumeration finds the 4-node ring quickly")
def test_c3_lazy_baseline_misses_ring():
    rep, dt = timed(run_program, "skiplist_ring", "baseline-lazy",
                    CampaignConfig(modes=("baseline-lazy",), budget=BUDGET))
    missed = not rep.bombs_triggered
    record(3, "lazy baseline misses it in 60 s", missed, f"covered after {dt:.2f} s")
    assert missed


# 4

def inverse_fixtures():
    out = []
    for name in corpus_names():
        for e in ghost_plan(name).entries:
            if e["kind"] == INVERSE and e["status"] == "applied":
                out.append((name, e["label"]))
    return out


def test_c4_inverse_round_trip(fixtures):
    found = inverse_fixtures()
    rates = {}
    for name, label in found:
        info = fragment_info(corpus_program(name).program, label, INVERSE)
        art = request_ghost(info, INVERSE, fixtures)
        rates[name] = validate_inverse(info, art, 1000, seed=0).rate
    ok = bool(rates) and all(r == 1.0 for r in rates.values())
    record(4, f"{len(rates)} inverse fixtures at 100%", ok,
           ", ".join(f"{k}={v:.3f}" for k, v in rates.items()))
    assert len(found) >= 7 and ok


# 5

def corruption_plan(fixtures):
    """(program, variant) pairs: every variant of every program's own artifact."""
    out = []
    for name in corpus_names():
        prog = corpus_program(name).program
        for e in ghost_plan(name).entries:
            info = fragment_info(prog, e["label"], e["kind"])
            art = request_ghost(info, e["kind"], fixtures)
            out += [(name, v) for v, _ in variants(art, info)]
    return out


def test_c5_replay_soundness_fuzz(fixtures, monkeypatch):
    real = campaign.request_ghost
    hits, rejected, runs = [], 0, 0
    for name, variant in corruption_plan(fixtures):
        monkeypatch.setattr(campaign, "request_ghost", corrupted(real, variant))
        rep = run_program(name, "ghost", cfg(), provider=fixtures)
        runs += 1
        rejected += rep.rejected
        covered = set(rep.as_dict()["covered"])
        hits += [(name, variant, t) for t in corpus_program(name).unreachable if t in covered]
    record(5, "no unreachable target confirmed", not hits and runs > 0,
           f"{runs} corrupted runs, {rejected} rejected replays, hits {hits}")
    assert runs >= 40 and not hits
    # the gate did real work: some corrupted claims failed replay
    assert rejected > 0


# 6

def test_c6_solver_oracles():
    s = get_solver()
    l1_bad = 0
    for x, target, phi, best in instances(l1_instance, 200, seed=6):
        opt = s.min_l1(x, target, phi)
        l1_bad += (opt is not None) if best is None else not (opt and opt.optimal and opt.value == best)
    soft_bad = 0
    for vs, targets, phi, best in instances(soft_instance, 200, seed=7):
        opt = s.max_soft_equalities(vs, targets, phi)
        soft_bad += (opt is not None) if best is None else not (opt and opt.value == best)
    record(6, "min_l1 on 200 instances", l1_bad == 0, f"{l1_bad} disagreements")
    record(6, "max_soft_equalities on 200 instances", soft_bad == 0, f"{soft_bad} disagreements")
    assert l1_bad == 0 and soft_bad == 0


# 7

def test_c7_campaign(tmp_path):
    config = CampaignConfig(programs=("corpus",), modes=("baseline", "baseline-lazy", "ghost"),
                            budget=BUDGET, output=str(tmp_path / "report.json"))
    report, dt = timed(run_campaign, config)
    bombs = {m: report.totals()[m]["bombs_triggered"] for m in config.modes}
    best = max(bombs["baseline"], bombs["baseline-lazy"])
    ok = bombs["ghost"] >= 2 * best and len(report.by_mode("ghost")) >= 12
    record(7, "ghost >= 2x best baseline", ok, f"bombs {bombs}")
    record(7, "<= 10 min", dt <= 600, f"{dt:.1f} s")
    assert ok and dt <= 600


# 8

TWO_PATHS = "int main(symbolic int x) { int y = 0; if (x > 0) { y = x + 1; } return y; }"


def test_c8_symex_decomposition():
    states = symex(parse_program(TWO_PATHS))
    alpha = states[0].inputs["x"]
    pos = mk_lt(bv(0), alpha)
    pcs = [s.path_condition for s in states]
    two = (len(states) == 2
           and sum(equivalent(p, pos) for p in pcs) == 1
           and sum(equivalent(p, mk_not(pos)) for p in pcs) == 1)
    record(8, "two-path program gives alpha>0 and alpha<=0", two, f"{len(states)} states")

    checked, bad = 0, []
    for name in corpus_names():
        plan = ghost_plan(name)
        if not plan.cut_reads:
            continue
        for st in Executor(plan.program, plan.symex_config()).run():
            for label in plan.cut_reads:
                if not any(c.label == label for c in st.cutlog):
                    continue
                pre, suf = decompose(st, label)
                checked += 1
                if not equivalent(mk_and(pre, suf), st.path_condition):
                    bad.append((name, label))
    record(8, "pre and suf equal pc on corpus paths", checked > 0 and not bad,
           f"{checked} paths, {len(bad)} mismatches")
    assert two and checked > 0 and not bad


if __name__ == "__main__":
    import sys
    code = pytest.main([__file__, "-q", "-p", "no:cacheprovider"])
    sys.exit(code)
