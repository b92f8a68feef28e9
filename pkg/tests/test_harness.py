import json

import pytest

from ghostsym.errors import ConfigError
from ghostsym.harness import (CampaignConfig, CORPUS_DIR, corpus_names, corpus_program,
                              load_corpus, make_provider, parse_config, report_coverage, run_campaign,
                              run_program, sync_fixtures)
from ghostsym.harness.campaign import branch_sites
from ghostsym.harness.cli import main
from ghostsym.minilang import ConcreteState, parse_program
from ghostsym.replay import run_original


def test_parse_config():
    cfg = parse_config("""
    # comment
    programs = hash_guard, pow3
    mode = baseline, ghost
    budget = 12.5
    seed = 3
    GHOSTSYM_SMT_CMD = z3 -in
    """)
    assert cfg.programs == ("hash_guard", "pow3")
    assert cfg.modes == ("baseline", "ghost")
    assert cfg.budget == 12.5 and cfg.seed == 3 and cfg.smt_cmd == "z3 -in"


@pytest.mark.parametrize("text", ["mode = fast", "budget = 0", "colour = red", "seed = x",
                                  "programs", "provider = magic", "workers = 0"])
def test_bad_config(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_relative_paths(tmp_path):
    cfg = parse_config("programs = a.minic, corpus", tmp_path)
    assert cfg.programs == (str(tmp_path / "a.minic"), "corpus")


def test_corpus_size_and_categories():
    progs = load_corpus()
    assert len(progs) >= 12
    cats = {p.category for p in progs}
    assert len(cats) >= 5
    assert sum(bool(p.ghosts) for p in progs) >= 12


@pytest.mark.parametrize("name", corpus_names())
def test_two_critical_paths(name):
    # every program has one bomb: the bomb path and the path avoiding it
    _, bombs = branch_sites(corpus_program(name).program)
    assert len(bombs) == 1


def test_fixtures_in_sync():
    assert sync_fixtures(CORPUS_DIR, check=True) == []


def test_sync_writes_missing(tmp_path):
    stale = sync_fixtures(CORPUS_DIR, tmp_path)
    assert len(stale) == len(list((CORPUS_DIR / "fixtures").glob("*.minic")))
    assert sync_fixtures(CORPUS_DIR, tmp_path, check=True) == []


def test_coverage_zero():
    prog = corpus_program("hash_guard").program
    cov = report_coverage([], prog)
    assert cov["branch_coverage"] == 0.0 and cov["bombs_triggered"] == []


def test_coverage_full_toy():
    prog = parse_program("int main(int x){ if (x > 0) { return 1; } return 0; }")
    traces = [run_original(prog, ConcreteState(store={"x": v}))[0] for v in (1, -1)]
    cov = report_coverage(traces, prog)
    assert cov["branch_coverage"] == 1.0 and cov["static_branches"] == 2


def test_coverage_without_program():
    cov = report_coverage([(("a#0", True),), (("a#0", True), ("a#1", False))])
    assert cov["covered_count"] == 2


def test_empty_campaign():
    rep = run_campaign(CampaignConfig(programs=()))
    assert rep.programs == [] and rep.totals() == {}


def test_unknown_program():
    with pytest.raises(ConfigError):
        run_campaign(CampaignConfig(programs=("no_such_program",)))


def test_baseline_skiplist_uncovered():
    rep = run_program("skiplist_ring", "baseline", CampaignConfig(budget=60))
    assert ("proc_ring_values#0", True) not in rep.covered
    assert rep.bombs_triggered == []


EXPECTED_GHOST = {n: corpus_program(n) for n in ("hash_guard", "pow3", "list3", "exp_guard")}


@pytest.mark.parametrize("name", sorted(EXPECTED_GHOST))
def test_ghost_triggers_bomb(name):
    cfg = CampaignConfig(budget=60)
    rep = run_program(name, "ghost", cfg, provider=make_provider(cfg))
    _, bombs = branch_sites(EXPECTED_GHOST[name].program)
    assert rep.bombs_triggered == bombs
    assert rep.tokens == {"input": 0, "output": 0}


def test_covered_is_union_of_replays():
    cfg = CampaignConfig(programs=("hash_guard", "skiplist_ring"), modes=("ghost",))
    rep = run_campaign(cfg)
    for p in rep.programs:
        prog = corpus_program(p.name).program
        static, _ = branch_sites(prog)
        seen = set()
        for t in p.tests:
            store = t["input"]["store"]
            heap = {int(a): c for a, c in t["input"]["heap"].items()}
            trace, _, _ = run_original(prog, ConcreteState(store=store, heap=heap))
            seen.update(trace)
        assert set(p.covered) == {b for b in static if b in seen}


def test_report_deterministic(tmp_path):
    cfg = CampaignConfig(programs=("hash_guard", "popcount", "dll_ring"), modes=("ghost",))
    a = run_campaign(cfg).as_dict()
    b = run_campaign(cfg).as_dict()
    strip = lambda d: [{k: v for k, v in p.items() if k not in ("elapsed", "solver")}
                       for p in d["programs"]]
    assert strip(a) == strip(b)


def test_workers_same_result():
    base = dict(programs=("hash_guard", "popcount", "sum_loop"), modes=("baseline", "ghost"))
    one = run_campaign(CampaignConfig(**base))
    many = run_campaign(CampaignConfig(workers=3, **base))
    key = lambda r: [(p.name, p.mode, p.covered) for p in r.programs]
    assert key(one) == key(many)


def test_report_file(tmp_path):
    out = tmp_path / "report.json"
    rep = run_campaign(CampaignConfig(programs=("hibits_masked",), modes=("baseline",),
                                      output=str(out)))
    data = json.loads(out.read_text())
    assert data["totals"]["baseline"]["bombs_triggered"] == 1
    assert data["programs"][0]["covered"] and "hibits_masked" in rep.table()


def test_no_provider_ghost_mode():
    rep = run_program("hash_guard", "ghost", CampaignConfig(provider="none"))
    assert rep.ghosts and rep.ghosts[0]["status"] == "unavailable"


# command line

def test_cli_exec(capsys):
    assert main(["exec", "hash_guard", "--input", "a=87"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["ret"] == 6 and "main#3:T" in out["trace"]


def test_cli_exec_fault(capsys, tmp_path):
    f = tmp_path / "p.minic"
    f.write_text("int main(int x){ return 10 / x; }")
    assert main(["exec", str(f), "--input", "x=0"]) == 1
    assert json.loads(capsys.readouterr().out)["fault"]


def test_cli_symex(capsys):
    assert main(["symex", "hash_guard", "--mode", "ghost"]) == 0
    out = capsys.readouterr().out
    assert "hash_guard" in out and "1/1" in out


def test_cli_validate(capsys):
    prog = CORPUS_DIR / "programs" / "hash_guard.minic"
    ghost = CORPUS_DIR / "ghosts" / "hash_guard.f.inverse.minic"
    assert main(["ghost", "validate", str(prog), str(ghost)]) == 0
    assert '"rate": 1.0' in capsys.readouterr().out


def test_cli_run(capsys, tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("programs = hibits_masked\nmode = baseline, ghost\noutput = r.json\n")
    assert main(["run", "--config", str(cfg), "--output", str(tmp_path / "r.json")]) == 0
    assert (tmp_path / "r.json").is_file()
    assert "hibits_masked" in capsys.readouterr().out


def test_cli_sync_check(capsys):
    assert main(["corpus", "sync", "--check"]) == 0


def test_cli_error(capsys):
    assert main(["exec", "nothing_here"]) == 2
    assert "no such program" in capsys.readouterr().err
