import pytest

from ghostsym.ghost import FixtureProvider, default_fixture_dir
from ghostsym.harness import corpus_program, prepare_ghost
from ghostsym.symexec import Executor


@pytest.fixture(scope="session")
def fixtures():
    return FixtureProvider(default_fixture_dir())


_PLANS = {}


def ghost_plan(name, provider=None):
    """Ghost plan for a corpus program under the bundled fixtures (cached)."""
    if provider is None:
        if name not in _PLANS:
            _PLANS[name] = prepare_ghost(corpus_program(name).program,
                                         FixtureProvider(default_fixture_dir()))
        return _PLANS[name]
    return prepare_ghost(corpus_program(name).program, provider)


def ghost_states(name, **cfg):
    plan = ghost_plan(name)
    return plan, Executor(plan.program, plan.symex_config(**cfg)).run()


def reaching(states, site, polarity=True):
    return [s for s in states if (site, polarity) in s.trace]


# criterion number -> list of (clause, ok, detail); filled by test_acceptance
ACCEPTANCE = {}
TITLES = {
    1: "Bessel kernel, inverse ghost",
    2: "hash guard, reconcile",
    3: "skiplist ring, topology",
    4: "inverse round trip",
    5: "replay soundness fuzz",
    6: "solver reductions vs oracles",
    7: "mini-bomb campaign",
    8: "symex and decomposition",
}


def acceptance_lines():
    out = []
    for n in sorted(ACCEPTANCE):
        clauses = ACCEPTANCE[n]
        ok = all(c[1] for c in clauses)
        detail = "; ".join(f"{c[0]}: {'ok' if c[1] else 'FAILED'} ({c[2]})" for c in clauses)
        out.append(f"criterion {n} [{TITLES[n]}]: {'PASS' if ok else 'FAIL'}  {detail}")
    return out


def pytest_terminal_summary(terminalreporter):
    lines = acceptance_lines()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
