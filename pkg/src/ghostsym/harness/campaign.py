"""Campaign orchestration: explore, solve, replay, report.

Three modes share one pipeline and differ only in what is explored:

  baseline        the program as written, unresolvable pointers fault
  baseline-lazy   the same with lazily materialized input cells
  ghost           hard fragments replaced by ghost code (surrogates and
                  topologies inline, inverses as havoc plus reconciliation)

Every terminal state is turned into a concrete input and replayed on the
original program; only confirmed replays count as coverage.
"""

from __future__ import annotations

import concurrent.futures
import json
import logging
import random
import re
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from ..bidi import ReconcileConfig, reconcile
from ..errors import ConfigError, GhostsymError
from ..footprint import havoc_of
from ..ghost import (SURROGATE, TOPOLOGY, fragment_info, identify_hard_fragments,
                     materialize, provider_from_config, request_ghost, validate_inverse)
from ..minilang import ast as A
from ..minilang.parser import parse_program
from ..minilang.transform import add_procs, merge_structs, replace_fragment
from ..replay import confirm, near_miss, tighten
from ..solver import Solver, get_solver, set_solver
from ..symcore import BV32, REAL, naming_scope, realize
from ..symexec import Executor, SymexConfig, cut_record, decompose
from ..topology import inject, spec_from_artifact
from .config import CampaignConfig
from .corpus import CORPUS_DIR, corpus_names, corpus_program

log = logging.getLogger(__name__)


# ------------------------------------------------------------------ coverage

def branch_sites(program: A.Program):
    """Static (site, polarity) targets and the bomb sites of ``program``."""
    static, bombs = [], []
    for proc in program.procs:
        for s in A.walk_stmts(proc.body):
            if isinstance(s, A.Bomb):
                static.append((s.sid, True))
                bombs.append(s.sid)
            elif isinstance(s, (A.If, A.While, A.Assert)):
                static += [(s.sid, True), (s.sid, False)]
    return static, bombs


def report_coverage(traces, program: Optional[A.Program] = None) -> Dict[str, Any]:
    """Branch and bomb coverage of confirmed ``traces``.

    Without ``program`` the static branch set is unknown and only the covered
    set is reported.
    """
    covered = set()
    for tr in traces:
        covered.update((s, bool(p)) for s, p in tr)
    out = {"covered": sorted(covered), "covered_count": len(covered)}
    if program is None:
        return out
    static, bombs = branch_sites(program)
    hit = [t for t in static if t in covered]
    out.update({
        "static_branches": len(static),
        "covered": sorted(hit),
        "covered_count": len(hit),
        "branch_coverage": len(hit) / len(static) if static else 0.0,
        "bombs": sorted(bombs),
        "bombs_triggered": sorted(b for b in bombs if (b, True) in covered),
    })
    return out


# ------------------------------------------------------------------ per-program report

@dataclass
class ProgramReport:
    name: str
    mode: str
    paths: int = 0
    static_branches: int = 0
    covered: List[Tuple[str, bool]] = field(default_factory=list)
    branch_coverage: float = 0.0
    bombs: List[str] = field(default_factory=list)
    bombs_triggered: List[str] = field(default_factory=list)
    confirmed: int = 0
    rejected: int = 0
    unknown: int = 0
    near_miss_retries: int = 0
    reconcile: Dict[str, int] = field(default_factory=dict)
    ghosts: List[Dict[str, Any]] = field(default_factory=list)
    tokens: Dict[str, int] = field(default_factory=lambda: {"input": 0, "output": 0})
    solver: Dict[str, Any] = field(default_factory=dict)
    tests: List[Dict[str, Any]] = field(default_factory=list)
    elapsed: float = 0.0
    timed_out: bool = False
    errors: List[str] = field(default_factory=list)

    def as_dict(self):
        d = asdict(self)
        d["covered"] = [f"{s}:{'T' if p else 'F'}" for s, p in self.covered]
        return d


def _jsonable(v):
    if isinstance(v, Fraction):
        return float(v)
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    return v


class _Run:
    """State of one program under one mode."""

    def __init__(self, name, program, mode, cfg: CampaignConfig, provider, solver):
        self.name = name
        self.program = program
        self.mode = mode
        self.cfg = cfg
        self.provider = provider
        self.solver = solver
        self.deadline = time.monotonic() + cfg.budget
        self.report = ProgramReport(name, mode)
        self.traces = []
        self.covered = set()
        self.own_procs = {p.name for p in program.procs}

    # -------------------------------------------------------------- helpers
    def expired(self):
        if time.monotonic() > self.deadline:
            self.report.timed_out = True
            return True
        return False

    def own_trace(self, st):
        return [(s, p) for s, p in st.trace if s.split("#", 1)[0] in self.own_procs]

    def news(self, st):
        """Does the state claim a branch outcome that is not yet covered?"""
        own = self.own_trace(st)
        return not own or any(t not in self.covered for t in own)

    def claim(self, st):
        own = self.own_trace(st)
        return own[-1] if own else None

    def record(self, result, inp):
        if result:
            self.report.confirmed += 1
            self.traces.append(result.trace)
            new = [t for t in dict.fromkeys(result.trace) if t not in self.covered]
            self.covered.update(result.trace)
            if new:
                self.report.tests.append({
                    "input": {"store": _jsonable(inp.store), "heap": _jsonable(inp.heap)},
                    "new": [f"{s}:{'T' if p else 'F'}" for s, p in new]})
        else:
            self.report.rejected += 1

    def replay(self, st, model):
        """Realize ``model`` on ``st``, replay, retry once on a float near miss."""
        try:
            inp = realize(st, model.complete(st.all_terms()), initial=True)
        except GhostsymError as exc:
            self.report.errors.append(f"realize: {exc}")
            return False
        target = self.claim(st)
        if target is None:
            return False
        res = confirm(self.program, inp, target)
        if not res:
            nm = near_miss(st, model, res.trace)
            if nm is not None:
                self.report.near_miss_retries += 1
                r = self.solver.check_sat(list(st.pc) + [tighten(nm)])
                if r.is_sat:
                    inp2 = realize(st, r.model.complete(st.all_terms()), initial=True)
                    res2 = confirm(self.program, inp2, target)
                    if res2:
                        self.record(res2, inp2)
                        return True
        self.record(res, inp)
        return bool(res)

    def solve(self, st):
        r = self.solver.check_sat(st.path_condition)
        if not r.is_sat:
            if not r.is_unsat:
                self.report.unknown += 1
            return False
        return self.replay(st, r.model)

    # -------------------------------------------------------------- modes
    def explore(self, program, config):
        ex = Executor(program, config, self.solver)
        try:
            states = ex.run()
        except GhostsymError as exc:
            self.report.errors.append(f"symex: {exc}")
            states = list(ex.terminals)
        if getattr(ex, "timed_out", False):
            self.report.timed_out = True
        self.report.paths += len(states)
        return states

    def run_baseline(self, lazy):
        config = SymexConfig(unroll=self.cfg.unroll, heap_mode="lazy" if lazy else "plain",
                             lazy_bound=self.cfg.lazy_bound, deadline=self.deadline)
        for st in self.explore(self.program, config):
            if self.expired():
                break
            if self.news(st):
                self.solve(st)

    def run_ghost(self):
        plan = prepare_ghost(self.program, self.provider, seed=self.cfg.seed)
        self.report.ghosts = plan.entries
        self.report.errors += plan.errors
        self.report.tokens["input"] += plan.tokens["input"]
        self.report.tokens["output"] += plan.tokens["output"]
        config = plan.symex_config(unroll=self.cfg.unroll, deadline=self.deadline)
        work, inverses = plan.program, plan.inverses
        for i, st in enumerate(self.explore(work, config)):
            if self.expired():
                break
            if not self.news(st):
                continue
            labels = [r.label for r in st.cutlog if r.label in inverses]
            if not labels:
                self.solve(st)
            elif len(set(labels)) == 1:
                self.bidirectional(st, labels[0], *inverses[labels[0]], index=i)
            else:
                self.report.errors.append("path crosses several inverse cuts")

    def bidirectional(self, st, label, info, art, index=0):
        try:
            pre, suf = decompose(st, label)
            cut = cut_record(st, label)
        except GhostsymError as exc:
            self._count(type(exc).__name__)
            return
        rng = random.Random(f"{self.cfg.seed}:{self.name}:{label}:{index}")
        starts = [None] + [_random_suffix(cut, rng) for _ in range(self.cfg.restarts)]
        for init in starts:
            if self.expired():
                return
            res = reconcile(pre, suf, info, art, ReconcileConfig(), cut=cut,
                            initial_suffix=init, solver=self.solver)
            self._count(res.status.value if res else f"{res.status.value}:{res.reason}")
            if not res:
                if res.status.value == "unsat" and res.reason not in ("no progress",
                                                                       "inverse yields nothing"):
                    break
                continue
            if self.replay(st, res.model):
                return

    def _count(self, key):
        self.report.reconcile[key] = self.report.reconcile.get(key, 0) + 1

    def finish(self, started, stats_before):
        cov = report_coverage(self.traces, self.program)
        r = self.report
        r.static_branches = cov["static_branches"]
        r.covered = [tuple(t) for t in cov["covered"]]
        r.branch_coverage = cov["branch_coverage"]
        r.bombs = cov["bombs"]
        r.bombs_triggered = cov["bombs_triggered"]
        r.elapsed = round(time.monotonic() - started, 3)
        after = self.solver.stats.as_dict()
        r.solver = {k: (round(after[k] - stats_before.get(k, 0), 3)
                        if isinstance(after[k], float) else after[k] - stats_before.get(k, 0))
                    for k in after}
        return r


@dataclass
class GhostPlan:
    """A program with every available ghost applied, ready for symex.

    Surrogates and topologies are inlined; inverse fragments are havocked and
    listed in ``inverses`` (label -> (FragmentInfo, GhostArtifact)) for
    reconciliation.
    """
    program: A.Program
    ghost_procs: frozenset = frozenset()
    cut_reads: Dict[str, Tuple[str, ...]] = field(default_factory=dict)
    inverses: Dict[str, Any] = field(default_factory=dict)
    entries: List[Dict[str, Any]] = field(default_factory=list)
    tokens: Dict[str, int] = field(default_factory=lambda: {"input": 0, "output": 0})
    errors: List[str] = field(default_factory=list)

    def symex_config(self, **kw) -> SymexConfig:
        return SymexConfig(ghost_procs=self.ghost_procs, cut_reads=dict(self.cut_reads), **kw)


def _add_tokens(tokens, prov):
    tokens["input"] += int(prov.get("input_tokens", 0) or 0)
    tokens["output"] += int(prov.get("output_tokens", 0) or 0)


def prepare_ghost(program: A.Program, provider, *, seed: int = 0,
                  validate_samples: int = 1000) -> GhostPlan:
    """Identify hard fragments, request ghosts and apply them to ``program``."""
    try:
        cands = identify_hard_fragments(program, provider)
    except GhostsymError as exc:
        cands = []
        errors = [f"identify: {exc}"]
    else:
        errors = []
    host = materialize(program, cands)
    plan = GhostPlan(host, errors=errors)
    work, ghost_procs = host, set()
    for fl, kind in cands:
        entry = {"label": fl.label, "kind": kind, "status": "unavailable"}
        plan.entries.append(entry)
        if provider is None:
            continue
        try:
            art = request_ghost(fragment_info(host, fl.label, kind), kind, provider)
        except GhostsymError as exc:
            entry["error"] = str(exc)
            _add_tokens(plan.tokens, vars(exc))
            continue
        _add_tokens(plan.tokens, art.provenance)
        entry.update(kind=art.kind, status="loaded", attempts=art.provenance.get("attempts"))
        info = fragment_info(host, fl.label, art.kind)
        try:
            if art.kind == SURROGATE:
                work = _apply_surrogate(work, info, art)
                ghost_procs.add(art.entry)
            elif art.kind == TOPOLOGY:
                spec = spec_from_artifact(art, host)
                work = inject(work, fl.label, spec)
                ghost_procs |= spec.ghost_procs
                entry["cases"] = list(spec.cases)
            else:
                # a failed validation demotes the inverse to a heuristic; replay
                # still decides every result
                rep = validate_inverse(info, art, validate_samples, seed=seed)
                entry["validation"] = rep.as_dict()
                stmts, _ = havoc_of(info.footprint)
                work = replace_fragment(work, fl.label, stmts)
                plan.cut_reads[fl.label] = info.footprint.rd_vars
                plan.inverses[fl.label] = (info, art)
            entry["status"] = "applied"
        except GhostsymError as exc:
            entry["status"] = "rejected"
            entry["error"] = str(exc)
    plan.program = work
    plan.ghost_procs = frozenset(ghost_procs)
    return plan


def _random_suffix(cut, rng):
    out = {}
    for var, sym in cut.writes:
        if sym.sort == REAL:
            out[var] = rng.uniform(-1.0, 1.0)
        elif sym.sort == BV32:
            out[var] = rng.randint(-100, 100)
    return out or None


def _apply_surrogate(program, info, art):
    fp = info.footprint
    wr = set(fp.wr_vars)
    names = [v for v in fp.rd_vars if v not in wr] + list(fp.wr_vars)
    call = A.ExprStmt(A.Call(art.entry, tuple(A.Var(v) for v in names)))
    decls = [A.Decl(fp.types[v], v) for v in fp.wr_vars if v in fp.declared]
    out = replace_fragment(program, info.label, tuple(decls) + (call,))
    out = merge_structs(out, art.program.structs)
    own = {p.name for p in program.procs}
    return add_procs(out, [p for p in art.program.procs if p.name not in own])


# ------------------------------------------------------------------ entry points

def _load(name_or_path):
    p = Path(name_or_path)
    if p.suffix == ".minic" and p.is_file():
        return p.stem, parse_program(p.read_text(encoding="utf-8"))
    prog = corpus_program(str(name_or_path))
    return prog.name, prog.program


def make_provider(cfg: CampaignConfig):
    if cfg.provider == "none":
        return None
    if cfg.provider == "fixture":
        return provider_from_config("fixture", directory=cfg.fixture_dir)
    return provider_from_config("http", model=cfg.model or "default")


def run_program(program, mode: str, cfg: Optional[CampaignConfig] = None, *, name=None,
                provider=None, solver=None) -> ProgramReport:
    """Run one program (a Program, corpus name or path) in one mode."""
    cfg = cfg or CampaignConfig()
    if isinstance(program, A.Program):
        name = name or "program"
    else:
        name, program = _load(program)
    if provider is None and mode == "ghost":
        provider = make_provider(cfg)
    solver = solver or get_solver()
    started = time.monotonic()
    before = solver.stats.as_dict()
    run = _Run(name, program, mode, cfg, provider, solver)
    # a private name counter keeps solver scripts, and so models, reproducible
    with naming_scope(re.sub(r"\W", "_", f"{name}_{mode}_")):
        try:
            if mode == "ghost":
                run.run_ghost()
            else:
                run.run_baseline(lazy=(mode == "baseline-lazy"))
        except GhostsymError as exc:
            run.report.errors.append(f"{type(exc).__name__}: {exc}")
    return run.finish(started, before)


@dataclass
class Report:
    config: Dict[str, Any]
    programs: List[ProgramReport] = field(default_factory=list)

    def by_mode(self, mode):
        return [p for p in self.programs if p.mode == mode]

    def totals(self):
        out = {}
        for p in self.programs:
            t = out.setdefault(p.mode, {"programs": 0, "bombs": 0, "bombs_triggered": 0,
                                        "static_branches": 0, "covered": 0, "confirmed": 0,
                                        "rejected": 0, "elapsed": 0.0,
                                        "tokens": 0})
            t["programs"] += 1
            t["bombs"] += len(p.bombs)
            t["bombs_triggered"] += len(p.bombs_triggered)
            t["static_branches"] += p.static_branches
            t["covered"] += len(p.covered)
            t["confirmed"] += p.confirmed
            t["rejected"] += p.rejected
            t["elapsed"] = round(t["elapsed"] + p.elapsed, 3)
            t["tokens"] += p.tokens["input"] + p.tokens["output"]
        for t in out.values():
            t["branch_coverage"] = t["covered"] / t["static_branches"] if t["static_branches"] else 0.0
        return out

    def as_dict(self):
        return {"config": self.config, "totals": self.totals(),
                "programs": [p.as_dict() for p in self.programs]}

    def write(self, path):
        Path(path).write_text(json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n",
                              encoding="utf-8")

    def table(self) -> str:
        modes = []
        for p in self.programs:
            if p.mode not in modes:
                modes.append(p.mode)
        names = []
        for p in self.programs:
            if p.name not in names:
                names.append(p.name)
        cell = {(p.name, p.mode): p for p in self.programs}
        header = ["program"] + [f"{m} bombs/cov" for m in modes]
        rows = [header]
        for n in names:
            row = [n]
            for m in modes:
                p = cell.get((n, m))
                row.append("-" if p is None else
                           f"{len(p.bombs_triggered)}/{len(p.bombs)} {100 * p.branch_coverage:5.1f}%"
                           + (" T/O" if p.timed_out else ""))
            rows.append(row)
        totals = self.totals()
        rows.append(["total"] + [f"{totals[m]['bombs_triggered']}/{totals[m]['bombs']} "
                                 f"{100 * totals[m]['branch_coverage']:5.1f}%" for m in modes])
        widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
        lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]
        lines.insert(1, "  ".join("-" * w for w in widths))
        return "\n".join(lines)


def _job(args):
    target, mode, cfg = args
    solver = Solver(cfg.smt_cmd.split() if cfg.smt_cmd else None)
    set_solver(solver)
    try:
        return run_program(target, mode, cfg, provider=make_provider(cfg), solver=solver)
    finally:
        solver.close()
        set_solver(None)


def run_campaign(config) -> Report:
    """Run every configured program in every configured mode."""
    cfg = config if isinstance(config, CampaignConfig) else CampaignConfig(**config)
    programs = []
    for p in cfg.programs:
        programs.extend(corpus_names() if p == "corpus" else [p])
    for p in programs:
        if not (p.endswith(".minic") and Path(p).is_file()) \
                and not (CORPUS_DIR / "programs" / f"{p}.minic").is_file():
            raise ConfigError(f"unknown program {p!r}")
    jobs = [(p, m, cfg) for p in programs for m in cfg.modes]
    if cfg.workers > 1 and len(jobs) > 1:
        with concurrent.futures.ThreadPoolExecutor(cfg.workers) as pool:
            results = list(pool.map(_job, jobs))
    else:
        results = [_job(j) for j in jobs]
    report = Report({k: v for k, v in asdict(cfg).items()}, results)
    if cfg.output:
        report.write(cfg.output)
    return report


__all__ = ["ProgramReport", "Report", "GhostPlan", "prepare_ghost", "branch_sites", "report_coverage", "run_program",
           "run_campaign", "make_provider"]
