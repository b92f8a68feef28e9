"""Bidirectional constraint propagation across a havocked fragment.

``reconcile`` looks for one model of ``pre /\\ suf`` where ``pre`` constrains
the state before the fragment and ``suf`` constrains the havoc symbols that
stand for the fragment's outputs.  It alternates between the two sides:

  1. solve ``suf`` for proposed outputs;
  2. run the inverse on them to get proposed inputs;
  3. find the model of ``pre`` closest to those inputs;
  4. run the real fragment forward on that model;
  5. find the model of ``suf`` closest to the forward outputs;
  6. stop when the merged model satisfies both sides and the fragment
     really maps its inputs to its outputs.

Closeness is an l1 distance for a single interface variable and a maximum
number of kept equalities otherwise.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional

from .errors import GhostRuntimeFault, RuntimeFault, StepBudgetExceeded
from .ghost.artifact import GhostArtifact, run_fragment
from .ghost.artifact import run_inverse as _run_inverse
from .ghost.prompts import INVERSE, FragmentInfo, fragment_info
from .solver import SAT, UNKNOWN, UNSAT, Status, get_solver
from .symcore import (BOOL, BV32, REAL, Assignment, CutRecord, Lit, Sym, evaluate,
                      free_symbols, fresh_symbol, holds, lit, mk_and, mk_eq, mk_not)

log = logging.getLogger(__name__)


@dataclass
class ReconcileConfig:
    max_iters: int = 16
    progress_epsilon: float = 1e-9
    distance: str = "auto"        # auto | l1-single | soft-multi
    resample: int = 8             # fresh suffix models tried when the inverse yields nothing

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if not self.progress_epsilon > 0:
            raise ValueError("progress_epsilon must be positive")
        if self.distance not in ("auto", "l1-single", "soft-multi"):
            raise ValueError(f"unknown distance mode {self.distance!r}")


@dataclass
class ReconcileResult:
    status: Status
    model: Optional[Assignment] = None
    iterations: int = 0
    reason: str = ""
    history: List[Dict[str, Any]] = field(default_factory=list)

    def __bool__(self):
        return self.status is SAT


def _value(v, sort):
    if sort == REAL:
        return Fraction(v) if not isinstance(v, float) or math.isfinite(v) else v
    if sort == BOOL:
        return bool(v)
    return int(v)


def _same(a, b, sort):
    if sort == REAL:
        a, b = float(a), float(b)
        return abs(a - b) <= 1e-9 * max(1.0, abs(a), abs(b))
    return a == b


def run_inverse(f_inv: GhostArtifact, post_values, rd_vars=None):
    """Candidate pre-states (dicts over the fragment's read variables)."""
    return _run_inverse(f_inv, post_values, rd_vars)


def run_forward(f, pre_values):
    """Run the original fragment ``f`` (FragmentInfo or (program, label))."""
    info = f if isinstance(f, FragmentInfo) else fragment_info(*f, INVERSE)
    return run_fragment(info.program, info.label, pre_values, info.footprint.types)


class _Reconciler:
    def __init__(self, pre, suf, info: FragmentInfo, f_inv, cfg, cut, solver):
        self.cfg = cfg
        self.info = info
        self.f_inv = f_inv
        self.solver = solver
        fp = info.footprint
        self.rd_vars = fp.rd_vars
        self.wr_vars = fp.wr_vars
        # write side: the havoc symbol standing for each written variable
        writes = dict(cut.writes) if cut is not None else {}
        self.wr_syms = {}
        for v in self.wr_vars:
            if v in writes:
                self.wr_syms[v] = writes[v]
        # read side: a symbol per read variable; non-symbol terms get a name
        reads = dict(cut.reads) if cut is not None else {}
        self.rd_terms, extra = {}, []
        for v in self.rd_vars:
            t = reads.get(v)
            if t is None:
                continue
            if isinstance(t, Sym):
                self.rd_terms[v] = t
            else:
                iota = fresh_symbol(t.sort, f"iota_{v}")
                extra.append(mk_eq(iota, t))
                self.rd_terms[v] = iota
        self.read_exprs = {v: reads[v] for v in self.rd_terms}
        self.pre = mk_and(pre, *extra)
        self.suf = suf
        self.both = mk_and(self.pre, self.suf)

    # -------------------------------------------------------- distance queries
    def _closest(self, phi, targets: Dict[Sym, Any]):
        targets = {x: v for x, v in targets.items() if v is not None}
        mode = self.cfg.distance
        if mode == "auto":
            mode = "l1-single" if len(targets) == 1 else "soft-multi"
        if not targets:
            r = self.solver.check_sat(phi)
            return r.model if r.is_sat else None
        if mode == "l1-single" and len(targets) == 1:
            (x, v), = targets.items()
            if x.sort in (BV32, REAL) and not (isinstance(v, float) and not math.isfinite(v)):
                opt = self.solver.min_l1(x, v, phi)
                return None if opt is None else opt.model
        xs = list(targets)
        opt = self.solver.max_soft_equalities(xs, [targets[x] for x in xs], phi)
        return None if opt is None else opt.model

    # -------------------------------------------------------- main loop
    def initial(self, initial_suffix):
        r = self.solver.check_sat(self.suf, list(self.wr_syms.values()))
        if initial_suffix:
            base = dict(r.model) if r.is_sat else {}
            for k, v in initial_suffix.items():
                name = k.name if isinstance(k, Sym) else self.wr_syms.get(k, Sym(k, REAL)).name
                base[name] = v
            return Assignment(base), None
        if r.status is UNSAT:
            return None, "suffix is unsatisfiable"
        if r.status is UNKNOWN:
            return None, f"suffix undecided: {r.reason}"
        return r.model, None

    def post_of(self, A_suf):
        post = {}
        for v, sym in self.wr_syms.items():
            val = A_suf.get(sym.name)
            if val is None:
                val = 0
            post[v] = float(val) if sym.sort == REAL else val
        return post

    def run(self, initial_suffix=None) -> ReconcileResult:
        A_suf, why = self.initial(initial_suffix)
        if A_suf is None:
            return ReconcileResult(UNSAT, reason=why)
        history = []
        still = 0
        prev = None
        blocked = []
        for it in range(1, self.cfg.max_iters + 1):
            post = self.post_of(A_suf)
            try:
                cands = _run_inverse(self.f_inv, post, self.rd_vars)
            except GhostRuntimeFault as exc:
                return ReconcileResult(UNSAT, iterations=it, reason=f"inverse crashed: {exc}",
                                       history=history)
            if not cands:
                # no pre-image for these outputs: ask the suffix for different ones
                blocked.append(mk_not(mk_and(*[mk_eq(s, lit(_value(A_suf[s.name], s.sort), s.sort))
                                               for s in self.wr_syms.values()
                                               if s.name in A_suf])))
                history.append({"iteration": it, "post": post, "candidates": []})
                if len(blocked) > self.cfg.resample:
                    return ReconcileResult(UNSAT, iterations=it, reason="inverse has no candidates",
                                           history=history)
                r = self.solver.check_sat(mk_and(self.suf, *blocked), list(self.wr_syms.values()))
                if not r.is_sat:
                    return ReconcileResult(UNSAT, iterations=it,
                                           reason="no suffix model with a pre-image", history=history)
                A_suf = r.model
                continue
            next_suf = None
            proposal = None
            for cand in cands:
                step = self.try_candidate(cand)
                history.append(dict(step, iteration=it))
                if step.get("model") is not None:
                    return ReconcileResult(SAT, step["model"], it, "", history)
                if next_suf is None and step.get("A_suf") is not None:
                    next_suf = step["A_suf"]
                    proposal = step.get("proposal")
            if next_suf is None:
                return ReconcileResult(UNSAT, iterations=it, reason="no candidate fits the prefix",
                                       history=history)
            if prev is not None and self.distance(prev, proposal) < self.cfg.progress_epsilon:
                still += 1
                if still >= 2:
                    return ReconcileResult(UNSAT, iterations=it, reason="no progress",
                                           history=history)
            else:
                still = 0
            prev = proposal
            A_suf = next_suf
        return ReconcileResult(UNSAT, iterations=self.cfg.max_iters,
                               reason="iteration limit", history=history)

    def try_candidate(self, cand):
        step = {"candidate": dict(cand)}
        targets = {}
        for v, sym in self.rd_terms.items():
            if v in cand:
                targets[sym] = _value(cand[v], sym.sort)
        A_pre = self._closest(self.pre, targets)
        if A_pre is None:
            step["reason"] = "prefix unsatisfiable"
            return step
        A_pre = Assignment(A_pre)
        rho = {}
        for v, t in self.read_exprs.items():
            rho[v] = evaluate(t, A_pre, default=True)
        try:
            out = run_forward(self.info, {v: _py(x) for v, x in rho.items()})
        except (RuntimeFault, StepBudgetExceeded) as exc:
            step["reason"] = f"fragment faulted: {exc}"
            return step
        step["pre"] = {v: _py(x) for v, x in rho.items()}
        step["out"] = {v: out[v] for v in self.wr_vars}
        # suffix targets: forward outputs for havoc symbols, A_pre for the rest
        suf_syms = free_symbols(self.suf)
        targets = {}
        for v, sym in self.wr_syms.items():
            val = out[v]
            if isinstance(val, float) and not math.isfinite(val):
                continue
            targets[sym] = _value(val, sym.sort)
        for name, sym in sorted(suf_syms.items()):
            if sym not in targets and name in A_pre:
                targets[sym] = A_pre[name]
        A_suf = self._closest(self.suf, targets)
        if A_suf is None:
            step["reason"] = "suffix unsatisfiable"
            return step
        merged = dict(A_pre)
        merged.update(A_suf)
        for name, val in A_pre.items():
            if name not in suf_syms:
                merged[name] = val
        merged = Assignment(merged)
        step["A_suf"] = Assignment(A_suf)
        step["proposal"] = {**{s.name: A_pre.get(s.name) for s in self.rd_terms.values()},
                            **{s.name: A_suf.get(s.name) for s in self.wr_syms.values()}}
        if holds(self.both, merged.complete([self.both])) and self.consistent(merged):
            step["model"] = merged.complete([self.both])
        else:
            step["reason"] = "not a fixpoint"
        return step

    def consistent(self, A):
        """The fragment maps A's read values to A's havoc values."""
        rho = {v: _py(evaluate(t, A, default=True)) for v, t in self.read_exprs.items()}
        try:
            out = run_forward(self.info, rho)
        except (RuntimeFault, StepBudgetExceeded):
            return False
        for v, sym in self.wr_syms.items():
            if sym.name not in A or not _same(out[v], A[sym.name], sym.sort):
                return False
        return True

    def distance(self, a, b):
        total = 0.0
        for name in set(a) | set(b):
            x, y = a.get(name), b.get(name)
            if x is None or y is None:
                total += 1
            elif isinstance(x, (Fraction, float)) or isinstance(y, (Fraction, float)):
                total += abs(float(x) - float(y))
            else:
                total += 0 if x == y else 1
        return total


def _py(v):
    return float(v) if isinstance(v, Fraction) else v


def reconcile(pre, suf, f, f_inv: GhostArtifact, cfg: Optional[ReconcileConfig] = None, *,
              cut: Optional[CutRecord] = None, initial_suffix=None, solver=None) -> ReconcileResult:
    """Find a model of ``pre /\\ suf`` consistent with fragment ``f``.

    ``cut`` names the havoc symbol of each written variable and the pre-state
    term of each read variable; without it, havoc symbols are matched by
    variable name among the free symbols of ``suf``.  ``initial_suffix``
    replaces the first suffix model (keys are variables or symbol names).
    """
    cfg = cfg or ReconcileConfig()
    info = f if isinstance(f, FragmentInfo) else fragment_info(*f, INVERSE)
    if cut is None:
        cut = _guess_cut(pre, suf, info)
    r = _Reconciler(pre, suf, info, f_inv, cfg, cut, solver or get_solver())
    return r.run(initial_suffix)


def _guess_cut(pre, suf, info):
    pre_syms = free_symbols(pre)
    suf_syms = free_symbols(suf)
    writes, reads = [], []
    for v in info.footprint.wr_vars:
        for name, sym in suf_syms.items():
            if name not in pre_syms and (name == v or name.startswith(f"beta_{v}_")):
                writes.append((v, sym))
                break
    for v in info.footprint.rd_vars:
        for name, sym in {**suf_syms, **pre_syms}.items():
            if name == v or name.rsplit("_", 1)[0] == v:
                reads.append((v, sym))
                break
    return CutRecord(info.label, tuple(writes), tuple(reads), 0)


__all__ = ["ReconcileConfig", "ReconcileResult", "reconcile", "run_inverse", "run_forward"]
