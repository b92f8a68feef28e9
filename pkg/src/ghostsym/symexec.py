"""Forward symbolic execution of MiniC with feasibility pruning.

The executor is a small-step machine.  Each live state owns a stack of
frames; each frame owns a continuation (a persistent linked list of pending
statements and loop markers).  States are explored breadth-first: a state
runs until it forks or finishes, and its successors go to the back of the
queue.

Branch conditions become path-condition conjuncts.  A cached model per state
answers most feasibility checks locally (the model already satisfies one side
of a fork); the solver is asked only when that fails.  UNKNOWN counts as
feasible so that solver-hostile paths survive.

Heap model: cells are keyed by address terms (literals for ``malloc``, fresh
symbols for ``fresh(...)`` and lazily materialized input cells).  Symbolic
keys are kept pairwise distinct and non-null, so a dereference through a key
needs no case split.  A pointer term that is not a key is resolved by
splitting over null, every existing key and, in ``lazy`` mode, a newly
materialized cell.  In ``plain`` mode an address matching no object is a
memory fault, as in allocation-based engines.
"""

from __future__ import annotations

import collections
import logging
import time
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Optional, Tuple

from .errors import (CutNotOnPath, MultipleCutOccurrences, PathBudgetExceeded,
                     SortError, UnknownLabel)
from .minilang import ast as A
from .minilang.parser import INTRINSICS
from .solver import UNSAT, get_solver
from .symcore import (ADDR, BOOL, BV32, NULL, REAL, TRUE, App, CutRecord, Lit, Sym,
                      SymbolicState, addr, boolean, bv, conj, evaluate, fresh_symbol,
                      is_hostile, mk_and, mk_arith, mk_bnot, mk_eq, mk_fn, mk_int2real,
                      mk_ite, mk_le, mk_lt, mk_neg, mk_not, mk_or, mk_real2int, real)

log = logging.getLogger(__name__)

DEFAULT_UNROLL = 8
DEFAULT_MAX_LIVE = 4096
DEFAULT_LAZY_BOUND = 8
DEFAULT_PATH_STEPS = 10 ** 6

SORT_OF = {"int": BV32, "float": REAL, "bool": BOOL, "ptr": ADDR}


def sort_of_type(ty: A.Type) -> str:
    return SORT_OF[ty.kind]


def default_term(ty: A.Type):
    return {"int": bv(0), "float": real(0), "bool": boolean(False), "ptr": NULL}[ty.kind]


@dataclass
class SymexConfig:
    unroll: int = DEFAULT_UNROLL
    max_live: int = DEFAULT_MAX_LIVE
    heap_mode: str = "plain"          # plain | lazy
    lazy_bound: int = DEFAULT_LAZY_BOUND
    path_steps: int = DEFAULT_PATH_STEPS
    deadline: Optional[float] = None  # time.monotonic() value
    ghost_procs: frozenset = frozenset()
    cut_reads: Dict[str, Tuple[str, ...]] = field(default_factory=dict)
    max_terminals: Optional[int] = None


# ------------------------------------------------------------------ machine data

class Kont:
    """Persistent singly linked list of pending work items."""
    __slots__ = ("head", "tail")

    def __init__(self, head, tail):
        self.head = head
        self.tail = tail


def push_block(kont, stmts):
    for s in reversed(stmts):
        kont = Kont(("stmt", s), kont)
    return kont


@dataclass
class Frame:
    proc: str
    store: Dict[str, Any]
    kont: Optional[Kont]
    ret_to: tuple = ("discard",)
    ref_out: Tuple[Tuple[str, str], ...] = ()
    ghost: bool = False
    types: Dict[str, A.Type] = field(default_factory=dict)


@dataclass
class ExecState(SymbolicState):
    frames: Tuple[Frame, ...] = ()
    next_addr: int = 1
    model: Optional[dict] = None      # satisfies pc when not None
    lazy_cells: int = 0
    steps: int = 0
    selectors: Tuple[Tuple[str, int], ...] = ()

    def fork(self) -> "ExecState":
        frames = []
        for i, fr in enumerate(self.frames):
            frames.append(replace(fr, store=dict(fr.store), types=fr.types))
        new = replace(self, frames=tuple(frames),
                      heap={k: dict(c) for k, c in self.heap.items()},
                      input_heap={k: dict(c) for k, c in self.input_heap.items()})
        new.store = new.frames[0].store if new.frames else dict(self.store)
        return new

    @property
    def top(self) -> Frame:
        return self.frames[-1]

    def finish(self, status, fault=None, ret=None):
        self.status = status
        self.fault = fault
        self.ret = ret
        if self.frames:
            self.store = self.frames[0].store
        self.frames = ()


class _Done(Exception):
    pass


# ------------------------------------------------------------------ normalization

class _CallHoister:
    """Moves procedure calls out of compound expressions into temporaries so
    the machine only meets calls at statement level."""

    def __init__(self, program):
        self.program = program
        self.n = 0

    def run(self):
        procs = []
        for p in self.program.procs:
            procs.append(replace(p, body=self.block(p.body)))
        return replace(self.program, procs=tuple(procs))

    def block(self, stmts):
        out = []
        for s in stmts:
            out.extend(self.stmt(s))
        return tuple(out)

    def stmt(self, s):
        if isinstance(s, A.If):
            pre, cond = self.hoist(s.cond, top=False)
            return pre + [replace(s, cond=cond, then=self.block(s.then), other=self.block(s.other))]
        if isinstance(s, A.While):
            if self.has_call(s.cond):
                raise SortError("procedure call inside a loop condition is not supported "
                                "by the symbolic executor; assign it first", *(s.pos or (None, None)))
            return [replace(s, body=self.block(s.body))]
        if isinstance(s, A.Fragment):
            return [replace(s, body=self.block(s.body))]
        if isinstance(s, A.Decl) and s.init is not None:
            pre, init = self.hoist(s.init, top=True)
            return pre + [replace(s, init=init)]
        if isinstance(s, A.Assign):
            pre_t, target = self.hoist(s.target, top=False)
            pre_v, value = self.hoist(s.value, top=True)
            return pre_t + pre_v + [replace(s, target=target, value=value)]
        if isinstance(s, A.Return) and s.value is not None:
            pre, value = self.hoist(s.value, top=True)
            return pre + [replace(s, value=value)]
        if isinstance(s, A.ExprStmt):
            pre, e = self.hoist(s.expr, top=True)
            return pre + [replace(s, expr=e)]
        if isinstance(s, (A.Assume, A.Assert)):
            pre, cond = self.hoist(s.cond, top=False)
            return pre + [replace(s, cond=cond)]
        if isinstance(s, A.Emit):
            pre, vals = [], []
            for v in s.values:
                p, v2 = self.hoist(v, top=False)
                pre += p
                vals.append(v2)
            return pre + [replace(s, values=tuple(vals))]
        return [s]

    def is_user_call(self, e):
        return isinstance(e, A.Call) and e.name not in INTRINSICS

    def has_call(self, e):
        return any(self.is_user_call(x) for x in A.walk_expr(e))

    def hoist(self, e, top):
        """Returns (prelude statements, rewritten expression)."""
        if not self.has_call(e):
            return [], e
        pre = []

        def go(x, guarded):
            if isinstance(x, A.Call):
                args = tuple(go(a, guarded) for a in x.args)
                x = replace(x, args=args)
                if x.name in INTRINSICS:
                    return x
                if guarded:
                    raise SortError("procedure call under a short-circuit or conditional "
                                    "operator is not supported by the symbolic executor",
                                    *(x.pos or (None, None)))
                if x is e_top[0]:
                    return x
                self.n += 1
                tmp = f"__call{self.n}"
                ret = self.program.proc(x.name).ret
                pre.append(A.Decl(ret, tmp, x, pos=x.pos))
                return A.Var(tmp, pos=x.pos)
            if isinstance(x, A.Binary):
                g = guarded or x.op in ("&&", "||")
                return replace(x, left=go(x.left, guarded), right=go(x.right, g))
            if isinstance(x, A.Unary):
                return replace(x, operand=go(x.operand, guarded))
            if isinstance(x, A.Cond):
                return replace(x, test=go(x.test, guarded), then=go(x.then, True),
                               other=go(x.other, True))
            if isinstance(x, A.Cast):
                return replace(x, operand=go(x.operand, guarded))
            if isinstance(x, A.FieldLoad):
                return replace(x, base=go(x.base, guarded))
            return x

        e_top = [e if (top and self.is_user_call(e)) else None]
        out = go(e, False)
        return pre, out


def normalize(program: A.Program) -> A.Program:
    return _CallHoister(program).run()


# ------------------------------------------------------------------ the executor

def _var_types(proc: A.Procedure):
    types = {p.name: p.type for p in proc.params}
    for s in A.walk_stmts(proc.body):
        if isinstance(s, A.Decl):
            types[s.name] = s.type
    return types


def _unsafe(e) -> bool:
    """True if evaluating ``e`` may fork or fault (loads, calls, int division)."""
    for x in A.walk_expr(e):
        if isinstance(x, (A.FieldLoad, A.Malloc, A.Fresh, A.Choose)):
            return True
        if isinstance(x, A.Call) and x.name not in INTRINSICS:
            return True
        if isinstance(x, A.Binary) and x.op in ("/", "%", "&&", "||"):
            return True
        if isinstance(x, A.Cond):
            return True
    return False


class Executor:
    def __init__(self, program: A.Program, config: Optional[SymexConfig] = None, solver=None):
        self.program = normalize(program)
        self.config = config or SymexConfig()
        self.solver = solver or get_solver()
        self.procs = {p.name: p for p in self.program.procs}
        self.structs = {s.name: s for s in self.program.structs}
        self.types = {p.name: _var_types(p) for p in self.program.procs}
        self.terminals = []
        self.stats = collections.Counter()

    # ------------------------------------------------------------ setup
    def initial_state(self, concrete=None, entry=None) -> ExecState:
        concrete = concrete or {}
        proc = self.procs[entry or self.program.entry]
        store, inputs = {}, {}
        for prm in proc.params:
            if prm.symbolic:
                t = fresh_symbol(sort_of_type(prm.type), prm.name)
            elif prm.name in concrete:
                from .symcore import lit
                t = lit(concrete[prm.name], sort_of_type(prm.type))
            else:
                t = default_term(prm.type)
            store[prm.name] = t
            inputs[prm.name] = t
        frame = Frame(proc.name, store, push_block(None, proc.body),
                      ghost=proc.name in self.config.ghost_procs, types=self.types[proc.name])
        st = ExecState(store=store, inputs=dict(inputs), frames=(frame,), model={})
        return st

    # ------------------------------------------------------------ exploration
    def run(self, init: Optional[ExecState] = None):
        """Explore breadth-first from ``init``; returns terminal states."""
        cfg = self.config
        init = init or self.initial_state()
        queue = collections.deque([init])
        self.timed_out = False
        while queue:
            if cfg.deadline is not None and time.monotonic() > cfg.deadline:
                self.timed_out = True
                break
            if cfg.max_terminals is not None and len(self.terminals) >= cfg.max_terminals:
                break
            st = queue.popleft()
            succ = self.advance(st)
            queue.extend(succ)
            if len(queue) > cfg.max_live:
                raise PathBudgetExceeded(f"more than {cfg.max_live} live states")
        return list(self.terminals)

    def advance(self, st: ExecState):
        """Run ``st`` until it forks or terminates; return live successors."""
        while True:
            if st.status != "live":
                self.terminals.append(st)
                return []
            st.steps += 1
            if st.steps > self.config.path_steps:
                st.finish("truncated", "step budget")
                self.stats["truncated"] += 1
                continue
            succ = self.step(st)
            live = []
            for s in succ:
                if s.status == "live":
                    live.append(s)
                elif s.status != "dead":
                    self.terminals.append(s)
            if len(succ) == 1 and live and live[0] is st:
                continue
            return live

    # ------------------------------------------------------------ feasibility
    def add_conjunct(self, st: ExecState, c, *, copy: bool):
        """Return ``st`` (or a copy) strengthened with ``c``; None if infeasible."""
        if isinstance(c, Lit):
            if not c.value:
                return None
            return st.fork() if copy else st
        model = st.model
        ok = None
        new_model = None
        if model is not None and not is_hostile(c):
            try:
                if evaluate(c, model, default=True):
                    ok, new_model = True, model
            except Exception:
                ok = None
        if ok is None:
            self.stats["solver"] += 1
            r = self.solver.check_sat(st.pc + (c,))
            if r.status is UNSAT:
                return None
            ok = True
            new_model = r.model if r.is_sat else None
        new = st.fork() if copy else st
        new.pc = st.pc + (c,)
        new.model = new_model
        return new

    def branch(self, st: ExecState, cond):
        """Split on ``cond``: returns list of (state, outcome)."""
        if isinstance(cond, Lit):
            return [(st, bool(cond.value))]
        out = []
        t = self.add_conjunct(st, cond, copy=True)
        if t is not None:
            out.append((t, True))
        f = self.add_conjunct(st, mk_not(cond), copy=True)
        if f is not None:
            out.append((f, False))
        return out

    # ------------------------------------------------------------ statements
    def step(self, st: ExecState):
        fr = st.top
        if fr.kont is None:
            return self.do_return(st, None)
        item = fr.kont.head
        fr.kont = fr.kont.tail
        kind = item[0]
        if kind == "stmt":
            return self.exec_stmt(st, item[1])
        if kind == "loop":
            return self.exec_loop(st, item[1], item[2])
        raise AssertionError(item)

    def record(self, st, sid, outcome):
        st.trace = st.trace + ((sid, outcome),)
        st.trace_pc = st.trace_pc + (len(st.pc),)

    def exec_stmt(self, st, s):
        t = type(s)
        if t is A.Decl:
            if s.init is None:
                st.top.store[s.name] = default_term(s.type)
                return [st]
            if isinstance(s.init, A.Call) and s.init.name not in INTRINSICS:
                return self.do_call(st, s.init, ("var", s.name))
            return [self.assign_var(x, s.name, v) for x, v in self.eval(st, s.init)]
        if t is A.Assign:
            if isinstance(s.value, A.Call) and s.value.name not in INTRINSICS:
                target = s.target.name if isinstance(s.target, A.Var) else s.target
                kind = "var" if isinstance(s.target, A.Var) else "field"
                return self.do_call(st, s.value, (kind, target))
            out = []
            for x, v in self.eval(st, s.value):
                out.extend(self.store_to(x, s.target, v))
            return out
        if t is A.If:
            out = []
            for x, c in self.eval(st, s.cond):
                for y, taken in self.branch(x, c):
                    self.record(y, s.sid, taken)
                    y.top.kont = push_block(y.top.kont, s.then if taken else s.other)
                    out.append(y)
            return out
        if t is A.While:
            return self.exec_loop(st, s, 0)
        if t is A.Return:
            if s.value is None:
                return self.do_return(st, None)
            if isinstance(s.value, A.Call) and s.value.name not in INTRINSICS:
                return self.do_call(st, s.value, ("return",))
            return [y for x, v in self.eval(st, s.value) for y in self.do_return(x, v)]
        if t is A.ExprStmt:
            if isinstance(s.expr, A.Call) and s.expr.name not in INTRINSICS:
                return self.do_call(st, s.expr, ("discard",))
            return [x for x, _ in self.eval(st, s.expr)]
        if t is A.Assume:
            out = []
            for x, c in self.eval(st, s.cond):
                y = self.add_conjunct(x, c, copy=False)
                if y is None:
                    x.status = "dead"
                    out.append(x)
                else:
                    out.append(y)
            return out
        if t is A.Assert:
            out = []
            for x, c in self.eval(st, s.cond):
                for y, ok in self.branch(x, c):
                    self.record(y, s.sid, ok)
                    if not ok:
                        y.finish("fault", f"assert {s.sid}")
                    out.append(y)
            return out
        if t is A.Bomb:
            self.record(st, s.sid, True)
            return [st]
        if t is A.Havoc:
            ty = st.top.types.get(s.name)
            sort = sort_of_type(ty) if ty is not None else st.top.store[s.name].sort
            sym = Sym(s.symbol, sort) if s.symbol else fresh_symbol(sort, s.name)
            st.top.store[s.name] = sym
            return [st]
        if t is A.Emit:
            out = []
            for x, vals in self.eval_many(st, s.values):
                x.emitted = x.emitted + (tuple(vals),)
                out.append(x)
            return out
        if t is A.Fragment:
            self.enter_fragment(st, s)
            st.top.kont = push_block(st.top.kont, s.body)
            return [st]
        raise AssertionError(s)

    def enter_fragment(self, st, frag):
        store = st.top.store
        writes = []
        for h in frag.body:
            if isinstance(h, A.Havoc) and h.symbol:
                ty = st.top.types.get(h.name)
                sort = sort_of_type(ty) if ty is not None else store[h.name].sort
                writes.append((h.name, Sym(h.symbol, sort)))
        reads = tuple((v, store[v]) for v in self.config.cut_reads.get(frag.label, ())
                      if v in store)
        st.cutlog = st.cutlog + (CutRecord(frag.label, tuple(writes), reads, len(st.pc)),)

    def exec_loop(self, st, loop, count):
        out = []
        for x, c in self.eval(st, loop.cond):
            for y, taken in self.branch(x, c):
                self.record(y, loop.sid, taken)
                if not taken:
                    out.append(y)
                    continue
                symbolic = not isinstance(c, Lit)
                if symbolic and count >= self.config.unroll:
                    y.finish("truncated", f"unroll bound at {loop.sid}")
                    self.stats["truncated"] += 1
                    out.append(y)
                    continue
                k = Kont(("loop", loop, count + 1 if symbolic else count), y.top.kont)
                y.top.kont = push_block(k, loop.body)
                out.append(y)
        return out

    # ------------------------------------------------------------ assignment
    def assign_var(self, st, name, value):
        st.top.store[name] = value
        return st

    def store_to(self, st, target, value):
        if isinstance(target, A.Var):
            return [self.assign_var(st, target.name, value)]
        out = []
        for x, p in self.eval(st, target.base):
            for y, key in self.resolve(x, p, target):
                y.heap[key][target.name] = value
                if y.top.ghost and key in y.input_heap:
                    y.input_heap[key][target.name] = value
                out.append(y)
        return out

    # ------------------------------------------------------------ calls
    def do_call(self, st, call, ret_to):
        proc = self.procs[call.name]
        out = []
        for x, args in self.eval_many(st, call.args):
            store = {prm.name: a for prm, a in zip(proc.params, args)}
            refs = tuple((prm.name, arg.name) for prm, arg in zip(proc.params, call.args)
                         if prm.ref)
            fr = Frame(proc.name, store, push_block(None, proc.body), ret_to, refs,
                       ghost=x.top.ghost or proc.name in self.config.ghost_procs,
                       types=self.types[proc.name])
            if len(x.frames) > 100:
                x.finish("fault", "call depth limit")
            else:
                x.frames = x.frames + (fr,)
            out.append(x)
        return out

    def do_return(self, st, value):
        fr = st.top
        if len(st.frames) == 1:
            st.finish("done", ret=value)
            return [st]
        st.frames = st.frames[:-1]
        caller = st.top
        for prm, var in fr.ref_out:
            caller.store[var] = fr.store[prm]
        kind = fr.ret_to[0]
        if kind == "var":
            caller.store[fr.ret_to[1]] = value
            return [st]
        if kind == "field":
            return self.store_to(st, fr.ret_to[1], value)
        if kind == "return":
            return self.do_return(st, value)
        return [st]

    # ------------------------------------------------------------ heap
    def resolve(self, st, p, node):
        """Split on which cell pointer term ``p`` denotes.

        Returns a list of (state, key); fault states are emitted directly."""
        if isinstance(p, Lit):
            if p.value == 0:
                self.fault(st, f"null dereference ->{node.name}")
                return []
            if p in st.heap:
                return [(st, p)]
            self.fault(st, f"dangling address {p.value}")
            return []
        if p in st.heap:
            return [(st, p)]
        out = []
        keys = list(st.heap.keys())
        null_case = self.add_conjunct(st, mk_eq(p, NULL), copy=True)
        if null_case is not None:
            self.fault(null_case, f"null dereference ->{node.name}")
        for k in keys:
            y = self.add_conjunct(st, mk_eq(p, k), copy=True)
            if y is not None:
                out.append((y, k))
        distinct = mk_and(mk_not(mk_eq(p, NULL)), *[mk_not(mk_eq(p, k)) for k in keys])
        if self.config.heap_mode == "lazy" and st.lazy_cells < self.config.lazy_bound:
            y = self.add_conjunct(st, distinct, copy=True)
            if y is not None:
                rec = self.pointee_record(y, node)
                key = p if isinstance(p, Sym) else fresh_symbol(ADDR, "obj")
                if key is not p:
                    y = self.add_conjunct(y, mk_eq(p, key), copy=False)
                cell = self.fresh_cell(rec)
                y.heap[key] = cell
                y.input_heap[key] = dict(cell)
                y.lazy_cells += 1
                out.append((y, key))
        else:
            y = self.add_conjunct(st, distinct, copy=True)
            if y is not None:
                self.fault(y, "pointer matches no allocated object")
        return out

    def pointee_record(self, st, node):
        for rec in self.structs.values():
            if rec.field_type(node.name) is not None:
                return rec
        raise KeyError(node.name)

    def fresh_cell(self, rec):
        cell = {}
        for ty, name in rec.fields:
            cell[name] = fresh_symbol(sort_of_type(ty), f"{rec.name}_{name}")
        return cell

    def fault(self, st, why):
        st.finish("fault", why)
        self.terminals.append(st)

    # ------------------------------------------------------------ expressions
    def eval_many(self, st, exprs):
        results = [(st, [])]
        for e in exprs:
            nxt = []
            for x, vals in results:
                for y, v in self.eval(x, e):
                    nxt.append((y, vals + [v]))
            results = nxt
        return results

    def eval(self, st, e):
        """All (state, term) outcomes of evaluating ``e`` in ``st``."""
        t = type(e)
        if t is A.IntLit:
            return [(st, bv(e.value))]
        if t is A.FloatLit:
            return [(st, real(e.value))]
        if t is A.BoolLit:
            return [(st, boolean(e.value))]
        if t is A.NullLit:
            return [(st, NULL)]
        if t is A.Var:
            return [(st, st.top.store[e.name])]
        if t is A.FieldLoad:
            out = []
            for x, p in self.eval(st, e.base):
                for y, key in self.resolve(x, p, e):
                    out.append((y, y.heap[key][e.name]))
            return out
        if t is A.Unary:
            out = []
            for x, v in self.eval(st, e.operand):
                if e.op == "!":
                    out.append((x, mk_not(v)))
                elif e.op == "-":
                    out.append((x, mk_neg(v)))
                else:
                    out.append((x, mk_bnot(v)))
            return out
        if t is A.Binary:
            return self.eval_binary(st, e)
        if t is A.Cond:
            if not (_unsafe(e.then) or _unsafe(e.other)):
                out = []
                for x, c in self.eval(st, e.test):
                    for y, vals in self.eval_many(x, (e.then, e.other)):
                        out.append((y, mk_ite(c, vals[0], vals[1])))
                return out
            out = []
            for x, c in self.eval(st, e.test):
                for y, taken in self.branch(x, c):
                    out.extend(self.eval(y, e.then if taken else e.other))
            return out
        if t is A.Call:
            if e.name in INTRINSICS:
                return [(x, mk_fn(e.name, v)) for x, v in self.eval(st, e.args[0])]
            raise AssertionError("user calls are hoisted before execution")
        if t is A.Cast:
            out = []
            for x, v in self.eval(st, e.operand):
                out.append((x, self.cast(v, e.to)))
            return out
        if t is A.Malloc:
            a = addr(st.next_addr)
            st.next_addr += 1
            rec = self.structs[e.record]
            st.heap[a] = {name: default_term(ty) for ty, name in rec.fields}
            return [(st, a)]
        if t is A.Fresh:
            return [self.fresh_node(st, e.record)]
        if t is A.Choose:
            out = []
            xi = fresh_symbol(BV32, "xi")
            for case in e.cases:
                y = self.add_conjunct(st, mk_eq(xi, bv(case)), copy=True)
                if y is not None:
                    y.selectors = y.selectors + ((xi.name, case),)
                    out.append((y, bv(case)))
            return out
        raise AssertionError(e)

    def fresh_node(self, st, record):
        """Allocate a pool node: fresh non-null address distinct from every
        existing cell, with every field a fresh symbol."""
        a = fresh_symbol(ADDR, "n")
        conds = [mk_not(mk_eq(a, NULL))] + [mk_not(mk_eq(a, k)) for k in st.heap]
        for c in conds:
            st.pc = st.pc + (c,)
        if st.model is not None:
            st.model = None
            r = self.solver.check_sat(st.pc)
            st.model = r.model if r.is_sat else None
        cell = self.fresh_cell(self.structs[record])
        st.heap[a] = cell
        st.input_heap[a] = dict(cell)
        return (st, a)

    @staticmethod
    def cast(v, to):
        if to.kind == "float":
            if v.sort == REAL:
                return v
            if v.sort == BOOL:
                return mk_ite(v, real(1), real(0))
            return mk_int2real(v)
        if to.kind == "int":
            if v.sort == BV32:
                return v
            if v.sort == BOOL:
                return mk_ite(v, bv(1), bv(0))
            return mk_real2int(v)
        return v

    def eval_binary(self, st, e):
        op = e.op
        if op in ("&&", "||"):
            if not _unsafe(e.right):
                out = []
                for x, vals in self.eval_many(st, (e.left, e.right)):
                    l, r = vals
                    out.append((x, mk_and(l, r) if op == "&&" else mk_or(l, r)))
                return out
            out = []
            for x, l in self.eval(st, e.left):
                for y, val in self.branch(x, l):
                    if val == (op == "||"):
                        out.append((y, boolean(val)))
                    else:
                        out.extend(self.eval(y, e.right))
            return out
        out = []
        for x, vals in self.eval_many(st, (e.left, e.right)):
            l, r = vals
            if op in ("/", "%") and l.sort == BV32:
                out.extend(self.int_division(x, op, l, r))
                continue
            out.append((x, self.binop(op, l, r)))
        return out

    def int_division(self, st, op, l, r):
        if isinstance(r, Lit):
            if r.value == 0:
                self.fault(st, "zero divisor")
                return []
            return [(st, mk_arith(op, l, r))]
        zero = self.add_conjunct(st, mk_eq(r, bv(0)), copy=True)
        if zero is not None:
            self.fault(zero, "zero divisor")
        y = self.add_conjunct(st, mk_not(mk_eq(r, bv(0))), copy=True)
        return [] if y is None else [(y, mk_arith(op, l, r))]

    @staticmethod
    def binop(op, l, r):
        if op == "==":
            return mk_eq(l, r)
        if op == "!=":
            return mk_not(mk_eq(l, r))
        if op == "<":
            return mk_lt(l, r)
        if op == "<=":
            return mk_le(l, r)
        if op == ">":
            return mk_lt(r, l)
        if op == ">=":
            return mk_le(r, l)
        return mk_arith(op, l, r)


# ------------------------------------------------------------------ public API

def symex(program: A.Program, init: Optional[ExecState] = None, config: Optional[SymexConfig] = None,
          solver=None):
    """All terminal states of ``program`` reachable under the configured bounds.

    States carry ``status`` ``done`` (normal return), ``fault`` (assert,
    null dereference, zero divisor) or ``truncated`` (unroll or step bound).
    """
    ex = Executor(program, config, solver)
    return ex.run(init)


def initial_state(program: A.Program, concrete=None, config=None) -> ExecState:
    return Executor(program, config).initial_state(concrete)


def feasible(pc, solver=None) -> bool:
    """SAT or UNKNOWN -> True; only a definite UNSAT prunes."""
    solver = solver or get_solver()
    if isinstance(pc, (tuple, list)):
        pc = conj(pc)
    return solver.check_sat(pc).status is not UNSAT


def decompose(state: SymbolicState, cut):
    """Split ``state.pc`` at the single pass through fragment ``cut``.

    Returns ``(pre, suf)``: the conjunction of the conjuncts recorded before
    the cut and of those recorded at or after it.
    """
    label = cut.label if isinstance(cut, A.FragmentLabel) else str(cut)
    records = [r for r in state.cutlog if r.label == label]
    if not records:
        raise CutNotOnPath(f"path never passes fragment @{label}")
    if len(records) > 1:
        raise MultipleCutOccurrences(
            f"fragment @{label} is executed {len(records)} times on this path")
    idx = records[0].pc_index
    return conj(state.pc[:idx]), conj(state.pc[idx:])


def cut_record(state: SymbolicState, label: str) -> CutRecord:
    records = [r for r in state.cutlog if r.label == label]
    if len(records) != 1:
        raise CutNotOnPath(f"fragment @{label} occurs {len(records)} times on this path")
    return records[0]


__all__ = ["SymexConfig", "Executor", "ExecState", "symex", "initial_state", "feasible",
           "decompose", "cut_record", "normalize", "sort_of_type", "UnknownLabel"]
