"""Deterministic concrete interpreter for MiniC.

``exec_program`` runs the entry procedure from a concrete state and returns
the final state together with the branch trace: one ``(site, outcome)`` pair
for every ``if``/``while`` test, every ``assert`` and every ``bomb()``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple

from ..errors import RuntimeFault, StepBudgetExceeded
from . import ast as A
from .values import (FLOAT_INTRINSICS, float_div, float_to_int, hi_bits, int_div,
                     int_rem, int_shl, int_shr, wrap32)

DEFAULT_STEP_BUDGET = 10 ** 6
MAX_CALL_DEPTH = 120


@dataclass
class ConcreteState:
    """Store, heap and step counter; plus what a run produced."""
    store: Dict[str, Any] = field(default_factory=dict)
    heap: Dict[int, Dict[str, Any]] = field(default_factory=dict)
    steps: int = 0
    next_addr: int = 1
    trace: Tuple[Tuple[str, bool], ...] = ()
    ret: Any = None
    emitted: Tuple[tuple, ...] = ()

    def copy(self):
        return replace(self, store=dict(self.store),
                       heap={a: dict(c) for a, c in self.heap.items()})


def default_value(ty: A.Type):
    return {"int": 0, "float": 0.0, "bool": False, "ptr": 0}.get(ty.kind)


class _Return(Exception):
    def __init__(self, value):
        self.value = value


class Interpreter:
    def __init__(self, program: A.Program, budget: int = DEFAULT_STEP_BUDGET,
                 havoc_values: Optional[Dict[str, Any]] = None):
        self.program = program
        self.budget = budget
        self.havoc_values = havoc_values or {}
        self.procs = {p.name: p for p in program.procs}
        self.structs = {s.name: s for s in program.structs}

    # ------------------------------------------------------------ driver
    def run(self, state: ConcreteState, entry: Optional[str] = None) -> ConcreteState:
        proc = self.procs[entry or self.program.entry]
        self.heap = {a: dict(c) for a, c in state.heap.items()}
        self.next_addr = max([state.next_addr] + [a + 1 for a in self.heap])
        self.steps = state.steps
        self.trace: List[Tuple[str, bool]] = list(state.trace)
        self.emitted: List[tuple] = list(state.emitted)
        self.depth = 0
        env = {}
        for prm in proc.params:
            if prm.name not in state.store:
                raise RuntimeFault("unbound", f"entry parameter {prm.name} has no value",
                                   proc.name)
            env[prm.name] = state.store[prm.name]
        for k, v in state.store.items():
            env.setdefault(k, v)
        try:
            ret = self.invoke(proc, env)
        except RuntimeFault as fault:
            fault.trace = tuple(self.trace)
            fault.emitted = tuple(self.emitted)
            raise
        except StepBudgetExceeded as exc:
            exc.trace = tuple(self.trace)
            raise
        return ConcreteState(env, self.heap, self.steps, self.next_addr,
                             tuple(self.trace), ret, tuple(self.emitted))

    def invoke(self, proc, env):
        self.depth += 1
        if self.depth > MAX_CALL_DEPTH:
            raise RuntimeFault("stack", "call depth limit exceeded", proc.name)
        try:
            self.block(proc.body, env)
            ret = None
        except _Return as r:
            ret = r.value
        finally:
            self.depth -= 1
        return ret

    def tick(self, where):
        self.steps += 1
        if self.steps > self.budget:
            raise StepBudgetExceeded(f"step budget {self.budget} exhausted at {where}")

    # ------------------------------------------------------------ statements
    def block(self, stmts, env):
        for s in stmts:
            self.stmt(s, env)

    def stmt(self, s, env):
        self.tick(getattr(s, "sid", None) or type(s).__name__)
        t = type(s)
        if t is A.Assign:
            value = self.expr(s.value, env)
            if isinstance(s.target, A.Var):
                env[s.target.name] = value
            else:
                addr = self.expr(s.target.base, env)
                self.cell(addr, s.target)[s.target.name] = value
        elif t is A.Decl:
            env[s.name] = default_value(s.type) if s.init is None else self.expr(s.init, env)
        elif t is A.If:
            taken = bool(self.expr(s.cond, env))
            self.trace.append((s.sid, taken))
            self.block(s.then if taken else s.other, env)
        elif t is A.While:
            while True:
                taken = bool(self.expr(s.cond, env))
                self.trace.append((s.sid, taken))
                if not taken:
                    break
                self.block(s.body, env)
                self.tick(s.sid)
        elif t is A.Return:
            raise _Return(None if s.value is None else self.expr(s.value, env))
        elif t is A.ExprStmt:
            self.expr(s.expr, env)
        elif t is A.Assume:
            if not self.expr(s.cond, env):
                raise RuntimeFault("assume", "assumption violated", self.where(s))
        elif t is A.Assert:
            ok = bool(self.expr(s.cond, env))
            self.trace.append((s.sid, ok))
            if not ok:
                raise RuntimeFault("assert", "assertion failed", s.sid)
        elif t is A.Bomb:
            self.trace.append((s.sid, True))
        elif t is A.Emit:
            self.emitted.append(tuple(self.expr(v, env) for v in s.values))
        elif t is A.Fragment:
            self.block(s.body, env)
        elif t is A.Havoc:
            if s.symbol not in self.havoc_values:
                raise RuntimeFault("havoc", f"no concrete value for {s.symbol}", self.where(s))
            env[s.name] = self.havoc_values[s.symbol]
        else:
            raise TypeError(s)

    @staticmethod
    def where(node):
        pos = getattr(node, "pos", None)
        return f"line {pos[0]}" if pos else None

    def cell(self, addr, node):
        if addr == 0:
            raise RuntimeFault("null", f"null dereference of ->{node.name}", self.where(node))
        c = self.heap.get(addr)
        if c is None:
            raise RuntimeFault("dangling", f"address {addr} is not allocated", self.where(node))
        return c

    # ------------------------------------------------------------ expressions
    def expr(self, e, env):
        t = type(e)
        if t is A.Var:
            return env[e.name]
        if t is A.IntLit or t is A.FloatLit or t is A.BoolLit:
            return e.value
        if t is A.Binary:
            return self.binary(e, env)
        if t is A.NullLit:
            return 0
        if t is A.FieldLoad:
            c = self.cell(self.expr(e.base, env), e)
            return c[e.name]
        if t is A.Unary:
            v = self.expr(e.operand, env)
            if e.op == "!":
                return not v
            if e.op == "~":
                return wrap32(~v)
            return wrap32(-v) if isinstance(v, int) else -v
        if t is A.Cond:
            return self.expr(e.then if self.expr(e.test, env) else e.other, env)
        if t is A.Call:
            return self.call(e, env)
        if t is A.Cast:
            v = self.expr(e.operand, env)
            if e.to.kind == "float":
                return float(v)
            if e.to.kind == "int":
                return float_to_int(v) if isinstance(v, float) else int(v)
            return v
        if t is A.Malloc:
            addr = self.next_addr
            self.next_addr += 1
            rec = self.structs[e.record]
            self.heap[addr] = {name: default_value(ty) for ty, name in rec.fields}
            return addr
        if t is A.Fresh or t is A.Choose:
            raise RuntimeFault("ghost", f"{t.__name__.lower()} is only meaningful symbolically",
                               self.where(e))
        raise TypeError(e)

    def binary(self, e, env):
        op = e.op
        if op == "&&":
            return bool(self.expr(e.left, env)) and bool(self.expr(e.right, env))
        if op == "||":
            return bool(self.expr(e.left, env)) or bool(self.expr(e.right, env))
        a = self.expr(e.left, env)
        b = self.expr(e.right, env)
        if op == "==":
            return a == b
        if op == "!=":
            return a != b
        if op == "<":
            return a < b
        if op == "<=":
            return a <= b
        if op == ">":
            return a > b
        if op == ">=":
            return a >= b
        if isinstance(a, float) or isinstance(b, float):
            if op == "+":
                return a + b
            if op == "-":
                return a - b
            if op == "*":
                return a * b
            if op == "/":
                return float_div(a, b)
            raise TypeError(op)
        if op == "+":
            return wrap32(a + b)
        if op == "-":
            return wrap32(a - b)
        if op == "*":
            return wrap32(a * b)
        if op in ("/", "%"):
            if b == 0:
                raise RuntimeFault("div0", f"zero divisor in '{op}'", self.where(e))
            return int_div(a, b) if op == "/" else int_rem(a, b)
        if op == "&":
            return wrap32(a & b)
        if op == "|":
            return wrap32(a | b)
        if op == "^":
            return wrap32(a ^ b)
        if op == "<<":
            return int_shl(a, b)
        if op == ">>":
            return int_shr(a, b)
        raise TypeError(op)

    def call(self, e, env):
        fn = FLOAT_INTRINSICS.get(e.name)
        if fn is not None:
            return fn(float(self.expr(e.args[0], env)))
        if e.name == "hi_bits":
            return hi_bits(self.expr(e.args[0], env))
        proc = self.procs[e.name]
        args = [self.expr(a, env) for a in e.args]
        callee_env = {prm.name: v for prm, v in zip(proc.params, args)}
        ret = self.invoke(proc, callee_env)
        for prm, a in zip(proc.params, e.args):
            if prm.ref:
                env[a.name] = callee_env[prm.name]
        return ret


def exec_program(program: A.Program, state: Optional[ConcreteState] = None, *,
                 entry: Optional[str] = None, budget: int = DEFAULT_STEP_BUDGET,
                 havoc_values=None) -> ConcreteState:
    """Run ``program`` (its entry procedure, or ``entry``) from ``state``."""
    state = state or ConcreteState()
    return Interpreter(program, budget, havoc_values).run(state, entry)


def run_stmts(program: A.Program, stmts, store, heap=None, *, budget=DEFAULT_STEP_BUDGET):
    """Execute a bare statement sequence (e.g. a fragment body) in ``store``.

    Procedures of ``program`` are callable from the statements.  Returns the
    resulting ConcreteState whose store holds the updated variables.
    """
    interp = Interpreter(program, budget)
    interp.heap = {a: dict(c) for a, c in (heap or {}).items()}
    interp.next_addr = max([1] + [a + 1 for a in interp.heap])
    interp.steps = 0
    interp.trace = []
    interp.emitted = []
    interp.depth = 0
    env = dict(store)
    try:
        interp.block(stmts, env)
    except _Return as r:
        return ConcreteState(env, interp.heap, interp.steps, interp.next_addr,
                             tuple(interp.trace), r.value, tuple(interp.emitted))
    return ConcreteState(env, interp.heap, interp.steps, interp.next_addr,
                         tuple(interp.trace), None, tuple(interp.emitted))
