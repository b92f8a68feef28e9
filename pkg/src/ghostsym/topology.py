"""Semantic heap partitioning with ghost topology builders.

A builder ``constrain_heap_<callee>(n0, ..., n{k-1}, ref p1, ..., int xi)``
links a pool of fresh nodes into a handful of shapes, one per selector case,
and hands the entry pointers back through its ``ref`` parameters.  ``inject``
places a call to it in front of a pointer-consuming call site and ties the
original pointer arguments to the builder's outputs with ``assume``.  Only
pointer fields are linked; data fields of the pool stay symbolic.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

from .errors import ContradictoryTopology, NotAPointerCall, SortError
from .minilang import ast as A
from .minilang.parser import INTRINSICS
from .minilang.transform import add_procs, fragment_body, merge_structs, replace_fragment
from .symcore import SymbolicState

log = logging.getLogger(__name__)

POOL_CAP = 16
_DRIVER = "__topology_driver"


@dataclass(frozen=True)
class TopologySpec:
    builder: str                          # ghost procedure name
    program: A.Program                    # builder plus host declarations
    record: str                           # record type of the node pool
    node_params: Tuple[str, ...]
    outputs: Tuple[str, ...]              # ref parameters, in signature order
    cases: Tuple[int, ...]                # selector values, in case order
    helpers: Tuple[str, ...] = field(default=())

    @property
    def pool(self) -> int:
        return len(self.node_params)

    @property
    def n_cases(self) -> int:
        return len(self.cases)

    @property
    def ghost_procs(self) -> frozenset:
        return frozenset((self.builder,) + self.helpers)


def _selector_cases(proc: A.Procedure, xi: str):
    cases = []
    for s in A.walk_stmts(proc.body):
        for e in A.stmt_exprs(s):
            for x in A.walk_expr(e):
                if isinstance(x, A.Binary) and x.op == "==":
                    sides = (x.left, x.right)
                    if any(isinstance(v, A.Var) and v.name == xi for v in sides):
                        for v in sides:
                            if isinstance(v, A.IntLit) and v.value not in cases:
                                cases.append(v.value)
    return tuple(cases) or (0,)


def spec_from_program(program: A.Program, builder: str, host: Optional[A.Program] = None) -> TopologySpec:
    """Read the pool, outputs and selector cases off a builder's signature and body."""
    proc = program.proc(builder)
    params = list(proc.params)
    if not params or params[-1].type.kind != "int":
        raise SortError(f"{builder} must end with an int selector parameter", None, None)
    xi = params[-1].name
    nodes = [p for p in params[:-1] if not p.ref and p.type.kind == "ptr"]
    outs = [p for p in params[:-1] if p.ref]
    if not nodes:
        raise SortError(f"{builder} takes no node parameters", None, None)
    if len(nodes) > POOL_CAP:
        raise SortError(f"{builder} asks for {len(nodes)} nodes, more than {POOL_CAP}", None, None)
    records = {p.type.record for p in nodes}
    if len(records) != 1:
        raise SortError(f"{builder} node parameters mix record types", None, None)
    host_names = {p.name for p in host.procs} if host is not None else set()
    helpers = tuple(p.name for p in program.procs
                    if p.name != builder and p.name not in host_names)
    return TopologySpec(builder, program, records.pop(), tuple(p.name for p in nodes),
                        tuple(p.name for p in outs), _selector_cases(proc, xi), helpers)


def spec_from_artifact(artifact, host: Optional[A.Program] = None) -> TopologySpec:
    return spec_from_program(artifact.program, artifact.entry, host)


def _site_call(stmts, program):
    for s in stmts:
        for e in A.stmt_exprs(s):
            for x in A.walk_expr(e):
                if isinstance(x, A.Call) and x.name not in INTRINSICS and program.has_proc(x.name):
                    return x
    return None


def _pointer_args(program, label, call):
    proc, _ = A.find_fragment(program, label)
    types = {p.name: p.type for p in proc.params}
    for s in A.walk_stmts(proc.body):
        if isinstance(s, A.Decl):
            types[s.name] = s.type
    return [a.name for a in call.args
            if isinstance(a, A.Var) and types.get(a.name) is not None
            and types[a.name].kind == "ptr"]


def inject(program: A.Program, callsite, spec: TopologySpec) -> A.Program:
    """Insert the builder call in front of the call in fragment ``callsite``.

    The rewritten fragment allocates the node pool with ``fresh``, picks the
    case with ``choose``, calls the builder into temporaries and assumes the
    original pointer arguments equal them before running the original call.
    """
    label = callsite.label if isinstance(callsite, A.FragmentLabel) else str(callsite)
    body = fragment_body(program, label)
    call = _site_call(body, program)
    if call is None:
        raise NotAPointerCall(f"fragment @{label} contains no procedure call")
    ptrs = _pointer_args(program, label, call)
    if not ptrs:
        raise NotAPointerCall(f"call {call.name} in @{label} has no pointer argument")
    if len(spec.outputs) > len(ptrs):
        raise NotAPointerCall(f"builder {spec.builder} returns {len(spec.outputs)} pointers "
                              f"but {call.name} takes {len(ptrs)}")
    rec_ty = A.ptr(spec.record)
    pre = []
    nodes = []
    for i in range(spec.pool):
        name = f"__n{i}"
        nodes.append(A.Var(name))
        pre.append(A.Decl(rec_ty, name, A.Fresh(spec.record)))
    pre.append(A.Decl(A.INT, "__xi", A.Choose(spec.cases)))
    temps = []
    for v in ptrs[:len(spec.outputs)]:
        t = f"__t_{v}"
        temps.append(A.Var(t))
        pre.append(A.Decl(rec_ty, t, A.Var(v)))
    pre.append(A.ExprStmt(A.Call(spec.builder, tuple(nodes + temps + [A.Var("__xi")]))))
    for v, t in zip(ptrs, temps):
        pre.append(A.Assume(A.Binary("==", A.Var(v), t)))
        pre.append(A.Assign(A.Var(v), t))
    out = replace_fragment(program, label, tuple(pre) + tuple(body))
    out = merge_structs(out, spec.program.structs)
    return add_procs(out, [spec.program.proc(n) for n in (spec.builder,) + spec.helpers])


def _as_exec_state(state):
    from .symexec import ExecState
    if isinstance(state, ExecState):
        return state
    return ExecState(store=dict(state.store), heap={k: dict(c) for k, c in state.heap.items()},
                     pc=tuple(state.pc), cutlog=state.cutlog, trace=state.trace,
                     trace_pc=state.trace_pc, inputs=dict(state.inputs),
                     input_heap={k: dict(c) for k, c in state.input_heap.items()}, model={})


def apply_builder(state: SymbolicState, spec: TopologySpec, case_index: int, solver=None):
    """Run selector case ``case_index`` of the builder on ``state``.

    The pool nodes are allocated fresh; the builder's links go into the heap
    and its assumptions into the path condition.  Outputs that ``state``
    already binds are overwritten with the builder's values.
    """
    from .symexec import Executor, Frame, SymexConfig, push_block
    from .symcore import NULL
    if not 0 <= case_index < spec.n_cases:
        raise IndexError(f"case {case_index} outside [0, {spec.n_cases})")
    rec_ty = A.ptr(spec.record)
    body = [A.Decl(rec_ty, f"__n{i}", A.Fresh(spec.record)) for i in range(spec.pool)]
    args = [A.Var(f"__n{i}") for i in range(spec.pool)] + [A.Var(o) for o in spec.outputs]
    body.append(A.ExprStmt(A.Call(spec.builder, tuple(args + [A.IntLit(spec.cases[case_index])]))))
    driver = A.Procedure(A.VOID, _DRIVER, (), tuple(body))
    program = add_procs(spec.program, [driver])
    program = A.Program(program.structs, program.procs, _DRIVER)
    cfg = SymexConfig(ghost_procs=spec.ghost_procs)
    ex = Executor(program, cfg, solver)
    st = _as_exec_state(state).fork()
    store = dict(st.store)
    for o in spec.outputs:
        store.setdefault(o, NULL)
    driver_types = dict(ex.types[_DRIVER])
    for o in spec.outputs:
        driver_types.setdefault(o, rec_ty)
    st.frames = (Frame(_DRIVER, store, push_block(None, ex.procs[_DRIVER].body), ghost=True,
                       types=driver_types),)
    st.store = store
    st.model = None
    st.status = "live"
    done = [s for s in ex.run(st) if s.status == "done"]
    if not done:
        raise ContradictoryTopology(f"case {spec.cases[case_index]} of {spec.builder} is unsatisfiable")
    out = done[0]
    out.store = {k: v for k, v in out.store.items() if not k.startswith("__")}
    return out


__all__ = ["TopologySpec", "POOL_CAP", "spec_from_program", "spec_from_artifact", "inject",
           "apply_builder"]
