"""Locating fragments that deserve ghost code.

Labelled ``@name { ... }`` fragments are always reported.  Unlabelled
statements are reported when they reach solver-hostile operations
(transcendental intrinsics, nonlinear integer arithmetic) or pass fully
symbolic pointers to a procedure.  Such heuristic candidates carry a
synthetic label; ``materialize`` wraps them so that the rest of the pipeline
can address them like explicit fragments.
"""

from __future__ import annotations

from dataclasses import replace
from typing import List, Tuple

from ..minilang import ast as A
from ..minilang.parser import INTRINSICS
from .prompts import INVERSE, KINDS, SURROGATE, TOPOLOGY

TRANSCENDENTAL = frozenset({"sin", "cos", "tan", "atan", "exp", "log", "sqrt"})
_BITWISE = frozenset({"&", "|", "^", "<<", ">>"})


def _is_const(e):
    return isinstance(e, (A.IntLit, A.FloatLit))


class _Scan:
    def __init__(self, program):
        self.program = program
        self.memo = {}

    def expr_flags(self, e):
        flags = set()
        for x in A.walk_expr(e):
            if isinstance(x, A.Call):
                if x.name in TRANSCENDENTAL:
                    flags.add("transcendental")
                elif x.name not in INTRINSICS and self.program.has_proc(x.name):
                    flags |= self.proc_flags(x.name)
            elif isinstance(x, A.Binary):
                if x.op == "*" and not (_is_const(x.left) or _is_const(x.right)):
                    flags.add("nonlinear")
                elif x.op in ("/", "%") and not _is_const(x.right):
                    flags.add("nonlinear")
                elif x.op in _BITWISE:
                    flags.add("bitwise")
        return flags

    def stmts_flags(self, stmts):
        flags = set()
        for s in A.walk_stmts(stmts):
            if isinstance(s, A.While):
                flags.add("loop")
            for e in A.stmt_exprs(s):
                flags |= self.expr_flags(e)
        return flags

    def proc_flags(self, name):
        if name in self.memo:
            return self.memo[name]
        self.memo[name] = set()
        flags = self.stmts_flags(self.program.proc(name).body)
        self.memo[name] = flags
        return flags


def _suggest(flags, pointer_call):
    if pointer_call:
        return TOPOLOGY
    if "loop" in flags or "bitwise" in flags:
        return SURROGATE
    return INVERSE


def _unassigned_params(proc):
    assigned = {s.target.name for s in A.walk_stmts(proc.body)
                if isinstance(s, A.Assign) and isinstance(s.target, A.Var)}
    return {p.name for p in proc.params if p.type.kind == "ptr" and p.name not in assigned}


def _pointer_call(program, proc, stmts):
    free = _unassigned_params(proc)
    for s in stmts:
        for e in A.stmt_exprs(s):
            for x in A.walk_expr(e):
                if isinstance(x, A.Call) and program.has_proc(x.name):
                    if any(isinstance(a, A.Var) and a.name in free for a in x.args):
                        return True
    return False


def identify_hard_fragments(program: A.Program, provider=None) -> List[Tuple[A.FragmentLabel, str]]:
    """Return ``(FragmentLabel, suggested kind)`` pairs, explicit labels first."""
    if provider is not None:
        from ..minilang.printer import pretty_print
        ranked = provider.rank(pretty_print(program))
        if ranked:
            return [(A.FragmentLabel(lbl), kind) for lbl, kind in ranked if kind in KINDS]
    scan = _Scan(program)
    out, auto = [], []
    for proc in program.procs:
        for s in A.walk_stmts(proc.body):
            if isinstance(s, A.Fragment):
                flags = scan.stmts_flags(s.body)
                kind = _suggest(flags, _pointer_call(program, proc, s.body))
                out.append((A.FragmentLabel(s.label, (proc.name, 0, len(s.body))), kind))
        for i, s in enumerate(proc.body):
            if isinstance(s, (A.Fragment, A.If, A.While, A.Return)):
                continue
            flags = set()
            for e in A.stmt_exprs(s):
                flags |= scan.expr_flags(e)
            ptr = _pointer_call(program, proc, [s])
            if ptr or flags & {"transcendental", "nonlinear"}:
                label = f"auto_{proc.name}_{i}"
                auto.append((A.FragmentLabel(label, (proc.name, i, i + 1)), _suggest(flags, ptr)))
    return out + auto


def materialize(program: A.Program, candidates) -> A.Program:
    """Wrap heuristic candidates (labels with a span) in fragment blocks."""
    spans = {}
    for fl, _ in candidates:
        if fl.span is not None and A.find_fragment(program, fl.label) is None:
            spans.setdefault(fl.span[0], []).append(fl)
    procs = []
    for proc in program.procs:
        body = list(proc.body)
        for fl in sorted(spans.get(proc.name, ()), key=lambda f: -f.span[1]):
            _, start, stop = fl.span
            body[start:stop] = [A.Fragment(fl.label, tuple(body[start:stop]))]
        procs.append(replace(proc, body=tuple(body)))
    return replace(program, procs=tuple(procs))


__all__ = ["identify_hard_fragments", "materialize", "TRANSCENDENTAL"]
