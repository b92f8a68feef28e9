"""Read/write footprints of fragments and the havoc statements built from them.

Footprints are syntactic over-approximations.  Variables enter ``rd`` when
some path through the fragment may read them before writing them, and enter
``wr`` when some statement may assign them.  Heap accesses are abstracted to
``(record, field)`` location classes.  Calls are followed transitively for
heap classes; ``ref`` arguments count as both read and written.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Optional, Tuple

from .errors import EmptyWriteSet
from .minilang import ast as A
from .minilang.parser import INTRINSICS
from .minilang.transform import resolve_label
from .symcore import fresh_symbol

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Footprint:
    rd: FrozenSet = frozenset()
    wr: FrozenSet = frozenset()
    label: Optional[str] = None
    proc: Optional[str] = None
    declared: FrozenSet[str] = frozenset()
    order: Tuple[str, ...] = field(default=(), compare=False)
    types: Dict[str, A.Type] = field(default_factory=dict, compare=False, hash=False)

    def _ordered(self, names):
        rank = {v: i for i, v in enumerate(self.order)}
        return tuple(sorted(names, key=lambda v: (rank.get(v, len(rank)), v)))

    @property
    def rd_vars(self) -> Tuple[str, ...]:
        """Read variables in order of first appearance."""
        return self._ordered(x for x in self.rd if isinstance(x, str))

    @property
    def wr_vars(self) -> Tuple[str, ...]:
        """Written variables in order of first appearance."""
        return self._ordered(x for x in self.wr if isinstance(x, str))

    @property
    def rd_locs(self):
        return frozenset(x for x in self.rd if isinstance(x, tuple))

    @property
    def wr_locs(self):
        return frozenset(x for x in self.wr if isinstance(x, tuple))


class _Analysis:
    def __init__(self, program: A.Program):
        self.program = program
        self.structs = program.structs
        self.rd = set()
        self.wr = set()
        self.declared = set()
        self.order = []
        self._callee_cache: Dict[str, Tuple[frozenset, frozenset]] = {}

    def classes(self, fname):
        found = {(s.name, fname) for s in self.structs if s.field_type(fname) is not None}
        return found or {("?", fname)}

    # expression reads, given the set of definitely written variables
    def expr(self, e, written):
        for x in A.walk_expr(e):
            if isinstance(x, A.Var) and x.name not in written:
                self.rd.add(x.name)
            elif isinstance(x, A.FieldLoad):
                self.rd |= self.classes(x.name)
            elif isinstance(x, A.Call) and x.name not in INTRINSICS \
                    and self.program.has_proc(x.name):
                self.call(x, written)

    def call(self, call, written):
        proc = self.program.proc(call.name)
        for prm, arg in zip(proc.params, call.args):
            if prm.ref and isinstance(arg, A.Var):
                self.wr.add(arg.name)
        r, w = self.callee_heap(proc.name, set())
        self.rd |= r
        self.wr |= w

    def callee_heap(self, name, visiting):
        if name in self._callee_cache:
            return self._callee_cache[name]
        if name in visiting:
            return frozenset(), frozenset()
        visiting = visiting | {name}
        proc = self.program.proc(name)
        r, w = set(), set()
        for s in A.walk_stmts(proc.body):
            if isinstance(s, A.Assign) and isinstance(s.target, A.FieldLoad):
                w |= self.classes(s.target.name)
            for e in A.stmt_exprs(s):
                for x in A.walk_expr(e):
                    if isinstance(x, A.FieldLoad):
                        r |= self.classes(x.name)
                    elif isinstance(x, A.Call) and x.name not in INTRINSICS \
                            and self.program.has_proc(x.name):
                        cr, cw = self.callee_heap(x.name, visiting)
                        r |= cr
                        w |= cw
        out = (frozenset(r), frozenset(w))
        self._callee_cache[name] = out
        return out

    def note(self, name):
        if name not in self.order:
            self.order.append(name)

    def block(self, stmts, written):
        """Analyse ``stmts``; returns the variables definitely written after."""
        written = set(written)
        for s in stmts:
            written = self.stmt(s, written)
        return written

    def stmt(self, s, written):
        for e in A.stmt_exprs(s):
            if isinstance(s, A.Assign) and e is s.target and isinstance(e, A.Var):
                continue
            for x in A.walk_expr(e):
                if isinstance(x, A.Var):
                    self.note(x.name)
        if isinstance(s, A.Assign) and isinstance(s.target, A.Var):
            self.note(s.target.name)
        elif isinstance(s, (A.Decl, A.Havoc)):
            self.note(s.name)
        t = type(s)
        if t is A.Decl:
            if s.init is not None:
                self.expr(s.init, written)
            self.wr.add(s.name)
            self.declared.add(s.name)
            return written | {s.name}
        if t is A.Assign:
            self.expr(s.value, written)
            if isinstance(s.target, A.Var):
                self.wr.add(s.target.name)
                return written | {s.target.name}
            self.expr(s.target.base, written)
            self.wr |= self.classes(s.target.name)
            return written
        if t is A.Havoc:
            self.wr.add(s.name)
            return written | {s.name}
        if t is A.If:
            self.expr(s.cond, written)
            a = self.block(s.then, written)
            b = self.block(s.other, written)
            return a & b
        if t is A.While:
            self.expr(s.cond, written)
            self.block(s.body, written)
            # a second pass catches reads of variables written late in the body
            self.block(s.body, written)
            return written
        if t is A.Fragment:
            return self.block(s.body, written)
        for e in A.stmt_exprs(s):
            self.expr(e, written)
        return written


def _var_types(proc: A.Procedure):
    types = {p.name: p.type for p in proc.params}
    for s in A.walk_stmts(proc.body):
        if isinstance(s, A.Decl):
            types[s.name] = s.type
    return types


def footprint_of_stmts(program: A.Program, stmts, types=None, label=None, proc=None) -> Footprint:
    an = _Analysis(program)
    an.block(stmts, set())
    return Footprint(frozenset(an.rd), frozenset(an.wr), label, proc,
                     frozenset(an.declared), tuple(an.order), dict(types or {}))


def _names_outside(proc: A.Procedure, frag: A.Fragment):
    names = {p.name for p in proc.params}

    def visit(stmts):
        for s in stmts:
            if s is frag:
                continue
            if isinstance(s, (A.Decl, A.Havoc)):
                names.add(s.name)
            for e in A.stmt_exprs(s):
                names.update(x.name for x in A.walk_expr(e) if isinstance(x, A.Var))
            for sub in A.child_blocks(s):
                visit(sub)

    visit(proc.body)
    return names


def footprint(program: A.Program, label) -> Footprint:
    """Rd/Wr footprint of fragment ``label``; raises UnknownLabel.

    Variables declared inside the fragment and never mentioned outside it are
    temporaries of the fragment and are left out of ``wr``.
    """
    fl = resolve_label(program, label)
    proc, frag = A.find_fragment(program, fl.label)
    fp = footprint_of_stmts(program, frag.body, _var_types(proc), fl.label, proc.name)
    temps = fp.declared - _names_outside(proc, frag)
    if not temps:
        return fp
    return Footprint(fp.rd - temps, fp.wr - temps, fp.label, fp.proc, fp.declared - temps,
                     tuple(v for v in fp.order if v not in temps), fp.types)


def havoc_of(fp: Footprint, hint: str = "beta"):
    """One ``v := beta_i`` per written variable.

    Returns ``(statements, symbols)`` where ``symbols`` maps each written
    variable to the name of its fresh logical symbol.  Heap location classes
    in ``wr`` are not havocked; heap-writing fragments are handled by
    topologies and the replay gate.
    """
    names = fp.wr_vars
    if not names:
        raise EmptyWriteSet(f"fragment {fp.label or '?'} writes no variables")
    if fp.wr_locs:
        log.warning("fragment %s writes heap locations %s; only variables are havocked",
                    fp.label, sorted(fp.wr_locs))
    stmts, symbols = [], {}
    for v in names:
        if v in fp.declared:
            stmts.append(A.Decl(fp.types[v], v))
        sym = fresh_symbol("bool", f"{hint}_{v}").name  # sort fixed later by the executor
        stmts.append(A.Havoc(v, sym))
        symbols[v] = sym
    return tuple(stmts), symbols


__all__ = ["Footprint", "footprint", "footprint_of_stmts", "havoc_of"]
