"""Prompt templates for the three ghost kinds and the slot filling around them.

Each template has the ``{SIGN}``, ``{VARS}`` and ``{CODE}`` slots of the
original templates.  A fixed MiniC appendix states the language the answer
must be written in and the calling conventions the engine relies on.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

from ..footprint import Footprint, footprint
from ..minilang import ast as A
from ..minilang.parser import INTRINSICS
from ..minilang.printer import proc_text, stmts_text, struct_text, type_text

INVERSE, SURROGATE, TOPOLOGY = "inverse", "surrogate", "topology"
KINDS = (INVERSE, SURROGATE, TOPOLOGY)

INVERSE_TEMPLATE = (
    "Generate a function {SIGN} that inverts the original code fragment to recover the pre-state "
    "values of the\nvariables {VARS}. If exact inversion is not possible, implement a bounded "
    "numeric search or a clamped\napproximation, and clearly comment on this in the output. "
    "The original function code: {CODE}"
)

SURROGATE_TEMPLATE = (
    "Rewrite the original fragment so that (1) functionality (outputs, branches) is preserved, "
    "(2) the rewritten\ncode translates to a solver-friendly SMT theory such as bitvectors or "
    "linear arithmetic. For any external\nlibrary or crypto call, provide a stub implementation. "
    "The original code fragment is {CODE}."
)

TOPOLOGY_TEMPLATE = (
    "Identify a small number of distinct heap or pointer configurations that drive different "
    "control-flow outcomes.\nGenerate a function {SIGN} that builds representative memory shapes "
    "and pointer configurations. Leave concrete\nvalues in the data structures symbolic. "
    "Code context: {CODE}"
)

TEMPLATES = {INVERSE: INVERSE_TEMPLATE, SURROGATE: SURROGATE_TEMPLATE, TOPOLOGY: TOPOLOGY_TEMPLATE}

MINIC_NOTES = """
Answer with MiniC source only. MiniC is a C subset:
  types int (32-bit, wrapping), float (double), bool, struct R * ; records are declared as
  struct R { int v; struct R *next; };
  statements: declarations, assignment, if/else, while, return, assume(e);, assert(e);
  expressions: C arithmetic, comparisons, && || !, ?: , p->f, null, malloc(R), (int)/(float) casts
  intrinsics: sin cos tan atan exp log sqrt fabs, hi_bits(x) (high 32 bits of a double)
  a parameter declared `ref T x` is passed by reference (copy-in/copy-out).
""".rstrip()

KIND_NOTES = {
    INVERSE: "Report each candidate pre-state with `emit({VARS});` (at most 8 candidates, "
             "most plausible first). Emit nothing when no candidate exists.",
    SURROGATE: "Write a procedure {SIGN}; every written variable is a ref parameter.",
    TOPOLOGY: "Branch on xi (xi == 0, xi == 1, ...), one case per shape. Each case may only "
              "link the node parameters through pointer fields (or to null), assign the ref "
              "outputs and state assume(...) facts. Do not write data fields.",
}


@dataclass(frozen=True)
class FragmentInfo:
    """A fragment together with what prompts and the engine need to know."""
    program: A.Program
    label: str
    kind: str
    footprint: Footprint
    proc_name: str
    callee: Optional[str] = None                 # topology: procedure called at the site
    pointer_args: Tuple[str, ...] = ()           # topology: argument variables
    pool: int = 4                                # topology: node-parameter count
    extra: Dict[str, str] = field(default_factory=dict, compare=False)

    @property
    def ghost_name(self) -> str:
        return {INVERSE: "f_inv", SURROGATE: "f_sur"}.get(self.kind) \
            or f"constrain_heap_{self.callee}"


def _fragment(program, label):
    found = A.find_fragment(program, label)
    if found is None:
        from ..errors import UnknownLabel
        raise UnknownLabel(f"no fragment labelled @{label}")
    return found


def _site_call(frag: A.Fragment):
    for s in frag.body:
        exprs = A.stmt_exprs(s)
        for e in exprs:
            for x in A.walk_expr(e):
                if isinstance(x, A.Call) and x.name not in INTRINSICS:
                    return x
    return None


def fragment_info(program: A.Program, label, kind: str, pool: int = 4) -> FragmentInfo:
    label = str(label)
    proc, frag = _fragment(program, label)
    fp = footprint(program, label)
    callee, ptr_args = None, ()
    if kind == TOPOLOGY:
        call = _site_call(frag)
        if call is not None:
            callee = call.name
            ptr_args = tuple(a.name for a in call.args if isinstance(a, A.Var)
                             and fp.types.get(a.name) is not None
                             and fp.types[a.name].kind == "ptr")
    return FragmentInfo(program, label, kind, fp, proc.name, callee, ptr_args, pool)


def _callees(program, roots):
    seen, order = set(), []

    def visit(name):
        if name in seen or not program.has_proc(name):
            return
        seen.add(name)
        for s in A.walk_stmts(program.proc(name).body):
            for e in A.stmt_exprs(s):
                for x in A.walk_expr(e):
                    if isinstance(x, A.Call) and x.name not in INTRINSICS:
                        visit(x.name)
        order.append(name)

    for r in roots:
        visit(r)
    return order


def _called_in(stmts):
    names = []
    for s in A.walk_stmts(stmts):
        for e in A.stmt_exprs(s):
            for x in A.walk_expr(e):
                if isinstance(x, A.Call) and x.name not in INTRINSICS and x.name not in names:
                    names.append(x.name)
    return names


def _param(ty, name, ref=False):
    return f"{'ref ' if ref else ''}{type_text(ty)}{name}"


def signature(info: FragmentInfo) -> str:
    fp = info.footprint
    if info.kind == INVERSE:
        params = ", ".join(_param(fp.types[v], v) for v in fp.wr_vars)
        return f"void {info.ghost_name}({params})"
    if info.kind == SURROGATE:
        wr = set(fp.wr_vars)
        names = [v for v in fp.rd_vars if v not in wr] + list(fp.wr_vars)
        params = ", ".join(_param(fp.types[v], v, v in wr) for v in names)
        return f"void {info.ghost_name}({params})"
    rec = _pointee(info)
    nodes = [_param(A.ptr(rec), f"n{i}") for i in range(info.pool)]
    outs = [_param(info.footprint.types[v], v, True) for v in info.pointer_args]
    return f"void {info.ghost_name}({', '.join(nodes + outs + ['int xi'])})"


def _pointee(info):
    recs = {info.footprint.types[v].record for v in info.pointer_args}
    if len(recs) != 1:
        from ..errors import NotAPointerCall
        raise NotAPointerCall(f"call site @{info.label} has no single record-pointer argument type")
    return recs.pop()


def code_context(info: FragmentInfo) -> str:
    program = info.program
    _, frag = _fragment(program, info.label)
    parts = []
    if info.kind == TOPOLOGY:
        parts += [struct_text(s) for s in program.structs]
        parts += [proc_text(program.proc(n)) for n in _callees(program, [info.callee])]
        return "\n\n" + "\n\n".join(parts) + "\n"
    used = _callees(program, _called_in(frag.body))
    parts += [struct_text(s) for s in program.structs if _mentions(frag, used, program, s.name)]
    parts += [proc_text(program.proc(n)) for n in used]
    parts.append(stmts_text(frag.body).rstrip())
    return "\n\n" + "\n\n".join(parts) + "\n"


def _mentions(frag, used, program, record):
    text = stmts_text(frag.body) + "".join(proc_text(program.proc(n)) for n in used)
    return f"struct {record}" in text or f"malloc({record})" in text


def render_prompt(kind: str, fragment, context: Optional[dict] = None) -> str:
    """Fill the ``kind`` template for ``fragment``.

    ``fragment`` is a FragmentInfo or a ``(program, label)`` pair.
    ``context`` may override ``SIGN``/``VARS``/``CODE`` and add ``diagnostic``.
    """
    if kind not in TEMPLATES:
        raise ValueError(f"unknown ghost kind {kind!r}")
    info = fragment if isinstance(fragment, FragmentInfo) else fragment_info(*fragment, kind)
    if info.kind != kind:
        info = fragment_info(info.program, info.label, kind, info.pool)
    ctx = dict(context or {})
    slots = {
        "SIGN": ctx.get("SIGN") or signature(info),
        "VARS": ctx.get("VARS") or ", ".join(info.footprint.rd_vars),
        "CODE": ctx.get("CODE") or code_context(info),
    }
    text = TEMPLATES[kind]
    for key, val in slots.items():
        text = text.replace("{" + key + "}", val)
    note = KIND_NOTES[kind].replace("{VARS}", slots["VARS"]).replace("{SIGN}", slots["SIGN"])
    text = f"{text}\n{MINIC_NOTES}\n{note}\n"
    if ctx.get("diagnostic"):
        text += f"\nYour previous answer was rejected: {ctx['diagnostic']}\n"
    return text


def prompt_hash(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()[:16]


__all__ = ["INVERSE", "SURROGATE", "TOPOLOGY", "KINDS", "TEMPLATES", "FragmentInfo",
           "fragment_info", "signature", "code_context", "render_prompt", "prompt_hash"]
