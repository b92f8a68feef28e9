"""Value-semantics rewrites over programs: fragment lookup and replacement."""

from __future__ import annotations

from dataclasses import replace

from ..errors import UnknownLabel
from . import ast as A


def _label_name(label) -> str:
    return label.label if isinstance(label, A.FragmentLabel) else str(label)


def resolve_label(program: A.Program, label) -> A.FragmentLabel:
    """Return the FragmentLabel (with its span) for ``label``."""
    name = _label_name(label)
    found = A.find_fragment(program, name)
    if found is None:
        raise UnknownLabel(f"no fragment labelled @{name}")
    proc, frag = found
    return A.FragmentLabel(name, (proc.name, 0, len(frag.body)))


def fragment_body(program: A.Program, label):
    name = _label_name(label)
    found = A.find_fragment(program, name)
    if found is None:
        raise UnknownLabel(f"no fragment labelled @{name}")
    return found[1].body


def map_block(stmts, fn):
    """Rebuild ``stmts`` bottom-up; ``fn(stmt)`` returns a list of statements."""
    out = []
    for s in stmts:
        if isinstance(s, A.If):
            s = replace(s, then=map_block(s.then, fn), other=map_block(s.other, fn))
        elif isinstance(s, A.While):
            s = replace(s, body=map_block(s.body, fn))
        elif isinstance(s, A.Fragment):
            s = replace(s, body=map_block(s.body, fn))
        out.extend(fn(s))
    return tuple(out)


def map_procs(program: A.Program, fn) -> A.Program:
    procs = tuple(replace(p, body=map_block(p.body, fn)) for p in program.procs)
    return replace(program, procs=procs)


def replace_fragment(program: A.Program, label, replacement) -> A.Program:
    """Return a copy of ``program`` with the body of fragment ``label`` replaced.

    The fragment wrapper (and so its label) is kept around the new body, which
    means replacing a fragment with its own body yields an equal program.
    """
    name = _label_name(label)
    if A.find_fragment(program, name) is None:
        raise UnknownLabel(f"no fragment labelled @{name}")
    replacement = tuple(replacement)

    def swap(s):
        if isinstance(s, A.Fragment) and s.label == name:
            return [replace(s, body=replacement)]
        return [s]

    return map_procs(program, swap)


def add_procs(program: A.Program, procs) -> A.Program:
    """Append procedures (and their record types) from another program."""
    names = {p.name for p in program.procs}
    extra = tuple(p for p in procs if p.name not in names)
    return replace(program, procs=program.procs + extra)


def merge_structs(program: A.Program, structs) -> A.Program:
    names = {s.name for s in program.structs}
    extra = tuple(s for s in structs if s.name not in names)
    return replace(program, structs=program.structs + extra)
