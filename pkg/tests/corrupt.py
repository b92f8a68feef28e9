"""Deliberately wrong ghost artifacts for the replay soundness fuzz."""

from dataclasses import replace

from ghostsym.ghost import INVERSE, SURROGATE, TOPOLOGY
from ghostsym.minilang import ast as A

INT_CONSTS = (0, 1, -1, 6, 42, 1000)
FLOAT_CONSTS = (0.0, 0.5, -2.0, 1000.0)


def _lit(ty, c):
    if ty.kind == "float":
        return A.FloatLit(float(c))
    if ty.kind == "bool":
        return A.BoolLit(bool(c))
    if ty.kind == "ptr":
        return A.NullLit()
    return A.IntLit(int(c))


def _with_body(art, body):
    proc = replace(art.proc, body=tuple(body))
    procs = tuple(proc if p.name == art.entry else p for p in art.program.procs)
    return replace(art, program=replace(art.program, procs=procs))


def _const(ty, i):
    pool = FLOAT_CONSTS if ty.kind == "float" else INT_CONSTS
    return pool[i % len(pool)]


def variants(art, info):
    """Yield (name, corrupted artifact) pairs for ``art``."""
    types = info.footprint.types
    if art.kind == INVERSE:
        rd = info.footprint.rd_vars
        yield "inverse-empty", _with_body(art, [])
        for i in range(2):
            vals = tuple(_lit(types[v], _const(types[v], i + k)) for k, v in enumerate(rd))
            yield f"inverse-const{i}", _with_body(art, [A.Emit(vals), A.Emit(vals)])
    elif art.kind == SURROGATE:
        outs = [p for p in art.proc.params if p.ref]
        # unconstrained outputs let the solver pick any value, including unreachable ones
        yield "surrogate-havoc", _with_body(art, [A.Havoc(p.name) for p in outs])
        for i in range(4):
            yield f"surrogate-const{i}", _with_body(
                art, [A.Assign(A.Var(p.name), _lit(p.type, _const(p.type, i))) for p in outs])
    elif art.kind == TOPOLOGY:
        params = art.proc.params
        nodes = [p.name for p in params if p.type.kind == "ptr" and not p.ref]
        outs = [p.name for p in params if p.ref]
        bad = (A.Assume(A.Binary("==", A.Var(nodes[0]), A.Var(nodes[1]))),
               A.Assume(A.Binary("!=", A.Var(nodes[0]), A.Var(nodes[1]))))
        yield "topology-contradictory", _with_body(art, bad)
        # every pointer field of every node points at the first node
        rec = art.program.struct(_record(art))
        ptr_fields = [f for ty, f in rec.fields if ty.kind == "ptr"]
        links = [A.Assign(A.FieldLoad(A.Var(n), f), A.Var(nodes[0])) for n in nodes for f in ptr_fields]
        outs_to = [A.Assign(A.Var(o), A.Var(nodes[-1])) for o in outs]
        yield "topology-selfloops", _with_body(art, links + outs_to)
        yield "topology-null", _with_body(art, [A.Assign(A.Var(o), A.NullLit()) for o in outs])


def _record(art):
    for p in art.proc.params:
        if p.type.kind == "ptr":
            return p.type.record
    raise ValueError("topology builder without node parameters")


def corrupted(real, pick):
    """Wrap ``request_ghost`` so that it returns variant ``pick`` of each artifact."""
    def request(info, kind, provider, *a, **kw):
        art = real(info, kind, provider, *a, **kw)
        found = dict(variants(art, info))
        return found[pick] if pick in found else art
    return request


def variant_names(art, info):
    return [n for n, _ in variants(art, info)]
