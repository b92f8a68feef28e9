"""Pretty-printer producing MiniC text that reparses to an equal AST."""

from . import ast as A

_PREC = {
    "||": 1, "&&": 2, "|": 3, "^": 4, "&": 5, "==": 6, "!=": 6,
    "<": 7, "<=": 7, ">": 7, ">=": 7, "<<": 8, ">>": 8,
    "+": 9, "-": 9, "*": 10, "/": 10, "%": 10,
}
_UNARY = 11
_POSTFIX = 12
_ATOM = 13


def _float_text(v: float) -> str:
    if v != v:
        raise ValueError("nan has no MiniC literal")
    if v in (float("inf"), float("-inf")):
        return "1e999" if v > 0 else "-1e999"
    text = repr(v)
    if "." not in text and "e" not in text:
        text += ".0"
    return text


def _prec(e):
    if isinstance(e, A.Cond):
        return 0
    if isinstance(e, A.Binary):
        return _PREC[e.op]
    if isinstance(e, (A.Unary, A.Cast)):
        return _UNARY
    if isinstance(e, A.IntLit) and e.value < 0:
        return _UNARY
    if isinstance(e, A.FloatLit) and str(_float_text(e.value)).startswith("-"):
        return _UNARY
    if isinstance(e, A.FieldLoad):
        return _POSTFIX
    return _ATOM


def expr_text(e, ctx=0) -> str:
    text = _expr(e)
    return f"({text})" if _prec(e) < ctx else text


def _expr(e) -> str:
    if isinstance(e, A.IntLit):
        return str(e.value)
    if isinstance(e, A.FloatLit):
        return _float_text(e.value)
    if isinstance(e, A.BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, A.NullLit):
        return "null"
    if isinstance(e, A.Var):
        return e.name
    if isinstance(e, A.FieldLoad):
        return f"{expr_text(e.base, _POSTFIX)}->{e.name}"
    if isinstance(e, A.Unary):
        inner = expr_text(e.operand, _UNARY)
        sep = " " if inner.startswith(e.op) else ""
        return f"{e.op}{sep}{inner}"
    if isinstance(e, A.Binary):
        p = _PREC[e.op]
        return f"{expr_text(e.left, p)} {e.op} {expr_text(e.right, p + 1)}"
    if isinstance(e, A.Cond):
        return f"{expr_text(e.test, 1)} ? {expr_text(e.then, 0)} : {expr_text(e.other, 0)}"
    if isinstance(e, A.Call):
        return f"{e.name}({', '.join(expr_text(a) for a in e.args)})"
    if isinstance(e, A.Cast):
        return f"({type_text(e.to).rstrip()}) {expr_text(e.operand, _UNARY)}"
    if isinstance(e, A.Malloc):
        return f"malloc({e.record})"
    if isinstance(e, A.Fresh):
        return f"fresh({e.record})"
    if isinstance(e, A.Choose):
        return f"choose({', '.join(str(c) for c in e.cases)})"
    raise TypeError(e)


def type_text(ty) -> str:
    if ty.kind == "ptr":
        return f"struct {ty.record} *"
    return f"{ty.kind} "


def _decl_head(ty, name):
    return f"{type_text(ty)}{name}"


def stmt_lines(s, indent=0):
    pad = "    " * indent
    if isinstance(s, A.Decl):
        init = f" = {expr_text(s.init)}" if s.init is not None else ""
        return [f"{pad}{_decl_head(s.type, s.name)}{init};"]
    if isinstance(s, A.Assign):
        return [f"{pad}{expr_text(s.target)} = {expr_text(s.value)};"]
    if isinstance(s, A.If):
        out = [f"{pad}if ({expr_text(s.cond)}) {{"]
        out += block_lines(s.then, indent + 1)
        if s.other:
            out.append(f"{pad}}} else {{")
            out += block_lines(s.other, indent + 1)
        out.append(f"{pad}}}")
        return out
    if isinstance(s, A.While):
        return ([f"{pad}while ({expr_text(s.cond)}) {{"]
                + block_lines(s.body, indent + 1) + [f"{pad}}}"])
    if isinstance(s, A.Return):
        if s.value is None:
            return [f"{pad}return;"]
        return [f"{pad}return {expr_text(s.value)};"]
    if isinstance(s, A.ExprStmt):
        return [f"{pad}{expr_text(s.expr)};"]
    if isinstance(s, A.Assume):
        return [f"{pad}assume({expr_text(s.cond)});"]
    if isinstance(s, A.Assert):
        return [f"{pad}assert({expr_text(s.cond)});"]
    if isinstance(s, A.Havoc):
        sym = f" as {s.symbol}" if s.symbol else ""
        return [f"{pad}havoc {s.name}{sym};"]
    if isinstance(s, A.Emit):
        return [f"{pad}emit({', '.join(expr_text(v) for v in s.values)});"]
    if isinstance(s, A.Bomb):
        return [f"{pad}bomb();"]
    if isinstance(s, A.Fragment):
        return ([f"{pad}@{s.label} {{"] + block_lines(s.body, indent + 1) + [f"{pad}}}"])
    raise TypeError(s)


def block_lines(stmts, indent):
    out = []
    for s in stmts:
        out += stmt_lines(s, indent)
    return out


def proc_text(p: A.Procedure) -> str:
    params = []
    for prm in p.params:
        quals = ("symbolic " if prm.symbolic else "") + ("ref " if prm.ref else "")
        params.append(f"{quals}{_decl_head(prm.type, prm.name)}")
    head = f"{_decl_head(p.ret, p.name)}({', '.join(params)}) {{"
    return "\n".join([head] + block_lines(p.body, 1) + ["}"])


def struct_text(s: A.StructDecl) -> str:
    lines = [f"struct {s.name} {{"]
    lines += [f"    {_decl_head(ty, name)};" for ty, name in s.fields]
    lines.append("};")
    return "\n".join(lines)


def pretty_print(program) -> str:
    parts = [struct_text(s) for s in program.structs]
    parts += [proc_text(p) for p in program.procs]
    return "\n\n".join(parts) + "\n"


def stmts_text(stmts) -> str:
    return "\n".join(block_lines(stmts, 0))
