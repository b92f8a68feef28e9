"""MiniC abstract syntax.

All nodes are frozen dataclasses so programs have value semantics: rewriting
passes build new trees and structural equality is plain ``==``.  Source
positions are kept for diagnostics but excluded from comparison, which is what
makes ``parse(pretty_print(p)) == p`` hold.

Branching statements (``if``, ``while``, ``assert``, ``bomb``) carry a site id
``"<proc>#<n>"`` assigned in preorder when the program is parsed.  The id
travels with the node through rewrites, so traces recorded on a rewritten
program still name sites of the original.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple, Union


# ---------------------------------------------------------------- types

@dataclass(frozen=True)
class Type:
    kind: str  # int | float | bool | void | ptr
    record: Optional[str] = None

    def __str__(self):
        if self.kind == "ptr":
            return f"struct {self.record} *"
        return self.kind

    @property
    def is_numeric(self):
        return self.kind in ("int", "float")


INT = Type("int")
FLOAT = Type("float")
BOOL = Type("bool")
VOID = Type("void")


def ptr(record: str) -> Type:
    return Type("ptr", record)


# ---------------------------------------------------------------- expressions

def _pos():
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class IntLit:
    value: int
    pos: Optional[Tuple[int, int]] = _pos()


@dataclass(frozen=True)
class FloatLit:
    value: float
    pos: Optional[Tuple[int, int]] = _pos()


@dataclass(frozen=True)
class BoolLit:
    value: bool
    pos: Optional[Tuple[int, int]] = _pos()


@dataclass(frozen=True)
class NullLit:
    record: Optional[str] = None
    pos: Optional[Tuple[int, int]] = _pos()


@dataclass(frozen=True)
class Var:
    name: str
    pos: Optional[Tuple[int, int]] = _pos()


@dataclass(frozen=True)
class FieldLoad:
    base: "Expr"
    name: str
    pos: Optional[Tuple[int, int]] = _pos()


@dataclass(frozen=True)
class Unary:
    op: str  # - ! ~
    operand: "Expr"
    pos: Optional[Tuple[int, int]] = _pos()


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    pos: Optional[Tuple[int, int]] = _pos()


@dataclass(frozen=True)
class Cond:
    test: "Expr"
    then: "Expr"
    other: "Expr"
    pos: Optional[Tuple[int, int]] = _pos()


@dataclass(frozen=True)
class Call:
    name: str
    args: Tuple["Expr", ...]
    pos: Optional[Tuple[int, int]] = _pos()


@dataclass(frozen=True)
class Cast:
    to: Type
    operand: "Expr"
    pos: Optional[Tuple[int, int]] = _pos()


@dataclass(frozen=True)
class Malloc:
    record: str
    pos: Optional[Tuple[int, int]] = _pos()


@dataclass(frozen=True)
class Fresh:
    """Ghost-only: a heap node whose every field is a fresh symbol."""
    record: str
    pos: Optional[Tuple[int, int]] = _pos()


@dataclass(frozen=True)
class Choose:
    """Ghost-only: a selector ranging over the listed integer cases."""
    cases: Tuple[int, ...]
    pos: Optional[Tuple[int, int]] = _pos()


Expr = Union[IntLit, FloatLit, BoolLit, NullLit, Var, FieldLoad, Unary, Binary,
             Cond, Call, Cast, Malloc, Fresh, Choose]


# ---------------------------------------------------------------- statements

@dataclass(frozen=True)
class Decl:
    type: Type
    name: str
    init: Optional[Expr] = None
    pos: Optional[Tuple[int, int]] = _pos()


@dataclass(frozen=True)
class Assign:
    target: Union[Var, FieldLoad]
    value: Expr
    pos: Optional[Tuple[int, int]] = _pos()


@dataclass(frozen=True)
class If:
    cond: Expr
    then: Tuple["Stmt", ...]
    other: Tuple["Stmt", ...] = ()
    sid: Optional[str] = None
    pos: Optional[Tuple[int, int]] = _pos()


@dataclass(frozen=True)
class While:
    cond: Expr
    body: Tuple["Stmt", ...]
    sid: Optional[str] = None
    pos: Optional[Tuple[int, int]] = _pos()


@dataclass(frozen=True)
class Return:
    value: Optional[Expr] = None
    pos: Optional[Tuple[int, int]] = _pos()


@dataclass(frozen=True)
class ExprStmt:
    expr: Expr
    pos: Optional[Tuple[int, int]] = _pos()


@dataclass(frozen=True)
class Assume:
    cond: Expr
    pos: Optional[Tuple[int, int]] = _pos()


@dataclass(frozen=True)
class Assert:
    cond: Expr
    sid: Optional[str] = None
    pos: Optional[Tuple[int, int]] = _pos()


@dataclass(frozen=True)
class Havoc:
    """``name := symbol`` with ``symbol`` a fresh logical variable."""
    name: str
    symbol: Optional[str] = None
    pos: Optional[Tuple[int, int]] = _pos()


@dataclass(frozen=True)
class Emit:
    """Inverse procedures yield one candidate pre-state tuple per emit."""
    values: Tuple[Expr, ...]
    pos: Optional[Tuple[int, int]] = _pos()


@dataclass(frozen=True)
class Bomb:
    sid: Optional[str] = None
    pos: Optional[Tuple[int, int]] = _pos()


@dataclass(frozen=True)
class Fragment:
    label: str
    body: Tuple["Stmt", ...]
    pos: Optional[Tuple[int, int]] = _pos()


Stmt = Union[Decl, Assign, If, While, Return, ExprStmt, Assume, Assert, Havoc,
             Emit, Bomb, Fragment]


# ---------------------------------------------------------------- top level

@dataclass(frozen=True)
class Param:
    type: Type
    name: str
    symbolic: bool = False
    ref: bool = False


@dataclass(frozen=True)
class Procedure:
    ret: Type
    name: str
    params: Tuple[Param, ...]
    body: Tuple[Stmt, ...]
    pos: Optional[Tuple[int, int]] = _pos()


@dataclass(frozen=True)
class StructDecl:
    name: str
    fields: Tuple[Tuple[Type, str], ...]

    def field_type(self, name):
        for ty, fname in self.fields:
            if fname == name:
                return ty
        return None


@dataclass(frozen=True)
class Program:
    structs: Tuple[StructDecl, ...]
    procs: Tuple[Procedure, ...]
    entry: str

    def proc(self, name) -> Procedure:
        for p in self.procs:
            if p.name == name:
                return p
        raise KeyError(name)

    def has_proc(self, name) -> bool:
        return any(p.name == name for p in self.procs)

    def struct(self, name) -> StructDecl:
        for s in self.structs:
            if s.name == name:
                return s
        raise KeyError(name)

    @property
    def entry_proc(self) -> Procedure:
        return self.proc(self.entry)


@dataclass(frozen=True)
class FragmentLabel:
    """An addressable fragment: its label plus the statement span it covers.

    ``span`` is ``(procedure, start, stop)`` where the indices count the
    statements of the fragment body.
    """
    label: str
    span: Optional[Tuple[str, int, int]] = field(default=None, compare=False)

    def __str__(self):
        return self.label


# ---------------------------------------------------------------- traversal

def child_blocks(stmt):
    """Statement tuples nested directly inside ``stmt``."""
    if isinstance(stmt, If):
        return (stmt.then, stmt.other)
    if isinstance(stmt, While):
        return (stmt.body,)
    if isinstance(stmt, Fragment):
        return (stmt.body,)
    return ()


def walk_stmts(stmts):
    """Preorder over every statement in ``stmts`` including nested ones."""
    for s in stmts:
        yield s
        for block in child_blocks(s):
            yield from walk_stmts(block)


def walk_expr(e):
    yield e
    if isinstance(e, FieldLoad):
        yield from walk_expr(e.base)
    elif isinstance(e, Unary):
        yield from walk_expr(e.operand)
    elif isinstance(e, Binary):
        yield from walk_expr(e.left)
        yield from walk_expr(e.right)
    elif isinstance(e, Cond):
        yield from walk_expr(e.test)
        yield from walk_expr(e.then)
        yield from walk_expr(e.other)
    elif isinstance(e, Call):
        for a in e.args:
            yield from walk_expr(a)
    elif isinstance(e, Cast):
        yield from walk_expr(e.operand)


def stmt_exprs(s):
    """Expressions appearing directly in statement ``s`` (not nested blocks)."""
    if isinstance(s, Decl):
        return (s.init,) if s.init is not None else ()
    if isinstance(s, Assign):
        return (s.target, s.value)
    if isinstance(s, (If, While)):
        return (s.cond,)
    if isinstance(s, Return):
        return (s.value,) if s.value is not None else ()
    if isinstance(s, ExprStmt):
        return (s.expr,)
    if isinstance(s, (Assume, Assert)):
        return (s.cond,)
    if isinstance(s, Emit):
        return s.values
    return ()


def find_fragment(program: Program, label: str):
    """Return ``(procedure, fragment)`` for ``label`` or ``None``."""
    for proc in program.procs:
        for s in walk_stmts(proc.body):
            if isinstance(s, Fragment) and s.label == label:
                return proc, s
    return None


def branch_sites(program: Program):
    """Every site id in the program, mapped to the statement that owns it."""
    sites = {}
    for proc in program.procs:
        for s in walk_stmts(proc.body):
            sid = getattr(s, "sid", None)
            if sid is not None:
                sites[sid] = s
    return sites
