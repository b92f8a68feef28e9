"""Recursive-descent parser and sort checker for MiniC.

Grammar (informal EBNF)::

    program   := { struct | proc }
    struct    := "struct" ID "{" { type ID ";" } "}" [";"]
    proc      := type ID "(" [ param { "," param } ] ")" block
    param     := { "symbolic" | "ref" } type ID
    type      := "int" | "float" | "double" | "bool" | "void"
               | "struct" ID "*" | ID "*"
    block     := "{" { stmt } "}"
    stmt      := type declarator { "," declarator } ";"
               | "if" "(" expr ")" body [ "else" body ]
               | "while" "(" expr ")" body
               | "return" [ expr ] ";"
               | ("assume" | "assert") "(" expr ")" ";"
               | "havoc" ID [ "as" ID ] ";"
               | "emit" "(" expr { "," expr } ")" ";"
               | "bomb" "(" ")" ";"
               | "@" ID block
               | lvalue ( "=" | ":=" | "+=" | "-=" | "*=" ... ) expr ";"
               | lvalue ( "++" | "--" ) ";"
               | call ";" | block | ";"
    expr      := C precedence: ?:  ||  &&  |  ^  &  == !=  < <= > >=
                 << >>  + -  * / %  unary (- ! ~ cast)  postfix (->f)

``:=`` is accepted as a synonym of ``=``.  Compound assignments and ``++`` are
desugared.  Offsets in diagnostics are 1-based.
"""

from __future__ import annotations

import re

from ..errors import MiniCSyntaxError, SortError
from . import ast as A
from .values import wrap32

INTRINSICS = {
    # name: (arg sorts, result sort)
    "sin": (("float",), "float"),
    "cos": (("float",), "float"),
    "tan": (("float",), "float"),
    "atan": (("float",), "float"),
    "exp": (("float",), "float"),
    "log": (("float",), "float"),
    "sqrt": (("float",), "float"),
    "fabs": (("float",), "float"),
    "hi_bits": (("float",), "int"),
}

KEYWORDS = {
    "struct", "int", "float", "double", "bool", "void", "if", "else", "while",
    "return", "assume", "assert", "havoc", "as", "emit", "bomb", "symbolic",
    "ref", "true", "false", "null", "NULL", "malloc", "fresh", "choose",
}

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+|//[^\n]*|/\*.*?\*/)
  | (?P<float>(?:\d+\.\d*|\.\d+)(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)
  | (?P<hex>0[xX][0-9a-fA-F]+)
  | (?P<int>\d+)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>->|:=|\+=|-=|\*=|/=|%=|&=|\|=|\^=|<<=|>>=|\+\+|--|<<|>>|<=|>=|==|!=|&&|\|\||[-+*/%&|^~!<>=(){};,@?:])
""", re.VERBOSE | re.DOTALL)


class Token:
    __slots__ = ("kind", "text", "offset", "line", "col")

    def __init__(self, kind, text, offset, line, col):
        self.kind, self.text, self.offset, self.line, self.col = kind, text, offset, line, col

    def __repr__(self):
        return f"Token({self.kind},{self.text!r}@{self.offset})"


def tokenize(source: str):
    tokens = []
    pos = 0
    line, line_start = 1, 0
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise MiniCSyntaxError(f"unexpected character {source[pos]!r}",
                                   pos + 1, line, pos - line_start + 1)
        kind = m.lastgroup
        text = m.group()
        if kind != "ws":
            if kind == "id" and text in KEYWORDS:
                kind = "kw"
            tokens.append(Token(kind, text, pos + 1, line, pos - line_start + 1))
        nl = text.count("\n")
        if nl:
            line += nl
            line_start = pos + text.rfind("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", n + 1, line, n - line_start + 1))
    return tokens


_BINARY_LEVELS = [
    ("||",), ("&&",), ("|",), ("^",), ("&",), ("==", "!="),
    ("<", "<=", ">", ">="), ("<<", ">>"), ("+", "-"), ("*", "/", "%"),
]

_COMPOUND = {"+=": "+", "-=": "-", "*=": "*", "/=": "/", "%=": "%", "&=": "&",
             "|=": "|", "^=": "^", "<<=": "<<", ">>=": ">>"}


class _Parser:
    def __init__(self, source):
        self.toks = tokenize(source)
        self.i = 0
        self.structs = {}
        self.proc_name = None
        self.site_counter = 0

    # -- token helpers
    @property
    def tok(self):
        return self.toks[self.i]

    def peek(self, k=1):
        j = min(self.i + k, len(self.toks) - 1)
        return self.toks[j]

    def error(self, expected, tok=None):
        tok = tok or self.tok
        got = tok.text or "end of input"
        raise MiniCSyntaxError(f"unexpected {got!r}", tok.offset, tok.line,
                               tok.col, expected)

    def at(self, text):
        return self.tok.text == text and self.tok.kind in ("op", "kw")

    def accept(self, text):
        if self.at(text):
            tok = self.tok
            self.i += 1
            return tok
        return None

    def expect(self, text):
        tok = self.accept(text)
        if tok is None:
            self.error(repr(text))
        return tok

    def ident(self):
        tok = self.tok
        if tok.kind != "id":
            self.error("identifier")
        self.i += 1
        return tok.text

    def pos(self, tok=None):
        tok = tok or self.tok
        return (tok.line, tok.col)

    def next_sid(self):
        sid = f"{self.proc_name}#{self.site_counter}"
        self.site_counter += 1
        return sid

    # -- types
    def at_type(self):
        t = self.tok
        if t.kind == "kw" and t.text in ("int", "float", "double", "bool", "void", "struct"):
            return True
        return (t.kind == "id" and t.text in self.structs
                and self.peek().text == "*")

    def parse_type(self):
        t = self.tok
        if self.accept("struct"):
            name = self.ident()
            self.expect("*")
            return A.ptr(name)
        if t.kind == "id" and t.text in self.structs:
            self.i += 1
            self.expect("*")
            return A.ptr(t.text)
        for kw, ty in (("int", A.INT), ("float", A.FLOAT), ("double", A.FLOAT),
                       ("bool", A.BOOL), ("void", A.VOID)):
            if self.accept(kw):
                return ty
        self.error("a type")

    # -- top level
    def program(self):
        structs, procs = [], []
        while self.tok.kind != "eof":
            if self.at("struct") and self.peek(2).text == "{":
                structs.append(self.struct_decl())
            else:
                procs.append(self.proc_decl())
        return structs, procs

    def struct_decl(self):
        self.expect("struct")
        name = self.ident()
        self.structs[name] = None
        self.expect("{")
        fields = []
        while not self.accept("}"):
            ty = self.parse_type()
            fname = self.ident()
            self.expect(";")
            fields.append((ty, fname))
        self.accept(";")
        decl = A.StructDecl(name, tuple(fields))
        self.structs[name] = decl
        return decl

    def proc_decl(self):
        start = self.tok
        ret = self.parse_type()
        name = self.ident()
        self.proc_name = name
        self.site_counter = 0
        self.expect("(")
        params = []
        if not self.accept(")"):
            while True:
                symbolic = ref = False
                while self.tok.text in ("symbolic", "ref") and self.tok.kind == "kw":
                    if self.tok.text == "symbolic":
                        symbolic = True
                    else:
                        ref = True
                    self.i += 1
                if not self.at_type():
                    self.error("a parameter type or ')'")
                ty = self.parse_type()
                pname = self.ident()
                params.append(A.Param(ty, pname, symbolic, ref))
                if self.accept(")"):
                    break
                self.expect(",")
        body = self.block()
        return A.Procedure(ret, name, tuple(params), body, pos=self.pos(start))

    # -- statements
    def block(self):
        self.expect("{")
        stmts = []
        while not self.accept("}"):
            if self.tok.kind == "eof":
                self.error("'}'")
            stmts.extend(self.statement())
        return tuple(stmts)

    def body(self):
        if self.at("{"):
            return self.block()
        return tuple(self.statement())

    def statement(self):
        t = self.tok
        p = self.pos(t)
        if self.accept(";"):
            return []
        if self.at("{"):
            return list(self.block())
        if self.at_type():
            ty = self.parse_type()
            out = []
            while True:
                name = self.ident()
                init = self.expr() if (self.accept("=") or self.accept(":=")) else None
                out.append(A.Decl(ty, name, init, pos=p))
                if self.accept(";"):
                    return out
                self.expect(",")
        if self.accept("if"):
            sid = self.next_sid()
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            then = self.body()
            other = self.body() if self.accept("else") else ()
            return [A.If(cond, then, other, sid, pos=p)]
        if self.accept("while"):
            sid = self.next_sid()
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            return [A.While(cond, self.body(), sid, pos=p)]
        if self.accept("return"):
            value = None if self.at(";") else self.expr()
            self.expect(";")
            return [A.Return(value, pos=p)]
        if self.at("assume") or self.at("assert"):
            kw = self.tok.text
            self.i += 1
            sid = self.next_sid() if kw == "assert" else None
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            self.expect(";")
            return [A.Assume(cond, pos=p) if kw == "assume" else A.Assert(cond, sid, pos=p)]
        if self.accept("havoc"):
            name = self.ident()
            symbol = self.ident() if self.accept("as") else None
            self.expect(";")
            return [A.Havoc(name, symbol, pos=p)]
        if self.accept("emit"):
            self.expect("(")
            values = [self.expr()]
            while self.accept(","):
                values.append(self.expr())
            self.expect(")")
            self.expect(";")
            return [A.Emit(tuple(values), pos=p)]
        if self.accept("bomb"):
            sid = self.next_sid()
            self.expect("(")
            self.expect(")")
            self.expect(";")
            return [A.Bomb(sid, pos=p)]
        if self.accept("@"):
            label = self.ident()
            return [A.Fragment(label, self.block(), pos=p)]
        # assignment or call
        target = self.postfix()
        op = self.tok.text if self.tok.kind == "op" else None
        if op in ("=", ":="):
            self.i += 1
            value = self.expr()
            self.expect(";")
            return [A.Assign(self._lvalue(target, t), value, pos=p)]
        if op in _COMPOUND:
            self.i += 1
            value = self.expr()
            self.expect(";")
            lv = self._lvalue(target, t)
            return [A.Assign(lv, A.Binary(_COMPOUND[op], lv, value, pos=p), pos=p)]
        if op in ("++", "--"):
            self.i += 1
            self.expect(";")
            lv = self._lvalue(target, t)
            return [A.Assign(lv, A.Binary(op[0], lv, A.IntLit(1), pos=p), pos=p)]
        if isinstance(target, A.Call):
            self.expect(";")
            return [A.ExprStmt(target, pos=p)]
        self.error("'=' or ';'")

    def _lvalue(self, e, tok):
        if isinstance(e, (A.Var, A.FieldLoad)):
            return e
        raise MiniCSyntaxError("invalid assignment target", tok.offset, tok.line,
                               tok.col, "a variable or field")

    # -- expressions
    def expr(self):
        start = self.tok
        test = self.binary(0)
        if self.accept("?"):
            then = self.expr()
            self.expect(":")
            other = self.expr()
            return A.Cond(test, then, other, pos=self.pos(start))
        return test

    def binary(self, level):
        if level == len(_BINARY_LEVELS):
            return self.unary()
        ops = _BINARY_LEVELS[level]
        left = self.binary(level + 1)
        while self.tok.kind == "op" and self.tok.text in ops:
            t = self.tok
            self.i += 1
            right = self.binary(level + 1)
            left = A.Binary(t.text, left, right, pos=self.pos(t))
        return left

    def unary(self):
        t = self.tok
        if self.tok.kind == "op" and self.tok.text in ("-", "!", "~"):
            self.i += 1
            operand = self.unary()
            if t.text == "-" and isinstance(operand, A.IntLit):
                return A.IntLit(wrap32(-operand.value), pos=self.pos(t))
            if t.text == "-" and isinstance(operand, A.FloatLit):
                return A.FloatLit(-operand.value, pos=self.pos(t))
            return A.Unary(t.text, operand, pos=self.pos(t))
        if self.at("(") and self._cast_ahead():
            self.i += 1
            ty = self.parse_type()
            self.expect(")")
            return A.Cast(ty, self.unary(), pos=self.pos(t))
        return self.postfix()

    def _cast_ahead(self):
        nxt = self.peek()
        if nxt.kind == "kw" and nxt.text in ("int", "float", "double", "bool", "struct"):
            return True
        return nxt.kind == "id" and nxt.text in self.structs and self.peek(2).text == "*"

    def postfix(self):
        e = self.primary()
        while self.at("->"):
            t = self.tok
            self.i += 1
            e = A.FieldLoad(e, self.ident(), pos=self.pos(t))
        return e

    def primary(self):
        t = self.tok
        p = self.pos(t)
        if t.kind == "int":
            self.i += 1
            return A.IntLit(wrap32(int(t.text)), pos=p)
        if t.kind == "hex":
            self.i += 1
            return A.IntLit(wrap32(int(t.text, 16)), pos=p)
        if t.kind == "float":
            self.i += 1
            return A.FloatLit(float(t.text), pos=p)
        if self.accept("true"):
            return A.BoolLit(True, pos=p)
        if self.accept("false"):
            return A.BoolLit(False, pos=p)
        if self.accept("null") or self.accept("NULL"):
            return A.NullLit(pos=p)
        if self.at("malloc") or self.at("fresh"):
            kw = self.tok.text
            self.i += 1
            self.expect("(")
            self.accept("struct")
            name = self.ident()
            self.expect(")")
            return A.Malloc(name, pos=p) if kw == "malloc" else A.Fresh(name, pos=p)
        if self.accept("choose"):
            self.expect("(")
            cases = []
            while True:
                e = self.unary()
                if not isinstance(e, A.IntLit):
                    self.error("an integer literal", t)
                cases.append(e.value)
                if self.accept(")"):
                    break
                self.expect(",")
            return A.Choose(tuple(cases), pos=p)
        if t.kind == "id":
            self.i += 1
            if self.accept("("):
                args = []
                if not self.accept(")"):
                    while True:
                        args.append(self.expr())
                        if self.accept(")"):
                            break
                        self.expect(",")
                return A.Call(t.text, tuple(args), pos=p)
            return A.Var(t.text, pos=p)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        self.error("an expression")


# ---------------------------------------------------------------- sort checking

class _Checker:
    """Computes expression types, inserts int->float promotions and makes every
    condition explicitly boolean.  Raises SortError on ill-typed code."""

    def __init__(self, structs, procs):
        self.structs = {s.name: s for s in structs}
        self.sigs = {p.name: p for p in procs}

    def fail(self, msg, node):
        pos = getattr(node, "pos", None) or (None, None)
        raise SortError(msg, *pos)

    def check_proc(self, proc):
        env = {}
        for prm in proc.params:
            self.check_type(prm.type, proc)
            if prm.name in env:
                self.fail(f"duplicate parameter {prm.name}", proc)
            env[prm.name] = prm.type
        self.ret = proc.ret
        body = self.block(proc.body, env)
        return A.Procedure(proc.ret, proc.name, proc.params, body, pos=proc.pos)

    def check_type(self, ty, node):
        if ty.kind == "ptr" and ty.record not in self.structs:
            self.fail(f"unknown record type {ty.record}", node)

    def block(self, stmts, env):
        return tuple(self.stmt(s, env) for s in stmts)

    def stmt(self, s, env):
        if isinstance(s, A.Decl):
            self.check_type(s.type, s)
            if s.type.kind == "void":
                self.fail("void variable", s)
            if s.name in env:
                self.fail(f"redeclaration of {s.name}", s)
            init = None if s.init is None else self.coerce(s.init, env, s.type, s)
            env[s.name] = s.type
            return A.Decl(s.type, s.name, init, pos=s.pos)
        if isinstance(s, A.Assign):
            target, tty = self.expr(s.target, env)
            value = self.coerce(s.value, env, tty, s)
            return A.Assign(target, value, pos=s.pos)
        if isinstance(s, A.If):
            return A.If(self.cond(s.cond, env), self.block(s.then, env),
                        self.block(s.other, env), s.sid, pos=s.pos)
        if isinstance(s, A.While):
            return A.While(self.cond(s.cond, env), self.block(s.body, env), s.sid, pos=s.pos)
        if isinstance(s, A.Return):
            if s.value is None:
                if self.ret.kind != "void":
                    self.fail("missing return value", s)
                return s
            if self.ret.kind == "void":
                self.fail("void procedure returns a value", s)
            return A.Return(self.coerce(s.value, env, self.ret, s), pos=s.pos)
        if isinstance(s, A.ExprStmt):
            if not isinstance(s.expr, A.Call):
                self.fail("expression statement must be a call", s)
            e, _ = self.expr(s.expr, env, allow_void=True)
            return A.ExprStmt(e, pos=s.pos)
        if isinstance(s, A.Assume):
            return A.Assume(self.cond(s.cond, env), pos=s.pos)
        if isinstance(s, A.Assert):
            return A.Assert(self.cond(s.cond, env), s.sid, pos=s.pos)
        if isinstance(s, A.Havoc):
            if s.name not in env:
                self.fail(f"havoc of undeclared variable {s.name}", s)
            return s
        if isinstance(s, A.Emit):
            return A.Emit(tuple(self.expr(v, env)[0] for v in s.values), pos=s.pos)
        if isinstance(s, A.Bomb):
            return s
        if isinstance(s, A.Fragment):
            return A.Fragment(s.label, self.block(s.body, env), pos=s.pos)
        raise AssertionError(s)

    # -- expressions
    def cond(self, e, env):
        e, ty = self.expr(e, env)
        return self.to_bool(e, ty)

    def to_bool(self, e, ty):
        if ty.kind == "bool":
            return e
        if ty.kind == "int":
            return A.Binary("!=", e, A.IntLit(0), pos=e.pos)
        if ty.kind == "float":
            return A.Binary("!=", e, A.FloatLit(0.0), pos=e.pos)
        if ty.kind == "ptr":
            return A.Binary("!=", e, A.NullLit(), pos=e.pos)
        self.fail(f"cannot use {ty} as a condition", e)

    def coerce(self, e, env, want, node):
        e, ty = self.expr(e, env)
        return self.convert(e, ty, want, node)

    def convert(self, e, ty, want, node):
        if ty == want:
            return e
        if want.kind == "float" and ty.kind == "int":
            return self.promote(e)
        if want.kind == "ptr" and ty.kind == "ptr" and ty.record is None:
            return e
        if want.kind == "bool" and ty.kind in ("int", "ptr"):
            return self.to_bool(e, ty)
        self.fail(f"expected {want}, got {ty}", node)

    @staticmethod
    def promote(e):
        if isinstance(e, A.IntLit):
            return A.FloatLit(float(e.value), pos=e.pos)
        return A.Cast(A.FLOAT, e, pos=e.pos)

    def unify_numeric(self, l, lt, r, rt, node):
        if lt == rt:
            return l, r, lt
        if {lt.kind, rt.kind} == {"int", "float"}:
            if lt.kind == "int":
                l = self.promote(l)
            else:
                r = self.promote(r)
            return l, r, A.FLOAT
        self.fail(f"operand sorts {lt} and {rt} do not match", node)

    def expr(self, e, env, allow_void=False):
        if isinstance(e, A.IntLit):
            return e, A.INT
        if isinstance(e, A.FloatLit):
            return e, A.FLOAT
        if isinstance(e, A.BoolLit):
            return e, A.BOOL
        if isinstance(e, A.NullLit):
            return e, A.Type("ptr", None)
        if isinstance(e, A.Var):
            if e.name not in env:
                self.fail(f"undeclared variable {e.name}", e)
            return e, env[e.name]
        if isinstance(e, A.FieldLoad):
            base, bt = self.expr(e.base, env)
            if bt.kind != "ptr" or bt.record is None:
                self.fail("field access on a non-pointer", e)
            fty = self.structs[bt.record].field_type(e.name)
            if fty is None:
                self.fail(f"record {bt.record} has no field {e.name}", e)
            return A.FieldLoad(base, e.name, pos=e.pos), fty
        if isinstance(e, A.Unary):
            operand, ty = self.expr(e.operand, env)
            if e.op == "!":
                return A.Unary("!", self.to_bool(operand, ty), pos=e.pos), A.BOOL
            if e.op == "-" and ty.is_numeric:
                return A.Unary("-", operand, pos=e.pos), ty
            if e.op == "~" and ty.kind == "int":
                return A.Unary("~", operand, pos=e.pos), ty
            self.fail(f"bad operand {ty} for unary {e.op}", e)
        if isinstance(e, A.Binary):
            return self.binary(e, env)
        if isinstance(e, A.Cond):
            test = self.cond(e.test, env)
            then, tt = self.expr(e.then, env)
            other, ot = self.expr(e.other, env)
            if tt.kind == "ptr" and ot.kind == "ptr":
                rty = tt if tt.record is not None else ot
                if tt.record and ot.record and tt.record != ot.record:
                    self.fail("conditional arms point to different records", e)
                return A.Cond(test, then, other, pos=e.pos), rty
            if tt.is_numeric and ot.is_numeric:
                then, other, rty = self.unify_numeric(then, tt, other, ot, e)
                return A.Cond(test, then, other, pos=e.pos), rty
            if tt == ot:
                return A.Cond(test, then, other, pos=e.pos), tt
            self.fail("conditional arms have different sorts", e)
        if isinstance(e, A.Call):
            return self.call(e, env, allow_void)
        if isinstance(e, A.Cast):
            operand, ty = self.expr(e.operand, env)
            if e.to == ty:
                return A.Cast(e.to, operand, pos=e.pos), ty
            if e.to.is_numeric and (ty.is_numeric or ty.kind == "bool"):
                return A.Cast(e.to, operand, pos=e.pos), e.to
            self.fail(f"cannot cast {ty} to {e.to}", e)
        if isinstance(e, (A.Malloc, A.Fresh)):
            if e.record not in self.structs:
                self.fail(f"unknown record type {e.record}", e)
            return e, A.ptr(e.record)
        if isinstance(e, A.Choose):
            if not e.cases:
                self.fail("choose needs at least one case", e)
            return e, A.INT
        raise AssertionError(e)

    def binary(self, e, env):
        op = e.op
        if op in ("&&", "||"):
            l, lt = self.expr(e.left, env)
            r, rt = self.expr(e.right, env)
            return A.Binary(op, self.to_bool(l, lt), self.to_bool(r, rt), pos=e.pos), A.BOOL
        l, lt = self.expr(e.left, env)
        r, rt = self.expr(e.right, env)
        if op in ("==", "!="):
            if lt.kind == "ptr" and rt.kind == "ptr":
                if lt.record and rt.record and lt.record != rt.record:
                    self.fail("comparing pointers to different records", e)
                return A.Binary(op, l, r, pos=e.pos), A.BOOL
            if lt.kind == "bool" and rt.kind == "bool":
                return A.Binary(op, l, r, pos=e.pos), A.BOOL
            if lt.is_numeric and rt.is_numeric:
                l, r, _ = self.unify_numeric(l, lt, r, rt, e)
                return A.Binary(op, l, r, pos=e.pos), A.BOOL
            self.fail(f"cannot compare {lt} with {rt}", e)
        if op in ("<", "<=", ">", ">="):
            if not (lt.is_numeric and rt.is_numeric):
                self.fail(f"ordering needs numbers, got {lt} and {rt}", e)
            l, r, _ = self.unify_numeric(l, lt, r, rt, e)
            return A.Binary(op, l, r, pos=e.pos), A.BOOL
        if op in ("+", "-", "*", "/"):
            if not (lt.is_numeric and rt.is_numeric):
                self.fail(f"arithmetic needs numbers, got {lt} and {rt}", e)
            l, r, ty = self.unify_numeric(l, lt, r, rt, e)
            return A.Binary(op, l, r, pos=e.pos), ty
        if op in ("%", "&", "|", "^", "<<", ">>"):
            if lt.kind != "int" or rt.kind != "int":
                self.fail(f"operator {op} needs int operands, got {lt} and {rt}", e)
            return A.Binary(op, l, r, pos=e.pos), A.INT
        raise AssertionError(op)

    def call(self, e, env, allow_void):
        if e.name in INTRINSICS:
            arg_sorts, res = INTRINSICS[e.name]
            if len(e.args) != len(arg_sorts):
                self.fail(f"{e.name} takes {len(arg_sorts)} argument(s)", e)
            args = tuple(self.coerce(a, env, A.Type(k), e) for a, k in zip(e.args, arg_sorts))
            return A.Call(e.name, args, pos=e.pos), A.Type(res)
        proc = self.sigs.get(e.name)
        if proc is None:
            self.fail(f"call to undeclared procedure {e.name}", e)
        if len(e.args) != len(proc.params):
            self.fail(f"{e.name} takes {len(proc.params)} argument(s)", e)
        args = []
        for a, prm in zip(e.args, proc.params):
            if prm.ref and not isinstance(a, A.Var):
                self.fail(f"ref parameter {prm.name} needs a variable argument", e)
            args.append(self.coerce(a, env, prm.type, e))
        if proc.ret.kind == "void" and not allow_void:
            self.fail(f"void procedure {e.name} used as a value", e)
        return A.Call(e.name, tuple(args), pos=e.pos), proc.ret


def _pick_entry(procs):
    names = [p.name for p in procs]
    if "main" in names:
        return "main"
    for p in procs:
        if any(prm.symbolic for prm in p.params):
            return p.name
    return names[-1]


def parse_program(source: str) -> A.Program:
    """Parse and sort-check MiniC ``source`` into a Program."""
    parser = _Parser(source)
    structs, procs = parser.program()
    if not procs:
        tok = parser.tok
        raise MiniCSyntaxError("program declares no procedure", tok.offset,
                               tok.line, tok.col, "a procedure declaration")
    seen = set()
    for p in procs:
        if p.name in seen or p.name in INTRINSICS:
            raise SortError(f"duplicate procedure {p.name}", *(p.pos or (None, None)))
        seen.add(p.name)
    checker = _Checker(structs, procs)
    checked = tuple(checker.check_proc(p) for p in procs)
    labels = set()
    for p in checked:
        for s in A.walk_stmts(p.body):
            if isinstance(s, A.Fragment):
                if s.label in labels:
                    raise SortError(f"fragment label @{s.label} used twice", *(s.pos or (None, None)))
                labels.add(s.label)
    return A.Program(tuple(structs), checked, _pick_entry(checked))


def check_program(program: A.Program) -> A.Program:
    """Re-run sort checking on a program built by a rewriting pass."""
    checker = _Checker(program.structs, program.procs)
    procs = tuple(checker.check_proc(p) for p in program.procs)
    return A.Program(program.structs, procs, program.entry)
