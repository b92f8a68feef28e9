"""SMT-LIB 2 text for terms, the ``hi_bits`` lowering, and model parsing."""

from __future__ import annotations

import re
from fractions import Fraction

from .minilang.values import double_from_hi
from .symcore import (ADDR, BOOL, BV32, REAL, App, Lit, Sym, boolean, has_op, mk_and,
                      mk_ite, mk_lt, mk_neg, mk_not, mk_or, real)

ADDR_BITS = 16
_SIMPLE_SYMBOL = re.compile(r"^[A-Za-z_][A-Za-z0-9_.]*$")
_RESERVED = {"true", "false", "and", "or", "not", "ite", "let", "forall", "exists",
             "assert", "par", "as", "_", "!"}


class NotSerializable(Exception):
    """The term contains something SMT-LIB cannot express (e.g. inf literals)."""


def symbol_text(name: str) -> str:
    if _SIMPLE_SYMBOL.match(name) and name not in _RESERVED:
        return name
    return "|" + name.replace("|", "_").replace("\\", "_") + "|"


def sort_text(sort: str) -> str:
    return {BV32: "(_ BitVec 32)", REAL: "Real", BOOL: "Bool",
            ADDR: f"(_ BitVec {ADDR_BITS})"}[sort]


def _real_text(v: Fraction) -> str:
    if not isinstance(v, Fraction):
        raise NotSerializable(f"non-finite real literal {v}")
    num, den = abs(v.numerator), v.denominator
    body = f"{num}.0" if den == 1 else f"(/ {num}.0 {den}.0)"
    return f"(- {body})" if v < 0 else body


def lit_text(t: Lit) -> str:
    if t.sort == BV32:
        return f"(_ bv{t.value & 0xFFFFFFFF} 32)"
    if t.sort == ADDR:
        return f"(_ bv{t.value & ((1 << ADDR_BITS) - 1)} {ADDR_BITS})"
    if t.sort == BOOL:
        return "true" if t.value else "false"
    return _real_text(t.value)


_OPS = {"bvadd", "bvsub", "bvmul", "bvsdiv", "bvsrem", "bvand", "bvor", "bvxor",
        "bvneg", "bvnot", "bvslt", "bvsle", "+", "-", "*", "/", "<", "<=", "=",
        "not", "and", "or", "ite", "=>"}


def term_text(t) -> str:
    out = []

    def go(u):
        if isinstance(u, Sym):
            out.append(symbol_text(u.name))
        elif isinstance(u, Lit):
            out.append(lit_text(u))
        elif u.op in ("bvshl", "bvashr"):
            out.append(f"({u.op} ")
            go(u.args[0])
            out.append(" (bvand ")
            go(u.args[1])
            out.append(" (_ bv31 32)))")
        elif u.op == "neg":
            out.append("(- ")
            go(u.args[0])
            out.append(")")
        elif u.op == "int2real":
            out.append("(to_real (let ((n (bv2nat ")
            go(u.args[0])
            out.append("))) (ite (>= n 2147483648) (- n 4294967296) n)))")
        elif u.op in _OPS:
            out.append(f"({u.op}")
            for a in u.args:
                out.append(" ")
                go(a)
            out.append(")")
        else:
            raise NotSerializable(f"operator {u.op} has no SMT-LIB counterpart")

    go(t)
    return "".join(out)


# ------------------------------------------------------------------ hi_bits lowering

_FINITE_LIMIT = 0x7FF00000


def _masked_lt(mag, k: int):
    """hi(|t|) < k, where ``mag`` is |t| as a real term."""
    if k <= 0:
        return boolean(False)
    if k >= _FINITE_LIMIT:
        return boolean(True)
    return mk_lt(mag, real(double_from_hi(k)))


def _hi_term_parts(term):
    """Match ``hi_bits(t) & 0x7fffffff`` or bare ``hi_bits(t)``; return (t, masked)."""
    if isinstance(term, App) and term.op == "hi_bits":
        return term.args[0], False
    if isinstance(term, App) and term.op == "bvand":
        a, b = term.args
        for x, m in ((a, b), (b, a)):
            if isinstance(m, Lit) and m.value == 0x7FFFFFFF and isinstance(x, App) \
                    and x.op == "hi_bits":
                return x.args[0], True
    return None


def _lower_lt(term, k: int, masked: bool):
    """hi-word expression < k (signed compare) as a formula over reals."""
    mag = mk_ite(mk_lt(term, real(0)), mk_neg(term), term)
    if masked:
        return _masked_lt(mag, k)
    # unmasked: negative t has the sign bit set, i.e. hi = masked - 2^31
    return mk_ite(mk_lt(term, real(0)), _masked_lt(mag, k + (1 << 31)), _masked_lt(mag, k))


def _lower_atom(t):
    if not isinstance(t, App) or t.op not in ("bvslt", "bvsle", "="):
        return None
    a, b = t.args
    if a.sort != BV32:
        return None
    for left, right, flipped in ((a, b, False), (b, a, True)):
        parts = _hi_term_parts(left)
        if parts is None or not isinstance(right, Lit):
            continue
        x, masked = parts
        k = right.value
        lt = lambda c: _lower_lt(x, c, masked)  # noqa: E731
        if t.op == "=":
            return mk_and(lt(k + 1), mk_not(lt(k)))
        if not flipped:  # H < k  /  H <= k
            return lt(k) if t.op == "bvslt" else lt(k + 1)
        # k < H  /  k <= H
        return mk_not(lt(k + 1)) if t.op == "bvslt" else mk_not(lt(k))
    return None


def lower_hi_bits(t):
    """Rewrite comparisons of (masked) ``hi_bits`` against constants into
    magnitude bounds on the real argument.

    For non-negative doubles the IEEE bit pattern is monotone in the value, so
    ``hi(|x|) >= K`` holds exactly when ``|x| >= D(K)`` with ``D(K)`` the least
    double whose high word is ``K``.  High words at or beyond the inf/nan
    range are unreachable for real-valued (finite) arguments.
    """
    if not has_op(t, ("hi_bits",)):
        return t

    def go(u):
        if not isinstance(u, App):
            return u
        if u.sort == BOOL:
            low = _lower_atom(u)
            if low is not None:
                return low
        args = tuple(go(a) for a in u.args)
        if args == u.args:
            return u
        if u.op == "and":
            return mk_and(*args)
        if u.op == "or":
            return mk_or(*args)
        if u.op == "not":
            return mk_not(args[0])
        return App(u.op, args, u.sort)

    return go(t)


# ------------------------------------------------------------------ logic choice

def _nonlinear(t) -> bool:
    stack = [t]
    while stack:
        u = stack.pop()
        if isinstance(u, App):
            if u.op == "*" and not any(isinstance(a, Lit) for a in u.args):
                return True
            if u.op == "/" and not isinstance(u.args[1], Lit):
                return True
            stack.extend(u.args)
    return False


def choose_logic(terms, symbols) -> str | None:
    """QF_BV for bitvector-only queries, QF_LRA/QF_NRA for real-only ones,
    ``None`` (solver default, i.e. all logics) for mixtures."""
    sorts = {s.sort for s in symbols}
    has_conv = any(has_op(t, ("int2real",)) for t in terms)
    if has_conv:
        return None
    real_part = REAL in sorts or any(_has_real_lit(t) for t in terms)
    bv_part = bool(sorts & {BV32, ADDR}) or any(_has_bv(t) for t in terms)
    if real_part and bv_part:
        return None
    if real_part:
        return "QF_NRA" if any(_nonlinear(t) for t in terms) else "QF_LRA"
    return "QF_BV"


def _has_real_lit(t):
    stack = [t]
    while stack:
        u = stack.pop()
        if getattr(u, "sort", None) == REAL:
            return True
        if isinstance(u, App):
            stack.extend(u.args)
    return False


def _has_bv(t):
    stack = [t]
    while stack:
        u = stack.pop()
        if getattr(u, "sort", None) in (BV32, ADDR):
            return True
        if isinstance(u, App):
            stack.extend(u.args)
    return False


# ------------------------------------------------------------------ s-expressions

_SEXP_TOKEN = re.compile(r'\s*(?:(\()|(\))|("(?:[^"]|"")*")|(\|[^|]*\|)|([^\s()|"]+))')


def parse_sexprs(text: str):
    """Parse a sequence of s-expressions into nested Python lists of str."""
    stack = [[]]
    pos = 0
    while pos < len(text):
        m = _SEXP_TOKEN.match(text, pos)
        if m is None:
            if text[pos:].strip() == "":
                break
            raise ValueError(f"bad s-expression near {text[pos:pos + 30]!r}")
        pos = m.end()
        if m.group(1):
            stack.append([])
        elif m.group(2):
            if len(stack) == 1:
                raise ValueError("unbalanced ')'")
            done = stack.pop()
            stack[-1].append(done)
        else:
            tok = m.group(3) or m.group(4) or m.group(5)
            if tok.startswith("|") and tok.endswith("|"):
                tok = tok[1:-1]
            stack[-1].append(tok)
    if len(stack) != 1:
        raise ValueError("unbalanced '('")
    return stack[0]


def _signed(v: int, bits: int) -> int:
    return v - (1 << bits) if v >= 1 << (bits - 1) else v


def parse_value(sexp, sort):
    """Decode a model value printed by the solver for a symbol of ``sort``."""
    if sort in (BV32, ADDR):
        bits = 32 if sort == BV32 else ADDR_BITS
        if isinstance(sexp, str):
            if sexp.startswith("#x"):
                v = int(sexp[2:], 16)
            elif sexp.startswith("#b"):
                v = int(sexp[2:], 2)
            else:
                raise ValueError(sexp)
        elif isinstance(sexp, list) and len(sexp) == 3 and sexp[0] == "_" \
                and sexp[1].startswith("bv"):
            v = int(sexp[1][2:])
        else:
            raise ValueError(sexp)
        return _signed(v, bits) if sort == BV32 else v
    if sort == BOOL:
        if sexp in ("true", "false"):
            return sexp == "true"
        raise ValueError(sexp)
    return _parse_real(sexp)


def _parse_real(sexp) -> Fraction:
    if isinstance(sexp, str):
        if sexp.endswith("?"):
            raise ValueError("approximate real value")
        return Fraction(sexp)
    head = sexp[0]
    if head == "-" and len(sexp) == 2:
        return -_parse_real(sexp[1])
    if head == "/" and len(sexp) == 3:
        return _parse_real(sexp[1]) / _parse_real(sexp[2])
    if head == "-" and len(sexp) == 3:
        return _parse_real(sexp[1]) - _parse_real(sexp[2])
    if head == "+" and len(sexp) >= 2:
        return sum((_parse_real(x) for x in sexp[1:]), Fraction(0))
    raise ValueError(f"unsupported real value {sexp!r}")
