"""Logical terms, formulas, symbolic states and their realization.

Terms are immutable trees over four sorts:

* ``bv32``  -- MiniC ``int``, 32-bit two's complement bitvectors
* ``real``  -- MiniC ``float``, exact rationals in formulas
* ``bool``
* ``addr``  -- heap addresses; 0 is null

A formula is just a ``bool``-sorted term; path conditions are kept as tuples
of conjuncts so that prefix/suffix decomposition can split them by position.

The ``mk_*`` constructors fold constants and apply a few local rewrites, which
keeps path conditions small.  ``substitute`` is purely syntactic.
"""

from __future__ import annotations

import contextlib
import contextvars
import math
import re
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterable, Optional, Tuple

from .errors import SortMismatch, UnboundSymbol, UnsatAssignment
from .minilang.interp import ConcreteState
from .minilang.values import (FLOAT_INTRINSICS, hi_bits, int_div, int_rem, int_shl,
                              int_shr, wrap32)

BV32 = "bv32"
REAL = "real"
BOOL = "bool"
ADDR = "addr"
SORTS = (BV32, REAL, BOOL, ADDR)

# Operations the SMT backend cannot express; formulas containing them are
# answered UNKNOWN unless a lowering in the solver module removes them.
HOSTILE_OPS = frozenset({"sin", "cos", "tan", "atan", "exp", "log", "sqrt",
                         "hi_bits", "real2int"})


@dataclass(frozen=True)
class Sym:
    name: str
    sort: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Lit:
    value: Any
    sort: str

    def __str__(self):
        if self.sort == REAL and isinstance(self.value, Fraction):
            if self.value.denominator == 1:
                return f"{self.value.numerator}.0"
            return f"{float(self.value)!r}"
        if self.sort == ADDR:
            return "null" if self.value == 0 else f"@{self.value}"
        return str(self.value).lower() if self.sort == BOOL else str(self.value)


@dataclass(frozen=True)
class App:
    op: str
    args: Tuple[Any, ...]
    sort: str
    _hash: int = field(default=0, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((self.op, self.args, self.sort)))

    def __hash__(self):
        return self._hash

    def __str__(self):
        infix = {"bvadd": "+", "bvsub": "-", "bvmul": "*", "bvsdiv": "/", "bvsrem": "%",
                 "bvand": "&", "bvor": "|", "bvxor": "^", "bvshl": "<<", "bvashr": ">>",
                 "bvslt": "<", "bvsle": "<=", "+": "+", "-": "-", "*": "*", "/": "/",
                 "<": "<", "<=": "<=", "=": "==", "and": "&&", "or": "||"}
        if self.op in infix and len(self.args) >= 2:
            return "(" + f" {infix[self.op]} ".join(str(a) for a in self.args) + ")"
        if self.op == "not":
            return f"!{self.args[0]}"
        if self.op in ("bvneg", "neg"):
            return f"-{self.args[0]}"
        if self.op == "ite":
            c, a, b = self.args
            return f"({c} ? {a} : {b})"
        return f"{self.op}({', '.join(str(a) for a in self.args)})"


Term = Any  # Sym | Lit | App

TRUE = Lit(True, BOOL)
FALSE = Lit(False, BOOL)
NULL = Lit(0, ADDR)


def bv(v: int) -> Lit:
    return Lit(wrap32(int(v)), BV32)


def real(v) -> Lit:
    if isinstance(v, float):
        if math.isfinite(v):
            v = Fraction(v)
    elif not isinstance(v, Fraction):
        v = Fraction(v)
    return Lit(v, REAL)


def boolean(v) -> Lit:
    return TRUE if v else FALSE


def addr(v: int) -> Lit:
    return Lit(int(v), ADDR)


def lit(value, sort) -> Lit:
    return {BV32: bv, REAL: real, BOOL: boolean, ADDR: addr}[sort](value)


# ------------------------------------------------------------------ fresh names

class FreshNames:
    """Thread-safe counter handing out campaign-unique symbol names."""

    def __init__(self, prefix: str = ""):
        self.prefix = prefix
        self._n = 0
        self._lock = threading.Lock()

    def next(self, hint: str) -> str:
        with self._lock:
            self._n += 1
            n = self._n
        return f"{self.prefix}{hint}_{n}"


_GLOBAL_NAMES = FreshNames()
_current_names: contextvars.ContextVar = contextvars.ContextVar("ghostsym_names",
                                                                default=_GLOBAL_NAMES)
_HINT_RE = re.compile(r"[^A-Za-z0-9_]")


@contextlib.contextmanager
def naming_scope(prefix: str):
    """Route fresh_symbol through a private counter whose names start with ``prefix``."""
    token = _current_names.set(FreshNames(prefix))
    try:
        yield
    finally:
        _current_names.reset(token)


def fresh_symbol(sort: str, hint: str = "v") -> Sym:
    if sort not in SORTS:
        raise SortMismatch(f"unknown sort {sort!r}")
    hint = _HINT_RE.sub("_", hint) or "v"
    if hint[0].isdigit():
        hint = "v" + hint
    return Sym(_current_names.get().next(hint), sort)


# ------------------------------------------------------------------ traversal

def free_symbols(term, acc=None) -> Dict[str, Sym]:
    acc = {} if acc is None else acc
    stack = [term]
    while stack:
        t = stack.pop()
        if isinstance(t, Sym):
            acc[t.name] = t
        elif isinstance(t, App):
            stack.extend(t.args)
    return acc


def symbols_of(terms: Iterable) -> Dict[str, Sym]:
    acc: Dict[str, Sym] = {}
    for t in terms:
        free_symbols(t, acc)
    return acc


def has_op(term, ops) -> bool:
    stack = [term]
    while stack:
        t = stack.pop()
        if isinstance(t, App):
            if t.op in ops:
                return True
            stack.extend(t.args)
    return False


def is_hostile(term) -> bool:
    return has_op(term, HOSTILE_OPS)


# ------------------------------------------------------------------ evaluation

_DEFAULTS = {BV32: 0, REAL: Fraction(0), BOOL: False, ADDR: 0}


def _to_real(v):
    if isinstance(v, float):
        return Fraction(v) if math.isfinite(v) else v
    return v


def _real_fn(name, x):
    xf = float(x) if not isinstance(x, float) else x
    try:
        y = FLOAT_INTRINSICS[name](xf)
    except OverflowError:
        y = math.inf
    return _to_real(y)


def _apply(op, vals, sort):
    """Concrete meaning of a term operator (bitvectors signed, reals exact)."""
    if op == "bvadd":
        return wrap32(vals[0] + vals[1])
    if op == "bvsub":
        return wrap32(vals[0] - vals[1])
    if op == "bvmul":
        return wrap32(vals[0] * vals[1])
    if op == "bvsdiv":
        return -1 if vals[1] == 0 and vals[0] >= 0 else (1 if vals[1] == 0 else int_div(*vals))
    if op == "bvsrem":
        return vals[0] if vals[1] == 0 else int_rem(*vals)
    if op == "bvand":
        return wrap32(vals[0] & vals[1])
    if op == "bvor":
        return wrap32(vals[0] | vals[1])
    if op == "bvxor":
        return wrap32(vals[0] ^ vals[1])
    if op == "bvshl":
        return int_shl(vals[0], vals[1])
    if op == "bvashr":
        return int_shr(vals[0], vals[1])
    if op == "bvneg":
        return wrap32(-vals[0])
    if op == "bvnot":
        return wrap32(~vals[0])
    if op in ("bvslt", "<"):
        return vals[0] < vals[1]
    if op in ("bvsle", "<="):
        return vals[0] <= vals[1]
    if op == "+":
        return vals[0] + vals[1]
    if op == "-":
        return vals[0] - vals[1]
    if op == "*":
        a, b = vals
        if (a == 0 or b == 0) and not (isinstance(a, float) or isinstance(b, float)):
            return Fraction(0)
        return a * b
    if op == "/":
        a, b = vals
        if b == 0:
            # SMT-LIB leaves x/0 unspecified; pick 0 like z3's default model.
            return Fraction(0)
        return a / b
    if op == "neg":
        return -vals[0]
    if op == "=":
        return vals[0] == vals[1]
    if op == "not":
        return not vals[0]
    if op == "and":
        return all(vals)
    if op == "or":
        return any(vals)
    if op == "=>":
        return (not vals[0]) or vals[1]
    if op == "ite":
        return vals[1] if vals[0] else vals[2]
    if op == "int2real":
        return Fraction(vals[0])
    if op == "real2int":
        x = vals[0]
        if isinstance(x, float):
            return -(1 << 31)
        return wrap32(int(x))  # int() of a Fraction truncates toward zero
    if op == "hi_bits":
        x = vals[0]
        return hi_bits(float(x) if not isinstance(x, float) else x)
    if op in FLOAT_INTRINSICS:
        return _real_fn(op, vals[0])
    raise ValueError(f"unknown operator {op}")


def evaluate(term, assignment, default: bool = False):
    """Value of ``term`` under ``assignment`` (a mapping name -> value).

    With ``default`` unbound symbols take the sort's zero, mirroring model
    completion; otherwise they raise UnboundSymbol.
    """
    cache = {}

    def ev(t):
        if isinstance(t, Lit):
            return t.value
        if isinstance(t, Sym):
            if t.name in assignment:
                v = assignment[t.name]
                return _to_real(v) if t.sort == REAL else v
            if default:
                return _DEFAULTS[t.sort]
            raise UnboundSymbol(f"symbol {t.name} is not bound by the assignment")
        key = id(t)
        if key in cache:
            return cache[key]
        op = t.op
        if op == "and":
            r = True
            for a in t.args:
                if not ev(a):
                    r = False
                    break
        elif op == "or":
            r = False
            for a in t.args:
                if ev(a):
                    r = True
                    break
        elif op == "ite":
            r = ev(t.args[1]) if ev(t.args[0]) else ev(t.args[2])
        else:
            r = _apply(op, [ev(a) for a in t.args], t.sort)
        cache[key] = r
        return r

    return ev(term)


def holds(formula, assignment, default=False) -> bool:
    return bool(evaluate(formula, assignment, default))


# ------------------------------------------------------------------ constructors

def _all_lit(args):
    return all(isinstance(a, Lit) for a in args)


def _fold(op, args, sort):
    if _all_lit(args):
        v = _apply(op, [a.value for a in args], sort)
        if sort == REAL:
            return Lit(_to_real(v), REAL)
        return Lit(v, sort)
    return App(op, tuple(args), sort)


def _same_sort(a, b, what):
    if a.sort != b.sort:
        raise SortMismatch(f"{what}: {a.sort} vs {b.sort}")


def mk_arith(op: str, a, b):
    """MiniC binary arithmetic on same-sorted operands (+ - * / % & | ^ << >>)."""
    _same_sort(a, b, op)
    if a.sort == BV32:
        name = {"+": "bvadd", "-": "bvsub", "*": "bvmul", "/": "bvsdiv", "%": "bvsrem",
                "&": "bvand", "|": "bvor", "^": "bvxor", "<<": "bvshl", ">>": "bvashr"}[op]
        if name in ("bvadd", "bvor", "bvxor", "bvshl", "bvashr", "bvsub") \
                and isinstance(b, Lit) and b.value == 0:
            return a
        if name == "bvmul" and isinstance(b, Lit) and b.value == 1:
            return a
        return _fold(name, (a, b), BV32)
    if a.sort == REAL:
        if op not in "+-*/":
            raise SortMismatch(f"operator {op} is not defined on reals")
        if op in "+-" and isinstance(b, Lit) and b.value == 0:
            return a
        return _fold(op, (a, b), REAL)
    raise SortMismatch(f"arithmetic on {a.sort}")


def mk_neg(a):
    if a.sort == BV32:
        return _fold("bvneg", (a,), BV32)
    if a.sort == REAL:
        return _fold("neg", (a,), REAL)
    raise SortMismatch("negation of a non-number")


def mk_bnot(a):
    return _fold("bvnot", (a,), BV32)


def mk_lt(a, b):
    _same_sort(a, b, "<")
    return _fold("bvslt" if a.sort == BV32 else "<", (a, b), BOOL)


def mk_le(a, b):
    _same_sort(a, b, "<=")
    return _fold("bvsle" if a.sort == BV32 else "<=", (a, b), BOOL)


def mk_eq(a, b):
    _same_sort(a, b, "=")
    if a == b:
        return TRUE
    return _fold("=", (a, b), BOOL)


def mk_not(a):
    if isinstance(a, Lit):
        return boolean(not a.value)
    if isinstance(a, App) and a.op == "not":
        return a.args[0]
    return App("not", (a,), BOOL)


def mk_and(*args):
    out = []
    for a in args:
        if isinstance(a, App) and a.op == "and":
            out.extend(a.args)
        elif isinstance(a, Lit):
            if not a.value:
                return FALSE
        else:
            out.append(a)
    seen = []
    for a in out:
        if a not in seen:
            seen.append(a)
    if not seen:
        return TRUE
    if len(seen) == 1:
        return seen[0]
    return App("and", tuple(seen), BOOL)


def mk_or(*args):
    out = []
    for a in args:
        if isinstance(a, App) and a.op == "or":
            out.extend(a.args)
        elif isinstance(a, Lit):
            if a.value:
                return TRUE
        else:
            out.append(a)
    if not out:
        return FALSE
    if len(out) == 1:
        return out[0]
    return App("or", tuple(out), BOOL)


def mk_implies(a, b):
    return mk_or(mk_not(a), b)


def mk_ite(c, a, b):
    _same_sort(a, b, "ite")
    if isinstance(c, Lit):
        return a if c.value else b
    if a == b:
        return a
    return App("ite", (c, a, b), a.sort)


def mk_int2real(a):
    return _fold("int2real", (a,), REAL)


def mk_real2int(a):
    return _fold("real2int", (a,), BV32)


def mk_fn(name, a):
    """Intrinsic application: transcendental functions, fabs and hi_bits."""
    if name == "fabs":
        return mk_ite(mk_lt(a, real(0)), mk_neg(a), a)
    if name == "hi_bits":
        return _fold("hi_bits", (a,), BV32)
    return _fold(name, (a,), REAL)


def mk_abs(a):
    zero = real(0) if a.sort == REAL else bv(0)
    return mk_ite(mk_lt(a, zero), mk_neg(a), a)


def conj(conjuncts) -> Any:
    return mk_and(*conjuncts)


# ------------------------------------------------------------------ substitution

def substitute(phi, x: Sym, t):
    """Replace every occurrence of symbol ``x`` in ``phi`` by ``t``.

    Terms have no binders, so capture cannot happen.  The rewrite is purely
    syntactic: ``(x > 0)[x := 5]`` is ``(5 > 0)``, not ``true``.
    """
    if x.sort != t.sort:
        raise SortMismatch(f"cannot substitute {t.sort} term for {x.sort} symbol {x.name}")

    def go(u):
        if isinstance(u, Sym):
            return t if u == x else u
        if isinstance(u, App):
            args = tuple(go(a) for a in u.args)
            return u if args == u.args else App(u.op, args, u.sort)
        return u

    return go(phi)


def substitute_all(phi, mapping: Dict[str, Any]):
    def go(u):
        if isinstance(u, Sym):
            return mapping.get(u.name, u)
        if isinstance(u, App):
            args = tuple(go(a) for a in u.args)
            return u if args == u.args else App(u.op, args, u.sort)
        return u
    return go(phi)


def simplify(term):
    """Re-run the folding constructors bottom-up."""
    if not isinstance(term, App):
        return term
    args = [simplify(a) for a in term.args]
    op = term.op
    if op == "and":
        return mk_and(*args)
    if op == "or":
        return mk_or(*args)
    if op == "not":
        return mk_not(args[0])
    if op == "ite":
        return mk_ite(*args)
    if op == "=":
        return mk_eq(*args)
    return _fold(op, args, term.sort)


# ------------------------------------------------------------------ assignments

class Assignment(dict):
    """A model: logical variable name -> concrete value."""

    def complete(self, terms: Iterable) -> "Assignment":
        """Copy bound on every symbol of ``terms`` (missing ones take the sort's zero)."""
        out = Assignment(self)
        for name, sym in symbols_of(terms).items():
            out.setdefault(name, _DEFAULTS[sym.sort])
        return out

    def restrict(self, names) -> "Assignment":
        return Assignment({n: self[n] for n in names if n in self})

    def models(self, formula) -> bool:
        return holds(formula, self)


# ------------------------------------------------------------------ states

@dataclass(frozen=True)
class CutRecord:
    """One pass through a havoced fragment.

    ``writes`` pairs each written variable with its havoc symbol, ``reads``
    pairs each read variable with its term at the cut, and ``pc_index`` is the
    number of path-condition conjuncts recorded before the cut.
    """
    label: str
    writes: Tuple[Tuple[str, Sym], ...]
    reads: Tuple[Tuple[str, Any], ...]
    pc_index: int


@dataclass
class SymbolicState:
    """Symbolic store, heap and path condition, plus execution bookkeeping.

    ``inputs`` and ``input_heap`` describe the initial state in terms of
    symbols; realizing them under a model of ``pc`` yields a concrete input
    for replay.  ``store`` and ``heap`` describe the current state.
    """
    store: Dict[str, Any] = field(default_factory=dict)
    heap: Dict[Any, Dict[str, Any]] = field(default_factory=dict)
    pc: Tuple[Any, ...] = ()
    cutlog: Tuple[CutRecord, ...] = ()
    trace: Tuple[Tuple[str, bool], ...] = ()
    trace_pc: Tuple[int, ...] = ()
    inputs: Dict[str, Any] = field(default_factory=dict)
    input_heap: Dict[Any, Dict[str, Any]] = field(default_factory=dict)
    status: str = "live"
    fault: Optional[str] = None
    ret: Any = None
    emitted: Tuple[tuple, ...] = ()

    @property
    def path_condition(self):
        return conj(self.pc)

    def all_terms(self):
        terms = list(self.pc) + list(self.store.values()) + list(self.inputs.values())
        for h in (self.heap, self.input_heap):
            for k, cell in h.items():
                terms.append(k)
                terms.extend(cell.values())
        return [t for t in terms if t is not None and not isinstance(t, (int, float, str))]


def _concrete(term, sort_hint, A):
    v = evaluate(term, A)
    if term.sort == REAL:
        return float(v)
    return v


def _realize_heap(heap, A):
    out = {}
    for key, cell in heap.items():
        a = evaluate(key, A)
        if a == 0:
            continue
        out[a] = {f: _concrete(t, None, A) for f, t in cell.items()}
    return out


def realize(state: SymbolicState, A, *, initial: bool = False) -> ConcreteState:
    """Evaluate the state's store and heap under model ``A``.

    With ``initial=True`` the entry inputs and initial heap are realized
    instead, producing a concrete input that can be replayed.
    """
    A = Assignment(A)
    if not holds(state.path_condition, A):
        raise UnsatAssignment("assignment falsifies the path condition")
    store_terms = state.inputs if initial else state.store
    heap_terms = state.input_heap if initial else state.heap
    store = {name: _concrete(t, None, A) for name, t in store_terms.items()}
    heap = _realize_heap(heap_terms, A)
    next_addr = max([1] + [a + 1 for a in heap])
    return ConcreteState(store=store, heap=heap, next_addr=next_addr)
