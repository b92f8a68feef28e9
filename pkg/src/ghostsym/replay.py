"""Replay of candidate inputs on the original program.

Nothing found with ghost code counts until the original program, run
concretely on the realized input, reaches the claimed branch.  A run that
faults still confirms every branch outcome recorded before the fault (a
failing assert is itself a branch outcome).

Exact rationals and IEEE doubles can disagree on a guard that the model
satisfies with almost no slack.  ``near_miss`` locates the first branch where
the replay left the symbolic path and reports the model's slack on it;
``tighten`` turns that into a stronger conjunct for one retry.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional, Tuple

from .errors import RuntimeFault, StepBudgetExceeded
from .minilang import ast as A
from .minilang.interp import ConcreteState, exec_program
from .symcore import REAL, App, evaluate, mk_arith, mk_le, real

NEAR_MISS_REL = 1e-6


@dataclass
class NearMiss:
    site: str
    conjunct: Any          # the pc conjunct the model satisfied but doubles did not
    gap: Fraction          # the model's slack on that conjunct


@dataclass
class Confirmed:
    trace: Tuple[Tuple[str, bool], ...]
    ret: Any = None
    fault: Optional[str] = None

    def __bool__(self):
        return True


@dataclass
class Rejected:
    reason: str
    trace: Tuple[Tuple[str, bool], ...] = ()
    fault: Optional[str] = None
    near_miss: Optional[NearMiss] = None

    def __bool__(self):
        return False


def parse_target(target):
    """``"p#3"`` (taken), ``"p#3:F"`` / ``"p#3:T"`` or a ``(site, bool)`` pair."""
    if isinstance(target, tuple):
        return str(target[0]), bool(target[1])
    text = str(target)
    if ":" in text:
        site, pol = text.rsplit(":", 1)
        return site, pol.strip().upper() in ("T", "TRUE", "1")
    return text, True


def run_original(program: A.Program, input: ConcreteState, budget: Optional[int] = None):
    """(trace, ret, fault message) of a concrete run."""
    kw = {} if budget is None else {"budget": budget}
    try:
        out = exec_program(program, input.copy(), **kw)
        return out.trace, out.ret, None
    except RuntimeFault as exc:
        return getattr(exc, "trace", ()), None, str(exc)
    except StepBudgetExceeded as exc:
        return getattr(exc, "trace", ()), None, str(exc)


def confirm(program: A.Program, input: ConcreteState, target, *, budget: Optional[int] = None):
    """Confirmed(trace) iff running ``program`` on ``input`` hits ``target``."""
    site, polarity = parse_target(target)
    if "#" in site and not program.has_proc(site.split("#", 1)[0]):
        return Rejected(f"no procedure for site {site}")
    missing = [p.name for p in program.proc(program.entry).params if p.name not in input.store]
    if missing:
        return Rejected(f"input does not bind {', '.join(missing)}")
    trace, ret, fault = run_original(program, input, budget)
    if (site, polarity) in trace:
        return Confirmed(tuple(trace), ret, fault)
    why = f"trace misses {site}:{'T' if polarity else 'F'}"
    if fault:
        why += f" ({fault})"
    return Rejected(why, tuple(trace), fault)


def _comparison(c):
    """(lhs, rhs, strict) with the conjunct meaning lhs < rhs (or <=)."""
    if not isinstance(c, App):
        return None
    if c.op in ("<", "<="):
        a, b = c.args
        return a, b, c.op == "<"
    if c.op == "not" and isinstance(c.args[0], App) and c.args[0].op in ("<", "<="):
        a, b = c.args[0].args
        return b, a, c.args[0].op == "<="
    return None


def near_miss(state, model, trace) -> Optional[NearMiss]:
    """The real-valued guard where ``trace`` first leaves ``state.trace``,
    if the model satisfies it with relative slack below NEAR_MISS_REL."""
    for i, (want, got) in enumerate(zip(state.trace, trace)):
        if want == got:
            continue
        if want[0] != got[0] or i >= len(state.trace_pc):
            return None
        before = state.trace_pc[i - 1] if i else 0
        if state.trace_pc[i] <= before:      # a concrete guard added no conjunct
            return None
        c = state.pc[state.trace_pc[i] - 1]
        cmp = _comparison(c)
        if cmp is None or cmp[0].sort != REAL:
            return None
        lhs = Fraction(evaluate(cmp[0], model, default=True))
        rhs = Fraction(evaluate(cmp[1], model, default=True))
        gap = rhs - lhs
        scale = max(Fraction(1), abs(lhs), abs(rhs))
        if gap < 0 or gap > scale * Fraction(NEAR_MISS_REL):
            return None
        return NearMiss(want[0], c, gap)
    return None


def tighten(nm: NearMiss, factor: int = 2):
    """A conjunct demanding ``factor`` times the observed slack on the guard."""
    lhs, rhs, _ = _comparison(nm.conjunct)
    margin = max(nm.gap, Fraction(1, 10 ** 12)) * factor
    return mk_le(mk_arith("+", lhs, real(margin)), rhs)


__all__ = ["Confirmed", "Rejected", "NearMiss", "confirm", "parse_target", "run_original",
           "near_miss", "tighten"]
