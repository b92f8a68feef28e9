"""Constraint solving over an SMT-LIB 2 child process.

One :class:`Solver` owns one backend process (``z3 -in`` by default, or the
command in ``GHOSTSYM_SMT_CMD``).  Every query is sent after a ``(reset)`` as
plain SMT-LIB: ``set-option :produce-models``, an optional ``set-logic``,
``declare-const`` per symbol, ``assert``, ``check-sat`` and ``get-value``.

Formulas containing solver-hostile operators (transcendental functions, raw
bit views of floats) are answered UNKNOWN without contacting the backend,
after the ``hi_bits`` lowering had its chance to remove them.

Optimization is reduced to repeated satisfiability checks:

* ``optimize`` bisects on the objective value (exact for bitvectors, to
  ``eps`` for reals),
* ``min_l1`` is ``optimize`` of ``|x - target|`` with an auxiliary distance,
* ``max_soft_equalities`` asks for at least ``k`` satisfied equalities for
  ``k = n, n-1, ...`` using selector booleans and a sequential counter.
"""

from __future__ import annotations

import enum
import logging
import math
import os
import select
import shlex
import shutil
import subprocess
import threading
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

from .errors import BackendError
from .smtlib import (NotSerializable, choose_logic, lower_hi_bits, parse_sexprs,
                     parse_value, sort_text, symbol_text, term_text)
from .symcore import (BOOL, BV32, FALSE, REAL, Assignment, App, Lit, Sym, TRUE, bv, conj,
                      evaluate, fresh_symbol, is_hostile, lit, mk_and, mk_eq, mk_implies,
                      mk_abs, mk_le, mk_not, mk_or, real, symbols_of)

log = logging.getLogger(__name__)

EPS_OPT = 1e-6
DEFAULT_TIMEOUT = 5.0
DEFAULT_RETRIES = 2
INT32_MIN, INT32_MAX = -(1 << 31), (1 << 31) - 1
_SENTINEL = "@@ghostsym-done"


class Status(enum.Enum):
    SAT = "sat"
    UNSAT = "unsat"
    UNKNOWN = "unknown"


SAT, UNSAT, UNKNOWN = Status.SAT, Status.UNSAT, Status.UNKNOWN


@dataclass
class CheckResult:
    status: Status
    model: Optional[Assignment] = None
    reason: str = ""

    def __bool__(self):
        return self.status is SAT

    @property
    def is_sat(self):
        return self.status is SAT

    @property
    def is_unsat(self):
        return self.status is UNSAT


@dataclass
class SolverStats:
    queries: int = 0
    backend_calls: int = 0
    hostile: int = 0
    timeouts: int = 0
    restarts: int = 0
    seconds: float = 0.0

    def as_dict(self):
        return dict(self.__dict__)


def default_command():
    env = os.environ.get("GHOSTSYM_SMT_CMD")
    if env:
        return shlex.split(env)
    z3 = shutil.which("z3")
    return [z3 or "z3", "-in"]


class _Backend:
    """A long-lived solver process spoken to over pipes."""

    def __init__(self, cmd):
        self.cmd = list(cmd)
        self.proc = None
        self.buf = b""

    def start(self):
        try:
            self.proc = subprocess.Popen(self.cmd, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                                         stderr=subprocess.STDOUT, bufsize=0)
        except OSError as exc:
            raise BackendError(f"cannot start solver {self.cmd!r}: {exc}") from exc
        self.buf = b""

    def stop(self):
        if self.proc is not None:
            try:
                self.proc.kill()
                self.proc.wait(timeout=2)
            except Exception:  # pragma: no cover - best effort cleanup
                pass
            for stream in (self.proc.stdin, self.proc.stdout):
                try:
                    stream.close()
                except Exception:  # pragma: no cover
                    pass
        self.proc = None

    def ask(self, script: str, timeout: float):
        """Send ``script`` and return the reply lines before the sentinel.

        Returns None on timeout (the process is killed)."""
        if self.proc is None or self.proc.poll() is not None:
            self.start()
        try:
            self.proc.stdin.write((script + f'\n(echo "{_SENTINEL}")\n').encode())
            self.proc.stdin.flush()
        except OSError as exc:
            self.stop()
            raise BackendError(f"solver pipe closed: {exc}") from exc
        deadline = time.monotonic() + timeout
        fd = self.proc.stdout.fileno()
        while True:
            idx = self.buf.find(_SENTINEL.encode())
            if idx >= 0:
                end = self.buf.find(b"\n", idx)
                reply = self.buf[:idx].decode(errors="replace")
                self.buf = self.buf[end + 1:] if end >= 0 else b""
                return [ln for ln in reply.splitlines() if ln.strip()]
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                self.stop()
                return None
            ready, _, _ = select.select([fd], [], [], remaining)
            if not ready:
                continue
            chunk = os.read(fd, 1 << 16)
            if not chunk:
                self.stop()
                raise BackendError("solver process exited unexpectedly")
            self.buf += chunk


class Solver:
    """Satisfiability and optimization front-end; not shared across threads."""

    def __init__(self, cmd=None, timeout: float = DEFAULT_TIMEOUT,
                 retries: int = DEFAULT_RETRIES, eps: float = EPS_OPT):
        self.cmd = list(cmd) if cmd else default_command()
        self.timeout = timeout
        self.retries = retries
        self.eps = eps
        self.stats = SolverStats()
        self._backend = _Backend(self.cmd)

    def close(self):
        self._backend.stop()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    # ------------------------------------------------------------ sat
    def check_sat(self, phi, extra_symbols: Iterable[Sym] = ()) -> CheckResult:
        """Decide ``phi`` (a formula or an iterable of conjuncts).

        A SAT answer carries a model binding every free symbol of ``phi`` (and
        of ``extra_symbols``) which has been re-checked by local evaluation.
        """
        if not isinstance(phi, (Sym, Lit, App)):
            phi = conj(list(phi))
        self.stats.queries += 1
        extra_symbols = list(extra_symbols)
        original = phi
        if isinstance(phi, Lit):
            if not phi.value:
                return CheckResult(UNSAT)
            if not extra_symbols:
                return CheckResult(SAT, Assignment())
        phi = lower_hi_bits(phi)
        if is_hostile(phi):
            self.stats.hostile += 1
            return CheckResult(UNKNOWN, reason="solver-hostile operator")
        symbols = dict(symbols_of([original, phi]))
        for s in extra_symbols:
            symbols[s.name] = s
        try:
            script, ordered = self._script(phi, symbols)
        except NotSerializable as exc:
            return CheckResult(UNKNOWN, reason=str(exc))
        result = self._run(script, ordered)
        if result.status is SAT:
            model = result.model.complete(symbols.values())
            if not _verify(original, model):
                return CheckResult(UNKNOWN, reason="model failed local re-verification")
            result.model = model
        return result

    def _script(self, phi, symbols):
        ordered = sorted(symbols.values(), key=lambda s: s.name)
        logic = choose_logic([phi], ordered)
        lines = ["(reset)", "(set-option :produce-models true)"]
        if logic:
            lines.append(f"(set-logic {logic})")
        for s in ordered:
            lines.append(f"(declare-const {symbol_text(s.name)} {sort_text(s.sort)})")
        lines.append(f"(assert {term_text(phi)})")
        lines.append("(check-sat)")
        return "\n".join(lines), ordered

    def _run(self, script, ordered) -> CheckResult:
        attempt = 0
        while True:
            try:
                return self._run_once(script, ordered)
            except BackendError as exc:
                attempt += 1
                self.stats.restarts += 1
                self._backend.stop()
                if attempt > self.retries:
                    raise
                log.warning("solver backend error (%s); retry %d", exc, attempt)

    def _run_once(self, script, ordered) -> CheckResult:
        start = time.monotonic()
        self.stats.backend_calls += 1
        try:
            lines = self._backend.ask(script, self.timeout)
            if lines is None:
                self.stats.timeouts += 1
                return CheckResult(UNKNOWN, reason="timeout")
            answer = _answer(lines)
            if answer == "unsat":
                return CheckResult(UNSAT)
            if answer == "unknown":
                return CheckResult(UNKNOWN, reason="backend unknown")
            if not ordered:
                return CheckResult(SAT, Assignment())
            names = " ".join(symbol_text(s.name) for s in ordered)
            vlines = self._backend.ask(f"(get-value ({names}))", self.timeout)
            if vlines is None:
                self.stats.timeouts += 1
                return CheckResult(UNKNOWN, reason="timeout in get-value")
            try:
                model = _parse_model(" ".join(vlines), ordered)
            except ValueError as exc:
                return CheckResult(UNKNOWN, reason=f"unreadable model: {exc}")
            return CheckResult(SAT, model)
        finally:
            self.stats.seconds += time.monotonic() - start

    def feasible(self, phi) -> bool:
        return self.check_sat(phi).status is not UNSAT

    # ------------------------------------------------------------ optimization
    def optimize(self, objective, phi, direction: str = "min", *, eps=None):
        """Model of ``phi`` optimizing ``objective`` (int32 or real term).

        Returns an :class:`Optimum` or None if ``phi`` is UNSAT (or no model
        could be found).  On timeouts the best incumbent is returned with
        ``optimal=False``.
        """
        if direction not in ("min", "max"):
            raise ValueError("direction must be 'min' or 'max'")
        if objective.sort not in (BV32, REAL):
            raise ValueError("objective must be numeric")
        sign = 1 if direction == "min" else -1
        first = self.check_sat(phi, symbols_of([objective]).values())
        if not first:
            return None
        best = first.model
        value = evaluate(objective, best)

        def probe(bound):
            # is there a model with objective (in the chosen direction) at or beyond bound?
            if sign > 0:
                guard = mk_le(objective, lit(bound, objective.sort))
            else:
                guard = mk_le(lit(bound, objective.sort), objective)
            return self.check_sat(mk_and(phi, guard), symbols_of([objective]).values())

        if objective.sort == BV32:
            return self._bisect_int(probe, best, objective, sign)
        return self._bisect_real(probe, best, objective, sign, eps or self.eps)

    def _bisect_int(self, probe, best, objective, sign):
        value = evaluate(objective, best)
        calls = 0
        if sign > 0:
            lo, hi = INT32_MIN, value          # optimum in [lo, hi]
            while lo < hi:
                mid = (lo + hi) // 2
                r = probe(mid)
                calls += 1
                if r.is_sat:
                    best, hi = r.model, evaluate(objective, r.model)
                elif r.is_unsat:
                    lo = mid + 1
                else:
                    return Optimum(best, hi, False, calls)
            return Optimum(best, hi, True, calls)
        lo, hi = value, INT32_MAX
        while lo < hi:
            mid = (lo + hi + 1) // 2
            r = probe(mid)
            calls += 1
            if r.is_sat:
                best, lo = r.model, evaluate(objective, r.model)
            elif r.is_unsat:
                hi = mid - 1
            else:
                return Optimum(best, lo, False, calls)
        return Optimum(best, lo, True, calls)

    def _bisect_real(self, probe, best, objective, sign, eps):
        value = Fraction(evaluate(objective, best))
        calls = 0
        # find a bound the objective cannot pass, doubling the step
        step = Fraction(1)
        bound = None
        for _ in range(64):
            r = probe(value - sign * step)
            calls += 1
            if r.is_sat:
                best, value = r.model, Fraction(evaluate(objective, r.model))
                step *= 2
            elif r.is_unsat:
                bound = value - sign * step
                break
            else:
                return Optimum(best, value, False, calls)
        if bound is None:
            return Optimum(best, value, False, calls)
        return self._narrow(probe, best, value, bound, objective, sign, eps, calls)

    def _narrow(self, probe, best, value, bound, objective, sign, eps, calls):
        eps = Fraction(eps)
        while abs(value - bound) > eps:
            mid = (value + bound) / 2
            r = probe(mid)
            calls += 1
            if r.is_sat:
                best, value = r.model, Fraction(evaluate(objective, r.model))
            elif r.is_unsat:
                bound = mid
            else:
                return Optimum(best, value, False, calls)
        return Optimum(best, value, True, calls)

    def min_l1(self, x: Sym, target, phi):
        """Model of ``phi`` minimizing ``|x - target|``; None if ``phi`` is UNSAT."""
        if x.sort not in (BV32, REAL):
            raise ValueError("min_l1 needs a numeric variable")
        if x.sort == BV32:
            return self._min_l1_int(x, int(target), phi)
        return self._min_l1_real(x, Fraction(target), phi)

    def _min_l1_int(self, x, t, phi):
        # d >= x - t and d >= t - x and d <= m, written as the interval
        # t - m <= x <= t + m so that no 32-bit overflow can occur.
        def probe(m):
            lo, hi = max(INT32_MIN, t - m), min(INT32_MAX, t + m)
            if lo > hi:
                return CheckResult(UNSAT)
            return self.check_sat(mk_and(phi, mk_le(bv(lo), x), mk_le(x, bv(hi))), [x])

        first = self.check_sat(phi, [x])
        if not first:
            return None
        best = first.model
        hi = abs(best[x.name] - t)
        lo, calls = 0, 0
        while lo < hi:
            mid = (lo + hi) // 2
            r = probe(mid)
            calls += 1
            if r.is_sat:
                best, hi = r.model, abs(r.model[x.name] - t)
            elif r.is_unsat:
                lo = mid + 1
            else:
                return Optimum(best, hi, False, calls)
        return Optimum(best, hi, True, calls)

    def _min_l1_real(self, x, t, phi):
        d = fresh_symbol(REAL, "dist")
        tt = real(t)
        dist_def = mk_and(mk_le(real(0), d), mk_le(_sub(x, tt), d), mk_le(_sub(tt, x), d))
        base = mk_and(phi, dist_def)

        def probe(m):
            return self.check_sat(mk_and(base, mk_le(d, real(m))), [x])

        exact = self.check_sat(mk_and(phi, mk_eq(x, tt)), [x])
        if exact:
            return Optimum(exact.model, Fraction(0), True, 1)
        first = self.check_sat(phi, [x])
        if not first:
            return None
        best = first.model
        value = abs(Fraction(best[x.name]) - t)
        opt = self._narrow(probe, best, value, Fraction(0), mk_abs(_sub(x, tt)), 1, self.eps, 0) \
            if value > 0 else Optimum(best, value, True, 0)
        opt = self._snap(x, t, phi, opt)
        opt.model = Assignment({k: v for k, v in opt.model.items() if k != d.name})
        return opt

    def _snap(self, x, t, phi, opt):
        """Try short decimals near the bisection result; keep one that is
        feasible and no farther from the target (turns 2.0000004 into 2.0)."""
        if not opt.optimal:
            return opt
        xv = Fraction(opt.model[x.name])
        seen = set()
        for digits in range(0, 10):
            cand = Fraction(round(xv, digits))
            if cand in seen or abs(cand - t) > opt.value:
                continue
            seen.add(cand)
            r = self.check_sat(mk_and(phi, mk_eq(x, real(cand))), [x])
            if r.is_sat:
                return Optimum(r.model, abs(cand - t), True, opt.calls + len(seen))
        return opt

    def max_soft_equalities(self, xs, targets, phi):
        """Model of ``phi`` satisfying as many ``x_i = target_i`` as possible.

        Returns an :class:`Optimum` whose ``value`` is the number k of
        satisfied equalities, or None when ``phi`` is UNSAT.
        """
        xs = list(xs)
        targets = list(targets)
        if len(xs) != len(targets):
            raise ValueError("vars and targets differ in length")
        base = self.check_sat(phi, xs)
        if not base:
            return None
        soft = []
        for x, t in zip(xs, targets):
            if x.sort == REAL and isinstance(t, float) and not math.isfinite(t):
                continue
            soft.append(mk_eq(x, lit(t, x.sort)))
        n = len(soft)
        if n == 0:
            return Optimum(base.model, 0, True, 1)
        if all(holds_soft(base.model, s) for s in soft):
            return Optimum(base.model, n, True, 1)
        sels = [fresh_symbol(BOOL, "sel") for _ in soft]
        links = [mk_implies(s, eq) for s, eq in zip(sels, soft)]
        calls = 1
        for k in range(n, 0, -1):
            card, counter_syms = at_least(sels, k)
            r = self.check_sat(mk_and(phi, *links, card), xs)
            calls += 1
            if r.is_sat:
                aux = {s.name for s in sels} | counter_syms
                model = Assignment({a: v for a, v in r.model.items() if a not in aux})
                got = sum(1 for s in soft if holds_soft(model, s))
                return Optimum(model, got, True, calls)
            if r.status is UNKNOWN:
                got = sum(1 for s in soft if holds_soft(base.model, s))
                return Optimum(base.model, got, False, calls)
        return Optimum(base.model, sum(1 for s in soft if holds_soft(base.model, s)), True, calls)


def holds_soft(model, eq):
    try:
        return bool(evaluate(eq, model))
    except Exception:
        return False


@dataclass
class Optimum:
    model: Assignment
    value: object
    optimal: bool = True
    calls: int = 0

    def __getitem__(self, name):
        return self.model[name]


def _sub(a, b):
    return App("-", (a, b), REAL)


def at_least(selectors, k):
    """Sequential-counter encoding of ``sum(selectors) >= k``.

    ``r[i][j]`` holds iff at least ``j`` of the first ``i`` selectors are true.
    Returns the formula and the names of the counter symbols it introduces.
    """
    n = len(selectors)
    if k <= 0:
        return TRUE, set()
    if k > n:
        return FALSE, set()
    prev = [TRUE] + [FALSE] * k  # r[0][0] = true, r[0][j>0] = false
    parts = []
    names = set()
    for i, s in enumerate(selectors, start=1):
        cur = [TRUE]
        for j in range(1, k + 1):
            expr = mk_or(prev[j], mk_and(prev[j - 1], s))
            if isinstance(expr, Lit):
                cur.append(expr)
                continue
            r = fresh_symbol(BOOL, "cnt")
            names.add(r.name)
            parts.append(mk_eq(r, expr))
            cur.append(r)
        prev = cur
    return mk_and(*parts, prev[k]), names


def _answer(lines):
    for ln in lines:
        s = ln.strip()
        if s in ("sat", "unsat", "unknown"):
            return s
        if s.startswith("(error"):
            raise BackendError(f"solver error: {s}")
    raise BackendError(f"malformed solver reply: {lines!r}")


def _parse_model(text, ordered) -> Assignment:
    if text.strip().startswith("(error"):
        raise BackendError(f"solver error: {text.strip()}")
    parsed = parse_sexprs(text)
    if len(parsed) != 1 or not isinstance(parsed[0], list):
        raise ValueError(f"unexpected get-value reply {text!r}")
    by_name = {s.name: s for s in ordered}
    model = Assignment()
    for pair in parsed[0]:
        if not isinstance(pair, list) or len(pair) != 2 or not isinstance(pair[0], str):
            raise ValueError(f"bad model entry {pair!r}")
        name = pair[0]
        sym = by_name.get(name)
        if sym is None:
            continue
        model[name] = parse_value(pair[1], sym.sort)
    return model


def _verify(phi, model) -> bool:
    try:
        return bool(evaluate(phi, model, default=True))
    except Exception as exc:  # evaluation of odd corner cases
        log.debug("local verification failed: %s", exc)
        return False


# ------------------------------------------------------------------ per-thread default

_local = threading.local()


def get_solver() -> Solver:
    """The calling thread's solver (created on first use)."""
    s = getattr(_local, "solver", None)
    if s is None:
        s = Solver()
        _local.solver = s
    return s


def set_solver(solver: Optional[Solver]):
    _local.solver = solver


def check_sat(phi):
    return get_solver().check_sat(phi)


def optimize(objective, phi, direction="min"):
    return get_solver().optimize(objective, phi, direction)


def min_l1(x, target, phi):
    return get_solver().min_l1(x, target, phi)


def max_soft_equalities(xs, targets, phi):
    return get_solver().max_soft_equalities(xs, targets, phi)
