"""Brute-force oracles for the solver reductions.

Constraints are generated as pairs: a plain Python predicate (the oracle's
view) and the equivalent term (the solver's view).  The oracle never calls
into ghostsym's evaluator.
"""

import itertools
import random

from ghostsym.symcore import (BV32, bv, fresh_symbol, mk_and, mk_arith, mk_eq, mk_le, mk_lt,
                              mk_not, mk_or)


def _int_constraint(rng, x, xs):
    kind = rng.choice(["mod", "mask", "ne", "lin", "or"])
    if kind == "mod":
        m = rng.randint(2, 13)
        r = rng.randrange(m)
        return (lambda v: v % m == r), mk_eq(mk_arith("%", x, bv(m)), bv(r))
    if kind == "mask":
        mask = rng.randint(1, 1023)
        want = rng.randint(0, 1023) & mask
        return (lambda v: v & mask == want), mk_eq(mk_arith("&", x, bv(mask)), bv(want))
    if kind == "ne":
        c = rng.choice(xs)
        return (lambda v: v != c), mk_not(mk_eq(x, bv(c)))
    if kind == "lin":
        a, b, c = rng.randint(1, 5), rng.randint(-50, 50), rng.randint(0, 3000)
        return (lambda v: a * v + b <= c), mk_le(mk_arith("+", mk_arith("*", bv(a), x), bv(b)), bv(c))
    c1, c2 = rng.choice(xs), rng.choice(xs)
    return (lambda v: v <= c1 or v >= c2), mk_or(mk_le(x, bv(c1)), mk_le(bv(c2), x))


def l1_instance(rng):
    """(x, target, phi, oracle optimum or None)."""
    x = fresh_symbol(BV32, "x")
    lo = rng.randint(0, 3000)
    hi = lo + rng.randint(0, 1023)
    xs = list(range(lo, hi + 1))
    preds, terms = [], [mk_le(bv(lo), x), mk_le(x, bv(hi))]
    for _ in range(rng.randint(0, 3)):
        p, t = _int_constraint(rng, x, xs)
        preds.append(p)
        terms.append(t)
    target = rng.randint(lo - 200, hi + 200)
    feas = [v for v in xs if all(p(v) for p in preds)]
    best = min((abs(v - target) for v in feas), default=None)
    return x, target, mk_and(*terms), best


def _pair_constraint(rng, vs):
    i, j = rng.sample(range(len(vs)), 2) if len(vs) > 1 else (0, 0)
    a, b = vs[i], vs[j]
    kind = rng.choice(["lt", "ne", "xor", "sum", "ne_const"])
    if kind == "lt":
        return (lambda t: t[i] < t[j]), mk_lt(a, b)
    if kind == "ne":
        return (lambda t: t[i] != t[j]), mk_not(mk_eq(a, b))
    if kind == "xor":
        k = rng.randint(0, 15)
        return (lambda t: t[i] ^ t[j] == k), mk_eq(mk_arith("^", a, b), bv(k))
    if kind == "sum":
        k = rng.randint(0, 30)
        return (lambda t: t[i] + t[j] >= k), mk_le(bv(k), mk_arith("+", a, b))
    k = rng.randint(0, 15)
    return (lambda t: t[i] != k), mk_not(mk_eq(a, bv(k)))


def soft_instance(rng):
    """(vars, targets, phi, oracle max count or None)."""
    n = rng.randint(1, 3)
    size = rng.randint(2, 16)
    vs = [fresh_symbol(BV32, f"s{i}") for i in range(n)]
    terms = []
    for v in vs:
        terms += [mk_le(bv(0), v), mk_lt(v, bv(size))]
    preds = []
    for _ in range(rng.randint(0, 3)):
        p, t = _pair_constraint(rng, vs)
        preds.append(p)
        terms.append(t)
    targets = [rng.randint(0, size) for _ in vs]   # size itself is out of range
    best = None
    for tup in itertools.product(range(size), repeat=n):
        if all(p(tup) for p in preds):
            k = sum(1 for a, b in zip(tup, targets) if a == b)
            best = k if best is None else max(best, k)
    return vs, targets, mk_and(*terms), best


def instances(maker, n, seed):
    rng = random.Random(seed)
    return [maker(rng) for _ in range(n)]
