"""Concrete value semantics shared by the interpreter and term evaluation.

int32 arithmetic wraps (two's complement); ``/`` and ``%`` truncate toward
zero like C; shift amounts are masked to five bits.  Floats are IEEE doubles
and never fault: division by zero and domain errors produce inf or nan.
"""

import math
import struct

INT_MIN = -(1 << 31)
INT_MAX = (1 << 31) - 1


def wrap32(v: int) -> int:
    return ((v + (1 << 31)) & 0xFFFFFFFF) - (1 << 31)


def int_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return wrap32(q if (a >= 0) == (b >= 0) else -q)


def int_rem(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    q = q if (a >= 0) == (b >= 0) else -q
    return wrap32(a - b * q)


def int_shl(a: int, s: int) -> int:
    return wrap32(a << (s & 31))


def int_shr(a: int, s: int) -> int:
    return wrap32(a >> (s & 31))


def float_div(a: float, b: float) -> float:
    try:
        return a / b
    except ZeroDivisionError:
        if a != a or a == 0.0:
            return math.nan
        sign = math.copysign(1.0, a) * math.copysign(1.0, b)
        return math.inf * sign


def hi_bits(x: float) -> int:
    """High 32 bits of the IEEE-754 bit pattern of ``x`` as a signed int32."""
    bits = struct.unpack(">Q", struct.pack(">d", float(x)))[0]
    return wrap32(bits >> 32)


def double_from_hi(hi: int) -> float:
    """Smallest double whose high word is ``hi`` (low word zero)."""
    return struct.unpack(">d", struct.pack(">Q", (hi & 0xFFFFFFFF) << 32))[0]


def _guard(fn):
    def wrapped(x):
        try:
            return fn(x)
        except (ValueError, OverflowError):
            if fn is math.exp:
                return math.inf if x > 0 else 0.0
            if fn is math.log:
                return -math.inf if x == 0 else math.nan
            return math.nan
    wrapped.__name__ = fn.__name__
    return wrapped


FLOAT_INTRINSICS = {
    "sin": _guard(math.sin),
    "cos": _guard(math.cos),
    "tan": _guard(math.tan),
    "atan": _guard(math.atan),
    "exp": _guard(math.exp),
    "log": _guard(math.log),
    "sqrt": _guard(math.sqrt),
    "fabs": math.fabs,
}


def float_to_int(x: float) -> int:
    """C-style truncating conversion; out-of-range and nan map to INT_MIN."""
    if x != x or math.isinf(x):
        return INT_MIN
    v = int(x)
    if v < INT_MIN or v > INT_MAX:
        return INT_MIN
    return v
