"""Deterministic numeric primitives: portable exp/softmax, decimal float
formatting, canonical JSON, and a seedable shuffle.

Everything here is defined purely in terms of IEEE-754 double operations in a
pinned evaluation order, so an independent runtime (e.g. the reference
external-reader adapter) can reproduce results bit for bit. Swapping any of
this for libm, numpy, or the built-in float repr would break that guarantee
at the last ulp.
"""

from __future__ import annotations

import hashlib
import math
import struct

_MASK64 = (1 << 64) - 1

# exp(x) = 2**k * exp(r) with r = x - k*ln2 reduced to |r| <= ln2/2.
_INV_LN2 = 1.4426950408889634
_LN2_HI = 0.6931471803691238
_LN2_LO = 1.9082149292705877e-10
_EXP_OVERFLOW = 709.782712893384
_EXP_UNDERFLOW = -745.1332191019412
# 1/n! for n = 2..14; enough terms for |r| <= 0.347 at double precision.
_EXP_COEFFS = (
    0.5,
    0.16666666666666666,
    0.041666666666666664,
    0.008333333333333333,
    0.001388888888888889,
    0.0001984126984126984,
    2.48015873015873e-05,
    2.7557319223985893e-06,
    2.755731922398589e-07,
    2.505210838544172e-08,
    2.08767569878681e-09,
    1.6059043836821613e-10,
    1.1470745597729725e-11,
)


def two_pow(k: int) -> float:
    """Exact 2**k for normal-range exponents, built from the bit pattern."""
    if not -1022 <= k <= 1023:
        raise ValueError(f"exponent outside normal double range: {k}")
    return struct.unpack("<d", struct.pack("<q", (k + 1023) << 52))[0]


def portable_exp(x: float) -> float:
    """exp(x) from IEEE double arithmetic only, identical across runtimes.

    Accuracy is a few ulp relative to true exp; what matters is that every
    conforming implementation produces the exact same bits.
    """
    if x != x:
        return x
    if x >= _EXP_OVERFLOW:
        return math.inf
    if x <= _EXP_UNDERFLOW:
        return 0.0
    k = math.floor(x * _INV_LN2 + 0.5)
    kd = float(k)
    r = (x - kd * _LN2_HI) - kd * _LN2_LO
    acc = _EXP_COEFFS[-1]
    for i in range(len(_EXP_COEFFS) - 2, -1, -1):
        acc = acc * r + _EXP_COEFFS[i]
    er = 1.0 + r * (1.0 + r * acc)
    if k == 1024:
        return (er * two_pow(1023)) * 2.0
    if k >= -1021:
        return er * two_pow(k)
    # subnormal result: scale in two exact-then-rounded steps
    return (er * two_pow(k + 1000)) * two_pow(-1000)


def softmax(scores: list[float]) -> list[float]:
    """Max-shifted softmax with left-to-right accumulation order."""
    if not scores:
        return []
    m = scores[0]
    for s in scores:
        if s > m:
            m = s
    exps = [portable_exp(s - m) for s in scores]
    denom = 0.0
    for e in exps:
        denom += e
    return [e / denom for e in exps]


def format_float(x: float) -> str:
    """Serialize a finite double as decimal with 17 significant digits.

    Output is exponential form like ``6.9999999999999996e-1``, computed with
    exact integer arithmetic and round-half-even, so every implementation
    emits identical bytes and every IEEE parser reads back the same double.
    """
    if x != x or x == math.inf or x == -math.inf:
        raise ValueError("non-finite float is not serializable")
    if x == 0.0:
        return "0.0000000000000000e+0"
    sign = "-" if x < 0.0 else ""
    bits = struct.unpack("<Q", struct.pack("<d", -x if x < 0.0 else x))[0]
    exp_bits = (bits >> 52) & 0x7FF
    frac = bits & ((1 << 52) - 1)
    if exp_bits == 0:
        mant, e2 = frac, -1074
    else:
        mant, e2 = frac | (1 << 52), exp_bits - 1075
    if e2 >= 0:
        num, den = mant << e2, 1
    else:
        num, den = mant, 1 << -e2

    def ge_pow10(d: int) -> bool:  # num/den >= 10**d
        if d >= 0:
            return num >= den * 10**d
        return num * 10**-d >= den

    d10 = len(str(num)) - len(str(den))
    while not ge_pow10(d10):
        d10 -= 1
    while ge_pow10(d10 + 1):
        d10 += 1
    shift = 16 - d10
    if shift >= 0:
        p, q = num * 10**shift, den
    else:
        p, q = num, den * 10**-shift
    digits, rem = divmod(p, q)
    if 2 * rem > q or (2 * rem == q and digits % 2 == 1):
        digits += 1
    if digits == 10**17:
        digits //= 10
        d10 += 1
    s = str(digits)
    exp = f"+{d10}" if d10 >= 0 else str(d10)
    return f"{sign}{s[0]}.{s[1:]}e{exp}"


_STR_ESCAPES = {
    '"': '\\"',
    "\\": "\\\\",
    "\n": "\\n",
    "\r": "\\r",
    "\t": "\\t",
    "\b": "\\b",
    "\f": "\\f",
}


def _escape(s: str) -> str:
    parts = ['"']
    for ch in s:
        o = ord(ch)
        if ch in _STR_ESCAPES:
            parts.append(_STR_ESCAPES[ch])
        elif 0x20 <= o <= 0x7E:
            parts.append(ch)
        elif o < 0x20:
            parts.append(f"\\u{o:04x}")
        elif o > 0xFFFF:
            o -= 0x10000
            parts.append(f"\\u{0xD800 + (o >> 10):04x}\\u{0xDC00 + (o & 0x3FF):04x}")
        else:
            parts.append(f"\\u{o:04x}")
    parts.append('"')
    return "".join(parts)


def canonical_json(value) -> str:
    """Compact JSON with insertion-order keys, floats via format_float and
    non-ASCII escaped; the wire and checkpoint serialization."""
    out: list[str] = []
    _write_json(value, out)
    return "".join(out)


def _write_json(v, out: list[str]) -> None:
    if v is None:
        out.append("null")
    elif v is True:
        out.append("true")
    elif v is False:
        out.append("false")
    elif isinstance(v, int):
        out.append(str(v))
    elif isinstance(v, float):
        out.append(format_float(v))
    elif isinstance(v, str):
        out.append(_escape(v))
    elif isinstance(v, (list, tuple)):
        out.append("[")
        for i, item in enumerate(v):
            if i:
                out.append(",")
            _write_json(item, out)
        out.append("]")
    elif isinstance(v, dict):
        out.append("{")
        for i, (k, item) in enumerate(v.items()):
            if not isinstance(k, str):
                raise TypeError(f"non-string key: {k!r}")
            if i:
                out.append(",")
            out.append(_escape(k))
            out.append(":")
            _write_json(item, out)
        out.append("}")
    else:
        raise TypeError(f"not canonically serializable: {type(v)!r}")


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


class SplitMix64:
    """Tiny deterministic PRNG; the only randomness source in training."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def randbelow(self, n: int) -> int:
        return self.next_u64() % n

    def uniform(self, lo: float, hi: float) -> float:
        # 53 random bits mapped into [lo, hi)
        u = (self.next_u64() >> 11) * (1.0 / 9007199254740992.0)
        return lo + (hi - lo) * u

    def shuffle(self, xs: list) -> None:
        for i in range(len(xs) - 1, 0, -1):
            j = self.randbelow(i + 1)
            xs[i], xs[j] = xs[j], xs[i]
