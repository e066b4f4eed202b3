"""Arithmetic in GF(2^e) and in its quadratic extension.

Field elements are plain Python ints: the bit vector of coefficients of the
element written as a polynomial in x modulo the reduction polynomial.  0 is
zero and 1 is one.  Every context also carries numpy lookup tables so that
the numba kernels elsewhere in the package can do arithmetic by indexing.
"""

from __future__ import annotations

import random
from functools import cached_property

import numpy as np

# Conway polynomials over GF(2), as bit vectors (bit i = coefficient of x^i).
CONWAY = {
    1: 0b11,
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1011011,
    7: 0b10000011,
    8: 0b100011101,
    9: 0x211,
    10: 0x46F,
    11: 0x805,
    12: 0x10EB,
    13: 0x201B,
    14: 0x40A9,
    15: 0x8003,
    16: 0x1002D,
}

MAX_E = 16
# full q x q multiplication tables are only built up to this size
MAX_TABLE_Q = 1024


class FieldError(ValueError):
    """Raised for domain errors such as inverting zero."""


def _pmod(a: int, m: int) -> int:
    dm = m.bit_length()
    while a.bit_length() >= dm:
        a ^= m << (a.bit_length() - dm)
    return a


def is_irreducible_gf2(poly: int) -> bool:
    """Trial division by every polynomial of degree 1..deg/2."""
    deg = poly.bit_length() - 1
    if deg < 1:
        return False
    for d in range(1, deg // 2 + 1):
        for p in range(1 << d, 1 << (d + 1)):
            if _pmod(poly, p) == 0:
                return False
    return True


def _clmul_mod(a: int, b: int, poly: int, e: int) -> int:
    r = 0
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if a >> e:
            a ^= poly
    return r


class GF2e:
    """The field GF(2^e) with a fixed reduction polynomial."""

    def __init__(self, e: int, poly: int | None = None):
        if not 1 <= e <= MAX_E:
            raise FieldError(f"extension degree {e} outside 1..{MAX_E}")
        if poly is None:
            poly = CONWAY[e]
        if poly.bit_length() - 1 != e:
            raise FieldError(f"reduction polynomial {poly:#x} does not have degree {e}")
        if not is_irreducible_gf2(poly):
            raise FieldError(f"reduction polynomial {poly:#x} is reducible")
        self.e = e
        self.q = 1 << e
        self.poly = poly
        self.generator = self._find_generator()
        q = self.q
        exp = np.zeros(2 * q, dtype=np.int64)
        log = np.zeros(q, dtype=np.int64)
        x = 1
        for i in range(q - 1):
            exp[i] = x
            log[x] = i
            x = _clmul_mod(x, self.generator, poly, e)
        exp[q - 1 : 2 * q - 2] = exp[: q - 1]
        self.exp = exp
        self.log = log

    def _find_generator(self) -> int:
        q = self.q
        if q == 2:
            return 1
        for g in range(2, q):
            x, order = g, 1
            while x != 1:
                x = _clmul_mod(x, g, self.poly, self.e)
                order += 1
            if order == q - 1:
                return g
        raise AssertionError("no primitive element")  # unreachable for a field

    def __repr__(self) -> str:
        return f"GF2e(e={self.e}, poly={self.poly:#x})"

    def __eq__(self, other) -> bool:
        return isinstance(other, GF2e) and (self.e, self.poly) == (other.e, other.poly)

    def __hash__(self) -> int:
        return hash((self.e, self.poly))

    # -- scalar arithmetic -------------------------------------------------

    def elements(self) -> range:
        return range(self.q)

    @staticmethod
    def add(a: int, b: int) -> int:
        return a ^ b

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return int(self.exp[self.log[a] + self.log[b]])

    def inv(self, a: int) -> int:
        if a == 0:
            raise FieldError("inverse of zero")
        return int(self.exp[(self.q - 1 - self.log[a]) % (self.q - 1)])

    def div(self, a: int, b: int) -> int:
        if b == 0:
            raise FieldError("division by zero")
        if a == 0:
            return 0
        return int(self.exp[(self.log[a] - self.log[b]) % (self.q - 1)])

    def pow(self, a: int, k: int) -> int:
        if k < 0:
            a, k = self.inv(a), -k
        result = 1
        while k:
            if k & 1:
                result = self.mul(result, a)
            a = self.mul(a, a)
            k >>= 1
        return result

    def frobenius(self, x: int, i: int) -> int:
        """x^(2^i); i is taken mod e."""
        return self.pow(x, 1 << (i % self.e))

    def sqrt(self, x: int) -> int:
        return self.frobenius(x, self.e - 1)

    def abs_trace(self, x: int) -> int:
        t, y = 0, x
        for _ in range(self.e):
            t ^= y
            y = self.mul(y, y)
        assert t in (0, 1)
        return t

    def trace_one_smallest(self) -> int:
        for x in range(self.q):
            if self.abs_trace(x) == 1:
                return x
        raise AssertionError("trace is surjective")

    def random_element(self, rng: random.Random | None = None, nonzero: bool = False) -> int:
        rng = rng or random
        return rng.randrange(1 if nonzero else 0, self.q)

    # -- serialization -----------------------------------------------------

    def to_hex(self, x: int) -> str:
        return format(x, "x")

    def from_hex(self, s: str) -> int:
        x = int(s, 16)
        if not 0 <= x < self.q:
            raise FieldError(f"{s!r} is not an element of GF({self.q})")
        return x

    def describe(self) -> dict:
        return {"e": self.e, "q": self.q, "poly": format(self.poly, "x"), "generator": format(self.generator, "x")}

    @classmethod
    def from_description(cls, d: dict) -> "GF2e":
        return cls(int(d["e"]), int(d["poly"], 16))

    # -- tables for the kernels -------------------------------------------

    @cached_property
    def mul_table(self) -> np.ndarray:
        if self.q > MAX_TABLE_Q:
            raise FieldError(f"no multiplication table for q={self.q} > {MAX_TABLE_Q}")
        q = self.q
        dtype = np.uint8 if q <= 256 else np.uint16
        la = self.log[1:]
        t = np.zeros((q, q), dtype=dtype)
        t[1:, 1:] = self.exp[la[:, None] + la[None, :]]
        return t

    @cached_property
    def inv_table(self) -> np.ndarray:
        t = np.zeros(self.q, dtype=np.int64)
        t[1:] = self.exp[(self.q - 1 - self.log[1:]) % (self.q - 1)]
        return t

    @cached_property
    def frob_table(self) -> np.ndarray:
        """frob_table[i, x] = x^(2^i) for 0 <= i < e."""
        t = np.zeros((self.e, self.q), dtype=np.int64)
        for i in range(self.e):
            t[i, 1:] = self.exp[(self.log[1:] << i) % (self.q - 1)]
        return t

    @cached_property
    def sqrt_table(self) -> np.ndarray:
        return self.frob_table[self.e - 1].copy()

    @cached_property
    def trace_table(self) -> np.ndarray:
        t = np.zeros(self.q, dtype=np.int64)
        for i in range(self.e):
            t ^= self.frob_table[i]
        return t

    def vmul(self, a, b) -> np.ndarray:
        """Elementwise product of integer arrays."""
        return self.mul_table[np.asarray(a), np.asarray(b)].astype(np.int64)


def field(q: int, poly: int | None = None) -> GF2e:
    """GF(q) for q a power of two, defaulting to the Conway polynomial."""
    e = q.bit_length() - 1
    if q < 2 or q != 1 << e:
        raise FieldError(f"q={q} is not a power of two")
    return GF2e(e, poly)


class QuadExt:
    """GF(q^2) as GF(q)[w] with w^2 = w + c, c the smallest element of trace 1.

    Elements are pairs (u, v) meaning u + v*w.  Conjugation x -> x^q sends w to
    w + 1, so x + x^q = v.
    """

    def __init__(self, base: GF2e):
        self.base = base
        self.c = base.trace_one_smallest()
        # x^2 + x + c has no root in GF(q)
        F = base
        if any(F.mul(x, x) ^ x ^ self.c == 0 for x in F.elements()):
            raise FieldError("quadratic is not irreducible")

    zero = (0, 0)
    one = (1, 0)
    w = (0, 1)

    def embed(self, u: int) -> tuple[int, int]:
        return (u, 0)

    @staticmethod
    def add(x, y):
        return (x[0] ^ y[0], x[1] ^ y[1])

    def mul(self, x, y):
        F = self.base
        u1, v1 = x
        u2, v2 = y
        vv = F.mul(v1, v2)
        return (F.mul(u1, u2) ^ F.mul(self.c, vv), F.mul(u1, v2) ^ F.mul(u2, v1) ^ vv)

    def pow(self, x, k: int):
        if k < 0:
            x, k = self.inv(x), -k
        r = self.one
        while k:
            if k & 1:
                r = self.mul(r, x)
            x = self.mul(x, x)
            k >>= 1
        return r

    def conj(self, x):
        return (x[0] ^ x[1], x[1])

    def norm(self, x) -> int:
        u, v = x
        F = self.base
        return F.mul(u, u) ^ F.mul(u, v) ^ F.mul(self.c, F.mul(v, v))

    def inv(self, x):
        n = self.norm(x)
        if n == 0:
            raise FieldError("inverse of zero")
        ni = self.base.inv(n)
        cx = self.conj(x)
        return (self.base.mul(cx[0], ni), self.base.mul(cx[1], ni))

    def rel_trace(self, x) -> int:
        """x + x^q, an element of the base field."""
        return x[1]

    def encode(self, x) -> int:
        return x[0] | (x[1] << self.base.e)

    def decode(self, n: int):
        return (n & (self.base.q - 1), n >> self.base.e)

    def elements(self):
        for n in range(self.base.q * self.base.q):
            yield self.decode(n)

    def unit_circle(self):
        """Elements b with b^(q+1) = 1, in increasing encoding."""
        return [x for x in self.elements() if x != self.zero and self.norm(x) == 1]
