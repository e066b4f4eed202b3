"""O-permutations and o-polynomials over GF(q), q even.

Functions are handled in two shapes:

* an evaluation table, a numpy int64 array ``table[t] = f(t)`` indexed by the
  integer encoding of t (always ``table[0] == 0``);
* an :class:`OPoly`, the coefficient vector for degrees 1..q-1.

The hot predicates run as numba kernels on tables; coefficients are only
computed at storage boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass
from dataclasses import field as dc_field
from functools import cached_property

import numpy as np
from numba import njit

from .gf2e import GF2e


class NotAnOPermutation(ValueError):
    pass


# -- kernels --------------------------------------------------------------


@njit(cache=True)
def _is_permutation(f, seen, stamp):
    for x in range(f.shape[0]):
        v = f[x]
        if seen[v] == stamp:
            return False
        seen[v] = stamp
    return True


@njit(cache=True)
def is_opermutation_kernel(f, mul, inv):
    """f permutes GF(q) and every difference quotient x -> (f(x+s)+f(s))/x does."""
    q = f.shape[0]
    seen = np.zeros(q, np.int64)
    stamp = 1
    if not _is_permutation(f, seen, stamp):
        return False
    for s in range(q):
        stamp += 1
        fs = f[s]
        seen[0] = stamp
        for x in range(1, q):
            v = mul[f[x ^ s] ^ fs, inv[x]]
            if seen[v] == stamp:
                return False
            seen[v] = stamp
    return True


@njit(cache=True)
def interpolate_kernel(f, exp, log):
    """Coefficients a_1..a_{q-1} of the polynomial with table f (f(0) = 0).

    Over GF(q) with char 2, a_k = sum_{t != 0} f(t) t^(-k).  With t = g^j this
    is a length q-1 transform evaluated through the log tables.
    """
    q = f.shape[0]
    n = q - 1
    out = np.zeros(q - 1, np.int64)
    lf = np.full(n, -1, np.int64)
    for j in range(n):
        v = f[exp[j]]
        if v != 0:
            lf[j] = log[v]
    for k in range(1, q):
        acc = 0
        shift = 0  # k * j mod n
        for j in range(n):
            if lf[j] >= 0:
                e = lf[j] - shift
                if e < 0:
                    e += n
                acc ^= exp[e]
            shift += k
            if shift >= n:
                shift %= n
        out[k - 1] = acc
    return out


@njit(cache=True)
def evaluate_kernel(coeffs, mul):
    """Table of sum_{k>=1} coeffs[k-1] t^k for every t (Horner)."""
    q = mul.shape[0]
    out = np.zeros(q, np.int64)
    m = coeffs.shape[0]
    for t in range(q):
        acc = 0
        for k in range(m - 1, -1, -1):
            acc = mul[acc, t] ^ coeffs[k]
        out[t] = mul[acc, t]
    return out


@njit(cache=True)
def evaluate_even_batch(coeffs, mul, out):
    """Tables of f(t) = sum_i coeffs[:, i] t^(2i+2) for a batch of records."""
    n, m = coeffs.shape
    q = mul.shape[0]
    for r in range(n):
        for t in range(q):
            u = mul[t, t]
            acc = 0
            for i in range(m - 1, -1, -1):
                acc = mul[acc, u] ^ coeffs[r, i]
            out[r, t] = mul[acc, u]


# -- tables ---------------------------------------------------------------


def identity_table(F: GF2e) -> np.ndarray:
    return np.arange(F.q, dtype=np.int64)


def power_table(F: GF2e, k: int) -> np.ndarray:
    return np.array([F.pow(t, k) if t else 0 for t in F.elements()], dtype=np.int64)


def sqrt_table(F: GF2e) -> np.ndarray:
    return F.sqrt_table.copy()


def is_permutation(table) -> bool:
    table = np.asarray(table)
    return len(np.unique(table)) == len(table)


def is_opermutation(table, F: GF2e) -> bool:
    table = np.ascontiguousarray(table, dtype=np.int64)
    if table[0] != 0:
        return False
    return bool(is_opermutation_kernel(table, F.mul_table, F.inv_table))


def difference_quotient(table, s: int, F: GF2e) -> np.ndarray:
    """x -> (f(x+s) + f(s)) / x with 0 -> 0."""
    table = np.asarray(table, dtype=np.int64)
    x = np.arange(1, F.q)
    out = np.zeros(F.q, dtype=np.int64)
    out[1:] = F.vmul(table[x ^ s] ^ table[s], F.inv_table[x])
    return out


# -- polynomials ----------------------------------------------------------


@dataclass(frozen=True)
class OPoly:
    """A function GF(q) -> GF(q) with f(0) = 0, by its coefficients.

    ``coeffs[k-1]`` is the coefficient of t^k for k = 1..q-1.
    """

    F: GF2e = dc_field(repr=False)
    coeffs: tuple[int, ...]

    def __post_init__(self):
        if len(self.coeffs) != self.F.q - 1:
            raise ValueError(f"expected {self.F.q - 1} coefficients, got {len(self.coeffs)}")

    @classmethod
    def monomial(cls, F: GF2e, k: int, c: int = 1) -> "OPoly":
        coeffs = [0] * (F.q - 1)
        coeffs[k - 1] = c
        return cls(F, tuple(coeffs))

    @classmethod
    def from_table(cls, table, F: GF2e) -> "OPoly":
        return interpolate(table, F)

    @cached_property
    def table(self) -> np.ndarray:
        t = evaluate_kernel(np.array(self.coeffs, dtype=np.int64), self.F.mul_table)
        t.flags.writeable = False
        return t

    def __call__(self, t: int) -> int:
        return evaluate(self, t)

    @property
    def degree(self) -> int:
        for k in range(len(self.coeffs), 0, -1):
            if self.coeffs[k - 1]:
                return k
        return 0  # the zero function; degree -inf by convention, 0 here

    def scale(self, c: int) -> "OPoly":
        return OPoly(self.F, tuple(self.F.mul(c, a) for a in self.coeffs))

    def is_opermutation(self) -> bool:
        return is_opermutation(self.table, self.F)

    def odd_coefficients_vanish(self) -> bool:
        return all(a == 0 for a in self.coeffs[0::2])

    def to_text(self) -> str:
        return ",".join(format(a, "x") for a in self.coeffs)

    @classmethod
    def from_text(cls, text: str, F: GF2e) -> "OPoly":
        return cls(F, tuple(F.from_hex(s) for s in text.strip().split(",")))

    def pack(self) -> bytes:
        """Even-degree coefficients 2, 4, ..., q-2 packed little-endian, e bits each."""
        if not self.odd_coefficients_vanish():
            raise NotAnOPermutation("odd-degree coefficient is nonzero; cannot pack")
        return pack_even(np.array(self.coeffs[1::2], dtype=np.int64)[None, :], self.F)[0].tobytes()

    @classmethod
    def unpack(cls, record: bytes, F: GF2e) -> "OPoly":
        even = unpack_even(np.frombuffer(record, dtype=np.uint8)[None, :], F)[0]
        coeffs = [0] * (F.q - 1)
        coeffs[1::2] = [int(a) for a in even]
        return cls(F, tuple(coeffs))


def evaluate(f: OPoly, t: int) -> int:
    F = f.F
    acc = 0
    for a in reversed(f.coeffs):
        acc = F.mul(acc, t) ^ a
    return F.mul(acc, t)


def interpolate(table, F: GF2e) -> OPoly:
    table = np.ascontiguousarray(table, dtype=np.int64)
    if table.shape != (F.q,):
        raise ValueError(f"table must have {F.q} entries")
    if table[0] != 0:
        raise ValueError("table[0] must be 0")
    return OPoly(F, tuple(int(a) for a in interpolate_kernel(table, F.exp, F.log)))


def to_opolynomial(f: OPoly) -> OPoly:
    """The unique o-polynomial (1/f(1)) f in the span of f."""
    f1 = f(1)
    if f1 == 0:
        raise NotAnOPermutation("f(1) = 0")
    return f if f1 == 1 else f.scale(f.F.inv(f1))


def normalize_table(table, F: GF2e) -> np.ndarray:
    table = np.asarray(table, dtype=np.int64)
    if table[1] == 0:
        raise NotAnOPermutation("f(1) = 0")
    return F.vmul(table, F.inv(int(table[1])))


def oval_points(f: OPoly | np.ndarray, F: GF2e | None = None):
    """D(f) = {(1, t, f(t))} u {(0, 1, 0)} as a plane point set."""
    from .plane import PointSet

    if isinstance(f, OPoly):
        F, table = f.F, f.table
    else:
        table = np.asarray(f)
    pts = [(1, t, int(table[t])) for t in range(F.q)] + [(0, 1, 0)]
    return PointSet.from_points(F, pts, role="oval")


# -- packed records -------------------------------------------------------


def record_size(F: GF2e) -> int:
    return ((F.q // 2 - 1) * F.e + 7) // 8


def pack_even(even: np.ndarray, F: GF2e) -> np.ndarray:
    """Rows of q/2 - 1 even-degree coefficients -> rows of packed bytes.

    Coefficient i (degree 2i+2) occupies bits e*i .. e*i+e-1 of the record
    read as a little-endian integer; trailing pad bits are zero.
    """
    even = np.asarray(even, dtype=np.int64)
    n, m = even.shape
    bits = ((even[:, :, None] >> np.arange(F.e)) & 1).astype(np.uint8).reshape(n, m * F.e)
    nb = record_size(F)
    pad = np.zeros((n, nb * 8 - m * F.e), dtype=np.uint8)
    return np.packbits(np.concatenate([bits, pad], axis=1), axis=1, bitorder="little")


def unpack_even(records: np.ndarray, F: GF2e) -> np.ndarray:
    records = np.asarray(records, dtype=np.uint8)
    n = records.shape[0]
    m = F.q // 2 - 1
    bits = np.unpackbits(records, axis=1, bitorder="little")[:, : m * F.e].reshape(n, m, F.e)
    return (bits.astype(np.int64) << np.arange(F.e)).sum(axis=2)
