"""The magic action of PGammaL(2,q) on functions f: GF(q) -> GF(q), f(0) = 0.

For psi = (A, g) with A = (a, b; c, d),

    psi f(x) = |A|^(-1/2) [ (bx+d) f^g((ax+c)/(bx+d)) + b x f^g(a/b) + d f^g(c/d) ]

where f^g applies the automorphism x -> x^(2^g) to the coefficients of f,
i.e. f^g(x) = f(x^(2^-g))^(2^g).  A term whose multiplier vanishes is
dropped, so the quotient inside it is never formed.
"""

from __future__ import annotations

from dataclasses import dataclass
from dataclasses import field as dc_field
from functools import lru_cache
from pathlib import Path

import numpy as np
from numba import njit

from .gf2e import GF2e
from .opoly import NotAnOPermutation, OPoly, interpolate, interpolate_kernel, pack_even, record_size
from .store import ClassStore, merge_chunks, write_chunk


@dataclass(frozen=True)
class MagicMap:
    F: GF2e = dc_field(repr=False)
    a: int = 1
    b: int = 0
    c: int = 0
    d: int = 1
    gamma: int = 0

    def __post_init__(self):
        if self.det == 0:
            raise ValueError("singular matrix")

    @property
    def det(self) -> int:
        return self.F.mul(self.a, self.d) ^ self.F.mul(self.b, self.c)

    @classmethod
    def identity(cls, F: GF2e) -> "MagicMap":
        return cls(F)

    def then(self, other: "MagicMap") -> "MagicMap":
        """The map psi with psi f = other(self f)."""
        F = self.F
        g = other.gamma
        fr = lambda x: F.frobenius(x, g)  # noqa: E731
        a1, b1, c1, d1 = fr(self.a), fr(self.b), fr(self.c), fr(self.d)
        a2, b2, c2, d2 = other.a, other.b, other.c, other.d
        m = F.mul
        # (other.A) * (self.A)^g as a product of 2x2 matrices
        return MagicMap(
            F,
            m(a2, a1) ^ m(b2, c1),
            m(a2, b1) ^ m(b2, d1),
            m(c2, a1) ^ m(d2, c1),
            m(c2, b1) ^ m(d2, d1),
            (self.gamma + g) % F.e,
        )

    def normalized(self) -> "MagicMap":
        """Same element of PGammaL(2,q) with first nonzero matrix entry 1."""
        first = next(x for x in (self.a, self.b, self.c, self.d) if x)
        i = self.F.inv(first)
        m = self.F.mul
        return MagicMap(self.F, m(i, self.a), m(i, self.b), m(i, self.c), m(i, self.d), self.gamma)

    def as_tuple(self) -> tuple[int, int, int, int, int]:
        return (self.a, self.b, self.c, self.d, self.gamma)


# -- kernels --------------------------------------------------------------


@njit(cache=True)
def _conjugate_table(f, g, frob):
    """f^g(x) = f(x^(2^-g))^(2^g)."""
    q = f.shape[0]
    e = frob.shape[0]
    gi = (e - g) % e
    out = np.empty(q, np.int64)
    for x in range(q):
        out[x] = frob[g, f[frob[gi, x]]]
    return out


@njit(cache=True)
def _apply_into(fg, a, b, c, d, mul, inv, out):
    """out = unscaled psi f from the conjugated table fg."""
    q = fg.shape[0]
    fab = fg[mul[a, inv[b]]] if b != 0 else 0
    t3 = mul[d, fg[mul[c, inv[d]]]] if d != 0 else 0
    for x in range(q):
        bx = mul[b, x]
        den = bx ^ d
        v = mul[bx, fab] ^ t3
        if den != 0:
            v ^= mul[den, fg[mul[mul[a, x] ^ c, inv[den]]]]
        out[x] = v


@njit(cache=True)
def magic_apply_kernel(f, a, b, c, d, g, mul, inv, frob):
    q = f.shape[0]
    e = frob.shape[0]
    fg = _conjugate_table(f, g, frob)
    out = np.empty(q, np.int64)
    _apply_into(fg, a, b, c, d, mul, inv, out)
    det = mul[a, d] ^ mul[b, c]
    s = frob[e - 1, inv[det]]  # |A|^(-1/2)
    for x in range(q):
        out[x] = mul[s, out[x]]
    return out


@njit(cache=True)
def orbit_tables_kernel(f, psis, mul, inv, frob, out):
    """Canonical (value 1 at t=1) tables of psi f for every psi in psis."""
    q = f.shape[0]
    e = frob.shape[0]
    fgs = np.empty((e, q), np.int64)
    for g in range(e):
        fgs[g] = _conjugate_table(f, g, frob)
    row = np.empty(q, np.int64)
    for k in range(psis.shape[0]):
        a, b, c, d, g = psis[k, 0], psis[k, 1], psis[k, 2], psis[k, 3], psis[k, 4]
        _apply_into(fgs[g], a, b, c, d, mul, inv, row)
        s = row[1]
        if s == 0:
            return k  # not an o-permutation; caller raises
        si = inv[s]
        for x in range(q):
            out[k, x] = mul[si, row[x]]
    return -1


@njit(cache=True)
def find_witness_kernel(f, target, psis, mul, inv, frob):
    """Index of the first psi with canonical(psi f) == target, or -1."""
    q = f.shape[0]
    e = frob.shape[0]
    fgs = np.empty((e, q), np.int64)
    for g in range(e):
        fgs[g] = _conjugate_table(f, g, frob)
    row = np.empty(q, np.int64)
    for k in range(psis.shape[0]):
        _apply_into(fgs[psis[k, 4]], psis[k, 0], psis[k, 1], psis[k, 2], psis[k, 3], mul, inv, row)
        s = row[1]
        if s == 0:
            continue
        si = inv[s]
        ok = True
        for x in range(q):
            if mul[si, row[x]] != target[x]:
                ok = False
                break
        if ok:
            return k
    return -1


@njit(cache=True)
def records_kernel(tables, exp, log, out_even):
    """Interpolate canonical tables; even coefficients to out_even.

    Returns the index of the first table with a nonzero odd-degree
    coefficient, or -1.
    """
    n, q = tables.shape
    f = np.empty(q, np.int64)
    for r in range(n):
        for x in range(q):
            f[x] = tables[r, x]
        co = interpolate_kernel(f, exp, log)
        for k in range(0, q - 1, 2):
            if co[k] != 0:
                return r
        for i in range(q // 2 - 1):
            out_even[r, i] = co[2 * i + 1]
    return -1


# -- group enumeration ----------------------------------------------------


@lru_cache(maxsize=8)
def _pgaml2_cached(e: int, poly: int) -> np.ndarray:
    F = GF2e(e, poly)
    q = F.q
    # a = 0 forces b = 1 and c != 0; a = 1 leaves b, c, d free with d != bc
    c, d = (x.ravel() for x in np.meshgrid(np.arange(1, q), np.arange(q), indexing="ij"))
    lead0 = np.stack([np.zeros_like(c), np.ones_like(c), c, d], axis=1)
    b, c, d = (x.ravel() for x in np.meshgrid(*(np.arange(q),) * 3, indexing="ij"))
    keep = d != F.mul_table[b, c]
    lead1 = np.stack([np.ones(keep.sum(), dtype=b.dtype), b[keep], c[keep], d[keep]], axis=1)
    mats = np.concatenate([lead0, lead1])
    dtype = np.int16 if q <= 1 << 14 else np.int64
    out = np.empty((len(mats) * F.e, 5), dtype=dtype)
    for g in range(F.e):
        # rows ordered by matrix (lexicographic in a, b, c, d), then gamma
        out[g :: F.e, :4] = mats
        out[g :: F.e, 4] = g
    out.flags.writeable = False
    return out


def pgaml2(F: GF2e) -> np.ndarray:
    """All of PGammaL(2,q) as rows (a, b, c, d, gamma), first nonzero entry 1.

    Rows are sorted by the matrix entries, then gamma; there are
    q(q^2-1) e of them.
    """
    if F.q > 256:
        raise ValueError("PGammaL(2,q) enumeration is limited to q <= 256")
    return _pgaml2_cached(F.e, F.poly)


# -- public operations ----------------------------------------------------


def magic_apply(psi: MagicMap, table, F: GF2e) -> np.ndarray:
    table = np.ascontiguousarray(table, dtype=np.int64)
    if table[0] != 0:
        raise ValueError("magic action is defined on functions with f(0) = 0")
    return magic_apply_kernel(table, psi.a, psi.b, psi.c, psi.d, psi.gamma, F.mul_table, F.inv_table, F.frob_table)


def magic_compose_check(psi1: MagicMap, psi2: MagicMap, table, F: GF2e) -> bool:
    """psi1(psi2 f) == (psi1 o psi2) f pointwise."""
    lhs = magic_apply(psi1, magic_apply(psi2, table, F), F)
    rhs = magic_apply(psi2.then(psi1), table, F)
    return bool(np.array_equal(lhs, rhs))


@dataclass(frozen=True)
class ProjClass:
    """The span <f> of an o-permutation, represented by its o-polynomial."""

    F: GF2e = dc_field(repr=False)
    table: tuple

    @property
    def opoly(self) -> OPoly:
        return interpolate(np.array(self.table), self.F)

    @property
    def record(self) -> bytes:
        return self.opoly.pack()


def canonical_table(table, F: GF2e) -> np.ndarray:
    table = np.asarray(table, dtype=np.int64)
    if table[1] == 0:
        raise NotAnOPermutation("f(1) = 0")
    return F.vmul(table, F.inv(int(table[1])))


def canonical_class(table, F: GF2e) -> ProjClass:
    return ProjClass(F, tuple(int(x) for x in canonical_table(table, F)))


def orbit_tables(table, F: GF2e, psis: np.ndarray | None = None) -> np.ndarray:
    """Canonical tables of psi f for every psi (default: all of PGammaL(2,q))."""
    if psis is None:
        psis = pgaml2(F)
    psis = np.ascontiguousarray(psis, dtype=np.int64)
    out = np.empty((len(psis), F.q), dtype=np.uint8 if F.q <= 256 else np.int64)
    bad = orbit_tables_kernel(np.ascontiguousarray(table, dtype=np.int64), psis, F.mul_table, F.inv_table, F.frob_table, out)
    if bad >= 0:
        raise NotAnOPermutation(f"image under psi #{bad} vanishes at 1")
    return out


def unique_rows(tables: np.ndarray) -> np.ndarray:
    t = np.ascontiguousarray(tables)
    v = t.view(np.dtype((np.void, t.dtype.itemsize * t.shape[1]))).ravel()
    _, idx = np.unique(v, return_index=True)
    return t[np.sort(idx)]


def orbit_classes(table, F: GF2e, chunk: int = 1 << 18) -> np.ndarray:
    """Distinct canonical tables in the magic orbit of <f>."""
    psis = pgaml2(F)
    acc = []
    for lo in range(0, len(psis), chunk):
        acc.append(unique_rows(orbit_tables(table, F, psis[lo : lo + chunk])))
    return unique_rows(np.concatenate(acc))


def tables_to_records(tables: np.ndarray, F: GF2e, batch: int = 1 << 16) -> np.ndarray:
    """Packed even-coefficient records for canonical o-permutation tables.

    Raises if any table has a nonzero odd-degree coefficient.  Works in
    batches so that peak memory stays a small multiple of the output.
    """
    out = np.empty((len(tables), record_size(F)), dtype=np.uint8)
    even = np.zeros((min(batch, len(tables)), F.q // 2 - 1), dtype=np.int64)
    for lo in range(0, len(tables), batch):
        chunk = np.ascontiguousarray(tables[lo : lo + batch])
        ev = even[: len(chunk)]
        bad = records_kernel(chunk, F.exp, F.log, ev)
        if bad >= 0:
            raise NotAnOPermutation(f"table #{lo + bad} has a nonzero odd-degree coefficient")
        out[lo : lo + len(chunk)] = pack_even(ev, F)
    return out


def projective_equiv_via_magic(f, g, F: GF2e) -> MagicMap | None:
    """A psi in PGammaL(2,q) with psi f in <g>, or None (full scan)."""
    f = f.table if isinstance(f, OPoly) else f
    g = g.table if isinstance(g, OPoly) else g
    target = canonical_table(g, F)
    psis = pgaml2(F)
    k = find_witness_kernel(
        np.ascontiguousarray(f, dtype=np.int64), target, np.ascontiguousarray(psis, dtype=np.int64),
        F.mul_table, F.inv_table, F.frob_table,
    )
    if k < 0:
        return None
    a, b, c, d, gam = (int(x) for x in psis[k])
    return MagicMap(F, a, b, c, d, gam)


def _orbit_chunk(args) -> tuple[int, int]:
    table, e, poly, path = args
    F = GF2e(e, poly)
    tables = orbit_classes(np.asarray(table), F)
    return len(tables), write_chunk(Path(path), tables_to_records(tables, F))


def magic_orbit_union(
    reps,
    F: GF2e,
    out: str | Path,
    workdir: str | Path | None = None,
    workers: int = 1,
    resume: bool = False,
    progress=None,
) -> ClassStore:
    """Store of every <psi f>, psi in PGammaL(2,q), f among the representatives.

    Each representative's orbit is written to its own sorted chunk file in
    ``workdir``; with ``resume`` existing chunks are kept.  The chunks are
    then merged into ``out``.
    """
    out = Path(out)
    workdir = Path(workdir) if workdir is not None else out.parent / (out.name + ".chunks")
    workdir.mkdir(parents=True, exist_ok=True)
    tables = [np.asarray(r.table if isinstance(r, OPoly) else r, dtype=np.int64) for r in reps]
    chunks = [workdir / f"rep{i:03d}.bin" for i in range(len(tables))]
    todo = [i for i, p in enumerate(chunks) if not (resume and p.exists())]
    jobs = [(tables[i].tolist(), F.e, F.poly, str(chunks[i])) for i in todo]
    if workers > 1 and len(jobs) > 1:
        import multiprocessing as mp

        with mp.get_context("spawn").Pool(workers) as pool:
            for i, (n, _) in zip(todo, pool.imap(_orbit_chunk, jobs)):
                if progress:
                    progress(i, n)
    else:
        for i, job in zip(todo, jobs):
            n, _ = _orbit_chunk(job)
            if progress:
                progress(i, n)
    merge_chunks(chunks, out, F)
    return ClassStore(out)
