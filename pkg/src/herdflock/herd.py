"""Herds of ovals and the search for (f0, f_inf) pairs generating one.

A herd is given by two o-polynomials f0, f_inf and kappa with Tr(kappa) = 1;
its members are f_inf and, for s in GF(q),

    f_s(t) = (f0(t) + kappa s f_inf(t) + s^(1/2) t^(1/2)) / (1 + kappa s + s^(1/2)).

Members are indexed 0..q-1 by the encoding of s, and index q stands for
s = infinity.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from dataclasses import field as dc_field
from pathlib import Path

import numpy as np
from numba import njit

from .gf2e import GF2e
from .magic import MagicMap, pgaml2
from .opoly import OPoly, interpolate, is_opermutation, is_opermutation_kernel, oval_points
from .plane import equivalent_ovals, set_stabilizer
from .store import ClassStore

INF = "inf"


class HerdError(ValueError):
    pass


@dataclass(frozen=True)
class Herd:
    F: GF2e = dc_field(repr=False)
    f0: OPoly
    finf: OPoly
    kappa: int

    def __post_init__(self):
        if self.F.abs_trace(self.kappa) != 1:
            raise HerdError("kappa must have absolute trace 1")

    @classmethod
    def from_tables(cls, F: GF2e, f0, finf, kappa: int) -> "Herd":
        return cls(F, interpolate(f0, F), interpolate(finf, F), kappa)

    @property
    def q(self) -> int:
        return self.F.q

    def member(self, s) -> np.ndarray:
        return herd_member(self, s)

    def members(self) -> np.ndarray:
        """(q+1) x q array of member tables, row q being f_inf."""
        return _members(self.F, self.f0.table, self.finf.table, self.kappa)

    def to_text(self) -> str:
        return f"q={self.q} kappa={self.kappa:x}\nf0 {self.f0.to_text()}\nfinf {self.finf.to_text()}\n"

    @classmethod
    def from_text(cls, text: str, F: GF2e) -> "Herd":
        lines = text.strip().splitlines()
        head = dict(kv.split("=") for kv in lines[0].split())
        if int(head["q"]) != F.q:
            raise HerdError("field size mismatch")
        f0 = OPoly.from_text(lines[1].split(None, 1)[1], F)
        finf = OPoly.from_text(lines[2].split(None, 1)[1], F)
        return cls(F, f0, finf, int(head["kappa"], 16))


def denominator(F: GF2e, kappa: int, s: int) -> int:
    return 1 ^ F.mul(kappa, s) ^ F.sqrt(s)


def _members(F: GF2e, f0, finf, kappa) -> np.ndarray:
    q = F.q
    f0 = np.asarray(f0, dtype=np.int64)
    finf = np.asarray(finf, dtype=np.int64)
    out = np.empty((q + 1, q), dtype=np.int64)
    rt = F.sqrt_table
    for s in range(q):
        den = denominator(F, kappa, s)
        num = f0 ^ F.vmul(finf, F.mul(kappa, s)) ^ F.vmul(rt, F.sqrt(s))
        out[s] = F.vmul(num, F.inv(den))
    out[q] = finf
    return out


def herd_member(H: Herd, s) -> np.ndarray:
    if s == INF:
        return np.array(H.finf.table)
    F = H.F
    den = denominator(F, H.kappa, s)
    num = H.f0.table ^ F.vmul(H.finf.table, F.mul(H.kappa, s)) ^ F.vmul(F.sqrt_table, F.sqrt(s))
    return F.vmul(num, F.inv(den))


@njit(cache=True)
def _herd_first_failure(f0, finf, kappa, mul, inv, sqrt, order):
    """First s (in the given order, q meaning infinity) whose member fails, or -1."""
    q = f0.shape[0]
    g = np.empty(q, np.int64)
    for idx in range(order.shape[0]):
        s = order[idx]
        if s == q:
            for t in range(q):
                g[t] = finf[t]
        else:
            ks = mul[kappa, s]
            rs = sqrt[s]
            di = inv[1 ^ ks ^ rs]
            for t in range(q):
                g[t] = mul[f0[t] ^ mul[ks, finf[t]] ^ mul[rs, sqrt[t]], di]
        if not is_opermutation_kernel(g, mul, inv):
            return s
    return -1


def _as_table(f) -> np.ndarray:
    return np.ascontiguousarray(f.table if isinstance(f, OPoly) else f, dtype=np.int64)


def herd_failure(f0, finf, kappa: int, F: GF2e):
    """The first member (s in increasing encoding, then infinity) that is not
    an o-permutation, or None when every member is one."""
    order = np.arange(F.q + 1, dtype=np.int64)
    s = _herd_first_failure(_as_table(f0), _as_table(finf), kappa, F.mul_table, F.inv_table, F.sqrt_table, order)
    if s < 0:
        return None
    return INF if s == F.q else int(s)


def is_herd(f0, finf, kappa: int, F: GF2e) -> bool:
    if F.abs_trace(kappa) != 1:
        raise HerdError("kappa must have absolute trace 1")
    return herd_failure(f0, finf, kappa, F) is None


def quick_filter(f0, finf, kappa: int, F: GF2e) -> bool:
    """Is f_s an o-permutation for s = kappa^-2, where the denominator is 1."""
    ki = F.inv(kappa)
    g = _as_table(f0) ^ F.vmul(_as_table(finf) ^ F.sqrt_table, ki)
    return is_opermutation(g, F)


def reindex_kappa(H: Herd, s: int) -> Herd:
    """The same herd generated by (f0, f_s), with kappa' = kappa + 1/s + 1/s^(1/2)."""
    if s == 0 or s == INF:
        raise HerdError("reindexing needs s != 0, infinity")
    F = H.F
    si = F.inv(s)
    k2 = H.kappa ^ si ^ F.sqrt(si)
    return Herd(F, H.f0, interpolate(herd_member(H, s), F), k2)


# -- member classes -------------------------------------------------------


def canonical_rows(tables: np.ndarray, F: GF2e) -> np.ndarray:
    """Each row scaled so its value at 1 is 1."""
    tables = np.asarray(tables, dtype=np.int64)
    return F.vmul(tables, F.inv_table[tables[:, 1]][:, None])


def member_classes(H: Herd) -> list[bytes]:
    """Canonical member tables, as bytes, in member order."""
    return [r.astype(np.uint8 if H.q <= 256 else np.int64).tobytes() for r in canonical_rows(H.members(), H.F)]


# -- search ---------------------------------------------------------------


@njit(cache=True)
def _search_batch(reps, even, kinv, mul, inv, sqrt, out_pairs, start):
    """Stage 1 over a batch of packed records, from record ``start``.

    For each record f_inf and each representative f0, test whether
    f0 + kinv (f_inf + t^(1/2)) is an o-permutation.  Matching (record,
    rep) pairs are written to out_pairs.  Stops early, between records,
    when out_pairs might overflow.  Returns (hits, next record).
    """
    n, m = even.shape
    R, q = reps.shape
    h = np.empty(q, np.int64)
    g = np.empty(q, np.int64)
    seen = np.zeros(q, np.int64)
    stamp = 0
    found = 0
    for r in range(start, n):
        if found + R > out_pairs.shape[0]:
            return found, r
        for t in range(q):
            u = mul[t, t]
            acc = 0
            for i in range(m - 1, -1, -1):
                acc = mul[acc, u] ^ even[r, i]
            h[t] = mul[kinv, mul[acc, u] ^ sqrt[t]]
        for i in range(R):
            stamp += 1
            perm = True
            for t in range(q):
                v = reps[i, t] ^ h[t]
                if seen[v] == stamp:
                    perm = False
                    break
                seen[v] = stamp
            if not perm:
                continue
            for t in range(q):
                g[t] = reps[i, t] ^ h[t]
            if is_opermutation_kernel(g, mul, inv):
                out_pairs[found, 0] = r
                out_pairs[found, 1] = i
                found += 1
    return found, n


@dataclass
class PairCandidate:
    rep: int
    index: int  # position of f_inf in the store
    record: bytes
    kappa: int
    stage: int = 1

    def herd(self, reps: list[OPoly], F: GF2e) -> Herd:
        return Herd(F, reps[self.rep], OPoly.unpack(self.record, F), self.kappa)

    def as_dict(self) -> dict:
        return {"rep": self.rep, "index": self.index, "finf": self.record.hex(), "kappa": self.kappa, "stage": self.stage}


@dataclass
class SearchResult:
    q: int
    kappa: int
    stage1: list[PairCandidate]
    stage2: list[PairCandidate]
    per_rep: dict = dc_field(default_factory=dict)
    seconds: float = 0.0

    def summary(self) -> dict:
        return {
            "q": self.q,
            "kappa": self.kappa,
            "stage1": len(self.stage1),
            "stage2": len(self.stage2),
            "per_rep": self.per_rep,
            "seconds": round(self.seconds, 1),
        }


def _scan_range(reps_arr, store: ClassStore, lo: int, hi: int, kappa: int, F: GF2e, batch: int) -> list[tuple[int, int]]:
    kinv = F.inv(kappa)
    hits = []
    out = np.empty((max(1024, 4 * len(reps_arr)), 2), dtype=np.int64)
    for a in range(lo, hi, batch):
        b = min(a + batch, hi)
        even = store.even_coefficients(a, b)
        start = 0
        while start < b - a:
            k, start = _search_batch(reps_arr, even, kinv, F.mul_table, F.inv_table, F.sqrt_table, out, start)
            hits.extend((a + int(r), int(i)) for r, i in out[:k])
    return hits


def _scan_job(args):
    reps_list, path, lo, hi, kappa, batch = args
    store = ClassStore(path)
    return _scan_range(np.array(reps_list, dtype=np.int64), store, lo, hi, kappa, store.F, batch)


def herd_search(
    F: GF2e,
    reps: list[OPoly],
    store: ClassStore,
    kappa: int | None = None,
    workers: int = 1,
    checkpoint_dir: str | Path | None = None,
    resume: bool = False,
    range_size: int = 1 << 20,
    batch: int = 1 << 15,
    progress=None,
) -> SearchResult:
    """Two-stage search: f0 over the representatives, f_inf over the store."""
    if kappa is None:
        kappa = F.trace_one_smallest()
    if F.abs_trace(kappa) != 1:
        raise HerdError("kappa must have absolute trace 1")
    if store.F != F:
        raise HerdError("store was built over a different field")
    t0 = time.time()
    reps_arr = np.array([r.table for r in reps], dtype=np.int64)
    ranges = [(lo, min(lo + range_size, len(store))) for lo in range(0, len(store), range_size)]
    ck = Path(checkpoint_dir) if checkpoint_dir is not None else None
    if ck is not None:
        ck.mkdir(parents=True, exist_ok=True)

    def ck_path(lo, hi):
        return ck / f"range_{lo:012d}_{hi:012d}_k{kappa:x}.json"

    results: dict[tuple[int, int], list] = {}
    todo = []
    for lo, hi in ranges:
        if ck is not None and resume and ck_path(lo, hi).exists():
            results[(lo, hi)] = [tuple(x) for x in json.loads(ck_path(lo, hi).read_text())]
        else:
            todo.append((lo, hi))

    def done(lo, hi, hits):
        results[(lo, hi)] = hits
        if ck is not None:
            tmp = ck_path(lo, hi).with_suffix(".tmp")
            tmp.write_text(json.dumps(hits))
            tmp.replace(ck_path(lo, hi))
        if progress:
            progress(hi, len(store), len(hits))

    if workers > 1 and len(todo) > 1:
        import multiprocessing as mp

        jobs = [([list(map(int, r)) for r in reps_arr], str(store.path), lo, hi, kappa, batch) for lo, hi in todo]
        with mp.get_context("spawn").Pool(workers) as pool:
            for (lo, hi), hits in zip(todo, pool.imap(_scan_job, jobs)):
                done(lo, hi, hits)
    else:
        for lo, hi in todo:
            done(lo, hi, _scan_range(reps_arr, store, lo, hi, kappa, F, batch))

    hits = sorted((i, idx) for key in sorted(results) for idx, i in results[key])
    stage1 = [PairCandidate(i, idx, bytes(store.records[idx]), kappa, 1) for i, idx in hits]
    stage2 = []
    per_rep = {i: [0, 0] for i in range(len(reps))}
    for c in stage1:
        per_rep[c.rep][0] += 1
        if is_herd(reps[c.rep], OPoly.unpack(c.record, F), kappa, F):
            stage2.append(PairCandidate(c.rep, c.index, c.record, kappa, 2))
            per_rep[c.rep][1] += 1
    per_rep = {i: v for i, v in per_rep.items() if v[0]}
    return SearchResult(F.q, kappa, stage1, stage2, per_rep, time.time() - t0)


# -- fingerprints and isomorphism -----------------------------------------


class OvalClassifier:
    """Stabilizer order and class id for o-polynomials, against known representatives.

    Results are memoized by canonical table, since herds repeat members.
    """

    def __init__(self, F: GF2e, reps: list[OPoly]):
        self.F = F
        self.reps = reps
        self._rep_orders: list[int | None] = [None] * len(reps)
        self._memo: dict[bytes, tuple[int, int]] = {}

    def rep_order(self, i: int) -> int:
        if self._rep_orders[i] is None:
            self._rep_orders[i] = set_stabilizer(oval_points(self.reps[i])).order
        return self._rep_orders[i]

    def classify(self, table) -> tuple[int, int]:
        F = self.F
        table = np.asarray(table, dtype=np.int64)
        key = canonical_rows(table[None, :], F)[0].tobytes()
        if key in self._memo:
            return self._memo[key]
        O = oval_points(table, F)
        order = set_stabilizer(O).order
        cid = -1
        for i, r in enumerate(self.reps):
            if np.array_equal(canonical_rows(np.asarray(r.table)[None, :], F)[0], canonical_rows(table[None, :], F)[0]):
                cid = i
                break
        if cid < 0:
            for i, r in enumerate(self.reps):
                if self.rep_order(i) == order and equivalent_ovals(O, oval_points(r)):
                    cid = i
                    break
        self._memo[key] = (order, cid)
        return order, cid


@dataclass(frozen=True)
class HerdFingerprint:
    members: tuple  # (stabilizer order, class id) per member, member order

    @property
    def multiset(self) -> tuple:
        return tuple(sorted(self.members))

    def __eq__(self, other) -> bool:
        return isinstance(other, HerdFingerprint) and self.multiset == other.multiset

    def __hash__(self) -> int:
        return hash(self.multiset)

    def summary(self) -> dict:
        out: dict[tuple[int, int], int] = {}
        for m in self.members:
            out[m] = out.get(m, 0) + 1
        return {f"order={o} class={c}": n for (o, c), n in sorted(out.items())}


def herd_fingerprint(H: Herd, classifier: OvalClassifier) -> HerdFingerprint:
    return HerdFingerprint(tuple(classifier.classify(row) for row in H.members()))


@njit(cache=True)
def _herd_iso_kernel(m1, m2, psis, mul, inv, frob, perm):
    """First psi index mapping every member row of m1 into the set of rows of
    m2 (canonical), inducing a bijection written to perm; -1 if none."""
    n, q = m1.shape
    e = frob.shape[0]
    row = np.empty(q, np.int64)
    used = np.zeros(n, np.int64)
    for k in range(psis.shape[0]):
        a, b, c, d, g = psis[k, 0], psis[k, 1], psis[k, 2], psis[k, 3], psis[k, 4]
        for i in range(n):
            used[i] = 0
        ok = True
        gi = (e - g) % e
        for j in range(n):
            # psi applied to member j of the first herd
            fab = 0
            if b != 0:
                fab = frob[g, m1[j, frob[gi, mul[a, inv[b]]]]]
            t3 = 0
            if d != 0:
                t3 = mul[d, frob[g, m1[j, frob[gi, mul[c, inv[d]]]]]]
            for x in range(q):
                bx = mul[b, x]
                den = bx ^ d
                v = mul[bx, fab] ^ t3
                if den != 0:
                    y = mul[mul[a, x] ^ c, inv[den]]
                    v ^= mul[den, frob[g, m1[j, frob[gi, y]]]]
                row[x] = v
            if row[1] == 0:
                ok = False
                break
            si = inv[row[1]]
            # equal rows are interchangeable, so the first unused match will do
            hit = -1
            for i in range(n):
                if used[i]:
                    continue
                same = True
                for x in range(q):
                    if mul[si, row[x]] != m2[i, x]:
                        same = False
                        break
                if same:
                    hit = i
                    break
            if hit < 0:
                ok = False
                break
            used[hit] = 1
            perm[j] = hit
        if ok:
            return k
    return -1


@dataclass(frozen=True)
class HerdIsomorphism:
    psi: MagicMap
    perm: tuple  # member index of H1 -> member index of H2 (q means infinity)


def herds_isomorphic(H1: Herd, H2: Herd, classifier: OvalClassifier | None = None) -> HerdIsomorphism | None:
    """A psi in PGammaL(2,q) with psi f_s in <f'_pi(s)> for a permutation pi."""
    F = H1.F
    if classifier is not None and herd_fingerprint(H1, classifier) != herd_fingerprint(H2, classifier):
        return None
    m1 = np.ascontiguousarray(H1.members())
    m2 = np.ascontiguousarray(canonical_rows(H2.members(), F))
    perm = np.zeros(F.q + 1, dtype=np.int64)
    psis = np.ascontiguousarray(pgaml2(F), dtype=np.int64)
    k = _herd_iso_kernel(m1, m2, psis, F.mul_table, F.inv_table, F.frob_table, perm)
    if k < 0:
        return None
    a, b, c, d, g = (int(x) for x in psis[k])
    return HerdIsomorphism(MagicMap(F, a, b, c, d, g), tuple(int(x) for x in perm))


def isomorphism_classes(herds: list[Herd], classifier: OvalClassifier | None = None) -> list[list[int]]:
    """Partition herd indices into isomorphism classes (greedy against class heads)."""
    classes: list[list[int]] = []
    for i, H in enumerate(herds):
        for cl in classes:
            if herds_isomorphic(herds[cl[0]], H, classifier) is not None:
                cl.append(i)
                break
        else:
            classes.append([i])
    return classes



def known_hyperovals(F: GF2e) -> dict[str, np.ndarray]:
    """O-permutation tables of the hyperovals arising from the three flock families.

    Regular (t^(1/2)), Subiaco I (f0 of the Subiaco clan), Subiaco II (the
    member f_a of the Subiaco herd with a^2 + a + 1 = 0, when q is a square)
    and Adelaide (f0 of the Adelaide clan, e > 2 even).  Some of these may be
    equivalent for small q; no deduplication is done here.
    """
    from .qclan import ParameterError, adelaide_qclan, subiaco_qclan

    out = {"regular": F.sqrt_table.copy()}
    try:
        C = subiaco_qclan(F)
    except ParameterError:
        return out
    out["subiaco1"] = np.array(C.f0)
    H = Herd.from_tables(F, C.f0, C.finf, C.kappa)
    cube = [a for a in range(F.q) if F.mul(a, a) ^ a ^ 1 == 0]
    if cube:
        out["subiaco2"] = herd_member(H, cube[0])
    if F.e > 2 and F.e % 2 == 0:
        out["adelaide"] = np.array(adelaide_qclan(F).f0)
    return out


def named_herd(F: GF2e, family: str) -> Herd:
    from .qclan import adelaide_qclan, classical_qclan, subiaco_qclan

    make = {"classical": classical_qclan, "subiaco": subiaco_qclan, "adelaide": adelaide_qclan}
    if family not in make:
        raise HerdError(f"unknown family {family!r}")
    C = make[family](F)
    return Herd.from_tables(F, C.f0, C.finf, C.kappa)
