"""q-clans, flocks of the quadratic cone y^2 = xz, and the named families.

A q-clan is stored by the upper-triangular representatives
``A_t = (a_t, b_t; 0, c_t)`` of its q matrix classes, as three int arrays
indexed by the encoding of t.  Two 2x2 matrices are equivalent when they
agree on the diagonal and on the sum of the off-diagonal entries, so the
class of ``((x, y), (w, z))`` is the triple ``(x, y + w, z)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from dataclasses import field as dc_field

import numpy as np

from .gf2e import GF2e, QuadExt


class ParameterError(ValueError):
    pass


# -- matrices and forms ---------------------------------------------------


def matrix_class(A) -> tuple[int, int, int]:
    (x, y), (w, z) = A
    return (x, y ^ w, z)


def matrix_equiv(A, B) -> bool:
    return matrix_class(A) == matrix_class(B)


def form_value(F: GF2e, A, u) -> int:
    """u A u^T for a row vector u."""
    a, m, c = matrix_class(A)
    x, y = u
    return F.mul(a, F.mul(x, x)) ^ F.mul(m, F.mul(x, y)) ^ F.mul(c, F.mul(y, y))


def _anisotropic_brute(F: GF2e, a: int, m: int, c: int) -> bool:
    x = np.arange(F.q)
    mt = F.mul_table
    xx = mt[x, x].astype(np.int64)
    # nonzero u up to scalars: (x, 1) and (1, 0)
    vals = mt[a, xx].astype(np.int64) ^ mt[m, x] ^ c
    return bool(a != 0 and (vals != 0).all())


def _anisotropic_trace(F: GF2e, a: int, m: int, c: int) -> bool:
    if m == 0:
        # a x^2 + c y^2 = (sqrt(a) x + sqrt(c) y)^2 always has a nontrivial zero
        return False
    return F.abs_trace(F.div(F.mul(a, c), F.mul(m, m))) == 1


def is_anisotropic(F: GF2e, A, method: str = "both") -> bool:
    """Whether u A u^T = 0 only for u = 0.

    ``method`` is "brute", "trace" or "both" (both computed, must agree).
    """
    a, m, c = matrix_class(A)
    if method == "brute":
        return _anisotropic_brute(F, a, m, c)
    if method == "trace":
        return _anisotropic_trace(F, a, m, c)
    r1 = _anisotropic_brute(F, a, m, c)
    r2 = _anisotropic_trace(F, a, m, c)
    if r1 != r2:
        raise AssertionError(f"anisotropy criteria disagree on {(a, m, c)}")
    return r1


# -- q-clans --------------------------------------------------------------


@dataclass
class QClan:
    F: GF2e = dc_field(repr=False)
    a: np.ndarray = dc_field(repr=False)
    b: np.ndarray = dc_field(repr=False)
    c: np.ndarray = dc_field(repr=False)
    kappa: int | None = None
    name: str = ""
    f0: np.ndarray | None = dc_field(default=None, repr=False)
    finf: np.ndarray | None = dc_field(default=None, repr=False)
    params: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        for arr in (self.a, self.b, self.c):
            if len(arr) != self.F.q:
                raise ValueError("a q-clan has exactly q entries")
        self.a = np.asarray(self.a, dtype=np.int64)
        self.b = np.asarray(self.b, dtype=np.int64)
        self.c = np.asarray(self.c, dtype=np.int64)

    @property
    def q(self) -> int:
        return self.F.q

    def matrix(self, t: int):
        return ((int(self.a[t]), int(self.b[t])), (0, int(self.c[t])))

    def classes(self) -> list[tuple[int, int, int]]:
        return [(int(self.a[t]), int(self.b[t]), int(self.c[t])) for t in range(self.q)]

    @property
    def normalized(self) -> bool:
        """A_t = (f0(t), t^(1/2); 0, kappa f_inf(t)) with f0, f_inf fixing 0 and 1."""
        F = self.F
        if self.kappa is None or F.abs_trace(self.kappa) != 1:
            return False
        if not np.array_equal(self.b, F.sqrt_table):
            return False
        finf = F.vmul(self.c, F.inv(self.kappa))
        return bool(self.a[0] == 0 and self.a[1] == 1 and finf[0] == 0 and finf[1] == 1)

    def shifted(self) -> "QClan":
        """The equivalent clan with A_0 = 0 (add A_0 to every class)."""
        return QClan(self.F, self.a ^ self.a[0], self.b ^ self.b[0], self.c ^ self.c[0], None, self.name)

    def to_text(self) -> str:
        F = self.F
        kap = "-" if self.kappa is None else format(self.kappa, "x")
        lines = [f"q={F.q} poly={F.poly:x} normalized={int(self.normalized)} kappa={kap} name={self.name or '-'}"]
        for t in range(F.q):
            lines.append(f"{t:x} {self.a[t]:x} {self.b[t]:x} {self.c[t]:x}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, F: GF2e) -> "QClan":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        header = dict(kv.split("=", 1) for kv in lines[0].split())
        if int(header["q"]) != F.q:
            raise ValueError(f"clan is over GF({header['q']}), expected GF({F.q})")
        a = np.zeros(F.q, dtype=np.int64)
        b = np.zeros(F.q, dtype=np.int64)
        c = np.zeros(F.q, dtype=np.int64)
        seen = set()
        for ln in lines[1:]:
            t, x, y, z = (F.from_hex(s) for s in ln.split())
            a[t], b[t], c[t] = x, y, z
            seen.add(t)
        if len(seen) != F.q:
            raise ValueError("clan file does not list every t exactly once")
        kap = header.get("kappa", "-")
        name = header.get("name", "-")
        return cls(F, a, b, c, None if kap == "-" else F.from_hex(kap), "" if name == "-" else name)


def is_qclan(C: QClan) -> bool:
    """All pairwise differences anisotropic (trace criterion, vectorized).

    For a normalized clan the herd-style condition
    Tr(kappa (f0(s)+f0(t)) (finf(s)+finf(t)) / (s+t)) = 1 is evaluated too
    and must agree.
    """
    F = C.F
    s, t = np.triu_indices(F.q, k=1)
    da, dm, dc = C.a[s] ^ C.a[t], C.b[s] ^ C.b[t], C.c[s] ^ C.c[t]
    if (dm == 0).any():
        result = False
    else:
        inv = F.inv_table
        ratio = F.vmul(F.vmul(da, dc), inv[F.vmul(dm, dm)])
        result = bool((F.trace_table[ratio] == 1).all())
    if C.normalized:
        finf = F.vmul(C.c, F.inv(C.kappa))
        x = F.vmul(F.vmul(C.a[s] ^ C.a[t], finf[s] ^ finf[t]), F.inv_table[s ^ t])
        alt = bool((F.trace_table[F.vmul(x, C.kappa)] == 1).all())
        if alt != result:
            raise AssertionError("normalized trace condition disagrees with anisotropy")
    return result


def is_qclan_brute(C: QClan) -> bool:
    F = C.F
    for s, t in itertools.combinations(range(F.q), 2):
        A = ((int(C.a[s] ^ C.a[t]), int(C.b[s] ^ C.b[t])), (0, int(C.c[s] ^ C.c[t])))
        if not is_anisotropic(F, A, method="brute"):
            return False
    return True


# -- cone and flocks ------------------------------------------------------

VERTEX = (0, 0, 0, 1)


def _normalize4(F: GF2e, x) -> tuple:
    for v in x:
        if v:
            vi = F.inv(v)
            return tuple(F.mul(vi, y) for y in x)
    raise ValueError("zero vector")


def cone_points(F: GF2e) -> list[tuple]:
    """The q(q+1) points of y^2 = xz other than the vertex, as (u^2, uv, v^2, w)."""
    pts = []
    for u, v in [(1, v) for v in range(F.q)] + [(0, 1)]:
        base = (F.mul(u, u), F.mul(u, v), F.mul(v, v))
        for w in range(F.q):
            pts.append(_normalize4(F, base + (w,)))
    return pts


def flock_planes(C: QClan) -> list[tuple[int, int, int, int]]:
    return [(int(C.a[t]), int(C.b[t]), int(C.c[t]), 1) for t in range(C.q)]


def is_flock(planes, F: GF2e) -> bool:
    """q planes whose sections of the cone avoid V, have q+1 points each and
    partition the non-vertex points of the cone."""
    planes = [tuple(p) for p in planes]
    if len(planes) != F.q or len(set(_normalize4(F, p) for p in planes)) != F.q:
        return False
    pts = np.array(cone_points(F), dtype=np.int64)
    mt = F.mul_table
    covered = np.zeros(len(pts), dtype=np.int64)
    for P in planes:
        if P[3] == 0:
            return False  # plane through the vertex
        vals = mt[pts[:, 0], P[0]] ^ mt[pts[:, 1], P[1]] ^ mt[pts[:, 2], P[2]] ^ mt[pts[:, 3], P[3]]
        on = vals == 0
        if on.sum() != F.q + 1:
            return False
        covered += on
    return bool((covered == 1).all())


def has_common_line(planes, F: GF2e) -> bool:
    """Whether all planes contain a common line (rank of the plane matrix <= 2)."""
    rows = [list(p) for p in planes]
    # Gaussian elimination over GF(q)
    rank = 0
    ncol = 4
    for col in range(ncol):
        piv = next((i for i in range(rank, len(rows)) if rows[i][col]), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        pi = F.inv(rows[rank][col])
        rows[rank] = [F.mul(pi, v) for v in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][col]:
                f = rows[i][col]
                rows[i] = [v ^ F.mul(f, w) for v, w in zip(rows[i], rows[rank])]
        rank += 1
    return rank <= 2


# -- named families -------------------------------------------------------


def normalized_qclan(F: GF2e, f0, finf, kappa: int, name: str = "") -> QClan:
    f0 = np.asarray(f0, dtype=np.int64)
    finf = np.asarray(finf, dtype=np.int64)
    return QClan(F, f0.copy(), F.sqrt_table.copy(), F.vmul(finf, kappa), kappa, name, f0, finf)


def classical_qclan(F: GF2e, kappa: int | None = None) -> QClan:
    """A_t = (t^(1/2), t^(1/2); 0, kappa t^(1/2)) with Tr(kappa) = 1."""
    if kappa is None:
        kappa = F.trace_one_smallest()
    if F.abs_trace(kappa) != 1:
        raise ParameterError("kappa must have absolute trace 1")
    s = F.sqrt_table
    return normalized_qclan(F, s, s, kappa, "classical")


def subiaco_valid_delta(F: GF2e, delta: int) -> bool:
    if delta == 0:
        return False
    d2 = F.mul(delta, delta)
    if d2 ^ delta ^ 1 == 0 or F.abs_trace(F.inv(delta)) != 1:
        return False
    return F.mul(d2, F.mul(d2, delta)) ^ d2 ^ F.sqrt(delta) != 0


def subiaco_qclan(F: GF2e, delta: int | None = None) -> QClan:
    if delta is None:
        for d in range(F.q):
            if subiaco_valid_delta(F, d):
                C = subiaco_qclan(F, d)
                if is_qclan(C):
                    return C
        raise ParameterError(f"no valid Subiaco parameter for q={F.q}")
    if not subiaco_valid_delta(F, delta):
        raise ParameterError("delta must satisfy d^2+d+1 != 0 and Tr(1/d) = 1")
    m, inv = F.mul, F.inv
    d = delta
    d2 = m(d, d)
    d3 = m(d2, d)
    d4 = m(d2, d2)
    d5 = m(d4, d)
    dh = F.sqrt(d)
    one_d_d2 = 1 ^ d ^ d2
    big = d2 ^ d5 ^ dh
    kappa = F.div(big, m(d, one_d_d2))
    f0 = np.zeros(F.q, dtype=np.int64)
    finf = np.zeros(F.q, dtype=np.int64)
    for t in range(F.q):
        t2 = m(t, t)
        t3 = m(t2, t)
        t4 = m(t2, t2)
        th = F.sqrt(t)
        den = m(t2 ^ m(d, t) ^ 1, t2 ^ m(d, t) ^ 1)
        num0 = m(d2, t4 ^ t) ^ m(m(d2, one_d_d2), t3 ^ t2)
        f0[t] = F.div(num0, den) ^ th
        numi = m(d4, t4) ^ m(m(d3, 1 ^ d2 ^ d4), t3) ^ m(m(d3, 1 ^ d2), t)
        finf[t] = F.div(numi, m(big, den)) ^ m(F.div(dh, big), th)
    C = normalized_qclan(F, f0, finf, kappa, "subiaco")
    C.params = {"delta": delta}
    return C


def adelaide_qclan(F: GF2e, beta=None, m: int | None = None) -> QClan:
    """The Adelaide q-clan for q = 2^e, e > 2 even.

    ``beta`` is a pair (u, v) in GF(q^2) = GF(q)[w] with beta^(q+1) = 1,
    beta != 1; ``m`` defaults to (q-1)/3.
    """
    if F.e <= 2 or F.e % 2:
        raise ParameterError("the Adelaide family needs q = 2^e with e > 2 even")
    q = F.q
    if m is None:
        m = (q - 1) // 3
    third = (q - 1) // 3
    if m % (q + 1) not in (third % (q + 1), (-third) % (q + 1)):
        raise ParameterError("m must be congruent to +-(q-1)/3 mod q+1")
    E = QuadExt(F)
    if beta is None:
        for b in E.unit_circle():
            if b == E.one:
                continue
            try:
                C = adelaide_qclan(F, b, m)
            except ParameterError:
                continue
            if is_qclan(C):
                return C
        raise ParameterError(f"no valid Adelaide parameter for q={q}")
    beta = tuple(beta)
    if beta == E.one or E.norm(beta) != 1:
        raise ParameterError("beta must satisfy beta^(q+1) = 1 and beta != 1")
    T = E.rel_trace
    mul, div = F.mul, F.div
    Tb = T(beta)
    Tbm = T(E.pow(beta, m))
    if Tb == 0 or Tbm == 0:
        raise ParameterError("T(beta) and T(beta^m) must be nonzero")
    kappa = div(Tbm, Tb) ^ F.inv(Tbm) ^ 1
    beta_q = E.conj(beta)
    beta2 = E.mul(beta, beta)
    f0 = np.zeros(q, dtype=np.int64)
    kfinf = np.zeros(q, dtype=np.int64)
    for t in range(q):
        th = F.sqrt(t)
        tt = E.embed(t)
        den = F.pow(t ^ mul(Tb, th) ^ 1, m - 1)
        if den == 0:
            raise ParameterError("vanishing denominator")
        x0 = T(E.pow(E.add(E.mul(beta, tt), beta_q), m))
        f0[t] = div(mul(Tbm, t ^ 1), Tb) ^ div(x0, mul(Tb, den)) ^ th
        x1 = T(E.pow(E.add(E.mul(beta2, tt), E.one), m))
        kfinf[t] = mul(div(Tbm, Tb), t) ^ div(x1, mul(mul(Tb, Tbm), den)) ^ div(th, Tbm)
    if F.abs_trace(kappa) != 1:
        raise ParameterError("kappa does not have trace 1")
    finf = F.vmul(kfinf, F.inv(kappa))
    C = normalized_qclan(F, f0, finf, kappa, "adelaide")
    C.params = {"beta": E.encode(beta), "m": m}
    return C


# -- equivalence oracle ---------------------------------------------------


@dataclass
class EquivWitness:
    lam: int
    B: tuple  # ((p, r), (s, u))
    M: tuple[int, int, int]  # class (x, y+w, z)
    sigma: int
    pi: tuple[int, ...]  # pi[t] = t'


def _gl2(F: GF2e) -> np.ndarray:
    q = F.q
    p, r, s, u = (x.ravel() for x in np.meshgrid(*(np.arange(q),) * 4, indexing="ij"))
    det = F.mul_table[p, u].astype(np.int64) ^ F.mul_table[r, s]
    keep = det != 0
    return np.stack([p[keep], r[keep], s[keep], u[keep]], axis=1)


def qclan_equiv_bruteforce(C1: QClan, C2: QClan, max_q: int = 8) -> EquivWitness | None:
    """Search (lam, B, sigma, M, pi) with A'_{pi(t)} = lam B A_t^sigma B^T + M.

    Both clans are first shifted to A_0 = 0.  Then M is the class of
    A'_{pi(0)}, so only q choices of M need trying.  The search runs over
    sigma, lam, M in increasing order with all of GL(2,q) vectorized; the
    first witness in that order (smallest B index) is returned.
    """
    F = C1.F
    if F.q > max_q:
        raise ParameterError(f"brute-force equivalence is limited to q <= {max_q}")
    A, Bc = C1.shifted(), C2.shifted()
    q = F.q
    mt = F.mul_table.astype(np.int64)
    target = np.full(q**3, -1, dtype=np.int64)
    for t in range(q):
        target[(Bc.a[t] * q + Bc.b[t]) * q + Bc.c[t]] = t
    G = _gl2(F)
    p, r, s, u = G.T

    def Q(a, m, c, x, y):
        return mt[a, mt[x, x]] ^ mt[m, mt[x, y]] ^ mt[c, mt[y, y]]

    for sigma in range(F.e):
        fr = F.frob_table[sigma]
        a_s, b_s, c_s = fr[A.a], fr[A.b], fr[A.c]
        for lam in range(1, q):
            for t0 in range(q):
                M = (int(Bc.a[t0]), int(Bc.b[t0]), int(Bc.c[t0]))
                alive = np.ones(len(G), dtype=bool)
                images = np.zeros((len(G), q), dtype=np.int64)
                for t in range(q):
                    x = mt[lam, Q(a_s[t], b_s[t], c_s[t], p, r)] ^ M[0]
                    y = mt[lam, mt[b_s[t], mt[p, u] ^ mt[r, s]]] ^ M[1]
                    z = mt[lam, Q(a_s[t], b_s[t], c_s[t], s, u)] ^ M[2]
                    img = target[(x * q + y) * q + z]
                    alive &= img >= 0
                    images[:, t] = img
                    if not alive.any():
                        break
                if alive.any():
                    k = int(np.flatnonzero(alive)[0])
                    pi = tuple(int(v) for v in images[k])
                    if len(set(pi)) != q:
                        continue
                    B = ((int(p[k]), int(r[k])), (int(s[k]), int(u[k])))
                    return EquivWitness(lam, B, M, sigma, pi)
    return None


def apply_equivalence(C: QClan, lam: int, B, sigma: int, M) -> QClan:
    """The clan t -> lam B A_t^sigma B^T + M (classes as upper triangular)."""
    F = C.F
    (p, r), (s, u) = B
    fr = F.frob_table[sigma]
    mul = F.mul
    a = np.zeros(F.q, dtype=np.int64)
    b = np.zeros(F.q, dtype=np.int64)
    c = np.zeros(F.q, dtype=np.int64)
    for t in range(F.q):
        x, m, z = int(fr[C.a[t]]), int(fr[C.b[t]]), int(fr[C.c[t]])

        def Q(v, w):
            return mul(x, mul(v, v)) ^ mul(m, mul(v, w)) ^ mul(z, mul(w, w))

        a[t] = mul(lam, Q(p, r)) ^ M[0]
        b[t] = mul(lam, mul(m, mul(p, u) ^ mul(r, s))) ^ M[1]
        c[t] = mul(lam, Q(s, u)) ^ M[2]
    return QClan(F, a, b, c, None, C.name + "'")
