"""Geometry of PG(2,q): points, collineations, arcs, ovals and their stabilizers.

Points are normalized triples (first nonzero coordinate 1) with integer code
``x0*q^2 + x1*q + x2``; point sets are kept sorted by code.  A collineation
``(M, g)`` acts on row vectors by ``x -> (x^(2^g)) M`` followed by
normalization.

Set stabilizers and equivalences are found by the quadruple method: a
collineation is fixed by the image of an ordered frame, so we map a fixed
base frame of the source onto every ordered 4-tuple of the target (for every
field automorphism) and keep the maps that carry the set onto the target.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from dataclasses import field as dc_field

import numpy as np
from numba import njit

from .gf2e import GF2e

FUNDAMENTAL_QUADRANGLE = ((0, 0, 1), (0, 1, 0), (1, 0, 0), (1, 1, 1))


class GeometryError(ValueError):
    pass


# -- scalar helpers -------------------------------------------------------


def normalize(F: GF2e, x) -> tuple[int, int, int]:
    for c in x:
        if c:
            ci = F.inv(c)
            return tuple(F.mul(ci, y) for y in x)
    raise GeometryError("zero vector is not a projective point")


def encode(F: GF2e, p) -> int:
    return (p[0] * F.q + p[1]) * F.q + p[2]


def decode(F: GF2e, code: int) -> tuple[int, int, int]:
    q = F.q
    return (code // (q * q), (code // q) % q, code % q)


def all_points(F: GF2e) -> list[tuple[int, int, int]]:
    q = F.q
    pts = [(0, 0, 1)] + [(0, 1, x) for x in range(q)]
    pts += [(1, x, y) for x in range(q) for y in range(q)]
    return pts


def cross(F: GF2e, a, b) -> tuple[int, int, int]:
    m = F.mul
    return (m(a[1], b[2]) ^ m(a[2], b[1]), m(a[2], b[0]) ^ m(a[0], b[2]), m(a[0], b[1]) ^ m(a[1], b[0]))


def dot(F: GF2e, a, b) -> int:
    return F.mul(a[0], b[0]) ^ F.mul(a[1], b[1]) ^ F.mul(a[2], b[2])


def det3(F: GF2e, a, b, c) -> int:
    return dot(F, a, cross(F, b, c))


def line_through(F: GF2e, a, b) -> tuple[int, int, int]:
    return normalize(F, cross(F, a, b))


def mat_mul(F: GF2e, A, B):
    return tuple(
        tuple(F.mul(A[i][0], B[0][j]) ^ F.mul(A[i][1], B[1][j]) ^ F.mul(A[i][2], B[2][j]) for j in range(3))
        for i in range(3)
    )


def mat_inv(F: GF2e, A):
    d = det3(F, *A)
    if d == 0:
        raise GeometryError("singular matrix")
    di = F.inv(d)
    cols = [cross(F, A[1], A[2]), cross(F, A[2], A[0]), cross(F, A[0], A[1])]
    # inverse = adj / det; adj columns are these cross products
    return tuple(tuple(F.mul(di, cols[j][i]) for j in range(3)) for i in range(3))


def frame_matrix(F: GF2e, pts):
    """Matrix sending e0, e1, e2, e0+e1+e2 to the four given points."""
    R = tuple(tuple(p) for p in pts[:3])
    if det3(F, *R) == 0:
        raise GeometryError("first three points are collinear")
    Ri = mat_inv(F, R)
    p3 = pts[3]
    lam = [F.mul(p3[0], Ri[0][j]) ^ F.mul(p3[1], Ri[1][j]) ^ F.mul(p3[2], Ri[2][j]) for j in range(3)]
    if 0 in lam:
        raise GeometryError("points are not in general position")
    return tuple(tuple(F.mul(lam[i], R[i][j]) for j in range(3)) for i in range(3))


# -- collineations --------------------------------------------------------


@dataclass(frozen=True)
class Collineation:
    F: GF2e = dc_field(repr=False)
    M: tuple
    gamma: int = 0

    def __post_init__(self):
        if det3(self.F, *self.M) == 0:
            raise GeometryError("singular matrix")

    @classmethod
    def identity(cls, F: GF2e) -> "Collineation":
        return cls(F, ((1, 0, 0), (0, 1, 0), (0, 0, 1)), 0)

    def __call__(self, p):
        F = self.F
        x = [F.frobenius(c, self.gamma) for c in p]
        M = self.M
        y = tuple(F.mul(x[0], M[0][j]) ^ F.mul(x[1], M[1][j]) ^ F.mul(x[2], M[2][j]) for j in range(3))
        return normalize(F, y)

    def then(self, other: "Collineation") -> "Collineation":
        """The map p -> other(self(p))."""
        F = self.F
        Mg = tuple(tuple(F.frobenius(c, other.gamma) for c in row) for row in self.M)
        return Collineation(F, mat_mul(F, Mg, other.M), (self.gamma + other.gamma) % F.e)

    def same_map(self, other: "Collineation") -> bool:
        if self.gamma != other.gamma:
            return False
        pts = all_points(self.F)
        return all(self(p) == other(p) for p in pts)

    def as_row(self) -> list[int]:
        return [c for row in self.M for c in row] + [self.gamma]


def map_quadrangle(F: GF2e, src, dst) -> Collineation:
    """The unique projectivity sending the ordered quadruple src to dst."""
    A = frame_matrix(F, [tuple(p) for p in src])
    B = frame_matrix(F, [tuple(p) for p in dst])
    return Collineation(F, mat_mul(F, mat_inv(F, A), B), 0)


# -- point sets -----------------------------------------------------------

ROLES = ("set", "arc", "oval", "hyperoval")


@dataclass(frozen=True)
class PointSet:
    F: GF2e = dc_field(repr=False)
    points: tuple
    role: str = "set"

    @classmethod
    def from_points(cls, F: GF2e, pts, role: str = "set") -> "PointSet":
        if role not in ROLES:
            raise ValueError(f"unknown role {role!r}")
        norm = {normalize(F, p) for p in pts}
        return cls(F, tuple(sorted(norm, key=lambda p: encode(F, p))), role)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __contains__(self, p) -> bool:
        return normalize(self.F, p) in set(self.points)

    def codes(self) -> np.ndarray:
        return np.array([encode(self.F, p) for p in self.points], dtype=np.int64)

    def array(self) -> np.ndarray:
        return np.array(self.points, dtype=np.int64).reshape(-1, 3)

    def image(self, g: Collineation) -> "PointSet":
        return PointSet.from_points(self.F, [g(p) for p in self.points], self.role)

    def with_role(self, role: str) -> "PointSet":
        return PointSet.from_points(self.F, self.points, role)

    def add(self, p, role: str | None = None) -> "PointSet":
        return PointSet.from_points(self.F, list(self.points) + [p], role or self.role)

    def remove(self, p, role: str | None = None) -> "PointSet":
        p = normalize(self.F, p)
        return PointSet.from_points(self.F, [x for x in self.points if x != p], role or self.role)

    def to_text(self) -> str:
        lines = [f"q={self.F.q} role={self.role} n={len(self)}"]
        lines += [" ".join(format(c, "x") for c in p) for p in self.points]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, F: GF2e) -> "PointSet":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        header = dict(kv.split("=") for kv in lines[0].split())
        if int(header["q"]) != F.q:
            raise ValueError(f"point set is over GF({header['q']}), expected GF({F.q})")
        pts = [tuple(F.from_hex(c) for c in ln.split()) for ln in lines[1:]]
        ps = cls.from_points(F, pts, header.get("role", "set"))
        if "n" in header and int(header["n"]) != len(ps):
            raise ValueError("point count does not match header")
        return ps


# -- kernels --------------------------------------------------------------


@njit(cache=True)
def _arc_check(P, mul):
    n = P.shape[0]
    for i in range(n):
        for j in range(i + 1, n):
            # line through P[i], P[j]
            l0 = mul[P[i, 1], P[j, 2]] ^ mul[P[i, 2], P[j, 1]]
            l1 = mul[P[i, 2], P[j, 0]] ^ mul[P[i, 0], P[j, 2]]
            l2 = mul[P[i, 0], P[j, 1]] ^ mul[P[i, 1], P[j, 0]]
            for k in range(j + 1, n):
                if mul[l0, P[k, 0]] ^ mul[l1, P[k, 1]] ^ mul[l2, P[k, 2]] == 0:
                    return False
    return True


@njit(cache=True)
def _inv3(A, mul, inv):
    """Inverse of a 3x3 matrix; returns (ok, Ainv)."""
    out = np.zeros((3, 3), np.int64)
    c00 = mul[A[1, 1], A[2, 2]] ^ mul[A[1, 2], A[2, 1]]
    c01 = mul[A[1, 2], A[2, 0]] ^ mul[A[1, 0], A[2, 2]]
    c02 = mul[A[1, 0], A[2, 1]] ^ mul[A[1, 1], A[2, 0]]
    d = mul[A[0, 0], c00] ^ mul[A[0, 1], c01] ^ mul[A[0, 2], c02]
    if d == 0:
        return False, out
    di = inv[d]
    out[0, 0] = mul[di, c00]
    out[1, 0] = mul[di, c01]
    out[2, 0] = mul[di, c02]
    out[0, 1] = mul[di, mul[A[2, 1], A[0, 2]] ^ mul[A[2, 2], A[0, 1]]]
    out[1, 1] = mul[di, mul[A[2, 2], A[0, 0]] ^ mul[A[2, 0], A[0, 2]]]
    out[2, 1] = mul[di, mul[A[2, 0], A[0, 1]] ^ mul[A[2, 1], A[0, 0]]]
    out[0, 2] = mul[di, mul[A[0, 1], A[1, 2]] ^ mul[A[0, 2], A[1, 1]]]
    out[1, 2] = mul[di, mul[A[0, 2], A[1, 0]] ^ mul[A[0, 0], A[1, 2]]]
    out[2, 2] = mul[di, mul[A[0, 0], A[1, 1]] ^ mul[A[0, 1], A[1, 0]]]
    return True, out


@njit(cache=True)
def _matmul3(A, B, mul):
    C = np.zeros((3, 3), np.int64)
    for i in range(3):
        for j in range(3):
            C[i, j] = mul[A[i, 0], B[0, j]] ^ mul[A[i, 1], B[1, j]] ^ mul[A[i, 2], B[2, j]]
    return C


@njit(cache=True)
def _image_index(w, lam, T, mul, inv, q, index):
    """Index+1 in the target of the image of a point with weights w, 0 if absent."""
    a0 = mul[w[0], lam[0]]
    a1 = mul[w[1], lam[1]]
    a2 = mul[w[2], lam[2]]
    y0 = mul[a0, T[0, 0]] ^ mul[a1, T[1, 0]] ^ mul[a2, T[2, 0]]
    y1 = mul[a0, T[0, 1]] ^ mul[a1, T[1, 1]] ^ mul[a2, T[2, 1]]
    y2 = mul[a0, T[0, 2]] ^ mul[a1, T[1, 2]] ^ mul[a2, T[2, 2]]
    if y0 != 0:
        c = inv[y0]
        code = (q + mul[c, y1]) * q + mul[c, y2]
    elif y1 != 0:
        code = q + mul[inv[y1], y2]
    elif y2 != 0:
        code = 1
    else:
        return 0
    return index[code]


@njit(cache=True)
def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@njit(cache=True)
def _quadruple_search(W, base, dst, index, slot0, binv, mul, inv, q, first_only, elems, parent):
    """Enumerate collineations mapping the source set into the target.

    W[g, p] holds the frame weights of source point p under automorphism g
    (the coordinates of p^g in the basis given by the base frame).  For each
    ordered 4-tuple T of target points in general position, the candidate
    map sends p to sum_k W[g,p,k] lam_k T_k.  Returns the number of maps
    found; the first ``elems.shape[0]`` are written to ``elems`` as
    (M flattened, g) and every found map merges point orbits in ``parent``
    (source and target must then coincide).
    """
    ng, n = W.shape[0], W.shape[1]
    m = dst.shape[0]
    found = 0
    R = np.zeros((3, 3), np.int64)
    lam = np.zeros(3, np.int64)
    img = np.zeros(n, np.int64)
    seq = np.empty(n, np.int64)
    # check non-base points first; base points map correctly by construction
    k = 0
    for p in range(n):
        if p != base[0] and p != base[1] and p != base[2] and p != base[3]:
            seq[k] = p
            k += 1
    nseq = k
    for ii0 in range(slot0.shape[0]):
        i0 = slot0[ii0]
        for i1 in range(m):
            if i1 == i0:
                continue
            for i2 in range(m):
                if i2 == i0 or i2 == i1:
                    continue
                for c in range(3):
                    R[0, c] = dst[i0, c]
                    R[1, c] = dst[i1, c]
                    R[2, c] = dst[i2, c]
                ok, Ri = _inv3(R, mul, inv)
                if not ok:
                    continue
                for i3 in range(m):
                    if i3 == i0 or i3 == i1 or i3 == i2:
                        continue
                    good = True
                    for j in range(3):
                        lam[j] = mul[dst[i3, 0], Ri[0, j]] ^ mul[dst[i3, 1], Ri[1, j]] ^ mul[dst[i3, 2], Ri[2, j]]
                        if lam[j] == 0:
                            good = False
                    if not good:
                        continue
                    for g in range(ng):
                        hit = True
                        for s in range(nseq):
                            p = seq[s]
                            r = _image_index(W[g, p], lam, R, mul, inv, q, index)
                            if r == 0:
                                hit = False
                                break
                            img[p] = r - 1
                        if not hit:
                            continue
                        if found < elems.shape[0]:
                            FT = np.zeros((3, 3), np.int64)
                            for a in range(3):
                                for b in range(3):
                                    FT[a, b] = mul[lam[a], R[a, b]]
                            M = _matmul3(binv[g], FT, mul)
                            for a in range(3):
                                for b in range(3):
                                    elems[found, 3 * a + b] = M[a, b]
                            elems[found, 9] = g
                        found += 1
                        if first_only:
                            return found
                        if parent.shape[0] == n:
                            img[base[0]] = i0
                            img[base[1]] = i1
                            img[base[2]] = i2
                            img[base[3]] = i3
                            for p in range(n):
                                a = _find(parent, p)
                                b = _find(parent, img[p])
                                if a != b:
                                    parent[max(a, b)] = min(a, b)
    return found


@njit(cache=True)
def _full_group_scan(P, index, frob, mul, inv, q, out_count):
    """Brute-force set stabilizer over all of PGammaL(3,q); returns found maps."""
    n = P.shape[0]
    e = frob.shape[0]
    cap = 1 << 20
    res = np.zeros((cap, 10), np.int64)
    found = 0
    A = np.zeros((3, 3), np.int64)
    for code in range(q**9):
        x = code
        first = -1
        for k in range(9):
            A[k // 3, k % 3] = x % q
            x //= q
            if first < 0 and A[k // 3, k % 3] != 0:
                first = A[k // 3, k % 3]
        if first != 1:
            continue
        d = (
            mul[A[0, 0], mul[A[1, 1], A[2, 2]] ^ mul[A[1, 2], A[2, 1]]]
            ^ mul[A[0, 1], mul[A[1, 0], A[2, 2]] ^ mul[A[1, 2], A[2, 0]]]
            ^ mul[A[0, 2], mul[A[1, 0], A[2, 1]] ^ mul[A[1, 1], A[2, 0]]]
        )
        if d == 0:
            continue
        for g in range(e):
            ok = True
            for p in range(n):
                x0 = frob[g, P[p, 0]]
                x1 = frob[g, P[p, 1]]
                x2 = frob[g, P[p, 2]]
                y0 = mul[x0, A[0, 0]] ^ mul[x1, A[1, 0]] ^ mul[x2, A[2, 0]]
                y1 = mul[x0, A[0, 1]] ^ mul[x1, A[1, 1]] ^ mul[x2, A[2, 1]]
                y2 = mul[x0, A[0, 2]] ^ mul[x1, A[1, 2]] ^ mul[x2, A[2, 2]]
                if y0 != 0:
                    c = inv[y0]
                    cd = (q + mul[c, y1]) * q + mul[c, y2]
                elif y1 != 0:
                    cd = q + mul[inv[y1], y2]
                else:
                    cd = 1
                if index[cd] == 0:
                    ok = False
                    break
            if ok:
                if found < cap:
                    for k in range(9):
                        res[found, k] = A[k // 3, k % 3]
                    res[found, 9] = g
                found += 1
    out_count[0] = found
    return res[: min(found, cap)]


# -- arcs, nuclei ---------------------------------------------------------


def arc_check(S: PointSet | list) -> bool:
    """No three points collinear."""
    if isinstance(S, PointSet):
        F, P = S.F, S.array()
    else:
        F, pts = S
        P = np.array([normalize(F, p) for p in pts], dtype=np.int64).reshape(-1, 3)
    return bool(_arc_check(P, F.mul_table))


def _points_on_coordinate_line(F: GF2e, i: int):
    return [p for p in all_points(F) if p[i] == 0]


def tangent_lines(O: PointSet) -> list[tuple[int, int, int]]:
    F = O.F
    tangents = []
    for P in O.points:
        i = next(k for k in range(3) if P[k] != 0)
        ell = (1, 0, 0) if i == 0 else ((0, 1, 0) if i == 1 else (0, 0, 1))
        hit = {normalize(F, cross(F, line_through(F, P, Q), ell)) for Q in O.points if Q != P}
        free = [X for X in _points_on_coordinate_line(F, i) if X not in hit]
        if len(free) != 1:
            raise GeometryError("point set is not an oval: a point lies on more than one tangent")
        tangents.append(line_through(F, P, free[0]))
    return tangents


def nucleus(O: PointSet) -> tuple[int, int, int]:
    """The common point of the q+1 tangents of an oval (q even)."""
    F = O.F
    if len(O) != F.q + 1:
        raise GeometryError(f"an oval has {F.q + 1} points, got {len(O)}")
    tl = tangent_lines(O)
    N = normalize(F, cross(F, tl[0], tl[1]))
    if any(dot(F, L, N) for L in tl):
        raise GeometryError("tangents are not concurrent")
    return N


# -- stabilizers and equivalence ------------------------------------------


@dataclass
class StabGroup:
    """Set stabilizer in PGammaL(3,q), with all its elements."""

    F: GF2e = dc_field(repr=False)
    order: int
    elements: np.ndarray = dc_field(repr=False)  # rows (M flattened, gamma)
    point_orbits: list

    @property
    def generators(self) -> list[Collineation]:
        return [_collineation_from_row(self.F, r) for r in self.elements]


def _collineation_from_row(F: GF2e, row) -> Collineation:
    r = [int(x) for x in row]
    return Collineation(F, (tuple(r[0:3]), tuple(r[3:6]), tuple(r[6:9])), r[9])


def general_position_base(F: GF2e, pts, first=None) -> list[int]:
    """Indices of 4 points in general position, chosen greedily in order."""
    chosen: list[int] = [] if first is None else [first]
    for i, p in enumerate(pts):
        if i in chosen:
            continue
        cand = [pts[j] for j in chosen] + [p]
        if all(det3(F, *tri) != 0 for tri in itertools.combinations(cand, 3)):
            chosen.append(i)
            if len(chosen) == 4:
                return chosen
    raise GeometryError("no four points in general position")


def _index_array(F: GF2e, pts) -> np.ndarray:
    index = np.zeros(F.q**3, dtype=np.int64)
    for i, p in enumerate(pts):
        index[encode(F, p)] = i + 1
    return index


def _frame_weights(F: GF2e, pts, base) -> tuple[np.ndarray, np.ndarray]:
    """W[g, p] = coordinates of p^g in the frame basis of (base)^g, and the
    inverse frame matrices."""
    e = F.e
    n = len(pts)
    W = np.zeros((e, n, 3), dtype=np.int64)
    binv = np.zeros((e, 3, 3), dtype=np.int64)
    frob = F.frob_table
    P = np.array(pts, dtype=np.int64)
    for g in range(e):
        Pg = frob[g][P]
        Bi = np.array(mat_inv(F, frame_matrix(F, [tuple(Pg[b]) for b in base])), dtype=np.int64)
        binv[g] = Bi
        mt = F.mul_table
        for j in range(3):
            acc = np.zeros(n, dtype=np.int64)
            for k in range(3):
                acc ^= mt[Pg[:, k], Bi[k, j]]
            W[g, :, j] = acc
    return W, binv


def _search(F: GF2e, src, dst, base, slot0, first_only=False, cap=1 << 21, orbits=False):
    W, binv = _frame_weights(F, src, base)
    dst_arr = np.array(dst, dtype=np.int64).reshape(-1, 3)
    index = _index_array(F, dst)
    elems = np.zeros((cap, 10), dtype=np.int16 if F.q <= 1 << 14 else np.int64)
    parent = np.arange(len(src), dtype=np.int64) if orbits else np.zeros(0, dtype=np.int64)
    found = _quadruple_search(
        W, np.array(base, dtype=np.int64), dst_arr, index, np.array(slot0, dtype=np.int64),
        binv, F.mul_table, F.inv_table, F.q, first_only, elems, parent,
    )
    return found, elems[: min(found, cap)].astype(np.int64), parent


def _orbits_from_parent(parent) -> list[list[int]]:
    groups: dict[int, list[int]] = {}
    for i in range(len(parent)):
        r = i
        while parent[r] != r:
            r = parent[r]
        groups.setdefault(r, []).append(i)
    return sorted(groups.values())


def set_stabilizer(S: PointSet, cap: int = 1 << 21) -> StabGroup:
    """Exact stabilizer of S in PGammaL(3,q).

    For an oval (q even) every stabilizing map fixes the nucleus, so the base
    frame is the nucleus plus three oval points and the nucleus is pinned;
    the search then runs on the hyperoval S + nucleus and the orbits are
    reported on S alone.
    """
    F = S.F
    pts = list(S.points)
    if S.role == "oval" and F.q % 2 == 0 and len(S) == F.q + 1:
        N = nucleus(S)
        ext = pts + [N]
        base = general_position_base(F, ext, first=len(pts))
        found, elems, parent = _search(F, ext, ext, base, [len(pts)], cap=cap, orbits=True)
        orbits = [o for o in _orbits_from_parent(parent) if o != [len(pts)]]
    else:
        base = general_position_base(F, pts)
        found, elems, parent = _search(F, pts, pts, base, list(range(len(pts))), cap=cap, orbits=True)
        orbits = _orbits_from_parent(parent)
    orbit_points = [[pts[i] for i in o] for o in orbits]
    return StabGroup(F, int(found), elems, orbit_points)


def point_orbits(G: StabGroup, S: PointSet) -> list[list]:
    """Orbit partition of S under the elements of G (union-find)."""
    F = S.F
    pts = list(S.points)
    pos = {p: i for i, p in enumerate(pts)}
    parent = list(range(len(pts)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for g in G.generators:
        for i, p in enumerate(pts):
            j = pos[g(p)]
            a, b = find(i), find(j)
            if a != b:
                parent[max(a, b)] = min(a, b)
    groups: dict[int, list] = {}
    for i, p in enumerate(pts):
        groups.setdefault(find(i), []).append(p)
    return sorted(groups.values())


def full_group_stabilizer(S: PointSet) -> np.ndarray:
    """Every element of PGammaL(3,q) stabilizing S, by scanning the whole group.

    Only feasible for tiny q (q^9 matrices); used as an oracle.
    """
    F = S.F
    if F.q > 4:
        raise GeometryError("full group scan is limited to q <= 4")
    count = np.zeros(1, dtype=np.int64)
    res = _full_group_scan(S.array(), _index_array(F, S.points), F.frob_table, F.mul_table, F.inv_table, F.q, count)
    return res


def equivalence(S1: PointSet, S2: PointSet) -> Collineation | None:
    """A collineation mapping S1 onto S2, or None."""
    F = S1.F
    if len(S1) != len(S2):
        return None
    src, dst = list(S1.points), list(S2.points)
    if S1.role == "oval" and S2.role == "oval" and F.q % 2 == 0 and len(S1) == F.q + 1:
        src = src + [nucleus(S1)]
        dst = dst + [nucleus(S2)]
        base = general_position_base(F, src, first=len(src) - 1)
        slot0 = [len(dst) - 1]
    else:
        base = general_position_base(F, src)
        slot0 = list(range(len(dst)))
    found, elems, _ = _search(F, src, dst, base, slot0, first_only=True, cap=1)
    if not found:
        return None
    return _collineation_from_row(F, elems[0])


def equivalent_ovals(O1: PointSet, O2: PointSet) -> bool:
    return equivalence(O1, O2) is not None


# -- hyperovals and oval classes ------------------------------------------


def frame_to_fundamental(F: GF2e, nuc, a, b, c) -> Collineation:
    """Projectivity sending nuc, a, b, c to (0,0,1), (0,1,0), (1,0,0), (1,1,1)."""
    return map_quadrangle(F, [nuc, a, b, c], FUNDAMENTAL_QUADRANGLE)


def oval_to_table(O: PointSet, nuc=None) -> np.ndarray:
    """Normalize an oval onto the fundamental quadrangle and read off f.

    The nucleus goes to (0,0,1) and the three smallest oval points to
    (0,1,0), (1,0,0), (1,1,1); the image is then D(f) with f(0)=0, f(1)=1.
    """
    F = O.F
    if nuc is None:
        nuc = nucleus(O)
    a, b, c = O.points[:3]
    g = frame_to_fundamental(F, nuc, a, b, c)
    img = [g(p) for p in O.points]
    table = np.full(F.q, -1, dtype=np.int64)
    for p in img:
        if p == (0, 1, 0):
            continue
        if p[0] != 1:
            raise GeometryError("normalized oval has an unexpected point at infinity")
        table[p[1]] = p[2]
    if (table < 0).any():
        raise GeometryError("normalized oval is not a graph over GF(q)")
    return table


def hyperoval_from_table(F: GF2e, table) -> PointSet:
    pts = [(1, t, int(table[t])) for t in range(F.q)] + [(0, 1, 0), (0, 0, 1)]
    return PointSet.from_points(F, pts, role="hyperoval")


def oval_class_reps(hyperovals: list[PointSet], with_origin: bool = False):
    """One o-polynomial per oval class, from the point orbits of each hyperoval."""
    from .opoly import interpolate, is_opermutation

    reps = []
    origin = []
    for h, H in enumerate(hyperovals):
        G = set_stabilizer(H.with_role("hyperoval"))
        for orbit in G.point_orbits:
            P = orbit[0]
            O = H.remove(P, role="oval")
            table = oval_to_table(O, nuc=P)
            f = interpolate(table, H.F)
            if not is_opermutation(table, H.F) or f(1) != 1:
                raise GeometryError("derived oval is not an o-polynomial")
            if all(f != r for r in reps):
                reps.append(f)
                origin.append((h, P, len(orbit), G.order))
    return (reps, origin) if with_origin else reps


def _hyperovals_through_frame(F: GF2e) -> list[tuple]:
    pts = all_points(F)
    frame = [normalize(F, p) for p in FUNDAMENTAL_QUADRANGLE]
    rest = [p for p in pts if p not in frame]
    target = F.q + 2
    results = []

    def extend(arc, lines, start):
        if len(arc) == target:
            results.append(tuple(sorted(arc, key=lambda p: encode(F, p))))
            return
        for i in range(start, len(rest)):
            p = rest[i]
            if any(dot(F, L, p) == 0 for L in lines):
                continue
            new_lines = [line_through(F, a, p) for a in arc]
            extend(arc + [p], lines + new_lines, i + 1)

    lines0 = [line_through(F, a, b) for a, b in itertools.combinations(frame, 2)]
    extend(list(frame), lines0, 0)
    return results


def hyperoval_census(F: GF2e) -> list[PointSet]:
    """All hyperovals of PG(2,q) up to equivalence, by exhaustive search (q <= 8)."""
    if F.q not in (2, 4, 8):
        raise GeometryError("hyperoval census is limited to q in {2, 4, 8}")
    found = [PointSet.from_points(F, h, "hyperoval") for h in _hyperovals_through_frame(F)]
    classes: list[PointSet] = []
    for H in found:
        if not any(equivalence(H, C) is not None for C in classes):
            classes.append(H)
    return classes
