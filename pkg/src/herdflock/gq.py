"""Generalized quadrangles from a q-clan (coset geometry) and from an oval (T2).

Both constructions are explicit and only meant for small q; they serve as
checks that the algebra elsewhere produces honest geometries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gf2e import GF2e
from .plane import PointSet, tangent_lines, normalize
from .qclan import QClan


class GQError(ValueError):
    pass


# -- the group G = {(alpha, c, beta)} -------------------------------------
#
# An element is a 5-tuple (a1, a2, c, b1, b2) with alpha = (a1, a2) and
# beta = (b1, b2).  The law is
#     (alpha, c, beta)(alpha', c', beta') = (alpha+alpha', c+c'+beta.alpha', beta+beta').


GroupElem = tuple[int, int, int, int, int]


def group_mul(F: GF2e, g: GroupElem, h: GroupElem) -> GroupElem:
    a1, a2, c, b1, b2 = g
    x1, x2, d, y1, y2 = h
    return (a1 ^ x1, a2 ^ x2, c ^ d ^ F.mul(b1, x1) ^ F.mul(b2, x2), b1 ^ y1, b2 ^ y2)


def group_inv(F: GF2e, g: GroupElem) -> GroupElem:
    a1, a2, c, b1, b2 = g
    return (a1, a2, c ^ F.mul(b1, a1) ^ F.mul(b2, a2), b1, b2)


IDENTITY: GroupElem = (0, 0, 0, 0, 0)


def _encode(F: GF2e, g: GroupElem) -> int:
    e = F.e
    a1, a2, c, b1, b2 = g
    return a1 | a2 << e | c << 2 * e | b1 << 3 * e | b2 << 4 * e


def _decode(F: GF2e, n: int) -> GroupElem:
    m = F.q - 1
    e = F.e
    return (n & m, n >> e & m, n >> 2 * e & m, n >> 3 * e & m, n >> 4 * e & m)


@dataclass
class FourGonalFamily:
    F: GF2e
    A: list[frozenset]  # A(t) for t in GF(q), then A(inf), as encoded element sets
    Astar: list[frozenset]


def four_gonal_family(C: QClan) -> FourGonalFamily:
    F = C.F
    q = F.q
    if q > 8:
        raise GQError("the 4-gonal family is only enumerated for q <= 8")
    m = F.mul
    A, As = [], []
    for t in range(q):
        (a, b), (_, c) = C.matrix(t)
        sub, star = set(), set()
        for x1 in range(q):
            for x2 in range(q):
                # alpha A alpha^T and alpha (A + A^T)
                val = m(a, m(x1, x1)) ^ m(b, m(x1, x2)) ^ m(c, m(x2, x2))
                beta = (m(b, x2), m(b, x1))
                sub.add(_encode(F, (x1, x2, val, *beta)))
                for z in range(q):
                    star.add(_encode(F, (x1, x2, z, *beta)))
        A.append(frozenset(sub))
        As.append(frozenset(star))
    A.append(frozenset(_encode(F, (0, 0, 0, y1, y2)) for y1 in range(q) for y2 in range(q)))
    As.append(frozenset(_encode(F, (0, 0, z, y1, y2)) for z in range(q) for y1 in range(q) for y2 in range(q)))
    return FourGonalFamily(F, A, As)


def is_subgroup(F: GF2e, S: frozenset) -> bool:
    if _encode(F, IDENTITY) not in S:
        return False
    els = [_decode(F, n) for n in S]
    return all(_encode(F, group_mul(F, g, h)) in S for g in els for h in els)


# -- incidence structures -------------------------------------------------


@dataclass
class IncidenceStructure:
    points: list  # labels, e.g. ("i", g) / ("ii", t, coset) / ("iii",)
    lines: list
    incidence: list[tuple[int, int]]  # (point index, line index)

    @property
    def counts(self) -> tuple[int, int]:
        return len(self.points), len(self.lines)

    def matrix(self) -> np.ndarray:
        N = np.zeros((len(self.points), len(self.lines)), dtype=np.int32)
        for p, l in self.incidence:
            N[p, l] = 1
        return N

    def to_text(self) -> str:
        out = [f"points {len(self.points)}", f"lines {len(self.lines)}", f"incidences {len(self.incidence)}"]
        out += [f"{p} {l}" for p, l in sorted(self.incidence)]
        return "\n".join(out) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "IncidenceStructure":
        lines = text.strip().splitlines()
        n_p = int(lines[0].split()[1])
        n_l = int(lines[1].split()[1])
        inc = [tuple(int(x) for x in ln.split()) for ln in lines[3:]]
        return cls(list(range(n_p)), list(range(n_l)), inc)

    def without(self, pair: tuple[int, int]) -> "IncidenceStructure":
        return IncidenceStructure(self.points, self.lines, [x for x in self.incidence if x != pair])


def _right_coset(F: GF2e, S: frozenset, g: GroupElem) -> frozenset:
    return frozenset(_encode(F, group_mul(F, _decode(F, s), g)) for s in S)


def build_gq(C: QClan) -> IncidenceStructure:
    """GQ(C) of order (q^2, q) as a coset geometry on G.

    Points: (i) elements of G, (ii) cosets A*(t)g, (iii) the symbol (inf).
    Lines:  (a) cosets A(t)g, (b) symbols [A(t)].
    """
    F = C.F
    q = F.q
    if q > 4:
        raise GQError("GQ(C) is only built for q <= 4")
    fam = four_gonal_family(C)
    n = q**5
    elements = [_decode(F, k) for k in range(n)]
    points: list = [("i", k) for k in range(n)]
    lines: list = []
    inc: list[tuple[int, int]] = []
    star_index: list[dict[int, int]] = []  # per t: element -> point index of its A*(t) coset
    for t in range(q + 1):
        idx: dict[int, int] = {}
        for k, g in enumerate(elements):
            if k in idx:
                continue
            coset = _right_coset(F, fam.Astar[t], g)
            p = len(points)
            points.append(("ii", t, min(coset)))
            for x in coset:
                idx[x] = p
        star_index.append(idx)
    infinity = len(points)
    points.append(("iii",))
    for t in range(q + 1):
        seen: set[int] = set()
        for k, g in enumerate(elements):
            if k in seen:
                continue
            coset = _right_coset(F, fam.A[t], g)
            seen |= coset
            li = len(lines)
            lines.append(("a", t, min(coset)))
            inc.extend((x, li) for x in sorted(coset))
            inc.append((star_index[t][k], li))  # A(t)g lies in A*(t)g
    for t in range(q + 1):
        li = len(lines)
        lines.append(("b", t))
        inc.append((infinity, li))
        inc.extend(sorted({(p, li) for p in star_index[t].values()}))
    return IncidenceStructure(points, lines, inc)


def build_t2(O: PointSet) -> IncidenceStructure:
    """Tits quadrangle T2(O) of order (q, q), O an oval in the plane x3 = 0 of PG(3,q).

    Points: (i) affine points (x, 1), (ii) planes meeting the plane at
    infinity in a tangent line of O, (iii) (inf).  Lines: (a) lines not at
    infinity through a point of O, (b) the points of O.
    """
    F = O.F
    q = F.q
    if q > 8:
        raise GQError("T2(O) is only built for q <= 8")
    if len(O) != q + 1:
        raise GQError("O must be an oval")
    ovals = list(O.points)
    tangents = dict(zip(ovals, _tangent_at(O)))
    affine = [(x0, x1, x2) for x0 in range(q) for x1 in range(q) for x2 in range(q)]
    aidx = {p: i for i, p in enumerate(affine)}
    points: list = [("i", p) for p in affine]
    plane_idx = {}
    for P in ovals:
        for d in range(q):
            plane_idx[(P, d)] = len(points)
            points.append(("ii", P, d))
    infinity = len(points)
    points.append(("iii",))
    lines: list = []
    inc: list[tuple[int, int]] = []
    m = F.mul
    for P in ovals:
        L = tangents[P]
        seen: set[tuple] = set()
        for x in affine:
            if x in seen:
                continue
            pts = [tuple(xi ^ m(mu, pi) for xi, pi in zip(x, P)) for mu in range(q)]
            seen.update(pts)
            li = len(lines)
            lines.append(("a", P, min(pts)))
            inc.extend((aidx[p], li) for p in pts)
            d = m(L[0], x[0]) ^ m(L[1], x[1]) ^ m(L[2], x[2])
            inc.append((plane_idx[(P, d)], li))
    for P in ovals:
        li = len(lines)
        lines.append(("b", P))
        inc.append((infinity, li))
        inc.extend((plane_idx[(P, d)], li) for d in range(q))
    return IncidenceStructure(points, lines, inc)


def _tangent_at(O: PointSet) -> list[tuple[int, int, int]]:
    """The tangent line at each point of O, in the order of O.points."""
    F = O.F
    out = []
    tl = tangent_lines(O)
    for P in O.points:
        hits = [L for L in tl if (F.mul(L[0], P[0]) ^ F.mul(L[1], P[1]) ^ F.mul(L[2], P[2])) == 0]
        if len(hits) != 1:
            raise GQError("each oval point must have exactly one tangent")
        out.append(normalize(F, hits[0]))
    return out


@dataclass(frozen=True)
class GQCheck:
    ok: bool
    axiom: str | None = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


def verify_gq(S: IncidenceStructure, s: int, t: int) -> GQCheck:
    """Check the generalized quadrangle axioms for order (s, t)."""
    N = S.matrix()
    per_line = N.sum(axis=0)
    bad = np.flatnonzero(per_line != s + 1)
    if len(bad):
        return GQCheck(False, "line size", f"line {bad[0]} has {per_line[bad[0]]} points, expected {s + 1}")
    per_point = N.sum(axis=1)
    bad = np.flatnonzero(per_point != t + 1)
    if len(bad):
        return GQCheck(False, "point degree", f"point {bad[0]} is on {per_point[bad[0]]} lines, expected {t + 1}")
    common = N @ N.T
    np.fill_diagonal(common, 0)
    if common.max(initial=0) > 1:
        p, r = np.unravel_index(int(np.argmax(common)), common.shape)
        return GQCheck(False, "two points on two lines", f"points {p} and {r} share {common[p, r]} lines")
    collinear = (common > 0).astype(np.int32)
    np.fill_diagonal(collinear, 1)
    proj = collinear @ N  # points of l collinear with P (P itself included)
    viol = (N == 0) & (proj != 1)
    if viol.any():
        p, l = np.argwhere(viol)[0]
        return GQCheck(False, "unique projection", f"point {p} and line {l}: {proj[p, l]} collinear points")
    return GQCheck(True)
