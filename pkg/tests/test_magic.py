import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from herdflock.gf2e import field
from herdflock.herd import known_hyperovals
from herdflock.magic import (
    MagicMap,
    canonical_class,
    magic_apply,
    magic_compose_check,
    magic_orbit_union,
    orbit_classes,
    orbit_tables,
    pgaml2,
    projective_equiv_via_magic,
    tables_to_records,
)
from herdflock.opoly import NotAnOPermutation, interpolate, is_opermutation, oval_points, power_table
from herdflock.plane import equivalent_ovals


def naive_apply(psi, table, F):
    """Direct evaluation from the coefficients of f, with f^g having coefficients c^(2^g)."""
    coeffs = [F.frobenius(c, psi.gamma) for c in interpolate(table, F).coeffs]

    def fg(x):
        v, p = 0, 1
        for c in [0] + list(coeffs):
            v ^= F.mul(c, p)
            p = F.mul(p, x)
        return v

    a, b, c, d = psi.a, psi.b, psi.c, psi.d
    scale = F.inv(F.sqrt(psi.det))
    out = []
    for x in range(F.q):
        den = F.mul(b, x) ^ d
        v = 0
        if den:
            v ^= F.mul(den, fg(F.div(F.mul(a, x) ^ c, den)))
        if b:
            v ^= F.mul(F.mul(b, x), fg(F.div(a, b)))
        if d:
            v ^= F.mul(d, fg(F.div(c, d)))
        out.append(F.mul(scale, v))
    return np.array(out)


@st.composite
def field_map(draw, qs=(8, 16, 32)):
    F = field(draw(st.sampled_from(qs)))
    G = pgaml2(F)
    a, b, c, d, g = (int(x) for x in G[draw(st.integers(0, len(G) - 1))])
    lam = draw(st.integers(1, F.q - 1))
    # a non-normalized representative of the same group element
    return F, MagicMap(F, F.mul(lam, a), F.mul(lam, b), F.mul(lam, c), F.mul(lam, d), g)


def opermutations(F):
    out = [power_table(F, 2), power_table(F, F.q // 2)]
    if F.e % 2:
        out.append(power_table(F, 6))
    return out


def test_group_size():
    for q in (4, 8, 16, 64):
        F = field(q)
        G = pgaml2(F)
        assert len(G) == q * (q * q - 1) * F.e
        assert len({tuple(r) for r in G}) == len(G)
    with pytest.raises(ValueError):
        pgaml2(field(512))


@settings(max_examples=200, deadline=None)
@given(field_map())
def test_kernel_matches_direct_formula(fm):
    F, psi = fm
    for t in opermutations(F):
        assert np.array_equal(magic_apply(psi, t, F), naive_apply(psi, t, F))


@settings(max_examples=300, deadline=None)
@given(field_map())
def test_preserves_opermutations(fm):
    F, psi = fm
    for t in opermutations(F):
        img = magic_apply(psi, t, F)
        assert img[0] == 0
        assert is_opermutation(img, F)


def test_preserves_opermutations_exhaustive_q4():
    F = field(4)
    t = power_table(F, 2)
    for row in pgaml2(F):
        assert is_opermutation(magic_apply(MagicMap(F, *map(int, row)), t, F), F)


@settings(max_examples=200, deadline=None)
@given(field_map(), st.data())
def test_action_law(fm, data):
    F, psi1 = fm
    _, psi2 = data.draw(field_map(qs=(F.q,)))
    t = opermutations(F)[-1]
    assert magic_compose_check(psi1, psi2, t, F)


def test_identity_and_scalars_act_trivially():
    F = field(16)
    t = power_table(F, 2)
    assert np.array_equal(magic_apply(MagicMap.identity(F), t, F), t)
    for lam in range(1, F.q):
        assert np.array_equal(magic_apply(MagicMap(F, lam, 0, 0, lam), t, F), t)
    psi = MagicMap(F, 3, 5, 7, 2, 1)
    assert psi.normalized().a == 1
    assert np.array_equal(magic_apply(psi.normalized(), t, F), magic_apply(psi, t, F))


def test_rejects_nonzero_constant():
    F = field(8)
    t = power_table(F, 2)
    t[0] = 1
    with pytest.raises(ValueError):
        magic_apply(MagicMap.identity(F), t, F)
    with pytest.raises(ValueError):
        MagicMap(F, 1, 1, 1, 1)


def exhaustive_opolys(F):
    out = []
    for perm in itertools.permutations(range(2, F.q)):
        t = np.array((0, 1) + perm)
        if is_opermutation(t, F):
            out.append(tuple(int(x) for x in t))
    return out


def test_orbit_union_covers_all_opolys_q8():
    F = field(8)
    every = set(exhaustive_opolys(F))
    union = set()
    for t in (power_table(F, 2), power_table(F, 4)):
        union |= {tuple(int(x) for x in r) for r in orbit_classes(t, F)}
    assert union == every
    assert len(orbit_classes(power_table(F, 2), F)) == 9


def test_orbit_tables_canonical():
    F = field(16)
    T = orbit_tables(power_table(F, 2), F)
    assert (T[:, 1] == 1).all() and (T[:, 0] == 0).all()
    # the orbit of the conic class is PGammaL(2,q) / stabilizer, q+1 at q=16
    assert len(orbit_classes(power_table(F, 2), F)) == 17


def test_records_round_trip():
    F = field(16)
    T = orbit_classes(power_table(F, 2), F)
    recs = tables_to_records(T, F, batch=5)
    for row, rec in zip(T, recs):
        assert canonical_class(row, F).record == bytes(rec)
    bad = T[:1].copy().astype(np.int64)
    bad[0, [2, 3]] = bad[0, [3, 2]]
    with pytest.raises(NotAnOPermutation):
        tables_to_records(bad, F)


def test_witness_implies_equivalent_ovals():
    for q in (4, 8):
        F = field(q)
        ops = exhaustive_opolys(F)
        for f, g in itertools.combinations(ops[:6], 2):
            psi = projective_equiv_via_magic(np.array(f), np.array(g), F)
            if psi is None:
                continue
            img = magic_apply(psi, np.array(f), F)
            assert canonical_class(img, F) == canonical_class(g, F)
            assert equivalent_ovals(oval_points(np.array(f), F), oval_points(np.array(g), F))


def test_conic_and_subiaco_not_magic_equivalent_q64():
    F = field(64)
    hyp = known_hyperovals(F)
    assert projective_equiv_via_magic(power_table(F, 2), hyp["subiaco1"], F) is None
    assert projective_equiv_via_magic(hyp["subiaco1"], hyp["subiaco1"], F) is not None


def test_orbit_union_store(tmp_path):
    F = field(8)
    reps = [power_table(F, 2), power_table(F, 4)]
    S = magic_orbit_union(reps, F, tmp_path / "a.bin")
    assert S.count == 10 and S.is_sorted_unique()
    # resume keeps the chunk files and gives the same store
    S2 = magic_orbit_union(reps, F, tmp_path / "a.bin", resume=True)
    assert bytes(np.asarray(S2.records)) == bytes(np.asarray(S.records))
    S3 = magic_orbit_union(reps, F, tmp_path / "b.bin", workers=2)
    assert bytes(np.asarray(S3.records)) == bytes(np.asarray(S.records))
    for t in exhaustive_opolys(F):
        assert interpolate(np.array(t), F) in S
