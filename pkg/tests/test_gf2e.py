import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from herdflock.gf2e import CONWAY, FieldError, GF2e, QuadExt, field, is_irreducible_gf2

EXTS = range(1, 9)


@st.composite
def field_and_elements(draw, n=3):
    e = draw(st.sampled_from(list(EXTS)))
    F = field(1 << e)
    return F, [draw(st.integers(0, F.q - 1)) for _ in range(n)]


def test_conway_polynomials_irreducible():
    for e, poly in CONWAY.items():
        assert poly.bit_length() - 1 == e
        assert is_irreducible_gf2(poly)


def test_gf4_multiplication():
    F = field(4)
    # x^2 = x + 1 with x encoded as 2
    assert F.mul(2, 2) == 3
    assert F.mul(2, 3) == 1
    assert F.inv(2) == 3


@settings(max_examples=300)
@given(field_and_elements())
def test_field_axioms(fe):
    F, (a, b, c) = fe
    assert F.mul(a, b) == F.mul(b, a)
    assert F.mul(F.mul(a, b), c) == F.mul(a, F.mul(b, c))
    assert F.mul(a, b ^ c) == F.mul(a, b) ^ F.mul(a, c)
    if a:
        assert F.mul(a, F.inv(a)) == 1
        assert F.div(F.mul(a, b), a) == b


@settings(max_examples=300)
@given(field_and_elements())
def test_frobenius_and_sqrt(fe):
    F, (a, b, _) = fe
    assert F.frobenius(a ^ b, 1) == F.frobenius(a, 1) ^ F.frobenius(b, 1)
    assert F.frobenius(a, F.e) == a
    s = F.sqrt(a)
    assert F.mul(s, s) == a
    assert F.sqrt_table[a] == s
    for i in range(F.e):
        assert F.frob_table[i, a] == F.frobenius(a, i)


def test_trace_linear_and_balanced():
    for e in EXTS:
        F = field(1 << e)
        tr = [F.abs_trace(x) for x in F.elements()]
        assert sum(tr) == F.q // 2
        assert list(F.trace_table) == tr
        k = F.trace_one_smallest()
        assert F.abs_trace(k) == 1 and all(F.abs_trace(x) == 0 for x in range(k))


def test_pow_and_generator():
    F = field(64)
    g = F.generator
    assert F.pow(g, F.q - 1) == 1
    assert len({F.pow(g, i) for i in range(F.q - 1)}) == F.q - 1
    assert F.pow(5, -1) == F.inv(5)


def test_errors():
    F = field(8)
    with pytest.raises(FieldError):
        F.inv(0)
    with pytest.raises(FieldError):
        F.div(1, 0)
    with pytest.raises(FieldError):
        field(12)
    with pytest.raises(FieldError):
        GF2e(3, 0b1111)  # (x+1)(x^2+1) ... reducible
    with pytest.raises(FieldError):
        F.from_hex("8")


def test_serialization_round_trip():
    F = GF2e(6, 0x43)
    assert GF2e.from_description(F.describe()) == F
    assert all(F.from_hex(F.to_hex(x)) == x for x in F.elements())


def test_alternate_polynomial_gives_isomorphic_field():
    F, G = field(64), GF2e(6, 0x43)
    assert F != G
    # both have 32 trace-one elements and the same multiplicative orders
    assert sum(F.abs_trace(x) for x in F.elements()) == sum(G.abs_trace(x) for x in G.elements())


def test_quadratic_extension():
    for q in (4, 16, 64):
        F = field(q)
        E = QuadExt(F)
        els = list(E.elements())
        assert len(els) == q * q
        circle = E.unit_circle()
        assert len(circle) == q + 1
        for x in els[1:200]:
            # conjugation is x -> x^q and the norm is x^(q+1)
            assert E.conj(x) == E.pow(x, q)
            assert E.norm(x) == E.mul(x, E.conj(x))[0] and E.mul(x, E.conj(x))[1] == 0
            assert E.mul(x, E.inv(x)) == E.one
            assert E.rel_trace(x) == E.add(x, E.conj(x))[0]
            assert E.decode(E.encode(x)) == x
