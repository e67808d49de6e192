import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from expzero.algebra import (
    AlgebraicInput, FieldElement, I_GEN, compare, eval_poly, extend_field,
    floor_real, imaginary_unit, make_field, rational_basis,
)
from expzero.errors import DegreeCapExceeded, NonIsolatedRoot, NotRealElement

SQRT2 = AlgebraicInput.make(["-2", "0", "1"], ["1", "2", "0", "0"])
SQRT3 = AlgebraicInput.make(["-3", "0", "1"], ["1", "2", "0", "0"])
CBRT2 = AlgebraicInput.make(["-2", "0", "0", "1"], ["1", "2", "-1", "1"])


@pytest.fixture(scope="module")
def q_sqrt2():
    field, (e,) = make_field([SQRT2])
    return field, e


@pytest.fixture(scope="module")
def q_sqrt2_i():
    field, (a, b) = make_field([SQRT2, I_GEN])
    return field, a, b


def test_single_quadratic_field(q_sqrt2):
    field, e = q_sqrt2
    assert field.degree == 2
    assert (e * e).as_fraction() == 2
    assert e.sign() == 1
    assert (-e).sign() == -1


def test_embedding_satisfies_minpoly_exactly(q_sqrt2_i):
    _, a, b = q_sqrt2_i
    assert eval_poly([Fraction(-2), Fraction(0), Fraction(1)], a).is_zero()
    assert eval_poly([Fraction(1), Fraction(0), Fraction(1)], b).is_zero()


def test_composite_field_of_two_quadratics():
    field, (a, b) = make_field([SQRT2, SQRT3])
    assert field.degree == 4
    assert ((a * b) ** 2).as_fraction() == 6
    # sqrt6 is not rational: coords must use the power basis nontrivially
    assert not (a * b).is_rational()


def test_conjugation_closure_same_minpoly():
    # adjoining i forces closure under conjugation within one polynomial's roots
    field, (e,) = make_field([I_GEN])
    assert field.degree == 2
    assert (e * e).as_fraction() == -1
    assert e.conj() == -e
    assert not e.is_real()


def test_conjugation_closure_complex_cubic():
    cc = AlgebraicInput.make(["-2", "0", "0", "1"], ["-2", "0", "0", "2"])
    field, (e,) = make_field([cc])
    assert field.degree == 6
    assert (e ** 3).as_fraction() == 2
    norm = e * e.conj()
    assert norm.is_real()
    assert norm.sign() == 1


def test_mixed_real_and_imaginary_generators():
    field, (a, b) = make_field([CBRT2, I_GEN])
    assert field.degree == 6
    assert (a ** 3).as_fraction() == 2
    assert a.conj() == a
    assert b.conj() == -b


def test_degree_cap():
    with pytest.raises(DegreeCapExceeded):
        make_field([SQRT2, SQRT3], degree_cap=3)


def test_box_must_isolate():
    with pytest.raises(NonIsolatedRoot):
        AlgebraicInput.make(["-2", "0", "1"], ["-2", "2", "-1", "1"]).locate()


def test_box_must_contain_a_root():
    with pytest.raises(NonIsolatedRoot):
        AlgebraicInput.make(["-2", "0", "1"], ["5", "6", "0", "0"]).locate()


def test_rational_root_in_degenerate_box():
    half = AlgebraicInput.make(["-1", "2"], ["1/2", "1/2", "0", "0"])
    field, (e,) = make_field([half])
    assert field.degree == 1
    assert e.as_fraction() == Fraction(1, 2)


def test_imaginary_unit_recovery(q_sqrt2_i):
    field, _, b = q_sqrt2_i
    iu = imaginary_unit(field)
    assert (iu * iu).as_fraction() == -1
    assert iu in (b, -b)


def test_division_and_inverse(q_sqrt2):
    field, e = q_sqrt2
    x = e + field.from_rational(Fraction(3))
    assert (x / x).as_fraction() == 1
    assert (x * x.inverse()).as_fraction() == 1


def test_sign_of_near_zero_difference(q_sqrt2):
    # 665857/470832 is a continued-fraction convergent of sqrt2: tiny but nonzero
    field, e = q_sqrt2
    d = e - field.from_rational(Fraction(665857, 470832))
    assert d.sign() == -1
    assert (-d).sign() == 1
    assert (d - d).sign() == 0


def test_compare_and_floor(q_sqrt2):
    field, e = q_sqrt2
    assert compare(e, field.from_rational(Fraction(3, 2))) == -1
    assert floor_real(e) == 1
    assert floor_real(-e) == -2
    assert floor_real(field.from_rational(Fraction(7, 2))) == 3
    assert floor_real(field.from_rational(Fraction(-7, 2))) == -4
    assert floor_real(field.from_rational(Fraction(4))) == 4


def test_floor_rejects_nonreal(q_sqrt2_i):
    _, _, b = q_sqrt2_i
    with pytest.raises(NotRealElement):
        floor_real(b)


def test_rational_basis_halves_and_thirds():
    out = rational_basis([Fraction(1, 2), Fraction(1, 3)])
    assert len(out.basis) == 1
    assert out.basis[0].as_fraction() == Fraction(1, 6)
    assert out.coords == ((3,), (2,))


def test_rational_basis_mixed_independence():
    field, (a, b) = make_field([SQRT2, SQRT3])
    out = rational_basis([a, b, a + b, field.zero()])
    assert len(out.basis) == 2
    assert out.coords == ((1, 0), (0, 1), (1, 1), (0, 0))


def test_rational_basis_exactness_identity():
    field, (a, b) = make_field([SQRT2, SQRT3])
    vals = [a * Fraction(2, 3), b * Fraction(1, 5), a * Fraction(1, 2) + b]
    out = rational_basis(vals)
    for v, row in zip(vals, out.coords):
        acc = field.zero()
        for c, bas in zip(row, out.basis):
            acc = acc + bas * Fraction(c)
        assert acc == v


def test_rational_basis_rejects_nonreal(q_sqrt2_i):
    _, _, b = q_sqrt2_i
    with pytest.raises(NotRealElement):
        rational_basis([b])


def test_extend_field_preserves_old_relations(q_sqrt2):
    field, e = q_sqrt2
    big, embed, (gi,) = extend_field(field, [I_GEN])
    assert big.degree == 4
    assert (embed(e) ** 2).as_fraction() == 2
    assert (gi * gi).as_fraction() == -1
    assert embed(e * e + e) == embed(e) ** 2 + embed(e)


def test_json_round_trip():
    again = AlgebraicInput.from_json(SQRT2.to_json())
    assert again.minpoly == SQRT2.minpoly
    assert again.box == SQRT2.box


def test_interval_encloses_true_value(q_sqrt2):
    _, e = q_sqrt2
    iv = e.interval(Fraction(1, 10 ** 12))
    assert iv.width <= Fraction(1, 10 ** 12)
    assert iv.lo <= Fraction(math.isqrt(2 * 10 ** 40), 10 ** 20) <= iv.hi


small_rats = st.fractions(
    min_value=Fraction(-8), max_value=Fraction(8), max_denominator=16)

_FIELD_2I, (_EMB_SQRT2_2I, _EMB_I_2I) = make_field([SQRT2, I_GEN])
_FIELD_R, (_EMB_SQRT2_R,) = make_field([SQRT2])


def elem_strategy(field):
    return st.builds(
        lambda coords: FieldElement(tuple(coords), field),
        st.lists(small_rats, min_size=field.degree, max_size=field.degree))


@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_ring_axioms(data):
    field = _FIELD_2I
    xs = elem_strategy(field)
    x, y, z = data.draw(xs), data.draw(xs), data.draw(xs)
    assert (x + y) * z == x * z + y * z
    assert x * y == y * x
    assert x - x == field.zero()
    assert x * field.one() == x


@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_conjugation_is_ring_involution(data):
    field = _FIELD_2I
    xs = elem_strategy(field)
    x, y = data.draw(xs), data.draw(xs)
    assert (x + y).conj() == x.conj() + y.conj()
    assert (x * y).conj() == x.conj() * y.conj()
    assert x.conj().conj() == x
    assert (x * x.conj()).is_real()


@settings(max_examples=40, deadline=None)
@given(data=st.data())
def test_sign_matches_high_precision_float(data):
    field, a = _FIELD_R, _EMB_SQRT2_R
    q = data.draw(small_rats)
    r = data.draw(small_rats)
    x = a * q + field.from_rational(r)
    want = (q * math.sqrt(2) + r)
    got = x.sign()
    if abs(want) > 1e-9:
        assert got == (1 if want > 0 else -1)
    else:
        assert got == 0 or abs(want) <= 1e-9


@settings(max_examples=30, deadline=None)
@given(q=small_rats, r=small_rats)
def test_floor_matches_float_floor(q, r):
    field, a = _FIELD_R, _EMB_SQRT2_R
    x = a * q + field.from_rational(r)
    approx = float(q) * math.sqrt(2) + float(r)
    # stay away from the float-roundoff boundary
    if abs(approx - round(approx)) > 1e-9:
        assert floor_real(x) == math.floor(approx)

