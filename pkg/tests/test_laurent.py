import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from expzero.algebra import AlgebraicInput, I_GEN, imaginary_unit, make_field
from expzero.errors import FixedCase, InputError, SizeCapExceeded
from expzero.exppoly import ExpPoly, OdeInstance, from_ode
from expzero.laurent import (
    LaurentPoly, SpectralBasis, classify, derivative_poly, eval_laurent, factor,
    format_laurent, laurent_const, laurent_gcd_is_unit, laurent_var,
    parse_laurent, split_type3, to_laurent,
)

R = AlgebraicInput.from_rational
SQRT2 = AlgebraicInput.make(["-2", "0", "1"], ["1", "2", "0", "0"])

QI, (GI,) = make_field([I_GEN])
QTRIV, _ = make_field([])


def lc(field, r, s, q):
    return laurent_const(field, r, s, Fraction(q))


def test_to_laurent_two_plus_two_cos():
    f = from_ode(OdeInstance(coeffs=(R(0), R(1), R(0)),
                             init=(R(4), R(0), R(-2)), interval=None))
    P, basis = to_laurent(f)
    assert (P.r, P.s) == (0, 1)
    assert [b.as_fraction() for b in basis.b] == [1]
    want = {(0, (), (0,)): 2, (0, (), (1,)): 1, (0, (), (-1,)): 1}
    got = {k: c.as_fraction() for k, c in P.monomials.items()}
    assert got == want


def test_to_laurent_pure_exponential():
    f = from_ode(OdeInstance(coeffs=(R(-1),), init=(R(1),), interval=None))
    P, basis = to_laurent(f)
    assert (P.r, P.s) == (1, 0)
    assert [a.as_fraction() for a in basis.a] == [1]
    assert {k: c.as_fraction() for k, c in P.monomials.items()} == {(0, (1,), ()): 1}


def test_to_laurent_mixed_spectrum_agrees_numerically():
    field, (s2, gi) = make_field([SQRT2, I_GEN])
    # t e^{sqrt2 t} sin t
    f = ExpPoly(field, [(s2 + gi, [field.zero(), gi * Fraction(-1, 2)]),
                        (s2 - gi, [field.zero(), gi * Fraction(1, 2)])])
    P, basis = to_laurent(f)
    assert (P.r, P.s) == (1, 1)
    assert not basis.a[0].is_rational()
    assert basis.b[0].as_fraction() == 1
    for tq in (Fraction(1, 3), Fraction(2, 3), Fraction(3, 2)):
        box = eval_laurent(P, basis, tq, Fraction(1, 10 ** 9))
        t = float(tq)
        true = t * math.exp(math.sqrt(2) * t) * math.sin(t)
        assert abs(float(box.re.mid) - true) < 1e-8
        assert box.im.contains_zero()


def test_exponent_reconstruction_is_exact():
    field, (s2, gi) = make_field([SQRT2, I_GEN])
    lam = s2 * Fraction(3, 2) + gi * Fraction(-2)
    f = ExpPoly(field, [(lam, [field.one()]), (lam.conj(), [field.one()])])
    P, basis = to_laurent(f)
    (m, n), (m2, n2) = basis.coords
    rec = field.zero()
    for mi, ai in zip(m, basis.a):
        rec = rec + ai * Fraction(mi)
    for nk, bk in zip(n, basis.b):
        rec = rec + basis.iu * bk * Fraction(nk)
    assert rec == lam or rec == lam.conj()


def test_conjugate_one_plus_z():
    one = lc(QTRIV, 0, 1, 1)
    z = laurent_var(QTRIV, 0, 1, "z1")
    P = one + z
    Pb = P.conjugate()
    assert Pb.monomials == {(0, (), (0,)): QTRIV.one(), (0, (), (-1,)): QTRIV.one()}


def test_conjugate_fixes_real_xy_poly():
    x = laurent_var(QTRIV, 1, 0, "x")
    y = laurent_var(QTRIV, 1, 0, "y1")
    P = x * y + y * 3 - lc(QTRIV, 1, 0, 7)
    assert P.conjugate() == P


def test_conjugate_monomial_with_i():
    x = laurent_var(QI, 0, 2, "x")
    z1 = laurent_var(QI, 0, 2, "z1")
    z2inv = LaurentPoly(QI, 0, 2, {(0, (), (0, -1)): QI.one()})
    P = x * z1 * z2inv * GI
    Pb = P.conjugate()
    ((u, v, w), c), = Pb.monomials.items()
    assert (u, v, w) == (1, (), (-1, 1))
    assert c == -GI


@settings(max_examples=40, deadline=None)
@given(data=st.data())
def test_conjugate_is_ring_automorphism(data):
    keys = st.tuples(st.integers(0, 2),
                     st.tuples(st.integers(-2, 2)),
                     st.tuples(st.integers(-2, 2)))
    coeffs = st.tuples(st.fractions(min_value=-3, max_value=3, max_denominator=4),
                       st.fractions(min_value=-3, max_value=3, max_denominator=4))

    def poly(draws):
        mono = {}
        for key, (re_q, im_q) in draws:
            c = QI.from_rational(re_q) + GI * im_q
            if not c.is_zero():
                mono[key] = mono[key] + c if key in mono else c
        return LaurentPoly(QI, 1, 1, mono)

    P = poly(data.draw(st.lists(st.tuples(keys, coeffs), min_size=1, max_size=4)))
    Q = poly(data.draw(st.lists(st.tuples(keys, coeffs), min_size=1, max_size=4)))
    assert (P * Q).conjugate() == P.conjugate() * Q.conjugate()
    assert (P + Q).conjugate() == P.conjugate() + Q.conjugate()
    assert P.conjugate().conjugate() == P


def test_factor_cosine_numerator():
    z = laurent_var(QTRIV, 0, 1, "z1")
    zinv = LaurentPoly(QTRIV, 0, 1, {(0, (), (-1,)): QTRIV.one()})
    P = lc(QTRIV, 0, 1, 2) + z + zinv
    unit, facs = factor(P)
    assert unit.monomials == {(0, (), (-1,)): QTRIV.one()}
    assert len(facs) == 1
    F, mult = facs[0]
    assert mult == 2
    assert {k: c.as_fraction() for k, c in F.monomials.items()} == {
        (0, (), (0,)): 1, (0, (), (1,)): 1}
    # exact reassembly
    assert unit * F * F == P


def test_factor_difference_of_squares():
    x = laurent_var(QTRIV, 1, 0, "x")
    y = laurent_var(QTRIV, 1, 0, "y1")
    unit, facs = factor(y * y - x * x)
    assert len(facs) == 2 and all(m == 1 for _, m in facs)
    prod = unit
    for F, m in facs:
        prod = prod * F
    assert prod == y * y - x * x


def test_factor_irreducible_trinomial():
    P = (laurent_var(QTRIV, 1, 1, "x") + laurent_var(QTRIV, 1, 1, "y1")
         + laurent_var(QTRIV, 1, 1, "z1"))
    unit, facs = factor(P)
    assert len(facs) == 1 and facs[0][1] == 1


def test_factor_with_x_content():
    x = laurent_var(QTRIV, 1, 0, "x")
    y = laurent_var(QTRIV, 1, 0, "y1")
    P = x * x * (x + y) * 3
    unit, facs = factor(P)
    table = {format_laurent(F): m for F, m in facs}
    assert table.get("1*x^1") == 2
    assert any("y1" in k for k in table)
    prod = unit
    for F, m in facs:
        prod = prod * _pow(F, m)
    assert prod == P


def _pow(P, m):
    out = laurent_const(P.field, P.r, P.s, 1)
    for _ in range(m):
        out = out * P
    return out


def test_factor_over_extension_field():
    # y^2 + x^2 splits over Q(i)
    x = laurent_var(QI, 1, 0, "x")
    y = laurent_var(QI, 1, 0, "y1")
    unit, facs = factor(y * y + x * x)
    assert len(facs) == 2
    prod = unit
    for F, m in facs:
        prod = prod * _pow(F, m)
    assert prod == y * y + x * x


def test_factor_size_caps():
    big = LaurentPoly(QTRIV, 3, 3,
                      {(1, (1, 1, 1), (1, 1, 1)): QTRIV.one(),
                       (0, (0,) * 3, (0,) * 3): QTRIV.one()})
    with pytest.raises(SizeCapExceeded):
        factor(big)
    x = laurent_var(QTRIV, 0, 0, "x")
    with pytest.raises(SizeCapExceeded):
        factor(_pow(x, 13) + lc(QTRIV, 0, 0, 1))


def test_classify_one_plus_z_type3():
    P = lc(QTRIV, 0, 1, 1) + laurent_var(QTRIV, 0, 1, "z1")
    tag = classify(P)
    assert tag.kind == 3 and tag.u == (1,)
    Q = tag.poly
    assert Q.conjugate().shift(0, (), tag.u) == Q


def test_classify_self_conjugate_type2():
    P = (laurent_var(QTRIV, 1, 0, "x") + laurent_var(QTRIV, 1, 0, "y1")
         - lc(QTRIV, 1, 0, 3))
    tag = classify(P)
    assert tag.kind == 2
    assert tag.poly.conjugate() == tag.poly


def test_classify_type1():
    x = laurent_var(QI, 0, 1, "x")
    z = laurent_var(QI, 0, 1, "z1")
    tag = classify(x + z * (QI.one() + GI))
    assert tag.kind == 1


def test_classify_type2_with_unimodular_alpha():
    # P = i (x + y1): conj(P) = -P, alpha = -1, beta = i
    P = (laurent_var(QI, 1, 0, "x") + laurent_var(QI, 1, 0, "y1")) * GI
    tag = classify(P)
    assert tag.kind == 2
    assert tag.poly.conjugate() == tag.poly


def test_classify_type2_extends_rational_field():
    # z - z^{-1} over Q: conj is the negation, beta = i forces Q(i)
    z = laurent_var(QTRIV, 0, 1, "z1")
    zinv = LaurentPoly(QTRIV, 0, 1, {(0, (), (-1,)): QTRIV.one()})
    tag = classify(z - zinv)
    assert tag.kind == 2
    assert tag.poly.field.degree == 2
    assert tag.poly.conjugate() == tag.poly


def test_split_type3_spec_cases():
    one = lc(QTRIV, 0, 1, 1)
    z = laurent_var(QTRIV, 0, 1, "z1")
    Q = split_type3(one + z, (1,))
    assert {k: c.as_fraction() for k, c in Q.monomials.items()} == {(0, (), (1,)): 1}

    zi = laurent_var(_QI2, 0, 1, "z1")
    P2 = (laurent_const(_QI2, 0, 1, 1) - zi * zi) * GI_IN
    Q2 = split_type3(P2, (2,))
    assert Q2.monomials == {(0, (), (2,)): -GI_IN}
    assert Q2 + Q2.conjugate().shift(0, (), (2,)) == P2

    P3 = z + z * z * 2 + z * z * z
    Q3 = split_type3(P3, (4,))
    assert {k: c.as_fraction() for k, c in Q3.monomials.items()} == {
        (0, (), (2,)): 1, (0, (), (3,)): 1}


# i - i z^2 needs coefficients in Q(i); build the field once
_QI2, (GI_IN,) = make_field([I_GEN])


def test_split_type3_fixed_case():
    z = laurent_var(QTRIV, 0, 1, "z1")
    with pytest.raises(FixedCase):
        split_type3(z, (2,))


def test_split_type3_rejects_wrong_identity():
    z = laurent_var(QTRIV, 0, 1, "z1")
    with pytest.raises(InputError):
        split_type3(z + z * z, (1,))


def test_split_exactness_random():
    rng = random.Random(13)
    one = lc(QTRIV, 0, 1, 1)
    z = laurent_var(QTRIV, 0, 1, "z1")
    for _ in range(20):
        # random self-z^u-conjugate P: Q0 + z^u conj(Q0)
        u = rng.randint(1, 4)
        mono = {}
        for _k in range(rng.randint(1, 3)):
            key = (0, (), (rng.randint(-2, 3),))
            c = QTRIV.from_rational(Fraction(rng.randint(-4, 4)))
            if not c.is_zero():
                mono[key] = c
        if not mono:
            continue
        Q0 = LaurentPoly(QTRIV, 0, 1, mono)
        P = Q0 + Q0.conjugate().shift(0, (), (u,))
        if P.is_zero():
            continue
        try:
            Q = split_type3(P, (u,))
        except FixedCase:
            continue
        assert Q + Q.conjugate().shift(0, (), (u,)) == P


def _basis_qi():
    return SpectralBasis(QI, (QI.one(),), (QI.one(),),
                         (((1,), (1,)),), GI)


def test_derivative_poly_units():
    basis = _basis_qi()
    y = laurent_var(QI, 1, 1, "y1")
    z = laurent_var(QI, 1, 1, "z1")
    x = laurent_var(QI, 1, 1, "x")
    assert derivative_poly(y, basis) == y
    assert derivative_poly(z, basis) == z * GI
    assert derivative_poly(x, basis) == laurent_const(QI, 1, 1, 1)


def test_derivative_poly_finite_difference():
    f = from_ode(OdeInstance(coeffs=(R(0), R(1), R(0)),
                             init=(R(4), R(0), R(-2)), interval=None))
    P, basis = to_laurent(f)
    Q = derivative_poly(P, basis)
    t0 = Fraction(1, 3)
    qv = eval_laurent(Q, basis, t0, Fraction(1, 10 ** 12)).re.mid
    errs = []
    for k in range(1, 6):
        h = Fraction(1, 10 ** k)
        a = eval_laurent(P, basis, t0 + h, Fraction(1, 10 ** 12)).re.mid
        b = eval_laurent(P, basis, t0, Fraction(1, 10 ** 12)).re.mid
        errs.append(abs((a - b) / h - qv))
    assert errs[-1] < errs[0]
    assert errs[-1] < Fraction(1, 10 ** 3)


def test_coprimality_by_type():
    # Type-3: gcd(P, split Q) is a unit
    one = lc(QTRIV, 0, 1, 1)
    z = laurent_var(QTRIV, 0, 1, "z1")
    P3 = one + z
    assert laurent_gcd_is_unit(P3, split_type3(P3, (1,)))
    # Type-1: gcd(P, conj P) is a unit
    x = laurent_var(QI, 0, 1, "x")
    zq = laurent_var(QI, 0, 1, "z1")
    P1 = x + zq * (QI.one() + GI)
    assert laurent_gcd_is_unit(P1, P1.conjugate())
    # Type-2: gcd(P, derivative_poly P) is a unit
    basis = _basis_qi()
    P2 = laurent_var(QI, 1, 1, "x") + laurent_var(QI, 1, 1, "y1")
    assert laurent_gcd_is_unit(P2, derivative_poly(P2, basis))
    # and a non-unit gcd is detected
    assert not laurent_gcd_is_unit(P3, P3 * z)


def test_format_parse_round_trip():
    z = laurent_var(QI, 1, 2, "z2")
    y = laurent_var(QI, 1, 2, "y1")
    x = laurent_var(QI, 1, 2, "x")
    P = (x * y * z * GI + LaurentPoly(QI, 1, 2, {(0, (-0,), (2, -3)): GI + QI.one()})
         - lc(QI, 1, 2, Fraction(7, 3)))
    text = format_laurent(P)
    assert parse_laurent(text, QI, 1, 2) == P


def test_format_zero_and_constants():
    assert format_laurent(LaurentPoly(QTRIV, 0, 0, {})) == "0"
    assert parse_laurent("0", QTRIV, 0, 0).is_zero()
    c = lc(QTRIV, 0, 0, Fraction(-5, 2))
    assert parse_laurent(format_laurent(c), QTRIV, 0, 0) == c


@settings(max_examples=40, deadline=None)
@given(data=st.data())
def test_parse_format_round_trip_random(data):
    keys = st.tuples(st.integers(0, 3),
                     st.tuples(st.integers(-3, 3)),
                     st.tuples(st.integers(-3, 3)))
    qs = st.fractions(min_value=-5, max_value=5, max_denominator=6)
    mono = {}
    for key, (qre, qim) in data.draw(
            st.lists(st.tuples(keys, st.tuples(qs, qs)), min_size=1, max_size=5)):
        c = QI.from_rational(qre) + GI * qim
        if not c.is_zero():
            mono[key] = c
    P = LaurentPoly(QI, 1, 1, mono)
    assert parse_laurent(format_laurent(P), QI, 1, 1) == P
