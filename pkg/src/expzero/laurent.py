"""Laurent polynomials K[x, y1..yr (+/-), z1..zs (+/-)] over a number field.

Conversion from exponential polynomials via a rational basis of the spectrum,
conjugation, factorization into irreducibles, self-conjugacy classification,
the splitting P = Q + z^u conj(Q), and the time-derivative polynomial.
"""

from __future__ import annotations

import re as _re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import sympy as sp

from .algebra import (
    AlgebraicInput, FieldElement, I_GEN, NumberField, extend_field,
    im_sign, imaginary_unit, parse_rat, rat_str, rational_basis,
    _coeffs_from_poly, _expr_to_coords, _root_rect, _rect_overlaps,
)
from .errors import (
    FieldExtensionNeeded, FixedCase, InputError, SizeCapExceeded,
)
from .exppoly import ExpPoly, ensure_imaginary_unit
from .floatguard import as_fraction
from .intervals import Ival, Rect, icos, iexp, isin, refine_to_width

MAX_VARS = 6
MAX_DEGREE = 12

Key = tuple  # (u: int, v: tuple[int, ...], w: tuple[int, ...])


class LaurentPoly:
    """Map from exponent keys (u, v, w) to nonzero field coefficients.

    u >= 0 is the x-exponent; v and w may be negative. Units of the ring are
    the monomials c y^v z^w (x is not invertible).
    """

    __slots__ = ("field", "r", "s", "monomials")

    def __init__(self, field: NumberField, r: int, s: int,
                 monomials: dict | Iterable):
        items = monomials.items() if isinstance(monomials, dict) else monomials
        store: dict[Key, FieldElement] = {}
        for key, coeff in items:
            u, v, w = key
            v, w = tuple(v), tuple(w)
            if u < 0 or len(v) != r or len(w) != s:
                raise InputError(f"bad exponent key {key!r}")
            if coeff.field is not field:
                raise InputError("coefficient outside the ambient field")
            if coeff.is_zero():
                continue
            k = (u, v, w)
            if k in store:
                tot = store[k] + coeff
                if tot.is_zero():
                    del store[k]
                else:
                    store[k] = tot
            else:
                store[k] = coeff
        self.field = field
        self.r = r
        self.s = s
        self.monomials = store

    # ring structure -------------------------------------------------------

    def _check_sig(self, other: "LaurentPoly"):
        if (other.field is not self.field or other.r != self.r
                or other.s != self.s):
            raise InputError("signature mismatch")

    def __add__(self, other: "LaurentPoly") -> "LaurentPoly":
        self._check_sig(other)
        out = dict(self.monomials)
        for k, c in other.monomials.items():
            if k in out:
                tot = out[k] + c
                if tot.is_zero():
                    del out[k]
                else:
                    out[k] = tot
            else:
                out[k] = c
        return LaurentPoly(self.field, self.r, self.s, out)

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly(self.field, self.r, self.s,
                           {k: -c for k, c in self.monomials.items()})

    def __sub__(self, other: "LaurentPoly") -> "LaurentPoly":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, LaurentPoly):
            self._check_sig(other)
            out: dict[Key, FieldElement] = {}
            for (u1, v1, w1), c1 in self.monomials.items():
                for (u2, v2, w2), c2 in other.monomials.items():
                    k = (u1 + u2, tuple(a + b for a, b in zip(v1, v2)),
                         tuple(a + b for a, b in zip(w1, w2)))
                    prod = c1 * c2
                    if k in out:
                        tot = out[k] + prod
                        if tot.is_zero():
                            del out[k]
                        else:
                            out[k] = tot
                    else:
                        out[k] = prod
            return LaurentPoly(self.field, self.r, self.s, out)
        scal = other if isinstance(other, FieldElement) else \
            self.field.from_rational(as_fraction(other))
        return LaurentPoly(self.field, self.r, self.s,
                           {k: c * scal for k, c in self.monomials.items()})

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return (self.field is other.field and self.r == other.r
                and self.s == other.s and self.monomials == other.monomials)

    def __hash__(self):
        return hash((id(self.field), self.r, self.s,
                     tuple(sorted((k, c.coords) for k, c in self.monomials.items()))))

    def is_zero(self) -> bool:
        return not self.monomials

    def is_monomial(self) -> bool:
        return len(self.monomials) == 1

    def conjugate(self) -> "LaurentPoly":
        """Coefficients conjugated, z-exponents negated, x and y kept."""
        return LaurentPoly(self.field, self.r, self.s,
                           {(u, v, tuple(-wi for wi in w)): c.conj()
                            for (u, v, w), c in self.monomials.items()})

    def shift(self, du: int, dv: Sequence[int], dw: Sequence[int]) -> "LaurentPoly":
        return LaurentPoly(self.field, self.r, self.s,
                           {(u + du, tuple(a + b for a, b in zip(v, dv)),
                             tuple(a + b for a, b in zip(w, dw))): c
                            for (u, v, w), c in self.monomials.items()})

    def total_degree(self) -> int:
        return max((u + sum(abs(i) for i in v) + sum(abs(i) for i in w)
                    for u, v, w in self.monomials), default=0)

    def min_exponents(self) -> Key:
        us = [u for u, _, _ in self.monomials]
        return (min(us, default=0),
                tuple(min((v[i] for _, v, _ in self.monomials), default=0)
                      for i in range(self.r)),
                tuple(min((w[i] for _, _, w in self.monomials), default=0)
                      for i in range(self.s)))

    def lex_first_key(self) -> Key:
        return min(self.monomials)

    def normalized(self) -> tuple["LaurentPoly", "LaurentPoly"]:
        """(unit, N) with self = unit * N, N's y/z minima zero and lex-first
        coefficient one. The x-exponents are left untouched (x is not a unit)."""
        if self.is_zero():
            raise InputError("cannot normalize the zero polynomial")
        _, vmin, wmin = self.min_exponents()
        shifted = self.shift(0, [-i for i in vmin], [-i for i in wmin])
        lead = shifted.monomials[shifted.lex_first_key()]
        unit = LaurentPoly(self.field, self.r, self.s,
                           {(0, vmin, wmin): lead})
        return unit, shifted * lead.inverse()

    def associate_unit(self, other: "LaurentPoly"):
        """Unit U with other = U * self, or None if not associates."""
        self._check_sig(other)
        if self.is_zero() or other.is_zero():
            return None
        if len(self.monomials) != len(other.monomials):
            return None
        k1 = self.lex_first_key()
        k2 = other.lex_first_key()
        du = k2[0] - k1[0]
        if du != 0:
            return None
        dv = tuple(b - a for a, b in zip(k1[1], k2[1]))
        dw = tuple(b - a for a, b in zip(k1[2], k2[2]))
        ratio = other.monomials[k2] * self.monomials[k1].inverse()
        if (self.shift(0, dv, dw) * ratio) == other:
            return LaurentPoly(self.field, self.r, self.s, {(0, dv, dw): ratio})
        return None

    def rebase(self, new_field: NumberField, embed) -> "LaurentPoly":
        return LaurentPoly(new_field, self.r, self.s,
                           {k: embed(c) for k, c in self.monomials.items()})

    def __str__(self):
        return format_laurent(self)

    __repr__ = __str__


def laurent_const(field: NumberField, r: int, s: int, value) -> LaurentPoly:
    coeff = value if isinstance(value, FieldElement) else \
        field.from_rational(as_fraction(value))
    return LaurentPoly(field, r, s, {(0, (0,) * r, (0,) * s): coeff})


def laurent_var(field: NumberField, r: int, s: int, name: str) -> LaurentPoly:
    """x, y<i>, or z<i> as a polynomial."""
    u, v, w = 0, [0] * r, [0] * s
    if name == "x":
        u = 1
    elif name.startswith("y"):
        v[int(name[1:]) - 1] = 1
    elif name.startswith("z"):
        w[int(name[1:]) - 1] = 1
    else:
        raise InputError(f"unknown variable {name!r}")
    return LaurentPoly(field, r, s, {(u, tuple(v), tuple(w)): field.one()})


@dataclass(frozen=True)
class SpectralBasis:
    """Q-linear bases (a for real parts, b for imaginary parts) of a spectrum.

    Each exponent decomposes as lambda_j = sum_i m_ji a_i + i sum_k n_jk b_k
    with integer m, n; iu is the imaginary unit of the field when s > 0.
    """

    field: NumberField
    a: tuple
    b: tuple
    coords: tuple  # per lambda: (m: tuple[int], n: tuple[int])
    iu: FieldElement | None

    @property
    def r(self) -> int:
        return len(self.a)

    @property
    def s(self) -> int:
        return len(self.b)


def to_laurent(f: ExpPoly) -> tuple[LaurentPoly, SpectralBasis]:
    """P with P(t, e^{a t}, e^{i b t}) = f(t), plus the spectral basis."""
    if f.is_zero():
        basis = SpectralBasis(f.field, (), (), (), None)
        return LaurentPoly(f.field, 0, 0, {}), basis
    needs_i = any(im_sign(lam) != 0 for lam, _ in f.terms)
    iu = None
    if needs_i:
        f, iu = ensure_imaginary_unit(f)
    field = f.field
    half = Fraction(1, 2)
    res = [(lam + lam.conj()) * half for lam, _ in f.terms]
    if needs_i:
        ims = [(lam - lam.conj()) * iu.inverse() * half for lam, _ in f.terms]
    else:
        ims = [field.zero() for _ in f.terms]

    qa = rational_basis(res)
    qb = rational_basis(ims)
    r, s = len(qa.basis), len(qb.basis)

    def orient(basis_elems, rows):
        flips = [e.sign() < 0 for e in basis_elems]
        elems = tuple(-e if fl else e for e, fl in zip(basis_elems, flips))
        fixed = tuple(tuple(-m if fl else m for m, fl in zip(row, flips))
                      for row in rows)
        return elems, fixed

    a_elems, a_rows = orient(qa.basis, qa.coords)
    b_elems, b_rows = orient(qb.basis, qb.coords)
    coords = tuple((a_rows[j], b_rows[j]) for j in range(len(f.terms)))
    basis = SpectralBasis(field, a_elems, b_elems, coords, iu)

    # exact reconstruction check of every exponent
    for (lam, _), (m, n) in zip(f.terms, coords):
        acc = field.zero()
        for mi, ai in zip(m, a_elems):
            acc = acc + ai * Fraction(mi)
        for nk, bk in zip(n, b_elems):
            acc = acc + (iu * bk if iu is not None else bk) * Fraction(nk)
        if acc != lam:
            raise InputError("spectral basis failed exact reconstruction")

    mono: dict[Key, FieldElement] = {}
    for (lam, poly), (m, n) in zip(f.terms, coords):
        for j, c in enumerate(poly):
            key = (j, m, n)
            mono[key] = mono[key] + c if key in mono else c
    P = LaurentPoly(field, r, s, mono)
    return P, basis


def eval_laurent(P: LaurentPoly, basis: SpectralBasis, t, eps) -> Rect:
    """Rigorous enclosure of P(t, e^{a t}, e^{i b t}) at rational t."""
    t = as_fraction(t)
    eps = as_fraction(eps)

    def make(prec: int) -> Rect:
        tol = Fraction(1, 2 ** prec)
        tv = Ival.point(t)
        ys = [iexp(ai.interval(tol) * tv, prec) for ai in basis.a]
        zs = []
        for bk in basis.b:
            phase = bk.interval(tol) * tv
            zs.append(Rect(icos(phase, prec), isin(phase, prec)))
        acc = Rect.point(0)
        for (u, v, w), c in P.monomials.items():
            term = Rect.from_real(Ival.point(t ** u)) * c.rect(tol)
            for yv, e in zip(ys, v):
                term = term * Rect.from_real(_ipow(yv, e))
            for zv, e in zip(zs, w):
                term = term * _rect_pow(zv, e)
            acc = acc + term
        return acc

    return refine_to_width(make, eps)


def _ipow(x: Ival, e: int) -> Ival:
    if e == 0:
        return Ival.point(1)
    if e < 0:
        return Ival.point(1) / _ipow(x, -e)
    out = Ival.point(1)
    for _ in range(e):
        out = out * x
    return out


def _rect_pow(z: Rect, e: int) -> Rect:
    if e == 0:
        return Rect.point(1)
    if e < 0:
        return _rect_recip(_rect_pow(z, -e))
    out = Rect.point(1)
    for _ in range(e):
        out = out * z
    return out


def _rect_recip(z: Rect) -> Rect:
    mag = z.abs_sq()
    if mag.contains_zero():
        raise ZeroDivisionError("rectangle straddles zero")
    conj = Rect(z.re, -z.im)
    inv = Ival.point(1) / mag
    return Rect(conj.re * inv, conj.im * inv)


# factorization --------------------------------------------------------------


def _check_caps(P: LaurentPoly):
    if 1 + P.r + P.s > MAX_VARS:
        raise SizeCapExceeded(f"{1 + P.r + P.s} variables > cap {MAX_VARS}")
    if P.total_degree() > MAX_DEGREE:
        raise SizeCapExceeded(f"total degree {P.total_degree()} > cap {MAX_DEGREE}")


def _sym_vars(r: int, s: int):
    # names must not collide with the symbol inside the field's CRootOf
    return (sp.Symbol("_vx"),
            tuple(sp.Symbol(f"_vy{i + 1}") for i in range(r)),
            tuple(sp.Symbol(f"_vz{i + 1}") for i in range(s)))


def _to_sympy_poly(P: LaurentPoly):
    """Ordinary-polynomial image (y/z exponents must be nonnegative)."""
    x, ys, zs = _sym_vars(P.r, P.s)
    field = P.field
    th = field.theta_sympy() if field.degree > 1 else None
    expr = sp.Integer(0)
    for (u, v, w), c in P.monomials.items():
        if any(e < 0 for e in v) or any(e < 0 for e in w):
            raise InputError("negative exponent in polynomial image")
        if th is None:
            ce = sp.Rational(c.as_fraction().numerator, c.as_fraction().denominator)
        else:
            ce = sum(sp.Rational(q.numerator, q.denominator) * th ** k
                     for k, q in enumerate(c.coords))
        mon = x ** u
        for sym, e in zip(ys, v):
            mon *= sym ** e
        for sym, e in zip(zs, w):
            mon *= sym ** e
        expr += ce * mon
    gens = (x, *ys, *zs)
    dom = sp.QQ if th is None else sp.QQ.algebraic_field(th)
    return sp.Poly(sp.expand(expr), gens, domain=dom)


def _from_sympy_poly(p, field: NumberField, r: int, s: int) -> LaurentPoly:
    mono: dict[Key, FieldElement] = {}
    for exps, coeff in p.terms():
        if field.degree > 1:
            coords = _expr_to_coords(coeff, field)
            if coords is None:
                raise InputError("factor coefficient escaped the field")
            c = FieldElement(coords, field)
        else:
            cq = sp.Rational(coeff)
            c = field.from_rational(Fraction(cq.p, cq.q))
        key = (exps[0], tuple(exps[1:1 + r]), tuple(exps[1 + r:]))
        mono[key] = c
    return LaurentPoly(field, r, s, mono)


def factor(P: LaurentPoly):
    """(unit, [(irreducible factor, multiplicity), ...]) with exact reassembly.

    The unit is a monomial c y^v z^w; factors are canonically normalized
    (y/z exponent minima zero, lex-first coefficient one). A plain x factor
    appears with its multiplicity (x is irreducible, not a unit).
    """
    if P.is_zero():
        raise InputError("cannot factor the zero polynomial")
    _check_caps(P)
    field, r, s = P.field, P.r, P.s
    _, vmin, wmin = P.min_exponents()
    base = P.shift(0, [-i for i in vmin], [-i for i in wmin])

    sym = _to_sympy_poly(base)
    const, facs = sym.factor_list()

    if field.degree > 1:
        coords = _expr_to_coords(sp.sympify(const), field)
        unit_coeff = FieldElement(coords, field)
    else:
        cq = sp.Rational(const)
        unit_coeff = field.from_rational(Fraction(cq.p, cq.q))
    unit = LaurentPoly(field, r, s, {(0, tuple(vmin), tuple(wmin)): unit_coeff})

    out = []
    for fac, mult in facs:
        Q = _from_sympy_poly(fac, field, r, s)
        if Q.is_monomial():
            (u, v, w), c = next(iter(Q.monomials.items()))
            # y/z monomials are units; x stays a factor
            scale = c ** mult
            unit = unit * LaurentPoly(
                field, r, s,
                {(0, tuple(m * mult for m in v), tuple(m * mult for m in w)): scale})
            if u > 0:
                out.append((laurent_var(field, r, s, "x"), u * mult))
            continue
        u_part, norm = Q.normalized()
        unit = unit * _unit_pow(u_part, mult)
        out.append((norm, mult))

    check = unit
    for fac, mult in out:
        for _ in range(mult):
            check = check * fac
    if check != P:
        raise InputError("factor reassembly failed the exactness check")
    return unit, out


def _unit_pow(unit: LaurentPoly, e: int) -> LaurentPoly:
    out = laurent_const(unit.field, unit.r, unit.s, 1)
    for _ in range(e):
        out = out * unit
    return out


def laurent_gcd_is_unit(P: LaurentPoly, Q: LaurentPoly) -> bool:
    """Whether gcd(P, Q) in the ambient polynomial ring is a monomial."""
    if P.is_zero() or Q.is_zero():
        return False
    _, vm1, wm1 = P.min_exponents()
    _, vm2, wm2 = Q.min_exponents()
    a = P.shift(0, [-i for i in vm1], [-i for i in wm1])
    b = Q.shift(0, [-i for i in vm2], [-i for i in wm2])
    g = _to_sympy_poly(a).gcd(_to_sympy_poly(b))
    return len(g.terms()) == 1


# classification --------------------------------------------------------------


@dataclass(frozen=True)
class TypeTag:
    """kind 1: P and conj(P) not associates; kind 2: P self-conjugate after
    scaling; kind 3: P = z^u conj(P) after scaling, u != 0."""

    kind: int
    poly: LaurentPoly
    u: tuple | None = None  # z-exponent vector for kind 3


def _sqrt_in_or_above(field: NumberField, alpha: FieldElement):
    """(new_field, embed, beta) with beta^2 = embed(alpha); extends if needed."""
    from .algebra import _field_sqrt
    if alpha == field.one():
        return field, (lambda e: e), field.one()
    if field.degree > 1:
        s = _field_sqrt(alpha)
        if s is not None:
            return field, (lambda e: e), s
    elif alpha.is_rational():
        q = alpha.as_fraction()
        if q > 0:
            ni, di = _isqrt_exact(q.numerator), _isqrt_exact(q.denominator)
            if ni is not None and di is not None:
                return field, (lambda e: e), field.from_rational(Fraction(ni, di))
    # adjoin a root of m(x^2) that squares to alpha
    mp = sp.Poly([sp.Rational(c.numerator, c.denominator)
                  for c in reversed(_minpoly_of(alpha))], sp.Symbol("x"))
    x = sp.Symbol("x")
    m2 = mp.as_expr().subs(x, x ** 2)
    cands = []
    for fac, _m in sp.Poly(m2, x).factor_list()[1]:
        cands.extend(sp.Poly(fac, x).all_roots(radicals=False))
    # prune numerically (both square roots of alpha survive), then verify exactly
    tol = Fraction(1, 2 ** 16)
    hits = cands
    for _ in range(4):
        target = alpha.rect(tol)
        hits = [c for c in hits
                if _rect_overlaps(_root_rect(c, tol) * _root_rect(c, tol), target)]
        if len(hits) <= 2:
            break
        tol /= 2 ** 8
    for pick in hits:
        gen = AlgebraicInput.from_root(pick)
        big, embed, (beta,) = extend_field(field, [gen])
        if (beta * beta) == embed(alpha):
            return big, embed, beta
    raise FieldExtensionNeeded("no usable square root located")


def _isqrt_exact(n: int):
    import math
    r = math.isqrt(n)
    return r if r * r == n else None


def _minpoly_of(x: FieldElement) -> tuple:
    """Rational minimal polynomial of a field element (constant first)."""
    if x.is_rational():
        return (-x.as_fraction(), Fraction(1))
    mp = sp.minimal_polynomial(_elem_expr(x), sp.Symbol("x"))
    return _coeffs_from_poly(sp.Poly(mp, sp.Symbol("x")))


def _elem_expr(x: FieldElement):
    th = x.field.theta_sympy()
    return sp.Add(*[sp.Rational(c.numerator, c.denominator) * th ** k
                    for k, c in enumerate(x.coords)])


def classify(P: LaurentPoly, degree_cap: int = 48) -> TypeTag:
    """Type of an irreducible factor, with the normalizations applied."""
    if P.is_zero():
        raise InputError("cannot classify the zero polynomial")
    field, r, s = P.field, P.r, P.s
    Pbar = P.conjugate()
    U = Pbar.associate_unit(P)  # P = U * Pbar
    if U is None:
        return TypeTag(kind=1, poly=P)
    (u0, v0, w0), c = next(iter(U.monomials.items()))
    if any(v0):
        raise InputError("unit with y-exponent cannot relate P and conj(P)")
    # U * conj(U) = 1 must hold: |c| = 1
    if not (c * c.conj() - field.one()).is_zero():
        raise InputError("associate unit is not unimodular")

    if any(w0):
        # P = c z^w0 conj(P): scale by beta with conj(beta) = c beta
        if c == field.one():
            beta = field.one()
        else:
            beta = field.one() + c.conj()
        if beta.is_zero():
            iu = imaginary_unit(field)
            if iu is None:
                if 2 * field.degree > degree_cap:
                    raise FieldExtensionNeeded("cannot adjoin i under the cap")
                big, embed, (iu,) = extend_field(field, [I_GEN])
                P = P.rebase(big, embed)
                field = big
            beta = iu
        Q = P * beta
        if Q.conjugate().shift(0, (0,) * r, w0) != Q:
            raise InputError("z^u self-conjugacy verification failed")
        return TypeTag(kind=3, poly=Q, u=tuple(w0))

    # P = c conj(P): Type-2; scale by beta with beta^2 = conj(c)
    newf, embed, beta = _sqrt_in_or_above(field, c.conj())
    if newf.degree > degree_cap:
        raise FieldExtensionNeeded(f"field degree {newf.degree} > cap {degree_cap}")
    if newf is not field:
        P = P.rebase(newf, embed)
    Q = P * beta
    if Q.conjugate() != Q:
        raise InputError("self-conjugacy verification failed")
    return TypeTag(kind=2, poly=Q)


def split_type3(P: LaurentPoly, u: Sequence[int]) -> LaurentPoly:
    """Q with P = Q + z^u conj(Q), built from the orbit structure.

    Monomials fixed by M -> z^u conj(M) contribute half weight; each 2-cycle
    contributes one representative. All-fixed inputs raise FixedCase.
    """
    u = tuple(u)
    if len(u) != P.s or not any(u):
        raise InputError("need a nonzero z-exponent vector")
    if P.conjugate().shift(0, (0,) * P.r, u) != P:
        raise InputError("input does not satisfy P = z^u conj(P)")
    field = P.field
    half = Fraction(1, 2)
    out: dict[Key, FieldElement] = {}
    seen = set()
    any_moving = False
    for (a, v, w), c in P.monomials.items():
        tw = tuple(ui - wi for ui, wi in zip(u, w))
        if tw == w:
            out[(a, v, w)] = c * half
            continue
        any_moving = True
        if (a, v, w) in seen:
            continue
        seen.add((a, v, tw))
        if (a, v, w) > (a, v, tw):
            out[(a, v, w)] = c
        else:
            out[(a, v, tw)] = P.monomials[(a, v, tw)]
    if not any_moving:
        raise FixedCase("every monomial is fixed; use the self-conjugate route")
    Q = LaurentPoly(field, P.r, P.s, out)
    if Q + Q.conjugate().shift(0, (0,) * P.r, u) != P:
        raise InputError("orbit construction failed the exactness check")
    return Q


def derivative_poly(P: LaurentPoly, basis: SpectralBasis) -> LaurentPoly:
    """Q with Q(t, e^{at}, e^{ibt}) = d/dt P(t, e^{at}, e^{ibt})."""
    field = P.field
    mono: dict[Key, FieldElement] = {}
    for (a, v, w), c in P.monomials.items():
        if a > 0:
            key = (a - 1, v, w)
            add = c * Fraction(a)
            mono[key] = mono[key] + add if key in mono else add
        scale = field.zero()
        for vi, ai in zip(v, basis.a):
            if vi:
                scale = scale + ai * Fraction(vi)
        for wi, bi in zip(w, basis.b):
            if wi:
                scale = scale + basis.iu * bi * Fraction(wi)
        if not scale.is_zero():
            key = (a, v, w)
            add = c * scale
            mono[key] = mono[key] + add if key in mono else add
    return LaurentPoly(field, P.r, P.s, mono)


# textual format --------------------------------------------------------------


def _coeff_str(c: FieldElement) -> str:
    if c.is_rational():
        return rat_str(c.as_fraction())
    inner = "+".join(f"{rat_str(q)}*th^{k}" for k, q in enumerate(c.coords) if q)
    return f"({inner})"


def format_laurent(P: LaurentPoly) -> str:
    if P.is_zero():
        return "0"
    parts = []
    for (u, v, w) in sorted(P.monomials):
        c = P.monomials[(u, v, w)]
        bits = [_coeff_str(c)]
        if u:
            bits.append(f"x^{u}")
        for i, e in enumerate(v):
            if e:
                bits.append(f"y{i + 1}^{e}")
        for i, e in enumerate(w):
            if e:
                bits.append(f"z{i + 1}^{e}")
        parts.append("*".join(bits))
    return " + ".join(parts)


_MONO_RE = _re.compile(r"^(x|y(\d+)|z(\d+))\^(-?\d+)$")


def parse_laurent(text: str, field: NumberField, r: int, s: int) -> LaurentPoly:
    """Inverse of format_laurent for the same signature."""
    text = text.strip()
    if text == "0":
        return LaurentPoly(field, r, s, {})
    mono: dict[Key, FieldElement] = {}
    for part in text.split(" + "):
        bits = part.split("*")
        # coefficient may be parenthesized with th-powers glued by '*'
        if bits[0].startswith("("):
            while not bits[0].endswith(")"):
                bits[0] = bits[0] + "*" + bits.pop(1)
            inner = bits[0][1:-1]
            coords = [Fraction(0)] * field.degree
            for term in inner.split("+"):
                qs, ks = term.split("*th^")
                coords[int(ks)] = parse_rat(qs)
            c = FieldElement(tuple(coords), field)
        else:
            c = field.from_rational(parse_rat(bits[0]))
        u, v, w = 0, [0] * r, [0] * s
        for b in bits[1:]:
            m = _MONO_RE.match(b)
            if not m:
                raise InputError(f"bad monomial part {b!r}")
            e = int(m.group(4))
            if m.group(1) == "x":
                u = e
            elif m.group(2):
                v[int(m.group(2)) - 1] = e
            else:
                w[int(m.group(3)) - 1] = e
        key = (u, tuple(v), tuple(w))
        mono[key] = mono[key] + c if key in mono else c
    return LaurentPoly(field, r, s, mono)
