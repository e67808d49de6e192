"""Exact arithmetic in a number field Q(theta) closed under complex conjugation.

Algebraic numbers enter as (minimal polynomial, isolating box) pairs; a
primitive element for the field generated by the inputs and their
conjugates is computed via resultants (sympy), and every later answer is
verified by exact substitution.  Elements are coordinate vectors of
rationals over the power basis of theta; sign determination and box
approximation go through interval refinement of theta's isolating
rectangle, never through binary floats.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import sympy as sp
from sympy.polys.numberfields import primitive_element

from .errors import CapExceeded, DegreeCapExceeded, NonIsolatedRoot, NotRealElement
from .floatguard import as_fraction
from .intervals import Ival, Rect

_X = sp.Symbol("x")

DEGREE_CAP_DEFAULT = 48

# refinement guards: enough for any desk-scale separation, finite on bad input
_BOX_REFINE_STEPS = 64
_SIGN_MAX_BITS = 4096


def rat_str(q: Fraction) -> str:
    q = as_fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def parse_rat(s) -> Fraction:
    if isinstance(s, str):
        return Fraction(s)
    return as_fraction(s)


def _poly_from_coeffs(coeffs: Sequence[Fraction]) -> sp.Poly:
    # constant-first storage -> sympy wants highest first
    return sp.Poly(list(reversed([sp.Rational(c.numerator, c.denominator) for c in coeffs])),
                   _X, domain="QQ")


def _coeffs_from_poly(p: sp.Poly) -> tuple[Fraction, ...]:
    return tuple(Fraction(c.p, c.q) for c in reversed(p.all_coeffs()))


def _is_rational_root(r) -> bool:
    return isinstance(r, sp.Rational) or r.is_rational is True


def _root_poly(r) -> sp.Poly:
    """Minimal polynomial of a sympy algebraic root object over Q."""
    if isinstance(r, sp.CRootOf):
        return sp.Poly(r.poly, _X)
    return sp.minimal_polynomial(r, _X, polys=True)


def _crootof_rect(r: sp.CRootOf, tol: Fraction) -> Rect:
    r.eval_rational(sp.Rational(tol.numerator, tol.denominator))
    ivl = r._get_interval()
    if r.is_real:
        return Rect(Ival(Fraction(ivl.a), Fraction(ivl.b)), Ival.point(0))
    return Rect(Ival(Fraction(ivl.ax), Fraction(ivl.bx)),
                Ival(Fraction(ivl.ay), Fraction(ivl.by)))


def _expr_rect_leaftol(e, tol: Fraction) -> Rect:
    """Enclosure of an algebraic expression with every leaf refined to tol."""
    if _is_rational_root(e):
        return Rect.point(Fraction(int(e.p), int(e.q)))
    if isinstance(e, sp.CRootOf):
        return _crootof_rect(e, tol)
    if e is sp.I:
        return Rect.point(0, 1)
    if e.is_Add:
        out = Rect.point(0)
        for a in e.args:
            out = out + _expr_rect_leaftol(a, tol)
        return out
    if e.is_Mul:
        out = Rect.point(1)
        for a in e.args:
            out = out * _expr_rect_leaftol(a, tol)
        return out
    if e.is_Pow and e.exp.is_Integer and int(e.exp) >= 0:
        base = _expr_rect_leaftol(e.base, tol)
        out = Rect.point(1)
        for _ in range(int(e.exp)):
            out = out * base
        return out
    raise NonIsolatedRoot(f"unsupported algebraic root form {e}")


def _root_rect(r, tol: Fraction) -> Rect:
    """Exact rational rectangle of width/height <= tol containing the root.

    all_roots(radicals=False) can still hand back composites such as
    2*CRootOf(x**2 + 1, 0); those are enclosed by exact interval arithmetic
    over the expression tree, tightening the leaves until the target holds.
    """
    if _is_rational_root(r):
        return Rect.point(Fraction(int(r.p), int(r.q)))
    if isinstance(r, sp.CRootOf):
        return _crootof_rect(r, tol)
    leaf_tol = tol
    for _attempt in range(8):
        rect = _expr_rect_leaftol(r, leaf_tol)
        if rect.re.width <= tol and rect.im.width <= tol:
            return rect
        leaf_tol /= 2 ** 8
    raise CapExceeded(f"cannot enclose root {r} to width {tol}")


def _sep_tol(p: sp.Poly) -> Fraction:
    """A tolerance safely below the root separation of a square-free poly.

    Mignotte: distinct roots of a square-free integer polynomial of degree d
    are more than sqrt(3) d^{-(d+2)/2} ||p||_2^{1-d} apart; the integer
    denominator below undercuts that bound.
    """
    lcm = 1
    for c in p.all_coeffs():
        lcm = sp.ilcm(lcm, sp.Rational(c).q)
    ints = [abs(int(sp.Rational(c) * lcm)) for c in p.all_coeffs()]
    d = p.degree()
    sep_den = d ** ((d + 1) // 2 + 1) * max(1, sum(ints)) ** (d - 1)
    return Fraction(1, 4 * sep_den)


def _overlaps(a: Ival, b: Ival) -> bool:
    return not (a.hi < b.lo or a.lo > b.hi)


def _rect_overlaps(a: Rect, b: Rect) -> bool:
    return _overlaps(a.re, b.re) and _overlaps(a.im, b.im)


@dataclass(frozen=True)
class AlgebraicInput:
    """An algebraic number: square-free polynomial plus an isolating rectangle.

    minpoly is stored constant-coefficient first; the box is
    (re_lo, re_hi, im_lo, im_hi), all rational, containing exactly one root.
    """

    minpoly: tuple[Fraction, ...]
    box: tuple[Fraction, Fraction, Fraction, Fraction]

    @staticmethod
    def make(coeffs: Iterable, box: Iterable) -> "AlgebraicInput":
        mp = tuple(as_fraction(c) for c in coeffs)
        bx = tuple(as_fraction(b) for b in box)
        if len(bx) != 4 or bx[0] > bx[1] or bx[2] > bx[3]:
            raise NonIsolatedRoot(f"malformed box {bx}")
        while mp and mp[-1] == 0:
            mp = mp[:-1]
        if len(mp) < 2:
            raise NonIsolatedRoot("constant polynomial has no roots")
        return AlgebraicInput(mp, bx)

    @staticmethod
    def from_rational(q) -> "AlgebraicInput":
        q = as_fraction(q)
        return AlgebraicInput.make((-q, Fraction(1)), (q, q, 0, 0))

    @staticmethod
    def from_root(r) -> "AlgebraicInput":
        """From a sympy root object, with a refined isolating rectangle.

        Accepts a Rational, a CRootOf, or an algebraic combination of those
        (sympy returns e.g. 2*CRootOf(x**2 + 1, 0) for roots of x**2 + 4).
        """
        if _is_rational_root(r):
            return AlgebraicInput.from_rational(Fraction(int(r.p), int(r.q)))
        poly = _root_poly(r)
        if isinstance(r, sp.CRootOf):
            # sympy's own interval is isolating by construction
            tol = Fraction(1, 2 ** 24)
        else:
            tol = _sep_tol(poly)
        rect = _root_rect(r, tol)
        coeffs = _coeffs_from_poly(poly)
        return AlgebraicInput.make(coeffs, (rect.re.lo, rect.re.hi, rect.im.lo, rect.im.hi))

    def locate(self):
        """Return the unique sympy root inside the box, or raise NonIsolatedRoot."""
        p = _poly_from_coeffs(self.minpoly)
        if p.degree() < 1:
            raise NonIsolatedRoot("constant polynomial")
        if sp.gcd(p, p.diff(_X)).degree() > 0:
            raise NonIsolatedRoot("polynomial is not square-free")
        box = Rect(Ival(self.box[0], self.box[1]), Ival(self.box[2], self.box[3]))
        inside = []
        for factor, _ in p.factor_list()[1]:
            for r in sp.Poly(factor, _X).all_roots(radicals=False):
                tol = Fraction(1, 2 ** 16)
                for _step in range(_BOX_REFINE_STEPS):
                    rect = _root_rect(r, tol)
                    if (box.re.lo <= rect.re.lo and rect.re.hi <= box.re.hi
                            and box.im.lo <= rect.im.lo and rect.im.hi <= box.im.hi):
                        inside.append(r)
                        break
                    if not _rect_overlaps(rect, box):
                        break
                    if _is_rational_root(r):
                        # point rectangle on the box boundary: treat as inside
                        inside.append(r)
                        break
                    tol /= 2 ** 8
                else:
                    raise NonIsolatedRoot("root cannot be separated from the box boundary")
        if len(inside) != 1:
            raise NonIsolatedRoot(f"box isolates {len(inside)} roots, need exactly 1")
        return inside[0]

    def to_json(self) -> dict:
        return {"minpoly": [rat_str(c) for c in self.minpoly],
                "box": [rat_str(b) for b in self.box]}

    @staticmethod
    def from_json(d: dict) -> "AlgebraicInput":
        return AlgebraicInput.make([parse_rat(c) for c in d["minpoly"]],
                                   [parse_rat(b) for b in d["box"]])


class NumberField:
    """Q(theta) with an explicit complex-conjugation map.

    Immutable after construction; elements are tied to their field
    instance (identity, not structural equality).
    """

    def __init__(self, minpoly, root, conj_coords, generators):
        self.minpoly = tuple(as_fraction(c) for c in minpoly)  # monic, constant first
        self.degree = len(self.minpoly) - 1
        self._root = root  # sympy CRootOf, or None for degree 1
        self.conj_coords = tuple(as_fraction(c) for c in conj_coords)
        self.generators = tuple(generators)
        self._pow_cache: dict[int, tuple[Fraction, ...]] = {}
        self._rect_cache = None
        rect = self._theta_rect(Fraction(1, 2 ** 24))
        self.theta = AlgebraicInput.make(
            self.minpoly, (rect.re.lo, rect.re.hi, rect.im.lo, rect.im.hi))

    def zero(self) -> "FieldElement":
        return FieldElement((Fraction(0),) * self.degree, self)

    def one(self) -> "FieldElement":
        return self.from_rational(1)

    def from_rational(self, q) -> "FieldElement":
        q = as_fraction(q)
        coords = [Fraction(0)] * self.degree
        coords[0] = q
        return FieldElement(tuple(coords), self)

    def element(self, coords) -> "FieldElement":
        coords = [as_fraction(c) for c in coords]
        if len(coords) > self.degree:
            raise ValueError("too many coordinates")
        coords += [Fraction(0)] * (self.degree - len(coords))
        return FieldElement(tuple(coords), self)

    def theta_elem(self) -> "FieldElement":
        if self.degree == 1:
            return self.from_rational(-self.minpoly[0])
        return self.element([0, 1])

    def conj_theta_elem(self) -> "FieldElement":
        return self.element(self.conj_coords)

    def _theta_power(self, k: int) -> tuple[Fraction, ...]:
        """Coordinates of theta^k for k up to 2(d-1)."""
        d = self.degree
        if k < d:
            coords = [Fraction(0)] * d
            coords[k] = Fraction(1)
            return tuple(coords)
        if k in self._pow_cache:
            return self._pow_cache[k]
        prev = list(self._theta_power(k - 1))
        # multiply by theta: shift, reduce theta^d = -(c_0 + ... + c_{d-1} theta^{d-1})
        top = prev[d - 1]
        shifted = [Fraction(0)] + prev[:d - 1]
        if top:
            for i in range(d):
                shifted[i] -= top * self.minpoly[i]
        out = tuple(shifted)
        self._pow_cache[k] = out
        return out

    def _theta_rect(self, tol: Fraction) -> Rect:
        if self.degree == 1:
            return Rect.point(-self.minpoly[0])
        if self._rect_cache is not None:
            cached_tol, rect = self._rect_cache
            if cached_tol <= tol:
                return rect
        rect = _root_rect(self._root, tol)
        self._rect_cache = (tol, rect)
        return rect

    def theta_sympy(self):
        """The primitive element as a sympy object (for factorization backends)."""
        if self.degree == 1:
            return sp.Rational(-self.minpoly[0])
        return self._root

    def __repr__(self):
        return f"NumberField(degree={self.degree})"


@dataclass(frozen=True)
class FieldElement:
    """Element as rational coordinates over the power basis 1, theta, ..., theta^{d-1}."""

    coords: tuple[Fraction, ...]
    field: NumberField

    def __post_init__(self):
        if len(self.coords) != self.field.degree:
            raise ValueError("coordinate length mismatch")

    def _check_same(self, other: "FieldElement"):
        if other.field is not self.field:
            raise ValueError("elements of different fields")

    @staticmethod
    def _coerce(val, field: NumberField) -> "FieldElement":
        if isinstance(val, FieldElement):
            return val
        return field.from_rational(val)

    def __add__(self, other):
        other = self._coerce(other, self.field)
        self._check_same(other)
        return FieldElement(tuple(a + b for a, b in zip(self.coords, other.coords)), self.field)

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(tuple(-a for a in self.coords), self.field)

    def __sub__(self, other):
        return self + (-self._coerce(other, self.field))

    def __rsub__(self, other):
        return (-self) + self._coerce(other, self.field)

    def __mul__(self, other):
        if not isinstance(other, FieldElement):
            q = as_fraction(other)
            return FieldElement(tuple(a * q for a in self.coords), self.field)
        self._check_same(other)
        d = self.field.degree
        prod = [Fraction(0)] * (2 * d - 1)
        for i, a in enumerate(self.coords):
            if not a:
                continue
            for j, b in enumerate(other.coords):
                if b:
                    prod[i + j] += a * b
        out = [Fraction(0)] * d
        for k, c in enumerate(prod):
            if c:
                pw = self.field._theta_power(k)
                for i in range(d):
                    if pw[i]:
                        out[i] += c * pw[i]
        return FieldElement(tuple(out), self.field)

    __rmul__ = __mul__

    def inverse(self) -> "FieldElement":
        if self.is_zero():
            raise ZeroDivisionError("zero field element")
        d = self.field.degree
        if d == 1:
            return self.field.from_rational(Fraction(1) / self.coords[0])
        # extended Euclid in Q[x] against the minimal polynomial
        a = list(self.field.minpoly)
        b = list(self.coords)
        s_a, s_b = [Fraction(0)], [Fraction(1)]

        def deg(p):
            k = len(p) - 1
            while k >= 0 and p[k] == 0:
                k -= 1
            return k

        def submul(p, q, c, shift):
            out = list(p) + [Fraction(0)] * max(0, deg(q) + shift + 1 - len(p))
            for i in range(deg(q) + 1):
                out[i + shift] -= c * q[i]
            return out

        while True:
            db = deg(b)
            if db < 0:
                raise ZeroDivisionError("element shares a factor with the minimal polynomial")
            if db == 0:
                inv = Fraction(1) / b[0]
                coords = [c * inv for c in s_b] + [Fraction(0)] * d
                return self.field.element(coords[:d])
            da = deg(a)
            if da < db:
                a, b, s_a, s_b = b, a, s_b, s_a
                continue
            c = a[da] / b[db]
            a = submul(a, b, c, da - db)
            s_a = submul(s_a, s_b, c, da - db)

    def __truediv__(self, other):
        other = self._coerce(other, self.field)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self._coerce(other, self.field) / self

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = self.field.one()
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        if not isinstance(other, FieldElement):
            try:
                other = self._coerce(other, self.field)
            except (TypeError, ValueError):
                return NotImplemented
        return self.field is other.field and self.coords == other.coords

    def __hash__(self):
        return hash((id(self.field), self.coords))

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords)

    def is_rational(self) -> bool:
        return all(c == 0 for c in self.coords[1:])

    def as_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("element is not rational")
        return self.coords[0]

    def conj(self) -> "FieldElement":
        """Complex conjugate, via the field's conjugation map on theta."""
        if self.is_rational():
            return self
        return eval_poly(self.coords, self.field.conj_theta_elem())

    def is_real(self) -> bool:
        return self.conj() == self

    def rect(self, eps) -> Rect:
        """Rectangle of width and height <= eps containing the embedding."""
        eps = as_fraction(eps)
        if eps <= 0:
            raise ValueError("eps must be positive")
        if self.is_rational():
            return Rect.point(self.coords[0])
        tol = Fraction(1, 2 ** 16)
        for _ in range(_BOX_REFINE_STEPS):
            theta = self.field._theta_rect(tol)
            acc = Rect.point(0)
            for c in reversed(self.coords):
                acc = acc * theta + Rect.point(c)
            if acc.width <= eps:
                return acc
            tol /= 2 ** 8
        raise CapExceeded("rectangle refinement ladder exhausted")

    def interval(self, eps) -> Ival:
        """Real enclosure of width <= eps; element must be real."""
        if not self.is_real():
            raise NotRealElement("interval() needs a real element")
        return self.rect(eps).re

    def sign(self) -> int:
        """Exact sign of a real element."""
        if not self.is_real():
            raise NotRealElement(f"element {self.coords} is not real")
        if self.is_zero():
            return 0
        if self.is_rational():
            return 1 if self.coords[0] > 0 else -1
        eps = Fraction(1, 2 ** 16)
        while eps >= Fraction(1, 2 ** _SIGN_MAX_BITS):
            s = self.rect(eps).re.sign()
            if s:
                return s
            eps *= Fraction(1, 2 ** 16)
        raise CapExceeded("sign refinement exhausted on a (provably nonzero) element")

    def __repr__(self):
        return f"FieldElement({[rat_str(c) for c in self.coords]})"


def eval_poly(coeffs: Sequence, x: FieldElement) -> FieldElement:
    """Evaluate a polynomial (constant first; rational or FieldElement coeffs) at x."""
    acc = x.field.zero()
    for c in reversed(list(coeffs)):
        term = c if isinstance(c, FieldElement) else x.field.from_rational(c)
        acc = acc * x + term
    return acc


def compare(x: FieldElement, y) -> int:
    """Exact three-way comparison of real elements."""
    return (x - FieldElement._coerce(y, x.field)).sign()


def floor_real(x: FieldElement) -> int:
    """Exact floor of a real element (never float-derived)."""
    if not x.is_real():
        raise NotRealElement("floor of a non-real element")
    if x.is_rational():
        q = x.as_fraction()
        return q.numerator // q.denominator
    r = x.rect(Fraction(1, 4)).re
    k = r.lo.numerator // r.lo.denominator
    while compare(x, k + 1) >= 0:
        k += 1
    while compare(x, k) < 0:
        k -= 1
    return k


# ---------------------------------------------------------------------------
# field construction


def _conj_partner(r):
    """The sympy root conjugate to r (r itself when real)."""
    if _is_rational_root(r) or r.is_real:
        return r
    roots = [c for c in _root_poly(r).all_roots(radicals=False)
             if not (_is_rational_root(c) or c.is_real)]
    tol = Fraction(1, 2 ** 16)
    for _ in range(_BOX_REFINE_STEPS):
        target = _root_rect(r, tol)
        conj_rect = Rect(target.re, -target.im)
        hits = [c for c in roots if _rect_overlaps(_root_rect(c, tol), conj_rect)]
        if len(hits) == 1:
            return hits[0]
        tol /= 2 ** 8
    raise NonIsolatedRoot("conjugate root not separated")  # pragma: no cover


def _unique_root_in(minpoly_expr, rect: Rect):
    """The root of minpoly_expr lying in rect, refining roots until unique."""
    roots = sp.Poly(minpoly_expr, _X).all_roots(radicals=False)
    tol = Fraction(1, 2 ** 16)
    for _ in range(_BOX_REFINE_STEPS):
        hits = [r for r in roots if _rect_overlaps(_root_rect(r, tol), rect)]
        if len(hits) == 1:
            return hits[0]
        if not hits:
            raise NonIsolatedRoot("no root matches the computed rectangle")
        tol /= 2 ** 8
    raise NonIsolatedRoot("could not separate candidate roots")  # pragma: no cover


def _trivial_field(gens) -> NumberField:
    return NumberField((Fraction(-1), Fraction(1)), None, (Fraction(1),), tuple(gens))


def _identity_conj_vec(degree: int) -> tuple[Fraction, ...]:
    vec = [Fraction(0)] * degree
    if degree == 1:
        vec[0] = Fraction(1)  # unused placeholder for the work field
    else:
        vec[1] = Fraction(1)
    return tuple(vec)


def _work_field(mp_monic, theta_root) -> NumberField:
    """Field with a placeholder conjugation map, for intermediate arithmetic."""
    return NumberField(mp_monic, theta_root, _identity_conj_vec(len(mp_monic) - 1), ())


def _expr_to_coords(expr, work: NumberField) -> tuple[Fraction, ...] | None:
    """Coordinates of a sympy expression that is polynomial in the field's theta."""
    z = sp.Dummy("z")
    th = work.theta_sympy()
    try:
        p = sp.Poly(sp.expand(expr).xreplace({th: z}), z, domain="QQ")
    except (sp.polys.polyerrors.PolynomialError, sp.polys.polyerrors.CoercionFailed):
        return None
    acc = work.zero()
    for k, c in enumerate(_coeffs_from_poly(p)):
        if c:
            acc = acc + work.element(work._theta_power(k)) * c
    return acc.coords


def _root_value_candidates(poly_coeffs: Sequence[Fraction], work: NumberField):
    """Elements of the work field that are roots of the given rational polynomial.

    Found by factoring over Q(theta) and collecting roots of linear factors.
    """
    if work.degree == 1:
        p = _poly_from_coeffs(poly_coeffs)
        return [work.from_rational(Fraction(r.p, r.q))
                for r in p.all_roots(radicals=False) if _is_rational_root(r)]
    dom = sp.QQ.algebraic_field(work.theta_sympy())
    expr = sum(sp.Rational(c.numerator, c.denominator) * _X ** k
               for k, c in enumerate(poly_coeffs))
    try:
        _, factors = sp.Poly(expr, _X, domain=dom).factor_list()
    except (sp.polys.polyerrors.PolynomialError, sp.polys.polyerrors.CoercionFailed,
            NotImplementedError):  # pragma: no cover
        return []
    out = []
    for fac, _mult in factors:
        if fac.degree(_X) != 1:
            continue
        c1, c0 = fac.all_coeffs()
        a = _expr_to_coords(c1, work)
        b = _expr_to_coords(c0, work)
        if a is None or b is None:  # pragma: no cover
            continue
        val = -FieldElement(tuple(b), work) * FieldElement(tuple(a), work).inverse()
        out.append(val)
    return out


def _elem_rect(x: FieldElement, tol: Fraction) -> Rect:
    theta = x.field._theta_rect(tol)
    acc = Rect.point(0)
    for c in reversed(x.coords):
        acc = acc * theta + Rect.point(c)
    return acc


def _match_root(candidates: list[FieldElement], r) -> FieldElement | None:
    """The candidate whose embedding is the root r, separated by refinement."""
    if not candidates:
        return None
    tol = Fraction(1, 2 ** 16)
    for _ in range(_BOX_REFINE_STEPS):
        target = _root_rect(r, tol)
        hits = [c for c in candidates if _rect_overlaps(_elem_rect(c, tol), target)]
        if len(hits) == 1:
            return hits[0]
        if not hits:
            return None
        tol /= 2 ** 8
    return None  # pragma: no cover


def _field_poly_gcd(a: list[FieldElement], b: list[FieldElement], field: NumberField):
    """Monic gcd of two polynomials with FieldElement coefficients (constant first)."""

    def deg(p):
        k = len(p) - 1
        while k >= 0 and p[k].is_zero():
            k -= 1
        return k

    a, b = list(a), list(b)
    while True:
        db = deg(b)
        if db < 0:
            da = deg(a)
            if da < 0:
                return [field.zero()]
            lead = a[da]
            return [a[i] / lead for i in range(da + 1)]
        da = deg(a)
        if da < db:
            a, b = b, a
            continue
        # one division step
        c = a[da] / b[db]
        shift = da - db
        for i in range(db + 1):
            a[i + shift] = a[i + shift] - c * b[i]
        a[da] = field.zero()  # exact cancellation of the leading term


def _pairwise_adjoin(work: NumberField, r, degree_cap: int):
    """Adjoin root r to Q(theta): returns (new_work, old_theta_coords, r_coords).

    Classical primitive-element search: theta' = theta + k*r for k = 1, 2, ...
    with the minimal polynomial obtained from a resultant and k validated by
    the gcd extraction of r over the candidate field.
    """
    y = sp.Dummy("y")
    q_coeffs = _coeffs_from_poly(_root_poly(r))
    q_expr_y = sum(sp.Rational(c.numerator, c.denominator) * y ** k
                   for k, c in enumerate(q_coeffs))
    mp_expr_x = sum(sp.Rational(c.numerator, c.denominator) * _X ** k
                    for k, c in enumerate(work.minpoly))

    for k in range(1, 41):
        res = sp.expand(sp.resultant(q_expr_y, mp_expr_x.subs(_X, _X - k * y), y))
        if res == 0:  # pragma: no cover
            continue
        res_poly = sp.Poly(res, _X)
        # theta' = theta + k r: locate it among the resultant's roots
        tol = Fraction(1, 2 ** 24)
        target = _elem_rect(work.theta_elem(), tol) + _root_rect(r, tol) * Fraction(k)
        candidates = []
        for fac, _m in res_poly.factor_list()[1]:
            candidates.extend(sp.Poly(fac, _X).all_roots(radicals=False))
        new_root = None
        tol2 = Fraction(1, 2 ** 16)
        for _ in range(_BOX_REFINE_STEPS):
            target = _elem_rect(work.theta_elem(), tol2) + _root_rect(r, tol2) * Fraction(k)
            hits = [c for c in candidates
                    if not _is_rational_root(c) and _rect_overlaps(_root_rect(c, tol2), target)]
            if len(hits) == 1:
                new_root = hits[0]
                break
            if not hits:
                break
            tol2 /= 2 ** 8
        if new_root is None:
            continue
        new_mp = _coeffs_from_poly(_root_poly(new_root))
        lead = new_mp[-1]
        new_mp = tuple(c / lead for c in new_mp)
        new_degree = len(new_mp) - 1
        if new_degree > degree_cap:
            raise DegreeCapExceeded(f"field degree {new_degree} > cap {degree_cap}")
        cand_work = _work_field(new_mp, new_root)
        # r = root of gcd( q(y), mp(theta' - k*y) ) over the candidate field
        g1 = [cand_work.from_rational(c) for c in q_coeffs]
        # Horner on mp with argument (theta' - k*y): keep as poly in y
        theta_p = cand_work.theta_elem()
        acc = [cand_work.zero()]
        for c in reversed(work.minpoly):
            # acc = acc * (theta' - k y) + c
            shifted = [theta_p * e for e in acc]
            moved = [cand_work.zero()] + [e * Fraction(-k) for e in acc]
            size = max(len(shifted), len(moved))
            shifted += [cand_work.zero()] * (size - len(shifted))
            moved += [cand_work.zero()] * (size - len(moved))
            acc = [s + m for s, m in zip(shifted, moved)]
            acc[0] = acc[0] + cand_work.from_rational(c)
        mp_shift = acc
        g = _field_poly_gcd(g1, mp_shift, cand_work)
        if len(g) - 1 != 1:
            continue
        r_elem = -g[0] / g[1]
        if not eval_poly(q_coeffs, r_elem).is_zero():
            continue  # pragma: no cover
        theta_old = theta_p - r_elem * Fraction(k)
        if not eval_poly(work.minpoly, theta_old).is_zero():
            continue  # pragma: no cover
        return cand_work, theta_old.coords, r_elem.coords
    raise NonIsolatedRoot("primitive-element search exhausted")  # pragma: no cover


def make_field(generators: Sequence[AlgebraicInput],
               degree_cap: int = DEGREE_CAP_DEFAULT) -> tuple[NumberField, list[FieldElement]]:
    """Build Q(theta) containing every generator and its complex conjugate.

    Returns the field and the exact embedding of each input generator.
    Embeddings are verified by substitution into their minimal polynomials;
    the conjugation map is verified to be an involution.
    """
    gens = list(generators)
    if not gens:
        return _trivial_field(()), []

    for g in gens:
        if len(g.minpoly) - 1 > degree_cap:
            raise DegreeCapExceeded(
                f"generator degree {len(g.minpoly) - 1} > cap {degree_cap}")

    roots = [g.locate() for g in gens]
    closed = []
    for r in roots:
        if all(r != c for c in closed):
            closed.append(r)
    for r in list(closed):
        c = _conj_partner(r)
        if all(c != existing for existing in closed):
            closed.append(c)

    # iterative adjunction; coords of each closed root in the running field
    work = _trivial_field(())
    coords_of: list[tuple[Fraction, ...]] = []
    for r in closed:
        if _is_rational_root(r):
            coords_of.append(work.from_rational(Fraction(int(r.p), int(r.q))).coords)
            continue
        if work.degree > 1:
            member = _match_root(
                _root_value_candidates(_coeffs_from_poly(_root_poly(r)), work), r)
            if member is not None:
                coords_of.append(member.coords)
                continue
            new_work, old_theta_coords, r_coords = _pairwise_adjoin(work, r, degree_cap)
            theta_img = FieldElement(old_theta_coords, new_work)
            coords_of = [eval_poly(c, theta_img).coords for c in coords_of]
            coords_of.append(r_coords)
            work = new_work
        else:
            mp = _coeffs_from_poly(_root_poly(r))
            lead = mp[-1]
            work = _work_field(tuple(c / lead for c in mp), r)
            coords_of = [work.from_rational(c[0]).coords for c in coords_of]
            coords_of.append(work.theta_elem().coords)

    if work.degree == 1:
        field = _trivial_field(gens)
        embeds = [field.element(coords_of[closed.index(r)]) for r in roots]
        return field, embeds

    # conjugation map: conj(theta) is a root of the minimal polynomial and
    # lies in the field because the generator set is conjugation-closed
    conj_candidates = _root_value_candidates(work.minpoly, work)
    tol = Fraction(1, 2 ** 16)
    conj_elem = None
    for _ in range(_BOX_REFINE_STEPS):
        trect = work._theta_rect(tol)
        conj_rect = Rect(trect.re, -trect.im)
        hits = [c for c in conj_candidates if _rect_overlaps(_elem_rect(c, tol), conj_rect)]
        if len(hits) == 1:
            conj_elem = hits[0]
            break
        if not hits:
            break
        tol /= 2 ** 8
    if conj_elem is None:
        raise NonIsolatedRoot("conjugate of the primitive element is not in the field")

    field = NumberField(work.minpoly, work._root, conj_elem.coords, tuple(gens))

    embeds = []
    for g, r in zip(gens, roots):
        elem = field.element(coords_of[closed.index(r)])
        residual = eval_poly(g.minpoly, elem)
        if not residual.is_zero():
            raise NonIsolatedRoot("embedding failed exact minimal-polynomial check")
        embeds.append(elem)

    ct = field.conj_theta_elem()
    if eval_poly(field.conj_coords, ct) != field.theta_elem():
        raise NonIsolatedRoot("conjugation map is not an involution")
    return field, embeds


def extend_field(field: NumberField, extra: Sequence[AlgebraicInput],
                 degree_cap: int = DEGREE_CAP_DEFAULT):
    """Adjoin extra generators; returns (new_field, embed, new_gen_elems).

    embed maps old-field elements into the new field exactly.
    """
    gens = [field.theta] + list(extra)
    new_field, embeds = make_field(gens, degree_cap=degree_cap)
    theta_img = embeds[0]

    def embed(x: FieldElement) -> FieldElement:
        if x.field is new_field:
            return x
        if x.field is not field:
            raise ValueError("embed expects elements of the source field")
        return eval_poly(x.coords, theta_img)

    return new_field, embed, embeds[1:]


I_GEN = None  # assigned below; AlgebraicInput for the imaginary unit


def _make_i_gen() -> AlgebraicInput:
    return AlgebraicInput.make((Fraction(1), Fraction(0), Fraction(1)),
                               (Fraction(-1, 2), Fraction(1, 2), Fraction(1, 2), Fraction(3, 2)))


I_GEN = _make_i_gen()


def imaginary_unit(field: NumberField) -> FieldElement | None:
    """The element i in the field, or None if x^2 + 1 has no root there.

    Found by solving (a + b*theta_im)... in practice: i is present iff some
    element squares to -1; we test the candidate (theta - conj theta) scaled,
    then fall back to a direct quadratic search over the conj-antisymmetric
    part, which contains i exactly when it exists.
    """
    if field.degree == 1:
        return None
    # antisymmetric part of theta: w = theta - conj(theta) is purely imaginary
    w = field.theta_elem() - field.conj_theta_elem()
    if w.is_zero():
        # theta real: field is real, i cannot be present
        return None
    w2 = w * w  # real and <= 0
    # i = w / sqrt(-w^2) if sqrt(-w^2) is in the field; try t*i for the
    # rational-multiple family first, then a generic quadratic solve.
    neg = -w2
    # search for s in field with s^2 = neg and s real positive
    s = _field_sqrt(neg)
    if s is None:
        return None
    if s.sign() < 0:
        s = -s
    cand = w / s
    if (cand * cand + field.one()).is_zero():
        return cand if im_sign(cand) > 0 else -cand
    return None


def im_sign(x: FieldElement) -> int:
    """Exact sign of Im(x); terminates for every field element."""
    u = x - x.conj()  # 2i Im(x), purely imaginary
    if u.is_zero():
        return 0
    tol = Fraction(1, 2 ** 16)
    while True:
        box = u.rect(tol)
        s = box.im.sign()
        if s is not None:
            return s
        tol /= 2 ** 8


def _field_sqrt(x: FieldElement) -> FieldElement | None:
    """A square root of x inside its own field, or None."""
    field = x.field
    if x.is_zero():
        return field.zero()
    # factor y^2 - x over the field via sympy
    y = sp.Symbol("_y")
    x_expr = _elem_to_sympy(x)
    try:
        factors = sp.factor_list(y ** 2 - x_expr, y, extension=field.theta_sympy())
    except sp.polys.polyerrors.PolynomialError:  # pragma: no cover
        return None
    for fac, _mult in factors[1]:
        p = sp.Poly(fac, y)
        if p.degree() == 1:
            c1, c0 = p.all_coeffs()
            root_expr = sp.together(-c0 / c1)
            elem = _sympy_to_elem(root_expr, field)
            if elem is not None and (elem * elem - x).is_zero():
                return elem
    return None


def _elem_to_sympy(x: FieldElement):
    th = x.field.theta_sympy()
    return sp.Add(*[sp.Rational(c.numerator, c.denominator) * th ** k
                    for k, c in enumerate(x.coords)])


def _sympy_to_elem(expr, field: NumberField) -> FieldElement | None:
    """Convert a sympy expression in the field's theta back to coordinates."""
    th = field.theta_sympy()
    z = sp.Symbol("_z")
    try:
        p = sp.Poly(expr.subs(th, z) if field.degree > 1 else expr, z, domain="QQ")
    except sp.polys.polyerrors.PolynomialError:
        return None
    coeffs = _coeffs_from_poly(p)
    if len(coeffs) > field.degree:
        # reduce via theta powers
        out = field.zero()
        for k, c in enumerate(coeffs):
            out = out + field.element(field._theta_power(k) if k >= field.degree else
                                      tuple(Fraction(0) if i != k else Fraction(1)
                                            for i in range(field.degree))) * c
        return out
    return field.element(coeffs)


# ---------------------------------------------------------------------------
# Q-linear independence


@dataclass(frozen=True)
class QBasis:
    """Basis of the Q-span of the inputs, rescaled so inputs have integer coords."""

    basis: tuple[FieldElement, ...]
    coords: tuple[tuple[int, ...], ...]


def _solve_exact(rows: list[list[Fraction]], rhs: list[Fraction]):
    """Solve sum_j c_j rows[j] = rhs if consistent, else None."""
    k = len(rows)
    if k == 0:
        return [] if all(x == 0 for x in rhs) else None
    n = len(rhs)
    aug = [[rows[j][i] for j in range(k)] + [rhs[i]] for i in range(n)]
    piv_cols: list[int] = []
    r = 0
    for col in range(k):
        sel = next((i for i in range(r, n) if aug[i][col] != 0), None)
        if sel is None:
            continue
        aug[r], aug[sel] = aug[sel], aug[r]
        pv = aug[r][col]
        aug[r] = [v / pv for v in aug[r]]
        for i in range(n):
            if i != r and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[r])]
        piv_cols.append(col)
        r += 1
    sol = [Fraction(0)] * k
    for i, col in enumerate(piv_cols):
        sol[col] = aug[i][k]
    for i in range(r, n):
        if aug[i][k] != 0:
            return None
    for i in range(n):  # exact verification
        acc = sum((sol[j] * rows[j][i] for j in range(k)), Fraction(0))
        if acc != rhs[i]:
            return None
    return sol


def rational_basis(elems: Sequence[FieldElement]) -> QBasis:
    """Maximal Q-linearly independent basis with integer coordinates for the inputs.

    The independent subset is chosen greedily in input order, then rescaled
    by a common denominator so every input is an integer combination.
    """
    elems = list(elems)
    if not elems:
        return QBasis((), ())
    field = next((e.field for e in elems if isinstance(e, FieldElement)), None)
    if field is None:
        field = _trivial_field(())
    elems = [e if isinstance(e, FieldElement) else field.from_rational(as_fraction(e))
             for e in elems]
    for e in elems:
        if e.field is not field:
            raise ValueError("elements of different fields")
        if not e.is_real():
            raise NotRealElement("rational_basis needs real elements")

    chosen: list[FieldElement] = []
    chosen_vecs: list[list[Fraction]] = []
    combos: list[list[Fraction]] = []
    for e in elems:
        vec = list(e.coords)
        if e.is_zero():
            combos.append([Fraction(0)] * len(chosen))
            continue
        sol = _solve_exact(chosen_vecs, vec)
        if sol is None:
            chosen.append(e)
            chosen_vecs.append(vec)
            combos.append([Fraction(0)] * (len(chosen) - 1) + [Fraction(1)])
        else:
            combos.append(sol)

    k = len(chosen)
    denom = 1
    for row in combos:
        for c in row:
            denom = denom * c.denominator // _gcd(denom, c.denominator)
    basis = tuple(b * Fraction(1, denom) for b in chosen)
    coords = tuple(
        tuple(int(c * denom) for c in (row + [Fraction(0)] * (k - len(row))))
        for row in combos)
    return QBasis(basis, coords)


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a
