"""Exponential polynomials f(t) = sum_j P_j(t) e^{lambda_j t} over a number field.

Construction from linear ODEs with algebraic data, exact symbolic calculus
(sum, product, derivative, conjugate), merge into cosine/sine frequency form,
and rigorous interval evaluation at rational points.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import sympy as sp

from .algebra import (
    AlgebraicInput, FieldElement, I_GEN, NumberField, eval_poly, extend_field,
    im_sign, imaginary_unit, make_field, rat_str, parse_rat,
    _root_rect,
)
from .errors import DimensionMismatch, InputError, NotRealValued
from .floatguard import as_fraction
from .intervals import Ival, Rect, icos, iexp, iexp_rect, isin, refine_to_width

_X = sp.Symbol("x")
_Y = sp.Symbol("y")


def _strip(poly: Sequence[FieldElement]) -> tuple[FieldElement, ...]:
    coeffs = list(poly)
    while coeffs and coeffs[-1].is_zero():
        coeffs.pop()
    return tuple(coeffs)


class ExpPoly:
    """Finite sum of P_j(t) e^{lambda_j t} with exact algebraic data.

    Terms are keyed by distinct exponents; identically zero polynomial parts
    are dropped on construction, so the zero function has no terms.
    """

    __slots__ = ("field", "terms", "real_valued")

    def __init__(self, field: NumberField,
                 terms: Sequence[tuple[FieldElement, Sequence[FieldElement]]]):
        merged: dict[tuple, tuple[FieldElement, list[FieldElement]]] = {}
        for lam, poly in terms:
            if lam.field is not field or any(c.field is not field for c in poly):
                raise InputError("term data must live in the ambient field")
            key = lam.coords
            if key in merged:
                old = merged[key][1]
                size = max(len(old), len(poly))
                new = [(old[i] if i < len(old) else field.zero()) +
                       (poly[i] if i < len(poly) else field.zero())
                       for i in range(size)]
                merged[key] = (lam, new)
            else:
                merged[key] = (lam, list(poly))
        out = []
        for lam, poly in merged.values():
            p = _strip(poly)
            if p:
                out.append((lam, p))
        out.sort(key=lambda item: item[0].coords)
        self.field = field
        self.terms = tuple(out)
        self.real_valued = self._conj_symmetric()

    def _conj_symmetric(self) -> bool:
        table = {lam.coords: poly for lam, poly in self.terms}
        for lam, poly in self.terms:
            partner = table.get(lam.conj().coords)
            if partner is None or len(partner) != len(poly):
                return False
            if any(partner[i] != poly[i].conj() for i in range(len(poly))):
                return False
        return True

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExpPoly):
            return NotImplemented
        return self.field is other.field and self.terms == other.terms

    def __hash__(self):
        return hash((id(self.field), self.terms))

    def __add__(self, other: "ExpPoly") -> "ExpPoly":
        if other.field is not self.field:
            raise InputError("mixed fields")
        return ExpPoly(self.field, list(self.terms) + list(other.terms))

    def __neg__(self) -> "ExpPoly":
        return ExpPoly(self.field,
                       [(lam, [-c for c in poly]) for lam, poly in self.terms])

    def __sub__(self, other: "ExpPoly") -> "ExpPoly":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, ExpPoly):
            if other.field is not self.field:
                raise InputError("mixed fields")
            out = []
            for lam1, p1 in self.terms:
                for lam2, p2 in other.terms:
                    prod = [self.field.zero()] * (len(p1) + len(p2) - 1)
                    for i, a in enumerate(p1):
                        for j, b in enumerate(p2):
                            prod[i + j] = prod[i + j] + a * b
                    out.append((lam1 + lam2, prod))
            return ExpPoly(self.field, out)
        scal = other if isinstance(other, FieldElement) else None
        if scal is None:
            scal = self.field.from_rational(as_fraction(other))
        return ExpPoly(self.field,
                       [(lam, [c * scal for c in poly]) for lam, poly in self.terms])

    __rmul__ = __mul__

    def derivative(self) -> "ExpPoly":
        out = []
        for lam, poly in self.terms:
            dp = [poly[i] * Fraction(i) for i in range(1, len(poly))]
            lp = [c * lam for c in poly]
            size = max(len(dp), len(lp))
            dp += [self.field.zero()] * (size - len(dp))
            lp += [self.field.zero()] * (size - len(lp))
            out.append((lam, [a + b for a, b in zip(dp, lp)]))
        return ExpPoly(self.field, out)

    def derivative_n(self, n: int) -> "ExpPoly":
        f = self
        for _ in range(n):
            f = f.derivative()
        return f

    def conj(self) -> "ExpPoly":
        return ExpPoly(self.field,
                       [(lam.conj(), [c.conj() for c in poly])
                        for lam, poly in self.terms])

    def degree_bound(self) -> int:
        return max((len(p) - 1 for _, p in self.terms), default=0)

    # rigorous evaluation -------------------------------------------------

    def _enclosure(self, t: Fraction, prec: int) -> Rect:
        tol = Fraction(1, 2 ** prec)
        tv = Rect.from_real(Ival.point(t))
        acc = Rect.point(0)
        for lam, poly in self.terms:
            pv = Rect.point(0)
            for c in reversed(poly):
                pv = pv * tv + c.rect(tol)
            z = lam.rect(tol) * tv
            acc = acc + pv * iexp_rect(z, prec)
        return acc

    def eval_rect(self, t, eps) -> Rect:
        """Rectangle of width <= eps (per axis) containing the exact f(t)."""
        t = as_fraction(t)
        eps = as_fraction(eps)
        return refine_to_width(lambda prec: self._enclosure(t, prec), eps)

    def eval_interval(self, t, eps) -> Ival:
        """Interval of width <= eps containing f(t); requires real_valued."""
        if not self.real_valued:
            raise NotRealValued("eval_interval needs a real-valued function")
        return self.eval_rect(t, eps).re

    def to_json(self) -> dict:
        terms = []
        for lam, poly in self.terms:
            terms.append({
                "lambda": [rat_str(c) for c in lam.coords],
                "poly": [[rat_str(c) for c in pc.coords] for pc in poly],
            })
        return {
            "field": self.field.theta.to_json(),
            "terms": terms,
        }


@dataclass(frozen=True)
class FrequencyForm:
    """f(t) = sum_k e^{r_k t} (q1_k(t) cos(w_k t) + q2_k(t) sin(w_k t))."""

    field: NumberField
    terms: tuple  # of (r, omega, q1: tuple of coeffs, q2: tuple of coeffs)

    def _enclosure(self, t: Fraction, prec: int) -> Ival:
        tol = Fraction(1, 2 ** prec)
        tv = Ival.point(t)
        acc = Ival.point(0)
        for r, omega, q1, q2 in self.terms:
            phase = omega.interval(tol) * tv
            c = icos(phase, prec)
            s = isin(phase, prec)
            p1 = Ival.point(0)
            for coeff in reversed(q1):
                p1 = p1 * tv + coeff.interval(tol)
            p2 = Ival.point(0)
            for coeff in reversed(q2):
                p2 = p2 * tv + coeff.interval(tol)
            grow = iexp(r.interval(tol) * tv, prec)
            acc = acc + grow * (p1 * c + p2 * s)
        return acc

    def eval_interval(self, t, eps) -> Ival:
        t = as_fraction(t)
        eps = as_fraction(eps)
        return refine_to_width(lambda prec: self._enclosure(t, prec), eps)


@dataclass(frozen=True)
class OdeInstance:
    """f^(n) + a_{n-1} f^(n-1) + ... + a_0 f = 0 with algebraic data."""

    coeffs: tuple  # a_0 .. a_{n-1} as AlgebraicInput
    init: tuple    # f(0) .. f^(n-1)(0) as AlgebraicInput
    interval: tuple | None  # (lo, hi) rationals, or None for unbounded

    def __post_init__(self):
        if len(self.coeffs) != len(self.init) or not self.coeffs:
            raise DimensionMismatch("need n >= 1 coefficients and n initial values")

    @property
    def order(self) -> int:
        return len(self.coeffs)


def _re_part(x: FieldElement) -> FieldElement:
    two = Fraction(1, 2)
    return (x + x.conj()) * two


def _solve_linear(rows: list[list[FieldElement]], rhs: list[FieldElement],
                  field: NumberField) -> list[FieldElement]:
    """Exact Gaussian elimination; raises on singular systems."""
    n = len(rows)
    aug = [list(rows[i]) + [rhs[i]] for i in range(n)]
    for col in range(n):
        piv = next((i for i in range(col, n) if not aug[i][col].is_zero()), None)
        if piv is None:
            raise InputError("singular linear system")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = aug[col][col].inverse()
        aug[col] = [v * inv for v in aug[col]]
        for i in range(n):
            if i != col and not aug[i][col].is_zero():
                f = aug[i][col]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[col])]
    sol = [aug[i][n] for i in range(n)]
    for i in range(n):  # exact verification
        acc = field.zero()
        for j in range(n):
            acc = acc + rows[i][j] * sol[j]
        if acc != rhs[i]:
            raise InputError("linear solve verification failed")
    return sol


def _char_root_inputs(coeff_gens: list[AlgebraicInput],
                      chi_coords: list[tuple[Fraction, ...]],
                      mp_theta: tuple[Fraction, ...]) -> list[AlgebraicInput]:
    """Isolated roots of chi as algebraic inputs over Q.

    chi has coefficients given by theta-coordinates; candidates come from the
    norm polynomial Res_y(minpoly_theta(y), chi(x, y)), then are filtered to
    actual roots numerically (the exact membership check happens later).
    """
    chi_expr = sp.Integer(0)
    for k, coords in enumerate(chi_coords):
        cy = sum(sp.Rational(c.numerator, c.denominator) * _Y ** i
                 for i, c in enumerate(coords))
        chi_expr += cy * _X ** k
    mp_expr = sum(sp.Rational(c.numerator, c.denominator) * _Y ** i
                  for i, c in enumerate(mp_theta))
    norm = sp.expand(sp.resultant(mp_expr, chi_expr, _Y))
    norm_poly = sp.Poly(norm, _X)
    out = []
    for fac, _m in norm_poly.factor_list()[1]:
        p = sp.Poly(fac, _X)
        if p.degree() < 1:
            continue
        for r in p.all_roots(radicals=False):
            out.append(AlgebraicInput.from_root(r))
    return out


def from_ode(inst: OdeInstance, degree_cap: int = 48) -> ExpPoly:
    """Exact closed-form solution of the ODE over its splitting field."""
    n = inst.order
    base_gens = list(inst.coeffs) + list(inst.init)
    base_field, base_embeds = make_field(base_gens, degree_cap)
    a = base_embeds[:n]
    for g, e in zip(base_gens, base_embeds):
        if not e.is_real():
            raise InputError("coefficients and initial values must be real")

    # chi(x) = x^n + a_{n-1} x^{n-1} + ... + a_0, coordinates over base field
    chi_coords = [e.coords for e in a] + [base_field.one().coords]
    root_inputs = _char_root_inputs(base_gens, chi_coords, base_field.minpoly)

    # numeric prefilter: keep candidates where chi could vanish
    def chi_rect(root: AlgebraicInput, tol: Fraction) -> Rect:
        x = _root_rect(root.locate(), tol)
        acc = Rect.point(1)
        for e in reversed(a):
            acc = acc * x + e.rect(tol)
        return acc

    keep = []
    for root in root_inputs:
        tol = Fraction(1, 2 ** 24)
        plausible = True
        for _ in range(4):
            if not chi_rect(root, tol).contains_zero():
                plausible = False
                break
            tol /= 2 ** 8
        if plausible:
            keep.append(root)

    field, embeds = make_field(base_gens + keep, degree_cap)
    a = embeds[:n]
    init = embeds[n:2 * n]
    chi = [*a, field.one()]
    dchis = [chi]
    for _ in range(n):
        prev = dchis[-1]
        dchis.append([prev[i] * Fraction(i) for i in range(1, len(prev))])

    roots: list[tuple[FieldElement, int]] = []
    for e in embeds[2 * n:]:
        if any(e == r for r, _ in roots):
            continue
        if not eval_poly(chi, e).is_zero():
            continue
        mult = 1
        while mult < n and eval_poly(dchis[mult], e).is_zero():
            mult += 1
        roots.append((e, mult))
    if sum(m for _, m in roots) != n:
        raise InputError("root multiplicities do not sum to the ODE order")

    # confluent Vandermonde: column (r, j) has k-th entry C(k,j) j! r^{k-j}
    cols = [(r, j) for r, m in roots for j in range(m)]
    rows = []
    for k in range(n):
        row = []
        for r, j in cols:
            if k < j:
                row.append(field.zero())
            else:
                scale = Fraction(sp.binomial(k, j) * sp.factorial(j))
                row.append(r ** (k - j) * scale)
        rows.append(row)
    sol = _solve_linear(rows, list(init), field)

    terms: dict[tuple, tuple[FieldElement, list[FieldElement]]] = {}
    for (r, j), c in zip(cols, sol):
        key = r.coords
        if key not in terms:
            terms[key] = (r, [field.zero()] * n)
        terms[key][1][j] = c
    f = ExpPoly(field, list(terms.values()))
    if not f.real_valued:
        raise InputError("solution failed the real-valuedness check")
    return f


def from_linear_system(A: Sequence[Sequence], x0: Sequence, u: Sequence,
                       interval: tuple | None = None) -> OdeInstance:
    """Reduce d/dt x = A x, f = u . x to a scalar ODE instance.

    Cayley-Hamilton: f satisfies the characteristic polynomial of A, with
    initial derivatives f^(k)(0) = u . A^k x0.
    """
    n = len(A)
    if any(len(row) != n for row in A) or len(x0) != n or len(u) != n:
        raise DimensionMismatch("matrix and vectors must share one dimension")
    rows = [[sp.Rational(as_fraction(v).numerator, as_fraction(v).denominator)
             for v in row] for row in A]
    M = sp.Matrix(rows)
    charpoly = M.charpoly(_X)
    coeffs = [Fraction(c.p, c.q) for c in reversed(charpoly.all_coeffs())]
    # monic of degree n: a_0 .. a_{n-1}
    assert coeffs[-1] == 1
    a = coeffs[:-1]

    x0v = sp.Matrix([sp.Rational(as_fraction(v).numerator, as_fraction(v).denominator)
                     for v in x0])
    uv = sp.Matrix([sp.Rational(as_fraction(v).numerator, as_fraction(v).denominator)
                    for v in u])
    init = []
    vec = x0v
    for _ in range(n):
        val = (uv.T * vec)[0, 0]
        init.append(Fraction(val.p, val.q))
        vec = M * vec
    return OdeInstance(
        coeffs=tuple(AlgebraicInput.from_rational(c) for c in a),
        init=tuple(AlgebraicInput.from_rational(c) for c in init),
        interval=interval,
    )


def ensure_imaginary_unit(f: ExpPoly) -> tuple[ExpPoly, FieldElement]:
    """The function re-based, if needed, in a field that contains i."""
    iu = imaginary_unit(f.field)
    if iu is not None:
        return f, iu
    big, embed, (gi,) = extend_field(f.field, [I_GEN])
    terms = [(embed(lam), [embed(c) for c in poly]) for lam, poly in f.terms]
    return ExpPoly(big, terms), gi


def frequency_form(f: ExpPoly) -> FrequencyForm:
    """Merge conjugate exponent pairs into cosine/sine terms with omega >= 0."""
    if not f.real_valued:
        raise NotRealValued("frequency form requires a real-valued function")
    if f.is_zero():
        return FrequencyForm(f.field, ())

    needs_i = any(im_sign(lam) != 0 for lam, _ in f.terms)
    if needs_i:
        f, iu = ensure_imaginary_unit(f)
    else:
        iu = None
    field = f.field

    table = {lam.coords: (lam, poly) for lam, poly in f.terms}
    used = set()
    out = []
    for lam, poly in f.terms:
        if lam.coords in used:
            continue
        s = im_sign(lam)
        if s == 0:
            used.add(lam.coords)
            out.append((lam, field.zero(), tuple(poly), ()))
            continue
        if s < 0:
            continue  # handled via the conjugate representative
        partner_key = lam.conj().coords
        used.add(lam.coords)
        used.add(partner_key)
        r = _re_part(lam)
        omega = (lam - lam.conj()) * iu.inverse() * Fraction(1, 2)
        # omega = Im(lam) > 0 by representative choice
        pbar = [c.conj() for c in poly]
        q1 = [a + b for a, b in zip(poly, pbar)]
        q2 = [(a - b) * iu for a, b in zip(poly, pbar)]
        out.append((r, omega, _strip(q1), _strip(q2)))

    for r, omega, q1, q2 in out:
        if not (r.is_real() and omega.is_real()):
            raise NotRealValued("frequency data failed the reality check")
        if any(not c.is_real() for c in (*q1, *q2)):
            raise NotRealValued("frequency polynomials failed the reality check")
    out.sort(key=lambda term: (term[0].coords, term[1].coords))
    return FrequencyForm(field, tuple(out))


def lipschitz_bound(f: ExpPoly, a, b) -> Fraction:
    """Rational M with sup_{[a,b]} |f'| <= M; coarse by design."""
    a = as_fraction(a)
    b = as_fraction(b)
    if not a < b:
        raise InputError("need a < b")
    g = f.derivative()
    tmax = max(abs(a), abs(b))
    tol = Fraction(1, 16)
    total = Fraction(0)
    for lam, poly in g.terms:
        coeff_bound = Fraction(0)
        for k, c in enumerate(poly):
            box = c.rect(tol)
            mag = max(abs(box.re.lo), abs(box.re.hi)) + max(abs(box.im.lo), abs(box.im.hi))
            coeff_bound += mag * tmax ** k
        re_iv = _re_part(lam).interval(tol)
        ex_hi = max(re_iv.hi * a, re_iv.hi * b, re_iv.lo * a, re_iv.lo * b)
        # e^x <= 3^ceil(x) for x > 0
        grow = Fraction(3) ** max(0, -(-ex_hi.numerator // ex_hi.denominator))
        total += coeff_bound * grow
    return total if total > 0 else Fraction(1, 10 ** 9)


# instance JSON ------------------------------------------------------------


def _parse_algebraic(obj) -> AlgebraicInput:
    if isinstance(obj, str):
        return AlgebraicInput.from_rational(parse_rat(obj))
    if isinstance(obj, dict) and "minpoly" in obj and "box" in obj:
        return AlgebraicInput.make(obj["minpoly"], obj["box"])
    raise InputError(f"not an algebraic number spec: {obj!r}")


def _parse_interval(obj):
    if obj == "unbounded":
        return None
    if (isinstance(obj, (list, tuple)) and len(obj) == 2):
        lo, hi = parse_rat(obj[0]), parse_rat(obj[1])
        if not lo < hi:
            raise InputError("interval must satisfy c < d")
        return (lo, hi)
    raise InputError(f"bad interval spec: {obj!r}")


@dataclass(frozen=True)
class Instance:
    """A parsed problem instance: the function plus the time interval."""

    f: ExpPoly
    interval: tuple | None
    mode: str


def parse_instance(obj: dict | str) -> Instance:
    """Read the documented instance JSON (ode / exppoly / linear_system)."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    if not isinstance(obj, dict) or "mode" not in obj:
        raise InputError("instance JSON needs a 'mode' key")
    mode = obj["mode"]
    interval = _parse_interval(obj.get("interval", "unbounded"))
    if mode == "ode":
        coeffs = tuple(_parse_algebraic(c) for c in obj["coeffs"])
        init = tuple(_parse_algebraic(c) for c in obj["init"])
        inst = OdeInstance(coeffs=coeffs, init=init, interval=interval)
        return Instance(from_ode(inst), interval, mode)
    if mode == "linear_system":
        A = [[parse_rat(v) for v in row] for row in obj["matrix"]]
        x0 = [parse_rat(v) for v in obj["x0"]]
        u = [parse_rat(v) for v in obj["u"]]
        inst = from_linear_system(A, x0, u, interval)
        return Instance(from_ode(inst), interval, mode)
    if mode == "exppoly":
        gens = []
        raw_terms = obj["terms"]
        for term in raw_terms:
            gens.append(_parse_algebraic(term["lambda"]))
            for c in term["poly"]:
                gens.append(_parse_algebraic(c))
        field, embeds = make_field(gens)
        pos = 0
        terms = []
        for term in raw_terms:
            lam = embeds[pos]
            pos += 1
            poly = []
            for _ in term["poly"]:
                poly.append(embeds[pos])
                pos += 1
            terms.append((lam, poly))
        return Instance(ExpPoly(field, terms), interval, mode)
    raise InputError(f"unknown mode {mode!r}")
