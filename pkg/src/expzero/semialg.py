"""Semi-algebraic machinery along exponential trajectories.

Three pieces:

* exponential sums: a polynomial composed with t -> (t, e^{r_1 t}, ...)
  collapses into sum Q_i(t) e^{beta_i t} with strictly decreasing real
  algebraic rates; beyond an explicit threshold its sign is the sign of
  the dominant block's leading coefficient.
* eventual membership: a Boolean combination of such sign conditions is
  eventually constant along the trajectory, with a computed threshold.
* restricted cylindrical decomposition: sign-invariant cells for small
  systems of rational polynomials (<= 4 variables, degree <= 8), with
  exact algebraic sample points carried as number-field elements.

Coefficient data is exact throughout: rational polynomial inputs,
number-field arithmetic for rates and sample points, interval refinement
only for ordering decisions that are then certified exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import sympy as sp

from .algebra import (AlgebraicInput, FieldElement, NumberField, extend_field,
                      make_field, _root_rect)
from .errors import (AmbiguousBranch, CapExceeded, InputError,
                     SizeCapExceeded, UnboundedFunction)
from .floatguard import as_fraction

MAX_CAD_VARS = 4
MAX_CAD_DEGREE = 8

# polynomials as {exponent tuple: Fraction}; all tuples share one length
Poly = dict


def poly(d: dict) -> Poly:
    """Normalize a monomial dict: exact coefficients, no zero terms.

    Coefficients are Fractions, or FieldElements for trajectory rewriting;
    the CAD path requires all-rational input.
    """
    out = {}
    widths = {len(k) for k in d}
    if len(widths) > 1:
        raise InputError("mixed exponent-vector lengths")
    for k, v in d.items():
        if isinstance(v, FieldElement):
            if v.is_zero():
                continue
            q = v.as_fraction() if v.is_rational() else v
        else:
            q = as_fraction(v)
        if any(e < 0 for e in k):
            raise InputError("negative exponent")
        if q:
            out[tuple(k)] = q
    return out


def poly_nvars(p: Poly) -> int:
    return len(next(iter(p))) if p else 0


def poly_eval(p: Poly, point: Sequence) -> Fraction:
    """Exact evaluation at a rational point."""
    total = Fraction(0)
    for exps, c in p.items():
        term = c
        for x, e in zip(point, exps):
            term *= as_fraction(x) ** e
        total += term
    return total


def _poly_eval_field(p: Poly, point: Sequence[FieldElement],
                     field: NumberField) -> FieldElement:
    total = field.zero()
    for exps, c in p.items():
        term = c if isinstance(c, FieldElement) else field.from_rational(c)
        for x, e in zip(point, exps):
            for _ in range(e):
                term = term * x
        total = total + term
    return total


def _total_degree(p: Poly) -> int:
    return max((sum(k) for k in p), default=0)


# exponential sums -------------------------------------------------------------


@dataclass(frozen=True)
class ExpSum:
    """sum_i Q_i(t) e^{beta_i t} with beta_1 > beta_2 > ... (exact order)."""

    field: NumberField
    terms: tuple  # ((coeffs low->high as FieldElement, beta: FieldElement), ...)

    def __post_init__(self):
        for coeffs, beta in self.terms:
            if not coeffs or all(c.is_zero() for c in coeffs):
                raise InputError("zero block in exponential sum")
            if not beta.is_real():
                raise InputError("rates must be real")
        for (_c1, b1), (_c2, b2) in zip(self.terms, self.terms[1:]):
            if not (b1 - b2).sign() > 0:
                raise InputError("rates must strictly decrease")

    @property
    def is_zero(self) -> bool:
        return not self.terms


def exp_sum_rewrite(P: Poly, r: Sequence[FieldElement],
                    field: Optional[NumberField] = None) -> ExpSum:
    """Collapse P(t, u_1, ..., u_n) under u_k = e^{r_k t} into an ExpSum.

    The first variable of P is t; each u-monomial contributes its rate
    inner product to the block exponent, exactly.
    """
    if field is None:
        field = next((x.field for x in r if isinstance(x, FieldElement)), None)
    if field is None:
        field, _ = make_field([])
    rates = [x if isinstance(x, FieldElement) else field.from_rational(x)
             for x in r]
    if any(not x.is_real() for x in rates):
        raise InputError("rates must be real")
    if P and poly_nvars(P) != len(rates) + 1:
        raise InputError("polynomial arity must be 1 + len(r)")

    blocks = {}  # beta coords -> (beta, {t-degree: coeff})
    for exps, c in P.items():
        beta = field.zero()
        for e, rate in zip(exps[1:], rates):
            beta = beta + rate * Fraction(e)
        key = beta.coords
        if key not in blocks:
            blocks[key] = (beta, {})
        tbl = blocks[key][1]
        j = exps[0]
        if isinstance(c, FieldElement):
            if c.field is not field:
                raise InputError("coefficient outside the rate field")
            add = c
        else:
            add = field.from_rational(c)
        tbl[j] = tbl[j] + add if j in tbl else add

    terms = []
    for beta, tbl in blocks.values():
        top = max((j for j, c in tbl.items() if not c.is_zero()), default=None)
        if top is None:
            continue
        coeffs = tuple(tbl.get(j, field.zero()) for j in range(top + 1))
        terms.append((coeffs, beta))
    # strictly decreasing rates; exact comparison via sign of the difference
    order = sorted(range(len(terms)),
                   key=lambda i: _sort_key_desc(terms, i))
    terms = tuple(terms[i] for i in order)
    return ExpSum(field, terms)


def _sort_key_desc(terms, i):
    # total order on real field elements via pairwise exact comparison;
    # insertion-style key: count how many rates exceed this one
    beta = terms[i][1]
    bigger = sum(1 for j, (_c, other) in enumerate(terms)
                 if j != i and (other - beta).sign() > 0)
    return bigger


# eventual membership ----------------------------------------------------------


@dataclass(frozen=True)
class EventuallyIn:
    T: Fraction


@dataclass(frozen=True)
class EventuallyOut:
    T: Fraction


def _lower_pos(x: FieldElement) -> Fraction:
    """Positive rational lower bound for a positive field element."""
    tol = Fraction(1, 2 ** 8)
    for _ in range(64):
        iv = x.interval(tol)
        if iv.lo > 0:
            return iv.lo
        tol /= 2 ** 8
    raise CapExceeded("could not bound a positive element away from zero")


def _upper_abs(x: FieldElement) -> Fraction:
    iv = x.interval(Fraction(1, 2 ** 8))
    return max(abs(iv.lo), abs(iv.hi))


def exp_sum_sign(es: ExpSum):
    """(eventual sign, threshold T): the sign for every t > T.

    T makes the dominant block's leading monomial exceed both its own
    lower-order terms and all later blocks; explicit and not minimal.
    """
    if es.is_zero:
        return 0, Fraction(1)
    coeffs, beta1 = es.terms[0]
    d = len(coeffs) - 1
    lead = coeffs[-1]
    sign = lead.sign()
    lead_lo = _lower_pos(lead if sign > 0 else -lead)
    # own lower-order terms: |lower| <= sum |c_k| t^k <= (sum |c_k|) t^{d-1}
    own = sum((_upper_abs(c) for c in coeffs[:-1]), Fraction(0))
    T = max(Fraction(1), 4 * own / lead_lo)
    if len(es.terms) > 1:
        gap = _lower_pos(beta1 - es.terms[1][1])
        tail = Fraction(0)
        dmax = 0
        for cs, _beta in es.terms[1:]:
            tail += sum((_upper_abs(c) for c in cs), Fraction(0))
            dmax = max(dmax, len(cs) - 1)
        # t^dmax e^{-gap t} <= (dmax+1)! / (gap^{dmax+1} t) for t >= 1
        bound = 4 * tail * Fraction(math.factorial(dmax + 1)) \
            / (lead_lo * gap ** (dmax + 1))
        T = max(T, bound)
    return sign, T


# semi-algebraic sets ----------------------------------------------------------


class SemiAlgSet:
    """Boolean tree over atoms P > 0 and P = 0 with rational coefficients."""

    __slots__ = ("kind", "atom", "op", "children", "nvars")

    def __init__(self, kind, atom=None, op=None, children=(), nvars=0):
        self.kind = kind
        self.atom = atom
        self.op = op
        self.children = tuple(children)
        self.nvars = nvars

    @staticmethod
    def gt(p: Poly, nvars: Optional[int] = None) -> "SemiAlgSet":
        p = poly(p)
        n = poly_nvars(p) if nvars is None else nvars
        return SemiAlgSet("atom", atom=p, op=">", nvars=n)

    @staticmethod
    def eq(p: Poly, nvars: Optional[int] = None) -> "SemiAlgSet":
        p = poly(p)
        n = poly_nvars(p) if nvars is None else nvars
        return SemiAlgSet("atom", atom=p, op="=", nvars=n)

    @staticmethod
    def lt(p: Poly, nvars: Optional[int] = None) -> "SemiAlgSet":
        return SemiAlgSet.gt({k: -v for k, v in p.items()}, nvars)

    @staticmethod
    def intersection(*parts: "SemiAlgSet") -> "SemiAlgSet":
        return SemiAlgSet("and", children=parts,
                          nvars=max(p.nvars for p in parts))

    @staticmethod
    def union(*parts: "SemiAlgSet") -> "SemiAlgSet":
        return SemiAlgSet("or", children=parts,
                          nvars=max(p.nvars for p in parts))

    @staticmethod
    def complement(part: "SemiAlgSet") -> "SemiAlgSet":
        return SemiAlgSet("not", children=(part,), nvars=part.nvars)

    def contains(self, point: Sequence) -> bool:
        """Exact membership of a rational point."""
        if self.kind == "atom":
            v = poly_eval(self.atom, point)
            return v > 0 if self.op == ">" else v == 0
        if self.kind == "and":
            return all(c.contains(point) for c in self.children)
        if self.kind == "or":
            return any(c.contains(point) for c in self.children)
        return not self.children[0].contains(point)

    def atoms(self):
        if self.kind == "atom":
            yield self
        for c in self.children:
            yield from c.atoms()

    def to_json(self):
        if self.kind == "atom":
            return {"atom": {"op": self.op,
                             "poly": [[list(k), str(v)]
                                      for k, v in sorted(self.atom.items())]}}
        return {self.kind: [c.to_json() for c in self.children]}


def eventual_membership(D: SemiAlgSet, r: Sequence[FieldElement],
                        field: Optional[NumberField] = None):
    """EventuallyIn(T) or EventuallyOut(T) for t -> (t, e^{r t}) in D.

    D's variables are (t, u_1..u_n) when D.nvars == len(r) + 1, or just
    (u_1..u_n) when D.nvars == len(r); every atom's sign stabilizes past
    its domination threshold and the tree folds over the stable signs.
    """
    n = len(r)
    if D.nvars == n:
        lift = True
    elif D.nvars == n + 1:
        lift = False
    else:
        raise InputError("variable count must be len(r) or len(r) + 1")

    T = Fraction(1)
    signs = {}
    for a in D.atoms():
        key = (tuple(sorted(a.atom.items())), a.op)
        if key in signs:
            continue
        p = a.atom if not lift else {(0, *k): v for k, v in a.atom.items()}
        es = exp_sum_rewrite(p, r, field)
        sgn, Ta = exp_sum_sign(es)
        signs[key] = sgn
        T = max(T, Ta)

    def fold(node: SemiAlgSet) -> bool:
        if node.kind == "atom":
            s = signs[(tuple(sorted(node.atom.items())), node.op)]
            return s > 0 if node.op == ">" else s == 0
        if node.kind == "and":
            return all(fold(c) for c in node.children)
        if node.kind == "or":
            return any(fold(c) for c in node.children)
        return not fold(node.children[0])

    return EventuallyIn(T) if fold(D) else EventuallyOut(T)


# algebraic limits along trajectories -------------------------------------------


def limit_semialg(A: Poly, r: Sequence[FieldElement], T0,
                  branch: Optional[tuple] = None, bound=Fraction(1)):
    """Limit of a bounded algebraic function g along u_k = e^{r_k t}.

    A(u_1..u_n, y) annihilates g on the trajectory for t > T0.  Returns
    (g*, eps, T2): g* is the root of the dominant y-block selected by the
    branch interval, and |g(e^{rt}) - g*| < e^{-eps t} for all t > T2.
    """
    root, eps, T2, field = _limit_core(A, r, T0, branch, bound)
    if isinstance(root, sp.Rational):
        gstar = field.from_rational(Fraction(int(root.p), int(root.q)))
    else:
        _big, _embed, (gstar,) = extend_field(
            field, [AlgebraicInput.from_root(root)])
    return gstar, eps, T2


def _limit_core(A: Poly, r: Sequence[FieldElement], T0,
                branch: Optional[tuple], bound):
    """limit_semialg workhorse; the limit comes back as a sympy number."""
    T0 = as_fraction(T0)
    bound = as_fraction(bound)
    if bound <= 0:
        raise UnboundedFunction("need a positive bound for the function")
    if not A:
        raise InputError("zero annihilating polynomial")
    n = poly_nvars(A) - 1
    if n != len(r):
        raise InputError("annihilator arity must be len(r) + 1")
    field = next((x.field for x in r if isinstance(x, FieldElement)), None)
    if field is None:
        field, _ = make_field([])
    rates = [x if isinstance(x, FieldElement) else field.from_rational(x)
             for x in r]

    # blocks: beta -> univariate poly in y with rational coefficients
    blocks = {}
    for exps, c in A.items():
        beta = field.zero()
        for e, rate in zip(exps[:-1], rates):
            beta = beta + rate * Fraction(e)
        key = beta.coords
        if key not in blocks:
            blocks[key] = (beta, {})
        j = exps[-1]
        tbl = blocks[key][1]
        tbl[j] = tbl.get(j, Fraction(0)) + c

    items = []
    for beta, tbl in blocks.values():
        tbl = {j: q for j, q in tbl.items() if q}
        if tbl:
            items.append((beta, tbl))
    if not items:
        raise InputError("annihilating polynomial vanished identically")
    order = sorted(range(len(items)),
                   key=lambda i: sum(1 for j, (other, _t) in enumerate(items)
                                     if j != i and
                                     (other - items[i][0]).sign() > 0))
    items = [items[i] for i in order]
    beta1, q1 = items[0]
    y = sp.Symbol("_ly")
    q1_poly = sp.Poly(sum(sp.Rational(v.numerator, v.denominator) * y ** j
                          for j, v in q1.items()), y)
    if q1_poly.degree() < 1:
        raise AmbiguousBranch("dominant block is constant in the function value")
    roots = q1_poly.real_roots(radicals=False)
    uniq = []
    for root in roots:
        if not any(root == u for u in uniq):
            uniq.append(root)
    if branch is not None:
        lo = sp.Rational(as_fraction(branch[0]))
        hi = sp.Rational(as_fraction(branch[1]))
        uniq = [root for root in uniq if lo <= root <= hi]
    if len(uniq) != 1:
        raise AmbiguousBranch(
            f"{len(uniq)} dominant-block roots match the branch data")
    root = uniq[0]

    ddeg = q1_poly.degree()
    if len(items) == 1:
        # the function equals a fixed root beyond the threshold
        return root, Fraction(1), max(T0, Fraction(1)), field

    gap = _lower_pos(beta1 - items[1][0])
    B = max(Fraction(1), bound)
    M = sum(sum(abs(v) for v in tbl.values()) * B ** max(tbl)
            for _beta, tbl in items[1:])
    # |Q1(g)| <= M e^{-gap t}  implies  dist(g, roots Q1) <= (M e^{-gap t})^{1/d}
    eps = gap / (2 * ddeg)
    # e^{-gap t/d} M^{1/d} < e^{-eps t}  once  t > 2 ln(max(1, M)) / gap
    lnM = Fraction(7, 10) * max(1, M).numerator.bit_length()
    T2 = max(T0, Fraction(1), 2 * lnM / gap)
    # beyond T2 the distance must also separate the chosen root
    if len(uniq) >= 1 and len(roots) > 1:
        sep = _min_root_gap(roots)
        if sep is not None:
            # e^{-eps t} < sep/2
            k = 0
            while Fraction(1, 2 ** k) >= sep / 2:
                k += 1
            T2 = max(T2, Fraction(k) / eps)
    return root, eps, T2, field


def _min_root_gap(roots) -> Optional[Fraction]:
    vals = []
    for root in roots:
        if not any(root == v for v in vals):
            vals.append(root)
    if len(vals) < 2:
        return None
    best = None
    for i, a in enumerate(vals):
        for b in vals[i + 1:]:
            gapq = _sym_lower_pos(abs(a - b))
            best = gapq if best is None else min(best, gapq)
    return best


def _sym_lower_pos(d) -> Fraction:
    """Rational lower bound for a positive sympy real expression."""
    prec = 20
    while prec <= 400:
        val = d.evalf(prec)
        q = Fraction(str(val)) if val > 0 else None
        if q and q > Fraction(1, 10 ** (prec - 2)):
            return q / 2
        prec *= 2
    raise CapExceeded("could not lower-bound a positive quantity")


# restricted cylindrical decomposition ------------------------------------------


@dataclass(frozen=True)
class Cell:
    """One sign-invariant cell with an exact algebraic sample point."""

    types: tuple            # 0 = section, 1 = sector, per level
    path: tuple             # stack index per level (0..2k over k roots)
    field: NumberField
    sample: tuple           # FieldElements, one per level
    bounds: tuple           # per level: ("point",) | ("interval", lo?, hi?)

    def sample_approx(self, digits: int = 9) -> tuple:
        tol = Fraction(1, 10 ** digits)
        return tuple(x.interval(tol).mid for x in self.sample)

    def to_json(self):
        return {"types": list(self.types), "path": list(self.path),
                "sample": [str(q) for q in self.sample_approx()]}


@dataclass(frozen=True)
class CellDecomposition:
    nvars: int
    polys: tuple            # the input polynomials (normalized dicts)
    level_polys: tuple      # projection factors per level (1-based arity)
    cells: tuple

    def to_json(self):
        return {"nvars": self.nvars,
                "polys": [[[list(k), str(v)] for k, v in sorted(p.items())]
                          for p in self.polys],
                "cells": [c.to_json() for c in self.cells]}

    def locate(self, point: Sequence) -> Cell:
        """The unique cell whose index chain matches a rational point."""
        point = [as_fraction(x) for x in point]
        if len(point) != self.nvars:
            raise InputError("dimension mismatch")
        path = []
        for level in range(1, self.nvars + 1):
            roots = _rational_prefix_roots(self.level_polys[level - 1],
                                           point[:level - 1])
            x = sp.Rational(point[level - 1].numerator,
                            point[level - 1].denominator)
            idx = 0
            for root in roots:
                if x > root:
                    idx += 2
                elif x == root:
                    idx += 1
                    break
            path.append(idx)
        for cell in self.cells:
            if cell.path == tuple(path):
                return cell
        raise InputError("no cell matches the point's index chain")


def _sym_poly(p: Poly, gens):
    expr = sp.Integer(0)
    for exps, c in p.items():
        term = sp.Rational(c.numerator, c.denominator)
        for g, e in zip(gens, exps):
            term *= g ** e
        expr += term
    return expr


def _dict_poly(expr, gens) -> Poly:
    p = sp.Poly(expr, gens)
    out = {}
    for exps, c in p.terms():
        q = Fraction(int(sp.Rational(c).p), int(sp.Rational(c).q))
        if q:
            out[tuple(int(e) for e in exps)] = q
    return out


_CAD_GENS = tuple(sp.Symbol(f"_cx{i}") for i in range(1, MAX_CAD_VARS + 1))


def _squarefree_factors(exprs, gens) -> list:
    """Irreducible non-constant factors, deduplicated, as dict polys."""
    seen = []
    out = []
    for expr in exprs:
        expr = sp.expand(expr)
        if expr.is_number:
            continue
        for fac, _m in sp.factor_list(expr, *gens)[1]:
            f = sp.Poly(fac, gens)
            if f.total_degree() < 1:
                continue
            # sign-normalize so duplicates collapse
            lead = f.coeffs()[0]
            if lead < 0:
                f = -f
            key = f.as_expr()
            if not any(key == s for s in seen):
                seen.append(key)
                out.append(f.as_expr())
    return out


def _projection_levels(polys: Sequence[Poly], nvars: int) -> tuple:
    """level_polys[k] = factors in variables x1..x_{k+1} (dict form)."""
    gens = _CAD_GENS[:nvars]
    current = _squarefree_factors([_sym_poly(p, gens) for p in polys], gens)
    levels = [None] * nvars
    for level in range(nvars, 0, -1):
        lv_gens = gens[:level]
        levels[level - 1] = [_dict_poly(e, lv_gens) for e in current]
        if level == 1:
            break
        x = gens[level - 1]
        nxt = []
        for e in current:
            pe = sp.Poly(e, x)
            if pe.degree() < 1:
                nxt.append(e)
                continue
            nxt.extend(c for c in pe.all_coeffs() if not sp.sympify(c).is_number)
            nxt.append(sp.discriminant(e, x))
        for i, e1 in enumerate(current):
            for e2 in current[i + 1:]:
                if sp.Poly(e1, x).degree() >= 1 and sp.Poly(e2, x).degree() >= 1:
                    nxt.append(sp.resultant(e1, e2, x))
        current = _squarefree_factors(nxt, gens[:level - 1])
    return tuple(levels)


def _rational_prefix_roots(level_polys: Sequence[Poly], prefix: Sequence):
    """Sorted distinct real roots over a rational prefix point (exact)."""
    x = sp.Symbol("_lift")
    roots = []
    for p in level_polys:
        expr = sp.Integer(0)
        for exps, c in p.items():
            term = sp.Rational(c.numerator, c.denominator)
            for q, e in zip(prefix, exps[:-1]):
                term *= sp.Rational(q.numerator, q.denominator) ** e
            expr += term * x ** exps[-1]
        pe = sp.Poly(expr, x)
        if pe.degree() < 1:
            continue
        for root in pe.real_roots(radicals=False):
            if not any(root == r for r in roots):
                roots.append(root)
    return sorted(roots)


def _field_roots(level_polys: Sequence[Poly], field: NumberField,
                 prefix: Sequence[FieldElement]):
    """Sorted distinct real roots of the substituted level polys over K.

    Returns (root, poly index set) pairs so cells can name the polynomials
    whose sections bound them.  Rational-coefficient fast path goes
    straight through exact root isolation; algebraic coefficients go
    through norm candidates plus an exact membership check in an
    extension field.
    """
    x = sp.Symbol("_lift")
    th = sp.Symbol("_lth")
    roots = []
    provenance = {}
    for pidx, p in enumerate(level_polys):
        # substituted univariate coefficients, low -> high
        dmax = max(exps[-1] for exps in p)
        coeffs = []
        for j in range(dmax + 1):
            acc = field.zero()
            for exps, c in p.items():
                if exps[-1] != j:
                    continue
                term = field.from_rational(c)
                for xe, e in zip(prefix, exps[:-1]):
                    for _ in range(e):
                        term = term * xe
                acc = acc + term
            coeffs.append(acc)
        while coeffs and coeffs[-1].is_zero():
            coeffs.pop()
        if len(coeffs) < 2:
            continue
        if all(c.is_rational() for c in coeffs):
            expr = sum(sp.Rational(c.as_fraction().numerator,
                                   c.as_fraction().denominator) * x ** j
                       for j, c in enumerate(coeffs))
            cands = sp.Poly(expr, x).real_roots(radicals=False)
            hits = cands
        else:
            chi = sp.Integer(0)
            for j, c in enumerate(coeffs):
                cy = sum(sp.Rational(q.numerator, q.denominator) * th ** i
                         for i, q in enumerate(c.coords))
                chi += cy * x ** j
            mp_expr = sum(sp.Rational(q.numerator, q.denominator) * th ** i
                          for i, q in enumerate(field.minpoly))
            norm = sp.Poly(sp.expand(sp.resultant(mp_expr, chi, th)), x)
            hits = []
            for fac, _m in norm.factor_list()[1]:
                pf = sp.Poly(fac, x)
                if pf.degree() < 1:
                    continue
                for root in pf.real_roots(radicals=False):
                    big, embed, (xi,) = extend_field(
                        field, [AlgebraicInput.from_root(root)])
                    val = big.zero()
                    power = big.one()
                    for c in coeffs:
                        val = val + embed(c) * power
                        power = power * xi
                    if val.is_zero():
                        hits.append(root)
        for root in hits:
            if not any(root == r for r in roots):
                roots.append(root)
            provenance.setdefault(root, set()).add(pidx)
    out = sorted(roots)
    return [(root, tuple(sorted(provenance[root]))) for root in out]


def _rational_below(root) -> Fraction:
    q = _root_rational(root, sp.Rational(1, 4))
    return q - Fraction(1)


def _rational_between(a, b) -> Fraction:
    dx = sp.Rational(1, 16)
    while True:
        qa = _root_rational(a, dx)
        qb = _root_rational(b, dx)
        lo, hi = qa + Fraction(dx), qb - Fraction(dx)
        if lo < hi:
            mid = (lo + hi) / 2
            ms = sp.Rational(mid.numerator, mid.denominator)
            if a < ms < b:
                return mid
        dx /= 2 ** 6
        if dx < sp.Rational(1, 2 ** 400):
            raise CapExceeded("failed to separate adjacent roots")


def _root_rational(root, dx) -> Fraction:
    if isinstance(root, sp.Rational):
        return Fraction(int(root.p), int(root.q))
    return _root_rect(root, Fraction(int(dx.p), int(dx.q))).re.mid


def cad(polys: Sequence[Poly], nvars: int) -> CellDecomposition:
    """Sign-invariant cylindrical decomposition of R^nvars for the polys.

    Each cell records its type vector, its stack index chain, and an exact
    sample point (number-field arithmetic; extensions happen per cell).
    """
    if nvars < 1 or nvars > MAX_CAD_VARS:
        raise SizeCapExceeded(f"nvars {nvars} outside 1..{MAX_CAD_VARS}")
    polys = [poly(p) for p in polys]
    for p in polys:
        if p and poly_nvars(p) != nvars:
            raise InputError("polynomial arity mismatch")
        if _total_degree(p) > MAX_CAD_DEGREE:
            raise SizeCapExceeded(
                f"degree {_total_degree(p)} > cap {MAX_CAD_DEGREE}")
    levels = _projection_levels(polys, nvars)

    base_field, _ = make_field([])
    stack = [Cell((), (), base_field, (), ())]
    for level in range(nvars):
        nxt = []
        for cell in stack:
            nxt.extend(_lift_cell(cell, levels[level]))
        stack = nxt
    return CellDecomposition(nvars, tuple(polys), levels, tuple(stack))


def _lift_cell(cell: Cell, level_polys: Sequence[Poly]) -> list:
    roots = _field_roots(level_polys, cell.field, cell.sample)
    out = []
    k = len(roots)
    if k == 0:
        out.append(Cell(cell.types + (1,), cell.path + (0,), cell.field,
                        cell.sample + (cell.field.zero(),),
                        cell.bounds + (("interval", None, None),)))
        return out
    refs = [(i, inds) for i, (_root, inds) in enumerate(roots)]
    # leftmost open sector
    q = _rational_below(roots[0][0])
    out.append(Cell(cell.types + (1,), cell.path + (0,), cell.field,
                    cell.sample + (cell.field.from_rational(q),),
                    cell.bounds + (("interval", None, refs[0]),)))
    for i, (root, inds) in enumerate(roots):
        out.append(_section_cell(cell, root, i, inds))
        if i + 1 < k:
            q = _rational_between(root, roots[i + 1][0])
            out.append(Cell(cell.types + (1,), cell.path + (2 * i + 2,),
                            cell.field,
                            cell.sample + (cell.field.from_rational(q),),
                            cell.bounds + (("interval", refs[i],
                                            refs[i + 1]),)))
    last = roots[-1][0]
    q = -_rational_below(-last) if isinstance(last, sp.Rational) \
        else _root_rational(last, sp.Rational(1, 4)) + 1
    out.append(Cell(cell.types + (1,), cell.path + (2 * k,), cell.field,
                    cell.sample + (cell.field.from_rational(q),),
                    cell.bounds + (("interval", refs[-1], None),)))
    return out


def _section_cell(cell: Cell, root, i: int, inds: tuple) -> Cell:
    if isinstance(root, sp.Rational):
        field = cell.field
        coords = cell.sample + (field.from_rational(
            Fraction(int(root.p), int(root.q))),)
    else:
        field, embed, (xi,) = extend_field(
            cell.field, [AlgebraicInput.from_root(root)])
        coords = tuple(embed(x) for x in cell.sample) + (xi,)
    return Cell(cell.types + (0,), cell.path + (2 * i + 1,), field, coords,
                cell.bounds + (("point", (i, inds)),))


def cell_sign(decomp: CellDecomposition, cell: Cell, poly_index: int) -> int:
    """Exact sign of an input polynomial at the cell's sample point."""
    p = decomp.polys[poly_index]
    if not p:
        return 0
    return _poly_eval_field(p, cell.sample, cell.field).sign()
