"""Zero existence on bounded intervals for real-valued exponential polynomials.

The core detector samples a Lipschitz function through certified rational
approximations and sandwiches it between piecewise-linear envelopes: a
uniformly signed envelope certifies the absence of zeros, two samples with
certified opposite signs certify existence (with a refined bracket), and an
exhausted precision budget yields an explicit Undecided.

Tangential zeros defeat plain sign-change search, so the driver factors the
function's Laurent-polynomial form first.  Factors that are twists of their
own conjugate get rewritten as g1 + g2 with |g1| = |g2| bounded away from 0;
their phase gap h vanishes exactly where the factor does and crosses zero
transversally, which the plain detector can certify.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import sympy as sp

from .algebra import AlgebraicInput, FieldElement, extend_field, _root_rect
from .errors import (CapExceeded, FixedCase, G2LowerBoundFailed, InputError,
                     SizeCapExceeded)
from .exppoly import ExpPoly
from .floatguard import as_fraction
from .intervals import Ival, Rect, iacos, ipi
from .laurent import (LaurentPoly, SpectralBasis, classify, eval_laurent,
                      factor, format_laurent, split_type3, to_laurent)

EvalFn = Callable[[Fraction, Fraction], Fraction]


@dataclass(frozen=True)
class Caps:
    """Precision budget for the detector."""

    rounds: int = 40
    samples: int = 100_000
    bracket_width: Fraction = Fraction(1, 10 ** 6)

    def __post_init__(self):
        if self.rounds < 1 or self.samples < 2 or self.bracket_width <= 0:
            raise InputError("caps must be positive")


# outcomes -------------------------------------------------------------------


@dataclass(frozen=True)
class HasZero:
    bracket: tuple
    kind: str = "sign-change"

    def to_json(self):
        return {"outcome": "HasZero",
                "bracket": [str(self.bracket[0]), str(self.bracket[1])],
                "kind": self.kind, "margin": None, "conditional": None}


@dataclass(frozen=True)
class NoZero:
    margin: Optional[Fraction] = None
    conditional: Optional[str] = None  # "schanuel" for coprimality-only factors

    def to_json(self):
        return {"outcome": "NoZero", "bracket": None,
                "margin": None if self.margin is None else str(self.margin),
                "conditional": self.conditional}


@dataclass(frozen=True)
class Undecided:
    reason: str
    precision: Optional[Fraction] = None  # last delta reached

    def to_json(self):
        return {"outcome": "Undecided", "bracket": None, "margin": None,
                "conditional": None, "reason": self.reason,
                "precision": None if self.precision is None else str(self.precision)}


# envelopes ------------------------------------------------------------------


@dataclass(frozen=True)
class Envelope:
    """Piecewise-linear sandwich f_lower <= f <= f_upper with gap <= delta."""

    a: Fraction
    b: Fraction
    delta: Fraction
    samples: tuple
    values: tuple

    def _interp(self, t: Fraction) -> Fraction:
        t = as_fraction(t)
        if not self.a <= t <= self.b:
            raise InputError("point outside envelope domain")
        s, q = self.samples, self.values
        # binary search for the segment
        lo, hi = 0, len(s) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if s[mid] <= t:
                lo = mid
            else:
                hi = mid
        if s[hi] == s[lo]:
            return q[lo]
        w = (t - s[lo]) / (s[hi] - s[lo])
        return q[lo] + (q[hi] - q[lo]) * w

    def lower(self, t) -> Fraction:
        return self._interp(t) - self.delta / 2

    def upper(self, t) -> Fraction:
        return self._interp(t) + self.delta / 2

    def lower_min(self) -> Fraction:
        return min(self.values) - self.delta / 2

    def upper_max(self) -> Fraction:
        return max(self.values) + self.delta / 2


def envelope(eval_fn: EvalFn, a, b, M, delta) -> Envelope:
    """Sample-based sandwich of an M-Lipschitz function on [a, b].

    Uses N with 1/N < delta / (4 (b-a) M) sample intervals, values within
    delta/4 at the samples, and a half-delta pad on each side.
    """
    a, b, M, delta = (as_fraction(v) for v in (a, b, M, delta))
    if not a < b:
        raise InputError("need a < b")
    if delta <= 0 or M < 0:
        raise InputError("need delta > 0 and M >= 0")
    n = int(4 * (b - a) * M / delta) + 1
    samples = tuple(a + (b - a) * Fraction(j, n) for j in range(n + 1))
    values = tuple(as_fraction(eval_fn(s, delta / 4)) for s in samples)
    return Envelope(a, b, delta, samples, values)


def _envelope_size(a: Fraction, b: Fraction, M: Fraction, delta: Fraction) -> int:
    return int(4 * (b - a) * M / delta) + 2


def _certified_sign(eval_fn: EvalFn, t: Fraction, eps0: Fraction):
    """+1/-1 once |value| exceeds the error bound; None if precision stalls."""
    eps = eps0
    floor = Fraction(1, 2 ** 128)
    while eps > floor:
        q = as_fraction(eval_fn(t, eps))
        if abs(q) > eps:
            return 1 if q > 0 else -1
        eps /= 8
    return None


def _refine_bracket(eval_fn: EvalFn, lo, slo, hi, shi, width: Fraction):
    """Shrink a certified sign-change bracket by bisection."""
    eps0 = (hi - lo) / 4
    while hi - lo > width:
        mid = (lo + hi) / 2
        s = _certified_sign(eval_fn, mid, eps0)
        if s is None:
            return None
        if s == slo:
            lo = mid
        else:
            hi = mid
    return (lo, hi)


def detect_zero(eval_fn: EvalFn, M, a, b, caps: Caps = Caps(),
                trace: Optional[list] = None, kind: str = "sign-change"):
    """HasZero / NoZero / Undecided for an M-Lipschitz function on [a, b].

    eval_fn(t, eps) must return a rational within eps of the true value.
    The target must not vanish at a or b and must cross transversally for
    the verdict to be reachable; otherwise the budget runs out (Undecided).
    """
    a, b, M = as_fraction(a), as_fraction(b), as_fraction(M)
    if not a < b:
        raise InputError("need a < b")
    delta = (b - a) / 4
    for rnd in range(caps.rounds):
        if _envelope_size(a, b, M, delta) > caps.samples:
            return Undecided("sample budget exceeded", delta)
        env = envelope(eval_fn, a, b, M, delta)
        if trace is not None:
            for t, q in zip(env.samples, env.values):
                trace.append((rnd, t, q - delta / 2, q + delta / 2))
        pos = [j for j, q in enumerate(env.values) if q - delta / 2 > 0]
        neg = [j for j, q in enumerate(env.values) if q + delta / 2 < 0]
        if len(pos) == len(env.values):
            return NoZero(margin=env.lower_min())
        if len(neg) == len(env.values):
            return NoZero(margin=-env.upper_max())
        if pos and neg:
            certified = sorted(pos + neg)
            signs = {j: (1 if j in pos else -1) for j in certified}
            for j, k in zip(certified, certified[1:]):
                if signs[j] != signs[k]:
                    bracket = _refine_bracket(eval_fn, env.samples[j], signs[j],
                                              env.samples[k], signs[k],
                                              caps.bracket_width)
                    if bracket is None:
                        return Undecided("sign certification stalled", delta)
                    return HasZero(bracket, kind)
        delta /= 2
    return Undecided("envelope rounds exhausted", delta)


# Lipschitz bounds along the trajectory ----------------------------------------


def _ceil_frac(q: Fraction) -> int:
    return -((-q.numerator) // q.denominator)


def _exp_upper(x: Fraction) -> Fraction:
    """Rational bound for e^x from above (3^ceil(x) for positive x)."""
    if x <= 0:
        return Fraction(1)
    return Fraction(3) ** _ceil_frac(x)


def _coeff_mag_upper(c: FieldElement, tol: Fraction) -> Fraction:
    box = c.rect(tol)
    return (max(abs(box.re.lo), abs(box.re.hi))
            + max(abs(box.im.lo), abs(box.im.hi)))


def laurent_lipschitz(P: LaurentPoly, basis: SpectralBasis, a, b) -> Fraction:
    """Rational M bounding |d/dt P(t, e^{at}, e^{ibt})| on [a, b]; coarse."""
    a, b = as_fraction(a), as_fraction(b)
    if not a < b:
        raise InputError("need a < b")
    tol = Fraction(1, 16)
    tmax = max(abs(a), abs(b), Fraction(1))
    rate_hi = [ai.interval(tol) for ai in basis.a]
    freq_hi = [max(abs(bi.interval(tol).lo), abs(bi.interval(tol).hi))
               for bi in basis.b]
    total = Fraction(0)
    for (u, v, w), c in P.monomials.items():
        re_iv = Ival.point(0)
        for mi, riv in zip(v, rate_hi):
            re_iv = re_iv + riv * Fraction(mi)
        mu_abs = max(abs(re_iv.lo), abs(re_iv.hi)) + sum(
            abs(nk) * fk for nk, fk in zip(w, freq_hi))
        grow = _exp_upper(max(re_iv.lo * a, re_iv.lo * b,
                              re_iv.hi * a, re_iv.hi * b))
        poly_part = u * tmax ** (u - 1) if u > 0 else Fraction(0)
        total += _coeff_mag_upper(c, tol) * (poly_part + mu_abs * tmax ** u) * grow
    return total if total > 0 else Fraction(1, 10 ** 9)


def laurent_eval_fn(P: LaurentPoly, basis: SpectralBasis) -> EvalFn:
    """Real-part evaluator (t, eps) -> q for a real-valued factor."""

    def fn(t: Fraction, eps: Fraction) -> Fraction:
        return eval_laurent(P, basis, t, eps).re.mid

    return fn


# Type-3 reduction --------------------------------------------------------------

# rational guards around pi/3 and 2*pi/3: TAU below pi/3 keeps the gap
# |h| <= TAU + DELTA_E <= 2*pi/3 on the restriction set
_TAU = Fraction(1047, 1000)
_DELTA_E = Fraction(1046, 1000)


@dataclass(frozen=True)
class Type3Reduction:
    """Split data for a factor P = Q + z^u conj(Q) along the trajectory."""

    g1: LaurentPoly
    g2: LaurentPoly
    g2_lower: Fraction               # certified |g2| >= g2_lower on [c, d]
    E: tuple                         # intervals containing every zero of h
    h_lipschitz: Fraction
    h_eval: EvalFn                   # signed phase gap, valid on E
    h_abs_eval: EvalFn               # |h|, valid on all of [c, d]
    g1_eval: Callable
    g2_eval: Callable


def _sqrt_lower(q: Fraction) -> Fraction:
    """Rational m >= 0 with m*m <= q."""
    if q <= 0:
        return Fraction(0)
    scale = 2 ** 40
    return Fraction(math.isqrt(q.numerator * q.denominator * scale * scale),
                    q.denominator * scale)


def _g2_lower_bound(G: LaurentPoly, basis: SpectralBasis, c, d,
                    caps: Caps) -> Fraction:
    """Positive lower bound for the real-valued |g2|^2 trajectory of G."""
    M = laurent_lipschitz(G, basis, c, d)
    fn = laurent_eval_fn(G, basis)
    delta = Fraction(1, 2)
    for _ in range(caps.rounds):
        if _envelope_size(c, d, M, delta) > caps.samples:
            raise G2LowerBoundFailed("sample budget while bounding |g2|")
        env = envelope(fn, c, d, M, delta)
        lo = env.lower_min()
        if lo > 0:
            return _sqrt_lower(lo)
        delta /= 2
    raise G2LowerBoundFailed("precision rounds while bounding |g2|")


def type3_reduce(P: LaurentPoly, u: tuple, Q: LaurentPoly,
                 basis: SpectralBasis, c, d,
                 caps: Caps = Caps()) -> Type3Reduction:
    """Evaluators for g1, g2 = e^{i b.u t} conj(g1), and the phase gap h.

    h(t) = pi + i log(g1/g2) on the branch with values in (-pi, pi]; it
    vanishes exactly where g1 + g2 does.  |h| = pi - arccos(rho) with
    rho = Re(g1 conj(g2)) / |g2|^2, and sign(h) = sign(Im(g1 conj(g2))).
    The restriction set E keeps |h| <= TAU + DELTA_E < pi, away from the
    branch cut, so h restricted to E is Lipschitz.
    """
    c, d = as_fraction(c), as_fraction(d)
    if not c < d:
        raise InputError("need c < d")
    zero_shift = (0,) * P.r
    g2p = Q.conjugate().shift(0, zero_shift, u)
    if Q + g2p != P:
        raise InputError("split identity Q + z^u conj(Q) = P failed")
    # h depends only on g1/g2, so both sides can be rescaled by the common
    # real-exponential growth; this keeps the envelopes on an O(1) trajectory
    # even when the cleared factor itself grows along the window
    vstar = None
    for (_du, v, _dw) in list(Q.monomials) + list(g2p.monomials):
        vstar = v if vstar is None else tuple(max(p, q) for p, q in zip(vstar, v))
    if vstar and any(vstar):
        down = [-e for e in vstar]
        Q = Q.shift(0, down, (0,) * P.s)
        g2p = g2p.shift(0, down, (0,) * P.s)
    G = g2p * g2p.conjugate()
    if G.conjugate() != G:
        raise InputError("|g2|^2 trajectory is not real")
    m = _g2_lower_bound(G, basis, c, d, caps)

    def g1_eval(t, eps) -> Rect:
        return eval_laurent(Q, basis, t, eps)

    def g2_eval(t, eps) -> Rect:
        return eval_laurent(g2p, basis, t, eps)

    def _h_parts(t: Fraction, prec: int):
        tol = Fraction(1, 2 ** prec)
        g1r = eval_laurent(Q, basis, t, tol)
        g2r = eval_laurent(g2p, basis, t, tol)
        S = g1r * g2r.conj()
        den = g2r.abs_sq()
        if den.lo <= 0:
            return None
        rho = (S.re / den).intersect(Ival.make(-1, 1))
        mag = (ipi(prec) - iacos(rho, prec)).intersect(
            Ival(Fraction(0), ipi(prec).hi))
        return mag, S.im

    def h_abs_eval(t: Fraction, eps: Fraction) -> Fraction:
        t, eps = as_fraction(t), as_fraction(eps)
        prec = 64
        while prec <= (1 << 14):
            parts = _h_parts(t, prec)
            if parts is not None:
                mag, _ = parts
                if mag.width <= eps:
                    return mag.mid
            prec *= 2
        raise CapExceeded("precision ladder exhausted for |h|")

    def h_eval(t: Fraction, eps: Fraction) -> Fraction:
        t, eps = as_fraction(t), as_fraction(eps)
        prec = 64
        while prec <= (1 << 14):
            parts = _h_parts(t, prec)
            if parts is not None:
                mag, im = parts
                sgn = im.sign()
                if sgn == 1 or sgn == 0:
                    box = mag
                elif sgn == -1:
                    box = -mag
                else:
                    box = Ival(-mag.hi, mag.hi)
                if box.width <= 2 * eps:
                    return box.mid
            prec *= 2
        raise CapExceeded("precision ladder exhausted for h")

    L1 = laurent_lipschitz(Q, basis, c, d)
    L2 = laurent_lipschitz(g2p, basis, c, d)
    Mh = (L1 + L2) / m

    if _envelope_size(c, d, Mh, _DELTA_E) > caps.samples:
        raise G2LowerBoundFailed("sample budget while building the restriction set")
    env = envelope(h_abs_eval, c, d, Mh, _DELTA_E)
    E = _sublevel_intervals(env, _TAU)
    return Type3Reduction(Q, g2p, m, E, Mh, h_eval, h_abs_eval,
                          g1_eval, g2_eval)


def _sublevel_intervals(env: Envelope, tau: Fraction) -> tuple:
    """Where the lower envelope is <= tau, as merged rational intervals."""
    lows = [q - env.delta / 2 for q in env.values]
    pieces = []
    for j in range(len(env.samples) - 1):
        s0, s1 = env.samples[j], env.samples[j + 1]
        v0, v1 = lows[j], lows[j + 1]
        if v0 <= tau and v1 <= tau:
            pieces.append((s0, s1))
        elif v0 <= tau < v1:
            x = s0 + (tau - v0) * (s1 - s0) / (v1 - v0)
            pieces.append((s0, x))
        elif v1 <= tau < v0:
            x = s0 + (tau - v0) * (s1 - s0) / (v1 - v0)
            pieces.append((x, s1))
    merged = []
    for lo, hi in pieces:
        if merged and merged[-1][1] >= lo:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return tuple(merged)


# exact handling of factors that are polynomials in t alone ------------------


_RX = sp.Symbol("_rx")
_RY = sp.Symbol("_ry")


def _poly_in_t_outcome(F: LaurentPoly, c: Fraction, d: Fraction,
                       caps: Caps):
    """Exact zero decision for a factor with no exponential variables.

    Such factors have algebraic roots (the transcendence guarantee does not
    apply), so the roots are isolated exactly instead of sampled.
    """
    coeffs = {u: coef for (u, v, w), coef in F.monomials.items()}
    field = F.field
    if field.degree == 1:
        expr = sum(sp.Rational(coef.as_fraction().numerator,
                               coef.as_fraction().denominator) * _RX ** u
                   for u, coef in coeffs.items())
        candidates = sp.Poly(expr, _RX).real_roots(radicals=False)
        hits = candidates
    else:
        chi = sp.Integer(0)
        for u, coef in coeffs.items():
            cy = sum(sp.Rational(q.numerator, q.denominator) * _RY ** i
                     for i, q in enumerate(coef.coords))
            chi += cy * _RX ** u
        mp_expr = sum(sp.Rational(q.numerator, q.denominator) * _RY ** i
                      for i, q in enumerate(field.minpoly))
        norm = sp.Poly(sp.expand(sp.resultant(mp_expr, chi, _RY)), _RX)
        hits = []
        for fac, _m in norm.factor_list()[1]:
            p = sp.Poly(fac, _RX)
            if p.degree() < 1:
                continue
            for root in p.real_roots(radicals=False):
                # exact membership: adjoin the candidate and evaluate
                big, embed, (xi,) = extend_field(
                    field, [AlgebraicInput.from_root(root)])
                val = big.zero()
                power = big.one()
                for u in range(max(coeffs) + 1):
                    if u in coeffs:
                        val = val + embed(coeffs[u]) * power
                    power = power * xi
                if val.is_zero():
                    hits.append(root)
    clo, chi_ = sp.Rational(c.numerator, c.denominator), sp.Rational(
        d.numerator, d.denominator)
    for root in hits:
        if not (clo <= root <= chi_):
            continue
        if root.is_rational:
            q = Fraction(int(sp.nsimplify(root).p), int(sp.nsimplify(root).q)) \
                if not isinstance(root, sp.Rational) else Fraction(
                    int(root.p), int(root.q))
            return HasZero((q, q), "exact-point")
        dx = caps.bracket_width / 4
        mid = _root_rect(root, dx).re.mid
        # outward rounding keeps endpoints small without losing the root
        den = 4 * caps.bracket_width.denominator
        lo = Fraction(math.floor((mid - dx) * den), den)
        hi = Fraction(math.ceil((mid + dx) * den), den)
        return HasZero((lo, hi), "algebraic-root")
    return NoZero()


# the bounded decision driver --------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    """Overall outcome plus the per-factor decisions that produced it."""

    outcome: object
    factors: tuple = ()

    def to_json(self):
        base = self.outcome.to_json()
        base["factors"] = [
            {"factor": label, "multiplicity": mult, **sub.to_json()}
            for label, mult, sub in self.factors]
        return base


def _is_poly_in_t(F: LaurentPoly) -> bool:
    return all(all(e == 0 for e in v) and all(e == 0 for e in w)
               for (_u, v, w) in F.monomials)


def _decide_factor(F: LaurentPoly, basis: SpectralBasis, c, d,
                   caps: Caps, trace: Optional[list]):
    if _is_poly_in_t(F):
        return _poly_in_t_outcome(F, c, d, caps)
    try:
        tag = classify(F)
    except (CapExceeded, SizeCapExceeded) as exc:
        return Undecided(f"classification failed: {exc}")
    if tag.kind == 1:
        # coprime with its conjugate: no common zero of the pair, hence no
        # real zero, conditional on the conjectural transcendence input
        return NoZero(conditional="schanuel")
    if tag.kind == 2:
        fn = laurent_eval_fn(tag.poly, basis)
        M = laurent_lipschitz(tag.poly, basis, c, d)
        return detect_zero(fn, M, c, d, caps, trace)
    try:
        Q = split_type3(tag.poly, tag.u)
        red = type3_reduce(tag.poly, tag.u, Q, basis, c, d, caps)
    except FixedCase:
        return Undecided("twisted split has no free monomial orbit")
    except (G2LowerBoundFailed, CapExceeded) as exc:
        return Undecided(str(exc))
    margins = [_TAU]
    for lo, hi in red.E:
        if lo == hi:
            # a zero-width crossing sliver cannot hold a transcendental zero
            continue
        sub = detect_zero(red.h_eval, red.h_lipschitz, lo, hi, caps, trace,
                          kind="type3-h-crossing")
        if isinstance(sub, HasZero):
            return sub
        if isinstance(sub, Undecided):
            return sub
        margins.append(sub.margin if sub.margin is not None else _TAU)
    return NoZero(margin=min(margins))


def decide_bounded(f: ExpPoly, c, d, caps: Caps = Caps(),
                   trace: Optional[list] = None) -> Verdict:
    """Zero existence of a real-valued exponential polynomial on [c, d].

    Factors the Laurent form, decides each irreducible factor by its
    conjugation type, and merges: any certified zero wins; otherwise all
    factors must exclude zeros (some possibly conditionally).
    """
    c, d = as_fraction(c), as_fraction(d)
    if not c < d:
        raise InputError("need c < d")
    if not f.terms:
        raise InputError("identically zero input")
    if not f.real_valued:
        raise InputError("input must be real-valued")

    if c <= 0 <= d:
        at0 = f.field.zero()
        for _lam, poly in f.terms:
            at0 = at0 + poly[0]
        if at0.is_zero():
            outcome = HasZero((Fraction(0), Fraction(0)), "exact-point")
            return Verdict(outcome, (("t = 0", 1, outcome),))

    try:
        P, basis = to_laurent(f)
        _unit, facs = factor(P)
    except (CapExceeded, SizeCapExceeded) as exc:
        return Verdict(Undecided(f"factorization failed: {exc}"))

    results = []
    for F, mult in facs:
        sub = _decide_factor(F, basis, c, d, caps, trace)
        results.append((format_laurent(F), mult, sub))

    zero_hits = [sub for _l, _m, sub in results if isinstance(sub, HasZero)]
    if zero_hits:
        return Verdict(zero_hits[0], tuple(results))
    undecided = [sub for _l, _m, sub in results if isinstance(sub, Undecided)]
    if undecided:
        return Verdict(undecided[0], tuple(results))
    margins = [sub.margin for _l, _m, sub in results
               if isinstance(sub, NoZero) and sub.margin is not None]
    conditional = ("schanuel"
                   if any(isinstance(sub, NoZero) and sub.conditional
                          for _l, _m, sub in results) else None)
    outcome = NoZero(margin=min(margins) if margins else None,
                     conditional=conditional)
    return Verdict(outcome, tuple(results))
