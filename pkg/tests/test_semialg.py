"""Exponential-sum rewriting, eventual membership, limits, and cells."""

import math
import random
from fractions import Fraction as F

import mpmath
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from expzero.algebra import AlgebraicInput, make_field
from expzero.errors import (AmbiguousBranch, InputError, SizeCapExceeded,
                            UnboundedFunction)
from expzero.semialg import (Cell, CellDecomposition, EventuallyIn,
                             EventuallyOut, ExpSum, SemiAlgSet, cad,
                             cell_sign, eventual_membership, exp_sum_rewrite,
                             exp_sum_sign, limit_semialg, poly, poly_eval)

SQRT2 = AlgebraicInput.from_root(sp.CRootOf(sp.Symbol("x") ** 2 - 2, 1))


def _traj(P, rates, t):
    """Float value of P(t, e^{r_1 t}, ...) straight from the monomials."""
    total = 0.0
    for exps, c in P.items():
        v = float(c) * t ** exps[0]
        for e, rf in zip(exps[1:], rates):
            v *= math.exp(rf * t * e)
        total += v
    return total


def _expsum_mp(es, t):
    """High-precision value of sum Q_i(t) e^{beta_i t}."""
    with mpmath.workprec(300):
        total = mpmath.mpf(0)
        for coeffs, beta in es.terms:
            q = mpmath.mpf(0)
            for j, c in enumerate(coeffs):
                iv = c.interval(F(1, 10 ** 30))
                q += mpmath.mpf(iv.mid.numerator) / iv.mid.denominator * mpmath.mpf(t) ** j
            b = beta.interval(F(1, 10 ** 30)).mid
            total += q * mpmath.exp(mpmath.mpf(b.numerator) / b.denominator * t)
        return total


# rewriting ---------------------------------------------------------------


def test_rewrite_linear_minus_cubic():
    # u - t^3 under u = e^t: blocks e^t and -t^3
    es = exp_sum_rewrite(poly({(0, 1): 1, (3, 0): -1}), [F(1)])
    assert len(es.terms) == 2
    (c1, b1), (c2, b2) = es.terms
    assert b1.as_fraction() == 1 and [c.as_fraction() for c in c1] == [1]
    assert b2.as_fraction() == 0
    assert [c.as_fraction() for c in c2] == [0, 0, 0, -1]


def test_rewrite_two_rates():
    es = exp_sum_rewrite(poly({(0, 1, 1): 1, (0, 1, 0): -1}), [F(1), F(-2)])
    assert [(b.as_fraction(), [c.as_fraction() for c in cs])
            for cs, b in es.terms] == [(F(1), [F(-1)]), (F(-1), [F(1)])]


def test_rewrite_constant():
    es = exp_sum_rewrite(poly({(0,): 5}), [])
    assert len(es.terms) == 1
    assert es.terms[0][1].as_fraction() == 0
    assert exp_sum_sign(es) == (1, F(1))


def test_rewrite_zero_polynomial():
    es = exp_sum_rewrite({}, [F(1)])
    assert es.is_zero
    assert exp_sum_sign(es)[0] == 0


def test_rewrite_cancelling_monomials():
    # u*t - u*t collapses away entirely
    es = exp_sum_rewrite({(1, 1): F(1), (1, 1): F(0)}, [F(1)])
    assert es.is_zero


def test_rewrite_irrational_rate_merges_blocks():
    # u1^2 and u2 share the rate 2*sqrt(2)... no: r = (sqrt2, 2*sqrt2)
    field, (s,) = make_field([SQRT2])
    es = exp_sum_rewrite(poly({(0, 2, 0): 1, (0, 0, 1): 1}), [s, s * 2])
    assert len(es.terms) == 1
    assert [c.as_fraction() for c in es.terms[0][0]] == [2]


def test_rewrite_arity_mismatch():
    with pytest.raises(InputError):
        exp_sum_rewrite(poly({(0, 1): 1}), [F(1), F(2)])


@given(st.lists(st.tuples(st.integers(0, 2), st.integers(0, 2),
                          st.integers(-4, 4)), min_size=1, max_size=6),
       st.floats(0.3, 4.0))
@settings(max_examples=40, deadline=None)
def test_rewrite_matches_trajectory(monos, t):
    P = {}
    for i, j, c in monos:
        P[(i, j)] = P.get((i, j), F(0)) + F(c)
    P = {k: v for k, v in P.items() if v}
    es = exp_sum_rewrite(P, [F(-1)])
    direct = _traj(P, [-1.0], t)
    collapsed = float(_expsum_mp(es, t))
    assert abs(direct - collapsed) < 1e-7 * (1 + abs(direct))


# eventual sign and membership --------------------------------------------


def test_eventual_sign_dominates_samples():
    es = exp_sum_rewrite(poly({(0, 1): 1, (3, 0): -1}), [F(1)])
    sgn, T = exp_sum_sign(es)
    assert sgn == 1
    with mpmath.workprec(200):
        for k in range(51):
            t = mpmath.mpf(float(T)) + k
            assert mpmath.exp(t) - t ** 3 > 0


def test_membership_above_cubic():
    D = SemiAlgSet.gt({(0, 1): 1, (3, 0): -1})
    res = eventual_membership(D, [F(1)])
    assert isinstance(res, EventuallyIn)
    for k in range(51):
        t = float(res.T) + k
        assert math.exp(min(t, 700)) > t ** 3


def test_membership_negative_halfplane():
    # u = e^t stays positive, so {u < 0} is eventually (indeed always) missed
    res = eventual_membership(SemiAlgSet.lt({(0, 1): 1}), [F(1)])
    assert isinstance(res, EventuallyOut)


def test_membership_time_cutoff():
    res = eventual_membership(SemiAlgSet.gt({(1, 0): 1, (0, 0): -5}), [F(1)])
    assert isinstance(res, EventuallyIn)
    assert res.T >= 5


def test_membership_no_time_variable():
    # D over (u,) alone: {u > 0} with decaying trajectory stays in
    res = eventual_membership(SemiAlgSet.gt({(1,): 1}, nvars=1), [F(-1)])
    assert isinstance(res, EventuallyIn)


def test_membership_equality_atom():
    # u^2 - u^2 = 0 holds identically; u - 1 = 0 eventually fails
    always = eventual_membership(SemiAlgSet.eq({}, nvars=2), [F(-1)])
    assert isinstance(always, EventuallyIn)
    res = eventual_membership(
        SemiAlgSet.eq({(0, 1): 1, (0, 0): -1}), [F(-1)])
    assert isinstance(res, EventuallyOut)
    for k in range(1, 51):
        assert math.exp(-(float(res.T) + k)) != 1


def test_membership_boolean_tree():
    # (u > t^3 and not(t < 2)) holds eventually; arity (t, u)
    above = SemiAlgSet.gt({(0, 1): 1, (3, 0): -1})
    late = SemiAlgSet.complement(SemiAlgSet.gt({(0, 0): 2, (1, 0): -1}))
    res = eventual_membership(SemiAlgSet.intersection(above, late), [F(1)])
    assert isinstance(res, EventuallyIn)
    res2 = eventual_membership(
        SemiAlgSet.union(SemiAlgSet.lt({(0, 1): 1}),
                         SemiAlgSet.lt({(1, 0): 1})), [F(1)])
    assert isinstance(res2, EventuallyOut)


def test_membership_arity_check():
    with pytest.raises(InputError):
        eventual_membership(SemiAlgSet.gt({(1, 0, 0): 1}), [F(1)])


def test_semialg_contains_and_json():
    circle_in = SemiAlgSet.lt({(2, 0): 1, (0, 2): 1, (0, 0): -1})
    assert circle_in.contains((F(1, 2), F(1, 2)))
    assert not circle_in.contains((F(1), F(1)))
    j = circle_in.to_json()
    assert "atom" in j and j["atom"]["op"] == ">"


@given(st.lists(st.tuples(st.integers(0, 2), st.integers(0, 2),
                          st.integers(-3, 3)), min_size=1, max_size=4),
       st.tuples(st.integers(-8, 8), st.integers(-8, 8)))
@settings(max_examples=40, deadline=None)
def test_complement_is_involutive(monos, pt):
    P = {}
    for i, j, c in monos:
        P[(i, j)] = P.get((i, j), F(0)) + F(c)
    A = SemiAlgSet.gt(P, nvars=2) if any(P.values()) else SemiAlgSet.eq({}, 2)
    point = (F(pt[0], 3), F(pt[1], 3))
    twice = SemiAlgSet.complement(SemiAlgSet.complement(A))
    assert A.contains(point) == twice.contains(point)
    # De Morgan on a two-atom tree
    B = SemiAlgSet.eq(P, nvars=2)
    lhs = SemiAlgSet.complement(SemiAlgSet.intersection(A, B))
    rhs = SemiAlgSet.union(SemiAlgSet.complement(A), SemiAlgSet.complement(B))
    assert lhs.contains(point) == rhs.contains(point)


# limits -------------------------------------------------------------------


def test_limit_logistic_tail():
    # y(1+u) = 1 along u = e^{-t}: limit 1
    A = poly({(0, 1): 1, (1, 1): 1, (0, 0): -1})
    g, eps, T2 = limit_semialg(A, [F(-1)], F(0))
    assert g.as_fraction() == 1 and eps > 0
    t = float(T2) + 1
    for _ in range(30):
        val = 1 / (1 + math.exp(-t))
        assert abs(val - 1) < math.exp(-float(eps) * t) * (1 + 1e-12)
        t += 1.3


def test_limit_decaying_coordinate():
    g, eps, T2 = limit_semialg(poly({(0, 1): 1, (1, 0): -1}), [F(-1)], F(0))
    assert g.as_fraction() == 0
    t = float(T2) + 1
    for _ in range(30):
        assert math.exp(-t) < math.exp(-float(eps) * t) * (1 + 1e-12)
        t += 1.1


def test_limit_rational_function():
    # y(1+u^2) = u: value u/(1+u^2) -> 0
    A = poly({(0, 1): 1, (2, 1): 1, (1, 0): -1})
    g, eps, T2 = limit_semialg(A, [F(-1)], F(0))
    assert g.as_fraction() == 0
    t = float(T2) + 1
    for _ in range(30):
        val = math.exp(-t) / (1 + math.exp(-2 * t))
        assert abs(val) < math.exp(-float(eps) * t) * (1 + 1e-12)
        t += 1.1


def test_limit_needs_branch_data():
    # y^2 = 1 - u has two dominant roots
    A = poly({(0, 2): 1, (0, 0): -1, (1, 0): 1})
    with pytest.raises(AmbiguousBranch):
        limit_semialg(A, [F(-1)], F(0))
    g, eps, T2 = limit_semialg(A, [F(-1)], F(0), branch=(F(0), F(2)))
    assert g.as_fraction() == 1
    t = float(T2) + 1
    for _ in range(30):
        val = math.sqrt(1 - math.exp(-t))
        assert abs(val - 1) < math.exp(-float(eps) * t) * (1 + 1e-12)
        t += 0.9


def test_limit_irrational_value():
    # y^2 = 2 - u, upper branch: limit sqrt(2)
    A = poly({(0, 2): 1, (0, 0): -2, (1, 0): 1})
    g, eps, T2 = limit_semialg(A, [F(-1)], F(0), branch=(F(1), F(2)))
    iv = g.interval(F(1, 10 ** 15))
    assert abs(float(iv.mid) - math.sqrt(2)) < 1e-12
    t = float(T2) + 1
    for _ in range(25):
        val = math.sqrt(2 - math.exp(-t))
        assert abs(val - math.sqrt(2)) < math.exp(-float(eps) * t) * (1 + 1e-12)
        t += 1.7


def test_limit_single_block_is_exact():
    # y - 1/2: the function IS the constant 1/2
    g, eps, T2 = limit_semialg(poly({(0, 1): 2, (0, 0): -1}), [F(-1)], F(0))
    assert g.as_fraction() == F(1, 2)


def test_limit_input_validation():
    with pytest.raises(InputError):
        limit_semialg({}, [F(-1)], F(0))
    with pytest.raises(UnboundedFunction):
        limit_semialg(poly({(0, 1): 1}), [F(-1)], F(0), bound=F(0))
    with pytest.raises(AmbiguousBranch):
        # dominant block has no y dependence at all
        limit_semialg(poly({(0, 0): 1, (1, 1): 1}), [F(-1)], F(0))
    with pytest.raises(InputError):
        limit_semialg(poly({(0, 0, 1): 1}), [F(-1)], F(0))


# cells --------------------------------------------------------------------


def test_cad_single_line():
    d = cad([poly({(1,): 1})], 1)
    assert [c.types for c in d.cells] == [(1,), (0,), (1,)]
    assert [cell_sign(d, c, 0) for c in d.cells] == [-1, 0, 1]
    assert d.cells[1].sample[0].as_fraction() == 0


def test_cad_circle_and_axis():
    circle = poly({(2, 0): 1, (0, 2): 1, (0, 0): -1})
    axis = poly({(0, 1): 1})
    d = cad([circle, axis], 2)
    pts = sorted(tuple(float(q) for q in c.sample_approx(8))
                 for c in d.cells if c.types == (0, 0))
    assert pts == [(-1.0, 0.0), (1.0, 0.0)]
    on_circle = [c for c in d.cells if cell_sign(d, c, 0) == 0]
    assert len(on_circle) >= 4  # two poles plus upper/lower arcs


def test_cad_parabola_sections():
    d = cad([poly({(0, 1): 1, (2, 0): -1})], 2)
    graph = [c for c in d.cells if cell_sign(d, c, 0) == 0]
    for c in graph:
        x, y = c.sample
        assert (y - x * x).is_zero()
    assert any(c.types == (1, 0) for c in graph)
    assert any(c.types == (0, 0) for c in graph)


def test_cad_irrational_zero_cell():
    d = cad([poly({(2, 0): 1, (0, 0): -2}), poly({(0, 1): 1, (1, 0): -1})], 2)
    diag = [c for c in d.cells if c.types == (0, 0)
            and cell_sign(d, c, 0) == 0 and cell_sign(d, c, 1) == 0]
    assert len(diag) == 2
    for c in diag:
        assert c.field.degree == 2
        x, y = c.sample
        assert (y - x).is_zero() and (x * x - F(2)).is_zero()


def test_cad_sign_invariance_random_points():
    circle = poly({(2, 0): 1, (0, 2): 1, (0, 0): -1})
    axis = poly({(0, 1): 1})
    d = cad([circle, axis], 2)
    rng = random.Random(20240817)
    for _ in range(150):
        pt = (F(rng.randint(-250, 250), 100), F(rng.randint(-250, 250), 100))
        cell = d.locate(pt)
        for i, p in enumerate((circle, axis)):
            v = poly_eval(p, pt)
            assert ((v > 0) - (v < 0)) == cell_sign(d, cell, i)


def test_cad_locate_on_boundaries():
    d = cad([poly({(2, 0): 1, (0, 2): 1, (0, 0): -1})], 2)
    north = d.locate((F(0), F(1)))
    assert cell_sign(d, north, 0) == 0 and north.types[1] == 0
    inside = d.locate((F(0), F(0)))
    assert cell_sign(d, inside, 0) == -1


def test_cad_paths_are_unique():
    d = cad([poly({(2, 0): 1, (0, 2): 1, (0, 0): -1}), poly({(0, 1): 1})], 2)
    paths = [c.path for c in d.cells]
    assert len(paths) == len(set(paths))


def test_cad_caps():
    with pytest.raises(SizeCapExceeded):
        cad([poly({(1, 0, 0, 0, 0): 1})], 5)
    with pytest.raises(SizeCapExceeded):
        cad([poly({(9,): 1})], 1)
    with pytest.raises(InputError):
        cad([poly({(1, 0): 1})], 1)


def test_cad_json_roundtrip():
    import json
    d = cad([poly({(1,): 1, (0,): -1})], 1)
    blob = json.dumps(d.to_json())
    back = json.loads(blob)
    assert back["nvars"] == 1 and len(back["cells"]) == 3


@given(st.lists(st.tuples(st.integers(0, 2), st.integers(0, 2),
                          st.integers(-3, 3)), min_size=1, max_size=3),
       st.integers(0, 10 ** 6))
@settings(max_examples=10, deadline=None)
def test_cad_random_conic_sign_invariance(monos, seed):
    P = {}
    for i, j, c in monos:
        P[(i, j)] = P.get((i, j), F(0)) + F(c)
    P = {k: v for k, v in P.items() if v}
    if not P or sum(sum(k) for k in P) == 0:
        return
    d = cad([P], 2)
    rng = random.Random(seed)
    for _ in range(25):
        pt = (F(rng.randint(-60, 60), 17), F(rng.randint(-60, 60), 17))
        cell = d.locate(pt)
        v = poly_eval(P, pt)
        assert ((v > 0) - (v < 0)) == cell_sign(d, cell, 0)


def test_poly_helper_validation():
    with pytest.raises(InputError):
        poly({(1, 0): 1, (1,): 2})
    with pytest.raises(InputError):
        poly({(-1,): 1})
    assert poly({(1,): 0}) == {}
