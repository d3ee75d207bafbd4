import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from multlab.bipoly import BiPoly, monomials_of_bidegree, parse_bipoly, random_bihomogeneous
from multlab.exactnum import QQ, DomainError, PowerSeries, PrecisionError, matrix_rank
from multlab.idealkit import (IdealHandle, ResourceCapExceeded, colon, delta_pair, e_phi,
                              groebner, hilbert_bigraded, i0_index, intersect, member,
                              nu_constant, ord_upper_bound, phi_stable, rank, rho_sequence,
                              saturate, saturate_ideal, vanishing_space)
from multlab.systems import Transformation

from conftest import SEED, point, system


def P(s, n=1):
    return parse_bipoly(s, n)


def I(*gens, n=1):
    return IdealHandle([P(g, n) for g in gens], n)


def series(cs, prec=40):
    return PowerSeries(tuple(Fraction(c) for c in cs) + (Fraction(0),) * (prec - len(cs)), prec)


def poly_point(coords, prec=40):
    """coordinates given as coefficient lists in z"""
    return tuple(series(c, prec) for c in coords)


def graded_span_contains(gens, Q):
    """Independent membership oracle for bi-homogeneous ideals: Q of
    bidegree (a, b) lies in I iff it is a k-combination of monomial
    multiples m*g of bidegree exactly (a, b)."""
    n = Q.n
    a, b = Q.bidegree
    products = []
    for g in gens:
        ga, gb = g.bidegree
        if ga > a or gb > b:
            continue
        for m in monomials_of_bidegree(n, a - ga, b - gb):
            products.append(g.mul_monomial(m))
    monos = monomials_of_bidegree(n, a, b)
    rows = [[h.terms.get(m, 0) for m in monos] for h in products]
    r0 = matrix_rank(rows) if rows else 0
    r1 = matrix_rank(rows + [[Q.terms.get(m, 0) for m in monos]])
    return r0 == r1


# ---------------------------------------------------------------- groebner

def test_groebner_examples():
    assert list(groebner(I("X0"))) == [P("X0")]
    assert set(map(str, groebner(I("X0*X1 - X0'^2", "X0")))) == {"X0", "X0'^2"}
    assert list(groebner(I("1"))) == [P("1")]
    assert I("1").is_whole()


def test_basis_is_reduced():
    rng = random.Random(SEED)
    for _ in range(20):
        gens = [random_bihomogeneous(rng, 1, rng.randint(0, 2), rng.randint(0, 2)) for _ in range(3)]
        gens = [g for g in gens if g]
        if not gens:
            continue
        G = IdealHandle(gens, 1).basis()
        leads = [g.leading()[0] for g in G]
        for i, g in enumerate(G):
            for e in g.terms:
                for j, l in enumerate(leads):
                    if j != i or e != leads[i]:
                        assert not all(x <= y for x, y in zip(l, e))


@given(st.integers(0, 10**6), st.permutations(range(3)))
def test_reduced_basis_permutation_invariant(seed, perm):
    rng = random.Random(seed)
    gens = [random_bihomogeneous(rng, 1, rng.randint(0, 2), rng.randint(0, 2)) for _ in range(3)]
    assert IdealHandle(gens, 1).basis() == IdealHandle([gens[i] for i in perm], 1).basis()


def test_resource_cap():
    with pytest.raises(ResourceCapExceeded):
        IdealHandle([P("X0^2 - X1*X0'"), P("X1^2 - X0*X1'"), P("X0*X1 - X0'*X1'")], 1, cap=1).basis()


# ---------------------------------------------------------------- membership

def test_member_examples():
    J = I("X0*X1 - X0'^2", "X1'*X0")
    assert member(P("X0*X1 - X0'^2"), J)
    assert not member(P("1"), J)


def test_member_against_span_oracle():
    rng = random.Random(SEED)
    members = nonmembers = 0
    while members < 50 or nonmembers < 50:
        gens = [random_bihomogeneous(rng, 1, rng.randint(0, 1), rng.randint(1, 2)) for _ in range(2)]
        gens = [g for g in gens if g]
        if not gens:
            continue
        J = IdealHandle(gens, 1)
        a, b = rng.randint(1, 3), rng.randint(1, 3)
        if members < 50:
            Q = BiPoly.zero(1)
            for g in gens:
                ga, gb = g.bidegree
                if ga <= a and gb <= b:
                    Q = Q + g * random_bihomogeneous(rng, 1, a - ga, b - gb)
            if Q:
                assert graded_span_contains(gens, Q)
                assert member(Q, J)
                members += 1
        Q = random_bihomogeneous(rng, 1, a, b)
        if Q and not graded_span_contains(gens, Q) and nonmembers < 50:
            assert not member(Q, J)
            nonmembers += 1


# ---------------------------------------------------------------- colon, saturation, rank

def test_colon_saturate_examples():
    assert colon(I("X0^2"), I("X0")).same_as(I("X0"))
    assert saturate(I("X0^2*X1"), P("X0")).same_as(I("X1"))
    J = I("X0*X1 - X0'^2", "X1'*X0")
    assert colon(J, I("1")).same_as(J)


def test_saturate_ideal_and_intersect():
    assert saturate_ideal(I("X0^2*X1", "X0*X1'*X1"), I("X0")).same_as(I("X1"))
    assert intersect(I("X0"), I("X1")).same_as(I("X0*X1"))


def test_rank_examples():
    assert rank(I("X0")) == 1
    assert rank(I("X0", "X1")) == 2
    assert rank(I("X0*X1' - X1*X0'", "X0'")) == 2
    with pytest.raises(DomainError):
        rank(I("1"))


def test_rank_of_colon_does_not_drop():
    rng = random.Random(SEED)
    for _ in range(15):
        gens = [random_bihomogeneous(rng, 1, rng.randint(0, 1), rng.randint(0, 2)) for _ in range(2)]
        gens = [g for g in gens if g]
        J = random_bihomogeneous(rng, 1, 0, 1)
        if not gens or not J:
            continue
        A = IdealHandle(gens, 1)
        if A.is_whole():
            continue
        C = colon(A, IdealHandle([J], 1))
        if not C.is_whole():
            assert rank(C) >= rank(A)


# ---------------------------------------------------------------- hilbert

def test_hilbert_examples():
    assert hilbert_bigraded(IdealHandle([], 1), 1, 1) == 4
    assert hilbert_bigraded(I("X0"), 1, 1) == 2


def test_hilbert_hypersurface_formula():
    F = P("X0'^2*X1 - X1'^2*X0")
    for a in range(5):
        for b in range(4):
            full = len(monomials_of_bidegree(1, a, b))
            sub = len(monomials_of_bidegree(1, a - 2, b - 1)) if a >= 2 and b >= 1 else 0
            assert hilbert_bigraded(IdealHandle([F], 1), a, b) == full - sub


def test_hilbert_monotone_in_generators():
    rng = random.Random(SEED)
    for _ in range(10):
        gens = []
        prev = None
        for _ in range(3):
            g = random_bihomogeneous(rng, 1, rng.randint(0, 1), rng.randint(0, 1))
            if g:
                gens.append(g)
            h = hilbert_bigraded(IdealHandle(gens, 1), 2, 2)
            if prev is not None:
                assert h <= prev
            prev = h


# ---------------------------------------------------------------- delta pair

def test_delta_pair_examples():
    d = delta_pair(I("X0"), 1, 1, 1)
    assert (d.delta0, d.delta1) == (0, 1)
    d = delta_pair(I("X1'*X0 - X0'*X1"), 1, 2, 1)
    assert (d.delta0, d.delta1) == (1, 1)


def _scan_oracle(gens, mu, nu0, nu1, degs, box=5):
    d0, d1 = degs
    best = None
    for a in range(box + 1):
        for b in range(box + 1):
            if any(g.bidegree[0] <= a and g.bidegree[1] <= b for g in gens):
                val = mu * d0 * b + nu0 * d1 * a + nu1 * d1 * b
                if best is None or (val, a) < best[:2]:
                    best = (val, a, b)
    return best


@pytest.mark.parametrize("weights", [(1, 1, 1), (5, 1, 0), (1, 7, 3), (Fraction(1, 2), 3, 2)])
def test_delta_pair_exhaustive_scan(weights):
    F = P("X0'^2*X1 + X1'^2*X0")
    d = delta_pair(IdealHandle([F], 1), *weights)
    assert member(d.witness, IdealHandle([F], 1))
    assert d.witness.bidegree == (d.delta0, d.delta1)
    val, a, b = _scan_oracle([F], *weights, degs=F.bidegree)
    assert (d.objective, d.delta0, d.delta1) == (val, a, b)


def test_delta_pair_non_principal():
    J = I("X0'*X0", "X1'^2*X1")
    d = delta_pair(J, 1, 1, 1, degs=(1, 1))
    assert member(d.witness, J)
    assert d.objective == _scan_oracle(J.basis(), 1, 1, 1, (1, 1))[0]
    with pytest.raises(DomainError):
        delta_pair(J, 1, 1, 1)


# ---------------------------------------------------------------- vanishing spaces

GRAPH = poly_point([[1], [0, 1], [1], [0, 1]])


def test_vanishing_space_examples():
    assert vanishing_space([GRAPH], 1, 0, 1) == []
    V = vanishing_space([GRAPH], 1, 1, 1)
    assert len(V) == 1
    g = P("X1'*X0 - X0'*X1")
    c = next(iter(V[0].terms.values())) / g.terms[next(iter(V[0].terms))]
    assert V[0] == g * BiPoly.const(1, c)


def test_vanishing_space_monotone_in_points():
    pts = [GRAPH, poly_point([[1], [1], [1], [2]]), poly_point([[1], [0, 0, 1], [1], [0, 1]])]
    for a, b in [(1, 1), (2, 1), (2, 2)]:
        dims = [len(vanishing_space(pts[:k], 1, a, b)) for k in range(1, 4)]
        assert dims == sorted(dims, reverse=True)


def test_vanishing_space_precision():
    short = poly_point([[1], [0, 1], [1], [0, 1]], prec=3)
    with pytest.raises(PrecisionError):
        vanishing_space([short], 1, 2, 2)


# ---------------------------------------------------------------- stability

def test_phi_stable_examples():
    T = Transformation.of(system("fredholm"))
    assert phi_stable(I("X0"), T) == (True, None)
    assert phi_stable(I("1"), T)[0]
    ok, w = phi_stable(I("X1"), T)
    assert not ok and w == P("X1")


def test_e_phi_examples():
    T = Transformation.of(system("fredholm"))
    r = e_phi([P("X0")], T, cap=3)
    assert r.exceeds_cap and r.e == 3
    r = e_phi([P("X1")], T, cap=3)
    assert r.e == 0 and not r.exceeds_cap and r.ranks[:2] == [1, 2]


def test_ord_upper_bound_examples():
    pt = point("fredholm", 64)
    assert ord_upper_bound(I("X0"), pt).value == 0 and ord_upper_bound(I("X0"), pt).exact
    r = ord_upper_bound(I("X1'*X0 - X0'*X1"), GRAPH)
    assert not r.exact and r.value == 40
    r = ord_upper_bound(I("X1 - X0 - X1'*X0"), poly_point([[1], [0, 1], [1], [1, 1, 1]]))
    assert r.exact and r.value == 2
    with pytest.raises(DomainError):
        ord_upper_bound(IdealHandle([], 1), GRAPH)


def test_nu_and_rho():
    assert nu_constant(1, 2, 1) == 512
    assert nu_constant(1, 2, 0) == 1
    assert rho_sequence(1, 2, 2, 0, 2) == [0, 1, 8]
    rho = rho_sequence(2, 2, 2, 1, 3)
    assert rho[1] == 1 and rho[2] > rho[1]


def test_i0_index():
    r = i0_index([GRAPH], 1, 1, 1, 0, delta=(1, 1))
    assert 1 <= r.i0 <= 2
    assert r.i0 == 1 and r.label


def test_i0_refuses_huge_rho():
    with pytest.raises(ResourceCapExceeded):
        i0_index([GRAPH], 1, 1, 2, 1, delta=(1, 1))
