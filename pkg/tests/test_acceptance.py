"""Acceptance suite: one PASS/FAIL line per criterion (shown in the
terminal summary, or inline with -s)."""
import math
import random
import time
from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from math import comb, factorial

import pytest

from multlab.audit import construct_aux, constants_sheet, run_audit
from multlab.bipoly import (BiPoly, bihomogenize, monomials_of_bidegree, ord_at, parse_zform,
                            random_affine, random_bihomogeneous)
from multlab.exactnum import PowerSeries, Tower, big_gt, big_str, matrix_rank
from multlab.idealkit import IdealHandle, member, rho_sequence
from multlab.projgeo import ProjPoint, c_n, liouville_check, load_cycle, wedge_ord
from multlab.stabledyn import c3, check_T_stable, stability_bound, verify_stable_ord_bound
from multlab.systems import (Transformation, apply, check_correctness_axioms, residuals,
                             solve_system)

from conftest import SEED, bundled, point, solution, system

# ---------------------------------------------------------------- shared runs

AUX_FIXTURES = [("exp", 1), ("fredholm", 1), ("exp2", 2), ("fredholm2", 2)]


@lru_cache(maxsize=None)
def aux_run():
    t0 = time.perf_counter()
    cells = []
    for name, n in AUX_FIXTURES:
        pt = point(name, 100)
        for a in range(5):
            for b in range(5):
                Q = construct_aux(pt, a, b)
                o = ord_at(Q, pt)
                floor = (a + 1) * (b + 1) ** n // factorial(n)
                pig = (a + 1) * comb(b + n, n) - 1
                cells.append((name, n, a, b, o.value, floor, pig))
    return cells, time.perf_counter() - t0


def audit_from_config(name, threads=1):
    spec = bundled()["audits"][name]
    sys_ = system(spec["system"])
    prec = spec["prec"]
    g = spec["grid"]
    return run_audit(point(spec["system"], prec), sys_.n, g["M_max"], g["N_max"], prec,
                     bounds=spec.get("bounds", ["mixed", "product"]),
                     params=spec.get("params"), threads=threads, name=name,
                     fit_M=spec.get("fit_M"))


@lru_cache(maxsize=None)
def fredholm6():
    return audit_from_config("fredholm-grid-6")


# ---------------------------------------------------------------- criterion 1

@pytest.mark.xfail(strict=True, reason="for n = 1 the floor bound exceeds the dimension count "
                                       "by one; see README, known limitations")
def test_criterion_1_auxiliary_construction(criterion):
    cells, secs = aux_run()
    pig_ok = sum(o >= pig for *_, o, floor, pig in cells)
    floor_ok = sum(o >= floor for *_, o, floor, pig in cells)
    ok = pig_ok == floor_ok == len(cells) and secs < 60
    criterion(1, ok, f"{len(cells)} cells, pigeonhole met in {pig_ok}, floor met in {floor_ok}, "
                     f"{secs:.1f}s")
    assert ok


def test_criterion_1_attainable_parts():
    cells, secs = aux_run()
    assert secs < 60
    assert all(o >= pig for *_, o, floor, pig in cells)
    assert all(o >= floor for _, n, *_, o, floor, pig in cells if n == 2)
    # for n = 1 the floor is (a+1)(b+1) = pigeonhole + 1
    assert all(floor == pig + 1 for _, n, *_, floor, pig in cells if n == 1)


# ---------------------------------------------------------------- criterion 2

@pytest.mark.xfail(strict=True, reason="the n = 1 floor bound is unattainable in most cells")
def test_criterion_2_extremal_orders(criterion):
    g = fredholm6()
    ok = (g.inconclusive == 0 and g.cell(0, 1).E.value == 1 and g.cell(1, 1).E.value == 3
          and g.monotonicity_violations == 0 and g.violations == 0)
    criterion(2, ok, f"{len(g.cells)} cells, inconclusive {g.inconclusive}, "
                     f"pigeonhole {g.pigeonhole_violations}, floor shortfalls {g.floor_shortfalls}, "
                     f"monotonicity {g.monotonicity_violations}")
    assert ok


def test_criterion_2_attainable_parts():
    g = fredholm6()
    assert len(g.cells) == 49 and g.inconclusive == 0
    assert g.cell(0, 1).E.exact and g.cell(0, 1).E.value == 1
    assert g.cell(1, 1).E.exact and g.cell(1, 1).E.value == 3
    assert g.monotonicity_violations == 0
    assert g.pigeonhole_violations == 0


# ---------------------------------------------------------------- criterion 3

def test_criterion_3_bound_shape(criterion):
    a = fredholm6()
    b = audit_from_config("fredholm-grid-6")
    c = audit_from_config("fredholm-grid-6", threads=4)
    k = a.K_hat["mixed"]
    finite = k is not None and math.isfinite(float(k))
    same = a.K_hat == b.K_hat == c.K_hat and a.csv_text() == b.csv_text() == c.csv_text()
    slope = a.slopes[6]
    ok = finite and same and 0.8 <= slope <= 1.2
    criterion(3, ok, f"K_hat = {k}, identical across runs/threads: {same}, "
                     f"slope at M=6 = {slope:.6f} against log(N+1); "
                     f"{a.slopes_logN[6]:.6f} against log N over N >= 1")
    assert ok


# ---------------------------------------------------------------- criterion 4

def test_criterion_4_solvers(criterion):
    (e,) = solution("exp", 128)
    exp_ok = all(e.coeffs[k] == Fraction(1, factorial(k)) for k in range(128))
    (f,) = solution("fredholm", 256)
    fr_ok = all(f.coeffs[k] == (1 if k and k & (k - 1) == 0 else 0) for k in range(256))
    res = {}
    for name, prec in [("exp", 128), ("fredholm", 256), ("thue-morse", 256)]:
        rs = residuals(system(name), solution(name, prec))
        res[name] = all(not r.exact and r.value >= prec - 1 for r in rs)
    ok = exp_ok and fr_ok and all(res.values())
    criterion(4, ok, f"exp 1/k!: {exp_ok}, indicator: {fr_ok}, residuals: {res}")
    assert ok


# ---------------------------------------------------------------- criterion 5

def test_criterion_5_homogenization_commutes(criterion):
    rng = random.Random(SEED)
    names = ["exp", "exp2", "ramanujan-style"]
    failures = 0
    for i in range(200):
        s = system(names[i % 3])
        P = random_affine(rng, s.n, rng.randint(0, 3), rng.randint(0, 3))
        while not P:
            P = random_affine(rng, s.n, rng.randint(0, 3), rng.randint(0, 3))
        lhs = apply(Transformation.of(s), bihomogenize(P))
        rhs = bihomogenize(s.derive(P), (P.deg_z + s.shift_z, P.deg_X + s.shift_X))
        failures += lhs != rhs
    criterion(5, failures == 0, f"200 samples, {failures} failures")
    assert failures == 0


# ---------------------------------------------------------------- criterion 6

def test_criterion_6_correctness_axioms(criterion):
    D = check_correctness_axioms(Transformation.of(system("exp")), 100, SEED)
    T = check_correctness_axioms(Transformation.of(system("fredholm")), 100, SEED)
    s = system("fredholm")
    bad = Transformation("morphism", s, override=lambda Q: s.pullback(Q) + Q, check_growth=False)
    B = check_correctness_axioms(bad, 100, SEED)
    ok = D["passed"] and T["passed"] and not B["passed"]
    criterion(6, ok, f"Leibniz failures {len(D['failures'])}, homomorphism failures "
                     f"{len(T['failures'])}, corrupted map flagged in {len(B['failures'])}/100")
    assert ok


# ---------------------------------------------------------------- criterion 7

def naive_remainder(P, G):
    """Textbook multivariate division of P by the list G."""
    r = BiPoly.zero(P.n)
    p = P
    while p:
        e, c = p.leading()
        for g in G:
            ge, gc = g.leading()
            if all(x >= y for x, y in zip(e, ge)):
                p = p - g.mul_monomial(tuple(x - y for x, y in zip(e, ge)), c / gc)
                break
        else:
            lead = BiPoly(P.n, {e: c})
            r = r + lead
            p = p - lead
    return r


def graded_span_contains(gens, Q):
    n = Q.n
    a, b = Q.bidegree
    prods = [g.mul_monomial(m) for g in gens if g.bidegree[0] <= a and g.bidegree[1] <= b
             for m in monomials_of_bidegree(n, a - g.bidegree[0], b - g.bidegree[1])]
    monos = monomials_of_bidegree(n, a, b)
    rows = [[h.terms.get(m, 0) for m in monos] for h in prods]
    return (matrix_rank(rows) if rows else 0) == matrix_rank(rows + [[Q.terms.get(m, 0) for m in monos]])


def test_criterion_7_groebner_oracles(criterion):
    rng = random.Random(SEED)
    mismatches = 0
    for _ in range(100):
        gens = []
        while not gens:
            gens = [g for g in (random_bihomogeneous(rng, 2, rng.randint(0, 1), rng.randint(1, 2),
                                                      density=0.4) for _ in range(2)) if g]
        I = IdealHandle(gens, 2)
        if rng.random() < 0.5:
            Q = BiPoly.zero(2)
            for g in gens:
                if g.bidegree[0] <= 1 and g.bidegree[1] <= 2:
                    Q = Q + g * random_bihomogeneous(rng, 2, 1 - g.bidegree[0], 2 - g.bidegree[1],
                                                     density=0.5)
        else:
            Q = random_bihomogeneous(rng, 2, 1, 2, density=0.5)
        if not Q:
            Q = gens[0]
        by_division = not naive_remainder(Q, list(I.basis()))
        mismatches += member(Q, I) != by_division or by_division != graded_span_contains(gens, Q)
    perm_bad = 0
    for _ in range(20):
        gens = [g for g in (random_bihomogeneous(rng, 1, rng.randint(0, 2), rng.randint(0, 2))
                            for _ in range(3)) if g]
        base = IdealHandle(gens, 1).basis()
        perm_bad += any(IdealHandle(list(p), 1).basis() != base for p in permutations(gens))
    ok = mismatches == 0 and perm_bad == 0
    criterion(7, ok, f"100 membership instances, {mismatches} mismatches; "
                     f"20 permutation families, {perm_bad} differing bases")
    assert ok


# ---------------------------------------------------------------- criterion 8

def test_criterion_8_stability_lab(criterion):
    fr = system("fredholm")
    fs = solution("fredholm", 64)
    X0 = IdealHandle([BiPoly.var(1, 2)], 1)
    graph = IdealHandle([BiPoly.var(1, 1) * BiPoly.var(1, 2) - BiPoly.var(1, 0) * BiPoly.var(1, 3)], 1)
    v = verify_stable_ord_bound(X0, fr, fs)
    chk = check_T_stable(graph, fr)
    ok = (c3(fr) == 0 and stability_bound(fr) == 2 and v.is_T_stable and v.ord_upper.exact
          and v.ord_upper.value == 0 and v.satisfied and not chk.stable and chk.witness is not None)
    criterion(8, ok, f"C3 = {c3(fr)}, bound = {stability_bound(fr)}, V(X0): {v.status} "
                     f"(ord <= {v.ord_upper}), graph rejected with witness {chk.witness}")
    assert ok


# ---------------------------------------------------------------- criterion 9

def test_criterion_9_constants(criterion):
    cn_ok = c_n(1) == 26244 and c_n(2) == 8589934592
    inc_ok = True
    for n, mu, nu0, nu1 in [(1, 2, 2, 0), (1, 2, 2, 1), (2, 2, 3, 1), (1, 3, 2, 5), (2, 2, 2, 0)]:
        rho = rho_sequence(n, mu, nu0, nu1, n + 2)
        inc_ok &= all(big_gt(rho[i + 1], rho[i]) for i in range(1, len(rho) - 1))
    details = []
    K_ok = True
    for name, spec in bundled()["audits"].items():
        sys_ = system(spec["system"])
        phi = Transformation.of(sys_)
        fs = solution(spec["system"], 64)
        f = ProjPoint((PowerSeries.constant(1, 64),) + tuple(fs))
        sheet = constants_sheet(sys_.n, phi.mu, phi.nu0, phi.nu1, phi.lam, f)
        g = fredholm6() if name == "fredholm-grid-6" else audit_from_config(name)
        khat = max(v for v in g.K_hat.values() if v is not None)
        good = not big_gt(khat, sheet.K)
        K_ok &= good
        details.append(f"{name}: K_hat {float(khat):.4g} <= K {big_str(sheet.K, 12)}")
    ok = cn_ok and inc_ok and K_ok
    criterion(9, ok, f"c_1, c_2: {cn_ok}; rho increasing: {inc_ok}; " + "; ".join(details))
    assert ok


# ---------------------------------------------------------------- criterion 10

def test_criterion_10_metric_properties(criterion):
    rng = random.Random(SEED)

    def rand_point(prec=40):
        while True:
            cs = [PowerSeries([Fraction(rng.randint(-3, 3)) for _ in range(rng.randint(1, 6))], prec)
                  for _ in range(3)]
            if any(any(c.coeffs) for c in cs):
                return ProjPoint(cs)

    bad = 0
    for _ in range(50):
        x, y = rand_point(), rand_point()
        u = PowerSeries([Fraction(rng.randint(1, 3))] + [Fraction(rng.randint(-3, 3)) for _ in range(4)], 40)
        w = wedge_ord(x, y)
        bad += w != wedge_ord(y, x)
        bad += w != wedge_ord(x.scaled(u), y) or w != wedge_ord(x, y.scaled(u))
        s = wedge_ord(x, x)
        bad += s.exact or s.value != 40 - x.ord()
    lv = []
    for name, spec in bundled()["cycles"].items():
        lv.append(liouville_check(parse_zform(spec["Q"], spec["n"]), load_cycle(spec)).holds)
    ok = bad == 0 and all(lv)
    criterion(10, ok, f"50 pairs, {bad} property failures; Liouville fixtures passing "
                      f"{sum(lv)}/{len(lv)}")
    assert ok
