import copy
import itertools
import random
from fractions import Fraction

import pytest

from multlab import stabledyn
from multlab.bipoly import parse_bipoly, random_bihomogeneous
from multlab.exactnum import DomainError
from multlab.idealkit import IdealHandle
from multlab.stabledyn import (LinearMahlerSystem, c3, check_T_stable, padd, pmul, stability_bound,
                               stability_report, tz_matrix, verify_stable_ord_bound)
from multlab.systems import MahlerSystem, load_system

from conftest import SEED, solution, system


def mahler(A, A0p="X0'^2", A1p="X1'^2", n=1):
    return load_system({"kind": "mahler", "n": n, "A0p": A0p, "A1p": A1p, "A": A,
                        "initial": [0] * n})


IDENTITY = ["X0'*X0", "X0'*X1"]


def ideal(*gens):
    return IdealHandle([parse_bipoly(g, 1) for g in gens], 1)


def rat_mul(a, b):
    return pmul(a[0], b[0]), pmul(a[1], b[1])


def rat_add(a, b):
    return padd(pmul(a[0], b[1]), pmul(b[0], a[1])), pmul(a[1], b[1])


def assert_inverse(T):
    m = len(T.matrix)
    inv = T.inverse_rows()
    for i in range(m):
        for j in range(m):
            acc = ([], [1])
            for k in range(m):
                acc = rat_add(acc, rat_mul(inv[i][k], (T.matrix[k][j], [1])))
            num, den = acc
            if i == j:
                assert num == den or [x / num[-1] for x in num] == [x / den[-1] for x in den]
            else:
                assert num == []


def random_linear_system(rng, n):
    while True:
        A = [random_bihomogeneous(rng, n, 1, 1) for _ in range(n + 1)]
        if not A[0]:
            continue
        try:
            sys_ = MahlerSystem(n, parse_bipoly("X0'^2", n), parse_bipoly("X1'^2", n), A, [0] * n)
            tz_matrix(sys_)
            return sys_
        except DomainError:
            continue


def test_fredholm_matrix_and_inverse():
    T = tz_matrix(system("fredholm"))
    assert T.matrix == [[[1], []], [[0, -1], [1]]]
    assert T.det == [1]
    inv = T.inverse_rows()
    assert [[e[0] for e in row] for row in inv] == [[[1], []], [[0, 1], [1]]]
    assert all(e[1] == [1] for row in inv for e in row)


def test_identity_system():
    T = tz_matrix(mahler(IDENTITY))
    assert T.matrix == [[[1], []], [[], [1]]]
    assert c3(mahler(IDENTITY)) == 0


def test_degenerate_system():
    with pytest.raises(DomainError, match="degenerate"):
        tz_matrix(mahler(["X0'*X0 + X0'*X1", "X0'*X0 + X0'*X1"]))


def test_c3_examples():
    assert c3(system("fredholm")) == 0
    assert c3(system("diag")) == -1


def test_stability_bound_examples(monkeypatch):
    assert stability_bound(system("fredholm")) == 2

    class Stub:
        lam = 3
    monkeypatch.setattr(stabledyn, "c3", lambda s: 6)
    assert stability_bound(Stub()) == 3
    Stub.lam = 1
    with pytest.raises(DomainError):
        stability_bound(Stub())


def test_not_linear_rejected():
    with pytest.raises(DomainError):
        LinearMahlerSystem(mahler(["X0'*X0^2", "X0'*X1^2"]))


def test_inverse_times_matrix_is_identity():
    rng = random.Random(SEED)
    for name in ("fredholm", "diag", "thue-morse", "fredholm2"):
        assert_inverse(tz_matrix(system(name)))
    for _ in range(10):
        assert_inverse(tz_matrix(random_linear_system(rng, rng.choice([1, 2]))))


def test_c3_permutation_invariant():
    rng = random.Random(SEED)
    for _ in range(5):
        lin = LinearMahlerSystem(random_linear_system(rng, 2))
        base = c3(lin)
        for rp, cp in itertools.product(itertools.permutations(range(3)), repeat=2):
            other = copy.copy(lin)
            other.a = [[lin.a[rp[i]][cp[j]] for j in range(3)] for i in range(3)]
            assert c3(other) == base


def test_check_T_stable_examples():
    fr = system("fredholm")
    assert check_T_stable(ideal("X0"), fr).stable
    chk = check_T_stable(ideal("X1'*X0 - X0'*X1"), fr)
    assert not chk.stable and chk.witness is not None
    assert check_T_stable(IdealHandle([], 1), fr).stable


def test_verify_examples():
    fr = system("fredholm")
    fs = solution("fredholm", 64)
    v = verify_stable_ord_bound(ideal("X0"), fr, fs)
    assert v.ord_upper.exact and v.ord_upper.value == 0 and v.satisfied and v.bound == 2
    v = verify_stable_ord_bound(ideal("X1'"), fr, fs)
    assert v.ord_upper.exact and v.ord_upper.value == 1 and v.satisfied
    v = verify_stable_ord_bound(ideal("X1'"), fr, fs, prec=1)
    assert not v.ord_upper.exact and v.status == "inconclusive at this precision"
    with pytest.raises(DomainError):
        verify_stable_ord_bound(ideal("X1"), fr, fs)


def test_stable_fixtures_never_violated():
    for name in ("fredholm", "thue-morse"):
        sys_ = system(name)
        fs = solution(name, 64)
        W = [ideal("X0"), ideal("X1"), ideal("X1'"), ideal("X1'*X0 - X0'*X1"), ideal("X0'")]
        lines, verdicts = stability_report(name, sys_, W, fs)
        for v in verdicts:
            assert v.is_T_stable and v.status != "violated"
        assert lines[0] == f"system: {name}"
