"""Linear Mahler systems: the matrix T_z over k(z), the constant C3, the
stability bound, and verification of T-stable varieties."""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from .bipoly import BiPoly, distinguished_point
from .exactnum import DomainError
from .idealkit import (IdealHandle, ord_upper_bound, rank, saturate_ideal)
from .systems import MahlerSystem


# ---------------------------------------------------------------- k[z] helpers
# Polynomials are coefficient lists, lowest degree first, no trailing zeros.

def _trim(p):
    p = list(p)
    while p and not p[-1]:
        p.pop()
    return p


def padd(a, b):
    n = max(len(a), len(b))
    return _trim([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)])


def pneg(a):
    return [-c for c in a]


def psub(a, b):
    return padd(a, pneg(b))


def pmul(a, b):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _trim(out)


def pdivmod(a, b):
    b = _trim(b)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = _trim(a)
    q = [0] * max(len(a) - len(b) + 1, 0)
    r = list(a)
    lead = b[-1]
    while len(r) >= len(b) and r:
        k = len(r) - len(b)
        c = r[-1] / lead
        q[k] = c
        for i, y in enumerate(b):
            r[i + k] -= c * y
        r = _trim(r)
    return _trim(q), r


def pexact(a, b):
    q, r = pdivmod(a, b)
    if r:
        raise DomainError("inexact polynomial division")
    return q


def pgcd(a, b):
    a, b = _trim(a), _trim(b)
    while b:
        a, b = b, pdivmod(a, b)[1]
    return [c / a[-1] for c in a] if a else []


def pord(a):
    for k, c in enumerate(a):
        if c:
            return k
    raise DomainError("valuation of the zero polynomial")


def pstr(a):
    a = _trim(a)
    if not a:
        return "0"
    terms = []
    for k, c in enumerate(a):
        if c:
            m = "" if k == 0 else ("z" if k == 1 else f"z^{k}")
            terms.append(str(c) if not m else (m if c == 1 else f"-{m}" if c == -1 else f"{c}*{m}"))
    return " + ".join(terms).replace("+ -", "- ")


def bareiss_det(M):
    """Fraction-free determinant of a square matrix over k[z]."""
    n = len(M)
    if n == 0:
        return [1]
    A = [[list(x) for x in row] for row in M]
    sign = 1
    prev = [1]
    for k in range(n - 1):
        if not A[k][k]:
            for i in range(k + 1, n):
                if A[i][k]:
                    A[k], A[i] = A[i], A[k]
                    sign = -sign
                    break
            else:
                return []
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = pexact(psub(pmul(A[i][j], A[k][k]), pmul(A[i][k], A[k][j])), prev)
        prev = A[k][k]
    d = A[n - 1][n - 1]
    return pneg(d) if sign < 0 else d


# ---------------------------------------------------------------- linear systems

class LinearMahlerSystem:
    """A Mahler system whose forms are linear in X: A_i = sum_j a_ij(X') X_j."""

    def __init__(self, system):
        if not isinstance(system, MahlerSystem):
            raise DomainError("not a Mahler system")
        n = system.n
        self.system = system
        self.n = n
        self.a = [[BiPoly.zero(n, system.field) for _ in range(n + 1)] for _ in range(n + 1)]
        for i, A in enumerate(system.A):
            for e, c in A.terms.items():
                xs = e[2:]
                if sum(xs) != 1:
                    raise DomainError(f"form {i} is not linear in X")
                j = xs.index(1)
                self.a[i][j] = self.a[i][j] + BiPoly(n, {e[:2] + (0,) * (n + 1): c}, system.field)
        if system.A0p.is_zero() or system.A[0].is_zero():
            raise DomainError("first row of the system vanishes")

    @property
    def lam(self):
        return self.system.lam

    def entry_at_z(self, i, j):
        """a_ij(1, z) as a coefficient list."""
        out = {}
        for e, c in self.a[i][j].terms.items():
            out[e[1]] = out.get(e[1], 0) + c
        return _trim([out.get(k, 0) for k in range(max(out, default=-1) + 1)])


@dataclass
class TzMatrix:
    matrix: list
    det: list
    adjugate: list

    def inverse_entry(self, i, j):
        """(num, den) of the (i, j) entry of the inverse, reduced."""
        num, den = self.adjugate[i][j], self.det
        if not num:
            return [], [1]
        g = pgcd(num, den)
        num, den = pexact(num, g), pexact(den, g)
        c = den[-1]
        return [x / c for x in num], [x / c for x in den]

    def inverse_rows(self):
        return [[self.inverse_entry(i, j) for j in range(len(self.matrix))]
                for i in range(len(self.matrix))]


def _minor(M, i, j):
    return [row[:j] + row[j + 1:] for k, row in enumerate(M) if k != i]


def tz_matrix(sys):
    if isinstance(sys, MahlerSystem):
        sys = LinearMahlerSystem(sys)
    m = sys.n + 1
    M = [[sys.entry_at_z(i, j) for j in range(m)] for i in range(m)]
    det = bareiss_det(M)
    if not det:
        raise DomainError("degenerate system: determinant vanishes identically")
    adj = [[None] * m for _ in range(m)]
    for i in range(m):
        for j in range(m):
            d = bareiss_det(_minor(M, j, i)) if m > 1 else [1]
            adj[i][j] = d if (i + j) % 2 == 0 else pneg(d)
    return TzMatrix(M, det, adj)


def c3(sys):
    """ord_z det(T_z^-1) = -ord_z det T_z; may be negative."""
    return -pord(tz_matrix(sys).det)


def stability_bound(sys):
    lam = sys.lam
    if lam < 2:
        raise DomainError(f"stability bound needs ord p >= 2, got {lam}")
    return max(Fraction(2), Fraction(c3(sys), lam - 1))


# ---------------------------------------------------------------- stable varieties

@dataclass
class StableCheck:
    stable: bool
    pullback_ok: bool
    rank_ok: bool
    witness: object = None
    diagnostics: list = dc_field(default_factory=list)


def _irregular_ideals(ms):
    n, F = ms.n, ms.field
    X = lambda i: BiPoly.var(n, i, F)
    return [IdealHandle([ms.A0p, ms.A1p], n, F), IdealHandle(list(ms.A), n, F),
            IdealHandle([X(0), X(1)], n, F), IdealHandle([X(2 + i) for i in range(n + 1)], n, F)]


def check_T_stable(W, sys):
    ms = sys.system if isinstance(sys, LinearMahlerSystem) else sys
    diag = []
    if W.is_zero():
        return StableCheck(True, True, True, diagnostics=["zero ideal: whole space"])
    if not W.bigraded:
        raise DomainError("ideal is not bi-homogeneous")
    sat = W
    for J in _irregular_ideals(ms):
        sat = saturate_ideal(sat, J)
    diag.append(f"saturated basis: {', '.join(map(str, sat.basis()))}")
    witness = None
    pulled = []
    for g in W.basis():
        h = ms.pullback(g)
        pulled.append(h)
        if not sat.contains(h):
            witness = g
            diag.append(f"pullback of {g} not in the saturated ideal")
            break
    pull_ok = witness is None
    rank_ok = False
    if pull_ok:
        r0 = rank(W)
        P = IdealHandle([h for h in pulled if h], W.n, W.field)
        r1 = W.nvars if P.is_whole() else (0 if P.is_zero() else rank(P))
        rank_ok = r0 == r1
        diag.append(f"rank(W) = {r0}, rank(pullback ideal) = {r1}")
    return StableCheck(pull_ok and rank_ok, pull_ok, rank_ok, witness, diag)


@dataclass
class StabilityVerdict:
    ideal: IdealHandle
    is_T_stable: bool
    ord_upper: object
    bound: Fraction
    satisfied: bool
    status: str

    def line(self):
        gens = ", ".join(map(str, self.ideal.generators)) or "0"
        return (f"W = ({gens}): T-stable={self.is_T_stable} ord<= {self.ord_upper} "
                f"bound={self.bound} status={self.status}")


def verify_stable_ord_bound(W, sys, fs, prec=None):
    """Compare the certified ord upper bound of W at (1, z, 1, f) with the
    stability bound; fs are the solution series."""
    ms = sys.system if isinstance(sys, LinearMahlerSystem) else sys
    chk = check_T_stable(W, ms)
    if not chk.stable:
        raise DomainError("variety is not T-stable")
    bound = stability_bound(ms)
    point = distinguished_point(fs, prec)
    o = ord_upper_bound(W, point)
    if not o.exact:
        return StabilityVerdict(W, True, o, bound, False, "inconclusive at this precision")
    ok = o.value <= bound
    return StabilityVerdict(W, True, o, bound, ok, "satisfied" if ok else "violated")


def stability_report(name, sys, varieties, fs):
    lin = LinearMahlerSystem(sys)
    lines = [f"system: {name}", f"C3 = {c3(lin)}", f"lambda = {sys.lam}",
             f"bound = {stability_bound(sys)}"]
    T = tz_matrix(lin)
    lines.append("T_z = [" + "; ".join(", ".join(pstr(x) for x in row) for row in T.matrix) + "]")
    verdicts = []
    for W in varieties:
        chk = check_T_stable(W, sys)
        if not chk.stable:
            gens = ", ".join(map(str, W.generators))
            lines.append(f"W = ({gens}): not T-stable; " + "; ".join(chk.diagnostics))
            continue
        v = verify_stable_ord_bound(W, sys, fs)
        verdicts.append(v)
        lines.append(v.line())
    return lines, verdicts
