"""Auxiliary polynomials, exact extremal vanishing orders E(M, N), audits of
the bound shapes over a grid, and the constants calculator."""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from math import comb, factorial, gcd

from .bipoly import BiPoly, monomials_of_bidegree, ord_at
from .exactnum import (QQ, AtLeast, DomainError, Exact, PrecisionError, big_gt,
                       big_add_small, big_max, big_mul, big_pow, big_str, kernel)
from .idealkit import nu_constant, rho_sequence
from .projgeo import c_iso, c_n

CSV_COLUMNS = ["M", "N", "dim", "E", "E_status", "lb_pigeonhole", "lb_floor",
               "rhs_mixed", "rhs_product", "ratio_mixed", "ratio_product"]

WARN_ATLEAST = "possible algebraic relation or insufficient precision"


# ---------------------------------------------------------------- evaluation

def monomial_values(point, M, N, prec):
    """Series of every monomial of bidegree (M, N) at the point, truncated to prec."""
    n = len(point) - 3
    pt = [s.truncate(prec) if s.prec > prec else s for s in point]
    if min(s.prec for s in pt) < prec:
        raise PrecisionError(f"point known to precision {min(s.prec for s in pt)} < {prec}")
    monos = monomials_of_bidegree(n, M, N)
    memo = {(0,) * (n + 3): None}

    def val(e):
        if e in memo:
            return memo[e]
        i = next(k for k, x in enumerate(e) if x)
        prev = e[:i] + (e[i] - 1,) + e[i + 1:]
        pv = val(prev)
        v = pt[i] if pv is None else pv * pt[i]
        memo[e] = v
        return v

    out = []
    for e in monos:
        v = val(e)
        if v is None:
            v = type(pt[0]).constant(1, prec, pt[0].field)
        out.append(v)
    return monos, out


def dimension(n, M, N):
    return (M + 1) * comb(N + n, n)


def pigeonhole_bound(n, M, N):
    return dimension(n, M, N) - 1


def floor_bound(n, M, N):
    return (M + 1) * (N + 1) ** n // factorial(n)


# ---------------------------------------------------------------- extremal order

def _int_row(coeffs):
    den = 1
    for c in coeffs:
        den = den * c.denominator // gcd(den, c.denominator)
    return [int(c * den) for c in coeffs]


def _first_nz(v):
    for k, c in enumerate(v):
        if c:
            return k
    return None


def _reduce_ff(basis, v):
    """Reduce an integer vector against a valuation basis {ord: vector},
    fraction-free; returns the reduced vector or None if it vanishes."""
    k = _first_nz(v)
    while k is not None and k in basis:
        u = basis[k]
        a, b = u[k], v[k]
        g = gcd(a, b)
        a, b = a // g, b // g
        v = [a * x - b * y for x, y in zip(v, u)]
        c = 0
        for x in v:
            if x:
                c = gcd(c, x)
                if c == 1:
                    break
        if c > 1:
            v = [x // c for x in v]
        k = _first_nz(v)
    return v if k is not None else None


def _reduce_field(basis, v):
    k = _first_nz(v)
    while k is not None and k in basis:
        u = basis[k]
        f = v[k] / u[k]
        v = [x - f * y for x, y in zip(v, u)]
        k = _first_nz(v)
    return v if k is not None else None


def extremal_order(point, M, N, prec):
    """max over nonzero P of bidegree (M, N) of ord_z P(point).

    A valuation basis of the span of the monomial values is built by exact
    elimination; E is its largest valuation. A dependency within the known
    precision gives AtLeast(prec)."""
    if M < 0 or N < 0:
        raise DomainError("negative bidegree")
    if prec < 1:
        raise PrecisionError("precision must be positive")
    _, vals = monomial_values(point, M, N, prec)
    field = point[0].field
    basis = {}
    if field.char == 0:
        rows = [_int_row(v.coeffs) for v in vals]
        red = _reduce_ff
    else:
        rows = [list(v.coeffs) for v in vals]
        red = _reduce_field
    for r in rows:
        v = red(basis, r)
        if v is None:
            return AtLeast(prec)
        basis[_first_nz(v)] = v
    return Exact(max(basis))


def extremal_order_rowrank(point, M, N, prec):
    """Independent route: the first T at which the T x dim coefficient
    matrix reaches full column rank, by incremental row echelon form."""
    _, vals = monomial_values(point, M, N, prec)
    dim = len(vals)
    field = point[0].field
    echelon = {}  # pivot column -> row
    rank = 0
    for t in range(prec):
        row = [field(v.coeffs[t]) for v in vals]
        for col in sorted(echelon):
            if row[col]:
                f = row[col] / echelon[col][col]
                row = [x - f * y for x, y in zip(row, echelon[col])]
        piv = _first_nz(row)
        if piv is not None:
            echelon[piv] = row
            rank += 1
            if rank == dim:
                return Exact(t)
    return AtLeast(prec)


# ---------------------------------------------------------------- auxiliary polynomial

def construct_aux(point, a, b, prec=None):
    """Nonzero Q of bidegree (a, b) with ord Q(point) >= dim - 1.

    Q is the first vector of the reduced-echelon kernel basis of the
    (dim - 1) x dim system, scaled so its first nonzero coordinate is 1."""
    n = len(point) - 3
    dim = dimension(n, a, b)
    if prec is None:
        prec = min(s.prec for s in point)
    if prec <= dim:
        raise PrecisionError(f"precision {prec} must exceed the dimension {dim}")
    field = point[0].field
    T = dim - 1
    monos, vals = monomial_values(point, a, b, prec)
    rows = [[v.coeffs[t] for v in vals] for t in range(T)]
    K = kernel(rows, dim, field) if rows else [[field.one if j == 0 else field.zero
                                                 for j in range(dim)]]
    v = K[0]
    lead = next(c for c in v if c)
    Q = BiPoly(n, {m: c / lead for m, c in zip(monos, v) if c}, field)
    o = ord_at(Q, tuple(s.truncate(prec) for s in point))
    if o.value < T:
        raise AssertionError(f"auxiliary polynomial self-check failed: {o} < {T}")
    return Q


# ---------------------------------------------------------------- bound shapes

def _common_base(xs):
    """(g, [e_i]) with x_i = g^e_i for integers x_i >= 1, or None."""
    xs = [int(x) for x in xs]
    big = [x for x in xs if x > 1]
    if not big:
        return 2, [0] * len(xs)
    m = min(big)
    for g in range(2, m + 1):
        exps = []
        for x in xs:
            e = 0
            while x > 1 and x % g == 0:
                x //= g
                e += 1
            if x != 1:
                break
            exps.append(e)
        else:
            return g, exps
    return None


def _rpow(N, r):
    """N^r for rational r: exact when possible, else a float."""
    N = Fraction(N)
    r = Fraction(r)
    if r.denominator == 1:
        return N ** r.numerator if r >= 0 else 1 / N ** -r.numerator
    q = r.denominator
    for part in (N.numerator, N.denominator):
        root = round(part ** (1 / q))
        if not any((root + d) ** q == part for d in (-1, 0, 1)):
            return float(N) ** float(r)
    num = next(x for x in (round(N.numerator ** (1 / q)) + d for d in (-1, 0, 1)) if x ** q == N.numerator)
    den = next(x for x in (round(N.denominator ** (1 / q)) + d for d in (-1, 0, 1)) if x ** q == N.denominator)
    return Fraction(num, den) ** r.numerator


def _log_exponent(n, d, delta, t):
    """n log d / (log delta - n log t), rational when d, delta, t share a base."""
    if Fraction(t) ** n >= delta:
        raise DomainError("need t^n < delta")
    cb = _common_base([d, delta, t])
    if cb is not None:
        g, (ed, edl, et) = cb
        return Fraction(n * ed, edl - n * et)
    return n * math.log(d) / (math.log(delta) - n * math.log(t))


def bound_rhs(kind, M, N, params):
    """Right-hand side of a bound shape at deg_X' = M, deg_X = N.

    mixed: K1 (M + N + 1)(N + 1)^n      product: K1 (M + 1)(N + 1)^n
    optimal: c0 (M + 1)(N + 1)^n
    power-d: c0 M N^(n log d / (log d - n log t))
    power-delta: c0 M N^(n log d / (log delta - n log t))"""
    n = int(params["n"])
    K1 = Fraction(str(params.get("K1", 1)))
    if kind == "mixed":
        return K1 * (M + N + 1) * (N + 1) ** n
    if kind == "product":
        return K1 * (M + 1) * (N + 1) ** n
    if kind == "optimal":
        return Fraction(str(params.get("c0", 1))) * (M + 1) * (N + 1) ** n
    if kind in ("power-d", "power-delta"):
        c0 = Fraction(str(params.get("c0", 1)))
        d, t = int(params["d"]), int(params["t"])
        delta = d if kind == "power-d" else int(params["delta"])
        ex = _log_exponent(n, d, delta, t)
        if isinstance(ex, float):
            return float(c0) * M * N ** ex
        p = _rpow(N, ex)
        return c0 * M * p if not isinstance(p, float) else float(c0) * M * p
    raise DomainError(f"unknown bound kind {kind!r}")


# ---------------------------------------------------------------- audit grid

@dataclass
class Cell:
    M: int
    N: int
    dim: int
    E: object
    lb_pigeonhole: int
    lb_floor: int
    rhs: dict

    @property
    def exact(self):
        return self.E.exact

    def ratio(self, kind):
        r = self.rhs[kind]
        if not self.exact or not r:
            return None
        return Fraction(self.E.value) / r if not isinstance(r, float) else self.E.value / r


@dataclass
class AuditGrid:
    name: str
    n: int
    prec: int
    cells: list
    bounds: list
    K_hat: dict = dc_field(default_factory=dict)
    slopes: dict = dc_field(default_factory=dict)
    slopes_logN: dict = dc_field(default_factory=dict)
    inconclusive: int = 0
    pigeonhole_violations: int = 0
    floor_shortfalls: int = 0
    monotonicity_violations: int = 0

    def cell(self, M, N):
        for c in self.cells:
            if (c.M, c.N) == (M, N):
                return c
        raise KeyError((M, N))

    @property
    def violations(self):
        return self.pigeonhole_violations + self.floor_shortfalls + self.monotonicity_violations

    def csv_text(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for c in self.cells:
            w.writerow([c.M, c.N, c.dim, c.E.value, "exact" if c.exact else "atleast",
                        c.lb_pigeonhole, c.lb_floor, _fmt(c.rhs["mixed"]),
                        _fmt(c.rhs["product"]), _fmt(c.ratio("mixed")),
                        _fmt(c.ratio("product"))])
        return buf.getvalue()

    def summary(self):
        lines = [f"audit {self.name}: n={self.n} prec={self.prec} cells={len(self.cells)}"]
        for k, v in self.K_hat.items():
            lines.append(f"K_hat[{k}] = {_fmt(v)}")
        for M in sorted(self.slopes):
            lines.append(f"slope log E vs log(N+1) at M={M}: {self.slopes[M]:.6f}"
                         f" (vs log N: {_fmt6(self.slopes_logN.get(M))})")
        lines.append(f"inconclusive cells: {self.inconclusive}")
        lines.append(f"pigeonhole violations: {self.pigeonhole_violations}")
        lines.append(f"floor-bound shortfalls: {self.floor_shortfalls}")
        lines.append(f"monotonicity violations: {self.monotonicity_violations}")
        lines.append(f"invariant violations: {self.violations}")
        return lines


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.12g}"
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{float(x):.12g}"


def _fmt6(x):
    return "n/a" if x is None else f"{x:.6f}"


def least_squares_slope(xs, ys):
    n = len(xs)
    if n < 2:
        return None
    mx, my = sum(xs) / n, sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    if sxx == 0:
        return None
    return sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / sxx


def run_audit(point, n, M_max, N_max, prec, bounds=("mixed", "product"),
              params=None, threads=1, name="audit", fit_M=None):
    if M_max < 0 or N_max < 0:
        raise DomainError("empty grid range")
    params = dict(params or {})
    params["n"] = n
    kinds = list(dict.fromkeys(["mixed", "product"] + list(bounds)))
    coords = [(M, N) for M in range(M_max + 1) for N in range(N_max + 1)]

    def work(mn):
        M, N = mn
        E = extremal_order(point, M, N, prec)
        rhs = {k: bound_rhs(k, M, N, params) for k in kinds}
        return Cell(M, N, dimension(n, M, N), E, pigeonhole_bound(n, M, N),
                    floor_bound(n, M, N), rhs)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            cells = list(ex.map(work, coords))
    else:
        cells = [work(c) for c in coords]
    g = AuditGrid(name, n, prec, cells, kinds)
    table = {(c.M, c.N): c for c in cells}
    for c in cells:
        if not c.exact:
            g.inconclusive += 1
            continue
        if c.E.value < c.lb_pigeonhole:
            g.pigeonhole_violations += 1
        if c.E.value < c.lb_floor:
            g.floor_shortfalls += 1
        for nb in ((c.M - 1, c.N), (c.M, c.N - 1)):
            o = table.get(nb)
            if o is not None and o.exact and o.E.value > c.E.value:
                g.monotonicity_violations += 1
    for k in kinds:
        rs = [c.ratio(k) for c in cells if c.exact and c.ratio(k) is not None]
        g.K_hat[k] = max(rs) if rs else None
    for M in ([fit_M] if fit_M is not None else range(M_max + 1)):
        row = [table[(M, N)] for N in range(N_max + 1) if table[(M, N)].exact]
        pts = [(c.N, c.E.value) for c in row if c.E.value > 0]
        s = least_squares_slope([math.log(N + 1) for N, _ in pts], [math.log(E) for _, E in pts])
        if s is not None:
            g.slopes[M] = s
        pts1 = [(N, E) for N, E in pts if N >= 1]
        s1 = least_squares_slope([math.log(N) for N, _ in pts1], [math.log(E) for _, E in pts1])
        if s1 is not None:
            g.slopes_logN[M] = s1
    return g


# ---------------------------------------------------------------- constants

@dataclass
class ConstantsSheet:
    n: int
    mu: Fraction
    nu0: Fraction
    nu1: Fraction
    lam: Fraction
    c_n: int
    nu: Fraction
    rho: list
    C_iso: object
    C: object
    K: object
    K0: Fraction
    C0: Fraction
    C1: Fraction

    def lines(self):
        out = [f"n = {self.n}", f"mu = {self.mu}, nu0 = {self.nu0}, nu1 = {self.nu1}, lambda = {self.lam}",
               f"c_{self.n} = {big_str(self.c_n)}", f"nu = {big_str(self.nu)}"]
        out += [f"rho_{i} = {big_str(r)}" for i, r in enumerate(self.rho)]
        out.append(f"C_iso = {'n/a (no point supplied)' if self.C_iso is None else big_str(self.C_iso)}")
        out.append(f"K0 = {self.K0}, C0 = {self.C0}, C1 = {self.C1}")
        out.append(f"C = {big_str(self.C)}")
        out.append(f"K = {big_str(self.K)}")
        return out


def constants_sheet(n, mu, nu0, nu1, lam, point=None, K0=1, C0=0, C1=0):
    """c_n, nu, rho_0..rho_{n+2}, C_iso, and the theoretical C and K.
    point, when given, is a ProjPoint in P^n used for C_iso."""
    if n < 1:
        raise DomainError("n must be at least 1")
    mu, nu0, nu1, lam = map(lambda x: Fraction(str(x)), (mu, nu0, nu1, lam))
    K0, C0, C1 = map(lambda x: Fraction(str(x)), (K0, C0, C1))
    cn = c_n(n)
    nu = nu_constant(n, nu0, nu1)
    rho = rho_sequence(n, mu, nu0, nu1, n + 2)
    ciso = c_iso(point, mu, nu0) if point is not None else None
    m = min(nu0, mu)
    if m <= 0:
        raise DomainError("min(nu0, mu) must be positive")
    terms = [Fraction(cn) ** (n - 1) * C0 ** n, 1 / m ** n, C1,
             big_pow(big_mul(big_pow(rho[n], n),
                             factorial(n) * cn * (1 + nu1 / max(mu, nu0)) * K0), n)]
    if ciso is not None:
        terms.append(ciso)
    # for symbolic C the +1 is folded into the coefficient (an upper bound)
    C = big_add_small(big_max(*terms), 1)
    K = big_max(big_mul(C, 2 * n),
                big_pow(big_mul(rho[n + 1], Fraction(2 * cn) / (max(1, lam) * max(1, mu))), n))
    return ConstantsSheet(n, mu, nu0, nu1, lam, cn, nu, rho, ciso, C, K, K0, C0, C1)


def m_cap(n, nu, rho_i):
    return big_mul(big_pow(rho_i, n + 1), Fraction(nu) * factorial(n + 1))


def m_cap_check(i, n, nu, rho_i, declared_m):
    return not big_gt(declared_m, m_cap(n, nu, rho_i))
