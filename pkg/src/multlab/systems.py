"""Differential and Mahler systems, their solvers, and the induced
transformations (derivation D, pullback T*) on bigraded polynomials."""
from __future__ import annotations

import random
from fractions import Fraction

from .bipoly import (AffinePoly, BiPoly, bihomogenize, distinguished_point,
                     evaluate, ord_at, parse_affine, parse_bipoly, parse_zpoly,
                     random_bihomogeneous)
from .exactnum import (QQ, AtLeast, DomainError, Field, PowerSeries, ps_ord,
                       series_from_ratfunc)


class GrowthViolation(DomainError):
    pass


def _solve_linear(L, rhs, field):
    """Solve L u = rhs exactly; None if L is singular."""
    n = len(L)
    M = [list(row) + [r] for row, r in zip(L, rhs)]
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r][c]), None)
        if piv is None:
            return None
        M[c], M[piv] = M[piv], M[c]
        inv = field.one / M[c][c]
        M[c] = [x * inv for x in M[c]]
        for r in range(n):
            if r != c and M[r][c]:
                f = M[r][c]
                M[r] = [a - f * b for a, b in zip(M[r], M[c])]
    return [M[r][n] for r in range(n)]


class _Online:
    """Coefficients of the monomials of a set of polynomials in series
    variables, extended one index at a time."""

    def __init__(self, monos, vars_, field):
        self.field = field
        self.vars = vars_  # list of growing coefficient lists
        need = set()
        for m in monos:
            m = tuple(m)
            while any(m) and m not in need:
                need.add(m)
                i = next(j for j, x in enumerate(m) if x)
                m = m[:i] + (m[i] - 1,) + m[i + 1:]
        self.order = sorted(need, key=sum)
        self.parent = {}
        for m in self.order:
            i = next(j for j, x in enumerate(m) if x)
            self.parent[m] = (i, m[:i] + (m[i] - 1,) + m[i + 1:])
        self.coef = {m: [] for m in self.order}
        self.unit = tuple(0 for _ in vars_)

    def value(self, m, k):
        if not any(m):
            return self.field.one if k == 0 else self.field.zero
        return self.coef[m][k]

    def compute(self, k):
        """Coefficient k of every monomial, from variable coefficients 0..k."""
        zero = self.field.zero
        for m in self.order:
            i, par = self.parent[m]
            v = self.vars[i]
            s = zero
            if any(par):
                pc = self.coef[par]
                for l in range(k + 1):
                    x = v[l]
                    if x:
                        y = pc[k - l]
                        if y:
                            s = s + x * y
            else:
                s = v[k]
            c = self.coef[m]
            if len(c) > k:
                c[k] = s
            else:
                c.append(s)

    def poly_coeff(self, terms, k):
        s = self.field.zero
        for e, c in terms.items():
            s = s + c * self.value(e, k)
        return s


class DifferentialSystem:
    """f_i' = A_i(z, f) / A_0(z, f), i = 1..n."""

    def __init__(self, n, A, initial, field=QQ):
        if len(A) != n + 1:
            raise DomainError("need A_0, ..., A_n")
        if A[0].is_zero():
            raise DomainError("A_0 must be nonzero")
        self.n = n
        self.field = field
        self.A = list(A)
        self.initial = tuple(field(c) for c in initial)
        if len(self.initial) != n:
            raise DomainError("need n initial values")
        # uniform homogenization so that D is a bigraded derivation
        A0, rest = self.A[0], [a for a in self.A[1:] if not a.is_zero()]
        self.shift_z = max([A0.deg_z - 1] + [a.deg_z for a in rest])
        self.shift_X = max([A0.deg_X] + [a.deg_X - 1 for a in rest])
        S, T = self.shift_z, self.shift_X
        self.H = [bihomogenize(A0, (S + 1, T))]
        for a in self.A[1:]:
            self.H.append(BiPoly.zero(n, field) if a.is_zero() else bihomogenize(a, (S, T + 1)))

    @property
    def coefficient_bidegree(self):
        """Componentwise max bidegree of the homogenized coefficients."""
        return (self.shift_z + 1, self.shift_X + 1)

    def derive(self, P):
        """A_0 dP/dz + sum A_i dP/dX_i on k[z][X1..Xn]."""
        out = self.A[0] * P.diff(0)
        for i in range(1, self.n + 1):
            out = out + self.A[i] * P.diff(i)
        return out

    def apply_h(self, Q):
        """The bigraded operator H_0 d/dX1' + sum H_i d/dX_i."""
        out = self.H[0] * Q.diff(1)
        for i in range(1, self.n + 1):
            out = out + self.H[i] * Q.diff(i + 2)
        return out

    def solve(self, prec):
        return solve_ode(self, prec)


class MahlerSystem:
    """A_0(f~) f_i(p(z)) = A_i(f~), p = A1'(1,z)/A0'(1,z)."""

    def __init__(self, n, A0p, A1p, A, initial, field=QQ):
        if len(A) != n + 1:
            raise DomainError("need A_0, ..., A_n")
        self.n = n
        self.field = field
        for q in (A0p, A1p):
            if any(e[2:] != (0,) * (n + 1) for e in q.terms):
                raise DomainError("A0', A1' must only involve X0', X1'")
        if A0p.is_zero():
            raise DomainError("A0' must be nonzero")
        degs = {q.bidegree[0] for q in (A0p, A1p) if not q.is_zero()}
        if len(degs) != 1 or not A0p.is_bihomogeneous() or not A1p.is_bihomogeneous():
            raise DomainError("A0', A1' must be forms of one degree r")
        self.r = degs.pop()
        if A[0].is_zero():
            raise DomainError("A_0 must be nonzero")
        bd = {a.bidegree for a in A if not a.is_zero()}
        if len(bd) != 1 or not all(a.is_bihomogeneous() for a in A):
            raise DomainError("A_0..A_n must be bi-homogeneous of a common bidegree")
        self.s, self.t = bd.pop()
        self.A0p, self.A1p = A0p, A1p
        self.A = list(A)
        self.initial = tuple(field(c) for c in initial)
        if len(self.initial) != n:
            raise DomainError("need n initial values")
        self.p_num = _dehom_prime(A1p, field)
        self.p_den = _dehom_prime(A0p, field)
        if not self.p_den[0]:
            raise DomainError("p has a pole at z = 0")
        self.degree = max(len(_strip(self.p_num)), len(_strip(self.p_den))) - 1
        ps = self.p_series(max(2 * len(self.p_num) + 2, 8))
        o = ps_ord(ps)
        self.lam = o.value if o.exact else None

    def p_series(self, prec):
        return series_from_ratfunc(self.p_num, self.p_den, prec, self.field)

    def pullback(self, Q):
        imgs = [self.A0p, self.A1p] + self.A
        return Q.subs(imgs)

    def solve(self, prec, seed=None):
        return solve_mahler(self, seed, prec)


def _strip(cs):
    cs = list(cs)
    while len(cs) > 1 and not cs[-1]:
        cs.pop()
    return cs


def _dehom_prime(q, field):
    """Coefficient list of q(1, z) for q in X0', X1'."""
    deg = max((e[1] for e in q.terms), default=0)
    out = [field.zero] * (deg + 1)
    for e, c in q.terms.items():
        out[e[1]] = out[e[1]] + c
    return out


# ---------------------------------------------------------------- solvers

def solve_ode(sys, prec):
    """Series solution with the given constant terms, exact to prec."""
    F = sys.field
    n = sys.n
    if prec < 1:
        raise DomainError("precision must be positive")
    zc = [F.zero, F.one] + [F.zero] * prec
    fs = [[c] for c in sys.initial]
    online = _Online([e for a in sys.A for e in a.terms], [zc] + fs, F)
    online.compute(0)
    A0c = [online.poly_coeff(sys.A[0].terms, 0)]
    if not A0c[0]:
        raise DomainError("singular initial point: A_0(0, f(0)) = 0")
    for k in range(prec - 1):
        if k > 0:
            online.compute(k)
            A0c.append(online.poly_coeff(sys.A[0].terms, k))
        den = F(k + 1)
        if not den:
            raise DomainError(f"characteristic obstruction at index {k + 1}")
        new = []
        for i in range(n):
            s = online.poly_coeff(sys.A[i + 1].terms, k)
            fi = fs[i]
            for l in range(1, k + 1):
                if A0c[l]:
                    s = s - A0c[l] * F(k - l + 1) * fi[k - l + 1]
            new.append(s / (den * A0c[0]))
        for i in range(n):
            fs[i].append(new[i])
    return tuple(PowerSeries(f, prec, F) for f in fs)


def ode_residuals(sys, fs):
    """ord of A_0(z, f) f_i' - A_i(z, f) for each i."""
    prec = min(f.prec for f in fs)
    z = PowerSeries.variable(prec, sys.field)
    a0 = sys.A[0].evaluate(z, fs)
    out = []
    for i in range(sys.n):
        r = a0 * fs[i].derivative() - sys.A[i + 1].evaluate(z, fs)
        out.append(ps_ord(r))
    return out


def solve_mahler(sys, seed, prec):
    """Series solution of a Mahler system, coefficient by coefficient.

    Coefficient k of f~ enters the right-hand side linearly through the
    X-Jacobian at (0, f(0)); f(p(z)) only needs coefficients below k/lambda.
    seed: optional list of initial coefficient segments, one per f_i."""
    F = sys.field
    n = sys.n
    if sys.lam is None or sys.lam < 2:
        raise DomainError("solver needs ord p >= 2")
    if prec < 1:
        raise DomainError("precision must be positive")
    if seed is None:
        seed = [[c] for c in sys.initial]
    seed = [[F(c) for c in s] for s in seed]
    if len(seed) != n or any(len(s) == 0 for s in seed):
        raise DomainError("seed must give at least f_i(0) for every i")
    if any(s[0] != c for s, c in zip(seed, sys.initial)):
        raise DomainError("seed disagrees with the initial values")
    lam = sys.lam
    p = sys.p_series(prec)
    ppow = [PowerSeries.constant(1, prec, F)]
    for _ in range(1, (prec - 1) // lam + 1):
        ppow.append(ppow[-1] * p)
    one = [F.one] + [F.zero] * prec
    zc = [F.zero, F.one] + [F.zero] * prec
    fs = [[s[0]] for s in seed]
    online = _Online([e for a in sys.A for e in a.terms], [one, zc, one] + fs, F)
    comp = [[F.zero] * prec for _ in range(n)]  # f_i(p(z))

    def absorb(j):
        pj = ppow[j].coeffs if j < len(ppow) else None
        if pj is None:
            return
        for i in range(n):
            c = fs[i][j]
            if c:
                row = comp[i]
                for idx in range(j * lam, prec):
                    v = pj[idx]
                    if v:
                        row[idx] = row[idx] + c * v

    absorb(0)
    online.compute(0)
    A0c = [online.poly_coeff(sys.A[0].terms, 0)]
    for i in range(n):
        lhs = A0c[0] * comp[i][0]
        if lhs != online.poly_coeff(sys.A[i + 1].terms, 0):
            raise DomainError("initial values do not satisfy the functional equation")
    # Jacobian of A_i in X_j at z = 0
    pt0 = [F.one, F.zero, F.one] + [f[0] for f in fs]
    J = [[_eval_at_consts(a.diff(j + 3), pt0) for j in range(n)] for a in sys.A]
    L = [[sys.initial[i] * J[0][j] - J[i + 1][j] for j in range(n)] for i in range(n)]

    for k in range(1, prec):
        seeded = all(len(s) > k for s in seed)
        for i in range(n):
            fs[i].append(F.zero)
        online.compute(k)
        known0 = online.poly_coeff(sys.A[0].terms, k)
        rhs = []
        for i in range(n):
            s = online.poly_coeff(sys.A[i + 1].terms, k) - sys.initial[i] * known0
            for l in range(k):
                if A0c[l]:
                    s = s - A0c[l] * comp[i][k - l]
            rhs.append(s)
        if seeded:
            u = [seed[i][k] for i in range(n)]
            for i in range(n):
                got = sum((L[i][j] * u[j] for j in range(n)), F.zero)
                if got != rhs[i]:
                    raise DomainError(f"seed inconsistent at index {k}")
        else:
            u = _solve_linear(L, rhs, F)
            if u is None:
                raise DomainError("linear part singular at z = 0; seed insufficient")
        for i in range(n):
            fs[i][k] = u[i]
        online.compute(k)
        A0c.append(online.poly_coeff(sys.A[0].terms, k))
        absorb(k)
    return tuple(PowerSeries(f, prec, F) for f in fs)


def _eval_at_consts(P, vals):
    s = P.field.zero
    for e, c in P.terms.items():
        t = c
        for v, k in zip(vals, e):
            if k:
                t = t * v ** k
        s = s + t
    return s


def mahler_residuals(sys, fs):
    """ord of A_0(f~) f_i(p(z)) - A_i(f~) for each i."""
    prec = min(f.prec for f in fs)
    pt = distinguished_point(fs, prec, sys.field)
    p = sys.p_series(prec)
    a0 = evaluate(sys.A[0], pt)
    out = []
    for i in range(sys.n):
        r = a0 * fs[i].compose(p) - evaluate(sys.A[i + 1], pt)
        out.append(ps_ord(r))
    return out


# ---------------------------------------------------------------- transformations

class Transformation:
    """phi = D (kind 'differential') or T* (kind 'morphism') with growth
    parameters mu, nu0, nu1 and order parameters lam, K_lambda."""

    def __init__(self, kind, system, mu=None, nu0=None, nu1=None, lam=None,
                 K_lambda=1, override=None, check_growth=None):
        if kind not in ("differential", "morphism"):
            raise DomainError(f"unknown transformation kind {kind}")
        self.kind = kind
        self.system = system
        if kind == "morphism":
            dmu, dnu0, dnu1 = system.t, system.r, system.s
            dlam = system.lam
        else:
            s, t = system.coefficient_bidegree
            dmu, dnu0, dnu1 = max(1, t), max(1, s), s
            dlam = 0
        self.mu = Fraction(dmu if mu is None else mu)
        self.nu0 = Fraction(dnu0 if nu0 is None else nu0)
        self.nu1 = Fraction(dnu1 if nu1 is None else nu1)
        self.lam = Fraction(dlam if lam is None else lam)
        self.K_lambda = Fraction(K_lambda)
        self.override = override
        if check_growth is None:
            # a nonzero shift breaks any linear bound at bidegree (0, 0)
            check_growth = kind == "morphism" or (system.shift_z, system.shift_X) == (0, 0)
        self.check_growth = check_growth
        self.n = system.n

    @classmethod
    def of(cls, system, **kw):
        kind = "morphism" if isinstance(system, MahlerSystem) else "differential"
        return cls(kind, system, **kw)

    def raw(self, Q):
        if self.override is not None:
            return self.override(Q)
        if self.kind == "morphism":
            return self.system.pullback(Q)
        return self.system.apply_h(Q)

    @property
    def growth(self):
        return (self.mu, self.nu0, self.nu1)


def apply(phi, Q):
    R = phi.raw(Q)
    if phi.check_growth and not R.is_zero() and not Q.is_zero():
        a, b = Q.bidegree
        ra, rb = R.bidegree
        if rb > phi.mu * b or ra > phi.nu0 * a + phi.nu1 * b:
            raise GrowthViolation(
                f"bidegree {Q.bidegree} -> {R.bidegree} exceeds growth "
                f"(mu, nu0, nu1) = ({phi.mu}, {phi.nu0}, {phi.nu1})")
    return R


def iterate(phi, Q, N):
    if N < 0:
        raise DomainError("N must be non-negative")
    R = Q
    for _ in range(N):
        R = apply(phi, R)
        if R.is_zero():
            break
    if phi.check_growth and not R.is_zero() and not Q.is_zero():
        a, b = Q.bidegree
        mu, nu0, nu1 = phi.growth
        ra, rb = R.bidegree
        geo = sum(nu0 ** (N - i - 1) * mu ** i for i in range(N))
        if rb > mu ** N * b or ra > nu0 ** N * a + nu1 * geo * b:
            raise GrowthViolation(f"iterate bound violated at N = {N}")
    return R


def estimate_lambda(phi, point, samples):
    """min over admissible samples of ord phi(Q)(f~) / ord Q(f~).

    A sample is admissible when ord Q(f~) is exact, positive and at least
    K_lambda; an inexact ord phi(Q)(f~) contributes its certified bound."""
    best = None
    used = 0
    for Q in samples:
        o = ord_at(Q, point)
        if not o.exact or o.value < 1 or o.value < phi.K_lambda:
            continue
        R = apply(phi, Q)
        r = AtLeast(point[0].prec) if R.is_zero() else ord_at(R, point)
        ratio = Fraction(r.value, o.value)
        used += 1
        best = ratio if best is None else min(best, ratio)
    if best is None:
        raise DomainError("no admissible samples")
    return best


def check_correctness_axioms(phi, trials, seed, max_degree=(2, 2)):
    """Leibniz rule (derivations) or multiplicativity (morphisms) on seeded
    random pairs; failures are listed, not raised."""
    failures = []
    for t in range(trials):
        rng = random.Random(f"{seed}:{t}")
        x = random_bihomogeneous(rng, phi.n, rng.randint(0, max_degree[0]),
                                 rng.randint(0, max_degree[1]), phi.system.field)
        a = random_bihomogeneous(rng, phi.n, rng.randint(0, max_degree[0]),
                                 rng.randint(0, max_degree[1]), phi.system.field)
        lhs = apply(phi, x * a)
        if phi.kind == "differential":
            rhs = x * apply(phi, a) + apply(phi, x) * a
        else:
            rhs = apply(phi, x) * apply(phi, a)
        if lhs != rhs:
            failures.append((x, a))
    return {"kind": phi.kind, "trials": trials, "seed": seed,
            "failures": failures, "passed": not failures}


# ---------------------------------------------------------------- loading

def load_system(spec):
    """Build a system from a JSON-compatible dict."""
    kind = spec.get("kind")
    n = int(spec["n"])
    field = Field(int(spec.get("char", 0)))
    initial = spec.get("initial", [0] * n)
    if kind == "differential":
        A = [parse_affine(str(a), n, field) for a in spec["A"]]
        return DifferentialSystem(n, A, initial, field)
    if kind == "mahler":
        if "A0p" in spec:
            A0p = parse_bipoly(spec["A0p"], n, field)
            A1p = parse_bipoly(spec["A1p"], n, field)
        else:
            num = parse_zpoly(str(spec["p_num"]), field)
            den = parse_zpoly(str(spec.get("p_den", "1")), field)
            r = max(len(_strip(num)), len(_strip(den))) - 1
            A1p = _hom_prime(num, r, n, field)
            A0p = _hom_prime(den, r, n, field)
        A = [parse_bipoly(str(a), n, field) for a in spec["A"]]
        return MahlerSystem(n, A0p, A1p, A, initial, field)
    raise DomainError(f"unknown system kind {kind!r}")


def _hom_prime(cs, r, n, field):
    t = {}
    for k, c in enumerate(cs):
        if c:
            t[(r - k, k) + (0,) * (n + 1)] = c
    return BiPoly(n, t, field)


def load_transformation(spec, system=None):
    system = system or load_system(spec)
    g = spec.get("growth", {})
    return Transformation.of(system, mu=g.get("mu"), nu0=g.get("nu0"), nu1=g.get("nu1"),
                             lam=spec.get("lambda"), K_lambda=spec.get("K_lambda", 1))


def solve_system(system, prec, seed=None):
    if isinstance(system, MahlerSystem):
        return solve_mahler(system, seed, prec)
    return solve_ode(system, prec)


def residuals(system, fs):
    if isinstance(system, MahlerSystem):
        return mahler_residuals(system, fs)
    return ode_residuals(system, fs)
