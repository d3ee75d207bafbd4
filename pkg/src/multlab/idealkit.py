"""Ideals of k[X0', X1'][X0..Xn]: Groebner bases, membership, colon,
saturation, rank, bigraded Hilbert counts, and the stability indices
built on them.

Ranks used for e_phi and i0 are ranks of the generated ideal, a stand-in
for the localized ranks (no primary decomposition); reports carry the
label PROXY_LABEL.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from itertools import combinations
from math import factorial

from .bipoly import (BiPoly, box_dimension, mono_key, monomials_of_bidegree,
                     ord_at)
from .exactnum import (QQ, AtLeast, DomainError, Exact, PrecisionError, Tower,
                       big_mul, big_pow, kernel, make_big)

PROXY_LABEL = "generated-ideal proxy"
DEFAULT_CAP = 10**6


class ResourceCapExceeded(DomainError):
    pass


# ---------------------------------------------------------------- raw polynomials
# A raw polynomial is a dict {exponent tuple: coeff}; the order is given by a key.

def _lead(p, key):
    e = max(p, key=key)
    return e, p[e]


def _divides(a, b):
    return all(x <= y for x, y in zip(a, b))


def _sub_mul(p, q, e, c):
    """p - c * x^e * q, in place."""
    for m, v in q.items():
        mm = tuple(x + y for x, y in zip(m, e))
        w = p.get(mm)
        w = -c * v if w is None else w - c * v
        if w:
            p[mm] = w
        else:
            p.pop(mm, None)


def _normal_form(p, G, key, full=True):
    """Remainder of p modulo the list of (poly, lead exp, lead coeff)."""
    p = dict(p)
    r = {}
    while p:
        e, c = _lead(p, key)
        for g, ge, gc in G:
            if _divides(ge, e):
                _sub_mul(p, g, tuple(x - y for x, y in zip(e, ge)), c / gc)
                break
        else:
            if not full:
                r.update(p)
                return r
            r[e] = c
            del p[e]
    return r


class _Counter:
    def __init__(self, cap):
        self.cap = cap
        self.n = 0

    def tick(self):
        self.n += 1
        if self.n > self.cap:
            raise ResourceCapExceeded(f"more than {self.cap} S-polynomial reductions")


def _buchberger(polys, key, field, cap=DEFAULT_CAP):
    """Reduced Groebner basis (monic, sorted by leading monomial)."""
    counter = _Counter(cap)
    G = []  # entries: [poly, lead exp, lead coeff, sugar]
    pairs = []

    def deg(e):
        return sum(e)

    def add(p, sugar):
        e, c = _lead(p, key)
        inv = field.one / c
        p = {m: v * inv for m, v in p.items()}
        idx = len(G)
        G.append([p, e, field.one, sugar])
        for i in range(idx):
            if G[i] is not None:
                pairs.append((i, idx))

    for p in polys:
        if p:
            add(dict(p), max(deg(m) for m in p))
    while pairs:
        def pkey(ij):
            i, j = ij
            gi, gj = G[i], G[j]
            l = tuple(max(a, b) for a, b in zip(gi[1], gj[1]))
            s = max(gi[3] + deg(l) - deg(gi[1]), gj[3] + deg(l) - deg(gj[1]))
            return (s, key(l), i, j)
        pairs.sort(key=pkey)
        i, j = pairs.pop(0)
        gi, gj = G[i], G[j]
        if gi is None or gj is None:
            continue
        l = tuple(max(a, b) for a, b in zip(gi[1], gj[1]))
        # first criterion: coprime leading monomials
        if all(a == 0 or b == 0 for a, b in zip(gi[1], gj[1])):
            continue
        # second criterion: a third element divides the lcm and both pairs are done
        pending = set(pairs)
        skip = False
        for k, gk in enumerate(G):
            if gk is None or k in (i, j):
                continue
            if _divides(gk[1], l):
                if (min(i, k), max(i, k)) not in pending and (min(j, k), max(j, k)) not in pending:
                    skip = True
                    break
        if skip:
            continue
        counter.tick()
        s = {}
        _sub_mul(s, gi[0], tuple(a - b for a, b in zip(l, gi[1])), -field.one)
        _sub_mul(s, gj[0], tuple(a - b for a, b in zip(l, gj[1])), field.one)
        sugar = max(gi[3] + deg(l) - deg(gi[1]), gj[3] + deg(l) - deg(gj[1]))
        active = [(g[0], g[1], g[2]) for g in G if g is not None]
        r = _normal_form(s, active, key)
        if r:
            add(r, sugar)
    basis = [g for g in G if g is not None]
    minimal = _dedupe_leads(basis, key)
    # tail reduce
    out = []
    for idx, g in enumerate(minimal):
        others = [(h[0], h[1], h[2]) for k, h in enumerate(minimal) if k != idx]
        lead = {g[1]: g[0][g[1]]}
        tail = {m: v for m, v in g[0].items() if m != g[1]}
        r = _normal_form(tail, others, key)
        r.update(lead)
        inv = field.one / r[g[1]]
        out.append({m: v * inv for m, v in r.items()})
    out.sort(key=lambda p: key(_lead(p, key)[0]))
    return out, counter.n


def _dedupe_leads(basis, key):
    """Keep one element per minimal leading monomial."""
    leads = sorted(basis, key=lambda g: key(g[1]))
    keep = []
    for g in leads:
        if any(_divides(h[1], g[1]) for h in keep):
            continue
        keep.append(g)
    return keep


# ---------------------------------------------------------------- ideal handles

class IdealHandle:
    """Immutable generator list with a lazily computed reduced basis."""

    def __init__(self, generators, n=None, field=None, cap=DEFAULT_CAP):
        gens = [g for g in generators]
        if n is None:
            if not gens:
                raise DomainError("give n for an empty generator list")
            n = gens[0].n
        if field is None:
            field = gens[0].field if gens else QQ
        for g in gens:
            if g.n != n or g.field != field:
                raise DomainError("generators from different rings")
        self.n = n
        self.field = field
        self.generators = tuple(gens)
        self.cap = cap
        self._basis = None
        self.reductions = 0

    @property
    def nvars(self):
        return self.n + 3

    @property
    def bigraded(self):
        return all(g.is_bihomogeneous() for g in self.generators)

    def basis(self):
        if self._basis is None:
            raw, self.reductions = _buchberger([g.terms for g in self.generators if g],
                                               mono_key, self.field, self.cap)
            self._basis = tuple(BiPoly(self.n, p, self.field) for p in raw)
        return self._basis

    def _G(self):
        return [(g.terms, g.leading()[0], g.leading()[1]) for g in self.basis()]

    def normal_form(self, P):
        return BiPoly(self.n, _normal_form(P.terms, self._G(), mono_key), self.field)

    def contains(self, P):
        return not _normal_form(P.terms, self._G(), mono_key)

    def is_whole(self):
        b = self.basis()
        return len(b) == 1 and not any(b[0].leading()[0])

    def is_zero(self):
        return not self.basis()

    def leading_monomials(self):
        return [g.leading()[0] for g in self.basis()]

    def same_as(self, other):
        return self.basis() == other.basis()

    def __repr__(self):
        return f"IdealHandle({', '.join(map(str, self.generators))})"


def groebner(I):
    return I.basis()


def member(P, I):
    return I.contains(P)


def _elim_key(e):
    return (e[0], mono_key(e[1:]))


def _eliminate_t(polys, field, cap):
    """Elements of the reduced basis free of the first variable."""
    raw, _ = _buchberger(polys, _elim_key, field, cap)
    return [{m[1:]: v for m, v in p.items()} for p in raw if all(m[0] == 0 for m in p)]


def intersect(I, J):
    """I ∩ J by eliminating t from t*I + (1 - t)*J."""
    if I.is_zero() or J.is_zero():
        return IdealHandle([], I.n, I.field, I.cap)
    F = I.field
    polys = []
    for g in I.basis():
        polys.append({(1,) + m: v for m, v in g.terms.items()})
    for g in J.basis():
        p = {}
        for m, v in g.terms.items():
            p[(0,) + m] = v
            p[(1,) + m] = -v
        polys.append(p)
    res = _eliminate_t(polys, F, I.cap)
    return IdealHandle([BiPoly(I.n, p, F) for p in res], I.n, F, I.cap)


def _exact_div(p, g, field):
    """p / g when g divides p."""
    key = mono_key
    ge, gc = _lead(g, key)
    p = dict(p)
    q = {}
    while p:
        e, c = _lead(p, key)
        if not _divides(ge, e):
            raise DomainError("inexact polynomial division")
        m = tuple(x - y for x, y in zip(e, ge))
        f = c / gc
        q[m] = f
        _sub_mul(p, g, m, f)
    return q


def colon_poly(I, g):
    if g.is_zero():
        return IdealHandle([BiPoly.const(I.n, 1, I.field)], I.n, I.field, I.cap)
    inter = intersect(I, IdealHandle([g], I.n, I.field, I.cap))
    gens = [BiPoly(I.n, _exact_div(h.terms, g.terms, I.field), I.field) for h in inter.basis()]
    return IdealHandle(gens, I.n, I.field, I.cap)


def colon(I, J):
    """I : J as the intersection of I : g over generators g of J."""
    gens = [g for g in J.generators if g]
    if not gens:
        return IdealHandle([BiPoly.const(I.n, 1, I.field)], I.n, I.field, I.cap)
    out = colon_poly(I, gens[0])
    for g in gens[1:]:
        out = intersect(out, colon_poly(I, g))
    return IdealHandle(out.basis(), I.n, I.field, I.cap)


def saturate(I, P, max_steps=64):
    """I : P^infinity."""
    cur = I
    for _ in range(max_steps):
        nxt = colon_poly(cur, P)
        if nxt.same_as(cur):
            return cur
        cur = nxt
    raise ResourceCapExceeded("saturation did not stabilize")


def saturate_ideal(I, J):
    """I : J^infinity = intersection over generators g of J of I : g^infinity."""
    gens = [g for g in J.generators if g]
    if not gens:
        return I
    out = saturate(I, gens[0])
    for g in gens[1:]:
        out = intersect(out, saturate(I, g))
    return IdealHandle(out.basis(), I.n, I.field, I.cap)


def monomial_dimension(leads, nv):
    """Krull dimension of k[x]/(leads)."""
    if any(not any(e) for e in leads):
        return -1
    best = 0
    for size in range(nv, 0, -1):
        for S in combinations(range(nv), size):
            Sset = set(S)
            if not any(all(i in Sset for i, x in enumerate(e) if x) for e in leads):
                return size
    return best


def rank(I):
    if I.is_whole():
        raise DomainError("rank of the unit ideal is undefined")
    return I.nvars - monomial_dimension(I.leading_monomials(), I.nvars)


def hilbert_bigraded(I, a, b):
    if not I.bigraded:
        raise DomainError("ideal is not bi-homogeneous")
    leads = I.leading_monomials()
    return sum(1 for m in monomials_of_bidegree(I.n, a, b)
               if not any(_divides(e, m) for e in leads))


# ---------------------------------------------------------------- delta pair

@dataclass
class DeltaPair:
    delta0: int
    delta1: int
    witness: BiPoly
    objective: Fraction


def delta_pair(I, mu, nu0, nu1, degs=None, cap=10**4):
    """Bidegree of a nonzero bi-homogeneous member minimizing
    mu*d0*deg_X + nu0*d1*deg_X' + nu1*d1*deg_X, smaller deg_X' on ties.

    degs = (d0, d1) are the two mixed degrees of I entering the weights;
    for a principal ideal they default to the bidegree of its generator."""
    if I.is_zero():
        raise DomainError("delta pair of the zero ideal")
    if not I.bigraded:
        raise DomainError("ideal is not bi-homogeneous")
    basis = I.basis()
    if degs is None:
        if len(basis) != 1:
            raise DomainError("supply the mixed degrees of a non-principal ideal")
        degs = basis[0].bidegree
    d0, d1 = degs
    mu, nu0, nu1 = Fraction(mu), Fraction(nu0), Fraction(nu1)
    A = max(g.bidegree[0] for g in basis)
    B = max(g.bidegree[1] for g in basis)
    if (A + 1) * (B + 1) > cap:
        raise ResourceCapExceeded("delta-pair search box exceeds cap")

    def obj(a, b):
        return mu * d0 * b + nu0 * d1 * a + nu1 * d1 * b

    cells = sorted(((obj(a, b), a, b) for a in range(A + 1) for b in range(B + 1)))
    for val, a, b in cells:
        total = len(monomials_of_bidegree(I.n, a, b))
        if hilbert_bigraded(I, a, b) < total:
            w = _graded_element(I, a, b)
            return DeltaPair(a, b, w, val)
    raise DomainError("no member found in the search box")


def _graded_element(I, a, b):
    for g in I.basis():
        ga, gb = g.bidegree
        if ga <= a and gb <= b:
            e = [0] * (I.n + 3)
            e[0] = a - ga
            e[2] = b - gb
            return g.mul_monomial(tuple(e))
    raise DomainError("no basis element below the requested bidegree")


# ---------------------------------------------------------------- vanishing spaces

def _poly_support(s):
    nz = [k for k, c in enumerate(s.coeffs) if c]
    return nz[-1] if nz else 0


def vanishing_space(points, n, a, b, field=QQ):
    """Basis of the bi-homogeneous forms of bidegree (a, b) vanishing at
    every point; points are (n+3)-tuples of series (X'-block, X-block).

    Vanishing is certified only when the coordinates are polynomials of
    degree e', e with prec > a*e' + b*e."""
    monos = monomials_of_bidegree(n, a, b)
    rows = []
    for pt in points:
        if len(pt) != n + 3:
            raise DomainError("point of the wrong length")
        prec = min(s.prec for s in pt)
        ep = max(_poly_support(s) for s in pt[:2])
        ex = max(_poly_support(s) for s in pt[2:])
        if prec <= a * ep + b * ex:
            raise PrecisionError("insufficient precision to certify vanishing")
        evals = [BiPoly(n, {m: 1}, field).evaluate(pt) for m in monos]
        for k in range(prec):
            rows.append([ev.coeffs[k] for ev in evals])
    K = kernel(rows, len(monos), field)
    return [BiPoly(n, {m: c for m, c in zip(monos, v) if c}, field) for v in K]


# ---------------------------------------------------------------- stability

def phi_stable(I, phi):
    """(True, None) if phi(g) lies in I for every basis element g,
    else (False, g) for the first violating g."""
    from .systems import apply
    for g in I.basis():
        if not I.contains(apply(phi, g)):
            return False, g
    return True, None


def ord_upper_bound(I, point):
    """min over basis elements g of ord g(point): an upper bound for the
    order of I at the point."""
    if I.is_zero():
        raise DomainError("order of the zero ideal")
    best = None
    for g in I.basis():
        o = ord_at(g, point)
        if o.exact and (best is None or o.value < best):
            best = o.value
    return Exact(best) if best is not None else AtLeast(min(s.prec for s in point))


def nu_constant(n, nu0, nu1):
    nu0, nu1 = Fraction(nu0), Fraction(nu1)
    if nu1 == 0:
        return Fraction(1)
    return Fraction(2) ** (n + 2) * max(Fraction(1), 4 * nu0 / nu1) ** (n + 1)


def rho_sequence(n, mu, nu0, nu1, upto, max_bits=100000):
    """rho_0..rho_upto; rho_{i+1} = nu (n+1)! rho_i^(n+2) max(mu, nu0)^(nu (n+1)! rho_i^(n+1)).

    Entries too large to hold are returned as symbolic Towers."""
    nu = nu_constant(n, nu0, nu1)
    c = nu * factorial(n + 1)
    base = max(Fraction(mu), Fraction(nu0))
    out = [Fraction(0), Fraction(1)]
    while len(out) <= upto:
        r = out[-1]
        out.append(make_big(big_mul(big_pow(r, n + 2), c), base, big_mul(big_pow(r, n + 1), c),
                            max_bits))
    return out[: upto + 1]


@dataclass
class StabilityIndices:
    e: int = None
    exceeds_cap: bool = False
    i0: int = None
    rho: list = dc_field(default_factory=list)
    nu: Fraction = None
    ranks: list = dc_field(default_factory=list)
    label: str = PROXY_LABEL


def e_phi(V, phi, cap=3):
    """Largest e <= cap with rank(V, phi(V), ..., phi^e(V)) = rank(V)."""
    from .systems import apply
    V = list(V)
    if not V:
        raise DomainError("empty polynomial list")
    n, F = V[0].n, V[0].field
    r0 = rank(IdealHandle(V, n, F))
    cur = list(V)
    frontier = list(V)
    ranks = [r0]
    for e in range(1, cap + 1):
        frontier = [apply(phi, g) for g in frontier]
        cur += [g for g in frontier if g]
        I = IdealHandle(cur, n, F)
        r = I.nvars if I.is_whole() else rank(I)
        ranks.append(r)
        if r != r0:
            return StabilityIndices(e=e - 1, ranks=ranks)
    return StabilityIndices(e=cap, exceeds_cap=True, ranks=ranks)


def i0_index(points, n, mu, nu0, nu1, delta, field=QQ, dim_cap=400):
    """Largest i in [1, n+1] whose level-i vanishing space generates an
    ideal of rank >= i; delta = (delta0, delta1) of the cycle."""
    nu = nu_constant(n, nu0, nu1)
    rho = rho_sequence(n, mu, nu0, nu1, n + 1)
    d0, d1 = delta
    m = max(Fraction(mu), Fraction(nu0))
    best = None
    ranks = []
    for i in range(1, n + 2):
        if isinstance(rho[i], Tower):
            raise ResourceCapExceeded(f"rho_{i} too large to materialize")
        a = rho[i] * (d0 + Fraction(nu1) * d1 / m)
        a = int(a) if a.denominator == 1 else int(a) + 1
        b = int(rho[i] * d1)
        if box_dimension(n, a, b) > dim_cap:
            raise ResourceCapExceeded(f"level {i} box ({a}, {b}) exceeds dimension cap")
        V = vanishing_space(points, n, a, b, field)
        if not V:
            r = 0
        else:
            I = IdealHandle(V, n, field)
            r = I.nvars if I.is_whole() else rank(I)
        ranks.append(r)
        if r >= i:
            best = i
    if best is None:
        raise DomainError("no level reaches rank >= 1")
    return StabilityIndices(i0=best, rho=rho, nu=nu, ranks=ranks)
