"""Projective points over k[[z]], the wedge valuation, 0-cycles and the
numerical checkers built on them (Liouville, transference, C_iso)."""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from .bipoly import BiPoly, evaluate, parse_zform, parse_zpoly
from .exactnum import (QQ, AtLeast, DomainError, Exact, Field, PowerSeries,
                       PrecisionError, ps_ord, series_from_ratfunc)


def c_n(n):
    return 2 ** (n + 1) * (n + 2) ** ((n + 1) * (n + 3))


class ProjPoint:
    """A point of P^m given by series coordinates."""

    def __init__(self, coords):
        coords = tuple(coords)
        if len(coords) < 2:
            raise DomainError("a projective point needs at least two coordinates")
        f = coords[0].field
        if any(c.field != f for c in coords):
            raise DomainError("coordinates over different fields")
        if all(not any(c.coeffs) for c in coords):
            raise PrecisionError("all coordinates vanish to known precision")
        self.coords = coords
        self.field = f

    @property
    def dim(self):
        return len(self.coords) - 1

    @property
    def prec(self):
        return min(c.prec for c in self.coords)

    def ord(self):
        """Exact valuation of the coordinate vector."""
        o = _min_ord(self.coords)
        if not o.exact:
            raise PrecisionError("valuation of the point not certified")
        return o.value

    def normalized(self):
        k = self.ord()
        return ProjPoint(PowerSeries(c.coeffs[k:], c.prec - k, c.field) for c in self.coords)

    def scaled(self, u):
        return ProjPoint(c * u for c in self.coords)

    def __repr__(self):
        return f"ProjPoint({', '.join(map(repr, self.coords))})"


@dataclass
class BiProjPoint:
    first: ProjPoint
    second: ProjPoint


def _min_ord(series):
    exact = [o.value for o in map(ps_ord, series) if o.exact]
    bound = min((s.prec for s in series if not ps_ord(s).exact), default=None)
    if exact and (bound is None or min(exact) < bound):
        return Exact(min(exact))
    return AtLeast(min(exact + [bound]) if exact else bound)


def wedge_ord(x, y):
    """ord(x ^ y) - ord(x) - ord(y); the min over the factors for
    biprojective points."""
    if isinstance(x, BiProjPoint) or isinstance(y, BiProjPoint):
        if not (isinstance(x, BiProjPoint) and isinstance(y, BiProjPoint)):
            raise DomainError("mixing projective and biprojective points")
        return _min_results([wedge_ord(x.first, y.first), wedge_ord(x.second, y.second)])
    if x.dim != y.dim:
        raise DomainError("points in different spaces")
    # normalizing first keeps the full relative precision of each point
    a, b = x.normalized().coords, y.normalized().coords
    w = [a[i] * b[j] - a[j] * b[i]
         for i in range(len(a)) for j in range(i + 1, len(a))]
    return _min_ord(w)


def _min_results(rs):
    exact = [r.value for r in rs if r.exact]
    bounds = [r.value for r in rs if not r.exact]
    if exact and (not bounds or min(exact) < min(bounds)):
        return Exact(min(exact))
    return AtLeast(min(exact + bounds))


@dataclass
class ZeroCycle:
    points: list
    multiplicities: list = None
    degree: int = None
    height: int = None

    def __post_init__(self):
        if self.multiplicities is None:
            self.multiplicities = [1] * len(self.points)
        if len(self.multiplicities) != len(self.points):
            raise DomainError("one multiplicity per point")
        if any(m < 1 for m in self.multiplicities):
            raise DomainError("multiplicities must be positive")
        if self.degree is None:
            self.degree = sum(self.multiplicities)

    @property
    def weighted(self):
        return list(zip(self.points, self.multiplicities))


@dataclass
class CycleOrd:
    ord: object
    Ord: object


def ord_to_cycle(x, Z):
    """(max, multiplicity-weighted sum) of wedge_ord(x, y) over y in Z."""
    if not Z.points:
        raise DomainError("empty cycle")
    rs = [(wedge_ord(x, y), m) for y, m in Z.weighted]
    exact = all(r.exact for r, _ in rs)
    top = max(r.value for r, _ in rs)
    total = sum(m * r.value for r, m in rs)
    if exact:
        return CycleOrd(Exact(top), Exact(total))
    return CycleOrd(AtLeast(top), AtLeast(total))


# ---------------------------------------------------------------- checkers

def _z_point(P, coords):
    one = PowerSeries.constant(1, coords[0].prec, coords[0].field)
    z = PowerSeries.variable(coords[0].prec, coords[0].field)
    return (one, z) + tuple(coords)


def form_value(Q, x):
    """Q(x) for a form Q in k[z][X0..Xn] given as a z-homogenized BiPoly."""
    if len(x.coords) != Q.n + 1:
        raise DomainError("point and form in different spaces")
    prec = x.prec
    return evaluate(Q, _z_point(Q, [c.truncate(prec) for c in x.coords]))


def form_degrees(Q):
    """(deg, h) of a nonzero form: degree in X and degree in z."""
    if Q.is_zero():
        raise DomainError("zero form")
    if not Q.is_bihomogeneous():
        raise DomainError("not a homogeneous form")
    h, d = Q.bidegree
    return d, h


@dataclass
class LiouvilleReport:
    lhs: int
    rhs: int
    ords: list
    holds: bool

    def lines(self):
        rel = ">=" if self.holds else "<"
        return [f"deg(Q)h(Z) + h(Q)deg(Z) = {self.lhs} {rel} {self.rhs} = |sum ord Q(beta)|",
                "status: " + ("ok" if self.holds else "VIOLATED (inconsistent declared degree/height)")]


def liouville_check(Q, Z):
    dQ, hQ = form_degrees(Q)
    if Z.height is None:
        raise DomainError("cycle height not declared")
    ords = []
    for y, m in Z.weighted:
        v = ps_ord(form_value(Q, y.normalized()))
        if not v.exact:
            raise PrecisionError("insufficient precision: Q(beta) vanishes to known precision")
        ords.append(m * v.value)
    lhs = dQ * Z.height + hQ * Z.degree
    rhs = abs(sum(ords))
    return LiouvilleReport(lhs, rhs, ords, lhs >= rhs)


@dataclass
class TransferenceCertificate:
    P: BiPoly
    C: Fraction
    Z: ZeroCycle
    mu: Fraction
    nu0: Fraction
    nu1: Fraction


def _gt_root(S, T, W, n):
    """S > T^(1/n) * W for T, W >= 0, decided exactly."""
    if W == 0:
        return S > 0
    return S > 0 and S ** n > T * W ** n


@dataclass
class TransferenceReport:
    checks: dict = dc_field(default_factory=dict)
    values: dict = dc_field(default_factory=dict)
    notes: list = dc_field(default_factory=list)

    @property
    def passed(self):
        return all(v in (True, None) for v in self.checks.values())

    def lines(self):
        out = []
        for k, v in self.checks.items():
            out.append(f"{k}: {'pass' if v else ('n/a' if v is None else 'FAIL')}")
        for k, v in self.values.items():
            out.append(f"  {k} = {v}")
        return out + self.notes


def transference_check(cert, f):
    """Check the hypothesis and both conclusions of the transference statement
    for a supplied cycle; f is a ProjPoint in P^n."""
    n = f.dim
    P = cert.P
    if P.n + 1 != len(f.coords):
        raise DomainError("form and point in different spaces")
    dP, hP = form_degrees(P)
    C, mu, nu0, nu1 = map(Fraction, (cert.C, cert.mu, cert.nu0, cert.nu1))
    cn = c_n(n)
    rep = TransferenceReport()
    rep.checks["C lower bound"] = C >= 1 / min(nu0, mu) ** n
    if not rep.checks["C lower bound"]:
        rep.notes.append(f"C = {C} below 1/min(nu0, mu)^n")
    v = ps_ord(form_value(P, f))
    if not v.exact:
        raise PrecisionError("ord P(f) not certified; increase precision")
    lhs = v.value - dP * f.ord() - hP
    rhs = C * n * ((mu + nu0) * (hP + 1) + nu1 * dP) * mu ** (n - 1) * (dP + 1) ** n
    rep.values["hypothesis"] = f"{lhs} > {rhs}"
    hyp = lhs > rhs
    rep.checks["hypothesis"] = hyp
    if not hyp:
        rep.checks["hypothesis"] = None
        rep.checks["degree bound"] = None
        rep.checks["order bound"] = None
        rep.notes.append("hypothesis not satisfied; conclusions not required")
        return rep
    Z = cert.Z
    if Z.height is None:
        raise DomainError("cycle height not declared")
    for y in Z.points:
        w = form_value(P, y)
        if ps_ord(w).exact:
            rep.notes.append("a point of Z is not on the zero locus of P")
            rep.checks["Z on zero locus"] = False
            break
    else:
        rep.checks["Z on zero locus"] = True
    deg_lhs = nu0 * Z.degree * hP + nu1 * Z.degree * dP + mu * Z.height * dP
    deg_rhs = cn * C * (n + 1) * mu ** n * (nu0 * (hP + 1) + nu1 * dP) * (dP + 1) ** n
    rep.values["degree bound"] = f"{deg_lhs} <= {deg_rhs}"
    rep.checks["degree bound"] = deg_lhs <= deg_rhs
    if not rep.checks["degree bound"]:
        rep.notes.append("degree bound failed")
    co = ord_to_cycle(f, Z)
    if not co.Ord.exact:
        raise PrecisionError("Ord_f(Z) not certified; increase precision")
    W = (nu0 * (hP + 1) + nu1 * dP) * Z.degree + mu * (dP + 1) * Z.height
    rep.values["order bound"] = (f"{co.Ord.value} > c_n^-1 (c_n C)^(1/{n}) * {W}")
    rep.checks["order bound"] = _gt_root(Fraction(co.Ord.value) * cn, cn * C, W, n)
    if not rep.checks["order bound"]:
        rep.notes.append("order bound failed")
    try:
        ci = c_iso(f, mu, nu0)
    except PrecisionError:
        ci = None
    if ci is not None and C > ci:
        iso = all(_over_k(y) for y in Z.points)
        rep.checks["non-isotrivial"] = not iso
    else:
        rep.checks["non-isotrivial"] = None
        rep.notes.append(f"C = {C} <= C_iso = {ci}; non-isotriviality not implied")
    return rep


def _at_zero(x):
    x = x.normalized()
    return ProjPoint(PowerSeries.constant(c.coeffs[0] if c.prec else 0, x.prec, x.field)
                     for c in x.coords)


def _over_k(y):
    return not wedge_ord(y, _at_zero(y)).exact


def c_iso(f, mu, nu0):
    """((c_n Ord(f(z) ^ f(0)) + 1) / min(nu0, mu))^n."""
    n = f.dim
    w = wedge_ord(f, _at_zero(f))
    if not w.exact:
        raise PrecisionError("f(z) and f(0) agree to known precision; increase precision")
    return ((c_n(n) * w.value + 1) / Fraction(min(Fraction(nu0), Fraction(mu)))) ** n


# ---------------------------------------------------------------- files

def parse_coordinate(spec, prec, field=QQ):
    """A coordinate as a coefficient list, a z-polynomial string, or
    {"ratfunc": [num, den]}."""
    if isinstance(spec, dict):
        num, den = spec["ratfunc"]
        return series_from_ratfunc(parse_zpoly(str(num), field), parse_zpoly(str(den), field),
                                   prec, field)
    if isinstance(spec, str):
        return PowerSeries(parse_zpoly(spec, field), prec, field)
    return PowerSeries([field(c) if isinstance(c, str) else c for c in spec], prec, field)


def load_point(spec, prec, field=QQ):
    return ProjPoint(parse_coordinate(c, prec, field) for c in spec)


def load_cycle(spec, field=None):
    field = field or Field(int(spec.get("char", 0)))
    prec = int(spec.get("prec", 64))
    pts, mults = [], []
    for p in spec["points"]:
        if isinstance(p, dict):
            pts.append(load_point(p["coords"], prec, field))
            mults.append(int(p.get("mult", 1)))
        else:
            pts.append(load_point(p, prec, field))
            mults.append(1)
    return ZeroCycle(pts, mults, spec.get("degree"), spec.get("height"))


def load_certificate(spec):
    field = Field(int(spec.get("char", 0)))
    n = int(spec["n"])
    prec = int(spec.get("prec", 64))
    P = parse_zform(spec["P"], n, field)
    zspec = dict(spec["Z"])
    zspec.setdefault("prec", prec)
    Z = load_cycle(zspec, field)
    g = spec.get("growth", {})
    cert = TransferenceCertificate(P, Fraction(str(spec.get("C", 1))), Z,
                                   Fraction(str(g.get("mu", 1))), Fraction(str(g.get("nu0", 1))),
                                   Fraction(str(g.get("nu1", 0))))
    f = load_point(spec["f"], prec, field)
    return cert, f
