"""Polynomials in k[X0', X1'][X0, ..., Xn] and k[z][X1, ..., Xn].

Exponent vectors of a BiPoly are ordered (X0', X1', X0, X1, ..., Xn).
Exponent vectors of an AffinePoly are ordered (z, X1, ..., Xn).
"""
from __future__ import annotations

import random
import re
from fractions import Fraction
from math import comb

from .exactnum import QQ, DomainError, PowerSeries, ps_ord


class ParseError(DomainError):
    def __init__(self, msg, line, col):
        super().__init__(f"line {line}, column {col}: {msg}")
        self.line = line
        self.col = col


def mono_key(e):
    """Sort key of the fixed monomial order: total degree, then X'-block
    degree, then reverse lexicographic (X0' > X1' > X0 > ... > Xn)."""
    return (sum(e), e[0] + e[1], tuple(-x for x in reversed(e)))


def bivar_names(n):
    return ["X0'", "X1'"] + [f"X{i}" for i in range(n + 1)]


def affine_names(n):
    return ["z"] + [f"X{i}" for i in range(1, n + 1)]


def _fmt_terms(items, names):
    if not items:
        return "0"
    out = []
    for e, c in items:
        mono = "*".join(names[i] + (f"^{k}" if k > 1 else "") for i, k in enumerate(e) if k)
        s = str(c)
        neg = s.startswith("-")
        if neg:
            s = s[1:]
        if mono:
            body = mono if s == "1" else f"{s}*{mono}"
        else:
            body = s
        if not out:
            out.append(("-" if neg else "") + body)
        else:
            out.append((" - " if neg else " + ") + body)
    return "".join(out)


def _add_into(d, e, c):
    v = d.get(e)
    v = c if v is None else v + c
    if v:
        d[e] = v
    else:
        d.pop(e, None)


class _Sparse:
    """Shared sparse arithmetic; subclasses fix the variable layout."""
    __slots__ = ("n", "field", "terms", "_deg")

    def __init__(self, n, terms=None, field=QQ):
        self.n = n
        self.field = field
        t = {}
        if terms:
            for e, c in terms.items():
                c = field(c)
                if c:
                    t[tuple(e)] = c
        self.terms = self._sorted(t)
        self._deg = None

    @classmethod
    def _make(cls, n, field, t):
        s = object.__new__(cls)
        s.n = n
        s.field = field
        s.terms = cls._sorted(t)
        s._deg = None
        return s

    @staticmethod
    def _sorted(t):
        return dict(sorted(t.items(), key=lambda it: mono_key(it[0]), reverse=True))

    def _nv(self):
        raise NotImplementedError

    def _like(self, o):
        if type(o) is not type(self) or o.n != self.n:
            raise DomainError("polynomials live in different rings")
        if o.field != self.field:
            raise DomainError(f"{self.field} vs {o.field}")

    def _lift(self, o):
        if isinstance(o, _Sparse):
            self._like(o)
            return o
        return type(self)._make(self.n, self.field,
                                {(0,) * self._nv(): self.field(o)} if o else {})

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __add__(self, o):
        o = self._lift(o)
        d = dict(self.terms)
        for e, c in o.terms.items():
            _add_into(d, e, c)
        return type(self)._make(self.n, self.field, d)

    __radd__ = __add__

    def __neg__(self):
        return type(self)._make(self.n, self.field, {e: -c for e, c in self.terms.items()})

    def __sub__(self, o):
        return self + (-self._lift(o))

    def __rsub__(self, o):
        return self._lift(o) - self

    def scale(self, c):
        c = self.field(c)
        if not c:
            return type(self)._make(self.n, self.field, {})
        return type(self)._make(self.n, self.field, {e: c * v for e, v in self.terms.items()})

    def __mul__(self, o):
        if not isinstance(o, _Sparse):
            return self.scale(o)
        self._like(o)
        d = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in o.terms.items():
                _add_into(d, tuple(a + b for a, b in zip(e1, e2)), c1 * c2)
        return type(self)._make(self.n, self.field, d)

    __rmul__ = __mul__

    def __pow__(self, k):
        r = self._lift(1)
        b = self
        while k:
            if k & 1:
                r = r * b
            k >>= 1
            if k:
                b = b * b
        return r

    def mul_monomial(self, e, c=1):
        c = self.field(c)
        return type(self)._make(self.n, self.field,
                                {tuple(a + b for a, b in zip(m, e)): c * v for m, v in self.terms.items()})

    def diff(self, i):
        d = {}
        for e, c in self.terms.items():
            if e[i]:
                e2 = list(e)
                e2[i] -= 1
                _add_into(d, tuple(e2), self.field(e[i]) * c)
        return type(self)._make(self.n, self.field, d)

    def __eq__(self, o):
        if isinstance(o, _Sparse):
            return type(o) is type(self) and o.n == self.n and o.field == self.field and o.terms == self.terms
        if isinstance(o, (int, Fraction)):
            return self == self._lift(o)
        return NotImplemented

    def __hash__(self):
        return hash((self.n, tuple(self.terms.items())))

    def leading(self):
        """(exponent, coefficient) of the largest term."""
        return next(iter(self.terms.items()))

    def monic(self):
        if not self.terms:
            return self
        return self.scale(self.field.one / self.leading()[1])

    def __str__(self):
        return _fmt_terms(list(self.terms.items()), self._names())

    def __repr__(self):
        return f"{type(self).__name__}({self})"


class BiPoly(_Sparse):
    """Element of k[X0', X1'][X0..Xn]."""
    __slots__ = ()

    def _nv(self):
        return self.n + 3

    def _names(self):
        return bivar_names(self.n)

    @classmethod
    def var(cls, n, i, field=QQ):
        e = [0] * (n + 3)
        e[i] = 1
        return cls._make(n, field, {tuple(e): field.one})

    @classmethod
    def const(cls, n, c, field=QQ):
        c = field(c)
        return cls._make(n, field, {(0,) * (n + 3): c} if c else {})

    @classmethod
    def zero(cls, n, field=QQ):
        return cls._make(n, field, {})

    @property
    def bidegree(self):
        """(deg_X', deg_X); None for the zero polynomial."""
        if self._deg is None and self.terms:
            self._deg = (max(e[0] + e[1] for e in self.terms),
                         max(sum(e[2:]) for e in self.terms))
        return self._deg

    def is_bihomogeneous(self):
        return len({(e[0] + e[1], sum(e[2:])) for e in self.terms}) <= 1

    def subs(self, images):
        """Ring homomorphism sending variable i to images[i]."""
        if len(images) != self.n + 3:
            raise DomainError("need one image per variable")
        tgt = images[0]
        cache = [dict() for _ in images]

        def pw(i, k):
            if k not in cache[i]:
                cache[i][k] = images[i] ** k
            return cache[i][k]

        acc = {}
        for e, c in self.terms.items():
            t = type(tgt)._make(tgt.n, tgt.field, {(0,) * tgt._nv(): c})
            for i, k in enumerate(e):
                if k:
                    t = t * pw(i, k)
            for m, v in t.terms.items():
                _add_into(acc, m, v)
        return type(tgt)._make(tgt.n, tgt.field, acc)

    def evaluate(self, point):
        return evaluate(self, point)

    def ord_at(self, point):
        return ord_at(self, point)


class AffinePoly(_Sparse):
    """Element of k[z][X1..Xn]."""
    __slots__ = ()

    def _nv(self):
        return self.n + 1

    def _names(self):
        return affine_names(self.n)

    @classmethod
    def var(cls, n, i, field=QQ):
        """i = 0 is z, i >= 1 is Xi."""
        e = [0] * (n + 1)
        e[i] = 1
        return cls._make(n, field, {tuple(e): field.one})

    @classmethod
    def const(cls, n, c, field=QQ):
        c = field(c)
        return cls._make(n, field, {(0,) * (n + 1): c} if c else {})

    @property
    def deg_z(self):
        return max((e[0] for e in self.terms), default=0)

    @property
    def deg_X(self):
        return max((sum(e[1:]) for e in self.terms), default=0)

    def evaluate(self, zs, fs):
        """Substitute z -> zs and Xi -> fs[i-1] (power series)."""
        return _eval_terms(self.terms, [zs] + list(fs))


def bihomogenize(p, bidegree=None):
    """X0'^A X0^B p(X1'/X0', X1/X0, ...) with (A, B) = (deg_z p, deg_X p)
    unless a larger target bidegree is given."""
    A, B = (p.deg_z, p.deg_X) if bidegree is None else bidegree
    if p.terms and (A < p.deg_z or B < p.deg_X):
        raise DomainError("target bidegree below the degrees of p")
    t = {}
    for e, c in p.terms.items():
        a, b = e[0], sum(e[1:])
        t[(A - a, a, B - b) + tuple(e[1:])] = c
    return BiPoly._make(p.n, p.field, t)


def dehomogenize(P):
    """Set X0' = X0 = 1 and X1' = z."""
    t = {}
    for e, c in P.terms.items():
        _add_into(t, (e[1],) + tuple(e[3:]), c)
    return AffinePoly._make(P.n, P.field, t)


def _eval_terms(terms, point):
    if not point:
        raise DomainError("empty point")
    prec = min(s.prec for s in point)
    field = point[0].field
    for s in point:
        if s.field != field:
            raise DomainError("point coordinates over different fields")
    point = [s.truncate(prec) for s in point]
    cache = {}

    def pw(i, k):
        key = (i, k)
        if key not in cache:
            cache[key] = point[i] if k == 1 else pw(i, k - 1) * point[i]
        return cache[key]

    acc = [field.zero] * prec
    for e, c in terms.items():
        t = None
        for i, k in enumerate(e):
            if k:
                t = pw(i, k) if t is None else t * pw(i, k)
        if t is None:
            if prec:
                acc[0] = acc[0] + c
        else:
            for j, v in enumerate(t.coeffs):
                if v:
                    acc[j] = acc[j] + c * v
    return PowerSeries._raw(acc, prec, field)


def evaluate(P, point):
    if len(point) != P.n + 3:
        raise DomainError(f"point has {len(point)} coordinates, expected {P.n + 3}")
    if P.field != point[0].field:
        raise DomainError("polynomial and point over different fields")
    return _eval_terms(P.terms, list(point))


def ord_at(P, point):
    if P.is_zero():
        raise DomainError("order of the zero polynomial is undefined")
    return ps_ord(evaluate(P, point))


def distinguished_point(fs, prec=None, field=None):
    """(1, z, 1, f1, ..., fn) at the common precision of the fs."""
    fs = list(fs)
    if field is None:
        field = fs[0].field if fs else QQ
    if prec is None:
        prec = min(f.prec for f in fs)
    one = PowerSeries.constant(1, prec, field)
    z = PowerSeries.variable(prec, field)
    return (one, z, one) + tuple(f.truncate(prec) for f in fs)


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<var>X\d+'?|z)|(?P<op>[-+*/^()]))")


def parse_poly(text, names, field=QQ):
    """Parse text into {exponent tuple: coeff} over the given variable names."""
    toks = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            _raise(text, len(text) - len(text[pos:].lstrip()), "unexpected character")
        kind = m.lastgroup
        start = m.start(kind)
        toks.append((kind, m.group(kind), start))
        pos = m.end()
    toks.append(("end", "", len(text)))
    nv = len(names)
    index = {nm: i for i, nm in enumerate(names)}
    st = {"i": 0}

    def peek():
        return toks[st["i"]]

    def take():
        t = toks[st["i"]]
        st["i"] += 1
        return t

    def const(c):
        c = field(c)
        return {(0,) * nv: c} if c else {}

    def add(a, b, sign=1):
        d = dict(a)
        for e, c in b.items():
            _add_into(d, e, c if sign == 1 else -c)
        return d

    def mul(a, b):
        d = {}
        for e1, c1 in a.items():
            for e2, c2 in b.items():
                _add_into(d, tuple(x + y for x, y in zip(e1, e2)), c1 * c2)
        return d

    def expr():
        left = term()
        while peek()[1] in ("+", "-") and peek()[0] == "op":
            op = take()[1]
            left = add(left, term(), 1 if op == "+" else -1)
        return left

    def term():
        left = unary()
        while peek()[0] == "op" and peek()[1] in ("*", "/"):
            _, op, at = take()
            right = unary()
            if op == "*":
                left = mul(left, right)
            else:
                if not right or any(any(e) for e in right):
                    _raise(text, at, "division only by a nonzero constant")
                inv = field.one / next(iter(right.values()))
                left = {e: c * inv for e, c in left.items()}
        return left

    def unary():
        t = peek()
        if t[0] == "op" and t[1] in ("+", "-"):
            take()
            v = unary()
            return v if t[1] == "+" else {e: -c for e, c in v.items()}
        return power()

    def power():
        base = atom()
        if peek()[0] == "op" and peek()[1] == "^":
            take()
            kind, val, at = take()
            if kind != "num":
                _raise(text, at, "exponent must be a non-negative integer")
            r = const(1)
            for _ in range(int(val)):
                r = mul(r, base)
            return r
        return base

    def atom():
        kind, val, at = take()
        if kind == "num":
            return const(int(val))
        if kind == "var":
            if val not in index:
                _raise(text, at, f"unknown variable {val}")
            e = [0] * nv
            e[index[val]] = 1
            return {tuple(e): field.one}
        if kind == "op" and val == "(":
            v = expr()
            k2, v2, at2 = take()
            if v2 != ")":
                _raise(text, at2, "expected ')'")
            return v
        _raise(text, at, "unexpected end of input" if kind == "end" else f"unexpected '{val}'")

    result = expr()
    kind, val, at = peek()
    if kind != "end":
        _raise(text, at, f"unexpected '{val}'")
    return result


def _raise(text, offset, msg):
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    raise ParseError(msg, line, col)


def parse_bipoly(text, n, field=QQ):
    return BiPoly(n, parse_poly(text, bivar_names(n), field), field)


def parse_affine(text, n, field=QQ):
    return AffinePoly(n, parse_poly(text, affine_names(n), field), field)


def parse_zform(text, n, field=QQ):
    """A form in k[z][X0..Xn], returned as a BiPoly homogenized in z
    (X1' = z, X0' to the height)."""
    names = ["z"] + [f"X{i}" for i in range(n + 1)]
    t = parse_poly(text, names, field)
    return zform(n, t, field)


def zform(n, t, field=QQ):
    h = max((e[0] for e in t), default=0)
    return BiPoly(n, {(h - e[0], e[0]) + tuple(e[1:]): c for e, c in t.items()}, field)


def parse_zpoly(text, field=QQ):
    """Univariate polynomial in z as a coefficient list."""
    t = parse_poly(text, ["z"], field)
    if not t:
        return [field.zero]
    d = max(e[0] for e in t)
    out = [field.zero] * (d + 1)
    for e, c in t.items():
        out[e[0]] = c
    return out


# ---------------------------------------------------------------- random

def random_coeff(rng, lo=-9, hi=9):
    return rng.randint(lo, hi)


def monomials_of_bidegree(n, a, b):
    """All exponent vectors of bidegree (a, b), in a fixed order."""
    out = []
    for i in range(a + 1):
        xp = (a - i, i)
        for xs in _compositions(b, n + 1):
            out.append(xp + xs)
    return out


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def box_dimension(n, a, b):
    return (a + 1) * comb(b + n, n)


def random_bihomogeneous(rng, n, a, b, field=QQ, density=0.6):
    t = {}
    for e in monomials_of_bidegree(n, a, b):
        if rng.random() < density:
            t[e] = random_coeff(rng)
    P = BiPoly(n, t, field)
    if P.is_zero():
        P = BiPoly(n, {monomials_of_bidegree(n, a, b)[0]: 1}, field)
    return P


def random_affine(rng, n, deg_z, deg_X, field=QQ, density=0.5):
    t = {}
    for a in range(deg_z + 1):
        for b in range(deg_X + 1):
            for xs in _compositions(b, n):
                if rng.random() < density:
                    t[(a,) + xs] = random_coeff(rng)
    return AffinePoly(n, t, field)


def make_rng(seed):
    return random.Random(seed & 0xFFFFFFFFFFFFFFFF)
