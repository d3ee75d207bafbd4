"""Exact coefficient fields and truncated power series.

Rationals are ``fractions.Fraction``; residues mod a prime are ``ModP``.
A ``PowerSeries`` knows exactly ``prec`` coefficients; everything past that
is unknown and never assumed to be zero.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class FieldMismatch(DomainError):
    pass


class PrecisionError(DomainError):
    """Known coefficients do not suffice to certify the answer."""


def _is_prime(p):
    if p < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13):
        if p % q == 0:
            return p == q
    i = 17
    while i * i <= p:
        if p % i == 0:
            return False
        i += 2
    return True


class ModP:
    __slots__ = ("v", "p")

    def __init__(self, v, p):
        self.v = v % p
        self.p = p

    def _other(self, o):
        if isinstance(o, ModP):
            if o.p != self.p:
                raise FieldMismatch(f"GF({self.p}) vs GF({o.p})")
            return o.v
        if isinstance(o, int):
            return o
        if isinstance(o, Fraction):
            if o.denominator % self.p == 0:
                raise ZeroDivisionError("denominator divisible by p")
            return o.numerator * pow(o.denominator, -1, self.p)
        return NotImplemented

    def __add__(self, o):
        o = self._other(o)
        return NotImplemented if o is NotImplemented else ModP(self.v + o, self.p)

    __radd__ = __add__

    def __sub__(self, o):
        o = self._other(o)
        return NotImplemented if o is NotImplemented else ModP(self.v - o, self.p)

    def __rsub__(self, o):
        o = self._other(o)
        return NotImplemented if o is NotImplemented else ModP(o - self.v, self.p)

    def __mul__(self, o):
        o = self._other(o)
        return NotImplemented if o is NotImplemented else ModP(self.v * o, self.p)

    __rmul__ = __mul__

    def __neg__(self):
        return ModP(-self.v, self.p)

    def __pos__(self):
        return self

    def inverse(self):
        if self.v == 0:
            raise ZeroDivisionError("inverse of 0 in GF(%d)" % self.p)
        return ModP(pow(self.v, self.p - 2, self.p), self.p)

    def __truediv__(self, o):
        o = self._other(o)
        if o is NotImplemented:
            return o
        return self * ModP(o, self.p).inverse()

    def __rtruediv__(self, o):
        o = self._other(o)
        if o is NotImplemented:
            return o
        return ModP(o, self.p) * self.inverse()

    def __pow__(self, e):
        if e < 0:
            return self.inverse() ** (-e)
        return ModP(pow(self.v, e, self.p), self.p)

    def __eq__(self, o):
        if isinstance(o, ModP):
            return self.p == o.p and self.v == o.v
        if isinstance(o, (int, Fraction)):
            try:
                return self.v == self._other(o) % self.p
            except ZeroDivisionError:
                return False
        return NotImplemented

    def __hash__(self):
        return hash((self.v, self.p))

    def __bool__(self):
        return self.v != 0

    def __repr__(self):
        return f"{self.v} (mod {self.p})"

    def __str__(self):
        return str(self.v)


class Field:
    """QQ (char 0) or GF(p)."""

    def __init__(self, char=0):
        if char != 0:
            if not (1 < char < 2**31) or not _is_prime(char):
                raise DomainError(f"GF(p) needs a prime p < 2^31, got {char}")
        self.char = char

    def __call__(self, x):
        if self.char == 0:
            if isinstance(x, ModP):
                raise FieldMismatch("residue given where a rational is expected")
            if isinstance(x, str):
                return Fraction(x.strip())
            return Fraction(x)
        if isinstance(x, ModP):
            if x.p != self.char:
                raise FieldMismatch(f"GF({x.p}) vs GF({self.char})")
            return x
        if isinstance(x, str):
            x = Fraction(x.strip())
        if isinstance(x, Fraction):
            if x.denominator % self.char == 0:
                raise DomainError(f"{x} has no image in GF({self.char})")
            return ModP(x.numerator * pow(x.denominator, -1, self.char), self.char)
        return ModP(int(x), self.char)

    @property
    def zero(self):
        return self(0)

    @property
    def one(self):
        return self(1)

    def owns(self, x):
        if self.char == 0:
            return isinstance(x, Fraction)
        return isinstance(x, ModP) and x.p == self.char

    def __eq__(self, o):
        return isinstance(o, Field) and o.char == self.char

    def __hash__(self):
        return hash(("Field", self.char))

    def __repr__(self):
        return "QQ" if self.char == 0 else f"GF({self.char})"


QQ = Field(0)


def GF(p):
    return Field(p)


def coeff_str(c):
    """'num/den' (or an integer) for rationals, the residue for GF(p)."""
    return str(c)


@dataclass(frozen=True)
class OrdResult:
    """Certified valuation: exact, or a lower bound when the known
    coefficients are all zero."""
    kind: str
    value: int

    @property
    def exact(self):
        return self.kind == "exact"

    def __str__(self):
        return f"{'Exact' if self.exact else 'AtLeast'}({self.value})"


def Exact(k):
    return OrdResult("exact", k)


def AtLeast(p):
    return OrdResult("atleast", p)


class PowerSeries:
    __slots__ = ("field", "coeffs", "prec")

    def __init__(self, coeffs, prec=None, field=QQ):
        coeffs = list(coeffs)
        if prec is None:
            prec = len(coeffs)
        if prec < 0:
            raise DomainError("negative precision")
        cs = [field(c) for c in coeffs[:prec]]
        cs.extend([field.zero] * (prec - len(cs)))
        self.field = field
        self.coeffs = tuple(cs)
        self.prec = prec

    @classmethod
    def _raw(cls, coeffs, prec, field):
        s = object.__new__(cls)
        s.field = field
        s.coeffs = tuple(coeffs)
        s.prec = prec
        return s

    @classmethod
    def constant(cls, c, prec, field=QQ):
        return cls([c], prec, field)

    @classmethod
    def variable(cls, prec, field=QQ):
        return cls([0, 1], prec, field)

    @classmethod
    def monomial(cls, c, k, prec, field=QQ):
        return cls([0] * k + [c], prec, field)

    def coeff(self, k):
        if k >= self.prec:
            raise PrecisionError(f"coefficient {k} unknown at precision {self.prec}")
        return self.coeffs[k]

    def _check(self, o):
        if o.field != self.field:
            raise FieldMismatch(f"{self.field} vs {o.field}")

    def __add__(self, o):
        if not isinstance(o, PowerSeries):
            o = PowerSeries.constant(o, self.prec, self.field)
        self._check(o)
        p = min(self.prec, o.prec)
        return PowerSeries._raw([a + b for a, b in zip(self.coeffs[:p], o.coeffs[:p])], p, self.field)

    __radd__ = __add__

    def __neg__(self):
        return PowerSeries._raw([-a for a in self.coeffs], self.prec, self.field)

    def __sub__(self, o):
        if not isinstance(o, PowerSeries):
            o = PowerSeries.constant(o, self.prec, self.field)
        return self + (-o)

    def __rsub__(self, o):
        return (-self) + o

    def scale(self, c):
        c = self.field(c)
        return PowerSeries._raw([c * a for a in self.coeffs], self.prec, self.field)

    def __mul__(self, o):
        if not isinstance(o, PowerSeries):
            return self.scale(o)
        return ps_mul(self, o)

    __rmul__ = __mul__

    def __pow__(self, e):
        r = PowerSeries.constant(1, self.prec, self.field)
        b = self
        while e:
            if e & 1:
                r = r * b
            e >>= 1
            if e:
                b = b * b
        return r

    def ord(self):
        return ps_ord(self)

    def truncate(self, prec):
        prec = min(prec, self.prec)
        return PowerSeries._raw(self.coeffs[:prec], prec, self.field)

    def shift(self, k):
        """Multiply by z^k (exact, so precision grows by k)."""
        z = self.field.zero
        return PowerSeries._raw((z,) * k + self.coeffs, self.prec + k, self.field)

    def derivative(self):
        f = self.field
        return PowerSeries._raw([f(k) * self.coeffs[k] for k in range(1, self.prec)],
                                max(self.prec - 1, 0), f)

    def inverse(self):
        """1/self; only units (nonzero constant term) are invertible."""
        if self.prec == 0 or self.coeffs[0] == 0:
            raise DomainError("series is not a unit")
        c = self.coeffs
        inv0 = self.field.one / c[0]
        out = [inv0]
        for k in range(1, self.prec):
            s = self.field.zero
            for j in range(1, k + 1):
                if c[j]:
                    s = s + c[j] * out[k - j]
            out.append(-s * inv0)
        return PowerSeries._raw(out, self.prec, self.field)

    def __truediv__(self, o):
        if not isinstance(o, PowerSeries):
            return self.scale(self.field.one / self.field(o))
        return self * o.inverse()

    def compose(self, inner):
        return ps_compose(self, inner)

    def __eq__(self, o):
        return (isinstance(o, PowerSeries) and self.field == o.field
                and self.prec == o.prec and self.coeffs == o.coeffs)

    def __hash__(self):
        return hash((self.prec, self.coeffs))

    def agrees(self, o, prec=None):
        """Coefficientwise equality on the shared known range."""
        p = min(self.prec, o.prec) if prec is None else prec
        return self.coeffs[:p] == o.coeffs[:p]

    def __repr__(self):
        terms = [f"{c}*z^{k}" for k, c in enumerate(self.coeffs) if c]
        return f"PowerSeries({' + '.join(terms) or '0'}, prec={self.prec})"


def ps_mul(a, b):
    a._check(b)
    p = min(a.prec, b.prec)
    zero = a.field.zero
    out = [zero] * p
    bc = b.coeffs
    bnz = [(j, y) for j, y in enumerate(bc[:p]) if y]
    for i in range(p):
        x = a.coeffs[i]
        if not x:
            continue
        lim = p - i
        for j, y in bnz:
            if j >= lim:
                break
            out[i + j] += x * y
    return PowerSeries._raw(out, p, a.field)


def ps_ord(a):
    for k, c in enumerate(a.coeffs):
        if c:
            return Exact(k)
    return AtLeast(a.prec)


def ps_compose(outer, inner):
    """outer(inner(z)); needs inner(0) = 0.

    Output precision is min(inner.prec, outer.prec * ord(inner)) with the
    certified lower bound of ord(inner) used when it is not exact."""
    outer._check(inner)
    o = ps_ord(inner)
    k = o.value
    if k == 0:
        if o.exact:
            raise DomainError("inner series has a nonzero constant term")
        # prec 0 inner: nothing is known
        return PowerSeries._raw([], 0, outer.field)
    p = min(inner.prec, outer.prec * k)
    f = outer.field
    nz = [(j, c) for j, c in enumerate(inner.coeffs[:p]) if c]
    if len(nz) == 1 and o.exact:
        j0, c0 = nz[0]
        out = [f.zero] * p
        cp = f.one
        for j in range(outer.prec):
            e = j * j0
            if e >= p:
                break
            out[e] = outer.coeffs[j] * cp
            cp = cp * c0
        return PowerSeries._raw(out, p, f)
    jmax = min(outer.prec - 1, (p - 1) // k)
    inner_t = inner.truncate(p)
    acc = PowerSeries.constant(outer.coeffs[jmax], p, f)
    for j in range(jmax - 1, -1, -1):
        acc = ps_mul(acc, inner_t) + outer.coeffs[j]
    return acc


def series_from_ratfunc(num, den, prec, field=QQ):
    """Expansion of num/den (coefficient lists) to prec terms; den(0) != 0."""
    n = PowerSeries(num, prec, field)
    d = PowerSeries(den, prec, field)
    return n * d.inverse()


# ---------------------------------------------------------------- linear algebra

def _primitive(row):
    g = 0
    for x in row:
        if x:
            g = gcd(g, x)
            if g == 1:
                return row
    return [x // g for x in row] if g > 1 else row


def _rref_rational(rows):
    """Gauss-Jordan over Q on integer rows, dividing out row contents."""
    M = []
    for r in rows:
        r = [Fraction(x) for x in r]
        den = 1
        for x in r:
            den = den * x.denominator // gcd(den, x.denominator)
        M.append(_primitive([int(x * den) for x in r]))
    ncols = len(M[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(M)) if M[i][c]), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        p = M[r][c]
        for i in range(len(M)):
            if i != r and M[i][c]:
                f = M[i][c]
                g = gcd(p, f)
                a, b = p // g, f // g
                M[i] = _primitive([a * x - b * y for x, y in zip(M[i], M[r])])
        pivots.append(c)
        r += 1
        if r == len(M):
            break
    out = [[Fraction(x, M[i][c]) for x in M[i]] for i, c in enumerate(pivots)]
    return out, pivots


def rref(rows, field=QQ):
    """Reduced row echelon form over a field; returns (rows, pivot columns)."""
    if rows and field.char == 0:
        return _rref_rational(rows)
    M = [[field(x) for x in r] for r in rows]
    if not M:
        return [], []
    ncols = len(M[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(M)) if M[i][c]), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = field.one / M[r][c]
        M[r] = [x * inv for x in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c]:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == len(M):
            break
    return M[:r], pivots


def kernel(rows, ncols, field=QQ):
    """Basis of {v : rows . v = 0}, in reduced echelon form."""
    R, piv = rref(rows, field) if rows else ([], [])
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for fc in free:
        v = [field.zero] * ncols
        v[fc] = field.one
        for row, pc in zip(R, piv):
            v[pc] = -row[fc]
        basis.append(v)
    if not basis:
        return []
    K, _ = rref(basis, field)
    return K


def matrix_rank(rows, field=QQ):
    return len(rref(rows, field)[1]) if rows else 0


# ---------------------------------------------------------------- huge numbers

class Undecidable(DomainError):
    pass


class Tower:
    """The positive number m * b**E kept symbolic; m and E are rationals
    or Towers, b an integer >= 2. Built only when b**E is too large to hold."""

    __slots__ = ("m", "b", "E")

    def __init__(self, m, b, E):
        if b < 2:
            raise DomainError("tower base must be at least 2")
        self.m, self.b, self.E = m, b, E

    def __repr__(self):
        return f"Tower({big_str(self.m)}, {self.b}, {big_str(self.E)})"

    def __str__(self):
        return f"{big_str(self.m)} * {self.b}^({big_str(self.E)})"


def _bits_up(x):
    """An integer >= log2(x) for rational x >= 1."""
    x = Fraction(x)
    return (x.numerator // x.denominator).bit_length() + 1


def _bits_down(x):
    """An integer <= log2(x) for rational x >= 1."""
    x = Fraction(x)
    return max((x.numerator // x.denominator).bit_length() - 1, 0)


def make_big(m, b, E, max_bits=100000):
    """m * b**E, materialized when small enough."""
    if isinstance(m, Tower) or isinstance(E, Tower):
        return Tower(m, b, E)
    E = Fraction(E)
    b = Fraction(b)
    if b == 1 or E == 0:
        return Fraction(m)
    if E.denominator != 1 or b.denominator != 1:
        if E.denominator == 1 and b.denominator != 1:
            raise DomainError("non-integral tower base")
        return Tower(Fraction(m), int(b), E)
    if E * b.numerator.bit_length() <= max_bits:
        return Fraction(m) * b ** int(E)
    return Tower(Fraction(m), int(b), E)


def big_mul(x, c):
    """x * c for a positive rational c."""
    if isinstance(x, Tower):
        return Tower(big_mul(x.m, c), x.b, x.E)
    return Fraction(x) * c


def big_pow(x, k):
    if isinstance(x, Tower):
        return Tower(big_pow(x.m, k), x.b, big_mul(x.E, k))
    return Fraction(x) ** k


def big_add_small(x, c):
    """An upper bound for x + c with c >= 0 rational (exact for rationals)."""
    if isinstance(x, Tower):
        return Tower(big_add_small(x.m, c), x.b, x.E)
    return Fraction(x) + c


def _m_ok(x):
    return isinstance(x.m, Tower) or x.m >= 1


def big_gt(x, y):
    """x > y, decided exactly or raising Undecidable."""
    xt, yt = isinstance(x, Tower), isinstance(y, Tower)
    if not xt and not yt:
        return Fraction(x) > Fraction(y)
    if xt and not yt:
        y = Fraction(y)
        if y < 1:
            return True
        # x >= 2^E when m >= 1
        if _m_ok(x) and big_gt(x.E, _bits_up(y)):
            return True
        raise Undecidable(f"cannot compare {x!r} with a number")
    if yt and not xt:
        if big_gt(y, x):
            return False
        raise Undecidable(f"cannot compare a number with {y!r}")
    if x.b == y.b:
        # log_b x >= E_x when m_x >= 1, so E_x > an upper bound for log_b y decides
        if _m_ok(x) and big_gt(x.E, _log_up(y, x.b)):
            return True
        if _m_ok(y) and big_gt(y.E, _log_up(x, x.b)):
            return False
    raise Undecidable(f"cannot compare {x!r} with {y!r}")


def _log_up(x, b):
    """An upper bound for log_b max(x, 1)."""
    if not isinstance(x, Tower):
        return _bits_up(max(Fraction(x), 1))
    if x.b != b:
        raise Undecidable(f"towers in different bases {x.b} and {b}")
    S = _log_up(x.m, b)
    if not isinstance(x.E, Tower):
        return big_add_small(S, max(Fraction(x.E), 0)) if isinstance(S, Tower) else Fraction(x.E) + S
    if not isinstance(S, Tower):
        return big_add_small(x.E, S)
    return big_mul(big_max(x.E, S), 2)


def big_max(*xs):
    best = xs[0]
    for x in xs[1:]:
        if big_gt(x, best):
            best = x
    return best


def big_str(x, digits=60):
    if isinstance(x, Tower):
        return str(x)
    x = Fraction(x)
    if x.denominator == 1:
        if x.numerator.bit_length() > 3.3 * digits:
            return f"<integer ~ 2^{abs(x.numerator).bit_length() - 1}>"
        return str(x.numerator)
    if max(x.numerator.bit_length(), x.denominator.bit_length()) > 1.6 * digits:
        return f"<rational ~ 2^{_bits_down(x) if x >= 1 else -_bits_up(1 / x)}>"
    return s
