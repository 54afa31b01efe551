"""Exact coefficient arithmetic: Gaussian rationals and symbolic polynomials.

Scalars are polynomials in declared real parameters with Gaussian-rational
coefficients, times an integer power of the formal unit ``pi``.  Nothing is
ever evaluated in floating point; ``pi`` is never given a numeric value.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Union

RationalLike = Union[int, Fraction]


class Q:
    """A Gaussian rational a + b*i with exact Fraction components."""

    __slots__ = ("re", "im")

    def __init__(self, re: RationalLike = 0, im: RationalLike = 0):
        object.__setattr__(self, "re", Fraction(re))
        object.__setattr__(self, "im", Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("Q is immutable")

    def __add__(self, other: "Q") -> "Q":
        return Q(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "Q") -> "Q":
        return Q(self.re - other.re, self.im - other.im)

    def __neg__(self) -> "Q":
        return Q(-self.re, -self.im)

    def __mul__(self, other: "Q") -> "Q":
        return Q(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    def __truediv__(self, other: "Q") -> "Q":
        n = other.re * other.re + other.im * other.im
        if n == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return Q(
            (self.re * other.re + self.im * other.im) / n,
            (self.im * other.re - self.re * other.im) / n,
        )

    def __pow__(self, k: int) -> "Q":
        if k < 0:
            return QONE / self.__pow__(-k)
        out = QONE
        for _ in range(k):
            out = out * self
        return out

    def conjugate(self) -> "Q":
        return Q(self.re, -self.im)

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def is_real(self) -> bool:
        return self.im == 0

    def __eq__(self, other) -> bool:
        if not isinstance(other, Q):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __repr__(self):
        return "Q(%s, %s)" % (self.re, self.im)

    def __str__(self):
        return format_q(self)


QZERO = Q(0)
QONE = Q(1)
QI = Q(0, 1)


def _frac_str(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else "%d/%d" % (x.numerator, x.denominator)


def format_q(q: Q) -> str:
    """Canonical text for a Gaussian rational, e.g. ``-1/2``, ``i``, ``1+2*i``."""
    if q.im == 0:
        return _frac_str(q.re)
    if q.im == 1:
        im = "i"
    elif q.im == -1:
        im = "-i"
    else:
        im = _frac_str(q.im) + "*i"
    if q.re == 0:
        return im
    sign = "+" if q.im > 0 else "-"
    mag = im.lstrip("-")
    return "%s%s%s" % (_frac_str(q.re), sign, mag)


# A monomial is a sorted tuple of (parameter name, positive exponent) pairs.
Monomial = tuple


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    d = dict(a)
    for name, e in b:
        d[name] = d.get(name, 0) + e
    return tuple(sorted(d.items()))


def _mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def _mono_str(m: Monomial) -> str:
    parts = []
    for name, e in m:
        parts.append(name if e == 1 else "%s^%d" % (name, e))
    return "*".join(parts)


class Scalar:
    """Polynomial in parameters over Q, times pi**pi_power.

    The representation is canonical: monomials sorted, no zero coefficients.
    Sums require matching pi powers (zero is neutral); this keeps pi a formal
    unit factored out of every value the package produces.
    """

    __slots__ = ("pi_power", "terms")

    def __init__(self, terms: Mapping[Monomial, Q] = (), pi_power: int = 0):
        clean = {m: c for m, c in dict(terms).items() if not c.is_zero()}
        if not clean:
            pi_power = 0
        object.__setattr__(self, "terms", clean)
        object.__setattr__(self, "pi_power", pi_power)

    def __setattr__(self, name, value):
        raise AttributeError("Scalar is immutable")

    # -- constructors -------------------------------------------------------

    @staticmethod
    def from_q(q: Q, pi_power: int = 0) -> "Scalar":
        return Scalar({(): q}, pi_power)

    @staticmethod
    def rational(num: RationalLike, den: RationalLike = 1) -> "Scalar":
        return Scalar.from_q(Q(Fraction(num, den) if den != 1 else Fraction(num)))

    @staticmethod
    def imaginary(num: RationalLike = 1) -> "Scalar":
        return Scalar.from_q(Q(0, num))

    @staticmethod
    def parameter(name: str) -> "Scalar":
        return Scalar({((name, 1),): QONE})

    @staticmethod
    def pi(power: int = 1) -> "Scalar":
        return Scalar({(): QONE}, power)

    # -- structure ----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_real(self) -> bool:
        return all(c.is_real() for c in self.terms.values())

    def is_constant(self) -> bool:
        """No parameters (a pi power is still allowed)."""
        return all(m == () for m in self.terms)

    def as_q(self) -> Q:
        """The value as a plain Gaussian rational; parameters and pi rejected."""
        if self.is_zero():
            return QZERO
        if not self.is_constant() or self.pi_power != 0:
            raise ValueError("scalar %s is not a plain Gaussian rational" % self)
        return self.terms[()]

    def parameters(self) -> set:
        return {name for m in self.terms for name, _ in m}

    def degree(self, name: str = None) -> int:
        """Total degree, or degree in one parameter; zero scalar has degree -1."""
        if self.is_zero():
            return -1
        if name is None:
            return max(_mono_degree(m) for m in self.terms)
        return max(sum(e for nm, e in m if nm == name) for m in self.terms)

    # -- arithmetic ----------------------------------------------------------

    def _check_pi(self, other: "Scalar") -> int:
        if self.is_zero():
            return other.pi_power
        if other.is_zero():
            return self.pi_power
        if self.pi_power != other.pi_power:
            raise ValueError(
                "cannot add scalars with pi powers %d and %d"
                % (self.pi_power, other.pi_power)
            )
        return self.pi_power

    def __add__(self, other: "Scalar") -> "Scalar":
        power = self._check_pi(other)
        terms = dict(self.terms)
        for m, c in other.terms.items():
            terms[m] = terms.get(m, QZERO) + c
        return Scalar(terms, power)

    def __sub__(self, other: "Scalar") -> "Scalar":
        return self + (-other)

    def __neg__(self) -> "Scalar":
        return Scalar({m: -c for m, c in self.terms.items()}, self.pi_power)

    def __mul__(self, other: "Scalar") -> "Scalar":
        terms: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                terms[m] = terms.get(m, QZERO) + c1 * c2
        return Scalar(terms, self.pi_power + other.pi_power)

    def __truediv__(self, other: "Scalar") -> "Scalar":
        """Division by a parameter-free nonzero scalar (polynomial division is out of scope)."""
        if other.is_zero():
            raise ZeroDivisionError("division by zero scalar")
        if not other.is_constant():
            raise ValueError("division by non-constant scalar %s" % other)
        q = other.terms[()]
        return Scalar(
            {m: c / q for m, c in self.terms.items()},
            self.pi_power - other.pi_power,
        )

    def __pow__(self, k: int) -> "Scalar":
        if k < 0:
            raise ValueError("negative scalar power")
        out = ONE
        for _ in range(k):
            out = out * self
        return out

    def conjugate(self) -> "Scalar":
        """Complex conjugation; parameters and pi are real and stay fixed."""
        return Scalar({m: c.conjugate() for m, c in self.terms.items()}, self.pi_power)

    def substitute(self, values: Mapping[str, Union[RationalLike, Q]]) -> "Scalar":
        """Evaluate some parameters at exact rational values; pi stays formal."""
        out: dict = {}
        for m, c in self.terms.items():
            coeff = c
            rest = []
            for name, e in m:
                if name in values:
                    v = values[name]
                    base = v if isinstance(v, Q) else Q(Fraction(v))
                    coeff = coeff * base ** e
                else:
                    rest.append((name, e))
            key = tuple(rest)
            out[key] = out.get(key, QZERO) + coeff
        return Scalar(out, self.pi_power)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Scalar):
            return NotImplemented
        return self.pi_power == other.pi_power and self.terms == other.terms

    def __hash__(self):
        return hash((self.pi_power, tuple(sorted(self.terms.items()))))

    def __repr__(self):
        return "Scalar(%s)" % str(self)

    # -- printing ------------------------------------------------------------

    def _sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: (-_mono_degree(kv[0]), kv[0]))

    def __str__(self):
        if self.is_zero():
            return "0"
        content, rest = self._content()
        coeff_str = _coeff_piece(content) if content != QONE else None
        pi_str = None
        if self.pi_power:
            pi_str = "pi" if self.pi_power == 1 else "pi^%d" % self.pi_power
        poly = _poly_str(rest)
        poly_str = None
        if poly != "1":
            wrap = len(rest) > 1 and (coeff_str is not None or pi_str is not None)
            poly_str = "(%s)" % poly if wrap else poly
        pieces = [p for p in (coeff_str, pi_str, poly_str) if p is not None]
        if not pieces:
            return "1"
        out = "*".join(pieces)
        if out.startswith("-1*"):
            out = "-" + out[3:]
        return out

    def _content(self):
        """Factor out the rational content (with the leading term's sign)."""
        terms = self._sorted_terms()
        nums = []
        dens = []
        for _, c in terms:
            for x in (c.re, c.im):
                if x != 0:
                    nums.append(abs(x.numerator))
                    dens.append(x.denominator)
        g = 0
        for n in nums:
            g = _gcd(g, n)
        l = 1
        for d in dens:
            l = l * d // _gcd(l, d)
        content = Fraction(g, l)
        lead = terms[0][1]
        sign = 1
        if (lead.re < 0) or (lead.re == 0 and lead.im < 0):
            sign = -1
        content = content * sign
        rest = {m: Q(c.re / content, c.im / content) for m, c in self.terms.items()}
        return Q(content), rest


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def _coeff_piece(q: Q) -> str:
    s = format_q(q)
    if ("+" in s[1:]) or ("-" in s[1:]):
        return "(%s)" % s
    return s


def _poly_str(terms: Mapping[Monomial, Q]) -> str:
    items = sorted(terms.items(), key=lambda kv: (-_mono_degree(kv[0]), kv[0]))
    if not items:
        return "0"
    parts = []
    for m, c in items:
        mono = _mono_str(m)
        if not mono:
            piece = format_q(c)
        elif c == QONE:
            piece = mono
        elif c == Q(-1):
            piece = "-" + mono
        else:
            piece = "%s*%s" % (_coeff_piece(c), mono)
        if parts and not piece.startswith("-"):
            parts.append("+" + piece)
        else:
            parts.append(piece)
    return "".join(parts)


ZERO = Scalar()
ONE = Scalar.rational(1)
I = Scalar.imaginary(1)
MINUS_ONE = Scalar.rational(-1)


def scalar(value: Union[int, Fraction, Q, Scalar]) -> Scalar:
    """Coerce ints, Fractions and Q values into Scalars."""
    if isinstance(value, Scalar):
        return value
    if isinstance(value, Q):
        return Scalar.from_q(value)
    return Scalar.rational(Fraction(value))
