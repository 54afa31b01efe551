"""Sparse exact exterior algebra on N degree-1 generators.

A Form maps index subsets (stored as bitmasks, bit i-1 for generator e_i) to
Scalar coefficients.  All operations are pure; values are immutable after
construction and safe to share.
"""

from __future__ import annotations

from math import factorial
from typing import Iterable, Sequence

from .scalars import ONE, Scalar, ZERO, scalar


def _merge_sign(a: int, b: int) -> int:
    """Sign of sorting the concatenation e_a . e_b of two disjoint masks."""
    sign = 1
    bits = b
    while bits:
        low = bits & -bits
        if (a >> low.bit_length()).bit_count() & 1:
            sign = -sign
        bits ^= low
    return sign


def _mask_indices(mask: int) -> tuple:
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def _indices_mask(indices: Iterable[int]) -> int:
    mask = 0
    for i in indices:
        bit = 1 << (i - 1)
        if mask & bit:
            raise ValueError("repeated generator index %d" % i)
        mask |= bit
    return mask


class Form:
    """Sparse multivector over N generators with Scalar coefficients."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms=()):
        if n < 0:
            raise ValueError("negative generator count")
        clean = {}
        for mask, coeff in dict(terms).items():
            if mask >> n:
                raise ValueError("term %s outside %d generators" % (bin(mask), n))
            if not coeff.is_zero():
                clean[mask] = coeff
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("Form is immutable")

    # -- constructors --------------------------------------------------------

    @staticmethod
    def zero(n: int) -> "Form":
        return Form(n)

    @staticmethod
    def unit(n: int, coeff: Scalar = ONE) -> "Form":
        return Form(n, {0: coeff})

    @staticmethod
    def generator(n: int, i: int) -> "Form":
        if not 1 <= i <= n:
            raise ValueError("generator index %d out of range 1..%d" % (i, n))
        return Form(n, {1 << (i - 1): ONE})

    @staticmethod
    def monomial(n: int, indices: Sequence[int], coeff: Scalar = ONE) -> "Form":
        for i in indices:
            if not 1 <= i <= n:
                raise ValueError("generator index %d out of range 1..%d" % (i, n))
        idx = list(indices)
        sign = 1
        for a in range(len(idx)):
            for b in range(a + 1, len(idx)):
                if idx[a] > idx[b]:
                    idx[a], idx[b] = idx[b], idx[a]
                    sign = -sign
        c = coeff if sign == 1 else -coeff
        return Form(n, {_indices_mask(idx): c})

    # -- structure -----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def degrees(self) -> set:
        return {mask.bit_count() for mask in self.terms}

    def is_homogeneous(self, degree: int = None) -> bool:
        degs = self.degrees()
        if degree is None:
            return len(degs) <= 1
        return degs <= {degree}

    def degree_part(self, degree: int) -> "Form":
        return Form(self.n, {m: c for m, c in self.terms.items() if m.bit_count() == degree})

    def parity_part(self, parity: int) -> "Form":
        return Form(self.n, {m: c for m, c in self.terms.items() if m.bit_count() % 2 == parity})

    def coefficient(self, indices: Sequence[int]) -> Scalar:
        return self.terms.get(_indices_mask(indices), ZERO)

    def top_coefficient(self) -> Scalar:
        return self.terms.get((1 << self.n) - 1, ZERO)

    def parameters(self) -> set:
        out = set()
        for c in self.terms.values():
            out |= c.parameters()
        return out

    # -- linear operations ----------------------------------------------------

    def _check(self, other: "Form"):
        if self.n != other.n:
            raise ValueError(
                "generator count mismatch: %d vs %d" % (self.n, other.n)
            )

    def __add__(self, other: "Form") -> "Form":
        self._check(other)
        terms = dict(self.terms)
        for m, c in other.terms.items():
            terms[m] = terms.get(m, ZERO) + c
        return Form(self.n, terms)

    def __sub__(self, other: "Form") -> "Form":
        return self + (-other)

    def __neg__(self) -> "Form":
        return Form(self.n, {m: -c for m, c in self.terms.items()})

    def scale(self, coeff) -> "Form":
        c = scalar(coeff)
        return Form(self.n, {m: c * x for m, x in self.terms.items()})

    def conjugate(self) -> "Form":
        return Form(self.n, {m: c.conjugate() for m, c in self.terms.items()})

    def substitute(self, values) -> "Form":
        return Form(self.n, {m: c.substitute(values) for m, c in self.terms.items()})

    def __eq__(self, other) -> bool:
        if not isinstance(other, Form):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    def __hash__(self):
        return hash((self.n, tuple(sorted(self.terms.items()))))

    # -- printing --------------------------------------------------------------

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return "Form(%d, %s)" % (self.n, self.to_text())

    def to_text(self, names: Sequence[str] = None) -> str:
        if self.is_zero():
            return "0"
        parts = []
        for mask in sorted(self.terms, key=lambda m: (m.bit_count(), _mask_indices(m))):
            coeff = self.terms[mask]
            idx = _mask_indices(mask)
            gens = "^".join(
                names[i - 1] if names else "e%d" % i for i in idx
            )
            cs = str(coeff)
            if not gens:
                piece = cs if _atomic(cs) else "(%s)" % cs
            elif cs == "1":
                piece = gens
            elif cs == "-1":
                piece = "-" + gens
            else:
                piece = "%s*%s" % (cs if _atomic(cs) else "(%s)" % cs, gens)
            if parts and not piece.startswith("-"):
                parts.append("+" + piece)
            else:
                parts.append(piece)
        return "".join(parts)


def _atomic(s: str) -> bool:
    """True when a scalar string needs no parentheses inside a product."""
    depth = 0
    for ch in s[1:]:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch in "+-" and depth == 0:
            return False
    return True


# -- exterior operations -------------------------------------------------------


def wedge(a: Form, b: Form) -> Form:
    """Exterior product; signs from the transposition count of merged subsets."""
    a._check(b)
    terms: dict = {}
    for ma, ca in a.terms.items():
        for mb, cb in b.terms.items():
            if ma & mb:
                continue
            m = ma | mb
            c = ca * cb
            if _merge_sign(ma, mb) < 0:
                c = -c
            terms[m] = terms.get(m, ZERO) + c
    return Form(a.n, terms)


def wedge_all(forms: Sequence[Form]) -> Form:
    if not forms:
        raise ValueError("empty wedge")
    out = forms[0]
    for f in forms[1:]:
        out = wedge(out, f)
    return out


def contract(i: int, a: Form) -> Form:
    """Interior product with the i-th frame vector; graded derivation of degree -1."""
    if not 1 <= i <= a.n:
        raise ValueError("contraction index %d out of range 1..%d" % (i, a.n))
    bit = 1 << (i - 1)
    terms: dict = {}
    for m, c in a.terms.items():
        if not m & bit:
            continue
        below = (m & (bit - 1)).bit_count()
        terms[m ^ bit] = c if below % 2 == 0 else -c
    return Form(a.n, terms)


def contract_vector(coords: Sequence[Scalar], a: Form) -> Form:
    """Interior product with sum(coords[i] * frame vector i+1)."""
    if len(coords) != a.n:
        raise ValueError("vector length %d does not match %d generators" % (len(coords), a.n))
    out = Form.zero(a.n)
    for i, c in enumerate(coords, start=1):
        c = scalar(c)
        if not c.is_zero():
            out = out + contract(i, a).scale(c)
    return out


def reversal(a: Form) -> Form:
    """Order reversal on decomposables: degree q picks up (-1)^(q(q-1)/2)."""
    terms = {}
    for m, c in a.terms.items():
        q = m.bit_count()
        terms[m] = c if (q * (q - 1) // 2) % 2 == 0 else -c
    return Form(a.n, terms)


def mukai(a: Form, b: Form) -> Scalar:
    """Top-degree coefficient of reversal(a) wedged with b."""
    a._check(b)
    full = (1 << a.n) - 1
    out = ZERO
    for ma, ca in a.terms.items():
        mb = full ^ ma
        cb = b.terms.get(mb)
        if cb is None:
            continue
        q = ma.bit_count()
        c = ca * cb
        if (q * (q - 1) // 2) % 2 == 1:
            c = -c
        if _merge_sign(ma, mb) < 0:
            c = -c
        out = out + c
    return out


def exp_two_form(b: Form) -> Form:
    """Finite exponential sum for a homogeneous degree-2 form."""
    if not b.is_homogeneous(2) and not b.is_zero():
        raise ValueError("exponential argument must be homogeneous of degree 2, got %s" % b)
    out = Form.unit(b.n)
    power = Form.unit(b.n)
    for k in range(1, b.n // 2 + 1):
        power = wedge(power, b)
        if power.is_zero():
            break
        out = out + power.scale(Scalar.rational(1, factorial(k)))
    return out


def clifford(v: Sequence, a: Form) -> Form:
    """Clifford action of X + xi on a form: contraction by X plus wedge by xi."""
    if len(v) != 2 * a.n:
        raise ValueError(
            "vector length %d does not match V+V* dimension %d" % (len(v), 2 * a.n)
        )
    coords = [scalar(c) for c in v]
    xi = Form(a.n, {1 << i: coords[a.n + i] for i in range(a.n)})
    return contract_vector(coords[: a.n], a) + wedge(xi, a)


def canonical_pairing(v: Sequence, w: Sequence, n: int) -> Scalar:
    """Split-signature pairing on V+V*: <X+xi, Y+eta> = (eta(X) + xi(Y)) / 2."""
    if len(v) != 2 * n or len(w) != 2 * n:
        raise ValueError("vectors must have length %d" % (2 * n))
    acc = ZERO
    for i in range(n):
        acc = acc + scalar(v[i]) * scalar(w[n + i]) + scalar(w[i]) * scalar(v[n + i])
    return acc / Scalar.rational(2)


def integrate(a: Form, volume: Scalar = ONE, orientation: int = 1) -> Scalar:
    """Total integral on the model: orientation * volume * top coefficient."""
    if orientation not in (1, -1):
        raise ValueError("orientation must be +1 or -1")
    out = a.top_coefficient() * volume
    return out if orientation == 1 else -out
