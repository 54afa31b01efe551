"""Generalized Calabi-Yau verification and exact push-forward densities.

A structure is a twisted-closed form whose Mukai pairing with its conjugate
is nonvanishing; parametric families are handled symbolically, with
nonvanishing checked at declared rational parameter samples.  The density of
the push-forward measure is an exact polynomial in the level parameter times
a power of the formal unit pi.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Optional, Sequence, Tuple

from . import linalg
from .forms import Form, integrate, mukai, reversal, wedge
from .gcmaps import AnnihilatorReport, annihilator
from .models import Model, d_twisted
from .scalars import ONE, Scalar

Sample = Dict[str, Fraction]


class GCYError(ValueError):
    pass


@dataclass(frozen=True)
class GCYStructure:
    """Verified twisted-closed form with nonvanishing self-pairing."""

    model: Model
    rho: Form
    half_dim: int
    pairing: Scalar  # mukai(rho, conj rho), symbolic in the parameters
    samples: Tuple[Sample, ...] = ()
    flags: Optional[AnnihilatorReport] = None


def gcy_check(
    model: Model, rho: Form, samples: Sequence[Sample] = ()
) -> GCYStructure:
    """Verify closedness symbolically and nondegeneracy at the samples."""
    if rho.n != model.n:
        raise GCYError("form lives on the wrong frame")
    if model.n % 2 != 0:
        raise GCYError("generalized structures need an even-dimensional model")
    res = d_twisted(model, rho)
    if not res.is_zero():
        raise GCYError(
            "form is not twisted-closed: residual %s" % res.to_text(model.names)
        )
    pairing = mukai(rho, rho.conjugate())
    points = [dict(s) for s in samples]
    if rho.parameters() and not points:
        raise GCYError("parametric structure needs at least one sample point")
    if points:
        for pt in points:
            value = pairing.substitute(pt)
            if value.is_zero():
                raise GCYError(
                    "pairing vanishes at sample %s" % _sample_text(pt)
                )
    elif pairing.is_zero():
        raise GCYError("pairing with the conjugate vanishes identically")
    flags = None
    if not rho.parameters():
        flags = annihilator(rho)
    elif points:
        flags = annihilator(rho.substitute(points[0]))
    return GCYStructure(
        model=model,
        rho=rho,
        half_dim=model.n // 2,
        pairing=pairing,
        samples=tuple(_freeze(p) for p in points),
        flags=flags,
    )


def _freeze(p: Sample):
    return tuple(sorted(p.items()))


def _sample_text(p: Sample) -> str:
    return ", ".join("%s=%s" % (k, v) for k, v in sorted(p.items()))


def volume_form(g: GCYStructure) -> Form:
    """Top form (-1)^n / (2i)^n times the self-pairing, n the half-dimension."""
    n = g.half_dim
    top = wedge(reversal(g.rho), g.rho.conjugate()).degree_part(g.model.n)
    factor = (Scalar.rational(-1) / Scalar.imaginary(2)) ** n
    return top.scale(factor)


@dataclass(frozen=True)
class GCYFamily:
    """One-parameter family of structures sharing a closed 2-form twist."""

    structure: GCYStructure
    param: str
    base: Form
    twist: Form

    @property
    def model(self) -> Model:
        return self.structure.model

    @property
    def rho(self) -> Form:
        return self.structure.rho

    def member(self, value) -> Form:
        return self.rho.substitute({self.param: Fraction(value)})


def quotient_family(
    model: Model,
    rho: Form,
    c: Form,
    param: str,
    samples: Sequence[Sample] = (),
) -> GCYFamily:
    """Family exp(-i t c) ^ rho over a closed 2-form, verified memberwise tests."""
    from .forms import exp_two_form
    from .models import d as d_plain

    if not (c.is_zero() or c.is_homogeneous(2)):
        raise GCYError("family twist must be a 2-form")
    dc = d_plain(model, c)
    if not dc.is_zero():
        raise GCYError("family twist is not closed: %s" % dc.to_text(model.names))
    t = Scalar.parameter(param)
    shear = exp_two_form(c.scale(-(Scalar.imaginary(1) * t)))
    rho_t = wedge(shear, rho)
    pts = list(samples) if samples else [{param: Fraction(0)}, {param: Fraction(1)}]
    structure = gcy_check(model, rho_t, pts)
    return GCYFamily(structure=structure, param=param, base=rho, twist=c)


@dataclass(frozen=True)
class DHResult:
    """Exact density of the push-forward measure on regular values."""

    density: Scalar
    n: int
    k: int
    degree_bound: int
    normalization: Scalar
    real: bool

    def degree(self) -> int:
        return max(self.density.degree(), 0)


def dh_normalization(n: int, k: int) -> Scalar:
    """(-1)^(n + k(k+1)/2) (2 pi)^k / (2i)^(n-k) as an exact scalar."""
    if not 0 <= k <= n:
        raise ValueError("torus rank k must satisfy 0 <= k <= n")
    sign = -1 if (n + k * (k + 1) // 2) % 2 else 1
    out = Scalar.rational(sign) * (Scalar.rational(2) * Scalar.pi()) ** k
    out = out * (ONE / Scalar.imaginary(2)) ** (n - k)
    return out


def dh_density(
    fam: GCYFamily,
    n: int,
    k: int,
    orientation: int = 1,
    constant_type: Optional[int] = None,
) -> DHResult:
    """Exact density: normalization times the integrated self-pairing.

    The quotient model must have 2(n-k) generators; the result is a
    polynomial in the family parameter of degree at most n-k, and at most
    n-k-p when a constant type p is declared.
    """
    model = fam.model
    if model.n != 2 * (n - k):
        raise GCYError(
            "quotient model has %d generators, expected 2(n-k) = %d"
            % (model.n, 2 * (n - k))
        )
    rho_t = fam.rho
    pairing = wedge(reversal(rho_t), rho_t.conjugate())
    norm = dh_normalization(n, k)
    density = norm * integrate(pairing, model.volume, orientation)
    bound = n - k
    if constant_type is not None:
        if constant_type < 0:
            raise ValueError("constant type must be nonnegative")
        bound = n - k - constant_type
    deg = density.degree(fam.param)
    if deg > bound:
        raise GCYError(
            "density degree %d exceeds the bound %d: conventions bug" % (deg, bound)
        )
    return DHResult(
        density=density,
        n=n,
        k=k,
        degree_bound=bound,
        normalization=norm,
        real=density.is_real(),
    )


@dataclass(frozen=True)
class LefschetzReport:
    ok: bool
    witness: Optional[Form] = None
    detail: str = ""


def lefschetz_check(model: Model, omega: Form) -> LefschetzReport:
    """Exact bijectivity of wedging 1-forms with omega^(n-1).

    On an invariant model this pins down rigidity: the only invariant closed
    sections proportional to the symplectic exponential have constant
    coefficient.
    """
    if model.n % 2 != 0:
        raise ValueError("model dimension must be even")
    if not omega.is_homogeneous(2) or omega.is_zero():
        raise ValueError("need a nonzero homogeneous 2-form")
    n = model.n // 2
    power = Form.unit(model.n)
    for _ in range(n):
        power = wedge(power, omega)
    if power.top_coefficient().is_zero():
        return LefschetzReport(
            ok=False, detail="2-form is degenerate: top power vanishes"
        )
    mid = Form.unit(model.n)
    for _ in range(n - 1):
        mid = wedge(mid, omega)
    masks_in = [1 << i for i in range(model.n)]
    masks_out = sorted(
        (m for m in range(1 << model.n) if m.bit_count() == 2 * n - 1),
        key=lambda m: (m.bit_count(), m),
    )
    cols = []
    for mk in masks_in:
        img = wedge(mid, Form(model.n, {mk: ONE}))
        cols.append([img.terms.get(mo, Scalar()).as_q() for mo in masks_out])
    mat = [[cols[c][r] for c in range(len(cols))] for r in range(len(masks_out))]
    kernel = linalg.kernel_basis(mat, ncols=len(masks_in))
    if kernel:
        witness = Form(
            model.n,
            {mk: Scalar.from_q(c) for mk, c in zip(masks_in, kernel[0])},
        )
        return LefschetzReport(
            ok=False, witness=witness,
            detail="kernel witness %s" % witness.to_text(model.names),
        )
    return LefschetzReport(ok=True)
