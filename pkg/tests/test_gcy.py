from fractions import Fraction

import pytest

from conftest import random_form
from gcalg.forms import Form, exp_two_form, integrate, mukai, reversal, wedge
from gcalg.gcy import (
    GCYError,
    dh_density,
    dh_normalization,
    gcy_check,
    lefschetz_check,
    quotient_family,
    volume_form,
)
from gcalg.models import torus
from gcalg.scalars import I, ONE, Q, Scalar


def dz(n, j):
    return Form.generator(n, 2 * j - 1) + Form.generator(n, 2 * j).scale(I)


def symplectic_exponential(n):
    omega = Form.zero(n)
    for j in range(1, n // 2 + 1):
        omega = omega + Form.monomial(n, (2 * j - 1, 2 * j))
    return exp_two_form(omega.scale(I)), omega


def test_gcy_check_examples():
    t2 = torus(2)
    rho, _ = symplectic_exponential(2)
    g = gcy_check(t2, rho)
    assert g.pairing == Scalar.imaginary(-2)
    assert g.flags is not None and g.flags.nondegenerate

    t4 = torus(4)
    c = Form.monomial(4, (1, 2))
    rho1 = wedge(exp_two_form(c.scale(-I)), dz(4, 2))
    g1 = gcy_check(t4, rho1)
    assert g1.half_dim == 2

    with pytest.raises(GCYError, match="vanishes"):
        gcy_check(t4, dz(4, 2))


def test_gcy_check_closedness_and_samples():
    from gcalg.models import heisenberg3, kodaira_thurston

    kt = kodaira_thurston()
    with pytest.raises(GCYError, match="twisted-closed"):
        gcy_check(kt, Form.generator(4, 3) + Form.generator(4, 4).scale(I))

    t4 = torus(4)
    t = Scalar.parameter("t")
    rho_t = wedge(exp_two_form(Form.monomial(4, (1, 2), -(I * t))), dz(4, 2))
    with pytest.raises(GCYError, match="sample"):
        gcy_check(t4, rho_t)  # parametric without samples
    g = gcy_check(t4, rho_t, samples=[{"t": Fraction(1)}])
    assert g.pairing == Scalar.rational(4) * t
    # the member at t = 0 degenerates, and the sample check reports it
    with pytest.raises(GCYError, match="vanishes at sample"):
        gcy_check(t4, rho_t, samples=[{"t": Fraction(0)}])


def test_volume_form_examples():
    t2 = torus(2)
    rho2, _ = symplectic_exponential(2)
    assert volume_form(gcy_check(t2, rho2)) == Form.monomial(2, (1, 2))

    t4 = torus(4)
    rho4, omega4 = symplectic_exponential(4)
    vol = volume_form(gcy_check(t4, rho4))
    half_sq = wedge(omega4, omega4).scale(ONE / Scalar.rational(2))
    assert vol == half_sq == Form.monomial(4, (1, 2, 3, 4))

    rho_c = wedge(dz(4, 1), dz(4, 2))
    assert volume_form(gcy_check(t4, rho_c)) == Form.monomial(4, (1, 2, 3, 4))


def test_volume_form_symplectic_up_to_dim_six():
    t6 = torus(6)
    rho6, omega6 = symplectic_exponential(6)
    vol = volume_form(gcy_check(t6, rho6))
    cube = wedge(wedge(omega6, omega6), omega6).scale(ONE / Scalar.rational(6))
    assert vol == cube


def test_quotient_family_examples():
    t4 = torus(4)
    rho, _ = symplectic_exponential(4)
    fam0 = quotient_family(t4, rho, Form.zero(4), "t")
    assert fam0.rho == rho  # zero twist: constant family

    c = Form.monomial(4, (1, 2))
    rho1 = wedge(exp_two_form(c.scale(-I)), dz(4, 2))
    fam1 = quotient_family(t4, rho1, c, "t")
    t = Scalar.parameter("t")
    expect = wedge(exp_two_form(c.scale(-(I * (t + ONE)))), dz(4, 2))
    assert fam1.rho == expect

    rho2 = wedge(dz(4, 1), dz(4, 2))
    fam2 = quotient_family(t4, rho2, c, "t")
    assert fam2.rho == rho2  # c ^ dz1 = 0 makes the family constant

    from gcalg.models import heisenberg3, kodaira_thurston
    kt = kodaira_thurston()
    with pytest.raises(GCYError, match="not closed"):
        quotient_family(kt, rho2, Form.monomial(4, (3, 4)), "t")


def test_dh_normalization_values():
    # n=3, k=1: the printed prefactor
    assert dh_normalization(3, 1) == Scalar.rational(-1, 2) * Scalar.pi()
    assert str(dh_normalization(3, 1)) == "-1/2*pi"
    assert dh_normalization(1, 0) == Scalar.imaginary(1) / Scalar.rational(2)


def test_dh_density_worked_values():
    t4 = torus(4)
    c = Form.monomial(4, (1, 2))
    rho1 = wedge(exp_two_form(c.scale(-I)), dz(4, 2))
    fam1 = quotient_family(t4, rho1, c, "t")
    r1 = dh_density(fam1, 3, 1, orientation=1)
    t = Scalar.parameter("t")
    assert r1.density == Scalar.rational(-2) * Scalar.pi() * (t + ONE)
    assert str(r1.density) == "-2*pi*(t+1)"
    assert r1.degree_bound == 2 and r1.real

    rho2 = wedge(dz(4, 1), dz(4, 2))
    fam2 = quotient_family(t4, rho2, c, "t")
    r2 = dh_density(fam2, 3, 1, orientation=-1)
    assert r2.density == Scalar.rational(-2) * Scalar.pi()
    assert str(r2.density) == "-2*pi"

    # fiberless symplectic torus: constant density equal to the volume
    t2 = torus(2)
    rho, _ = symplectic_exponential(2)
    fam = quotient_family(t2, rho, Form.zero(2), "t")
    r0 = dh_density(fam, 1, 0)
    assert r0.density == ONE


def test_dh_density_type_bounds():
    t4 = torus(4)
    c = Form.monomial(4, (1, 2))
    rho1 = wedge(exp_two_form(c.scale(-I)), dz(4, 2))
    fam1 = quotient_family(t4, rho1, c, "t")
    assert dh_density(fam1, 3, 1, 1, constant_type=1).degree_bound == 1

    rho2 = wedge(dz(4, 1), dz(4, 2))
    fam2 = quotient_family(t4, rho2, c, "t")
    assert dh_density(fam2, 3, 1, -1, constant_type=2).degree_bound == 0
    # declaring too large a type breaks the bound and is reported
    with pytest.raises(GCYError, match="degree"):
        dh_density(fam1, 3, 1, 1, constant_type=2)


def test_dh_density_dimension_check():
    t2 = torus(2)
    rho, _ = symplectic_exponential(2)
    fam = quotient_family(t2, rho, Form.zero(2), "t")
    with pytest.raises(GCYError, match="generators"):
        dh_density(fam, 3, 1)


def test_dh_density_b_transform_invariance(rng):
    t4 = torus(4)
    c = Form.monomial(4, (1, 2))
    rho1 = wedge(exp_two_form(c.scale(-I)), dz(4, 2))
    fam1 = quotient_family(t4, rho1, c, "t")
    reference = dh_density(fam1, 3, 1, 1).density
    for _ in range(8):
        b = random_form(rng, 4, degrees={2}, complex_ok=False)
        sheared = wedge(exp_two_form(-b), fam1.rho)
        pairing = wedge(reversal(sheared), sheared.conjugate())
        density = dh_normalization(3, 1) * integrate(pairing)
        assert density == reference


def test_dh_density_is_real(rng):
    t4 = torus(4)
    c = Form.monomial(4, (1, 2))
    # the symplectic member degenerates exactly at t = 1 (omega - c loses rank),
    # so its sample points must avoid it
    samples = [{"t": Fraction(0)}, {"t": Fraction(3)}]
    for rho in (
        wedge(exp_two_form(c.scale(-I)), dz(4, 2)),
        wedge(dz(4, 1), dz(4, 2)),
        symplectic_exponential(4)[0],
    ):
        fam = quotient_family(t4, rho, c, "t", samples=samples)
        assert dh_density(fam, 3, 1, 1).real


def test_lefschetz_examples():
    t2 = torus(2)
    assert lefschetz_check(t2, Form.monomial(2, (1, 2))).ok
    t4 = torus(4)
    omega = Form.monomial(4, (1, 2)) + Form.monomial(4, (3, 4))
    assert lefschetz_check(t4, omega).ok
    rep = lefschetz_check(t4, Form.monomial(4, (1, 2)))
    assert not rep.ok and "degenerate" in rep.detail
