from fractions import Fraction

import pytest

from gcalg.cartan import EqForm
from gcalg.forms import Form, exp_two_form, wedge
from gcalg.modelfile import (
    ModelFileError,
    ParseError,
    parse_form_text,
    parse_model,
    parse_scalar_text,
)
from gcalg.models import torus
from gcalg.scalars import I, ONE, Scalar

T3 = """
model demo
generators e1 e2 e3
H = 1 * e1^e2^e3
"""


def test_parse_simple_twist():
    mf = parse_model(T3)
    assert mf.name == "demo"
    assert mf.model.H == Form.monomial(3, (1, 2, 3))


def test_parse_spinor_expression():
    text = """
model demo
generators e1 e2
let rho = e1 + i*e2
"""
    mf = parse_model(text)
    assert mf.values["rho"] == Form.generator(2, 1) + Form.generator(2, 2).scale(I)


def test_parse_family_expression():
    text = """
model demo
generators e1 e2 e3 e4
params t
let c = e1^e2
let rho1 = exp(-i*(t+1)*c) ^ (e3 + i*e4)
"""
    mf = parse_model(text)
    t = Scalar.parameter("t")
    c = Form.monomial(4, (1, 2))
    dz2 = Form.generator(4, 3) + Form.generator(4, 4).scale(I)
    expect = wedge(exp_two_form(c.scale(-(I * (t + ONE)))), dz2)
    assert mf.values["rho1"] == expect


def test_round_trip_form_printing():
    mf = parse_model(T3)
    examples = [
        "e1+i*e2",
        "1+i*e1^e2",
        "1/2*e2-2*e1^e3",
        "(1+i)*e1",
        "(t+1)*e2",
    ]
    model = torus(3)
    for text in examples:
        form = parse_form_text(text, model, params=["t"])
        assert form.to_text() == text
        assert parse_form_text(form.to_text(), model, params=["t"]) == form


def test_parse_errors_with_locations():
    with pytest.raises(ParseError) as err:
        parse_model("model demo\ngenerators e1 e2\nlet a = e1 + $")
    assert err.value.line == 3

    with pytest.raises(ParseError) as err:
        parse_model("model demo\ngenerators e1 e2\nlet a = e9")
    assert "undeclared symbol" in err.value.reason

    with pytest.raises(ParseError) as err:
        parse_model("model demo\ngenerators e1 e2\nlet a = (e1 + e2")
    assert err.value.line == 3

    with pytest.raises(ParseError):
        parse_model("generators e1")  # missing header


def test_validation_errors_are_domain_errors():
    bad = """
model bad
generators e1 e2 e3 e4 e5
d e5 = e1^e2 + e3^e4
H = e1^e2^e5
"""
    with pytest.raises(ModelFileError, match="not closed"):
        parse_model(bad)
    bad2 = """
model bad2
generators e1 e2 e3 e4
d e3 = e1^e2
d e4 = e3^e4
"""
    with pytest.raises(ModelFileError, match="not a differential"):
        parse_model(bad2)


def test_parse_structure_blocks():
    text = """
model demo
generators e1 e2
let omega = e1^e2
structure Jw symplectic omega
structure Jc complex
structure Jm matrix
  0 0 0 -1
  0 0 1 0
  0 -1 0 0
  1 0 0 0
end
"""
    mf = parse_model(text)
    assert set(mf.structures) == {"Jw", "Jc", "Jm"}
    assert mf.structures["Jw"] == mf.structures["Jm"]


def test_parse_action_connection_and_eqform():
    text = """
model demo
generators e1 e2
action rot
  xi 1 = 1 0
  mu 1 = e2
  alpha 1 = 0
end
connection th for rot
  theta 1 = e1
end
eqform g for rot = x1*e2 + 1
"""
    mf = parse_model(text)
    act = mf.actions["rot"]
    assert act.k == 1
    assert act.mu_diff[0] == Form.generator(2, 2)
    conn = mf.connections["th"]
    assert conn.theta[0] == Form.generator(2, 1)
    g = mf.values["g"]
    assert isinstance(g, EqForm)
    assert g.component((1,)) == Form.generator(2, 2)
    assert g.component((0,)) == Form.unit(2)


def test_eqform_power_round_trip():
    text = """
model demo
generators e1 e2
action rot
  xi 1 = 1 0
end
eqform g for rot = x1^2*e2 + x1*(e1^e2)
"""
    mf = parse_model(text)
    g = mf.values["g"]
    assert g.component((2,)) == Form.generator(2, 2)
    assert g.component((1,)) == Form.monomial(2, (1, 2))
    # printed text re-parses to the same value
    text2 = "model demo\ngenerators e1 e2\naction rot\n  xi 1 = 1 0\nend\n" \
        "eqform h for rot = " + g.to_text() + "\n"
    mf2 = parse_model(text2)
    assert mf2.values["h"] == g


def test_parse_samples_and_negative_rationals():
    text = """
model demo
generators e1 e2
params t
samples t = 0, 1, -1/2
"""
    mf = parse_model(text)
    assert mf.samples["t"] == [Fraction(0), Fraction(1), Fraction(-1, 2)]


def test_scalar_round_trip_through_parser():
    for text in ("-2*pi*(t+1)", "4*(t+1)", "-2*pi", "1/2*pi", "t^2+2"):
        val = parse_scalar_text(text, params=["t"])
        assert str(val) == text


def test_power_and_division_semantics():
    model = torus(2)
    assert parse_form_text("2^2", model) == Form.unit(2, Scalar.rational(4))
    assert parse_form_text("e1^e2", model) == Form.monomial(2, (1, 2))
    assert parse_form_text("e1^2", model).is_zero()  # iterated wedge
    assert parse_scalar_text("pi^2").pi_power == 2
    assert parse_scalar_text("1/2") == Scalar.rational(1, 2)
    with pytest.raises(ParseError):
        parse_form_text("e1/e2", model)
    with pytest.raises(ParseError):
        parse_form_text("1/t", model, params=["t"])
    with pytest.raises(ParseError):
        parse_form_text("exp(e1)", model)
