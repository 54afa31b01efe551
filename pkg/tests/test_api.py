import pytest

import gcalg
from gcalg import Form, Model, Scalar, torus


def test_public_names_resolve():
    for name in gcalg.__all__:
        assert getattr(gcalg, name) is not None


def test_values_are_immutable():
    s = Scalar.rational(2)
    with pytest.raises(AttributeError):
        s.pi_power = 1
    f = Form.generator(2, 1)
    with pytest.raises(AttributeError):
        f.n = 3
    m = torus(2)
    with pytest.raises(AttributeError):
        m.H = f
    act = gcalg.TorusAction(m, [[1, 0]])
    with pytest.raises(AttributeError):
        act.xi = ()
    eq = gcalg.EqForm.of_form(f, 1, 2)
    with pytest.raises(AttributeError):
        eq.trunc = 5


def test_version_string():
    assert gcalg.__version__
