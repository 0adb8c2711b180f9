import json

import pytest
from hypothesis import given, strategies as st

from conftest import forms
from pkahler.exterior import Form, conjugate, phi, phibar, wedge
from pkahler.lie import (
    LieModel, ModelError, catalog_names, del_, delbar, differential, etabeta, get_model, load_model, verify_model,
)

CATALOG = ["iwasawa", "etabeta3", "etabeta5", "etabeta7", "sl2"]


def test_catalog_names():
    assert catalog_names() == CATALOG
    assert get_model("etabeta(3)") == get_model("iwasawa")
    assert get_model("etabeta(9)").n == 9
    with pytest.raises(ModelError):
        get_model("nosuch")
    with pytest.raises(ModelError):
        etabeta(4)


@pytest.mark.parametrize("name", CATALOG)
def test_catalog_models_are_consistent(name):
    m = get_model(name)
    assert verify_model(m).passed
    assert m.holomorphically_parallelizable
    assert m.is_unimodular()


def test_iwasawa_structure():
    m = get_model("iwasawa")
    assert differential(m, phi(3, 1)).is_zero()
    assert differential(m, phi(3, 3)) == wedge(phi(3, 1), phi(3, 2))
    assert differential(m, phibar(3, 3)) == wedge(phibar(3, 1), phibar(3, 2))


def test_sl2_structure():
    m = get_model("sl2")
    a, b, e = phi(3, 1), phi(3, 2), phi(3, 3)
    assert differential(m, a) == wedge(e, a) * -2
    assert differential(m, b) == wedge(e, b) * 2
    assert differential(m, e) == wedge(a, b)


def test_rejects_bad_structure_equations():
    # d phi_4 = phi_1^phi_2, d phi_1 = phi_3^phi_4 gives d^2 phi_4 = phi_2^phi_3^phi_4
    data = {"name": "bad", "n": 4, "d": [{"k": 4, "terms": [{"coeff": {"re": "1"}, "i": 1, "j": 2}]},
                                         {"k": 1, "terms": [{"coeff": {"re": "1"}, "i": 3, "j": 4}]}]}
    with pytest.raises(ModelError):
        LieModel.from_json(data)


@pytest.mark.parametrize("name", CATALOG)
def test_json_round_trip(name, tmp_path):
    m = get_model(name)
    path = tmp_path / "model.json"
    path.write_text(json.dumps(m.to_json()))
    assert load_model(str(path)) == m


model_names = st.sampled_from(["iwasawa", "sl2"])


@given(model_names, forms(), forms())
def test_leibniz(name, a, b):
    m = get_model(name)
    for deg in a.degrees():
        part = Form(3, {k: c for k, c in a.items() if len(k[0]) + len(k[1]) == deg})
        lhs = differential(m, wedge(part, b))
        rhs = wedge(differential(m, part), b) + wedge(part, differential(m, b)) * (-1) ** deg
        assert lhs == rhs


@given(model_names, forms())
def test_d_squares_and_splitting(name, a):
    m = get_model(name)
    assert differential(m, differential(m, a)).is_zero()
    assert differential(m, a) == del_(m, a) + delbar(m, a)
    assert del_(m, del_(m, a)).is_zero()
    assert delbar(m, delbar(m, a)).is_zero()
    assert del_(m, delbar(m, a)) == -delbar(m, del_(m, a))
    assert differential(m, conjugate(a)) == conjugate(differential(m, a))


@given(forms(p=1, q=1))
def test_bidegree_shift(a):
    m = get_model("iwasawa")
    d = del_(m, a)
    assert d.is_zero() or d.bidegrees() == {(2, 1)}
    d = delbar(m, a)
    assert d.is_zero() or d.bidegrees() == {(1, 2)}
