import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fecert.problem import (G_FAMILIES, KAPPA_FAMILIES, Coefficient, DataBounds, ProblemSpec,
                            SourceField, validate_bounds)

KAPPA_PARAMS = {
    "constant": dict(a=1.3),
    "tanh": dict(a=2.0, b=1.0, c=1.7),
    "rational": dict(a=1.0, b=0.6),
    "quadratic": dict(a=2.0, b=0.4, c=0.3),
    "tanh_xy": dict(a=2.0, s=0.5, b=0.8, c=2.0),
}
G_PARAMS = {
    "zero": {},
    "linear": dict(a=0.7),
    "cubic": dict(a=0.4),
    "arctan": dict(a=0.3, b=1.2, c=2.5),
}


def test_registries_cover_params():
    assert set(KAPPA_PARAMS) == set(KAPPA_FAMILIES)
    assert set(G_PARAMS) == set(G_FAMILIES)


@pytest.mark.parametrize("kind,family,params",
                         [("kappa", k, p) for k, p in KAPPA_PARAMS.items()]
                         + [("g", k, p) for k, p in G_PARAMS.items()])
def test_derivatives_match_finite_differences(kind, family, params):
    c = Coefficient(kind, family, params)
    rng = np.random.default_rng(0)
    x = rng.uniform(0, 1, size=(50, 2))
    eta = rng.uniform(-1.5, 1.5, size=50)
    h = 1e-6
    fd = (c(x, eta + h) - c(x, eta - h)) / (2 * h)
    d = c.deriv(x, eta)
    assert np.all(np.abs(fd - d) <= 1e-7 * np.maximum(np.abs(d), 1.0))


def test_coefficient_shapes_broadcast():
    c = Coefficient("kappa", "tanh", KAPPA_PARAMS["tanh"])
    x = np.zeros((4, 3, 2))
    assert c(x, np.zeros((4, 3))).shape == (4, 3)
    assert c.deriv(x, np.zeros((4, 3))).shape == (4, 3)
    assert Coefficient("g", "zero", {})(x, 0.0).shape == (4, 3)


def test_bad_params():
    with pytest.raises(ValueError):
        Coefficient("kappa", "nope", {})
    with pytest.raises(ValueError):
        Coefficient("kappa", "tanh", dict(a=1.0))
    with pytest.raises(ValueError):
        Coefficient("g", "linear", dict(a=-1.0))
    with pytest.raises(ValueError):
        Coefficient("kappa", "constant", dict(a=0.0))


def test_bounds_invariants():
    DataBounds(1.0, 1.0, 0.0, 0.0)
    for bad in [(0.0, 1.0, 0.0, 0.0), (2.0, 1.0, 0.0, 0.0), (1.0, 2.0, -1.0, 0.0),
                (1.0, 2.0, 0.0, float("nan"))]:
        with pytest.raises(ValueError):
            DataBounds(*bad)


def test_config_roundtrip():
    cfg = {"kappa": {"family": "tanh", "a": 2.0, "b": 1.0, "c": 1.0},
           "g": {"family": "arctan", "a": 0.1, "b": 1.0, "c": 1.0},
           "f": {"family": "trig", "a": 3.0},
           "bounds": {"k_alpha": 1.0, "k_beta": 3.0, "K_eta": 1.0, "G_eta": 1.1}}
    spec = ProblemSpec.from_config(cfg)
    again = ProblemSpec.from_config(spec.to_config())
    assert again == spec
    x = np.array([[0.5, 0.5]])
    assert spec.f(x)[0] == pytest.approx(3.0)


def test_source_fields():
    x = np.array([[0.2, 0.3], [1.0, 1.0]])
    assert np.all(SourceField.from_config(2.5)(x) == 2.5)
    p = SourceField("poly", dict(c0=1.0, cxy=2.0))
    np.testing.assert_allclose(p(x), [1.12, 3.0])
    assert SourceField.from_config(2.0) == SourceField.from_config({"family": "constant", "value": 2.0})


def test_validate_bounds_accepts_true_bounds():
    spec = ProblemSpec.from_config({
        "kappa": {"family": "tanh", "a": 2.0, "b": 1.0, "c": 1.0},
        "g": {"family": "arctan", "a": 0.0, "b": 1.0, "c": 1.0},
        "bounds": {"k_alpha": 1.0, "k_beta": 3.0, "K_eta": 1.0, "G_eta": 1.0}})
    rep = validate_bounds(spec, eta_range=(-5, 5))
    assert rep.ok, rep.violations


def test_validate_bounds_flags_false_bounds():
    spec = ProblemSpec.from_config({
        "kappa": {"family": "tanh", "a": 2.0, "b": 1.0, "c": 3.0},
        "g": {"family": "zero"},
        "bounds": {"k_alpha": 1.5, "k_beta": 3.0, "K_eta": 1.0, "G_eta": 0.0}})
    rep = validate_bounds(spec)
    checks = {v.check for v in rep.violations}
    assert checks == {"kappa >= k_alpha", "|dkappa/deta| <= K_eta"}
    assert not rep.ok


@settings(max_examples=40, deadline=None)
@given(a=st.floats(1.1, 5), frac=st.floats(0.0, 0.9), c=st.floats(0.1, 5))
def test_tanh_family_declared_bounds_hold(a, frac, c):
    b = frac * a
    spec = ProblemSpec.from_config({
        "kappa": {"family": "tanh", "a": a, "b": b, "c": c},
        "bounds": {"k_alpha": a - b, "k_beta": a + b, "K_eta": b * c, "G_eta": 0.0}})
    assert validate_bounds(spec, eta_range=(-3, 3), n_samples=51).ok
