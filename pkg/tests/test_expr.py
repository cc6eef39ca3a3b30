import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from infogeom import expr as ex
from infogeom.expr import ArityError, DiffConfig, DomainError, ExprSyntaxError, UnknownIdentifier


def test_parse_root_is_exp():
    e = ex.parse("exp(-x1^2 / w1^(1/3))")
    assert isinstance(e, ex.Call) and e.name == "exp"


def test_parse_single_variable():
    assert ex.parse("x1") == ex.Var("x", 1)


def test_division_by_zero_is_an_evaluation_error():
    e = ex.parse("1/0")
    with pytest.raises(DomainError):
        ex.eval(e, [], 0.0)


def test_syntax_error_carries_offset():
    with pytest.raises(ExprSyntaxError) as info:
        ex.parse("x1 + * 2")
    assert info.value.offset == 5


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifier):
        ex.parse("sin(x1)")


def test_arity():
    with pytest.raises(ArityError):
        ex.parse("pow(x1)")


def test_parameter_dimension_enforced():
    with pytest.raises(UnknownIdentifier):
        ex.parse("x3", param_dim=2)


@pytest.mark.parametrize("text, value", [
    ("2^3^2", 512.0),
    ("-2^2", -4.0),
    ("2*3+4", 10.0),
    ("2-3-4", -5.0),
    ("8/4/2", 1.0),
    ("pow(2, 10)", 1024.0),
    ("abs(-3) + sqrt(16) + cosh(0)", 8.0),
])
def test_precedence(text, value):
    assert ex.eval(ex.parse(text), [], 0.0) == value


def test_eval_product():
    assert ex.eval(ex.parse("x1*w1"), [2.0], 3.0) == 6.0


def test_eval_power_exp_point():
    # 0.001^(1/3) = 0.1 so the exponent is -1/0.1 = -10
    v = ex.eval(ex.parse("exp(-x1^2/w1^(1/3))"), [1.0], 0.001)
    assert v == pytest.approx(math.exp(-10.0), rel=1e-12)


def test_log_of_negative():
    with pytest.raises(DomainError):
        ex.eval(ex.parse("log(x1)"), [-1.0], 0.0)


def test_sqrt_of_negative():
    with pytest.raises(DomainError):
        ex.eval(ex.parse("sqrt(x1)"), [-1.0], 0.0)


def test_non_strict_passes_ieee_values():
    out = ex.evaluate(ex.parse("log(w1)"), [], np.array([-1.0, 1.0]), strict=False)
    assert np.isnan(out[0]) and out[1] == 0.0


def test_product_sample_variables():
    e = ex.parse("w1*w2")
    assert ex.eval(e, [], (2.0, 5.0)) == 10.0


def test_dlog_linear_exponent():
    d = ex.dlog_dv(ex.parse("exp(x1*w1)"), [0.3], [1.0], 2.0)
    assert d == pytest.approx(2.0, abs=1e-8)


def test_dlog_zero_direction():
    assert ex.dlog_dv(ex.parse("exp(x1*w1)"), [0.3], [0.0], 2.0) == 0.0


def test_dlog_bernoulli_atom():
    # (x, 1-x) with atom 1 in the 1-based convention: d/dx ln x = 1/x
    e = ex.parse("x1^(2-w1)*(1-x1)^(w1-1)")
    assert ex.dlog_dv(e, [0.25], [1.0], 1.0) == pytest.approx(4.0, rel=1e-7)
    assert ex.dlog_dv(e, [0.25], [1.0], 2.0) == pytest.approx(-1.0 / 0.75, rel=1e-7)


def test_dlog_domain_error_on_stencil():
    with pytest.raises(DomainError):
        ex.dlog_dv(ex.parse("x1"), [0.0], [1.0], 0.0)


def test_diff_config_step_rule():
    cfg = DiffConfig()
    assert cfg.step([0.5], [1.0]) == pytest.approx(np.finfo(float).eps ** (1 / 3))
    assert cfg.step([10.0], [1.0]) == pytest.approx(10 * np.finfo(float).eps ** (1 / 3))
    assert DiffConfig(overrides=(1e-4,)).step([10.0], [1.0]) == 1e-4
    with pytest.raises(ValueError):
        DiffConfig(step_scale=0.0)


# hand-derived ∂/∂x1 ln p at (x, w)
CATALOG = [
    ("exp(-x1^2*w1)", lambda x, w: -2 * x * w),
    ("x1^2 + w1", lambda x, w: 2 * x / (x * x + w)),
    ("cosh(x1*w1)", lambda x, w: w * math.tanh(x * w)),
    ("sqrt(1 + x1^2*w1)", lambda x, w: x * w / (1 + x * x * w)),
    ("exp(x1)/(1+exp(x1))", lambda x, w: 1 / (1 + math.exp(x))),
    ("pow(w1, x1)", lambda x, w: math.log(w)),
    ("exp(-x1^2/w1^(1/3))", lambda x, w: -2 * x / w ** (1 / 3)),
]


@pytest.mark.parametrize("text, deriv", CATALOG)
@pytest.mark.parametrize("x, w", [(0.3, 0.5), (1.7, 2.0), (-0.8, 0.1)])
def test_central_difference_catalog(text, deriv, x, w):
    got = ex.dlog_dv(ex.parse(text), [x], [1.0], w)
    want = deriv(x, w)
    assert got == pytest.approx(want, rel=1e-6, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.floats(-2, 2), st.floats(0.1, 3), st.sampled_from([-2.0, 0.5, 3.0]))
def test_dlog_homogeneous_in_direction(x, w, lam):
    e = ex.parse("exp(-x1^2*w1) * (2 + cosh(x1))")
    base = ex.dlog_dv(e, [x], [1.0], w)
    scaled = ex.dlog_dv(e, [x], [lam], w)
    assert scaled == pytest.approx(lam * base, rel=1e-7, abs=1e-12)


EXPRESSIONS = st.recursive(
    st.one_of(st.sampled_from(["x1", "x2", "w1", "pi"]), st.integers(0, 9).map(str),
              st.floats(0.01, 100).map(repr)),
    lambda sub: st.one_of(
        st.tuples(sub, st.sampled_from("+-*/^"), sub).map(lambda t: f"({t[0]}){t[1]}({t[2]})"),
        sub.map(lambda s: f"-({s})"),
        st.tuples(st.sampled_from(["exp", "log", "sqrt", "cosh", "abs"]), sub).map(lambda t: f"{t[0]}({t[1]})"),
        st.tuples(sub, sub).map(lambda t: f"pow({t[0]}, {t[1]})"),
    ),
    max_leaves=12,
)


@settings(max_examples=200, deadline=None)
@given(EXPRESSIONS)
def test_print_parse_roundtrip(text):
    tree = ex.parse(text)
    again = ex.parse(str(tree))
    assert again == tree
    assert str(again) == str(tree)
