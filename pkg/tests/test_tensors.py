import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from infogeom import models as M
from infogeom.spaces import Finite, Statistic, finite_measure, uniform_measure
from infogeom.tensors import (
    ac_array,
    ac_tensor,
    all_tensors,
    fisher_form,
    fisher_matrix,
    moment_tensor,
    one_form_A,
)

B = M.bernoulli()


def test_fisher_bernoulli():
    assert fisher_form(B, [0.25], [1.0], [1.0]).value == pytest.approx(16 / 3, rel=1e-14)


def test_ac_bernoulli():
    assert ac_tensor(B, [0.25], [1.0], [1.0], [1.0]).value == pytest.approx(16 - 16 / 9, rel=1e-14)
    assert abs(ac_tensor(B, [0.5], [1.0], [1.0], [1.0]).value) <= 1e-14


def test_fd_route_tolerances():
    for x in (0.1, 0.25, 0.5, 0.9):
        g = fisher_form(B, [x], [1.0], [1.0], exact=False).value
        assert g == pytest.approx(1 / (x * (1 - x)), rel=1e-5)


def test_one_form_statistical_vanishes():
    for m, x in ((B, [0.3]), (M.categorical(4), [0.1, 0.2, 0.3])):
        for V in np.eye(m.dim):
            assert abs(one_form_A(m, x, V).value) <= 1e-8


def test_one_form_scaling():
    m = M.scaling(finite_measure(3, [0.2, 0.3, 0.5]))
    assert one_form_A(m, [0.4], [1.0]).value == pytest.approx(1.0, rel=1e-14)


def test_zero_direction():
    assert one_form_A(B, [0.3], [0.0]).value == 0.0
    assert fisher_form(B, [0.3], [0.0], [1.0]).value == 0.0
    assert ac_tensor(B, [0.3], [1.0], [0.0], [1.0]).value == 0.0


def test_moment_bernoulli_fourth():
    assert moment_tensor(B, [0.5], [1.0], 4).value == pytest.approx(16.0, rel=1e-14)


def test_moment_step_model():
    mu = uniform_measure(Finite(2))
    m = M.make_step_model(mu, Statistic.partition(Finite(2), [0, 1]),
                          [1.0, -1.0])
    assert abs(moment_tensor(m, [0.5], [1.0], 3).value) <= 1e-15
    assert moment_tensor(m, [0.5], [1.0], 2).value == pytest.approx(1.0, rel=1e-15)


def test_moment_order_validation():
    with pytest.raises(ValueError):
        moment_tensor(B, [0.5], [1.0], 0)


def test_categorical_fisher_matrix_direct_sum():
    m = M.categorical(4)
    x = np.array([0.25, 0.25, 0.25])
    p = np.append(x, 1 - x.sum())
    # ∂_i ln p_j = δ_ij / p_i - δ_j,last / p_last
    D = np.zeros((3, 4))
    for i in range(3):
        D[i, i] = 1 / p[i]
        D[i, 3] = -1 / p[3]
    oracle = (D * p) @ D.T
    np.testing.assert_allclose(fisher_matrix(m, x).value, oracle, rtol=1e-13)
    np.testing.assert_allclose(oracle, np.diag(1 / p[:3]) + 1 / p[3], rtol=1e-13)


def test_power_exp_fisher_closed_form():
    from scipy.special import exp1
    x = 0.7
    y = x * x
    closed = 12 * y * np.exp(-y) - 12 * y * y * exp1(y)
    assert fisher_form(M.power_exp(3), [x], [1.0], [1.0]).value == pytest.approx(closed, rel=1e-9)


def finite_models():
    return [
        (B, [0.3]),
        (M.categorical(3), [0.2, 0.3]),
        (M.exp_family([[0.0, 1.0], [1.0, 0.0], [2.0, -1.0], [0.5, 0.5]]), [0.3, -0.2]),
        (M.scaling(finite_measure(3, [0.2, 0.3, 0.5])), [0.6]),
        (M.expression_model(["x1*x2", "x1+x2", "exp(x2)"], Finite(3), [(0.1, 2.0), (0.1, 2.0)]), [0.5, 1.2]),
    ]


@pytest.mark.parametrize("idx", range(5))
def test_direct_sum_oracle(idx, rng):
    m, x = finite_models()[idx]
    atoms = m.space.atoms
    w = M.density_at(m, x).weights
    V, W, X = rng.normal(size=(3, m.dim))
    for exact, tol in ((True, 1e-12), (False, 1e-6)):
        if exact and not m.has_exact:
            continue
        dv, dw, dx = (m.dlog(x, D, atoms, exact) for D in (V, W, X))
        # independent route: derivatives of the log weights by central differences
        def lw(xx):
            return np.log(M.density_at(m, xx).weights)
        h = 1e-6
        ref = lambda D: (lw(np.asarray(x) + h * D) - lw(np.asarray(x) - h * D)) / (2 * h)
        np.testing.assert_allclose(dv, ref(V), rtol=1e-5, atol=1e-7)
        assert one_form_A(m, x, V, exact).value == pytest.approx(np.sum(w * dv), rel=tol, abs=tol)
        assert fisher_form(m, x, V, W, exact).value == pytest.approx(np.sum(w * dv * dw), rel=tol, abs=tol)
        assert ac_tensor(m, x, V, W, X, exact).value == pytest.approx(np.sum(w * dv * dw * dx), rel=tol, abs=tol)


@pytest.mark.parametrize("idx", range(5))
def test_fisher_symmetric_psd(idx):
    m, x = finite_models()[idx]
    G = fisher_matrix(m, x).value
    np.testing.assert_array_equal(G, G.T)
    assert np.linalg.eigvalsh(G).min() >= -1e-10


@pytest.mark.parametrize("idx", range(5))
def test_diagonal_consistency(idx, rng):
    m, x = finite_models()[idx]
    V = rng.normal(size=m.dim)
    g = fisher_form(m, x, V, V).value
    T = ac_tensor(m, x, V, V, V).value
    assert g == pytest.approx(moment_tensor(m, x, V, 2).value, rel=1e-12, abs=1e-14)
    assert T == pytest.approx(moment_tensor(m, x, V, 3).value, rel=1e-12, abs=1e-14)
    t = all_tensors(m, x, V)
    assert t["fisher"] == pytest.approx(g, rel=1e-12, abs=1e-14)


def test_ac_array_symmetric():
    m, x = finite_models()[2]
    T = ac_array(m, x)
    for perm in [(1, 0, 2), (2, 1, 0), (0, 2, 1)]:
        np.testing.assert_array_equal(T, T.transpose(perm))


vectors = st.lists(st.floats(-3, 3), min_size=2, max_size=2).map(np.array)


@settings(max_examples=60, deadline=None)
@given(vectors, vectors, vectors, st.floats(-3, 3), st.floats(-3, 3), st.booleans())
def test_fisher_multilinear(V, Vp, W, a, b, exact):
    m = M.expression_model(["x1*x2", "x1+x2", "exp(x2)"], Finite(3), [(0.1, 2.0), (0.1, 2.0)])
    x = [0.5, 1.2]
    lhs = fisher_form(m, x, a * V + b * Vp, W, exact).value
    rhs = a * fisher_form(m, x, V, W, exact).value + b * fisher_form(m, x, Vp, W, exact).value
    scale = 1 + abs(a) * fisher_form(m, x, V, V).value ** 0.5 + abs(b) * fisher_form(m, x, Vp, Vp).value ** 0.5
    assert abs(lhs - rhs) <= 1e-7 * scale * (1 + fisher_form(m, x, W, W).value ** 0.5)


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3))
def test_reparam_pullback_values(y):
    r = M.reparametrize(B, lambda v: 1 / (1 + np.exp(-v)), [(-8.0, 8.0)])
    f = 1 / (1 + np.exp(-y))
    J = M.jacobian_fd(lambda v: 1 / (1 + np.exp(-v)), np.array([y]))[0, 0]
    for V in (1.0, -0.5):
        assert fisher_form(r, [y], [V], [V]).value == pytest.approx(
            fisher_form(B, [f], [J * V], [J * V]).value, rel=1e-5)
        assert ac_tensor(r, [y], [V], [V], [V]).value == pytest.approx(
            ac_tensor(B, [f], [J * V], [J * V], [J * V]).value, rel=1e-5, abs=1e-12)
