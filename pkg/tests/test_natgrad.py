import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from infogeom import models as M
from infogeom.errors import LeftDomain, SingularMetric
from infogeom.natgrad import (
    ExpressionObjective,
    KLObjective,
    NatGradConfig,
    descend,
    natural_direction,
)
from infogeom.tensors import fisher_matrix

B = M.bernoulli()


def test_bernoulli_direction():
    assert natural_direction(B, [0.25], [1.0], rho=0.0)[0] == pytest.approx(0.1875, rel=1e-14)


def test_zero_gradient():
    np.testing.assert_array_equal(natural_direction(B, [0.25], [0.0]), [0.0])


def test_categorical_direction_against_solve():
    m = M.categorical(3)
    x = np.array([0.2, 0.3])
    obj = KLObjective([0.3, 0.3, 0.4])
    g = obj.gradient(m, x)
    p = np.array([0.2, 0.3, 0.5])
    q = np.array([0.3, 0.3, 0.4])
    # Σ_j (p_j - q_j) ∂_i ln p_j = (p_i - q_i)/p_i - (p_3 - q_3)/p_3
    g_oracle = (p[:2] - q[:2]) / p[:2] - (p[2] - q[2]) / p[2]
    np.testing.assert_allclose(g, g_oracle, atol=1e-14)
    G = np.diag(1 / p[:2]) + 1 / p[2]
    np.testing.assert_allclose(natural_direction(m, x, g, rho=0.0), np.linalg.solve(G, g_oracle), rtol=1e-12, atol=1e-15)


def test_singular_metric():
    with pytest.raises(SingularMetric):
        natural_direction(B, [0.3], [1.0], rho=0.0, G=np.zeros((1, 1)))


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 0.3), st.floats(0.05, 0.3), st.lists(st.floats(-2, 2), min_size=2, max_size=2))
def test_direction_solves_system(a, b, g):
    m = M.categorical(3)
    x = [a, b]
    G = fisher_matrix(m, x).value
    d = natural_direction(m, x, g, rho=0.0)
    np.testing.assert_allclose(G @ d, g, atol=1e-10 * (1 + np.abs(g).max()))


def kl_minimizer_by_bisection(q):
    # zero of the KL gradient (x - q)/x - (q - x)/(1 - x) on (0, 1)
    return brentq(lambda x: (x - q) / x + (x - q) / (1 - x), 1e-9, 1 - 1e-9, xtol=1e-15)


def test_descend_bernoulli():
    traj = descend(B, [0.2], NatGradConfig(eta=0.5, objective=KLObjective([0.7, 0.3])))
    target = kl_minimizer_by_bisection(0.7)
    assert target == pytest.approx(0.7, abs=1e-12)
    assert abs(traj.x[0] - target) <= 1e-6
    assert traj.iterations <= 200 and traj.converged and traj.monotone


def test_descend_at_minimizer():
    traj = descend(B, [0.7], NatGradConfig(objective=KLObjective([0.7, 0.3])))
    assert traj.iterations == 0 and traj.converged
    np.testing.assert_array_equal(traj.x, [0.7])


def test_small_eta_first_step():
    obj = KLObjective([0.7, 0.3])
    eta = 1e-6
    traj = descend(B, [0.2], NatGradConfig(eta=eta, max_iter=1, objective=obj))
    d = natural_direction(B, [0.2], obj.gradient(B, [0.2]), rho=1e-10)
    assert (traj.xs[0] - traj.xs[1])[0] == pytest.approx(eta * d[0], rel=1e-9)


def test_expression_objective():
    m = M.categorical(3)
    obj = ExpressionObjective("(x1-0.1)^2 + (x2-0.2)^2")
    traj = descend(m, [0.3, 0.3], NatGradConfig(eta=0.5, max_iter=400, objective=obj, tol=1e-12))
    np.testing.assert_allclose(traj.x, [0.1, 0.2], atol=1e-6)


def test_clipping_leaves_domain():
    obj = ExpressionObjective("-x1")
    with pytest.raises(LeftDomain):
        descend(B, [0.5], NatGradConfig(eta=5.0, max_iter=10, objective=obj))


def test_config_validation():
    with pytest.raises(ValueError):
        NatGradConfig(eta=0.0)
    with pytest.raises(ValueError):
        descend(B, [0.3], NatGradConfig())


def test_trajectory_csv():
    traj = descend(B, [0.2], NatGradConfig(eta=0.5, max_iter=3, objective=KLObjective([0.7, 0.3])))
    lines = traj.to_csv().splitlines()
    assert lines[0] == "iteration,x1,objective,step_norm"
    assert len(lines) == traj.iterations + 2


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3), st.sampled_from([1.0, -2.5, 0.3]))
def test_covariance_under_logistic(y, g):
    f = lambda v: 1 / (1 + np.exp(-np.asarray(v, dtype=float)))
    logistic = M.reparametrize(B, f, [(-20.0, 20.0)])
    yv = np.array([y])
    J = M.jacobian_fd(f, yv)
    lhs = J @ natural_direction(logistic, yv, J.T @ np.array([g]), rho=0.0)
    rhs = natural_direction(B, f(yv), [g], rho=0.0)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-4)
