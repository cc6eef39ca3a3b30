import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from infogeom import models as M
from infogeom.errors import NotProbability, SupportViolation, ZeroRow
from infogeom.markov import (
    MarkovKernel,
    check_sufficiency,
    conditional_distribution,
    congruent_embedding,
    decompose_markov_morphism,
    identity_kernel,
    kernel_model,
    kernel_pushforward,
    left_inverse_check,
    lift_model_by_kernel,
    lumping_matrix,
    random_kernel,
    random_partition,
)
from infogeom.spaces import Finite, Grid, Product, Statistic, finite_measure, uniform_measure
from infogeom.tensors import fisher_form

K12 = Statistic.partition(Finite(3), [[0], [1, 2]])


def test_kernel_validation():
    with pytest.raises(NotProbability):
        MarkovKernel([[0.5, 0.6]])
    with pytest.raises(ZeroRow):
        MarkovKernel([[0.0, 0.0], [0.5, 0.5]])
    with pytest.raises(ValueError):
        MarkovKernel([[1.5, -0.5]])


def test_grid_kernel_rows():
    P = MarkovKernel(target=Grid(0.0, 1.0), row_densities=["1", "2*w1"])
    assert P.strictly_positive
    nu = kernel_pushforward(P, finite_measure(2, [0.5, 0.5]))
    assert nu.density(np.array([0.5]))[0] == pytest.approx(1.0)
    with pytest.raises(NotProbability):
        MarkovKernel(target=Grid(0.0, 1.0), row_densities=["3*w1"])


def test_pushforward_identity():
    nu = finite_measure(3, [0.2, 1.0, 3.0])
    np.testing.assert_array_equal(kernel_pushforward(identity_kernel(3), nu).weights, nu.weights)


def test_pushforward_dirac():
    P = MarkovKernel([[0.3, 0.7], [0.5, 0.5]])
    np.testing.assert_allclose(kernel_pushforward(P, finite_measure(2, [1.0, 0.0])).weights, [0.3, 0.7])


def test_pushforward_matrix_vector():
    P = MarkovKernel([[1.0, 0.0, 0.0], [0.0, 0.4, 0.6]])
    np.testing.assert_allclose(kernel_pushforward(P, finite_measure(2, [2.0, 1.0])).weights, [2.0, 0.4, 0.6])


def test_congruent_embedding_instance():
    P = congruent_embedding(K12, [[1.0], [0.4, 0.6]])
    np.testing.assert_array_equal(P.matrix, [[1.0, 0.0, 0.0], [0.0, 0.4, 0.6]])
    assert left_inverse_check(P, K12)


def test_congruent_identity():
    P = congruent_embedding(Statistic.identity(Finite(3)), [[1.0]] * 3)
    np.testing.assert_array_equal(P.matrix, np.eye(3))


def test_congruent_wrong_support():
    with pytest.raises(SupportViolation):
        congruent_embedding(K12, [[0.5, 0.5, 0.0], [0.0, 0.4, 0.6]])


def test_uniform_rows_not_left_invertible():
    P = MarkovKernel(np.full((2, 3), 1 / 3))
    assert not left_inverse_check(P, K12)


def test_identity_left_inverse():
    assert left_inverse_check(identity_kernel(4), Statistic.identity(Finite(4)))


def test_lumping_matrix():
    np.testing.assert_array_equal(lumping_matrix(K12), [[1, 0], [0, 1], [0, 1]])


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 5), st.integers(2, 5), st.integers(2, 5))
def test_composition_stochastic_and_associative(seed, a, b, c):
    rng = np.random.default_rng(seed)
    P, Q, R = random_kernel(rng, a, b), random_kernel(rng, b, c), random_kernel(rng, c, a)
    left = P.compose(Q).compose(R).matrix
    right = P.compose(Q.compose(R)).matrix
    np.testing.assert_allclose(left.sum(axis=1), 1.0, atol=1e-13)
    np.testing.assert_allclose(left, right, atol=1e-13)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(0, 4))
def test_lumping_inverts_congruent_embedding(seed, n, extra):
    rng = np.random.default_rng(seed)
    kappa = random_partition(rng, n + extra, n)
    P = congruent_embedding(kappa, [rng.dirichlet(np.ones(len(c))) for c in kappa.classes])
    np.testing.assert_allclose(P.matrix @ lumping_matrix(kappa), np.eye(n), atol=1e-15)
    nu = finite_measure(n, rng.uniform(0.1, 2, n))
    from infogeom.spaces import pushforward_statistic
    back = pushforward_statistic(kernel_pushforward(P, nu), kappa)
    np.testing.assert_allclose(back.weights, nu.weights, rtol=1e-14)


def test_sufficient_example(lumped):
    v = check_sufficiency(lumped, K12)
    assert v.verdict == "sufficient" and v.deviation <= 1e-12


def test_not_sufficient_example(quadratic):
    v = check_sufficiency(quadratic, Statistic.partition(Finite(3), [[0, 1], [2]]))
    assert v.verdict == "not_sufficient"
    assert v.witness["omega"] == 1
    # within-class ratios 1/(1+x) and x/(1+x) over the lattice x = 0.6 k/8
    xs = 0.6 * np.arange(1, 8) / 8
    dev = [(r.max() - r.min()) / r.max() for r in (1 / (1 + xs), xs / (1 + xs))]
    assert v.deviation == pytest.approx(max(dev), rel=1e-10)


def test_identity_statistic_sufficient(quadratic):
    assert check_sufficiency(quadratic, Statistic.identity(Finite(3))).sufficient


def test_scaled_model_stays_sufficient(lumped):
    assert check_sufficiency(M.scaled(lumped), K12).sufficient


def test_inconclusive_band():
    # within-class ratio varies by about 1e-5 over the box
    m = M.expression_model(["x1", "1 + 1e-5*x1", "1"], Finite(3), [(0.1, 1.0)])
    v = check_sufficiency(m, Statistic.partition(Finite(3), [[0], [1, 2]]))
    assert v.verdict == "inconclusive" and v.witness is not None


@pytest.mark.parametrize("seed", range(5))
def test_congruent_models_sufficient_on_catalog(seed):
    rng = np.random.default_rng(seed)
    for base in (M.bernoulli(), M.categorical(3), M.exp_family([[0.0], [1.0], [-1.0]])):
        n = base.space.n
        kappa = random_partition(rng, n + 3, n)
        P = congruent_embedding(kappa, [rng.dirichlet(np.ones(len(c))) for c in kappa.classes])
        assert check_sufficiency(kernel_model(base, P), kappa, n=3).sufficient


def test_conditional_separable():
    space = Product(Finite(2), Finite(3))
    b = np.array([0.2, 0.3, 0.5])
    m = M.ParametrizedModel([(0.0, 1.0)], space, M.base_measure(space), M.CallbackPotential(
        lambda x, p: np.log(np.where(p[0] == 0, x[0], 1 - x[0])) + np.log(b[p[1]])))
    for x in (0.2, 0.7):
        np.testing.assert_allclose(conditional_distribution(m, [x]).matrix(), np.tile(b, (2, 1)), rtol=1e-14)


def test_conditional_finite_joint():
    space = Product(Finite(2), Finite(2))
    w = np.array([[0.1, 0.3], [0.2, 0.4]])
    m = M.ParametrizedModel([(0.0, 1.0)], space, M.base_measure(space),
                            M.CallbackPotential(lambda x, p: np.log(w[p[0], p[1]])))
    np.testing.assert_allclose(conditional_distribution(m, [0.5]).fiber(0).weights, [0.25, 0.75], rtol=1e-14)


def test_lift_fibers_are_rows():
    P = MarkovKernel([[0.2, 0.3, 0.5], [0.6, 0.2, 0.2]])
    lift = lift_model_by_kernel(M.bernoulli(), P, uniform_measure(Finite(3)))
    np.testing.assert_allclose(conditional_distribution(lift, [0.3]).matrix(), P.matrix, rtol=1e-14)


def test_separable_lift_keeps_fisher():
    P = MarkovKernel(np.full((2, 2), 0.5))
    lift = lift_model_by_kernel(M.bernoulli(), P, uniform_measure(Finite(2)))
    for x in (0.2, 0.6):
        assert fisher_form(lift, [x], [1.0], [1.0]).value == pytest.approx(1 / (x * (1 - x)), rel=1e-13)


def test_lift_marginal_and_pi1_sufficiency():
    from infogeom.models import pushforward_model
    P = MarkovKernel([[0.2, 0.3, 0.5], [0.6, 0.2, 0.2]])
    lift = lift_model_by_kernel(M.bernoulli(), P, finite_measure(3, [0.5, 0.25, 0.25]))
    pi1 = Statistic.projection(lift.space, 1)
    push = pushforward_model(lift, pi1)
    for x in (0.1, 0.4, 0.8):
        np.testing.assert_allclose(M.density_at(push, [x]).weights, [x, 1 - x], rtol=1e-13)
    assert check_sufficiency(lift, pi1).sufficient


def test_decomposition_example():
    P = MarkovKernel([[0.2, 0.3, 0.5], [0.6, 0.2, 0.2]])
    d = decompose_markov_morphism(M.bernoulli(), P, uniform_measure(Finite(3)))
    assert d.certificate.sufficient
    assert d.residual <= 1e-12
    # direct matrix oracle for one point
    x = 0.37
    want = np.array([x, 1 - x]) @ P.matrix
    np.testing.assert_allclose(M.density_at(d.pushforward, [x]).weights, want, rtol=1e-12)


def test_decomposition_near_identity_kernel():
    # the lift needs strictly positive kernels, so the identity is approached
    m = M.categorical(3)
    eps = 1e-9
    P = MarkovKernel((1 - 3 * eps) * np.eye(3) + eps)
    d = decompose_markov_morphism(m, P, uniform_measure(Finite(3)), n=3)
    for x in M.box_lattice(m.box, 3)[0]:
        np.testing.assert_allclose(M.density_at(d.pushforward, x).weights, M.density_at(m, x).weights, rtol=1e-8)


def test_identity_kernel_rejected_by_lift():
    from infogeom.errors import NonPositiveDensity
    with pytest.raises(NonPositiveDensity):
        decompose_markov_morphism(M.categorical(3), identity_kernel(3), uniform_measure(Finite(3)))


def test_lift_refuses_nonpositive_kernel():
    from infogeom.errors import NonPositiveDensity
    P = MarkovKernel([[1.0, 0.0], [0.5, 0.5]])
    with pytest.raises(NonPositiveDensity):
        lift_model_by_kernel(M.bernoulli(), P, uniform_measure(Finite(2)))


@pytest.mark.parametrize("seed", range(10))
def test_decomposition_random(seed):
    rng = np.random.default_rng(seed)
    for n1, n2, base in ((2, 3, M.bernoulli()), (3, 5, M.categorical(3))):
        P = random_kernel(rng, n1, n2)
        d = decompose_markov_morphism(base, P, finite_measure(n2, rng.dirichlet(np.ones(n2))), n=3)
        assert d.residual <= 1e-10
