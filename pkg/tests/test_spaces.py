import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from infogeom.errors import DivergentIntegral, PartitionMismatch, ZeroDenominator
from infogeom.spaces import (
    CONVERGED,
    DIVERGENT,
    Finite,
    Grid,
    Product,
    QuadratureConfig,
    Statistic,
    density_measure,
    finite_measure,
    lebesgue,
    marginal,
    product_measure,
    pushforward_statistic,
    quad,
    radon_nikodym,
    total_variation,
    uniform_measure,
)

weights = st.lists(st.floats(0.01, 10.0), min_size=2, max_size=8)


def test_finite_space_rejects_empty():
    with pytest.raises(ValueError):
        Finite(0)


def test_grid_needs_ordered_interval():
    with pytest.raises(ValueError):
        Grid(1.0, 0.0)


def test_quadrature_config_validation():
    with pytest.raises(ValueError):
        QuadratureConfig(growth_threshold=1.0)
    with pytest.raises(ValueError):
        QuadratureConfig(base_panels=2)


def test_total_variation_uniform_finite():
    assert total_variation(uniform_measure(Finite(4))) == 1.0


def test_total_variation_signed():
    m = finite_measure(Finite(2), [0.2, -0.3], signed_allowed=True)
    assert total_variation(m) == pytest.approx(0.5, abs=1e-15)


def test_unsigned_measure_rejects_negative():
    with pytest.raises(ValueError):
        finite_measure(Finite(2), [0.2, -0.3])


def test_total_variation_endpoint_singularity():
    g = Grid(0.0, 1.0)
    m = density_measure(g, lambda t: t ** -0.5)
    antiderivative = lambda t: 2.0 * math.sqrt(t)
    assert total_variation(m) == pytest.approx(antiderivative(1.0) - antiderivative(0.0), rel=1e-9)


def test_total_variation_divergent_raises():
    m = density_measure(Grid(0.0, 1.0), lambda t: 1.0 / t)
    with pytest.raises(DivergentIntegral):
        total_variation(m)


def test_quad_never_evaluates_endpoints():
    seen = []

    def f(t):
        seen.append(np.asarray(t).copy())
        return np.ones_like(t)

    quad(Grid(0.0, 1.0), f)
    pts = np.concatenate([s.ravel() for s in seen])
    assert pts.min() > 0.0 and pts.max() < 1.0


def test_quad_reports_divergence_with_trace():
    res = quad(Grid(0.0, 1.0), lambda t: 1.0 / t)
    assert res.status == DIVERGENT
    assert res.evidence


@pytest.mark.parametrize("degree", [0, 1, 5, 17, 31])
def test_quadrature_polynomial_exactness(degree):
    # 16 nodes per panel integrate degree <= 31 exactly
    res = quad(Grid(-1.0, 2.0), lambda t: t ** degree)
    exact = (2.0 ** (degree + 1) - (-1.0) ** (degree + 1)) / (degree + 1)
    assert res.status == CONVERGED
    assert res.value == pytest.approx(exact, rel=1e-13, abs=1e-13)


def test_radon_nikodym_finite():
    r = radon_nikodym(finite_measure(2, [0.2, 0.8]), uniform_measure(Finite(2)))
    np.testing.assert_allclose(r, [0.4, 1.6], rtol=1e-15)


def test_radon_nikodym_identity():
    m = finite_measure(3, [0.1, 2.0, 0.7])
    np.testing.assert_array_equal(radon_nikodym(m, m), np.ones(3))


def test_radon_nikodym_zero_denominator():
    with pytest.raises(ZeroDenominator):
        radon_nikodym(finite_measure(2, [1.0, 1.0]), finite_measure(2, [1.0, 0.0]))


def test_radon_nikodym_grid_pointwise():
    g = Grid(0.0, 1.0)
    r = radon_nikodym(density_measure(g, np.exp, log_density=lambda t: t), lebesgue(g))
    t = np.array([0.1, 0.5, 0.9])
    np.testing.assert_allclose(r(t), np.exp(t), rtol=1e-15)


@settings(max_examples=50, deadline=None)
@given(weights, st.data())
def test_radon_nikodym_chain_rule(w1, data):
    n = len(w1)
    w2 = data.draw(st.lists(st.floats(0.01, 10.0), min_size=n, max_size=n))
    w3 = data.draw(st.lists(st.floats(0.01, 10.0), min_size=n, max_size=n))
    m1, m2, m3 = (finite_measure(n, w) for w in (w1, w2, w3))
    np.testing.assert_allclose(radon_nikodym(m1, m3), radon_nikodym(m1, m2) * radon_nikodym(m2, m3), rtol=1e-14)


def test_pushforward_partition():
    m = finite_measure(3, [0.1, 0.2, 0.7])
    k = Statistic.partition(Finite(3), [[0], [1, 2]])
    np.testing.assert_allclose(pushforward_statistic(m, k).weights, [0.1, 0.9], atol=1e-15)


def test_pushforward_identity():
    m = finite_measure(3, [0.1, 0.2, 0.7])
    assert pushforward_statistic(m, Statistic.identity(Finite(3))) is m


def test_pushforward_intervals():
    g = Grid(0.0, 1.0)
    k = Statistic.intervals(g, [0.5])
    np.testing.assert_allclose(pushforward_statistic(lebesgue(g), k).weights, [0.5, 0.5], rtol=1e-12)


def test_partition_must_cover():
    with pytest.raises(PartitionMismatch):
        Statistic.partition(Finite(3), [[0], [1]])


def test_partition_rejects_overlap():
    with pytest.raises(PartitionMismatch):
        Statistic.partition(Finite(3), [[0, 1], [1, 2]])


def test_statistic_on_wrong_space():
    k = Statistic.partition(Finite(3), [[0], [1, 2]])
    with pytest.raises(PartitionMismatch):
        pushforward_statistic(finite_measure(4, np.ones(4)), k)


@settings(max_examples=50, deadline=None)
@given(weights, st.data())
def test_pushforward_conserves_mass(w, data):
    n = len(w)
    assignment = data.draw(st.lists(st.integers(0, n - 1), min_size=n, max_size=n))
    # relabel to consecutive classes
    labels = {a: i for i, a in enumerate(dict.fromkeys(assignment))}
    k = Statistic.partition(Finite(n), [labels[a] for a in assignment])
    m = finite_measure(n, w)
    assert total_variation(pushforward_statistic(m, k)) == pytest.approx(total_variation(m), rel=1e-12)


def test_pushforward_intervals_conserves_mass():
    g = Grid(0.0, 1.0)
    m = density_measure(g, lambda t: t ** -0.5)
    k = Statistic.intervals(g, [0.1, 0.3, 0.8])
    assert total_variation(pushforward_statistic(m, k)) == pytest.approx(2.0, rel=1e-9)


def test_product_marginal_matches_factor_scaling():
    a = finite_measure(2, [0.3, 0.7])
    b = finite_measure(3, [0.5, 0.25, 0.25])
    joint = product_measure(a, b)
    k = Statistic.projection(joint.space, 1)
    np.testing.assert_allclose(pushforward_statistic(joint, k).weights, [0.3, 0.7], rtol=1e-15)


def test_marginal_of_joint_finite():
    space = Product(Finite(2), Finite(2))
    joint = finite_measure(space, [0.1, 0.3, 0.2, 0.4])
    np.testing.assert_allclose(marginal(joint, 1).weights, [0.4, 0.6], rtol=1e-14)
    np.testing.assert_allclose(marginal(joint, 2).weights, [0.3, 0.7], rtol=1e-14)


def test_product_grid_integral():
    space = Product(Grid(0.0, 1.0), Grid(0.0, 2.0))
    res = quad(space, lambda p: p[0] * p[1])
    assert res.value == pytest.approx(0.5 * 2.0, rel=1e-12)
