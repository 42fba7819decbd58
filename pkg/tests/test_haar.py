import numpy as np
import pytest

from helpers import ALL, F3_ORACLE, F3P_ORACLE, analysis, group_haar


@pytest.mark.parametrize("name,order", [("F1", 2), ("Z3", 3), ("S3", 6)])
def test_group_haar_is_the_average(name, order):
    """[DERIVED] h = |G|^-1 Σ g, ĥ = δ_e, g = 1 for a group algebra."""
    an = analysis(name)
    W = an.W
    assert np.abs(an.haar.h - group_haar(order)).max() < 1e-12
    e = np.argmax(np.abs(W.unit))
    delta = np.zeros(order)
    delta[e] = 1
    assert np.abs(an.haar.h_hat - delta).max() < 1e-12
    assert np.abs(an.haar.g - W.unit).max() < 1e-12


@pytest.mark.parametrize("name", ALL)
def test_haar_integral_properties(name):
    an = analysis(name)
    W, h = an.W, an.haar.h
    assert np.abs(W.mul(h, h) - h).max() < 1e-10
    assert np.abs(W.S(h) - h).max() < 1e-10
    assert np.abs(W.adjoint(h) - h).max() < 1e-10
    # left integral: x h = Π^L(x) h
    for x in np.eye(W.dim):
        lhs = W.mul(x, h)
        pl = W.pi_left_matrix @ x
        assert np.abs(lhs - W.mul(pl, h)).max() < 1e-10


@pytest.mark.parametrize("name", ALL)
def test_canonical_grouplike(name):
    an = analysis(name)
    W, g = an.W, an.haar.g
    D = W.coproduct(g)
    gg = np.outer(g, g)
    want = W.tensor_mul(gg, W.delta_one)
    assert np.abs(D - want).max() < 1e-9
    assert np.abs(W.S(g) - W.algebra.inv(g)).max() < 1e-9
    # S² = Ad g
    for x in np.eye(W.dim):
        assert np.abs(W.S(W.S(x)) - W.prod(g, x, W.algebra.inv(g))).max() < 1e-9


@pytest.mark.parametrize("oracle,name", [(F3_ORACLE, "F3"), (F3P_ORACLE, "F3'")])
def test_bbop_closed_forms(oracle, name):
    an = analysis(name)
    assert np.abs(an.haar.h - oracle.haar_integral()).max() < 1e-9
    assert np.abs(an.haar.g - oracle.grouplike()).max() < 1e-9
    assert np.abs(an.metric.g_std - oracle.standard_metric()).max() < 1e-9
    np.testing.assert_allclose(an.weights.k, oracle.Gamma, atol=1e-9)                  # k_μ = Γ_μ


def test_vacuum_weight_of_dual_is_counit_of_one():
    an = analysis("F3")
    np.testing.assert_allclose(an.weights.k_hat, [an.W.eps(an.W.unit).real], atol=1e-9)  # Σ Γ = 5


def test_f1_examples():
    an = analysis("F1")
    W = an.W
    assert np.abs(an.haar.g_L - 2 ** -0.5 * W.unit).max() < 1e-12                     # G = 1/2
    assert np.abs(an.haar.g_R - 2 ** -0.5 * W.unit).max() < 1e-12
    np.testing.assert_allclose(an.traces.tau.trace_vector, [1, 1], atol=1e-12)
    np.testing.assert_allclose(an.pf[2].data, [[2]], atol=1e-12)


def test_f2_examples():
    an = analysis("F2")
    np.testing.assert_allclose(an.sectors.tau, [2], atol=1e-12)
    np.testing.assert_allclose(an.weights.k, [2], atol=1e-12)
    np.testing.assert_allclose(an.sectors.d, [1], atol=1e-12)
    assert an.fusion[0, 0, 0] == 1
