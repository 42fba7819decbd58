import numpy as np
import pytest

from helpers import ALL, analysis
from whax.weyl import amalgamated_dimension

# [DERIVED] Hopf case: A ⋊ Â ≅ M_{dim A}; groupoid and B ⊗ B^op: dim A · dim Â / dim A^R;
# disjoint union of groups: direct sum of the two full matrix algebras.
WEYL_DIMS = {"F1": (4, (2,)), "F2": (8, (2, 2)), "Z3": (9, (3,)), "S3": (36, (6,)), "C": (1, (1,)),
             "F3": (125, (10, 5)), "Z2+Z3": (13, (3, 2))}


@pytest.mark.parametrize("name", sorted(WEYL_DIMS))
def test_weyl_dimension(name):
    an = analysis(name)
    dim, blocks = WEYL_DIMS[name]
    assert an.weyl.dim == dim
    assert sorted(an.weyl.alg.block_dims) == sorted(blocks)
    assert an.weyl_prime.dim == dim
    assert amalgamated_dimension(an.W) == dim


@pytest.mark.parametrize("name", ["F1", "F2", "F3", "Z3"])
def test_weyl_algebra_is_closed(name, rng):
    an = analysis(name)
    w = an.weyl
    for _ in range(3):
        a = w.operator(rng.standard_normal(w.dim))
        b = w.operator(rng.standard_normal(w.dim))
        c = w.coords(a @ b)
        assert np.abs(w.operator(c) - a @ b).max() < 1e-8


@pytest.mark.parametrize("name", ALL)
def test_commutation_relation(name, rng):
    """Crossed-product rule φ x = (φ_(1) ⇀ x) φ_(2), with the dual coproduct taken from Â."""
    an = analysis(name)
    W, reps = an.W, an.reps
    n = W.dim
    x, phi = rng.standard_normal(n), rng.standard_normal(n)
    lhs = reps.pi_hat(phi) @ reps.pi(x)
    D = W.dual()
    Dphi = D.coproduct(phi)            # φ_(1) ⊗ φ_(2)
    rhs = sum(Dphi[i, j] * reps.pi(W.hit(np.eye(n)[i], x)) @ reps.pi_hat(np.eye(n)[j])
              for i in range(n) for j in range(n) if Dphi[i, j])
    assert np.abs(lhs - rhs).max() < 1e-9


def test_hopf_jones_projections_are_haar():
    an = analysis("F1")
    assert np.abs(an.jones.e - an.haar.h).max() < 1e-12
    assert np.abs(an.jones.e_hat - an.haar.h_hat).max() < 1e-12


def test_trace_of_jones_projection():
    an = analysis("F2")
    val = an.weyl_trace(an.weyl, an.reps.pi_hat(an.jones.e_hat))
    assert val == pytest.approx(0.5)


def test_markov_expectation_of_e():
    an = analysis("F3")
    E = an.markov.E_L_M.matrix @ an.jones.e
    assert np.abs(E - an.W.unit / 5).max() < 1e-9


@pytest.mark.parametrize("name", ["F1", "F2", "F3", "S3"])
def test_gns_frame_is_unitary(name):
    """Operators of A act as *-representation in the GNS frame of ĥ."""
    an = analysis(name)
    W, reps = an.W, an.reps
    for x in np.eye(W.dim)[:6]:
        T = reps.frame(reps.pi(x))
        Ts = reps.frame(reps.pi(W.adjoint(x)))
        assert np.abs(T.conj().T - Ts).max() < 1e-9
