import numpy as np
import pytest

from helpers import ALL
from whax import builders
from whax.errors import AxiomViolation
from whax.wha import (axiom_residuals, check_axioms, counital_projections, distinguished_subalgebras,
                      load_and_verify)


@pytest.fixture(scope="module", params=ALL)
def W(request):
    return builders.fixture(request.param)


def test_axioms_hold(W):
    res = axiom_residuals(W)
    assert max(res.values()) < 1e-10
    assert check_axioms(W) == res


def test_double_dual_is_original(W):
    DD = W.dual().dual()
    assert np.abs(DD.mult.dense() - W.mult.dense()).max() < 1e-12
    assert np.abs(DD.comult.dense() - W.comult.dense()).max() < 1e-12
    assert np.abs(DD.antipode - W.antipode).max() < 1e-12


def test_dual_satisfies_axioms(W):
    assert max(axiom_residuals(W.dual()).values()) < 1e-10


def test_counital_projections_by_hand(W, rng):
    """Π^L(x) = ε(1_(1) x) 1_(2) and Π^R(x) = 1_(1) ε(x 1_(2)), spelled out on Δ(1)."""
    n = W.dim
    U = W.delta_one
    eye = np.eye(n)
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    PL = sum(U[i, j] * W.eps(W.mul(eye[i], x)) * eye[j] for i in range(n) for j in range(n))
    PR = sum(U[i, j] * W.eps(W.mul(x, eye[j])) * eye[i] for i in range(n) for j in range(n))
    got_L, got_R = counital_projections(W, x)
    assert np.abs(got_L - PL).max() < 1e-10
    assert np.abs(got_R - PR).max() < 1e-10
    again = counital_projections(W, got_L)[0]
    assert np.abs(again - got_L).max() < 1e-10


def test_arrow_action_by_hand(W, rng):
    """φ ⇀ x = x_(1) φ(x_(2)) straight from the coproduct tensor."""
    n = W.dim
    x = rng.standard_normal(n)
    phi = rng.standard_normal(n)
    D = W.comult.dense()
    want = np.einsum("ijk,k,j->i", D, x, phi)
    assert np.abs(W.hit(phi, x) - want).max() < 1e-12
    want_r = np.einsum("ijk,k,i->j", D, x, phi)
    assert np.abs(W.hit_right(x, phi) - want_r).max() < 1e-12


def test_left_and_right_subalgebras_commute(W):
    lat = distinguished_subalgebras(W)
    for a in lat.A_L.T:
        for b in lat.A_R.T:
            assert np.abs(W.mul(a, b) - W.mul(b, a)).max() < 1e-10


@pytest.mark.parametrize("name,dim_L", [("F1", 1), ("Z3", 1), ("S3", 1), ("F2", 2), ("F3", 5), ("F3'", 5),
                                        ("Z2+Z3", 2), ("C", 1)])
def test_left_subalgebra_dimension(name, dim_L):
    """Group algebras: A^L = ℂ1; groupoids: functions on objects; B ⊗ B^op: B ⊗ 1 (dim B = 5)."""
    lat = distinguished_subalgebras(builders.fixture(name))
    assert lat.A_L.shape[1] == dim_L and lat.A_R.shape[1] == dim_L


def test_pair_groupoid_left_subalgebra_is_diagonal():
    W = builders.fixture("F2")
    lat = distinguished_subalgebras(W)
    labels = list(W.basis_labels)
    diag = np.zeros((4, 2))
    diag[labels.index("g11"), 0] = diag[labels.index("g22"), 1] = 1
    both = np.hstack([lat.A_L, diag])
    assert np.linalg.matrix_rank(both) == 2


def test_corrupted_structure_is_rejected():
    W = builders.fixture("F2")
    rec = builders._payload(W)
    rec["mult"][0][3] += 1e-3
    with pytest.raises(AxiomViolation) as exc:
        load_and_verify(rec)
    assert exc.value.residual > 1e-4
