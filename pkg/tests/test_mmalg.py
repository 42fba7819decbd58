import numpy as np
import pytest
from scipy.linalg import block_diag
from scipy.stats import unitary_group

from whax.errors import WhaxError
from whax.mmalg import (MultiMatrixAlgebra, NonNegMatrix, as_integer, orth, perron_frobenius,
                        wedderburn_decompose)




def test_standard_algebra_matches_block_matrices(rng):
    A = MultiMatrixAlgebra.standard((1, 2, 3))
    assert A.total_dim == 14 and A.nblocks == 3
    x, y = rng.standard_normal(14), rng.standard_normal(14)
    X, Y = A.block_diag(x), A.block_diag(y)
    assert np.abs(A.block_diag(A.mul(x, y)) - X @ Y).max() < 1e-12
    assert np.abs(A.left_matrix(x) @ y - A.mul(x, y)).max() < 1e-12
    assert np.abs(A.right_matrix(x) @ y - A.mul(y, x)).max() < 1e-12
    assert np.abs(A.identity() - A.units @ np.concatenate([np.eye(n).ravel() for n in (1, 2, 3)])).max() < 1e-12


def test_power_and_inverse(rng):
    A = MultiMatrixAlgebra.standard((2, 2))
    b = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    x = A.element([b @ b.conj().T + np.eye(2), np.diag([2.0, 3.0])])
    r = A.power(x, 0.5)
    assert np.abs(A.mul(r, r) - x).max() < 1e-10
    assert np.abs(A.mul(A.inv(x), x) - A.identity()).max() < 1e-10


@pytest.mark.parametrize("dims", [(1,), (2,), (1, 2), (1, 1, 3)])
def test_wedderburn_recovers_block_sizes(dims, rng):
    """Oracle: the block sizes used to build the scrambled algebra."""
    N = sum(dims)
    offs = np.cumsum((0,) + dims)[:-1]
    mats = []
    for o, n in zip(offs, dims):
        for i in range(n):
            for j in range(n):
                m = np.zeros((N, N), complex)
                m[o + i, o + j] = 1
                mats.append(m)
    d = len(mats)
    U = unitary_group.rvs(d, random_state=rng) if d > 1 else np.eye(1)
    basis = np.einsum("ab,bij->aij", U, np.array(mats))
    flat = basis.reshape(d, -1)

    def coords(x):
        return np.linalg.lstsq(flat.T, x.reshape(-1), rcond=None)[0]

    mult = np.zeros((d, d, d), complex)
    for i in range(d):
        for j in range(d):
            mult[:, i, j] = coords(basis[i] @ basis[j])
    # x* = star @ conj(x)
    star = np.stack([coords(basis[k].conj().T) for k in range(d)], axis=1)
    alg = wedderburn_decompose(d, mult, star, coords(np.eye(N)), rng=rng)
    assert sorted(alg.block_dims) == sorted(dims)
    x, y = rng.standard_normal(d), rng.standard_normal(d)
    xy = np.einsum("kij,i,j->k", mult, x, y)
    assert np.abs(alg.mul(x, y) - xy).max() < 1e-9


def test_perron_frobenius_against_numpy(rng):
    m = rng.uniform(0.1, 1.0, (5, 5))
    (comp,) = perron_frobenius(NonNegMatrix(m))
    w, v = np.linalg.eig(m)
    k = np.argmax(w.real)
    assert abs(comp.eigenvalue - w[k].real) < 1e-10
    ref = np.abs(v[:, k].real)
    assert np.abs(comp.vector - ref / ref.sum()).max() < 1e-10


def test_perron_frobenius_reducible():
    m = block_diag([[2.0]], [[1.0, 1.0], [1.0, 1.0]])
    vals = sorted(c.eigenvalue for c in perron_frobenius(NonNegMatrix(m)))
    assert vals == pytest.approx([2.0, 2.0])


def test_nonneg_rejects_negative():
    with pytest.raises(ValueError):
        NonNegMatrix(np.array([[1.0, -1.0]]))


def test_as_integer_and_orth():
    assert as_integer(2.0000000001) == 2
    with pytest.raises(WhaxError):
        as_integer(2.4)
    a = np.array([[1.0, 2.0], [2.0, 4.0], [0.0, 0.0]])
    q = orth(a)
    assert q.shape[1] == 1 and np.abs(q.conj().T @ q - 1).max() < 1e-12
