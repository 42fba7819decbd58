import numpy as np
import pytest

from helpers import ALL, analysis, character_fusion, s3_characters
from whax.errors import NotIntertwiner, UnknownSector
from whax.sectors import (conjugate_module, fuse, irreducible_module, left_inverse_value, multiplicities,
                          regular_module, right_inverse_value, tensor_module)


def test_s3_fusion_matches_characters():
    an = analysis("S3")
    oracle = character_fusion(s3_characters())
    for (p, q), want in oracle.items():
        assert fuse(an.W, an.sectors, p, q) == want


def test_z3_fusion_is_addition():
    an = analysis("Z3")
    labels = an.sectors.labels            # trivial, omega, omega2
    for a in range(3):
        for b in range(3):
            assert fuse(an.W, an.sectors, labels[a], labels[b]) == {labels[(a + b) % 3]: 1}


def test_bbop_fusion_is_matrix_unit_calculus():
    """[DERIVED] (μ,ν) ⊠ (ν',λ) = δ_νν' (μ,λ)."""
    an = analysis("F3")
    tab = an.sectors
    for p in tab.labels:
        for q in tab.labels:
            (m, n), (n2, l) = (tuple(x.strip("()").split(",")) for x in (p, q))
            want = {f"({m},{l})": 1} if n == n2 else {}
            assert fuse(an.W, tab, p, q) == want


@pytest.mark.parametrize("name", ALL)
def test_regular_module_multiplicities(name):
    an = analysis(name)
    W, tab = an.W, an.sectors
    np.testing.assert_array_equal(multiplicities(W, regular_module(W)), tab.n)


@pytest.mark.parametrize("name", ALL)
def test_conjugate_module_is_conjugate_sector(name):
    an = analysis(name)
    W, tab = an.W, an.sectors
    for q in range(len(tab)):
        m = multiplicities(W, conjugate_module(W, irreducible_module(W, q)))
        assert m[tab.conj[q]] == 1 and m.sum() == 1


@pytest.mark.parametrize("name,dims", [("F1", [1, 1]), ("Z3", [1, 1, 1]), ("S3", [1, 1, 2]), ("F3", [1, 1, 1, 1])])
def test_dimensions(name, dims):
    """Hopf case: d_q = n_q; B ⊗ B^op: d ≡ 1."""
    np.testing.assert_allclose(analysis(name).sectors.d, dims, atol=1e-9)


@pytest.mark.parametrize("name,chi", [("F1", (1, 1)), ("Z3", (1, 0, 0)), ("S3", (1, 1, 1))])
def test_indicators(name, chi):
    assert analysis(name).sectors.chi == chi


def test_soliton_and_vacuum_classification():
    tab = analysis("F3").sectors
    kinds = {lab: (tab.is_vacuum(q), tab.is_soliton(q)) for q, lab in enumerate(tab.labels)}
    assert kinds == {"(1,1)": (True, False), "(2,2)": (True, False), "(1,2)": (False, True),
                     "(2,1)": (False, True)}


def test_tensor_of_trivial_is_identity():
    an = analysis("S3")
    W = an.W
    triv = irreducible_module(W, an.sectors.index("trivial"))
    for q in range(len(an.sectors)):
        V = irreducible_module(W, q)
        m = multiplicities(W, tensor_module(W, triv, V))
        assert m[q] == 1 and m.sum() == 1


def test_unknown_sector():
    an = analysis("F1")
    with pytest.raises(UnknownSector):
        fuse(an.W, an.sectors, "nope", "trivial")


@pytest.mark.parametrize("name", ["F2", "F3", "S3"])
def test_inverse_values_of_identity(name):
    """For T = 1 on an irreducible: left inverse lands in A^L, right inverse in A^R (1_(2) ∈ A^L)."""
    an = analysis(name)
    W, lat = an.W, an.lattice
    for q in range(len(an.sectors)):
        V = irreducible_module(W, q)
        T = np.eye(V.dim)
        l = left_inverse_value(W, V, T, an.metric.g_std)
        r = right_inverse_value(W, V, T, an.metric.g_std)
        for x, basis in ((l, lat.A_L), (r, lat.A_R)):
            c = np.linalg.lstsq(basis, x, rcond=None)[0]
            assert np.abs(basis @ c - x).max() < 1e-9


def test_non_intertwiner_rejected():
    an = analysis("S3")
    V = irreducible_module(an.W, an.sectors.index("standard"))
    with pytest.raises(NotIntertwiner):
        left_inverse_value(an.W, V, np.array([[1.0, 0.0], [0.0, 2.0]]), an.metric.g_std)
