"""Acceptance criteria 1-11, one test function per criterion.

Tags: [PAPER] values are the closed forms printed for the B ⊗ B^op family
and the weak Kac case; [DERIVED] values come from the independent oracles in
``helpers`` (plain matrices, ranks, characters).  A per-criterion PASS/FAIL
summary is printed by ``conftest.py`` at the end of the run.
"""

from __future__ import annotations

import json

import numpy as np
import pytest
from click.testing import CliRunner

from helpers import ALL, F3_ORACLE, F3P_ORACLE, analysis
from whax import builders
from whax.cli import main
from whax.haar import block_traces
from whax.markov import (ce_from_phi, markov_ce, markov_trace_vector, random_inclusion, random_phi,
                         rn_derivative)
from whax.mmalg import LinearFunctional
from whax.wha import axiom_residuals

# pinned tolerances
TOL_CLOSED = 1e-9
TOL_KAC_F = 1e-10
TOL_INDEX = 1e-8
TOL_QB = 1e-8
TOL_RN = 1e-9
TOL_TL = 1e-8
TOL_PAIR = 1e-8
TOL_CHI = 1e-6


def _rank(m, tol=1e-9):
    s = np.linalg.svd(m, compute_uv=False)
    return int((s > tol * max(1.0, s[0] if len(s) else 0)).sum())


def _scalar(W, c):
    return c * W.unit


# ----------------------------------------------------------------------------
# 1

def test_criterion_01_bbop_oracle():
    an = analysis("F3")
    o = F3_ORACLE
    W, hd = an.W, an.haar
    assert W.dim == 25
    np.testing.assert_allclose(o.Gamma, [1, 4], atol=1e-12)                          # [PAPER]
    for got, want in [(hd.h, o.haar_integral()), (hd.g, o.grouplike()), (hd.g_L, o.grouplike_left()),
                      (hd.g_R, o.grouplike_right()), (an.metric.g_std, o.standard_metric()),
                      (hd.h_hat, o.haar_measure(np.eye(W.dim)))]:
        assert np.abs(got - want).max() < TOL_CLOSED
    tab = an.sectors
    np.testing.assert_allclose(tab.d, 1.0, atol=TOL_CLOSED)                           # [PAPER]
    np.testing.assert_allclose(an.pf[2].data, [[1, 2], [2, 4]], atol=TOL_CLOSED)       # [PAPER]
    one = W.unit
    assert np.abs(an.markov.I_M.element - 5 * one).max() < TOL_CLOSED                 # [PAPER] I_M = 5·1
    assert np.abs(an.haar_ce.index.element - 5 * one).max() < TOL_CLOSED              # [PAPER] I_H = 5·1
    np.testing.assert_allclose(an.pf[0], [0.2, 0.4], atol=TOL_CLOSED)                 # [PAPER]
    np.testing.assert_allclose(an.markov.f_hat, [5 ** -0.5], atol=TOL_CLOSED)         # [PAPER]
    tv = o.trace_vectors(tab.labels)
    np.testing.assert_allclose(an.traces.tau.trace_vector, tv["tau"], atol=TOL_CLOSED)
    np.testing.assert_allclose(an.traces.tau_S.trace_vector, tv["tau_S"], atol=TOL_CLOSED)
    np.testing.assert_allclose(an.markov.tau_M.trace_vector, tv["tau_M"], atol=TOL_CLOSED)


# ----------------------------------------------------------------------------
# 2

def test_criterion_02_generic_gap():
    an = analysis("F3'")
    o = F3P_ORACLE
    one = an.W.unit
    np.testing.assert_allclose(o.Gamma, [1, 4.5], atol=1e-12)                         # [DERIVED]
    assert np.abs(an.haar_ce.index.element - 5.5 * one).max() < TOL_CLOSED            # [PAPER] I_H = tr γ²
    assert np.abs(an.markov.I_M.element - 5 * one).max() < TOL_CLOSED                 # [PAPER] I_M = dim B
    assert an.haar_ce.index.values[0] > an.markov.I_M.values[0]
    assert np.abs(an.haar.h - o.haar_integral()).max() < TOL_CLOSED


# ----------------------------------------------------------------------------
# 3

@pytest.mark.parametrize("name,index", [("F2", 2), ("F1", 2), ("S3", 6)])
def test_criterion_03_weak_kac(name, index):
    an = analysis(name)
    W, lat = an.W, an.lattice
    n = W.dim
    kac = an.kac
    # independent evaluation of two of the predicates
    s2 = np.abs(W.antipode @ W.antipode - np.eye(n)).max() < 1e-10
    eye = np.eye(n)
    tracial = max(abs(an.haar.h_hat @ (W.mul(eye[i], eye[j]) - W.mul(eye[j], eye[i])))
                  for i in range(n) for j in range(n)) < 1e-10
    assert s2 and tracial
    assert kac.h_hat_tracial == kac.s2_identity == kac.eps_g_R == True  # noqa: E712
    I_H, I_M = an.haar_ce.index.values, an.markov.I_M.values
    np.testing.assert_allclose(I_H, I_M, atol=TOL_INDEX)
    np.testing.assert_allclose(I_M, np.rint(I_M), atol=TOL_INDEX)
    np.testing.assert_allclose(I_M, index, atol=TOL_INDEX)                            # [PAPER]/[DERIVED]
    f = an.pf[0]
    k = an.weights.k
    for mu, z in enumerate(lat.z_L):
        L = W.left(z)
        ratio = _rank(L) / _rank(L @ lat.A_L)                                          # [DERIVED] ranks
        H = lat.hyper_of_vacuum[mu]
        assert abs(I_M[H] - ratio) < 1e-12
        dim_zH = _rank(W.left(lat.z_H[H]))
        assert abs(f[mu] - np.sqrt(k[mu] / dim_zH)) < TOL_KAC_F                        # [PAPER]


# ----------------------------------------------------------------------------
# 4

@pytest.mark.parametrize("name", ALL)
def test_criterion_04_dimension_calculus(name):
    an = analysis(name)
    W, tab, k = an.W, an.sectors, an.weights.k
    kl = k[list(tab.left)]
    kr = k[list(tab.right)]
    gs = an.metric.g_std
    d1 = block_traces(W, gs).real / kl
    d2 = block_traces(W, W.algebra.inv(gs)).real / kr
    d3 = block_traces(W, an.haar.g).real / np.sqrt(kl * kr)
    assert np.abs(d1 - d2).max() < TOL_CLOSED and np.abs(d1 - d3).max() < TOL_CLOSED
    d, N = tab.d, an.fusion
    for p in range(len(tab)):
        for q in range(len(tab)):
            if tab.right[p] == tab.left[q]:
                assert abs(d[p] * d[q] - N[p, q] @ d) < 1e-8
            else:
                assert not N[p, q].any()
    from whax.sectors import module_dimension_matrix as dm
    eye = np.eye(len(tab), dtype=int)
    for p in range(len(tab)):
        Dp = dm(tab, eye[p]).data
        assert np.abs(dm(tab, eye[tab.conj[p]]).data - Dp.T).max() < 1e-8
        for q in range(len(tab)):
            assert np.abs(dm(tab, N[p, q]).data - Dp @ dm(tab, eye[q]).data).max() < 1e-8


# ----------------------------------------------------------------------------
# 5

N_RANDOM = 100


def _random_x(B, rng):
    return B.units @ (rng.standard_normal(B.total_dim) + 1j * rng.standard_normal(B.total_dim))


def _central_norm(B, x):
    return max(np.abs(np.linalg.eigvals(b)).max() for b in B.blocks(x))


def test_criterion_05_index_calculus():
    rng = np.random.default_rng(5)
    worst_qb = worst_rn = 0.0
    for _ in range(N_RANDOM):
        incl = random_inclusion(rng, max_size=12)
        B = incl.B
        ce = ce_from_phi(incl, random_phi(incl, rng))
        E = ce.matrix
        x = _random_x(B, rng)
        recon = sum(B.mul(a, E @ B.mul(b, x)) for a, b in ce.quasibasis)
        worst_qb = max(worst_qb, float(np.abs(recon - x).max()))
        lam2 = np.linalg.norm(incl.Lam, 2) ** 2                                       # [DERIVED]
        assert _central_norm(B, ce.index) >= lam2 - 1e-9
        mce = markov_ce(incl)
        assert np.abs(mce.index - lam2 * B.identity()).max() < TOL_INDEX
        for u in B.units.T:
            assert np.abs(B.mul(mce.index, u) - B.mul(u, mce.index)).max() < TOL_INDEX
        # Radon-Nikodym against the Markov trace: φ = ψ(s ·), s = a z, a ∈ A positive, z ∈ Z(B) positive
        psi = LinearFunctional.from_trace_vector(B, markov_trace_vector(incl))
        a = _random_x(incl.A, rng)
        a = B.mul(a, B.star(a)) + 0.5 * B.identity()
        z = incl.central(rng.uniform(0.5, 2.0, B.nblocks))
        s = B.mul(a, z)
        phi = np.array([psi(B.mul(s, u)) for u in np.eye(B.ambient_dim)])
        rn = rn_derivative(incl, phi, psi)
        si = B.inv(rn.s)
        r1 = B.mul(rn.E_phi @ si, rn.s)
        r2 = B.mul(B.inv(rn.E_psi @ rn.s), rn.s)
        r3 = B.mul(rn.s, B.inv(rn.E_psi @ rn.s))
        scale = max(1.0, np.abs(r1).max())
        worst_rn = max(worst_rn, float(max(np.abs(r1 - r2).max(), np.abs(r2 - r3).max())) / scale)
        y = _random_x(B, rng)
        assert np.abs(rn.E_phi @ y - rn.E_psi @ B.mul(r1, y)).max() < 1e-8 * scale
    assert worst_qb < TOL_QB
    assert worst_rn < TOL_RN


# ----------------------------------------------------------------------------
# 6

@pytest.mark.parametrize("name", ALL)
def test_criterion_06_markov_theorem(name):
    an = analysis(name)
    md, tab = an.markov, an.sectors
    I = md.I_M.element
    assert np.abs(md.E_L_M.index - I).max() < TOL_INDEX
    assert np.abs(md.E_R_M.index - I).max() < TOL_INDEX
    N = an.fusion
    n = np.array(tab.n, float)
    NA = np.einsum("pqr,q->pr", N, n)                                                 # p ⊠ (regular module)
    D = an.pf[2].data
    Lam = md.E_L_M.inclusion.Lam.astype(float)
    for H, vacua in enumerate(tab.hypersectors):
        secs = [q for q in range(len(tab)) if tab.hyper[q] == H]
        rho_D = max(abs(np.linalg.eigvals(D[np.ix_(vacua, vacua)])))
        rho_N = max(abs(np.linalg.eigvals(NA[np.ix_(secs, secs)])))
        cols = [a for a in range(Lam.shape[1]) if Lam[secs, a].any()]
        rho_L = np.linalg.norm(Lam[np.ix_(secs, cols)], 2) ** 2
        for rho in (rho_D, rho_N, rho_L):
            assert abs(rho - md.I_M.values[H]) < TOL_INDEX


# ----------------------------------------------------------------------------
# 7

@pytest.mark.parametrize("name", ALL)
def test_criterion_07_boundary_dimensions(name):
    an = analysis(name)
    W, bd, tab = an.W, an.boundary, an.sectors
    assert bd.residuals["d_a from A and from Â"] < TOL_CLOSED
    assert bd.residuals["d_b from A and from Â"] < TOL_CLOSED
    assert np.abs(bd.d_LR @ bd.d_RL - an.pf[2].data).max() < TOL_CLOSED
    assert np.abs(bd.d_RL @ bd.d_LR - an.dual.pf[2].data).max() < TOL_CLOSED
    # 1_(2) S(1_(1)) against g'_L^-1 Σ_a e_a n_a / d_a
    U = W.delta_one
    n = W.dim
    eye = np.eye(n)
    lhs = sum(U[i, j] * W.mul(eye[j], W.S(eye[i])) for i in range(n) for j in range(n) if U[i, j])
    rhs = W.mul(W.algebra.inv(an.metric.g_std_L), sum(e * na / da for e, na, da in zip(bd.e_a, bd.n_a, bd.d_a)))
    assert np.abs(lhs - rhs).max() < TOL_CLOSED
    assert bd.residuals["tr^L(x) = ε(x 1_(2)S(1_(1)))"] < TOL_CLOSED
    sums = np.zeros(len(tab.vacua))
    for a, mu in enumerate(bd.a_left):
        sums[mu] += bd.d_a[a] ** 2
    for vacua in tab.hypersectors:
        assert np.ptp(sums[list(vacua)]) < TOL_CLOSED


# ----------------------------------------------------------------------------
# 8

@pytest.mark.parametrize("name", ["F1", "F2", "F3"])
def test_criterion_08_temperley_lieb(name):
    an = analysis(name)
    W, reps, jn = an.W, an.reps, an.jones
    P, Q = reps.pi(jn.e), reps.pi_hat(jn.e_hat)
    Iinv = reps.pi(W.algebra.inv(an.markov.I_M.element))
    assert np.abs(P @ P - P).max() < TOL_TL and np.abs(Q @ Q - Q).max() < TOL_TL
    assert np.abs(P @ Q @ P - Iinv @ P).max() < TOL_TL
    assert np.abs(Q @ P @ Q - Iinv @ Q).max() < TOL_TL
    EL = an.markov.E_L_M.matrix
    ER_hat = an.dual.markov.E_R_M.matrix
    for x in np.eye(W.dim):
        assert np.abs(Q @ reps.pi(x) @ Q - reps.pi(EL @ x) @ Q).max() < TOL_TL
        assert np.abs(P @ reps.pi_hat(x) @ P - reps.pi_hat(ER_hat @ x) @ P).max() < TOL_TL
    tr = an.weyl_trace
    assert tr.residuals["τ^W = τ^W'"] < TOL_TL
    for key, r in tr.residuals.items():
        if key.startswith("trace vector on"):
            assert r < TOL_TL, key


@pytest.mark.parametrize("name", ALL)
def test_criterion_08_reciprocity(name):
    an = analysis(name)
    rec, bd, tab = an.reciprocity, an.boundary, an.sectors
    assert np.array_equal(rec["N_left"], rec["N_mid"])
    assert np.array_equal(np.transpose(rec["N_right"], (1, 2, 0)), rec["N_mid"])
    lam = rec["Lambda"]
    for q in range(len(tab)):
        for a in range(len(bd.e_a)):
            assert (lam[q, a] > 0) == (bd.a_left[a] == tab.left[q])


# ----------------------------------------------------------------------------
# 9

@pytest.mark.parametrize("name,pairs", [("F2", 16), ("F3", 625)])
def test_criterion_09_pairing(name, pairs):
    an = analysis(name)
    W, reps, jn, weyl, tr = an.W, an.reps, an.jones, an.weyl, an.weyl_trace
    alg = W.algebra
    n = W.dim
    eye = np.eye(n)
    pre = reps.pi(alg.power(an.markov.I_M.element, 1.5)) @ reps.pi_hat(jn.e_hat) @ reps.pi(jn.e)
    gl, gr = alg.power(jn.g2_L, 0.5), alg.power(jn.g2_R, 0.5)
    right = [reps.pi(W.prod(gl, eye[i], gr)) for i in range(n)]
    worst, count = 0.0, 0
    for j in range(n):
        left = pre @ reps.pi_hat(eye[j])
        for i in range(n):
            val = tr(weyl, left @ right[i])
            worst = max(worst, abs(val - (i == j)))
            count += 1
    assert count == pairs
    assert worst < TOL_PAIR


# ----------------------------------------------------------------------------
# 10

@pytest.mark.parametrize("name", ALL)
def test_criterion_10_frobenius_schur(name):
    an = analysis(name)
    W, tab = an.W, an.sectors
    n = W.dim
    H = W.coproduct(an.haar.h)
    eye = np.eye(n)
    iota = sum(H[i, j] * W.mul(eye[i], eye[j]) for i in range(n) for j in range(n) if H[i, j])
    tau = block_traces(W, an.haar.g).real
    for q, b in enumerate(W.algebra.blocks(iota)):
        c = np.trace(b) / b.shape[0]
        assert np.abs(b - c * np.eye(b.shape[0])).max() < TOL_CHI
        chi = c * tau[q]
        assert min(abs(chi - v) for v in (-1, 0, 1)) < TOL_CHI
        assert int(np.rint(chi.real)) == tab.chi[q]
        if tab.conj[q] != q:
            assert tab.chi[q] == 0
    if name in ("Z3", "F3"):
        nonself = [q for q in range(len(tab)) if tab.conj[q] != q]
        assert nonself and all(tab.chi[q] == 0 for q in nonself)
        if name == "F3":
            assert all(tab.is_soliton(q) for q in nonself)


# ----------------------------------------------------------------------------
# 11

BUILD_ARGS = {
    "F1": ["group", "--cyclic", "2"],
    "F2": ["groupoid", "--pair", "2"],
    "F3": ["bbop", "--dims", "1,2", "--gamma", "1;sqrt2,sqrt2"],
    "F3'": ["bbop", "--dims", "1,2", "--gamma", "1;sqrt3,sqrt(3/2)"],
    "Z3": ["group", "--cyclic", "3"],
    "S3": ["group", "--symmetric", "3"],
    "Z2+Z3": ["groupoid", "--cyclic", "2", "--cyclic", "3"],
    "C": ["bbop", "--dims", "1", "--gamma", "1"],
}

AXIOMS = set(axiom_residuals(builders.fixture("C")))


@pytest.mark.parametrize("name", ALL)
def test_criterion_11_cli_round_trip(name, tmp_path):
    runner = CliRunner()
    path = str(tmp_path / "w.wha.json")
    r = runner.invoke(main, ["build", *BUILD_ARGS[name], "-o", path])
    assert r.exit_code == 0, r.output
    r = runner.invoke(main, ["check", path])
    assert r.exit_code == 0, r.output
    r = runner.invoke(main, ["report", path, "--format", "json"])
    assert r.exit_code == 0, r.output
    rep = json.loads(r.output)
    assert rep["passed"]
    np.testing.assert_allclose(rep["markov_index"], analysis(name).markov.I_M.values, atol=1e-9)
    if name == "F3":
        assert rep["markov_index"] == pytest.approx([5.0]) and rep["haar_index"] == pytest.approx([5.0])

    # one corruption per kind of structure constant
    rng = np.random.default_rng(11)
    rec = json.loads(open(path, "rb").read())
    n = rec["dim"]
    sites = [("mult", int(rng.integers(len(rec["mult"])))), ("coproduct", int(rng.integers(len(rec["coproduct"])))),
             ("unit", int(rng.integers(n))), ("counit", int(rng.integers(n))),
             ("antipode", tuple(rng.integers(n, size=2))), ("star", tuple(rng.integers(n, size=2)))]
    for field, where in sites:
        bad = json.loads(json.dumps(rec))
        if field in ("mult", "coproduct"):
            bad[field][where][3] += 1e-3
        elif field in ("unit", "counit"):
            bad[field][where][0] += 1e-3
        else:
            mat = bad["antipode"] if field == "antipode" else bad["star"]["matrix"]
            mat[where[0]][where[1]][0] += 1e-3
        bpath = str(tmp_path / f"bad-{field}.wha.json")
        with open(bpath, "w") as fh:
            json.dump(bad, fh)
        r = runner.invoke(main, ["check", bpath])
        assert r.exit_code == 1, (field, r.output)
        assert "FAIL  axioms" in r.output
        named = r.output.split("first failing invariant: axioms: AxiomViolation: ")[-1]
        assert any(named.startswith(ax) for ax in AXIOMS), r.output
