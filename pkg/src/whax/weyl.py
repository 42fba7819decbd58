"""The Weyl algebra ``A ⋊ Â`` inside ``End(A)``, its Jones projections and Markov trace.

Operators act on coordinate vectors of ``A``.  The Hilbert structure is the
GNS inner product of the Haar state, ``(x, y) = ĥ(x* y)``; writing its Gram
matrix as ``K^H K``, an operator ``T`` becomes ``K T K^{-1}`` in an orthonormal
frame, where adjoints are plain conjugate transposes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import (GNSDegenerate, IllDefinedTrace, PairingResidual, RankInstability, ReciprocityFailure,
                     TLResidual)
from .mmalg import _assemble, as_integer, decompose_star_algebra, make_rng
from .wha import WeakHopfStructure

if TYPE_CHECKING:
    from .analysis import Analysis

__all__ = ["StandardReps", "WeylAlgebra", "JonesData", "WeylTrace", "standard_reps", "build_weyl",
           "jones_projections", "amalgamated_dimension", "weyl_markov_trace", "frobenius_reciprocity", "pairing_check", "TL_TOL"]

TL_TOL = 1e-8
RANK_TOL = 1e-9
RANK_GAP = 1e-6


def _raise_if(exc, name: str, r: float, tol: float = TL_TOL, scale: float = 1.0):
    if not np.isfinite(r) or r > tol * max(1.0, scale):
        raise exc(name, float(r))


# ----------------------------------------------------------------------------
# standard representations

@dataclass(frozen=True, eq=False)
class StandardReps:
    """``π`` and ``π'`` on the GNS space of ``ĥ``, one operator per basis element."""

    W: WeakHopfStructure
    A_ops: np.ndarray        # π(e_k) = π'(e_k), left multiplication
    hat_ops: np.ndarray      # π(φ_k): y ↦ φ_k ⇀ y
    hat_ops_prime: np.ndarray  # π'(φ_k): y ↦ y ↼ Ŝ^{-1}(φ_k)
    K: np.ndarray
    K_inv: np.ndarray
    residuals: dict

    def pi(self, x) -> np.ndarray:
        return np.tensordot(np.asarray(x, dtype=complex), self.A_ops, axes=(0, 0))

    def pi_hat(self, phi, prime: bool = False) -> np.ndarray:
        ops = self.hat_ops_prime if prime else self.hat_ops
        return np.tensordot(np.asarray(phi, dtype=complex), ops, axes=(0, 0))

    def frame(self, T) -> np.ndarray:
        return self.K @ T @ self.K_inv

    def unframe(self, T) -> np.ndarray:
        return self.K_inv @ T @ self.K

    def adjoint(self, T) -> np.ndarray:
        """Adjoint for the GNS inner product, in coordinates."""
        return self.unframe(self.frame(T).conj().T)


def standard_reps(W: WeakHopfStructure, h_hat, *, rng=None, tol: float = TL_TOL) -> StandardReps:
    n = W.dim
    D = W.dual()
    eye = np.eye(n)
    gram = np.stack([h_hat @ W.left(W.adjoint(eye[i])) for i in range(n)])     # ĥ(e_i* e_j)
    gram = gram.conj()  # sesquilinear in the first slot
    if np.abs(gram - gram.conj().T).max() > 1e-9 * np.abs(gram).max():
        raise GNSDegenerate("Haar state does not give a hermitian form")
    gram = (gram + gram.conj().T) / 2
    try:
        L = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError:
        raise GNSDegenerate("Haar state is not faithful") from None
    K = L.conj().T
    K_inv = np.linalg.inv(K)
    A_ops = np.stack([W.left(eye[k]) for k in range(n)])
    hat_ops = np.stack([W.hit_matrix(eye[k]) for k in range(n)])
    hat_ops_prime = np.stack([np.stack([W.hit_right(eye[j], D.S_inv(eye[k])) for j in range(n)], axis=1)
                              for k in range(n)])
    reps = StandardReps(W, A_ops, hat_ops, hat_ops_prime, K, K_inv, {})
    rng = make_rng(rng)
    x = rng.normal(size=n) + 1j * rng.normal(size=n)
    phi = rng.normal(size=n) + 1j * rng.normal(size=n)
    psi = rng.normal(size=n) + 1j * rng.normal(size=n)
    res = reps.residuals
    res["π(x*) = π(x)†"] = float(np.abs(reps.pi(W.adjoint(x)) - reps.adjoint(reps.pi(x))).max())
    for prime in (False, True):
        tag = "π'" if prime else "π"
        p = lambda f: reps.pi_hat(f, prime)  # noqa: E731
        res[f"{tag}(φ*) = {tag}(φ)†"] = float(np.abs(p(D.adjoint(phi)) - reps.adjoint(p(phi))).max())
        res[f"{tag}(φψ) = {tag}(φ){tag}(ψ)"] = float(np.abs(p(D.mul(phi, psi)) - p(phi) @ p(psi)).max())
        res[f"{tag}(1̂) = 1"] = float(np.abs(p(D.unit) - np.eye(n)).max())
    # φ x = x_(1) <x_(2), φ_(1)> φ_(2)
    C = W.coproduct(x)
    rhs = sum(C[i, j] * reps.pi(eye[i]) @ reps.pi_hat(W.dual_hit_right(phi, eye[j]))
              for i, j in zip(*np.nonzero(np.abs(C) > 1e-14)))
    res["commutation relation"] = float(np.abs(reps.pi_hat(phi) @ reps.pi(x) - rhs).max())
    scale = max(np.abs(x).max(), np.abs(phi).max()) ** 2
    for name, r in res.items():
        _raise_if(TLResidual, name, r, tol, scale)
    return reps


# ----------------------------------------------------------------------------
# the algebra

@dataclass(frozen=True, eq=False)
class WeylAlgebra:
    """``π(A)π(Â)`` (or the primed version) as a *-algebra of operators.

    ``basis`` holds Frobenius-orthonormal framed operators; ``alg`` is the
    Wedderburn decomposition in coefficients with respect to that basis.
    """

    reps: StandardReps
    prime: bool
    basis: np.ndarray
    alg: object

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def coords(self, T, *, framed: bool = False, tol: float = 1e-8) -> np.ndarray:
        """Coefficients of the operator ``T`` (coordinate form unless ``framed``)."""
        F = T if framed else self.reps.frame(T)
        flat = self.basis.reshape(self.dim, -1)
        c = flat.conj() @ F.reshape(-1)
        r = float(np.abs(flat.T @ c - F.reshape(-1)).max())
        _raise_if(TLResidual, "operator lies in the Weyl algebra", r, tol, np.abs(F).max())
        return c

    def operator(self, c) -> np.ndarray:
        """Coordinate form of the element with coefficients ``c``."""
        return self.reps.unframe(np.tensordot(c, self.basis, axes=(0, 0)))

    def pi(self, x) -> np.ndarray:
        return self.reps.pi(x)

    def pi_hat(self, phi) -> np.ndarray:
        return self.reps.pi_hat(phi, self.prime)


def _span(ops: np.ndarray, what: str) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal basis (rows) of the span of ``ops`` plus the singular values."""
    flat = ops.reshape(ops.shape[0], -1)
    _, s, vh = np.linalg.svd(flat, full_matrices=False)
    if s[0] == 0:
        raise RankInstability(f"{what}: empty span")
    rel = s / s[0]
    r = int(np.sum(rel > RANK_TOL))
    if r < len(rel) and rel[r] > RANK_TOL * 1e-3:
        raise RankInstability(f"{what}: singular value {rel[r]:.2e} sits near the rank threshold")
    if rel[r - 1] < RANK_GAP:
        raise RankInstability(f"{what}: smallest kept singular value {rel[r - 1]:.2e} is too small")
    return vh[:r], s


def build_weyl(W: WeakHopfStructure, reps: StandardReps, *, prime: bool = False, h_hat=None,
               rng=None, tol: float = TL_TOL) -> WeylAlgebra:
    """Weyl algebra spanned by ``π(e_i)π(φ_j)``; checks it equals ``π(A)π(ĥ)π(A)``."""
    n = W.dim
    fr = reps.frame
    A = np.stack([fr(a) for a in reps.A_ops])
    H = np.stack([fr(reps.pi_hat(np.eye(n)[k], prime)) for k in range(n)])
    prods = (A[:, None] @ H[None, :]).reshape(n * n, n, n)
    vh, _ = _span(prods, "span of π(A)π(Â)")
    d = vh.shape[0]
    expect = amalgamated_dimension(W)
    if d != expect:
        raise RankInstability(f"Weyl algebra has dimension {d}, the amalgamated tensor product {expect}")
    if h_hat is None:
        from .haar import haar_integral
        h_hat = haar_integral(W)[1]
    Hh = fr(reps.pi_hat(h_hat, prime))
    jones = ((A @ Hh)[:, None] @ A[None, :]).reshape(n * n, n, n)
    vj, _ = _span(jones, "span of π(A)π(ĥ)π(A)")
    if vj.shape[0] != d:
        raise RankInstability(f"π(A)π(ĥ)π(A) spans {vj.shape[0]} dimensions, Weyl algebra {d}")
    overlap = np.linalg.svd(vj.conj() @ vh.T, compute_uv=False)
    _raise_if(RankInstability, "π(A)π(ĥ)π(A) = π(A)π(Â)", float(1 - overlap.min()), tol)
    basis = vh.reshape(d, n, n)
    flat = basis.reshape(d, -1)

    def coords_of(x):
        return flat.conj() @ x.reshape(-1)

    gens = np.concatenate([A, H])
    dims, units = decompose_star_algebra(basis, coords_of, gens=gens, rng=make_rng(rng))
    return WeylAlgebra(reps, prime, basis, _assemble(dims, units, None))


def amalgamated_dimension(W: WeakHopfStructure) -> int:
    """``dim A ⊗_{A^R} Â`` with ``A^R`` acting on ``Â`` through ``x ↦ 1̂↼x``."""
    from .wha import distinguished_subalgebras
    n = W.dim
    D = W.dual()
    eye = np.eye(n)
    rel = [np.kron(W.right(a), eye) - np.kron(eye, D.left(W.dual_hit_right(W.counit, a)))
           for a in distinguished_subalgebras(W).A_R.T]
    rank = np.linalg.matrix_rank(np.concatenate(rel, axis=1), tol=1e-9 * n)
    return n * n - int(rank)


# ----------------------------------------------------------------------------
# Jones projections

@dataclass(frozen=True, eq=False)
class JonesData:
    """Jones projections ``e ∈ A``, ``ê ∈ Â`` of the Markov expectations and their ingredients."""

    q_L: np.ndarray
    q_R: np.ndarray
    q_hat_L: np.ndarray
    q_hat_R: np.ndarray
    r_L: np.ndarray
    r_R: np.ndarray
    e: np.ndarray
    e_hat: np.ndarray
    g2_L: np.ndarray        # g''_L
    g2_R: np.ndarray        # g''_R
    residuals: dict


def _elements(an: "Analysis") -> dict:
    lat, mk = an.lattice, an.markov
    return {
        "f_L": sum(c * z for c, z in zip(mk.f, lat.z_L)),
        "f_R": sum(c * z for c, z in zip(mk.f, lat.z_R)),
        "f": sum(c * z for c, z in zip(mk.f_hat, lat.z_hat)),
        "k_L": an.weights.k_L, "k_R": an.weights.k_R, "k": an.weights.k_el,
        "g_L": an.haar.g_L, "g_R": an.haar.g_R, "I": mk.I_M.element,
    }


def _q_left(an: "Analysis") -> np.ndarray:
    """``I_M^{-1/2} f_L^{-1} k_L^{1/2} g_L^{-1} k^{-1/2} f``."""
    X, alg, el = an.W, an.W.algebra, _elements(an)
    P = alg.power
    return X.prod(P(el["I"], -0.5), alg.inv(el["f_L"]), P(el["k_L"], 0.5), alg.inv(el["g_L"]), P(el["k"], -0.5),
                  el["f"])


def jones_projections(an: "Analysis", *, tol: float = TL_TOL) -> JonesData:
    W, D = an.W, an.W.dual()
    alg, dalg = W.algebra, D.algebra
    dan = an.dual
    mk, dmk = an.markov, dan.markov
    el = _elements(an)
    P = alg.power
    q_L = _q_left(an)
    q_R = W.S(q_L)
    q_hat_L = _q_left(dan)
    q_hat_R = D.S(q_hat_L)
    r_R, r_L = mk.r_R, mk.r_L
    e = W.prod(P(q_L, 0.5), an.haar.h, P(q_L, 0.5))
    e_hat = D.prod(dalg.power(q_hat_L, 0.5), an.haar.h_hat, dalg.power(q_hat_L, 0.5))
    g2_L = W.prod(alg.inv(el["f_L"]), P(el["k_L"], 0.5), el["g_L"], P(el["k"], 0.5), alg.inv(el["f"]))
    g2_R = W.prod(alg.inv(el["f"]), P(el["k"], 0.5), el["g_R"], P(el["k_R"], 0.5), alg.inv(el["f_R"]))
    Iinv = alg.inv(el["I"])

    res = {
        "q_L = 1↼r̂_R": float(np.abs(q_L - W.hit_right(W.unit, dmk.r_R)).max()),
        "q_R = r̂_L⇀1": float(np.abs(q_R - W.hit(dmk.r_L, W.unit)).max()),
        "q̂_L = 1̂↼r_R": float(np.abs(q_hat_L - W.dual_hit_right(W.counit, r_R)).max()),
        "q̂_R = r_L⇀1̂": float(np.abs(q_hat_R - W.dual_hit(r_L, W.counit)).max()),
        "r_R q_R = I_M^-1 g_R^-2": float(np.abs(W.mul(r_R, q_R) - W.mul(Iinv, P(el["g_R"], -2.0))).max()),
        "g''_R = S^-1(g''_L)": float(np.abs(g2_R - W.S_inv(g2_L)).max()),
        "e² = e": float(np.abs(W.mul(e, e) - e).max()),
        "e* = e": float(np.abs(W.adjoint(e) - e).max()),
        "ê² = ê": float(np.abs(D.mul(e_hat, e_hat) - e_hat).max()),
        "ê* = ê": float(np.abs(D.adjoint(e_hat) - e_hat).max()),
        "E^L_M(e) = I_M^-1": float(np.abs(mk.E_L_M(e) - Iinv).max()),
        "E^R_M(e) = I_M^-1": float(np.abs(mk.E_R_M(e) - Iinv).max()),
    }

    reps = an.reps
    pi, ph = reps.pi, reps.pi_hat
    E, Eh = pi(e), ph(e_hat)
    Ehp = ph(e_hat, prime=True)
    A_ops, H_ops, Hp_ops = reps.A_ops, reps.hat_ops, reps.hat_ops_prime
    ELM = np.tensordot(mk.E_L_M.matrix.T, A_ops, axes=(1, 0))       # π(E^L_M(e_k))
    ERM = np.tensordot(mk.E_R_M.matrix.T, A_ops, axes=(1, 0))
    hERM = np.tensordot(dmk.E_R_M.matrix.T, H_ops, axes=(1, 0))     # π(Ê^R_M(φ_k))
    hELMp = np.tensordot(dmk.E_L_M.matrix.T, Hp_ops, axes=(1, 0))
    res["ê x ê = E^L_M(x) ê"] = float(np.abs(Eh @ A_ops @ Eh - ELM @ Eh).max())
    res["e φ e = Ê^R_M(φ) e"] = float(np.abs(E @ H_ops @ E - hERM @ E).max())
    res["e ê e = I_M^-1 e"] = float(np.abs(E @ Eh @ E - pi(Iinv) @ E).max())
    res["ê e ê = I_M^-1 ê"] = float(np.abs(Eh @ E @ Eh - pi(Iinv) @ Eh).max())
    res["ê x ê = E^R_M(x) ê in π'"] = float(np.abs(Ehp @ A_ops @ Ehp - ERM @ Ehp).max())
    res["e φ e = Ê^L_M(φ) e in π'"] = float(np.abs(E @ Hp_ops @ E - hELMp @ E).max())
    res["e ê e = I_M^-1 e in π'"] = float(np.abs(E @ Ehp @ E - pi(Iinv) @ E).max())
    # the Markov standard representation sends ê to E^L_M and (primed) to E^R_M
    sh, shi = W.right(P(mk.s, 0.5)), W.right(P(mk.s, -0.5))
    res["π_M(ê) = E^L_M"] = float(np.abs(shi @ Eh @ sh - mk.E_L_M.matrix).max())
    res["π'_M(ê) = E^R_M"] = float(np.abs(shi @ Ehp @ sh - mk.E_R_M.matrix).max())
    # the Haar projections are Jones projections of the Haar expectations only
    Hh = ph(an.haar.h_hat)
    EL = np.tensordot(an.haar_ce.E_L.T, A_ops, axes=(1, 0))
    res["ĥ x ĥ = E^L(x) ĥ"] = float(np.abs(Hh @ A_ops @ Hh - EL @ Hh).max())
    res["ĥ h ĥ = g_L² ĥ"] = float(np.abs(Hh @ pi(an.haar.h) @ Hh - pi(P(an.haar.g_L, 2.0)) @ Hh).max())
    res["h ĥ h = ĝ_R² h"] = float(np.abs(pi(an.haar.h) @ Hh @ pi(an.haar.h)
                                          - ph(dalg.power(an.haar.g_hat_R, 2.0)) @ pi(an.haar.h)).max())
    scale = max(np.abs(el["I"]).max(), np.abs(q_L).max(), np.abs(g2_L).max())
    for name, r in res.items():
        _raise_if(TLResidual, name, r, tol, scale)
    return JonesData(q_L, q_R, q_hat_L, q_hat_R, r_L, r_R, e, e_hat, g2_L, g2_R, res)


# ----------------------------------------------------------------------------
# Markov trace on the Weyl algebra

@dataclass(frozen=True, eq=False)
class WeylTrace:
    """``τ^W`` as a covector on Weyl-algebra coefficients, with its block data.

    ``e_W[a]`` is the central projection labelled by the ``A^L``-sector ``a``
    (coordinate operator); ``block_of[a]`` is its Wedderburn block.
    """

    omega: np.ndarray
    omega_prime: np.ndarray
    trace_vector: np.ndarray
    e_W: tuple[np.ndarray, ...]
    block_of: tuple[int, ...]
    e_W_prime: tuple[np.ndarray, ...]
    block_of_prime: tuple[int, ...]
    table: dict
    residuals: dict

    def __call__(self, weyl: WeylAlgebra, T) -> complex:
        return complex(self.omega @ weyl.coords(T))


def _solve_trace(weyl: WeylAlgebra, ops: np.ndarray, rhs: np.ndarray, what: str, tol: float) -> np.ndarray:
    rows = np.stack([weyl.coords(T) for T in ops])
    om, *_ = np.linalg.lstsq(rows, rhs, rcond=None)
    r = float(np.abs(rows @ om - rhs).max())
    _raise_if(IllDefinedTrace, f"{what} is consistent on the spanning set", r, tol, np.abs(rhs).max())
    return om


def _central_projections(weyl: WeylAlgebra, ops, what: str, tol: float) -> tuple[int, ...]:
    """Match each operator with a central projection of ``weyl.alg``; must be a bijection."""
    alg = weyl.alg
    cps = [alg.central_projection(q) for q in range(alg.nblocks)]
    out = []
    for k, T in enumerate(ops):
        c = weyl.coords(T)
        hits = [q for q, z in enumerate(cps) if np.abs(c - z).max() < 1e-6]
        if len(hits) != 1:
            raise IllDefinedTrace(f"{what}[{k}] is a minimal central projection", float(len(hits)))
        out.append(hits[0])
    if sorted(out) != list(range(alg.nblocks)):
        raise IllDefinedTrace(f"{what} does not biject onto the blocks of the Weyl algebra", None)
    return tuple(out)


def _shift(reps: StandardReps, H, left, middle, right) -> np.ndarray:
    """``Σ_ij H_ij left[i] middle right[j]`` for operator stacks ``left`` and ``right``."""
    z = np.tensordot(H, right, axes=(1, 0))
    return np.einsum("iab,bc,icd->ad", left, middle, z, optimize=True)


def weyl_markov_trace(an: "Analysis", *, tol: float = TL_TOL) -> WeylTrace:
    W, D = an.W, an.W.dual()
    alg, dalg = W.algebra, D.algebra
    weyl, reps, jn = an.weyl, an.reps, an.jones
    mk, dmk, bd = an.markov, an.dual.markov, an.boundary
    lat = an.lattice
    n = W.dim
    eye = np.eye(n)
    pi, ph = reps.pi, reps.pi_hat
    A_ops, H_ops = reps.A_ops, reps.hat_ops
    E, Eh = pi(jn.e), ph(jn.e_hat)

    # τ^W(x ê y) = τ_M(I_M^-1 x y)
    tau = mk.tau_M.covector @ W.left(alg.inv(mk.I_M.element))
    rhs = (tau @ W._mult_mat).reshape(n, n).reshape(-1)
    ops = ((A_ops @ Eh)[:, None] @ A_ops[None, :]).reshape(n * n, n, n)
    omega = _solve_trace(weyl, ops, rhs, "τ^W", tol)
    # τ^W'(φ e ψ) = τ̂_M(Î_M^-1 φ ψ)
    that = dmk.tau_M.covector @ D.left(dalg.inv(dmk.I_M.element))
    rhs_p = (that @ D._mult_mat).reshape(-1)
    ops_p = ((H_ops @ E)[:, None] @ H_ops[None, :]).reshape(n * n, n, n)
    omega_p = _solve_trace(weyl, ops_p, rhs_p, "τ^W'", tol)
    res = {"τ^W = τ^W'": float(np.abs(omega - omega_p).max())}

    # traciality: values on matrix units
    wa = weyl.alg
    vals = omega @ wa.units
    tv = []
    worst = 0.0
    for q, m in enumerate(wa.block_dims):
        blk = vals[wa.offsets[q]:wa.offsets[q] + m * m].reshape(m, m)
        tv.append(np.trace(blk).real / m)
        worst = max(worst, float(np.abs(blk - tv[-1] * np.eye(m)).max()))
    res["τ^W is tracial"] = worst
    tv = np.array(tv)

    # central projections through the shift map, three ways
    Hc = W.coproduct(an.haar.h)
    Sops = np.stack([pi(W.S(eye[i])) for i in range(n)])
    gr2 = alg.power(an.haar.g_R, -2.0)
    right_h = np.stack([pi(W.mul(gr2, eye[j])) for j in range(n)])
    right_q = np.stack([pi(W.mul(mk.I_M.element, W.mul(jn.q_R, eye[j]))) for j in range(n)])
    Hd = D.coproduct(an.haar.h_hat)
    gl2h = dalg.power(an.haar.g_hat_L, -2.0)
    left_d = np.stack([ph(D.mul(eye[i], gl2h)) for i in range(n)])
    Hh = ph(an.haar.h_hat)
    eW, alt_q, alt_d = [], [], []
    for ea in bd.e_a:
        Pa = pi(ea)
        eW.append(_shift(reps, Hc, Sops @ Pa, Hh, right_h))
        alt_q.append(_shift(reps, Hc, Sops @ Pa, Eh, right_q))
        ea_hat = W.dual_hit(ea, W.counit)
        right_d = np.stack([ph(D.mul(ea_hat, D.S(eye[j]))) for j in range(n)])
        alt_d.append(_shift(reps, Hd, left_d, pi(an.haar.h), right_d))
    res["e_a^W via the Markov quasibasis"] = max(float(np.abs(a - b).max()) for a, b in zip(eW, alt_q))
    res["e_a^W via the dual shift map"] = max(float(np.abs(a - b).max()) for a, b in zip(eW, alt_d))
    res["Σ_a e_a^W = 1"] = float(np.abs(sum(eW) - np.eye(n)).max())
    gens = np.concatenate([A_ops, H_ops])
    res["e_a^W central"] = max(float(np.abs(z @ gens - gens @ z).max()) for z in eW)
    block_of = _central_projections(weyl, eW, "e_a^W", tol)

    # the primed algebra: shift map of the right Markov expectation, labelled by A^R
    wp = an.weyl_prime
    Ehp = ph(jn.e_hat, prime=True)
    a_ops = np.stack([pi(W.S(W.mul(mk.I_M.element, W.mul(jn.q_R, eye[j])))) for j in range(n)])
    b_ops = np.stack([pi(W.S(W.S(eye[i]))) for i in range(n)])
    # pairs (S(v_j), S(u_i)) weighted by Δ(h)_{ij}
    one = np.einsum("ij,jab,bc,icd->ad", Hc, a_ops, Ehp, b_ops, optimize=True)
    res["Σ S(v) ê S(u) = 1 in π'"] = float(np.abs(one - np.eye(n)).max())
    eWp = [np.einsum("ij,jab,bc,icd->ad", Hc, a_ops @ pi(eb), Ehp, b_ops, optimize=True) for eb in bd.e_b]
    block_of_p = _central_projections(wp, eWp, "e_b^W'", tol)

    # restriction table
    f, fh = mk.f, mk.f_hat
    Iv = mk.I_M.values
    hyp_a = [lat.hyper_of_vacuum[bd.a_left[a]] for a in range(len(bd.e_a))]
    hyp_b = [lat.hyper_of_vacuum[bd.b_right[b]] for b in range(len(bd.e_b))]
    tw = lambda T: float((omega @ weyl.coords(T)).real)  # noqa: E731
    tbl = {}
    tbl["A"] = (np.array([tw(pi(x)) for x in eye]), mk.tau_M.covector.real)
    tbl["Â"] = (np.array([tw(ph(x)) for x in eye]), dmk.tau_M.covector.real)
    tbl["Z"] = (np.array([tw(pi(z)) for z in lat.z_hat]),
                np.array([Iv[lat.hyper_of_dual_vacuum[v]] * fh[v] ** 2 for v in range(len(fh))]))
    tbl["Ẑ"] = (np.array([tw(ph(z)) for z in lat.zeta]),
                np.array([Iv[lat.hyper_of_vacuum[m]] * f[m] ** 2 for m in range(len(f))]))
    da = bd.d_a
    vec_a = np.array([np.sqrt(Iv[hyp_a[a]]) * f[bd.a_left[a]] * da[a] * fh[bd.a_right[a]] for a in range(len(da))])
    vec_b = np.array([np.sqrt(Iv[hyp_b[b]]) * fh[bd.b_left[b]] * bd.d_b[b] * f[bd.b_right[b]]
                      for b in range(len(bd.d_b))])
    tbl["A^L"] = (np.array([tw(pi(e)) / m for e, m in zip(bd.e_a, bd.n_a)]), vec_a)
    tbl["A^R"] = (np.array([tw(pi(e)) / m for e, m in zip(bd.e_b, bd.n_b)]), vec_b)
    tbl["Â^R"] = (np.array([tw(ph(W.dual_hit(e, W.counit))) / m for e, m in zip(bd.e_a, bd.n_a)]), vec_a)
    tbl["A ⋊ Â"] = (np.array([tv[block_of[a]] for a in range(len(da))]), vec_a / np.array([Iv[h] for h in hyp_a]))
    for k, (got, want) in tbl.items():
        res[f"trace vector on {k}"] = float(np.abs(got - want).max())
    for name, r in res.items():
        _raise_if(IllDefinedTrace, name, r, tol, max(1.0, np.abs(tv).max()))
    return WeylTrace(omega, omega_p, tv, tuple(eW), block_of, tuple(eWp), block_of_p, tbl, res)


# ----------------------------------------------------------------------------

def frobenius_reciprocity(an: "Analysis") -> dict:
    """``N_a^{q b̄} = N_q^{ab} = N_b^{ā q}`` and the support rule ``Λ_aq > 0 ⟺ a^L = q^L``."""
    W = an.W
    weyl, wp, reps, tr, bd = an.weyl, an.weyl_prime, an.reps, an.weyl_trace, an.boundary
    tab = an.sectors
    pi, ph = reps.pi, reps.pi_hat
    na, nb = len(bd.e_a), len(bd.e_b)
    inv_conj = {b: a for a, b in enumerate(bd.conj)}
    left = np.zeros((na, len(tab), nb), dtype=int)       # N_a^{q b̄}, indexed [a, q, b]
    right = np.zeros((nb, na, len(tab)), dtype=int)      # N_b^{ā q}, indexed [b, a, q]
    hat_R = [W.dual_hit(e, W.counit) for e in bd.e_a]
    hat_L = [W.dual_hit_right(W.counit, e) for e in bd.e_b]
    for q in range(len(tab)):
        Pq = pi(tab.e[q])
        for b in range(nb):
            ab = inv_conj[b]
            c = weyl.coords(Pq @ ph(hat_R[ab]))
            blocks = weyl.alg.blocks(c)
            for a in range(na):
                t = np.trace(blocks[tr.block_of[a]]) / (tab.n[q] * bd.n_a[ab])
                left[a, q, b] = as_integer(t, "N_a^{q b̄}")
        for a in range(na):
            ba = bd.conj[a]
            c = wp.coords(ph(hat_L[ba], prime=True) @ Pq)
            blocks = wp.alg.blocks(c)
            for b in range(nb):
                t = np.trace(blocks[tr.block_of_prime[b]]) / (tab.n[q] * bd.n_b[ba])
                right[b, a, q] = as_integer(t, "N_b^{ā q}")
    mid = np.transpose(bd.N, (1, 0, 2))                  # [a, q, b]
    if not (np.array_equal(left, mid) and np.array_equal(np.transpose(right, (1, 2, 0)), mid)):
        raise ReciprocityFailure("N_a^{q b̄} = N_q^{ab} = N_b^{ā q} fails")
    lam = an.markov.E_L_M.inclusion.Lam                  # rows = sectors of A
    support = np.array([[bd.a_left[a] == tab.left[q] for a in range(na)] for q in range(len(tab))])
    if not np.array_equal(lam > 0, support):
        raise ReciprocityFailure("Λ_aq > 0 exactly when a^L = q^L fails")
    return {"N_left": left, "N_mid": mid, "N_right": right, "Lambda": lam}


def pairing_check(an: "Analysis", *, tol: float = TL_TOL) -> dict[str, float]:
    """Residuals of the pairing formula and of the expansion of ``φ`` over ``A ê A``."""
    W = an.W
    alg = W.algebra
    weyl, reps, jn, tr, mk = an.weyl, an.reps, an.jones, an.weyl_trace, an.markov
    n = W.dim
    eye = np.eye(n)
    pi, ph = reps.pi, reps.pi_hat
    E, Eh = pi(jn.e), ph(jn.e_hat)
    # τ^W as a matrix M with τ^W(T) = tr(M T) on coordinate operators
    Om = (tr.omega @ weyl.basis.reshape(weyl.dim, -1).conj()).reshape(n, n)
    M = reps.K_inv @ Om.T @ reps.K
    pre = M @ pi(alg.power(mk.I_M.element, 1.5)) @ Eh @ E
    Lj = pre @ reps.hat_ops
    gl, gr = alg.power(jn.g2_L, 0.5), alg.power(jn.g2_R, 0.5)
    Ri = np.stack([pi(W.prod(gl, eye[i], gr)) for i in range(n)])
    pair = np.einsum("jab,iba->ji", Lj, Ri, optimize=True)
    res = {"<φ, x> = τ(I^3/2 ê e φ g''_L^½ x g''_R^½)": float(np.abs(pair - np.eye(n)).max()),
           "<1̂, 1> both ways": float(abs(np.trace(pre @ ph(W.counit) @ pi(W.prod(gl, W.unit, gr)))
                                         - W.counit @ W.unit))}
    # φ = Σ (φ⇀S(h_(1))) r_R^-½ ê r_R^-½ g_R^-2 h_(2)
    Hc = W.coproduct(an.haar.h)
    rm = alg.power(jn.r_R, -0.5)
    gr2 = alg.power(an.haar.g_R, -2.0)
    Z = np.tensordot(Hc, np.stack([pi(W.prod(rm, gr2, eye[k])) for k in range(n)]), axes=(1, 0))
    X = np.stack([W.coproduct(W.S(eye[i])) for i in range(n)])          # X[i][:, j] = φ_j ⇀ S(e_i)
    Xr = np.einsum("iaj,ab->ijb", X, W.right(rm).T)                      # · r_R^-½
    ops = np.einsum("ijk,kab->ijab", Xr, reps.A_ops, optimize=True)
    recon = np.einsum("ijab,bc,icd->jad", ops, Eh, Z, optimize=True)
    res["φ = Σ (φ⇀S(h_(1))) r^-½ ê r^-½ g_R^-2 h_(2)"] = float(np.abs(recon - reps.hat_ops).max())
    for name, r in res.items():
        _raise_if(PairingResidual, name, r, tol)
    return res
