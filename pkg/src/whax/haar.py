"""Haar integrals, the canonical grouplike element and its relatives.

Everything here is solved as a linear problem in the structure constants
and then re-verified against the defining identities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoGrouplikeFit, NoIntegral, NonUnique, NotPositive, SplitInconsistent
from .mmalg import LinearFunctional, null_space, positive_sqrt
from .wha import SubalgebraLattice, WeakHopfStructure, distinguished_subalgebras

__all__ = ["HaarData", "VacuumWeights", "MetricData", "haar_integral", "canonical_grouplike", "metric_split",
           "vacuum_weights", "standard_metric", "canonical_traces", "haar_data", "block_traces", "grouplike_residual"]


@dataclass(frozen=True, eq=False)
class HaarData:
    """``h``, ``ĥ``, the grouplike ``g = g_L g_R^{-1}``, the density ``G = g_L g_R`` and the dual counterparts."""

    h: np.ndarray
    h_hat: np.ndarray
    g: np.ndarray
    G: np.ndarray
    g_L: np.ndarray
    g_R: np.ndarray
    g_hat: np.ndarray
    g_hat_L: np.ndarray
    g_hat_R: np.ndarray


@dataclass(frozen=True, eq=False)
class VacuumWeights:
    """Vacuum weights; ``k[μ]`` over ``Vac A`` and ``k_hat[ν]`` over ``Vac Â``.

    ``k_el`` .. ``k_hat_R`` are the corresponding elements of ``Z``, ``Z^L``,
    ``Z^R`` and their duals.
    """

    k: np.ndarray
    k_hat: np.ndarray
    k_el: np.ndarray
    k_L: np.ndarray
    k_R: np.ndarray
    k_hat_el: np.ndarray
    k_hat_L: np.ndarray
    k_hat_R: np.ndarray


@dataclass(frozen=True, eq=False)
class MetricData:
    g_std: np.ndarray
    g_std_L: np.ndarray
    g_std_R: np.ndarray
    g_hat_std: np.ndarray
    g_hat_std_L: np.ndarray
    g_hat_std_R: np.ndarray


# ----------------------------------------------------------------------------

def block_traces(W: WeakHopfStructure, x) -> np.ndarray:
    """``tr_q(x)`` for every sector ``q`` (unnormalized matrix trace in block ``q``)."""
    return np.real_if_close(W.algebra.traces(x), tol=1e6)


def _integral_in(W: WeakHopfStructure) -> np.ndarray:
    n = W.dim
    eye = np.eye(n)
    rows = []
    for i in range(n):
        rows.append(W.left(eye[i]) - W.left(W.pi_left(eye[i])))
        rows.append(W.right(eye[i]) - W.right(W.pi_right(eye[i])))
    hom = np.concatenate(rows, axis=0)
    sys = np.concatenate([hom, W.pi_left_matrix], axis=0)
    rhs = np.concatenate([np.zeros(hom.shape[0]), W.unit])
    h, *_ = np.linalg.lstsq(sys, rhs, rcond=None)
    res = np.abs(sys @ h - rhs).max()
    if res > W.tol * 1e2:
        raise NoIntegral("normalized two-sided integral", float(res))
    if null_space(sys, 1e-9).shape[1]:
        raise NonUnique("normalized two-sided integral is not unique")
    return h


def haar_integral(W: WeakHopfStructure) -> tuple[np.ndarray, np.ndarray]:
    """``(h, ĥ)``; ``ĥ`` is the Haar integral of the dual, a functional on ``A``."""
    h = _integral_in(W)
    h_hat = _integral_in(W.dual())
    tol = W.tol * 1e2
    for name, r in (("S(h) = h", np.abs(W.S(h) - h).max()),
                    ("h* = h", np.abs(W.adjoint(h) - h).max()),
                    ("h h = h", np.abs(W.mul(h, h) - h).max()),
                    ("ĥ ĥ = ĥ", np.abs(W.dual().mul(h_hat, h_hat) - h_hat).max())):
        if r > tol:
            raise NoIntegral(name, float(r))
    if not W.algebra.is_positive(h, tol):
        raise NotPositive("Haar integral is not positive")
    return h, h_hat


def grouplike_residual(W: WeakHopfStructure, g) -> dict[str, float]:
    """Residuals of ``g x g^{-1} = S²(x)``, ``Δ(g) = (g⊗g)Δ(1)``, ``S(g) = g^{-1}``."""
    alg = W.algebra
    gi = alg.inv(g)
    s2 = W.antipode @ W.antipode
    gg = np.outer(g, g)
    return {
        "implements S²": float(np.abs(W.left(g) - W.right(g) @ s2).max()),
        "grouplike": float(np.abs(W.coproduct(g) - W.tensor_mul(gg, W.delta_one)).max()),
        "S(g) = g^-1": float(np.abs(W.S(g) - gi).max()),
    }


def _sylvester_space(W: WeakHopfStructure) -> np.ndarray:
    """Basis of ``{g : g x = S²(x) g ∀x}``."""
    n = W.dim
    eye = np.eye(n)
    s2 = W.antipode @ W.antipode
    cols = [(W.left(eye[k]) - W.right(eye[k]) @ s2).reshape(-1) for k in range(n)]
    return null_space(np.stack(cols, axis=1), 1e-9)


def canonical_grouplike(W: WeakHopfStructure, h=None, h_hat=None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(g, g_L, g_R)``.

    The S²-intertwiner equation only fixes ``g`` up to central factors, and
    the grouplike constraints do not remove all of them, so ``g_L`` is taken
    from ``ĥ⇀h = g_L²`` and ``g = g_L S(g_L)^{-1}``; every defining identity
    is then checked, including membership in the intertwiner space.
    """
    if h is None or h_hat is None:
        h, h_hat = haar_integral(W)
    alg = W.algebra
    tol = W.tol * 1e2
    el_h = W.hit(h_hat, h)
    if not alg.is_positive(el_h, tol):
        raise NotPositive("ĥ⇀h is not positive")
    g_L = positive_sqrt(alg, el_h, tol)
    g_R = W.S(g_L)
    g = W.mul(g_L, alg.inv(g_R))
    res = grouplike_residual(W, g)
    sp = _sylvester_space(W)
    res["in intertwiner space"] = float(np.abs(g - sp @ (sp.conj().T @ g)).max())
    res["g_L ∈ A^L"] = float(np.abs(W.pi_left(g_L) - g_L).max())
    res["g_R ∈ A^R"] = float(np.abs(W.pi_right(g_R) - g_R).max())
    for name, r in res.items():
        if r > tol * max(1.0, np.abs(g).max()):
            raise NoGrouplikeFit(name, r)
    if not alg.is_positive(g, tol):
        raise NotPositive("canonical grouplike is not positive")
    return g, g_L, g_R


def canonical_trace(W: WeakHopfStructure, g) -> LinearFunctional:
    return LinearFunctional.from_trace_vector(W.algebra, block_traces(W, g).real)


def metric_split(W: WeakHopfStructure, h, h_hat, g) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(G, g_L, g_R)`` from ``ĥ(x) = τ(x G)`` and ``g_R = (g^{-1}G)^{1/2}``."""
    alg = W.algebra
    tau = canonical_trace(W, g).covector
    eye = np.eye(W.dim)
    rows = np.stack([tau @ W.left(eye[k]) for k in range(W.dim)])
    G, *_ = np.linalg.lstsq(rows, h_hat, rcond=None)
    tol = W.tol * 1e2
    res = {"ĥ = τ(·G)": float(np.abs(rows @ G - h_hat).max())}
    gr2 = W.mul(alg.inv(g), G)
    if not alg.is_positive(gr2, tol):
        raise SplitInconsistent("g^-1 G positive", float(np.abs(gr2 - W.adjoint(gr2)).max()))
    g_R = positive_sqrt(alg, gr2, tol)
    g_L = W.S(g_R)
    res["g = g_L g_R^-1"] = float(np.abs(W.mul(g_L, alg.inv(g_R)) - g).max())
    res["g_L ∈ A^L"] = float(np.abs(W.pi_left(g_L) - g_L).max())
    res["g_R ∈ A^R"] = float(np.abs(W.pi_right(g_R) - g_R).max())
    res["ε(g_R^-1) = τ(g_R)"] = float(abs(W.eps(alg.inv(g_R)) - tau @ g_R))
    for name, r in res.items():
        if r > tol * max(1.0, np.abs(G).max()):
            raise SplitInconsistent(name, r)
    return G, g_L, g_R


def haar_data(W: WeakHopfStructure) -> HaarData:
    h, h_hat = haar_integral(W)
    g, g_L, g_R = canonical_grouplike(W, h, h_hat)
    G, g_L2, g_R2 = metric_split(W, h, h_hat, g)
    r = max(np.abs(g_L - g_L2).max(), np.abs(g_R - g_R2).max())
    if r > W.tol * 1e2:
        raise SplitInconsistent("two routes to g_L agree", float(r))
    D = W.dual()
    gh, gh_L, gh_R = canonical_grouplike(D, h_hat, h)
    return HaarData(h, h_hat, g, G, g_L, g_R, gh, gh_L, gh_R)


# ----------------------------------------------------------------------------

def vacuum_weights(W: WeakHopfStructure, lattice: SubalgebraLattice | None = None) -> VacuumWeights:
    lat = lattice or distinguished_subalgebras(W)
    D = W.dual()
    k = np.array([D.eps(z) for z in lat.zeta]).real          # ε̂(ζ) = ζ(1)
    k_hat = np.array([W.eps(z) for z in lat.z_hat]).real
    k_el = sum(z * c for z, c in zip(lat.z_hat, k_hat))
    k_hat_el = sum(z * c for z, c in zip(lat.zeta, k))
    k_L = W.hit_right(W.unit, k_hat_el)
    k_R = W.hit(k_hat_el, W.unit)
    k_hat_L = D.hit_right(D.unit, k_el)
    k_hat_R = D.hit(k_el, D.unit)
    return VacuumWeights(k, k_hat, k_el, k_L, k_R, k_hat_el, k_hat_L, k_hat_R)


def standard_metric(W: WeakHopfStructure, hd: HaarData, vw: VacuumWeights) -> MetricData:
    """``g' = g k_L^{1/2} k_R^{-1/2}`` with ``g'_L = k_L^{1/2} g_L k^{1/2}``, and the same on ``Â``."""

    def one_side(X, g, g_L, k_L, k_R, k):
        alg = X.algebra
        g_std = X.prod(g, alg.power(k_L, 0.5), alg.power(k_R, -0.5))
        g_std_L = X.prod(alg.power(k_L, 0.5), g_L, alg.power(k, 0.5))
        g_std_R = X.S_inv(g_std_L)
        tol = X.tol * 1e2
        res = grouplike_residual(X, g_std)
        res["g' = g'_L g'_R^-1"] = float(np.abs(X.mul(g_std_L, alg.inv(g_std_R)) - g_std).max())
        for name, r in res.items():
            if r > tol * max(1.0, np.abs(g_std).max()):
                raise NoGrouplikeFit(f"standard metric: {name}", r)
        return g_std, g_std_L, g_std_R

    a = one_side(W, hd.g, hd.g_L, vw.k_L, vw.k_R, vw.k_el)
    b = one_side(W.dual(), hd.g_hat, hd.g_hat_L, vw.k_hat_L, vw.k_hat_R, vw.k_hat_el)
    return MetricData(*a, *b)


@dataclass(frozen=True, eq=False)
class CanonicalTraces:
    tau: LinearFunctional
    tau_S: LinearFunctional | None
    haar_state: LinearFunctional


def canonical_traces(W: WeakHopfStructure, hd: HaarData, dims=None) -> CanonicalTraces:
    """τ with vector ``tr_q(g)``, τ_S with vector ``d_q`` (when ``dims`` given), and ``ω = ĥ``."""
    tau = canonical_trace(W, hd.g)
    tau_S = LinearFunctional.from_trace_vector(W.algebra, np.asarray(dims, float)) if dims is not None else None
    return CanonicalTraces(tau, tau_S, LinearFunctional(np.asarray(hd.h_hat)))
