"""Conditional expectations, indices and the Markov trace.

The first half works for any unital inclusion ``A ⊂ B`` of multimatrix
algebras sharing one coordinate space.  Inclusion matrices are stored with
rows indexed by ``B``-sectors and columns by ``A``-sectors.  The second half
specializes to the inclusions ``A^L ⊂ A`` and ``A^R ⊂ A`` of a weak
C*-Hopf algebra.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import (BadPhi, FormulaMismatch, IndexMismatch, KacInconsistency, NonIntegralInclusion, NotModularInvariant,
                     NotTrace, NotUnitalSubalgebra, PFMismatch, UniquenessViolated)
from .haar import HaarData, MetricData, VacuumWeights
from .mmalg import (LinearFunctional, MultiMatrixAlgebra, NonNegMatrix, _crandn, as_integer,
                    make_rng, orth, perron_frobenius, subalgebra)
from .sectors import SectorTable, module_dimension_matrix
from .wha import SubalgebraLattice, WeakHopfStructure

__all__ = ["InclusionData", "ConditionalExpectation", "HyperElement", "HaarCE", "MarkovData",
           "BoundaryDimensions", "RNDerivative", "KacReport", "inclusion_of", "standard_inclusion",
           "random_inclusion", "random_phi", "ce_from_phi", "functional_ce", "trace_preserving_ce", "markov_ce",
           "rn_derivative", "haar_ce", "pf_weights", "markov_trace", "boundary_dimensions", "kac_diagnostics"]

CHECK_TOL = 1e-8


def _raise_if(exc, name: str, r: float, tol: float = CHECK_TOL, scale: float = 1.0):
    if not np.isfinite(r) or r > tol * max(1.0, scale):
        raise exc(name, float(r))


def _lmat(B: MultiMatrixAlgebra, a) -> np.ndarray:
    return B.left_matrix(a)


def _rmat(B: MultiMatrixAlgebra, a) -> np.ndarray:
    return B.right_matrix(a)


# ----------------------------------------------------------------------------
# inclusions

@dataclass(frozen=True, eq=False)
class InclusionData:
    """``A ⊂ B`` with ``Lam[β, α]`` the multiplicity of ``α`` inside ``β``.

    ``frames[β]`` is a unitary whose columns are the adapted vectors
    ``w_{(a,α,i)}``; ``labels[β]`` lists those triples in column order.
    """

    B: MultiMatrixAlgebra
    A: MultiMatrixAlgebra
    Lam: np.ndarray
    frames: tuple[np.ndarray, ...]
    labels: tuple[tuple[tuple[int, int, int], ...], ...]
    components: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]

    @property
    def norm_squared(self) -> float:
        return float(np.linalg.norm(self.Lam, 2) ** 2)

    def component_norms(self) -> list[float]:
        return [float(np.linalg.norm(self.Lam[np.ix_(b, a)], 2) ** 2) for b, a in self.components]

    def component_projection(self, c: int) -> np.ndarray:
        return sum(self.B.central_projection(b) for b in self.components[c][0])

    def central(self, values) -> np.ndarray:
        """``Σ_β values[β] e_β``."""
        return sum(v * self.B.central_projection(b) for b, v in enumerate(values))

    def central_values(self, x, tol: float = CHECK_TOL) -> np.ndarray:
        """Inverse of :meth:`central`; raises when ``x`` is not in the center of ``B``."""
        blocks = self.B.blocks(x)
        vals = np.array([np.trace(b) / b.shape[0] for b in blocks])
        r = max(np.abs(b - v * np.eye(b.shape[0])).max() for b, v in zip(blocks, vals))
        _raise_if(IndexMismatch, "element is central in B", r, tol, np.abs(vals).max())
        return np.real_if_close(vals, tol=1e6)

    def adapted_unit(self, beta: int, I: int, J: int) -> np.ndarray:
        w = self.frames[beta]
        blocks = [np.zeros((n, n), dtype=complex) for n in self.B.block_dims]
        blocks[beta] = np.outer(w[:, I], w[:, J].conj())
        return self.B.element(blocks)


def inclusion_of(B: MultiMatrixAlgebra, A_basis, *, tol: float = 1e-9, rng=None) -> InclusionData:
    """Inclusion data of the *-subalgebra of ``B`` spanned by ``A_basis`` (columns, or an algebra)."""
    if isinstance(A_basis, MultiMatrixAlgebra):
        A = A_basis
    else:
        A = subalgebra(B.mul, B.star, np.asarray(A_basis, dtype=complex), unit=None, rng=rng, tol=tol)
    one = B.identity()
    r = float(np.abs(A.identity() - one).max())
    _raise_if(NotUnitalSubalgebra, "A contains the unit of B", r)
    nB, nA = len(B.block_dims), len(A.block_dims)
    Lam = np.zeros((nB, nA), dtype=int)
    frames, labels = [], []
    a_blocks = {(al, i, j): B.blocks(A.matrix_unit(al, i, j)) for al in range(nA)
                for i in range(A.block_dims[al]) for j in range(A.block_dims[al]) if j == 0 or i == 0}
    for be in range(nB):
        cols, labs = [], []
        for al in range(nA):
            t = np.trace(B.blocks(A.central_projection(al))[be]) / A.block_dims[al]
            try:
                Lam[be, al] = as_integer(t, f"Λ[{be},{al}]")
            except Exception as exc:
                raise NonIntegralInclusion(f"Λ[{be},{al}]", float(abs(t - np.rint(t.real)))) from exc
            if not Lam[be, al]:
                continue
            v = orth(a_blocks[(al, 0, 0)][be], 1e-8)
            if v.shape[1] != Lam[be, al]:
                raise NonIntegralInclusion(f"rank of e^11 in sector {be}", float(abs(v.shape[1] - Lam[be, al])))
            for i in range(Lam[be, al]):
                for a in range(A.block_dims[al]):
                    cols.append(a_blocks[(al, a, 0)][be] @ v[:, i])
                    labs.append((a, al, i))
        w = np.stack(cols, axis=1) if cols else np.zeros((B.block_dims[be], 0))
        if w.shape[1] != B.block_dims[be]:
            raise NonIntegralInclusion(f"dimension count in sector {be}", float(abs(w.shape[1] - B.block_dims[be])))
        _raise_if(NotUnitalSubalgebra, "adapted frame is unitary", float(np.abs(w.conj().T @ w - np.eye(w.shape[1])).max()))
        frames.append(w)
        labels.append(tuple(labs))
    adj = np.zeros((nB + nA, nB + nA))
    adj[:nB, nB:] = Lam
    adj[nB:, :nB] = Lam.T
    k, lab = connected_components(adj, directed=False)
    comps = tuple((tuple(int(b) for b in np.nonzero(lab[:nB] == c)[0]),
                   tuple(int(a) for a in np.nonzero(lab[nB:] == c)[0])) for c in range(k))
    return InclusionData(B, A, Lam, tuple(frames), tuple(labels), comps)


def standard_inclusion(Lam, a_dims, *, rng=None, twist: bool = True):
    """``(B, A_basis)`` realizing inclusion matrix ``Lam`` (rows = B-sectors) with ``A = ⊕ M_{a_dims}``.

    With ``twist`` each block of ``B`` is conjugated by a random unitary, so the
    embedding is not aligned with the coordinate axes.
    """
    rng = make_rng(rng)
    Lam = np.asarray(Lam, dtype=int)
    a_dims = tuple(int(n) for n in a_dims)
    b_dims = tuple(int(m) for m in Lam @ np.array(a_dims))
    B = MultiMatrixAlgebra.standard(b_dims)
    us = []
    for m in b_dims:
        q, _ = np.linalg.qr(_crandn(rng, m, m)) if twist else (np.eye(m), None)
        us.append(q)
    cols = []
    for al, n in enumerate(a_dims):
        for i in range(n):
            for j in range(n):
                blocks = []
                for be, m in enumerate(b_dims):
                    blk = np.zeros((m, m), dtype=complex)
                    off = int(Lam[be, :al] @ np.array(a_dims[:al]))
                    for c in range(Lam[be, al]):
                        blk[off + c * n + i, off + c * n + j] = 1.0
                    blocks.append(us[be] @ blk @ us[be].conj().T)
                cols.append(B.element(blocks))
    return B, np.stack(cols, axis=1)


def random_inclusion(rng=None, *, max_size: int = 12, connected: bool = True) -> InclusionData:
    """A random unital inclusion with ``Σ_β m_β ≤ max_size``."""
    rng = make_rng(rng)
    while True:
        nA = int(rng.integers(1, 4))
        nB = int(rng.integers(1, 4))
        a_dims = rng.integers(1, 4, size=nA)
        Lam = rng.integers(0, 3, size=(nB, nA))
        if (Lam.sum(0) == 0).any() or (Lam.sum(1) == 0).any():
            continue
        if (Lam @ a_dims).sum() > max_size:
            continue
        incl = inclusion_of(*standard_inclusion(Lam, a_dims, rng=rng))
        if connected and len(incl.components) != 1:
            continue
        return incl


def random_phi(incl: InclusionData, rng=None) -> dict[tuple[int, int], np.ndarray]:
    """Random positive Φ-matrices, column-normalized."""
    rng = make_rng(rng)
    phi = {}
    for be, al in zip(*np.nonzero(incl.Lam)):
        k = incl.Lam[be, al]
        x = _crandn(rng, k, k)
        phi[(int(be), int(al))] = x @ x.conj().T + 0.1 * np.eye(k)
    nA = incl.Lam.shape[1]
    tot = np.zeros(nA)
    for (be, al), p in phi.items():
        tot[al] += np.trace(p).real
    return {key: p / tot[key[1]] for key, p in phi.items()}


# ----------------------------------------------------------------------------
# conditional expectations

@dataclass(frozen=True, eq=False)
class ConditionalExpectation:
    """``E: B → A`` as an ambient matrix, with a quasibasis and its index."""

    inclusion: InclusionData
    phi: Mapping[tuple[int, int], np.ndarray] | None
    matrix: np.ndarray
    quasibasis: tuple[tuple[np.ndarray, np.ndarray], ...]
    index: np.ndarray
    residuals: dict = field(default_factory=dict)

    def __call__(self, x) -> np.ndarray:
        return self.matrix @ x

    @property
    def index_values(self) -> np.ndarray:
        """``Index E`` as ``Σ_β c_β e_β``; returns ``c``."""
        return self.inclusion.central_values(self.index)

    @property
    def index_norm(self) -> float:
        return float(np.abs(self.index_values).max())


def _check_phi(incl: InclusionData, phi) -> dict[tuple[int, int], np.ndarray]:
    phi = {(int(b), int(a)): np.atleast_2d(np.asarray(p, dtype=complex)) for (b, a), p in phi.items()}
    tot = np.zeros(incl.Lam.shape[1])
    for be, al in zip(*np.nonzero(incl.Lam)):
        p = phi.get((int(be), int(al)))
        k = incl.Lam[be, al]
        if p is None or p.shape != (k, k):
            raise BadPhi(f"Φ[{be},{al}] must be {k}×{k}")
        if np.abs(p - p.conj().T).max() > 1e-10 or np.linalg.eigvalsh(p).min() <= 1e-12:
            raise BadPhi(f"Φ[{be},{al}] is not positive invertible")
        tot[al] += np.trace(p).real
    if np.abs(tot - 1).max() > 1e-9:
        raise BadPhi(f"Σ_β tr Φ_βα = {tot.tolist()}, expected all ones")
    return phi


def _phi_matrix(incl: InclusionData, phi) -> np.ndarray:
    """The linear map ``E`` in ambient coordinates."""
    B, A = incl.B, incl.A
    n = B.ambient_dim
    eye = np.eye(n)
    E = np.zeros((n, n), dtype=complex)
    # E(x) = Σ_α Σ_{a'a} c_{a'a} e_α^{a'a},  c = Σ_β Σ_{i'i} Y_β[(a'αi'),(aαi)] Φ_βα^{i'i}
    pos = [{lab: k for k, lab in enumerate(labs)} for labs in incl.labels]
    for k in range(n):
        ys = [w.conj().T @ b @ w for w, b in zip(incl.frames, B.blocks(eye[k]))]
        out = np.zeros(n, dtype=complex)
        for al, m in enumerate(A.block_dims):
            c = np.zeros((m, m), dtype=complex)
            for be in range(len(B.block_dims)):
                lam = incl.Lam[be, al]
                if not lam:
                    continue
                idx = np.array([[pos[be][(a, al, i)] for i in range(lam)] for a in range(m)]).ravel()
                sub = ys[be][np.ix_(idx, idx)].reshape(m, lam, m, lam)
                c += np.einsum("ij,aibj->ab", phi[(be, al)], sub)
            for a in range(m):
                for b in range(m):
                    if c[a, b] != 0:
                        out += c[a, b] * A.matrix_unit(al, a, b)
        E[:, k] = out
    return E


def _ce_residuals(incl: InclusionData, E: np.ndarray, rng=None) -> dict[str, float]:
    B, A = incl.B, incl.A
    rng = make_rng(rng)
    one = B.identity()
    a1 = A.units @ _crandn(rng, A.total_dim)
    a2 = A.units @ _crandn(rng, A.total_dim)
    x = B.units @ _crandn(rng, B.total_dim)
    return {
        "E(1) = 1": float(np.abs(E @ one - one).max()),
        "E maps into A": max(A.residual_outside(E[:, k]) for k in range(E.shape[1])),
        "E(a x a') = a E(x) a'": float(np.abs(E @ B.mul(B.mul(a1, x), a2) - B.mul(B.mul(a1, E @ x), a2)).max()),
        "E(x*) = E(x)*": float(np.abs(E @ B.star(x) - B.star(E @ x)).max()),
    }


def _quasibasis_residual(B: MultiMatrixAlgebra, E: np.ndarray, pairs) -> float:
    """``max |Σ_i a_i E(b_i x) − x|`` over the ambient basis."""
    acc = sum(_lmat(B, a) @ E @ _lmat(B, b) for a, b in pairs)
    return float(np.abs(acc - np.eye(B.ambient_dim)).max())


def _quasibasis(incl: InclusionData, phi, factor) -> list[tuple[np.ndarray, np.ndarray]]:
    """``b_β^{I,(aαi)} = Σ_j e_β^{I,(aαj)} (C^{-1*})^{ji} / √n_α`` with ``C C* = Φ``."""
    B, A = incl.B, incl.A
    pos = [{lab: k for k, lab in enumerate(labs)} for labs in incl.labels]
    pairs = []
    for be, m in enumerate(B.block_dims):
        for al, n in enumerate(A.block_dims):
            lam = incl.Lam[be, al]
            if not lam:
                continue
            cis = np.linalg.inv(factor(phi[(be, al)])).conj().T
            for I in range(m):
                for a in range(n):
                    units = [incl.adapted_unit(be, I, pos[be][(a, al, j)]) for j in range(lam)]
                    for i in range(lam):
                        b = sum(u * cis[j, i] for j, u in enumerate(units)) / np.sqrt(n)
                        pairs.append((b, B.star(b)))
    return pairs


def _hermitian_sqrt(p: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(p)
    return (v * np.sqrt(w)) @ v.conj().T


def ce_from_phi(incl: InclusionData, phi, *, tol: float = CHECK_TOL, rng=None) -> ConditionalExpectation:
    """The conditional expectation parametrized by the matrices ``Φ_βα``."""
    phi = _check_phi(incl, phi)
    E = _phi_matrix(incl, phi)
    res = _ce_residuals(incl, E, rng)
    pairs = _quasibasis(incl, phi, np.linalg.cholesky)
    res["quasibasis (Cholesky)"] = _quasibasis_residual(incl.B, E, pairs)
    idx = sum(incl.B.mul(a, b) for a, b in pairs)
    pairs2 = _quasibasis(incl, phi, _hermitian_sqrt)
    res["quasibasis (square root)"] = _quasibasis_residual(incl.B, E, pairs2)
    res["index independent of quasibasis"] = float(np.abs(sum(incl.B.mul(a, b) for a, b in pairs2) - idx).max())
    closed = np.zeros(len(incl.B.block_dims))
    for (be, al), p in phi.items():
        closed[be] += np.trace(np.linalg.inv(p)).real
    res["Index E = Σ e_β tr Φ^-1"] = float(np.abs(incl.central(closed) - idx).max())
    for name, r in res.items():
        _raise_if(IndexMismatch, name, r, tol, np.abs(closed).max())
    return ConditionalExpectation(incl, phi, E, tuple(pairs), idx, res)


def functional_ce(incl: InclusionData, phi_cov, *, tol: float = CHECK_TOL) -> np.ndarray:
    """The ``φ``-preserving expectation, ``φ(a E(x)) = φ(a x)``.

    It is also solved from the right, ``φ(E(x) a) = φ(x a)``; the two must agree,
    which is the case exactly when the modular group of ``φ`` leaves ``A`` invariant.
    """
    B, A = incl.B, incl.A
    phi_cov = np.asarray(phi_cov, dtype=complex)
    U = A.units
    Ls = [phi_cov @ _lmat(B, U[:, i]) for i in range(U.shape[1])]
    Rs = [phi_cov @ _rmat(B, U[:, i]) for i in range(U.shape[1])]
    left_rows = np.stack(Ls)
    right_rows = np.stack(Rs)
    gram_l = left_rows @ U
    gram_r = right_rows @ U
    E = U @ np.linalg.solve(gram_l, left_rows)
    F = U @ np.linalg.solve(gram_r, right_rows)
    _raise_if(NotModularInvariant, "left and right φ-preserving expectations agree",
              float(np.abs(E - F).max()), tol, np.abs(E).max())
    return E


def trace_preserving_ce(incl: InclusionData, t, *, tol: float = CHECK_TOL) -> ConditionalExpectation:
    """Expectation preserving the trace with vector ``t`` (one weight per ``B``-sector)."""
    t = np.asarray(t, dtype=float)
    if t.shape != (len(incl.B.block_dims),) or (t <= 0).any():
        raise NotTrace("trace vector is faithful", float(-min(t.min(initial=0.0), 0.0)))
    s = incl.Lam.T @ t
    phi = {(int(be), int(al)): np.eye(incl.Lam[be, al]) * t[be] / s[al] for be, al in zip(*np.nonzero(incl.Lam))}
    ce = ce_from_phi(incl, phi, tol=tol)
    tau = LinearFunctional.from_trace_vector(incl.B, t).covector
    direct = functional_ce(incl, tau, tol=tol)
    closed = (incl.Lam @ incl.Lam.T @ t) / t
    ce.residuals["agrees with the τ-orthogonal projection"] = float(np.abs(direct - ce.matrix).max())
    ce.residuals["Index = Σ e_β (ΛΛ^t t)_β / t_β"] = float(np.abs(incl.central(closed) - ce.index).max())
    for name in ("agrees with the τ-orthogonal projection", "Index = Σ e_β (ΛΛ^t t)_β / t_β"):
        _raise_if(IndexMismatch, name, ce.residuals[name], tol, closed.max())
    return ce


def markov_trace_vector(incl: InclusionData) -> np.ndarray:
    """Per component the Perron-Frobenius vector of ``ΛΛ^t``, normalized so that ``t(1) = 1``."""
    t = np.zeros(len(incl.B.block_dims))
    m = np.array(incl.B.block_dims, dtype=float)
    for bs, als in incl.components:
        bs = list(bs)
        lam = incl.Lam[np.ix_(bs, list(als))]
        (pf,) = perron_frobenius(NonNegMatrix((lam @ lam.T).astype(float)))
        v = pf.vector / (m[bs] @ pf.vector)
        t[bs] = v
    return t


def markov_ce(incl: InclusionData, *, tol: float = CHECK_TOL) -> ConditionalExpectation:
    """The Markov expectation; its index is ``‖Λ_c‖²`` on each connected component ``c``."""
    ce = trace_preserving_ce(incl, markov_trace_vector(incl), tol=tol)
    vals = ce.index_values.real
    worst = 0.0
    for (bs, _), nrm in zip(incl.components, incl.component_norms()):
        worst = max(worst, float(np.abs(vals[list(bs)] - nrm).max()))
    ce.residuals["index equals ‖Λ‖² per component"] = worst
    _raise_if(IndexMismatch, "index equals ‖Λ‖² per component", worst, tol, max(incl.component_norms()))
    return ce


@dataclass(frozen=True, eq=False)
class RNDerivative:
    """``φ(b) = ψ(s b)`` and ``E_φ(b) = E_ψ(r b)``."""

    s: np.ndarray
    r: np.ndarray
    E_phi: np.ndarray
    E_psi: np.ndarray
    residuals: dict


def rn_derivative(incl: InclusionData, phi, psi, *, tol: float = CHECK_TOL) -> RNDerivative:
    """Radon-Nikodym derivatives of ``φ`` against ``ψ`` and of their expectations.

    ``r`` is computed as ``E_φ(s^{-1}) s``, ``E_ψ(s)^{-1} s`` and ``s E_ψ(s)^{-1}``;
    all three must agree.  When ``ψ`` is a trace the positive form
    ``E_φ(b) = E_ψ(r^{1/2} b r^{1/2})`` is checked as well.
    """
    B = incl.B
    phi = np.asarray(getattr(phi, "covector", phi), dtype=complex)
    psi = np.asarray(getattr(psi, "covector", psi), dtype=complex)
    n = B.ambient_dim
    eye = np.eye(n)
    P = np.stack([psi @ _lmat(B, eye[j]) for j in range(n)], axis=1)   # P[k, j] = ψ(e_j e_k)
    s, *_ = np.linalg.lstsq(P, phi, rcond=None)
    res = {"φ = ψ(s ·)": float(np.abs(P @ s - phi).max())}
    E_phi = functional_ce(incl, phi, tol=tol)
    E_psi = functional_ce(incl, psi, tol=tol)
    si = B.inv(s)
    e_s_inv = B.inv(E_psi @ s)
    r1 = B.mul(E_phi @ si, s)
    r2 = B.mul(e_s_inv, s)
    r3 = B.mul(s, e_s_inv)
    scale = np.abs(r1).max()
    res["E_φ(s^-1)s = E_ψ(s)^-1 s"] = float(np.abs(r1 - r2).max())
    res["E_ψ(s)^-1 s = s E_ψ(s)^-1"] = float(np.abs(r2 - r3).max())
    res["[r, s] = 0"] = float(np.abs(B.mul(r1, s) - B.mul(s, r1)).max())
    U = incl.A.units
    res["r ∈ A' ∩ B"] = max(float(np.abs(B.mul(r1, U[:, i]) - B.mul(U[:, i], r1)).max()) for i in range(U.shape[1]))
    res["E_φ = E_ψ(r ·)"] = float(np.abs(E_phi - E_psi @ _lmat(B, r1)).max())
    tr = P - P.T
    if np.abs(tr).max() < tol:
        rh = B.power(r1, 0.5)
        res["E_φ = E_ψ(r^½ · r^½)"] = float(np.abs(E_phi - E_psi @ _lmat(B, rh) @ _rmat(B, rh)).max())
    for name, r in res.items():
        _raise_if(IndexMismatch, name, r, tol, scale)
    return RNDerivative(s, r1, E_phi, E_psi, res)


# ----------------------------------------------------------------------------
# hypercentral elements

@dataclass(frozen=True, eq=False)
class HyperElement:
    """An element of the hypercenter with its value on each hypersector."""

    element: np.ndarray
    values: np.ndarray

    @classmethod
    def from_values(cls, lat: SubalgebraLattice, values) -> "HyperElement":
        values = np.asarray(values, dtype=float)
        return cls(sum(v * z for v, z in zip(values, lat.z_H)), values)

    @classmethod
    def from_element(cls, lat: SubalgebraLattice, x, name: str = "element", tol: float = CHECK_TOL) -> "HyperElement":
        zs = np.stack(lat.z_H, axis=1)
        v, *_ = np.linalg.lstsq(zs, x, rcond=None)
        r = float(np.abs(zs @ v - x).max())
        _raise_if(IndexMismatch, f"{name} is hypercentral", r, tol, np.abs(v).max())
        return cls(np.asarray(x), np.real_if_close(v, tol=1e6).real)

    def close_to(self, other: "HyperElement") -> float:
        return float(np.abs(self.element - other.element).max())


# ----------------------------------------------------------------------------
# Haar expectation

@dataclass(frozen=True, eq=False)
class HaarCE:
    """``E^L(x) = ĥ⇀x`` onto ``A^L`` and ``E^R(x) = x↼ĥ`` onto ``A^R``."""

    E_L: np.ndarray
    E_R: np.ndarray
    index: HyperElement
    residuals: dict


def haar_ce(W: WeakHopfStructure, hd: HaarData, lat: SubalgebraLattice, *, tol: float = CHECK_TOL) -> HaarCE:
    n = W.dim
    eye = np.eye(n)
    alg = W.algebra
    E_L = np.stack([W.hit(hd.h_hat, eye[k]) for k in range(n)], axis=1)
    E_R = np.stack([W.hit_right(eye[k], hd.h_hat) for k in range(n)], axis=1)
    PL = lat.A_L @ np.linalg.pinv(lat.A_L)
    PR = lat.A_R @ np.linalg.pinv(lat.A_R)
    res = {"E^L onto A^L": float(np.abs(PL @ E_L - E_L).max() + np.abs(E_L @ lat.A_L - lat.A_L).max()),
           "E^R onto A^R": float(np.abs(PR @ E_R - E_R).max() + np.abs(E_R @ lat.A_R - lat.A_R).max()),
           "E^R = S E^L S^-1": float(np.abs(E_R - W.antipode @ E_L @ W.antipode_inv).max())}
    # quasibasis S(h_(1)) ⊗ g_R^-2 h_(2)
    H = W.coproduct(hd.h)
    gr2 = alg.power(hd.g_R, -2.0)
    acc = np.zeros((n, n), dtype=complex)
    idx = np.zeros(n, dtype=complex)
    for i, j in zip(*np.nonzero(np.abs(H) > 1e-14)):
        a = W.S(eye[i])
        b = W.mul(gr2, eye[j])
        acc += H[i, j] * W.left(a) @ E_L @ W.left(b)
        idx += H[i, j] * W.mul(a, b)
    res["quasibasis of E^L"] = float(np.abs(acc - np.eye(n)).max())
    res["Σ a_i b_i = Π^R(g_R^-2 h)"] = float(np.abs(idx - W.pi_right(W.mul(gr2, hd.h))).max())
    gl2 = alg.power(hd.g_L, -2.0)
    left_form = sum(z * W.eps(W.mul(z, gl2)) / W.eps(z) for z in lat.z_L)
    right_form = sum(z * W.eps(W.mul(z, gr2)) / W.eps(z) for z in lat.z_R)
    res["closed form over Z^L"] = float(np.abs(idx - left_form).max())
    res["closed form over Z^R"] = float(np.abs(idx - right_form).max())
    res["E^L on A^R"] = max(float(np.abs(E_L @ x - sum(z * W.eps(W.mul(z, x)) / W.eps(z) for z in lat.z_hat)).max())
                            for x in lat.A_R.T)
    scale = np.abs(idx).max()
    for name, r in res.items():
        _raise_if(IndexMismatch, name, r, tol, scale)
    return HaarCE(E_L, E_R, HyperElement.from_element(lat, idx, "Haar index"), res)


# ----------------------------------------------------------------------------
# Markov trace

def pf_weights(table: SectorTable) -> tuple[np.ndarray, np.ndarray, NonNegMatrix]:
    """``(f, I_M per hypersector, d)`` from the regular dimension matrix ``d_μν``.

    On each hypersector ``f`` is the Perron-Frobenius vector normalized by
    ``I_M Σ f_μ² = 1``.
    """
    d = module_dimension_matrix(table, table.n)
    f = np.zeros(len(table.vacua))
    vals = np.zeros(len(table.hypersectors))
    for H, vs in enumerate(table.hypersectors):
        vs = list(vs)
        comps = perron_frobenius(NonNegMatrix(d.data[np.ix_(vs, vs)]))
        if len(comps) != 1:
            raise PFMismatch(f"dimension matrix of hypersector {H} is reducible", float(len(comps)))
        lam, v = comps[0].eigenvalue, comps[0].vector
        f[vs] = v / np.sqrt(lam * (v @ v))
        vals[H] = lam
    return f, vals, d


@dataclass(frozen=True, eq=False)
class MarkovData:
    f: np.ndarray
    f_hat: np.ndarray
    t: np.ndarray
    tau_M: LinearFunctional
    I_M: HyperElement
    I_H: HyperElement | None
    E_L_M: ConditionalExpectation
    E_R_M: ConditionalExpectation
    s: np.ndarray
    r_R: np.ndarray
    r_L: np.ndarray
    pf_values: dict
    residuals: dict


def markov_trace(W: WeakHopfStructure, table: SectorTable, lat: SubalgebraLattice, hd: HaarData,
                 vw: VacuumWeights, f_hat, *, haar: HaarCE | None = None, fusion=None,
                 tol: float = CHECK_TOL) -> MarkovData:
    """The Markov trace and the Markov expectations onto ``A^L`` and ``A^R``.

    ``f_hat`` is the Perron-Frobenius vector of the dual, indexed like
    ``lat.z_hat``.  Pass ``fusion`` (``N[p, q, r]``) to include the fusion
    check among the independent Perron-Frobenius computations.
    """
    alg = W.algebra
    f, ivals, dmat = pf_weights(table)
    f_hat = np.asarray(f_hat, dtype=float)
    t = np.array([f[table.left[q]] * table.d[q] * f[table.right[q]] for q in range(len(table))])
    res = {}
    if (t <= 0).any():
        raise NotTrace("Markov trace vector is positive", float(-t.min()))
    n = np.array(table.n, dtype=float)
    res["τ_M(z_H) = 1"] = max(abs(sum(n[q] * t[q] for q in range(len(table)) if table.hyper[q] == H) - 1)
                              for H in range(len(table.hypersectors)))
    res["t_q = t_q̄"] = float(np.abs(t - t[list(table.conj)]).max())
    tau = LinearFunctional.from_trace_vector(alg, t)
    res["τ_M ∘ S = τ_M"] = float(np.abs(tau.covector @ W.antipode - tau.covector).max())
    I_M = HyperElement.from_values(lat, ivals)
    iq = np.array([ivals[table.hyper[q]] for q in range(len(table))])

    incl_L = inclusion_of(alg, lat.A_L)
    incl_R = inclusion_of(alg, lat.A_R)
    E_L = trace_preserving_ce(incl_L, t, tol=tol)
    E_R = trace_preserving_ce(incl_R, t, tol=tol)
    res["Index E^L_M = I_M"] = float(np.abs(E_L.index - I_M.element).max())
    res["Index E^R_M = I_M"] = float(np.abs(E_R.index - I_M.element).max())
    res["E^R_M = S E^L_M S^-1"] = float(np.abs(E_R.matrix - W.antipode @ E_L.matrix @ W.antipode_inv).max())

    pf = {"dimension matrix": ivals.copy()}
    lam = incl_L.Lam.astype(float)           # rows = sectors of A
    pf["inclusion A^L ⊂ A"] = np.array([(lam @ lam.T @ t)[q] / t[q] for q in range(len(table))])
    res["ΛΛ^t t = I_M t"] = float(np.abs(pf["inclusion A^L ⊂ A"] - iq).max())
    if fusion is not None:
        NA = np.einsum("p,pqr->qr", n, np.asarray(fusion, dtype=float))
        pf["regular fusion"] = (NA @ t) / t
        res["N_A t = I_M t"] = float(np.abs(pf["regular fusion"] - iq).max())
    for name in ("ΛΛ^t t = I_M t", "N_A t = I_M t"):
        if name in res:
            _raise_if(PFMismatch, name, res.pop(name), tol, iq.max())

    # Radon-Nikodym data
    f_L = sum(c * z for c, z in zip(f, lat.z_L))
    f_R = sum(c * z for c, z in zip(f, lat.z_R))
    f_el = sum(c * z for c, z in zip(f_hat, lat.z_hat))
    P = alg.power
    s = W.prod(f_L, P(vw.k_L, -0.5), alg.inv(hd.g_L), alg.inv(hd.g_R), P(vw.k_R, -0.5), f_R)
    res["τ_M = ĥ(· s)"] = float(np.abs(hd.h_hat @ W.right(s) - tau.covector).max())
    r_R = W.prod(P(I_M.element, -0.5), alg.inv(f_el), P(vw.k_el, 0.5), alg.inv(hd.g_R), P(vw.k_R, -0.5), f_R)
    r_L = W.S(r_R)
    if haar is None:
        haar = haar_ce(W, hd, lat, tol=tol)
    res["E^L_M = E^L(r_R ·)"] = float(np.abs(E_L.matrix - haar.E_L @ W.left(r_R)).max())
    res["E^R_M = E^R(· r_L)"] = float(np.abs(E_R.matrix - haar.E_R @ W.right(r_L)).max())
    rn = rn_derivative(incl_L, tau.covector, hd.h_hat, tol=tol)
    res["r_R agrees with E_ψ(s)^-1 s"] = float(np.abs(rn.r - r_R).max())
    for name, r in res.items():
        _raise_if(IndexMismatch, name, r, tol, max(iq.max(), np.abs(r_R).max()))
    return MarkovData(f, f_hat, t, tau, I_M, haar.index, E_L, E_R, s, r_R, r_L, pf, res)


# ----------------------------------------------------------------------------
# boundary dimensions

@dataclass(frozen=True, eq=False)
class BoundaryDimensions:
    """Dimensions of the sectors of ``A^L`` (index ``a``) and ``A^R`` (index ``b``).

    ``a_left[a]`` is a vacuum of ``A``, ``a_right[a]`` a vacuum of ``Â``;
    for ``b`` it is the other way round.  ``N[q, a, b]`` is the multiplicity
    of ``e_a A^L ⊗ e_b A^R`` in ``e_q A``.
    """

    e_a: tuple[np.ndarray, ...]
    e_b: tuple[np.ndarray, ...]
    n_a: tuple[int, ...]
    n_b: tuple[int, ...]
    d_a: np.ndarray
    d_b: np.ndarray
    a_left: tuple[int, ...]
    a_right: tuple[int, ...]
    b_left: tuple[int, ...]
    b_right: tuple[int, ...]
    conj: tuple[int, ...]          # ā as a sector of A^R
    d_LR: np.ndarray                # d_{μν̂}
    d_RL: np.ndarray                # d_{ν̂μ}
    N: np.ndarray
    index_LR: HyperElement
    residuals: dict


def _owner(W: WeakHopfStructure, projections, e, what: str) -> int:
    hits = [k for k, z in enumerate(projections) if np.abs(W.mul(z, e) - e).max() < 1e-6]
    if len(hits) != 1:
        raise FormulaMismatch(f"{what} lies under {len(hits)} minimal projections")
    return hits[0]


def boundary_dimensions(W: WeakHopfStructure, table: SectorTable, lat: SubalgebraLattice, md: MetricData,
                        markov: MarkovData, *, dual_dimension_matrix=None, tol: float = CHECK_TOL) -> BoundaryDimensions:
    D = W.dual()
    alg = W.algebra
    AL = markov.E_L_M.inclusion.A
    AR = markov.E_R_M.inclusion.A
    e_a = [AL.central_projection(a) for a in range(AL.nblocks)]
    e_b = [AR.central_projection(b) for b in range(AR.nblocks)]
    n_a, n_b = AL.block_dims, AR.block_dims
    a_left = tuple(_owner(W, lat.z_L, e, "e_a") for e in e_a)
    a_right = tuple(_owner(W, lat.z_hat, e, "e_a") for e in e_a)
    b_left = tuple(_owner(W, lat.z_hat, e, "e_b") for e in e_b)
    b_right = tuple(_owner(W, lat.z_R, e, "e_b") for e in e_b)
    conj = tuple(_owner(W, e_b, W.S(e), "S(e_a)") for e in e_a)
    gli = alg.inv(md.g_std_L)
    gri = alg.inv(md.g_std_R)
    d_a = np.array([W.eps(W.mul(e, gli)).real / n for e, n in zip(e_a, n_a)])
    d_b = np.array([W.eps(W.mul(e, gri)).real / n for e, n in zip(e_b, n_b)])
    ghli = D.algebra.inv(md.g_hat_std_L)
    ghri = D.algebra.inv(md.g_hat_std_R)
    d_a_hat = np.array([D.eps(D.mul(W.dual_hit(e, W.counit), ghri)).real / n for e, n in zip(e_a, n_a)])
    d_b_hat = np.array([D.eps(D.mul(W.dual_hit_right(W.counit, e), ghli)).real / n for e, n in zip(e_b, n_b)])
    res = {"d_a from A and from Â": float(np.abs(d_a - d_a_hat).max()),
           "d_b from A and from Â": float(np.abs(d_b - d_b_hat).max())}
    r = float(np.abs(d_a - d_b[list(conj)]).max())
    _raise_if(UniquenessViolated, "d_a = d_ā", r, tol, d_a.max())
    if (d_a <= 0).any() or (d_b <= 0).any():
        raise FormulaMismatch("boundary dimensions are positive", float(-min(d_a.min(), d_b.min())))

    # multiplicities of e_a A^L ⊗ e_b A^R in e_q A
    N = np.zeros((len(table), len(e_a), len(e_b)), dtype=int)
    for a, ea in enumerate(e_a):
        for b, eb in enumerate(e_b):
            tr = alg.traces(W.mul(ea, eb))
            for q in range(len(table)):
                N[q, a, b] = as_integer(tr[q] / (n_a[a] * n_b[b]), f"N_q^ab for q={table.labels[q]}")
    res["Σ N_q^ab n_a n_b = n_q"] = float(np.abs(np.einsum("qab,a,b->q", N, n_a, n_b) - np.array(table.n)).max())
    mult = np.einsum("qab,q->ab", N, table.d)
    expect = np.array([[d_a[a] * d_b[b] * (a_right[a] == b_left[b]) for b in range(len(e_b))] for a in range(len(e_a))])
    res["Σ_q N_q^ab d_q = d_a δ d_b"] = float(np.abs(mult - expect).max())

    # boundary dimension matrices
    nv, nw = len(lat.z_L), len(lat.z_hat)
    d_LR = np.array([[W.eps(W.prod(lat.z_L[m], gli, lat.z_hat[v])).real for v in range(nw)] for m in range(nv)])
    d_RL = np.array([[W.eps(W.prod(lat.z_hat[v], gri, lat.z_R[m])).real for m in range(nv)] for v in range(nw)])
    sum_LR = np.zeros((nv, nw))
    sum_RL = np.zeros((nw, nv))
    for a in range(len(e_a)):
        sum_LR[a_left[a], a_right[a]] += n_a[a] * d_a[a]
    for b in range(len(e_b)):
        sum_RL[b_left[b], b_right[b]] += n_b[b] * d_b[b]
    res["d_μν̂ = Σ n_a d_a"] = float(np.abs(d_LR - sum_LR).max())
    res["d_ν̂μ = Σ n_b d_b"] = float(np.abs(d_RL - sum_RL).max())
    dreg = module_dimension_matrix(table, table.n).data
    res["d = d^L d^R on A"] = float(np.abs(d_LR @ d_RL - dreg).max())
    if dual_dimension_matrix is not None:
        res["d̂ = d^R d^L on Â"] = float(np.abs(d_RL @ d_LR - np.asarray(dual_dimension_matrix)).max())
    same = np.array([[lat.hyper_of_vacuum[m] == lat.hyper_of_dual_vacuum[v] for v in range(nw)] for m in range(nv)])
    if (d_LR[same] <= tol).any() or np.abs(d_LR[~same]).max(initial=0.0) > tol:
        raise FormulaMismatch("d_μν̂ is positive exactly within hypersectors")
    root = np.sqrt([markov.I_M.values[lat.hyper_of_dual_vacuum[v]] for v in range(nw)])
    res["d^R f = I_M^½ f̂"] = float(np.abs(d_RL @ markov.f - root * markov.f_hat).max())

    # 1_(2) S(1_(1)) as the density of the left regular trace of A^L
    U = W.delta_one
    eye = np.eye(W.dim)
    w = sum(U[i, j] * W.mul(eye[j], W.S(eye[i])) for i, j in zip(*np.nonzero(np.abs(U) > 1e-14)))
    VL = lat.A_L
    VLp = np.linalg.pinv(VL)
    res["tr^L(x) = ε(x 1_(2)S(1_(1)))"] = max(abs(np.trace(VLp @ W.left(x) @ VL) - W.eps(W.mul(x, w))) for x in VL.T)
    res["1_(2)S(1_(1)) = g'_L^-1 Σ e_a n_a/d_a"] = float(np.abs(
        w - W.mul(gli, sum(e * n / d for e, n, d in zip(e_a, n_a, d_a)))).max())

    gl2 = alg.power(md.g_std_L, -2.0)
    idx = sum(z * W.eps(W.mul(z, gl2)) for z in lat.z_L)
    idx2 = sum(z * sum(d_a[a] ** 2 for a in range(len(e_a)) if a_left[a] == m) for m, z in enumerate(lat.z_L))
    res["Σ_μ z^L_μ ε(z^L_μ g'_L^-2) = Σ d_a²"] = float(np.abs(idx - idx2).max())
    scale = max(d_a.max(), d_b.max(), dreg.max())
    for name, r in res.items():
        _raise_if(FormulaMismatch, name, r, tol, scale)
    return BoundaryDimensions(tuple(e_a), tuple(e_b), tuple(n_a), tuple(n_b), d_a, d_b, a_left, a_right, b_left,
                              b_right, conj, d_LR, d_RL, N, HyperElement.from_element(lat, idx, "A^L A^R index"), res)


# ----------------------------------------------------------------------------
# weak Kac

@dataclass(frozen=True, eq=False)
class KacReport:
    h_hat_tracial: bool
    s2_identity: bool
    eps_g_R: bool
    details: dict

    @property
    def weak_kac(self) -> bool:
        return self.h_hat_tracial


def _rank(x: np.ndarray) -> int:
    return orth(x, 1e-8).shape[1]


def kac_diagnostics(W: WeakHopfStructure, table: SectorTable, lat: SubalgebraLattice, hd: HaarData,
                    vw: VacuumWeights, markov: MarkovData, *, tol: float = 1e-8) -> KacReport:
    """The three weak-Kac predicates, and what follows when they hold."""
    n = W.dim
    T = (hd.h_hat @ W._mult_mat).reshape(n, n)
    p1 = float(np.abs(T - T.T).max()) < tol
    p2 = float(np.abs(W.antipode @ W.antipode - np.eye(n)).max()) < tol
    p3 = abs(W.eps(W.algebra.power(hd.g_R, -2.0)) - n) < tol * n
    details = {}
    if len({p1, p2, p3}) != 1:
        raise KacInconsistency(f"predicates disagree: ĥ tracial={p1}, S²=id={p2}, ε(g_R^-2)=dim A={p3}")
    if p1:
        I_H = markov.I_H.values if markov.I_H is not None else None
        I_M = markov.I_M.values
        if I_H is not None and np.abs(I_H - I_M).max() > tol * I_M.max():
            raise KacInconsistency(f"I_H = {I_H} differs from I_M = {I_M}")
        ints = [as_integer(v, "Markov index") for v in I_M]
        details["index"] = ints
        for m, z in enumerate(lat.z_L):
            Lz = W.left(z)
            ratio = _rank(Lz) / _rank(Lz @ lat.A_L)
            H = lat.hyper_of_vacuum[m]
            if abs(ratio - I_M[H]) > tol * I_M[H]:
                raise KacInconsistency(f"I_M on vacuum {m} is {I_M[H]}, dimension ratio gives {ratio}")
            dimH = _rank(W.left(lat.z_H[H]))
            fm = np.sqrt(vw.k[m] / dimH)
            if abs(fm - markov.f[m]) > tol:
                raise KacInconsistency(f"f on vacuum {m} is {markov.f[m]}, expected {fm}")
        dimq = np.array([_rank(W.left(lat.z_H[table.hyper[q]])) for q in range(len(table))], dtype=float)
        reg = np.array(table.n) / dimq
        if np.abs(reg - markov.t).max() > tol:
            raise KacInconsistency("Markov trace is not the normalized regular trace")
        details["dimension ratio"] = ints
    return KacReport(p1, p2, p3, details)
