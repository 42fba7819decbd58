"""Sectors, vacua, dimensions, fusion and Frobenius-Schur indicators."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import (FormulaMismatch, IndicatorOutOfRange, NotIntertwiner, UnknownSector, VacuumMismatch)
from .haar import HaarData, MetricData, VacuumWeights, block_traces
from .mmalg import INTEGER_TOL, NonNegMatrix, as_integer, orth
from .wha import SubalgebraLattice, WeakHopfStructure

__all__ = ["SectorTable", "Module", "sector_table", "sector_dimensions", "module_dimension_matrix",
           "regular_module", "irreducible_module", "tensor_module", "conjugate_module", "multiplicities",
           "fuse", "fusion_tensor", "left_inverse_value", "right_inverse_value", "fs_indicators"]

CHI_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class SectorTable:
    """One row per sector; vacuum and hypersector data are indices into ``vacua`` / ``hyper``."""

    labels: tuple[str, ...]
    n: tuple[int, ...]
    e: tuple[np.ndarray, ...]
    left: tuple[int, ...]           # q^L as an index into vacua
    right: tuple[int, ...]          # q^R
    conj: tuple[int, ...]           # sector index of q̄
    hyper: tuple[int, ...]
    tau: np.ndarray
    d: np.ndarray
    chi: tuple[int, ...]
    vacua: tuple[int, ...]          # sector index of each vacuum
    hypersectors: tuple[tuple[int, ...], ...]   # vacuum indices per hypersector

    def __len__(self):
        return len(self.labels)

    def index(self, label: str | int) -> int:
        if isinstance(label, (int, np.integer)):
            if 0 <= label < len(self):
                return int(label)
            raise UnknownSector(str(label))
        key = str(label).replace(" ", "")
        for q, lab in enumerate(self.labels):
            if lab.replace(" ", "") == key:
                return q
        raise UnknownSector(label)

    def is_vacuum(self, q: int) -> bool:
        return q in self.vacua

    def is_soliton(self, q: int) -> bool:
        return self.left[q] != self.right[q]

    @property
    def vacuum_labels(self) -> tuple[str, ...]:
        return tuple(self.labels[q] for q in self.vacua)


# ----------------------------------------------------------------------------
# modules as (carrier dimension, action of the basis)

@dataclass(frozen=True, eq=False)
class Module:
    """Representation given by the matrices ``mats[k] = D(e_k)``."""

    mats: np.ndarray

    @property
    def dim(self) -> int:
        return self.mats.shape[1]

    def act(self, x) -> np.ndarray:
        return np.tensordot(x, self.mats, axes=(0, 0))


def irreducible_module(W: WeakHopfStructure, q: int) -> Module:
    alg = W.algebra
    n = alg.block_dims[q]
    o = alg.offsets[q]
    return Module(alg.inverse[o:o + n * n].T.reshape(W.dim, n, n).copy())


def regular_module(W: WeakHopfStructure) -> Module:
    return Module(np.stack([W.left(np.eye(W.dim)[k]) for k in range(W.dim)]))


def tensor_module(W: WeakHopfStructure, V: Module, U: Module) -> Module:
    """``Δ(1)·(V⊗U)`` with the action ``x ↦ (D_V⊗D_U)(Δ(x))``."""
    D = W.comult.dense()
    big = np.einsum("ijk,iab,jcd->kacbd", D, V.mats, U.mats, optimize=True)
    m = V.dim * U.dim
    big = big.reshape(W.dim, m, m)
    proj = np.tensordot(W.unit, big, axes=(0, 0))
    basis = orth(proj, 1e-9)
    return Module(np.einsum("ai,kab,bj->kij", basis.conj(), big, basis, optimize=True))


def conjugate_module(W: WeakHopfStructure, V: Module) -> Module:
    """The dual module ``x ↦ D_V(S(x))^t``."""
    return Module(np.einsum("lk,lab->kba", W.antipode, V.mats))


def multiplicities(W: WeakHopfStructure, V: Module) -> np.ndarray:
    """``N_V^q = tr D_V(e_q) / n_q`` as integers."""
    alg = W.algebra
    out = []
    for q in range(alg.nblocks):
        t = np.trace(V.act(alg.central_projection(q))) / alg.block_dims[q]
        out.append(as_integer(t, f"multiplicity of {alg.block_labels[q]}"))
    return np.array(out, dtype=int)


# ----------------------------------------------------------------------------

def sector_dimensions(W: WeakHopfStructure, md: MetricData, vw: VacuumWeights, left, right, tau,
                      tol: float = 1e-9) -> np.ndarray:
    """``d_q`` three ways: ``tr_q(g')/k_{q^L}``, ``tr_q(g'^{-1})/k_{q^R}``, ``τ_q/√(k_{q^L}k_{q^R})``."""
    alg = W.algebra
    k = vw.k
    kl = np.array([k[m] for m in left])
    kr = np.array([k[m] for m in right])
    d1 = block_traces(W, md.g_std).real / kl
    d2 = block_traces(W, alg.inv(md.g_std)).real / kr
    d3 = np.asarray(tau).real / np.sqrt(kl * kr)
    r = max(np.abs(d1 - d2).max(), np.abs(d1 - d3).max())
    if r > tol * max(1.0, np.abs(d1).max()):
        raise FormulaMismatch("three expressions for d_q", float(r))
    return d3


def fs_indicators(W: WeakHopfStructure, h, tau) -> tuple[int, ...]:
    """``χ_r`` from ``h_(1)h_(2) = Σ_r (χ_r/τ_r) e_r``."""
    alg = W.algebra
    iota = W._mult_mat @ W.coproduct(h).reshape(-1)
    out = []
    for q, b in enumerate(alg.blocks(iota)):
        n = b.shape[0]
        c = np.trace(b) / n
        if np.abs(b - c * np.eye(n)).max() > CHI_TOL:
            raise IndicatorOutOfRange(f"h_(1)h_(2) not scalar on {alg.block_labels[q]}",
                                      float(np.abs(b - c * np.eye(n)).max()))
        chi = c * tau[q]
        k = int(np.rint(chi.real))
        if abs(chi - k) > CHI_TOL or k not in (-1, 0, 1):
            raise IndicatorOutOfRange(f"indicator of {alg.block_labels[q]}", float(abs(chi - k)))
        out.append(k)
    return tuple(out)


def sector_table(W: WeakHopfStructure, hd: HaarData, vw: VacuumWeights, md: MetricData,
                 lat: SubalgebraLattice) -> SectorTable:
    alg = W.algebra
    tol = 1e-6
    e = [alg.central_projection(q) for q in range(alg.nblocks)]

    def support(q, side):
        hits = [m for m, z in enumerate(side) if np.abs(W.mul(z, e[q])).max() > tol]
        if len(hits) != 1:
            raise VacuumMismatch(f"sector {alg.block_labels[q]} meets {len(hits)} vacua")
        return hits[0]

    left = tuple(support(q, lat.z_L) for q in range(alg.nblocks))
    right = tuple(support(q, lat.z_R) for q in range(alg.nblocks))
    conj = []
    for q in range(alg.nblocks):
        s = W.S(e[q])
        conj.append(next(p for p in range(alg.nblocks) if np.abs(s - e[p]).max() < tol))
    hyper = tuple(next(hh for hh, z in enumerate(lat.z_H) if np.abs(W.mul(z, e[q]) - e[q]).max() < tol)
                  for q in range(alg.nblocks))
    for q in range(alg.nblocks):
        if left[conj[q]] != right[q] or right[conj[q]] != left[q]:
            raise VacuumMismatch(f"conjugate of {alg.block_labels[q]} has the wrong vacua")
    for m, q in enumerate(lat.vacua):
        if left[q] != m or right[q] != m:
            raise VacuumMismatch(f"vacuum sector {alg.block_labels[q]} is not its own left and right vacuum")
    tau = block_traces(W, hd.g).real
    d = sector_dimensions(W, md, vw, left, right, tau)
    chi = fs_indicators(W, hd.h, tau)
    for q in range(alg.nblocks):
        if chi[q] != 0 and conj[q] != q:
            raise IndicatorOutOfRange(f"nonzero indicator on non-selfconjugate {alg.block_labels[q]}", 0.0)
    hyp = tuple(tuple(m for m in range(len(lat.vacua)) if lat.hyper_of_vacuum[m] == H) for H in range(len(lat.z_H)))
    return SectorTable(alg.block_labels, alg.block_dims, tuple(e), left, right, tuple(conj), hyper, tau, d, chi,
                       lat.vacua, hyp)


def module_dimension_matrix(table: SectorTable, mult) -> NonNegMatrix:
    """``d_V^{μν} = Σ_{q^L=μ, q^R=ν} N_V^q d_q``; ``mult`` is the vector ``N_V`` or a ``{label: N}`` map."""
    nv = len(table.vacua)
    if isinstance(mult, dict):
        vec = np.zeros(len(table))
        for lab, c in mult.items():
            vec[table.index(lab)] = c
        mult = vec
    m = np.zeros((nv, nv))
    for q, c in enumerate(mult):
        m[table.left[q], table.right[q]] += c * table.d[q]
    return NonNegMatrix(m, (table.vacuum_labels, table.vacuum_labels))


def fusion_tensor(W: WeakHopfStructure, table: SectorTable) -> np.ndarray:
    """``N[p, q, r]``: multiplicity of ``r`` in ``p⊠q``, from the explicit tensor module."""
    s = len(table)
    irr = [irreducible_module(W, q) for q in range(s)]
    N = np.zeros((s, s, s), dtype=int)
    for p in range(s):
        for q in range(s):
            N[p, q] = multiplicities(W, tensor_module(W, irr[p], irr[q]))
    return N


def fuse(W: WeakHopfStructure, table: SectorTable, p, q, tol: float = 1e-8) -> dict[str, int]:
    """Nonzero ``N_pq^r`` keyed by sector label; checks ``d_p δ d_q = Σ_r N_pq^r d_r``."""
    p, q = table.index(p), table.index(q)
    N = multiplicities(W, tensor_module(W, irreducible_module(W, p), irreducible_module(W, q)))
    lhs = table.d[p] * table.d[q] * (table.right[p] == table.left[q])
    r = abs(lhs - N @ table.d)
    if r > tol:
        raise FormulaMismatch(f"d_p d_q = Σ N d_r for {table.labels[p]}⊠{table.labels[q]}", float(r))
    return {table.labels[k]: int(c) for k, c in enumerate(N) if c}


def _check_intertwiner(W: WeakHopfStructure, V: Module, T) -> np.ndarray:
    T = np.asarray(T, dtype=complex)
    r = max(np.abs(T @ m - m @ T).max(initial=0.0) for m in V.mats)
    if r > 1e-8 * max(1.0, np.abs(T).max(initial=0.0)):
        raise NotIntertwiner("T does not commute with the module action", float(r))
    return T


def left_inverse_value(W: WeakHopfStructure, V: Module, T, g_std) -> np.ndarray:
    """``tr_V(T D_V(g'^{-1} 1_(1))) 1_(2)`` ∈ ``A^L``."""
    T = _check_intertwiner(W, V, T)
    gi = W.algebra.inv(g_std)
    U = W.delta_one
    n = W.dim
    vals = np.array([np.trace(T @ V.act(W.mul(gi, np.eye(n)[i]))) for i in range(n)])
    return vals @ U


def right_inverse_value(W: WeakHopfStructure, V: Module, T, g_std) -> np.ndarray:
    """``tr_V(T D_V(g' 1_(2))) 1_(1)`` ∈ ``A^R``."""
    T = _check_intertwiner(W, V, T)
    U = W.delta_one
    n = W.dim
    vals = np.array([np.trace(T @ V.act(W.mul(g_std, np.eye(n)[j]))) for j in range(n)])
    return U @ vals
