"""Weak Hopf algebras given by structure constants.

Conventions (all coordinates complex, basis ``e_0 .. e_{n-1}``):

* ``mult[k, i, j]``   coefficient of ``e_k`` in ``e_i e_j``
* ``comult[i, j, k]`` coefficient of ``e_i ⊗ e_j`` in ``Δ(e_k)``
* ``x* = star @ conj(x)``, ``S(x) = antipode @ x``
* an element of ``A ⊗ A`` is an ``n x n`` coefficient matrix
* a functional ``φ`` on ``A`` is the vector ``φ_k = φ(e_k)``; these are the
  coordinates of ``φ`` in the dual basis, so the dual structure is a pure
  relabelling of the same tensors.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .errors import AxiomViolation, DimensionMismatch, VacuumMismatch
from .mmalg import (DEFAULT_SEED, DEFAULT_TOL, COLLISION_GAP, MultiMatrixAlgebra, SparseTensor, intersect,
                    make_rng, null_space, orth, wedderburn_decompose)

__all__ = ["WeakHopfStructure", "SubalgebraLattice", "axiom_residuals", "check_axioms", "load_and_verify",
           "counital_projections", "sweedler_arrow", "dual_wha", "distinguished_subalgebras", "minimal_projections"]


class WeakHopfStructure:
    """Structure maps of a finite-dimensional weak C*-Hopf algebra.

    Immutable by convention; derived matrices and the Wedderburn data are
    computed lazily and cached.
    """

    def __init__(self, mult: SparseTensor, comult: SparseTensor, unit, counit, antipode, star, *,
                 basis_labels: Sequence[str] | None = None, tol: float = DEFAULT_TOL, seed: int = DEFAULT_SEED,
                 sector_hints: Mapping[str, np.ndarray] | None = None):
        n = len(unit)
        if mult.shape != (n, n, n) or comult.shape != (n, n, n):
            raise DimensionMismatch("structure tensors do not match the unit's dimension")
        self.dim = n
        self.mult = mult
        self.comult = comult
        self.unit = np.asarray(unit, dtype=complex)
        self.counit = np.asarray(counit, dtype=complex)
        self.antipode = np.asarray(antipode, dtype=complex)
        self.star = np.asarray(star, dtype=complex)
        for name, a, shp in (("counit", self.counit, (n,)), ("antipode", self.antipode, (n, n)),
                             ("star", self.star, (n, n))):
            if a.shape != shp:
                raise DimensionMismatch(f"{name} has shape {a.shape}, expected {shp}")
        self.basis_labels = tuple(basis_labels) if basis_labels else tuple(f"e{i}" for i in range(n))
        self.tol = tol
        self.seed = seed
        self.sector_hints = dict(sector_hints or {})
        self._dual: WeakHopfStructure | None = None

    def __repr__(self):
        return f"WeakHopfStructure(dim={self.dim}, nnz(mult)={self.mult.nnz}, nnz(comult)={self.comult.nnz})"

    # -- cached matrices -----------------------------------------------------
    @cached_property
    def _mult_mat(self):
        return self.mult.matrix((0,), (1, 2))

    @cached_property
    def _left_mat(self):
        return self.mult.matrix((0, 2), (1,))

    @cached_property
    def _right_mat(self):
        return self.mult.matrix((0, 1), (2,))

    @cached_property
    def _comult_mat(self):
        return self.comult.matrix((0, 1), (2,))

    @cached_property
    def _hit_mat(self):
        return self.comult.matrix((0, 2), (1,))

    @cached_property
    def delta_one(self) -> np.ndarray:
        """``Δ(1)`` as an ``n x n`` coefficient matrix."""
        return self.coproduct(self.unit)

    @cached_property
    def counit_form(self) -> np.ndarray:
        """``ε(e_a e_b)``."""
        return (self._mult_mat.T @ self.counit).reshape(self.dim, self.dim)

    @cached_property
    def pi_left_matrix(self) -> np.ndarray:
        # ⊓^L(x) = ε(1_(1) x) 1_(2)
        return self.delta_one.T @ self.counit_form

    @cached_property
    def pi_right_matrix(self) -> np.ndarray:
        # ⊓^R(x) = 1_(1) ε(x 1_(2))
        return self.delta_one @ self.counit_form.T

    @cached_property
    def antipode_inv(self) -> np.ndarray:
        return np.linalg.inv(self.antipode)

    @cached_property
    def algebra(self) -> MultiMatrixAlgebra:
        """Wedderburn data of the underlying C*-algebra, blocks labelled by ``sector_hints``."""
        alg = wedderburn_decompose(self.dim, self.mult, self.star, self.unit, rng=make_rng(self.seed), tol=self.tol)
        labels = []
        for q in range(alg.nblocks):
            e = alg.central_projection(q)
            name = next((lab for lab, p in self.sector_hints.items()
                         if np.abs(np.asarray(p) - e).max() < 1e-6), None)
            labels.append(name or f"q{q}")
        alg = alg.relabel(labels)
        hinted = list(self.sector_hints)
        if set(labels) <= set(hinted):
            alg = alg.reorder(sorted(range(alg.nblocks), key=lambda q: hinted.index(labels[q])))
        return alg

    # -- algebra -------------------------------------------------------------
    def mul(self, x, y) -> np.ndarray:
        return self._mult_mat @ np.kron(x, y)

    def prod(self, *xs) -> np.ndarray:
        out = xs[0]
        for x in xs[1:]:
            out = self.mul(out, x)
        return out

    def left(self, x) -> np.ndarray:
        """Matrix of ``y ↦ x y``."""
        return (self._left_mat @ x).reshape(self.dim, self.dim)

    def right(self, x) -> np.ndarray:
        """Matrix of ``y ↦ y x``."""
        return (self._right_mat @ x).reshape(self.dim, self.dim)

    def adjoint(self, x) -> np.ndarray:
        return self.star @ np.conj(x)

    def S(self, x) -> np.ndarray:
        return self.antipode @ x

    def S_inv(self, x) -> np.ndarray:
        return self.antipode_inv @ x

    def eps(self, x) -> complex:
        return complex(self.counit @ x)

    def coproduct(self, x) -> np.ndarray:
        return (self._comult_mat @ x).reshape(self.dim, self.dim)

    def tensor_mul(self, X, Y) -> np.ndarray:
        """Product in ``A ⊗ A`` of two coefficient matrices."""
        n = self.dim
        z = np.einsum("ab,cd->acbd", X, Y).reshape(n * n, n * n)
        m = self._mult_mat
        return np.asarray(m @ np.asarray(m @ z).T).T

    def pi_left(self, x) -> np.ndarray:
        return self.pi_left_matrix @ x

    def pi_right(self, x) -> np.ndarray:
        return self.pi_right_matrix @ x

    # -- Sweedler arrows -----------------------------------------------------
    def hit(self, phi, x) -> np.ndarray:
        """``φ⇀x = x_(1) φ(x_(2))``."""
        return self.coproduct(x) @ phi

    def hit_right(self, x, phi) -> np.ndarray:
        """``x↼φ = φ(x_(1)) x_(2)``."""
        return phi @ self.coproduct(x)

    def hit_matrix(self, phi) -> np.ndarray:
        """Matrix of ``x ↦ φ⇀x``."""
        return (self._hit_mat @ phi).reshape(self.dim, self.dim)

    def dual_hit(self, x, phi) -> np.ndarray:
        """``x⇀φ`` with ``<x⇀φ, y> = φ(y x)``."""
        return phi @ self.right(x)

    def dual_hit_right(self, phi, x) -> np.ndarray:
        """``φ↼x`` with ``<φ↼x, y> = φ(x y)``."""
        return phi @ self.left(x)

    # -- duality -------------------------------------------------------------
    def dual(self) -> "WeakHopfStructure":
        """The dual weak Hopf algebra on the dual basis; ``W.dual().dual() is W``."""
        if self._dual is None:
            s = self.antipode
            d = WeakHopfStructure(
                self.comult.transpose((2, 0, 1)), self.mult.transpose((1, 2, 0)),
                self.counit, self.unit, s.T, s.T @ self.star.conj().T,
                basis_labels=[f"{lab}^" for lab in self.basis_labels], tol=self.tol, seed=self.seed)
            d._dual = self
            self._dual = d
        return self._dual

    @cached_property
    def scale(self) -> float:
        return max(1.0, *(float(np.abs(a).max(initial=0.0)) for a in
                          (self.mult.val, self.comult.val, self.unit, self.counit, self.antipode, self.star)))


# ----------------------------------------------------------------------------
# axioms

def _sparse_diff(a: SparseTensor, b: SparseTensor) -> float:
    if a.shape != b.shape:
        raise DimensionMismatch(f"{a.shape} vs {b.shape}")
    both = SparseTensor(a.shape, np.concatenate([a.idx, b.idx]), np.concatenate([a.val, -b.val]))._coalesce()
    return float(np.abs(both.val).max(initial=0.0))


def axiom_residuals(W: WeakHopfStructure) -> dict[str, float]:
    """Residual of every axiom, in checking order, relative to the structure's scale."""
    n, M, D = W.dim, W.mult, W.comult
    Md, Dd = M.dense(), D.dense()
    u, eps, S, St = W.unit, W.counit, W.antipode, W.star
    eye = np.eye(n)
    res: dict[str, float] = {}

    def put(name, value):
        res[name] = float(value) / W.scale

    put("unit", max(np.abs(np.einsum("kij,i->kj", Md, u) - eye).max(),
                    np.abs(np.einsum("kij,j->ki", Md, u) - eye).max()))
    # (e_i e_j) e_k = e_i (e_j e_k)
    lhs = M.tensordot(M, ([1], [0]))          # (o, k, i, j)
    rhs = M.tensordot(M, ([2], [0]))          # (o, i, j, k)
    put("associativity", _sparse_diff(lhs.transpose((0, 2, 3, 1)), rhs))
    put("star involution", max(np.abs(St @ St.conj() - eye).max(), np.abs(St @ u.conj() - u).max()))
    put("star antimultiplicativity", np.abs(np.einsum("ak,kij->aij", St, Md.conj())
                                            - np.einsum("kab,aj,bi->kij", Md, St, St)).max())
    put("counit", max(np.abs(np.einsum("i,ijk->jk", eps, Dd) - eye).max(),
                      np.abs(np.einsum("j,ijk->ik", eps, Dd) - eye).max()))
    # (Δ⊗id)Δ = (id⊗Δ)Δ
    left3 = D.tensordot(D, ([2], [0]))        # (a, b, j, k)
    right3 = D.tensordot(D, ([1], [2]))       # (i, k, c, d)
    put("coassociativity", _sparse_diff(left3, right3.transpose((0, 2, 3, 1))))
    # Δ(e_i e_j) = Δ(e_i) Δ(e_j)
    dm = D.tensordot(M, ([2], [0]))           # (p, q, i, j)
    t1 = D.tensordot(M, ([0], [1]))           # (b, i, p, c)
    t2 = t1.tensordot(D, ([3], [0]))          # (b, i, p, d, j)
    t3 = t2.tensordot(M, ([0, 3], [1, 2]))    # (i, p, j, q)
    put("multiplicativity", _sparse_diff(dm, t3.transpose((1, 3, 0, 2))))
    U = W.delta_one
    d2 = np.einsum("abi,ij->abj", Dd, U)
    p1 = np.einsum("ab,cd,pbc->apd", U, U, Md)
    p2 = np.einsum("ab,cd,pcb->apd", U, U, Md)
    put("weak comultiplicativity of the unit", max(np.abs(d2 - p1).max(), np.abs(d2 - p2).max()))
    E2 = W.counit_form
    e3 = np.einsum("aij,ak->ijk", Md, E2)
    r1 = np.einsum("ib,bcj,ck->ijk", E2, Dd, E2, optimize=True)
    r2 = np.einsum("ic,bcj,bk->ijk", E2, Dd, E2, optimize=True)
    put("weak multiplicativity of the counit", max(np.abs(e3 - r1).max(), np.abs(e3 - r2).max()))
    # S(x_(1)) x_(2) = ⊓^R(x),  x_(1) S(x_(2)) = ⊓^L(x)
    sl = np.einsum("ijk,ai,oaj->ok", Dd, S, Md, optimize=True)
    sr = np.einsum("ijk,aj,oia->ok", Dd, S, Md, optimize=True)
    put("antipode (right counital)", np.abs(sl - W.pi_right_matrix).max())
    put("antipode (left counital)", np.abs(sr - W.pi_left_matrix).max())
    # S(x_(1)) x_(2) S(x_(3)) = S(x)
    trip = np.einsum("imk,jlm->ijlk", Dd, Dd)
    a1 = np.einsum("ai,ijlk->ajlk", S, trip)
    a2 = np.einsum("paj,ajlk->plk", Md, a1, optimize=True)
    a3 = np.einsum("opb,bl,plk->ok", Md, S, a2, optimize=True)
    put("antipode (S x1 x2 S x3 = S x)", np.abs(a3 - S).max())
    # Δ(x*) = Δ(x)^{*⊗*}
    put("star compatibility of the coproduct", np.abs(np.einsum("ijl,lk->ijk", Dd, St)
                                                      - np.einsum("ia,jb,abk->ijk", St, St, Dd.conj())).max())
    put("S∘*∘S∘* = id", np.abs(S @ St @ S.conj() @ St.conj() - eye).max())
    cond = np.linalg.cond(S)
    res["antipode invertible"] = 0.0 if np.isfinite(cond) and cond < 1e12 else float("inf")
    return res


def check_axioms(W: WeakHopfStructure, tol: float | None = None) -> dict[str, float]:
    tol = W.tol if tol is None else tol
    res = axiom_residuals(W)
    for name, r in res.items():
        if not r <= tol:
            raise AxiomViolation(name, r)
    return res


def load_and_verify(raw, tol: float | None = None, *, seed: int | None = None) -> WeakHopfStructure:
    """Verify every axiom, then run the Wedderburn decomposition (which checks the C*-condition)."""
    if isinstance(raw, WeakHopfStructure):
        W = raw
    else:
        from .builders import deserialize
        W = deserialize(raw, verify=False)
    if tol is not None:
        W.tol = tol
    if seed is not None:
        W.seed = seed
    check_axioms(W)
    W.algebra
    return W


# ----------------------------------------------------------------------------
# maps

def counital_projections(W: WeakHopfStructure, x) -> tuple[np.ndarray, np.ndarray]:
    return W.pi_left(x), W.pi_right(x)


def sweedler_arrow(W: WeakHopfStructure, variant: str, a, b) -> np.ndarray:
    """``variant`` is one of ``'φ⇀x'``, ``'x↼φ'``, ``'x⇀φ'``, ``'φ↼x'``; arguments in written order."""
    table = {"φ⇀x": lambda: W.hit(a, b), "x↼φ": lambda: W.hit_right(a, b),
             "x⇀φ": lambda: W.dual_hit(a, b), "φ↼x": lambda: W.dual_hit_right(a, b)}
    try:
        return table[variant]()
    except KeyError:
        raise ValueError(f"unknown arrow {variant!r}") from None


def dual_wha(W: WeakHopfStructure, verify: bool = True) -> WeakHopfStructure:
    d = W.dual()
    if verify:
        load_and_verify(d)
    return d


# ----------------------------------------------------------------------------
# distinguished subalgebras

def minimal_projections(W: WeakHopfStructure, basis: np.ndarray, rng=None) -> list[np.ndarray]:
    """Minimal projections of the commutative *-subalgebra spanned by ``basis``."""
    rng = make_rng(rng)
    c = orth(basis)
    r = c.shape[1]
    if r == 0:
        return []
    ch = c.conj().T
    for _ in range(20):
        z = c @ (rng.standard_normal(r) + 1j * rng.standard_normal(r))
        z = (z + W.adjoint(z)) / 2
        mz = np.stack([ch @ W.mul(z, c[:, b]) for b in range(r)], axis=1)
        w, v = np.linalg.eig(mz)
        w = w.real
        ws = np.sort(w)
        if r == 1 or np.min(np.diff(ws)) > COLLISION_GAP * max(1.0, np.abs(ws).max()):
            break
    else:
        raise VacuumMismatch("could not split a commutative subalgebra")
    out = []
    for a in range(r):
        p = c @ v[:, a]
        p2 = W.mul(p, p)
        lam = np.vdot(p, p2) / np.vdot(p, p)
        out.append(p / lam)
    return out


def _match(target: np.ndarray, candidates: Sequence[np.ndarray], what: str) -> int:
    dist = [np.abs(target - c).max() for c in candidates]
    k = int(np.argmin(dist))
    if dist[k] > 1e-6:
        raise VacuumMismatch(f"{what}: no match (closest distance {dist[k]:.2e})")
    return k


@dataclass(frozen=True, eq=False)
class _Side:
    A_L: np.ndarray
    A_R: np.ndarray
    center: np.ndarray
    Z_L: np.ndarray
    Z_R: np.ndarray
    Z: np.ndarray
    hyper: np.ndarray
    vacua: tuple[int, ...]          # sector index of each vacuum
    z_L: tuple[np.ndarray, ...]
    z_R: tuple[np.ndarray, ...]
    z_min: tuple[np.ndarray, ...]   # minimal projections of Z (unordered)
    hyper_min: tuple[np.ndarray, ...]


def _side(W: WeakHopfStructure) -> _Side:
    n = W.dim
    tol = 1e-9
    a_l = orth(W.pi_left_matrix, tol)
    a_r = orth(W.pi_right_matrix, tol)
    comm = np.concatenate([W.right(np.eye(n)[j]) - W.left(np.eye(n)[j]) for j in range(n)], axis=0)
    center = null_space(comm, tol)
    z_l = intersect(a_l, center, tol)
    z_r = intersect(a_r, center, tol)
    z = intersect(a_l, a_r, tol)
    hyp = intersect(z, center, tol)
    alg = W.algebra
    vac, zl = [], []
    for q in range(alg.nblocks):
        p = W.pi_left(alg.central_projection(q))
        if np.abs(p).max() > 1e-6:
            vac.append(q)
            zl.append(p)
    if len(vac) != z_l.shape[1]:
        raise VacuumMismatch(f"{len(vac)} vacuum sectors but dim Z^L = {z_l.shape[1]}")
    zr = [W.S(p) for p in zl]
    rng = make_rng(W.seed)
    zmin = minimal_projections(W, z, rng)
    hmin = minimal_projections(W, hyp, rng)
    # order hypercentral projections by the first vacuum they contain
    def first_vac(p):
        return min(m for m, q in enumerate(zl) if np.abs(W.mul(p, q) - q).max() < 1e-6)
    hmin.sort(key=first_vac)
    return _Side(a_l, a_r, center, z_l, z_r, z, hyp, tuple(vac), tuple(zl), tuple(zr), tuple(zmin), tuple(hmin))


@dataclass(frozen=True, eq=False)
class SubalgebraLattice:
    """Distinguished subalgebras of ``A`` plus the vacuum bookkeeping shared with ``Â``.

    ``z_L[μ]``, ``z_R[μ]``, ``zeta[μ]`` are indexed by ``Vac A`` (listed in
    ``vacua`` as sector indices of ``A``); ``z_hat[ν]`` by ``Vac Â`` (listed in
    ``dual_vacua`` as sector indices of ``Â``).
    """

    A_L: np.ndarray
    A_R: np.ndarray
    center: np.ndarray
    Z_L: np.ndarray
    Z_R: np.ndarray
    Z: np.ndarray
    hypercenter: np.ndarray
    vacua: tuple[int, ...]
    z_L: tuple[np.ndarray, ...]
    z_R: tuple[np.ndarray, ...]
    zeta: tuple[np.ndarray, ...]
    dual_vacua: tuple[int, ...]
    z_hat: tuple[np.ndarray, ...]
    z_H: tuple[np.ndarray, ...]
    hyper_of_vacuum: tuple[int, ...]
    hyper_of_dual_vacuum: tuple[int, ...]
    dual_A_L: np.ndarray
    dual_A_R: np.ndarray
    dual_Z: np.ndarray

    @property
    def n_vacua(self) -> int:
        return len(self.vacua)

    @property
    def n_hyper(self) -> int:
        return len(self.z_H)


_lattice_cache: dict[int, SubalgebraLattice] = {}


def distinguished_subalgebras(W: WeakHopfStructure) -> SubalgebraLattice:
    cached = W.__dict__.get("_lattice")
    if cached is not None:
        return cached
    Wh = W.dual()
    own, oth = _side(W), _side(Wh)
    one = W.unit
    # ζ_μ ∈ Ẑ with z^L_μ = 1↼ζ_μ and z^R_μ = ζ_μ⇀1
    zeta: list = [None] * len(own.vacua)
    for zt in oth.z_min:
        mu = _match(W.hit_right(one, zt), own.z_L, "z^L = 1↼ζ")
        if np.abs(W.hit(zt, one) - own.z_R[mu]).max() > 1e-6:
            raise VacuumMismatch("z^R = ζ⇀1 fails")
        zeta[mu] = zt
    # z_ν̂ ∈ Z matched to the vacua of Â the same way, seen from Â
    z_hat: list = [None] * len(oth.vacua)
    for zt in own.z_min:
        nu = _match(Wh.hit_right(Wh.unit, zt), oth.z_L, "dual z^L = 1̂↼z")
        z_hat[nu] = zt
    if any(z is None for z in zeta) or any(z is None for z in z_hat):
        raise VacuumMismatch("vacuum correspondence is not one to one")

    def hyper_of(p):
        return next(h for h, zh in enumerate(own.hyper_min) if np.abs(W.mul(zh, p) - p).max() < 1e-6)

    lat = SubalgebraLattice(
        own.A_L, own.A_R, own.center, own.Z_L, own.Z_R, own.Z, own.hyper, own.vacua, own.z_L, own.z_R,
        tuple(zeta), oth.vacua, tuple(z_hat), own.hyper_min,
        tuple(hyper_of(p) for p in own.z_L), tuple(hyper_of(p) for p in z_hat),
        oth.A_L, oth.A_R, oth.Z)
    W.__dict__["_lattice"] = lat
    return lat
