"""Multimatrix C*-algebras and the linear-algebra kernel used everywhere else.

An algebra element is a plain complex coordinate vector in some ambient
basis.  A :class:`MultiMatrixAlgebra` carries a system of matrix units
``e_q^{ij}`` expressed in that basis, so that any element can be cut into
its blocks ``X_q`` with ``x = sum_q sum_ij X_q[i, j] e_q^{ij}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import Degenerate, DimensionMismatch, NonIntegralMultiplicity, NotCStar, NotPositive, NotSemisimple, NotStar

__all__ = [
    "DEFAULT_TOL", "DEFAULT_SEED", "COLLISION_GAP", "INTEGER_TOL",
    "make_rng", "as_integer", "orth", "null_space", "intersect", "SparseTensor",
    "MultiMatrixAlgebra", "LinearFunctional", "NonNegMatrix", "PFComponent",
    "wedderburn_decompose", "decompose_star_algebra", "positive_sqrt",
    "perron_frobenius", "apply_functional",
]

DEFAULT_TOL = 1e-9
DEFAULT_SEED = 0x91A
COLLISION_GAP = 1e-6
INTEGER_TOL = 1e-6
_MAX_RETRIES = 20


def make_rng(seed: int | np.random.Generator | None = None) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(DEFAULT_SEED if seed is None else seed)


def as_integer(value: float | complex, what: str = "value", tol: float = INTEGER_TOL) -> int:
    """Round ``value`` to an integer, refusing if it is not within ``tol`` of one."""
    re = float(np.real(value))
    k = int(round(re))
    res = max(abs(re - k), abs(float(np.imag(value))))
    if res > tol:
        raise NonIntegralMultiplicity(what, res)
    return k


def _crandn(rng: np.random.Generator, *shape: int) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


# ----------------------------------------------------------------------------
# subspaces

def _svd_threshold(s: np.ndarray, tol: float) -> float:
    return tol * max(1.0, float(s[0]) if len(s) else 0.0)


def orth(a: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of the column space; singular values below ``tol * max(1, s_max)`` count as zero."""
    a = np.asarray(a, dtype=complex)
    if a.size == 0:
        return np.zeros((a.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    return u[:, : int(np.sum(s > _svd_threshold(s, tol)))]


def null_space(a: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.shape[0] == 0:
        return np.eye(a.shape[1], dtype=complex)
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    rank = int(np.sum(s > _svd_threshold(s, tol)))
    return vh[rank:].conj().T


def intersect(u: np.ndarray, v: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of span(u) ∩ span(v); both inputs orthonormal."""
    if u.shape[1] == 0 or v.shape[1] == 0:
        return np.zeros((u.shape[0], 0), dtype=complex)
    # x = u a = v b  <=>  (1 - P_v) u a = 0
    a = null_space(u - v @ (v.conj().T @ u), tol)
    return orth(u @ a, tol)


# ----------------------------------------------------------------------------
# sparse structure tensors

@dataclass(frozen=True, eq=False)
class SparseTensor:
    """COO tensor; contractions go through ``scipy.sparse`` matrix products."""

    shape: tuple[int, ...]
    idx: np.ndarray  # (nnz, ndim) int64
    val: np.ndarray  # (nnz,) complex

    @classmethod
    def from_dense(cls, a: np.ndarray, cutoff: float = 0.0) -> "SparseTensor":
        a = np.asarray(a, dtype=complex)
        nz = np.argwhere(np.abs(a) > cutoff)
        return cls(tuple(a.shape), nz.astype(np.int64), a[tuple(nz.T)])

    @classmethod
    def from_entries(cls, shape: Sequence[int], entries) -> "SparseTensor":
        """Build from an iterable of ``(i, j, k, value)`` tuples; duplicates are summed."""
        entries = list(entries)
        nd = len(shape)
        if not entries:
            return cls(tuple(shape), np.zeros((0, nd), np.int64), np.zeros(0, complex))
        idx = np.array([e[:nd] for e in entries], dtype=np.int64)
        val = np.array([e[nd] for e in entries], dtype=complex)
        return cls(tuple(shape), idx, val)._coalesce()

    def _coalesce(self) -> "SparseTensor":
        flat = np.ravel_multi_index(tuple(self.idx.T), self.shape) if len(self.val) else np.zeros(0, np.int64)
        uniq, inv = np.unique(flat, return_inverse=True)
        val = np.zeros(len(uniq), complex)
        np.add.at(val, inv, self.val)
        keep = val != 0
        idx = np.stack(np.unravel_index(uniq[keep], self.shape), axis=1) if keep.any() else np.zeros((0, len(self.shape)), np.int64)
        return SparseTensor(self.shape, idx.astype(np.int64), val[keep])

    @property
    def nnz(self) -> int:
        return len(self.val)

    def dense(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=complex)
        np.add.at(out, tuple(self.idx.T), self.val)
        return out

    def transpose(self, perm: Sequence[int]) -> "SparseTensor":
        return SparseTensor(tuple(self.shape[p] for p in perm), self.idx[:, list(perm)], self.val)

    def matrix(self, rows: Sequence[int], cols: Sequence[int]) -> sp.csr_matrix:
        rshape = [self.shape[a] for a in rows]
        cshape = [self.shape[a] for a in cols]
        nr, nc = int(np.prod(rshape)), int(np.prod(cshape))
        r = np.ravel_multi_index(tuple(self.idx[:, list(rows)].T), rshape) if rows else np.zeros(self.nnz, np.int64)
        c = np.ravel_multi_index(tuple(self.idx[:, list(cols)].T), cshape) if cols else np.zeros(self.nnz, np.int64)
        return sp.csr_matrix((self.val, (r, c)), shape=(nr, nc))

    def tensordot(self, other: "SparseTensor", axes: tuple[Sequence[int], Sequence[int]]) -> "SparseTensor":
        """Like ``numpy.tensordot``: free axes of ``self`` then free axes of ``other``."""
        a_ax, b_ax = list(axes[0]), list(axes[1])
        a_free = [i for i in range(len(self.shape)) if i not in a_ax]
        b_free = [i for i in range(len(other.shape)) if i not in b_ax]
        prod = (self.matrix(a_free, a_ax) @ other.matrix(b_ax, b_free)).tocoo()
        fa = [self.shape[i] for i in a_free]
        fb = [other.shape[i] for i in b_free]
        parts = []
        if fa:
            parts.extend(np.unravel_index(prod.row, fa))
        if fb:
            parts.extend(np.unravel_index(prod.col, fb))
        idx = np.stack(parts, axis=1).astype(np.int64) if parts else np.zeros((prod.nnz, 0), np.int64)
        return SparseTensor(tuple(fa + fb), idx, prod.data.astype(complex))


# ----------------------------------------------------------------------------
# multimatrix algebras

@dataclass(frozen=True, eq=False)
class MultiMatrixAlgebra:
    """``⊕_q M_{n_q}`` with matrix units given as columns of ``units``.

    ``inverse`` is a left inverse of ``units``; for a subalgebra of a larger
    ambient space it is only meaningful on the span of the units.
    """

    block_dims: tuple[int, ...]
    units: np.ndarray
    inverse: np.ndarray
    block_labels: tuple[str, ...] = ()
    offsets: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        offs, o = [], 0
        for n in self.block_dims:
            offs.append(o)
            o += n * n
        object.__setattr__(self, "offsets", tuple(offs))
        if not self.block_labels:
            object.__setattr__(self, "block_labels", tuple(f"q{i}" for i in range(len(self.block_dims))))
        if o != self.units.shape[1]:
            raise DimensionMismatch(f"{o} matrix units expected, got {self.units.shape[1]}")

    @classmethod
    def standard(cls, block_dims: Sequence[int], labels: Sequence[str] = ()) -> "MultiMatrixAlgebra":
        """``⊕ M_n`` in its own matrix-unit coordinates."""
        d = sum(n * n for n in block_dims)
        return cls(tuple(block_dims), np.eye(d, dtype=complex), np.eye(d, dtype=complex), tuple(labels))

    @property
    def total_dim(self) -> int:
        return self.units.shape[1]

    @property
    def ambient_dim(self) -> int:
        return self.units.shape[0]

    @property
    def nblocks(self) -> int:
        return len(self.block_dims)

    def relabel(self, labels: Sequence[str]) -> "MultiMatrixAlgebra":
        return MultiMatrixAlgebra(self.block_dims, self.units, self.inverse, tuple(labels))

    def reorder(self, order: Sequence[int]) -> "MultiMatrixAlgebra":
        """Same algebra with blocks listed in ``order``."""
        cols = np.concatenate([np.arange(self.offsets[q], self.offsets[q] + self.block_dims[q] ** 2) for q in order])
        return MultiMatrixAlgebra(tuple(self.block_dims[q] for q in order), self.units[:, cols],
                                  self.inverse[cols], tuple(self.block_labels[q] for q in order))

    def index(self, label: str) -> int:
        try:
            return self.block_labels.index(label)
        except ValueError:
            from .errors import UnknownSector
            raise UnknownSector(label) from None

    def unit_column(self, q: int, i: int, j: int) -> int:
        return self.offsets[q] + i * self.block_dims[q] + j

    def matrix_unit(self, q: int, i: int, j: int) -> np.ndarray:
        return self.units[:, self.unit_column(q, i, j)]

    def central_projection(self, q: int) -> np.ndarray:
        n = self.block_dims[q]
        return sum(self.matrix_unit(q, i, i) for i in range(n))

    def identity(self) -> np.ndarray:
        return sum(self.central_projection(q) for q in range(self.nblocks))

    def blocks(self, x: np.ndarray) -> list[np.ndarray]:
        c = self.inverse @ np.asarray(x, dtype=complex)
        return [c[o:o + n * n].reshape(n, n) for o, n in zip(self.offsets, self.block_dims)]

    def element(self, blocks: Sequence[np.ndarray]) -> np.ndarray:
        c = np.concatenate([np.asarray(b, dtype=complex).reshape(-1) for b in blocks])
        return self.units @ c

    def block_diag(self, x: np.ndarray) -> np.ndarray:
        """The faithful representation ``⊕_q D_q(x)`` as one matrix."""
        return sla.block_diag(*self.blocks(x))

    def mul(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return self.element([a @ b for a, b in zip(self.blocks(x), self.blocks(y))])

    def left_matrix(self, x: np.ndarray) -> np.ndarray:
        """Matrix of ``y ↦ x y`` on ambient coordinates."""
        blocks = [np.kron(b, np.eye(b.shape[0])) for b in self.blocks(x)]
        return self.units @ sla.block_diag(*blocks) @ self.inverse

    def right_matrix(self, x: np.ndarray) -> np.ndarray:
        """Matrix of ``y ↦ y x`` on ambient coordinates."""
        blocks = [np.kron(np.eye(b.shape[0]), b.T) for b in self.blocks(x)]
        return self.units @ sla.block_diag(*blocks) @ self.inverse

    def star(self, x: np.ndarray) -> np.ndarray:
        return self.element([b.conj().T for b in self.blocks(x)])

    def traces(self, x: np.ndarray) -> np.ndarray:
        """``tr_q(x)`` for every block (trace in the irreducible representation)."""
        return np.array([np.trace(b) for b in self.blocks(x)])

    def residual_outside(self, x: np.ndarray) -> float:
        """Distance of ``x`` from the span of the matrix units."""
        return float(np.max(np.abs(self.units @ (self.inverse @ x) - x), initial=0.0))

    def is_self_adjoint(self, x: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
        return all(np.allclose(b, b.conj().T, atol=tol * max(1.0, np.abs(b).max(initial=0))) for b in self.blocks(x))

    def is_positive(self, x: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
        if not self.is_self_adjoint(x, tol):
            return False
        return all(np.linalg.eigvalsh((b + b.conj().T) / 2).min(initial=0.0) > -tol for b in self.blocks(x))

    def apply(self, fn: Callable[[np.ndarray], np.ndarray], x: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
        """Functional calculus on a self-adjoint element, block by block."""
        out = []
        for b in self.blocks(x):
            if b.size and np.abs(b - b.conj().T).max() > tol * max(1.0, np.abs(b).max()):
                raise NotPositive("functional calculus needs a self-adjoint element")
            w, v = np.linalg.eigh((b + b.conj().T) / 2)
            out.append((v * fn(w)) @ v.conj().T)
        return self.element(out)

    def inv(self, x: np.ndarray) -> np.ndarray:
        return self.element([np.linalg.inv(b) for b in self.blocks(x)])

    def power(self, x: np.ndarray, p: float, tol: float = DEFAULT_TOL) -> np.ndarray:
        """``x**p`` for positive invertible ``x``."""
        def f(w):
            if w.min(initial=1.0) <= tol:
                raise NotPositive(f"power {p} of a non-invertible or non-positive element (min eigenvalue {w.min():.3e})")
            return w ** p
        return self.apply(f, x, tol)


def positive_sqrt(alg: MultiMatrixAlgebra, x: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """The positive square root; eigenvalues down to ``-tol`` are clipped to zero."""
    def f(w):
        scale = max(1.0, np.abs(w).max(initial=0.0))
        if w.min(initial=0.0) < -tol * scale:
            raise NotPositive(f"minimum eigenvalue {w.min():.3e}")
        return np.sqrt(np.clip(w, 0.0, None))
    return alg.apply(f, x, tol)


# ----------------------------------------------------------------------------
# Wedderburn decomposition

def _clusters(w: np.ndarray, gap: float) -> list[np.ndarray]:
    """Group sorted eigenvalues whose consecutive differences are below ``gap``."""
    order = np.argsort(w)
    groups, cur = [], [order[0]]
    for a, b in zip(order[:-1], order[1:]):
        if w[b] - w[a] > gap:
            groups.append(np.array(cur))
            cur = []
        cur.append(b)
    groups.append(np.array(cur))
    return groups


def _random_hermitian(mats: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    x = np.tensordot(coeffs, mats, axes=(0, 0))
    x = (x + x.conj().T) / 2
    return x / max(np.abs(x).max(), 1e-300)


def decompose_star_algebra(mats: np.ndarray, coords_of: Callable[[np.ndarray], np.ndarray], *,
                           gens: np.ndarray | None = None, rng=None, tol: float = DEFAULT_TOL):
    """Split a unital *-algebra of ``N x N`` matrices (closed under ``^H``) into simple blocks.

    ``mats[k]`` are the images of the basis elements, ``coords_of`` maps a
    matrix in their span back to basis coefficients, ``gens`` (default: all
    of ``mats``) generate the algebra and are used for the commutation test.

    Returns ``(dims, units)`` where ``units[q]`` has shape ``(n_q, n_q, m)``
    holding the basis coefficients of ``e_q^{ij}``.
    """
    rng = make_rng(rng)
    m, N, _ = mats.shape
    if m == 0:
        raise Degenerate("zero-dimensional algebra")
    gens = mats if gens is None else gens

    # center: coefficients c with [sum c_k mats_k, g] = 0 for every generator
    gram = np.zeros((m, m), dtype=complex)
    for g in gens:
        comm = (mats @ g - g @ mats).reshape(m, -1)
        gram += comm.conj() @ comm.T
    w, v = np.linalg.eigh(gram)
    scale = max(w.max(), 1.0)
    center = v[:, w < 1e-12 * scale]
    r = center.shape[1]
    if r == 0:
        raise NotSemisimple("trivial center: the unit is missing from the span")

    for _ in range(_MAX_RETRIES):
        z = _random_hermitian(mats, center @ _crandn(rng, r))
        w, v = np.linalg.eigh(z)
        groups = _clusters(w, COLLISION_GAP)
        if len(groups) == r:
            break
    else:
        raise NotSemisimple(f"center of dimension {r} did not split into {r} blocks")

    dims, units = [], []
    for grp in groups:
        vq = v[:, grp]
        pq = vq @ vq.conj().T
        span = np.stack([(pq @ a).reshape(-1) for a in mats], axis=1)
        sv = np.linalg.svd(span, compute_uv=False)
        dim_block = int(np.sum(sv > 1e-8 * sv[0]))
        n = as_integer(np.sqrt(dim_block), "block size")
        if n * n != dim_block:
            raise NotSemisimple(f"block of dimension {dim_block} is not a full matrix algebra")
        mult = len(grp) // n
        if mult * n != len(grp):
            raise NotSemisimple("representation multiplicity is not an integer")
        # minimal projections: eigenprojections of a compressed random self-adjoint element
        for _ in range(_MAX_RETRIES):
            x = _random_hermitian(mats, _crandn(rng, m))
            wq, uq = np.linalg.eigh(vq.conj().T @ x @ vq)
            sub = _clusters(wq, COLLISION_GAP)
            if len(sub) == n and all(len(s) == mult for s in sub):
                break
        else:
            raise NotSemisimple("could not separate minimal projections (eigenvalue collisions)")
        projs = [vq @ uq[:, s] @ uq[:, s].conj().T @ vq.conj().T for s in sub]
        # partial isometries e^{i1} from p_1 to p_i
        col = [projs[0]]
        for pi in projs[1:]:
            for _ in range(_MAX_RETRIES):
                y = np.tensordot(_crandn(rng, m), mats, axes=(0, 0))
                vi = pi @ y @ projs[0]
                c = np.real(np.trace(vi.conj().T @ vi)) / mult
                if c > 1e-6 * np.abs(y).max() ** 2:
                    break
            col.append(vi / np.sqrt(c))
        coef = np.empty((n, n, m), dtype=complex)
        for i in range(n):
            for j in range(n):
                coef[i, j] = coords_of(col[i] @ col[j].conj().T)
        dims.append(n)
        units.append(coef)
    return dims, units


def wedderburn_decompose(dim: int, mult, star: np.ndarray, unit: np.ndarray, *, rng=None,
                         tol: float = DEFAULT_TOL, labels: Sequence[str] | None = None) -> MultiMatrixAlgebra:
    """Wedderburn decomposition of an abstract *-algebra given by structure constants.

    ``mult[k, i, j]`` is the coefficient of ``e_k`` in ``e_i e_j`` (dense
    array or :class:`SparseTensor`); ``star`` is the matrix with
    ``x* = star @ conj(x)``.  Blocks are ordered by the first ambient
    coordinate carried by their central projection.
    """
    if dim == 0:
        raise Degenerate("zero-dimensional algebra")
    m = mult.dense() if isinstance(mult, SparseTensor) else np.asarray(mult, dtype=complex)
    star = np.asarray(star, dtype=complex)
    unit = np.asarray(unit, dtype=complex)
    if m.shape != (dim, dim, dim):
        raise DimensionMismatch(f"structure tensor of shape {m.shape} for dimension {dim}")
    scale = max(1.0, np.abs(m).max())

    # (e_i e_j)* = e_j* e_i*
    lhs = np.einsum("ak,kij->aij", star, m.conj())
    rhs = np.einsum("kab,aj,bi->kij", m, star, star, optimize=True)
    res = np.abs(lhs - rhs).max() / scale
    if res > tol:
        raise NotStar("antimultiplicativity of star", res)

    # regular trace form <x, y> = Tr L(x* y) must be positive definite
    left = np.transpose(m, (1, 0, 2))  # left[i] = L(e_i)
    trl = np.einsum("kjj->k", left)
    gram = np.einsum("k,kaj,ai->ij", trl, m, star, optimize=True)
    if np.abs(gram - gram.conj().T).max() > 1e-8 * max(1.0, np.abs(gram).max()):
        raise NotCStar("regular trace form is not hermitian")
    gram = (gram + gram.conj().T) / 2
    try:
        chol = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError:
        raise NotCStar("regular trace form is not positive definite") from None
    wmin = np.linalg.eigvalsh(gram).min()
    if wmin < 1e-10 * np.abs(gram).max():
        raise NotCStar(f"regular trace form nearly degenerate (min eigenvalue {wmin:.3e})")
    k = chol.conj().T  # gram = k^H k
    kinv = np.linalg.inv(k)
    mats = np.einsum("ab,kbc,cd->kad", k, left, kinv, optimize=True)
    ku = k @ unit

    def coords_of(x: np.ndarray) -> np.ndarray:
        return kinv @ (x @ ku)

    dims, units = decompose_star_algebra(mats, coords_of, rng=rng, tol=tol)
    return _assemble(dims, units, labels)


def _assemble(dims, units, labels) -> MultiMatrixAlgebra:
    def key(q):
        p = sum(units[q][i, i] for i in range(dims[q]))
        big = np.nonzero(np.abs(p) > 1e-6 * np.abs(p).max())[0]
        return (int(big[0]), dims[q])

    order = sorted(range(len(dims)), key=key)
    dims = [dims[q] for q in order]
    cols = np.concatenate([units[q].reshape(-1, units[q].shape[-1]) for q in order], axis=0).T
    inverse = np.linalg.pinv(cols) if cols.shape[0] != cols.shape[1] else np.linalg.inv(cols)
    return MultiMatrixAlgebra(tuple(dims), cols, inverse, tuple(labels) if labels else ())


def subalgebra(mul: Callable[[np.ndarray, np.ndarray], np.ndarray], star: Callable[[np.ndarray], np.ndarray],
               basis: np.ndarray, *, unit: np.ndarray | None = None, rng=None,
               tol: float = DEFAULT_TOL) -> MultiMatrixAlgebra:
    """Wedderburn decomposition of the *-subalgebra spanned by the columns of ``basis``.

    The returned matrix units live in the ambient coordinates.  Pass the
    ambient ``unit`` when the subalgebra is known to be unital.
    """
    v = orth(basis)
    d = v.shape[1]
    if d == 0:
        raise Degenerate("empty subalgebra")
    vh = v.conj().T
    m = np.empty((d, d, d), dtype=complex)
    worst = 0.0
    for i in range(d):
        for j in range(d):
            p = mul(v[:, i], v[:, j])
            c = vh @ p
            worst = max(worst, np.abs(v @ c - p).max())
            m[:, i, j] = c
    if worst > 1e-8:
        from .errors import NotUnitalSubalgebra
        raise NotUnitalSubalgebra("subspace is not closed under multiplication", worst)
    st = np.stack([vh @ star(v[:, i]) for i in range(d)], axis=1)
    one = vh @ (_unit_in_span(mul, v) if unit is None else unit)
    sub = wedderburn_decompose(d, m, st, one, rng=rng, tol=tol)
    return MultiMatrixAlgebra(sub.block_dims, v @ sub.units, sub.inverse @ vh, sub.block_labels)


def _unit_in_span(mul, v: np.ndarray) -> np.ndarray:
    """The unit of the subalgebra spanned by ``v`` (solve e x = x for all basis x)."""
    d = v.shape[1]
    rows = []
    for j in range(d):
        rows.append(np.stack([mul(v[:, i], v[:, j]) for i in range(d)], axis=1))
    a = np.concatenate(rows, axis=0)
    b = np.concatenate([v[:, j] for j in range(d)])
    c, *_ = np.linalg.lstsq(a, b, rcond=None)
    return v @ c


# ----------------------------------------------------------------------------
# functionals, non-negative matrices, Perron-Frobenius

@dataclass(frozen=True, eq=False)
class LinearFunctional:
    """``φ(x) = covector @ x``; tracial functionals also remember their trace vector."""

    covector: np.ndarray
    trace_vector: np.ndarray | None = None

    def __call__(self, x: np.ndarray) -> complex:
        return apply_functional(self, x)

    @classmethod
    def from_trace_vector(cls, alg: MultiMatrixAlgebra, t: Sequence[float]) -> "LinearFunctional":
        diag = np.concatenate([t_q * np.eye(n).reshape(-1) for t_q, n in zip(t, alg.block_dims)])
        return cls(diag @ alg.inverse, np.asarray(t, dtype=float))


def apply_functional(phi: LinearFunctional, x: np.ndarray) -> complex:
    x = np.asarray(x)
    if x.shape[-1] != phi.covector.shape[0]:
        raise DimensionMismatch(f"functional on dimension {phi.covector.shape[0]} applied to {x.shape[-1]}")
    return complex(phi.covector @ x)


@dataclass(frozen=True, eq=False)
class NonNegMatrix:
    data: np.ndarray
    row_labels: tuple = ()
    col_labels: tuple = ()

    def __post_init__(self):
        a = np.asarray(self.data, dtype=float)
        if (a < -1e-12).any():
            raise ValueError("negative entry in a non-negative matrix")
        object.__setattr__(self, "data", np.clip(a, 0.0, None))

    def components(self) -> list[np.ndarray]:
        """Irreducible components: strongly connected classes of the support graph (square input)."""
        n = self.data.shape[0]
        k, lab = connected_components(sp.csr_matrix(self.data > 0), directed=True, connection="strong")
        return [np.nonzero(lab == c)[0] for c in range(k)] if n else []


@dataclass(frozen=True)
class PFComponent:
    indices: np.ndarray
    eigenvalue: float
    vector: np.ndarray  # positive, summing to one
    zero: bool = False


def perron_frobenius(m: NonNegMatrix | np.ndarray) -> list[PFComponent]:
    """Spectral radius and positive eigenvector of each irreducible component."""
    m = m if isinstance(m, NonNegMatrix) else NonNegMatrix(m)
    a = m.data
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch("Perron-Frobenius needs a square matrix")
    out = []
    for idx in m.components():
        sub = a[np.ix_(idx, idx)]
        if not sub.any():
            out.append(PFComponent(idx, 0.0, np.full(len(idx), 1.0 / len(idx)), zero=True))
            continue
        w, v = np.linalg.eig(sub)
        top = int(np.argmax(w.real))
        vec = np.real(v[:, top])
        vec = vec / vec.sum()
        if (vec <= 0).any():
            raise ValueError("Perron-Frobenius vector is not strictly positive")
        out.append(PFComponent(idx, float(w[top].real), vec))
    return out
