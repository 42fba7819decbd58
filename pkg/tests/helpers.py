"""Shared caches and independent oracles for the test suite.

Oracles here never call into the code path they check: the B ⊗ B^op forms
are assembled from plain numpy matrices, group data from permutations and
characters.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

from whax import Analysis, fixture

ALL = ["F1", "F2", "F3", "F3'", "Z3", "S3", "Z2+Z3", "C"]


@lru_cache(maxsize=None)
def analysis(name: str) -> Analysis:
    return Analysis(fixture(name))


# ----------------------------------------------------------------------------
# B ⊗ B^op

class BBOP:
    """``B = ⊕ M_{n_μ}`` as block-diagonal ``N x N`` matrices, ``A = B ⊗ B^op`` as pairs."""

    def __init__(self, dims, gamma_diag):
        self.dims = tuple(dims)
        self.N = sum(dims)
        self.offsets = np.cumsum((0,) + self.dims)[:-1]
        self.units = [(mu, o + i, o + j) for mu, (o, n) in enumerate(zip(self.offsets, self.dims))
                      for i in range(n) for j in range(n)]
        self.gamma = np.diag(np.concatenate([np.asarray(g, float) for g in gamma_diag]))
        self.e = [self.block_proj(mu) for mu in range(len(dims))]
        self.Gamma = np.array([np.trace(e @ self.gamma @ self.gamma) for e in self.e])
        self.dim_B = sum(n * n for n in dims)

    def block_proj(self, mu):
        p = np.zeros((self.N, self.N))
        o, n = self.offsets[mu], self.dims[mu]
        p[o:o + n, o:o + n] = np.eye(n)
        return p

    def unit(self, mu, i, j):
        m = np.zeros((self.N, self.N))
        o = self.offsets[mu]
        m[o + i, o + j] = 1
        return m

    def central(self, values):
        return sum(v * e for v, e in zip(values, self.e))

    def coords(self, *pairs):
        """Coordinates of ``Σ x_k ⊗ y_k``; basis ``e_α ⊗ e_β`` with α major."""
        out = 0
        for x, y in pairs:
            cx = np.array([x[r, c] for _, r, c in self.units])
            cy = np.array([y[r, c] for _, r, c in self.units])
            out = out + np.outer(cx, cy).reshape(-1)
        return out

    # closed forms
    def haar_integral(self):
        g = self.gamma
        pairs = [(self.unit(mu, i, j) @ g / self.Gamma[mu], g @ self.unit(mu, j, i))
                 for mu, n in enumerate(self.dims) for i in range(n) for j in range(n)]
        return self.coords(*pairs)

    def grouplike(self):
        G = self.central(self.Gamma)
        g2 = self.gamma @ self.gamma
        return self.coords((np.linalg.inv(np.sqrt(G)) @ g2, np.linalg.inv(g2) @ np.sqrt(G)))

    def grouplike_left(self):
        G = self.central(self.Gamma)
        c = self.Gamma.sum() ** -0.5
        return self.coords((c * np.linalg.inv(np.sqrt(G)) @ self.gamma @ self.gamma, np.eye(self.N)))

    def grouplike_right(self):
        G = self.central(self.Gamma)
        c = self.Gamma.sum() ** -0.5
        return self.coords((np.eye(self.N), c * self.gamma @ self.gamma @ np.linalg.inv(np.sqrt(G))))

    def standard_metric(self):
        g2 = self.gamma @ self.gamma
        return self.coords((g2, np.linalg.inv(g2)))

    def haar_measure(self, coords):
        """``ĥ(x ⊗ y) = tr(γ²x) tr(γ²y) / tr γ²`` on basis coordinates."""
        g2 = self.gamma @ self.gamma
        w = np.array([g2[c, r] for _, r, c in self.units])   # tr(γ² e_rc) = γ²_cr
        return (np.outer(w, w).reshape(-1) @ coords) / np.trace(g2)

    def sector_of(self, label):
        mu, nu = (int(s) - 1 for s in label.strip("()").split(","))
        return mu, nu

    def trace_vectors(self, labels):
        """``τ``, ``τ_S``, ``τ_M`` trace vectors in the order of ``labels``."""
        n = np.array(self.dims, float)
        G = self.Gamma
        out = {"tau": [], "tau_S": [], "tau_M": []}
        for lab in labels:
            mu, nu = self.sector_of(lab)
            out["tau"].append(np.sqrt(G[mu] * G[nu]))
            out["tau_S"].append(1.0)
            out["tau_M"].append(n[mu] * n[nu] / self.dim_B ** 2)
        return {k: np.array(v) for k, v in out.items()}


F3_ORACLE = BBOP((1, 2), ([1.0], [np.sqrt(2), np.sqrt(2)]))
F3P_ORACLE = BBOP((1, 2), ([1.0], [np.sqrt(3), np.sqrt(1.5)]))


# ----------------------------------------------------------------------------
# groups

def s3_characters():
    """Character table of S_3 over the permutation order used by ``symmetric_group(3)``."""
    perms = list(itertools.permutations(range(3)))
    fixed = np.array([sum(p[i] == i for i in range(3)) for p in perms])
    sign = np.array([(-1) ** sum(p[i] > p[j] for i in range(3) for j in range(i + 1, 3)) for p in perms])
    return {"trivial": np.ones(6), "sign": sign.astype(float), "standard": fixed - 1.0}


def character_fusion(chars: dict[str, np.ndarray]) -> dict[tuple[str, str], dict[str, int]]:
    """``N_pq^r = <χ_p χ_q, χ_r>`` for real characters."""
    m = len(next(iter(chars.values())))
    out = {}
    for p, q in itertools.product(chars, repeat=2):
        prod = chars[p] * chars[q]
        out[p, q] = {r: int(round(prod @ chars[r] / m)) for r in chars if round(prod @ chars[r] / m)}
    return out


def group_haar(m: int) -> np.ndarray:
    return np.full(m, 1.0 / m)
