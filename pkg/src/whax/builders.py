"""Concrete weak C*-Hopf algebras and the ``.wha.json`` file format."""

from __future__ import annotations

import hashlib
import itertools
import json
import warnings
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import BadGamma, ChecksumMismatch, FormatVersionUnsupported, NotGroup, NotGroupoid
from .mmalg import DEFAULT_SEED, DEFAULT_TOL, SparseTensor
from .wha import WeakHopfStructure, load_and_verify

__all__ = ["BBOPSpec", "GroupoidPresentation", "build_bbop", "build_groupoid_algebra", "build_group_algebra",
           "pair_groupoid", "group_presentation", "disjoint_union", "cyclic_group", "symmetric_group",
           "FIXTURES", "fixture", "serialize", "deserialize", "FORMAT_VERSION"]

FORMAT_VERSION = 1


# ----------------------------------------------------------------------------
# B ⊗ B^op

@dataclass(frozen=True, eq=False)
class BBOPSpec:
    """``B = ⊕ M_{n_μ}`` with a positive invertible ``γ ∈ B``, ``tr_μ(γ^{-2}) = 1``.

    ``gamma`` holds one entry per block: a list of diagonal entries or a full
    positive matrix.
    """

    block_dims: tuple[int, ...]
    gamma: tuple[np.ndarray, ...]
    tol: float = 1e-10

    def __post_init__(self):
        if len(self.gamma) != len(self.block_dims):
            raise BadGamma("γ", None, f"{len(self.gamma)} blocks given for {len(self.block_dims)} sectors")
        blocks = []
        for n, g in zip(self.block_dims, self.gamma):
            g = np.asarray(g, dtype=complex)
            g = np.diag(g) if g.ndim == 1 else g
            if g.shape != (n, n):
                raise BadGamma("γ", None, f"block of shape {g.shape}, expected {(n, n)}")
            if np.abs(g - g.conj().T).max() > self.tol or np.linalg.eigvalsh(g).min() <= 0:
                raise BadGamma("γ", None, "not positive invertible")
            blocks.append(g)
        object.__setattr__(self, "gamma", tuple(blocks))
        worst = max(abs(np.trace(np.linalg.inv(g @ g)) - 1) for g in blocks)
        if worst > self.tol:
            raise BadGamma("tr_μ(γ^-2) = 1", float(worst))

    @property
    def Gamma(self) -> np.ndarray:
        """``Γ_μ = tr_μ(γ²)``."""
        return np.array([np.trace(g @ g).real for g in self.gamma])

    @property
    def dim_B(self) -> int:
        return sum(n * n for n in self.block_dims)

    def gamma_matrix(self) -> np.ndarray:
        """γ as a block-diagonal ``N x N`` matrix, ``N = Σ n_μ``."""
        from scipy.linalg import block_diag
        return block_diag(*self.gamma)


def _b_units(dims: Sequence[int]) -> list[tuple[int, int, int]]:
    """Matrix units of B as (block, row, column) in the block-diagonal picture, block by block."""
    out, off = [], 0
    for mu, n in enumerate(dims):
        out.extend((mu, off + i, off + j) for i in range(n) for j in range(n))
        off += n
    return out


def build_bbop(spec: BBOPSpec, *, tol: float = DEFAULT_TOL, seed: int = DEFAULT_SEED,
               verify: bool = True) -> WeakHopfStructure:
    """The algebra ``B ⊗ B^op`` with basis ``e_α ⊗ e_β`` (α major)."""
    units = _b_units(spec.block_dims)
    d = len(units)
    N = sum(spec.block_dims)
    where = {(r, c): a for a, (_, r, c) in enumerate(units)}
    g = spec.gamma_matrix()
    gi = np.linalg.inv(g)

    def coords(x):
        return np.array([x[r, c] for _, r, c in units])

    def E(a):
        m = np.zeros((N, N), complex)
        m[units[a][1], units[a][2]] = 1
        return m

    def idx(a, b):
        return a * d + b

    n = d * d
    # B products e_a e_b
    bprod = {}
    for a, (_, r, c) in enumerate(units):
        for b, (_, r2, c2) in enumerate(units):
            if c == r2:
                bprod[a, b] = where[r, c2]
    mult = []
    for (a, a2), a3 in bprod.items():
        for (b2, b), b3 in bprod.items():
            # (e_a ⊗ e_b)(e_a2 ⊗ e_b2) = e_a e_a2 ⊗ e_b2 e_b
            mult.append((idx(a3, b3), idx(a, b), idx(a2, b2), 1.0))
    # Σ_{μij} e^{ij}γ^{-1} ⊗ γ^{-1}e^{ji}
    C = np.zeros((d, d), complex)
    for a, (_, r, c) in enumerate(units):
        C += np.outer(coords(E(a) @ gi), coords(gi @ E(where[c, r])))
    rho, sig = np.nonzero(np.abs(C) > 1e-15)
    comult = [(idx(a, r), idx(s, b), idx(a, b), C[r, s]) for a in range(d) for b in range(d)
              for r, s in zip(rho, sig)]
    g2 = g @ g
    counit = np.array([np.trace(g2 @ E(a) @ E(b)) for a in range(d) for b in range(d)])
    anti = np.zeros((n, n), complex)
    for a in range(d):
        ca = coords(g2 @ E(a) @ gi @ gi)
        for b in range(d):
            anti[b * d:(b + 1) * d, idx(a, b)] = ca
    # (x⊗y)* = γ^{-1}x*γ ⊗ γy*γ^{-1}; the untwisted star breaks Δ(x*) = Δ(x)* once γ is not
    # scalar on a block, and this is the twist that keeps the Haar element self-adjoint
    star = np.zeros((n, n), complex)
    for a, (_, r, c) in enumerate(units):
        left = coords(gi @ E(where[c, r]) @ g)
        for b, (_, r2, c2) in enumerate(units):
            star[:, idx(a, b)] = np.kron(left, coords(g @ E(where[c2, r2]) @ gi))
    one_b = coords(np.eye(N))
    unit = np.kron(one_b, one_b)
    labels = [f"e{units[a][0] + 1}[{units[a][1]}{units[a][2]}]⊗e{units[b][0] + 1}[{units[b][1]}{units[b][2]}]"
              for a in range(d) for b in range(d)]
    cent = []
    off = 0
    for n_mu in spec.block_dims:
        p = np.zeros((N, N))
        p[off:off + n_mu, off:off + n_mu] = np.eye(n_mu)
        cent.append(coords(p))
        off += n_mu
    hints = {f"({m + 1},{v + 1})": np.kron(cent[m], cent[v]) for m in range(len(cent)) for v in range(len(cent))}
    W = WeakHopfStructure(SparseTensor.from_entries((n, n, n), mult), SparseTensor.from_entries((n, n, n), comult),
                          unit, counit, anti, star, basis_labels=labels, tol=tol, seed=seed, sector_hints=hints)
    return load_and_verify(W) if verify else W


# ----------------------------------------------------------------------------
# groupoids and groups

@dataclass(frozen=True, eq=False)
class GroupoidPresentation:
    """Finite groupoid: arrows with source/target, partial composition and inverses.

    ``compose[(f, g)]`` is ``f ∘ g`` and is defined exactly when
    ``source[f] == target[g]``.
    """

    objects: tuple[str, ...]
    arrows: tuple[str, ...]
    source: tuple[int, ...]
    target: tuple[int, ...]
    compose: Mapping[tuple[int, int], int]
    inverse: tuple[int, ...]
    sector_hints: Mapping[str, np.ndarray] = field(default_factory=dict)

    def validate(self) -> None:
        A = range(len(self.arrows))
        for f in A:
            for g in A:
                ok = self.source[f] == self.target[g]
                if ok != ((f, g) in self.compose):
                    raise NotGroupoid(f"composition of {self.arrows[f]} and {self.arrows[g]} wrongly (un)defined")
                if ok:
                    h = self.compose[f, g]
                    if self.source[h] != self.source[g] or self.target[h] != self.target[f]:
                        raise NotGroupoid(f"{self.arrows[f]}∘{self.arrows[g]} has wrong endpoints")
        for f, g, k in itertools.product(A, A, A):
            if (f, g) in self.compose and (g, k) in self.compose:
                if self.compose[self.compose[f, g], k] != self.compose[f, self.compose[g, k]]:
                    raise NotGroupoid("composition is not associative")
        ids = self.identities()
        for f in A:
            if self.compose[f, ids[self.source[f]]] != f or self.compose[ids[self.target[f]], f] != f:
                raise NotGroupoid(f"identities do not act trivially on {self.arrows[f]}")
            fi = self.inverse[f]
            if (f, fi) not in self.compose or self.compose[f, fi] != ids[self.target[f]] \
                    or self.compose[fi, f] != ids[self.source[f]]:
                raise NotGroupoid(f"bad inverse of {self.arrows[f]}")

    def identities(self) -> list[int]:
        out = []
        for o in range(len(self.objects)):
            cand = [f for f in range(len(self.arrows)) if self.source[f] == o == self.target[f]
                    and all(self.compose.get((f, g), g) == g for g in range(len(self.arrows)))]
            if not cand:
                raise NotGroupoid(f"object {self.objects[o]} has no identity")
            out.append(cand[0])
        return out


def build_groupoid_algebra(pres: GroupoidPresentation, *, tol: float = DEFAULT_TOL, seed: int = DEFAULT_SEED,
                           verify: bool = True) -> WeakHopfStructure:
    """``Δ(g) = g⊗g``, ``ε(g) = 1``, ``S(g) = g* = g^{-1}``."""
    pres.validate()
    n = len(pres.arrows)
    mult = [(h, f, g, 1.0) for (f, g), h in pres.compose.items()]
    comult = [(g, g, g, 1.0) for g in range(n)]
    inv = np.zeros((n, n))
    inv[list(pres.inverse), range(n)] = 1
    unit = np.zeros(n)
    unit[pres.identities()] = 1
    W = WeakHopfStructure(SparseTensor.from_entries((n, n, n), mult), SparseTensor.from_entries((n, n, n), comult),
                          unit, np.ones(n), inv, inv, basis_labels=pres.arrows, tol=tol, seed=seed,
                          sector_hints=pres.sector_hints)
    return load_and_verify(W) if verify else W


def pair_groupoid(k: int) -> GroupoidPresentation:
    """Arrows ``g_ij : j → i`` with ``g_ij g_jl = g_il``."""
    pairs = [(i, j) for i in range(k) for j in range(k)]
    pos = {p: a for a, p in enumerate(pairs)}
    comp = {(pos[i, j], pos[j2, l]): pos[i, l] for (i, j) in pairs for (j2, l) in pairs if j == j2}
    return GroupoidPresentation(tuple(f"o{i + 1}" for i in range(k)), tuple(f"g{i + 1}{j + 1}" for i, j in pairs),
                                tuple(j for _, j in pairs), tuple(i for i, _ in pairs), comp,
                                tuple(pos[j, i] for i, j in pairs))


def group_presentation(table: Sequence[Sequence[int]], names: Sequence[str] | None = None,
                       sector_hints: Mapping[str, np.ndarray] | None = None) -> GroupoidPresentation:
    """One-object groupoid from a multiplication table ``table[a][b] = ab``."""
    t = np.asarray(table, dtype=int)
    m = len(t)
    if t.shape != (m, m) or any(sorted(row) != list(range(m)) for row in t.tolist()) \
            or any(sorted(col) != list(range(m)) for col in t.T.tolist()):
        raise NotGroup("table is not a Latin square")
    ids = [e for e in range(m) if all(t[e, b] == b and t[b, e] == b for b in range(m))]
    if len(ids) != 1:
        raise NotGroup("no identity element")
    e = ids[0]
    for a, b, c in itertools.product(range(m), repeat=3):
        if t[t[a, b], c] != t[a, t[b, c]]:
            raise NotGroup("multiplication is not associative")
    inverse = tuple(int(np.nonzero(t[a] == e)[0][0]) for a in range(m))
    comp = {(a, b): int(t[a, b]) for a in range(m) for b in range(m)}
    return GroupoidPresentation(("*",), tuple(names or [f"g{a}" for a in range(m)]), (0,) * m, (0,) * m, comp,
                                inverse, dict(sector_hints or {}))


def build_group_algebra(table: Sequence[Sequence[int]], names: Sequence[str] | None = None, *,
                        sector_hints: Mapping[str, np.ndarray] | None = None, **kw) -> WeakHopfStructure:
    return build_groupoid_algebra(group_presentation(table, names, sector_hints), **kw)


def disjoint_union(*parts: GroupoidPresentation) -> GroupoidPresentation:
    objects, arrows, src, tgt, inv, comp = [], [], [], [], [], {}
    for k, p in enumerate(parts):
        ao, oo = len(arrows), len(objects)
        objects += [f"{o}.{k}" for o in p.objects]
        arrows += [f"{a}.{k}" for a in p.arrows]
        src += [s + oo for s in p.source]
        tgt += [t + oo for t in p.target]
        inv += [i + ao for i in p.inverse]
        comp.update({(f + ao, g + ao): h + ao for (f, g), h in p.compose.items()})
    return GroupoidPresentation(tuple(objects), tuple(arrows), tuple(src), tuple(tgt), comp, tuple(inv))


def cyclic_group(m: int) -> list[list[int]]:
    return [[(a + b) % m for b in range(m)] for a in range(m)]


def symmetric_group(k: int) -> tuple[list[list[int]], list[str]]:
    perms = list(itertools.permutations(range(k)))
    pos = {p: a for a, p in enumerate(perms)}
    table = [[pos[tuple(p[q[i]] for i in range(k))] for q in perms] for p in perms]
    return table, ["".join(str(i + 1) for i in p) for p in perms]


def _character_projection(m: int, chi: Callable[[int], complex]) -> np.ndarray:
    return np.array([np.conj(chi(g)) for g in range(m)]) / m


def _cyclic_hints(m: int, names: Sequence[str]) -> dict[str, np.ndarray]:
    w = np.exp(2j * np.pi / m)
    return {names[k]: _character_projection(m, lambda g, k=k: w ** (k * g)) for k in range(m)}


# ----------------------------------------------------------------------------
# fixtures

def _f1(**kw):
    return build_group_algebra(cyclic_group(2), ["e", "g"], sector_hints=_cyclic_hints(2, ["trivial", "sign"]), **kw)


def _f2(**kw):
    return build_groupoid_algebra(pair_groupoid(2), **kw)


def _f3(**kw):
    return build_bbop(BBOPSpec((1, 2), ([1.0], [np.sqrt(2), np.sqrt(2)])), **kw)


def _f3_prime(**kw):
    return build_bbop(BBOPSpec((1, 2), ([1.0], [np.sqrt(3), np.sqrt(1.5)])), **kw)


def _z3(**kw):
    return build_group_algebra(cyclic_group(3), ["e", "c", "c2"],
                               sector_hints=_cyclic_hints(3, ["trivial", "omega", "omega2"]), **kw)


def _s3(**kw):
    table, names = symmetric_group(3)
    perms = list(itertools.permutations(range(3)))

    def sign(g):
        p = perms[g]
        return (-1) ** sum(p[i] > p[j] for i in range(3) for j in range(i + 1, 3))

    triv = _character_projection(6, lambda g: 1)
    sgn = _character_projection(6, sign)
    one = np.zeros(6)
    one[0] = 1
    return build_group_algebra(table, names, sector_hints={"trivial": triv, "sign": sgn,
                                                           "standard": one - triv - sgn}, **kw)


def _z2_z3(**kw):
    return build_groupoid_algebra(disjoint_union(group_presentation(cyclic_group(2)),
                                                 group_presentation(cyclic_group(3))), **kw)


def _trivial(**kw):
    return build_bbop(BBOPSpec((1,), ([1.0],)), **kw)


FIXTURES: dict[str, Callable[..., WeakHopfStructure]] = {
    "F1": _f1, "F2": _f2, "F3": _f3, "F3'": _f3_prime, "Z3": _z3, "S3": _s3, "Z2+Z3": _z2_z3, "C": _trivial,
}


def fixture(name: str, **kw) -> WeakHopfStructure:
    """A named test instance (see ``FIXTURES``)."""
    return FIXTURES[name](**kw)


# ----------------------------------------------------------------------------
# serialization

def _c(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _uc(p) -> complex:
    return complex(p[0], p[1])


def _from_pairs(re, im) -> np.ndarray:
    # re + 1j*im would turn a stored -0.0 imaginary part into +0.0
    out = np.empty(np.shape(re), dtype=complex)
    out.real, out.imag = re, im
    return out


def _payload(W: WeakHopfStructure) -> dict:
    mult = [[*map(int, ix), *_c(v)] for ix, v in zip(W.mult.idx, W.mult.val)]
    comult = [[*map(int, ix), *_c(v)] for ix, v in zip(W.comult.idx, W.comult.val)]
    return {
        "format": "whax",
        "version": FORMAT_VERSION,
        "dim": W.dim,
        "basis_labels": list(W.basis_labels),
        "mult": mult,
        "unit": [_c(z) for z in W.unit],
        "coproduct": comult,
        "counit": [_c(z) for z in W.counit],
        "antipode": [[_c(z) for z in row] for row in W.antipode],
        "star": {"matrix": [[_c(z) for z in row] for row in W.star], "conjugate": True},
        "tol": W.tol,
        "sectors": [{"label": k, "projection": [_c(z) for z in np.asarray(v)]} for k, v in W.sector_hints.items()],
    }


def _digest(payload: dict) -> str:
    body = json.dumps(payload, sort_keys=True, ensure_ascii=True, separators=(",", ":"))
    return hashlib.sha256(body.encode()).hexdigest()


def serialize(W: WeakHopfStructure) -> bytes:
    p = _payload(W)
    p["checksum"] = _digest(p)
    return json.dumps(p, ensure_ascii=False, indent=1).encode()


def deserialize(raw: bytes | str | Mapping, *, strict: bool = True, verify: bool = True,
                tol: float | None = None, seed: int = DEFAULT_SEED) -> WeakHopfStructure:
    """Rebuild a structure from its JSON record.

    A checksum mismatch raises :class:`ChecksumMismatch` when ``strict``,
    otherwise it only warns, so that the axiom check can name what broke.
    """
    data = dict(raw) if isinstance(raw, Mapping) else json.loads(raw)
    if data.get("format") != "whax" or data.get("version") != FORMAT_VERSION:
        raise FormatVersionUnsupported(f"format {data.get('format')!r} version {data.get('version')!r}")
    check = data.pop("checksum", None)
    if check is not None and check != _digest(data):
        if strict:
            raise ChecksumMismatch("record was modified after it was written")
        warnings.warn("checksum mismatch: record was modified after it was written", stacklevel=2)
    n = int(data["dim"])

    def tensor(rows):
        rows = np.asarray(rows, dtype=float).reshape(-1, 5)
        return SparseTensor((n, n, n), rows[:, :3].astype(np.int64), _from_pairs(rows[:, 3], rows[:, 4]))

    def vec(rows):
        a = np.asarray(rows, dtype=float).reshape(-1, 2)
        return _from_pairs(a[:, 0], a[:, 1])

    def mat(rows):
        a = np.asarray(rows, dtype=float)
        return _from_pairs(a[..., 0], a[..., 1])

    st = data["star"]
    star = mat(st["matrix"])
    if not st.get("conjugate", True):
        raise FormatVersionUnsupported("only conjugate-linear star records are supported")
    hints = {s["label"]: vec(s["projection"]) for s in data.get("sectors", [])}
    W = WeakHopfStructure(tensor(data["mult"]), tensor(data["coproduct"]), vec(data["unit"]), vec(data["counit"]),
                          mat(data["antipode"]), star, basis_labels=data.get("basis_labels"),
                          tol=float(data.get("tol", DEFAULT_TOL)) if tol is None else tol, seed=seed,
                          sector_hints=hints)
    return load_and_verify(W) if verify else W
