"""Command-line front end: build, check, report, fuse and dualize ``.wha.json`` files.

Exit codes: 0 when every check passes, 1 on the first failing invariant,
2 on usage errors.  ``WHAX_TOL`` overrides the default axiom tolerance.
"""

from __future__ import annotations

import ast
import json
import math
import operator
import os
import sys
import warnings
from dataclasses import dataclass, field
from typing import Any, Callable

import click
import numpy as np

from . import builders
from .analysis import Analysis
from .errors import FormulaMismatch, WhaxError
from .mmalg import DEFAULT_SEED
from .sectors import fuse, module_dimension_matrix
from .wha import WeakHopfStructure, check_axioms

# ----------------------------------------------------------------------------
# numeric expressions for --gamma

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNOPS = {ast.UAdd: operator.pos, ast.USub: operator.neg}


def _eval_node(node: ast.AST) -> float:
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_node(node.left), _eval_node(node.right))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
        return _UNOPS[type(node.op)](_eval_node(node.operand))
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id == "sqrt" \
            and len(node.args) == 1 and not node.keywords:
        return math.sqrt(_eval_node(node.args[0]))
    if isinstance(node, ast.Name) and node.id.startswith("sqrt") and node.id[4:].isdigit():
        return math.sqrt(float(node.id[4:]))
    raise ValueError(f"unsupported expression {ast.dump(node)}")


def parse_number(text: str) -> float:
    """``"sqrt2"``, ``"sqrt(3/2)"``, ``"1.5"``, ``"2*sqrt3"`` and the like; nothing else is evaluated."""
    try:
        return _eval_node(ast.parse(text.strip(), mode="eval").body)
    except (SyntaxError, ValueError, ZeroDivisionError) as exc:
        raise click.BadParameter(f"cannot read {text!r} as a number ({exc})") from None


def parse_gamma(text: str) -> list[list[float]]:
    """Blocks separated by ``;``, diagonal entries by ``,``."""
    return [[parse_number(x) for x in block.split(",")] for block in text.split(";")]


def parse_dims(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise click.BadParameter(f"{text!r} is not a comma-separated list of integers") from None
    if not dims or min(dims) < 1:
        raise click.BadParameter("block sizes must be positive")
    return dims


# ----------------------------------------------------------------------------
# the check suite

@dataclass
class CheckResult:
    name: str
    passed: bool
    residual: float | None = None
    error: str | None = None


def _max_residual(obj) -> float | None:
    if isinstance(obj, dict):
        vals = [v for v in obj.values() if isinstance(v, (float, int, np.floating)) and not isinstance(v, bool)]
        return float(max(vals)) if vals else None
    res = getattr(obj, "residuals", None)
    return _max_residual(res) if isinstance(res, dict) else None


def _dimension_calculus(an: Analysis) -> dict[str, float]:
    """``d_p d_q = Σ_r N_pq^r d_r`` and the dimension-matrix rules on irreducibles."""
    tab, N = an.sectors, an.fusion
    d = tab.d
    comp = np.equal.outer(np.array(tab.right), np.array(tab.left))
    mult = float(np.abs(np.outer(d, d) * comp - N @ d).max())
    eye = np.eye(len(tab), dtype=int)
    prod = conj = 0.0
    for p in range(len(tab)):
        Dp = module_dimension_matrix(tab, eye[p]).data
        Dbar = module_dimension_matrix(tab, eye[tab.conj[p]]).data
        conj = max(conj, float(np.abs(Dbar - Dp.T).max()))
        for q in range(len(tab)):
            Dq = module_dimension_matrix(tab, eye[q]).data
            prod = max(prod, float(np.abs(module_dimension_matrix(tab, N[p, q]).data - Dp @ Dq).max()))
    res = {"d_p d_q = Σ N d_r": mult, "d of a tensor product": prod, "d of a conjugate": conj}
    for name, r in res.items():
        if r > 1e-8:
            raise FormulaMismatch(name, r)
    return res


def check_steps(an: Analysis, *, weyl: bool = True) -> list[tuple[str, Callable[[], Any]]]:
    W = an.W
    steps = [
        ("axioms", lambda: check_axioms(W)),
        ("C*-structure (Wedderburn decomposition)", lambda: W.algebra),
        ("distinguished subalgebras", lambda: an.lattice),
        ("Haar integral and canonical grouplike", lambda: an.haar),
        ("vacuum weights", lambda: an.weights),
        ("standard metric", lambda: an.metric),
        ("sector table and dimensions", lambda: an.sectors),
        ("fusion rules", lambda: _dimension_calculus(an)),
        ("Perron-Frobenius weights", lambda: an.pf),
        ("dual sector table", lambda: an.dual.sectors),
        ("Haar conditional expectation", lambda: an.haar_ce),
        ("Markov trace", lambda: an.markov),
        ("boundary dimensions", lambda: an.boundary),
        ("weak Kac diagnostics", lambda: an.kac),
    ]
    if weyl:
        steps += [
            ("standard representation", lambda: an.reps),
            ("Weyl algebra", lambda: an.weyl),
            ("Weyl algebra (commutant realization)", lambda: an.weyl_prime),
            ("Jones projections and Temperley-Lieb relations", lambda: an.jones),
            ("Markov trace on the Weyl algebra", lambda: an.weyl_trace),
            ("Frobenius reciprocity", lambda: an.reciprocity),
            ("pairing formula", lambda: an.pairing),
        ]
    return steps


def run_checks(an: Analysis, *, weyl: bool = True, stop_on_failure: bool = True) -> list[CheckResult]:
    out = []
    for name, step in check_steps(an, weyl=weyl):
        try:
            value = step()
        except WhaxError as exc:
            out.append(CheckResult(name, False, getattr(exc, "residual", None), f"{type(exc).__name__}: {exc}"))
            if stop_on_failure:
                break
            continue
        out.append(CheckResult(name, True, _max_residual(value)))
    return out


# ----------------------------------------------------------------------------
# report

def _tolist(x):
    a = np.real_if_close(np.asarray(x), tol=1e6)
    if np.iscomplexobj(a):
        return [[z.real, z.imag] for z in a.reshape(-1)]
    return a.tolist()


def _kind(tab, q) -> str:
    if tab.is_vacuum(q):
        return "vacuum"
    return "soliton" if tab.is_soliton(q) else "other"


MARKERS = {"vacuum": "∘", "soliton": "★", "other": "•"}


@dataclass
class Report:
    data: dict
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        out = dict(self.data)
        out["checks"] = [vars(c) for c in self.checks]
        out["passed"] = self.passed
        return out


def _safe(fn):
    try:
        return fn()
    except WhaxError:
        return None


def build_report(an: Analysis, *, weyl: bool = True) -> Report:
    """Run the suite, then collect whatever it produced (later sections may be missing after a failure)."""
    checks = run_checks(an, weyl=weyl)
    failed = not all(c.passed for c in checks)
    W = an.W
    data: dict[str, Any] = {"dim": W.dim, "basis_labels": list(W.basis_labels)}
    if failed and not checks[0].passed:
        return Report(data, checks)

    tab = _safe(lambda: an.sectors)
    if tab is not None:
        data["vacua"] = list(tab.vacuum_labels)
        data["hypersectors"] = [[tab.vacuum_labels[m] for m in hs] for hs in tab.hypersectors]
        data["sectors"] = [{"label": tab.labels[q], "n": tab.n[q], "left": tab.vacuum_labels[tab.left[q]],
                            "right": tab.vacuum_labels[tab.right[q]], "conjugate": tab.labels[tab.conj[q]],
                            "hypersector": tab.hyper[q], "kind": _kind(tab, q), "d": float(tab.d[q]),
                            "tau": float(tab.tau[q]), "chi": tab.chi[q]} for q in range(len(tab))]
    pf = _safe(lambda: an.pf)
    if pf is not None:
        data["dimension_matrix"] = _tolist(pf[2].data)
        data["f"] = _tolist(pf[0])
    hce = _safe(lambda: an.haar_ce)
    if hce is not None:
        data["haar_index"] = _tolist(hce.index.values)
    md = _safe(lambda: an.markov)
    if md is not None:
        data["markov_index"] = _tolist(md.I_M.values)
        data["f_hat"] = _tolist(md.f_hat)
        data["t"] = _tolist(md.t)
        data["pf_eigenvalues"] = {k: _tolist(v) for k, v in md.pf_values.items()}
    bd = _safe(lambda: an.boundary)
    if bd is not None:
        data["boundary"] = {"d_left": _tolist(bd.d_a), "d_right": _tolist(bd.d_b),
                            "d_left_right": _tolist(bd.d_LR), "d_right_left": _tolist(bd.d_RL)}
    kac = _safe(lambda: an.kac)
    if kac is not None:
        data["kac"] = {"haar_measure_tracial": kac.h_hat_tracial, "antipode_squared_identity": kac.s2_identity,
                       "counit_of_g_R": kac.eps_g_R, "weak_kac": kac.weak_kac}
    if weyl:
        w = _safe(lambda: an.weyl)
        if w is not None:
            data["weyl"] = {"dim": w.dim, "block_dims": list(w.alg.block_dims)}
        jd = _safe(lambda: an.jones)
        if jd is not None:
            data["tl_residuals"] = {k: float(v) for k, v in jd.residuals.items()}
        pr = _safe(lambda: an.pairing)
        if pr is not None:
            data["pairing_residual"] = _max_residual(pr)
    return Report(data, checks)


def _fmt(x) -> str:
    return f"{x:.6g}" if isinstance(x, float) else str(x)


def render_text(rep: Report) -> str:
    d = rep.data
    lines = [f"dim A = {d['dim']}"]
    if "sectors" in d:
        vac = d["vacua"]
        cells = {(a, b): [] for a in vac for b in vac}
        for s in d["sectors"]:
            cells[s["left"], s["right"]].append(f"{MARKERS[s['kind']]}{s['label']}")
        cols = [" ".join(cells[a, b]) or "." for a in vac for b in vac]
        width = max(max(map(len, cols)), max(map(len, vac))) + 2
        lines += ["", "sectors (rows: left vacuum, columns: right vacuum; ∘ vacuum, ★ soliton, • other)",
                  " " * width + "".join(v.ljust(width) for v in vac)]
        for a in vac:
            lines.append(a.ljust(width) + "".join((" ".join(cells[a, b]) or ".").ljust(width) for b in vac))
        lines += ["", f"{'sector':<12}{'n':>4}{'d':>12}{'tau':>12}{'chi':>5}  conjugate"]
        for s in d["sectors"]:
            lines.append(f"{s['label']:<12}{s['n']:>4}{s['d']:>12.6g}{s['tau']:>12.6g}{s['chi']:>5}  {s['conjugate']}")
    for key, title in [("dimension_matrix", "dimension matrix"), ("haar_index", "Haar index"),
                       ("markov_index", "Markov index"), ("f", "f"), ("f_hat", "f (dual)"), ("t", "t")]:
        if key in d:
            lines.append(f"{title}: {np.array2string(np.asarray(d[key]), precision=6)}")
    if "boundary" in d:
        for k, v in d["boundary"].items():
            lines.append(f"{k.replace('_', ' ')}: {np.array2string(np.asarray(v), precision=6)}")
    if "kac" in d:
        lines.append("kac: " + ", ".join(f"{k}={v}" for k, v in d["kac"].items()))
    if "weyl" in d:
        lines.append(f"Weyl algebra: dim {d['weyl']['dim']}, blocks {d['weyl']['block_dims']}")
    if "pairing_residual" in d:
        lines.append(f"pairing residual: {d['pairing_residual']:.3e}")
    lines += ["", "checks:"]
    for c in rep.checks:
        tail = f"  residual {c.residual:.3e}" if c.residual is not None else ""
        lines.append(f"  [{'pass' if c.passed else 'FAIL'}] {c.name}{tail}")
        if c.error:
            lines.append(f"         {c.error}")
    lines.append("PASS" if rep.passed else "FAIL")
    return "\n".join(lines)


# ----------------------------------------------------------------------------
# click plumbing

def _default_tol() -> float | None:
    env = os.environ.get("WHAX_TOL")
    if not env:
        return None
    try:
        return float(env)
    except ValueError:
        raise click.UsageError(f"WHAX_TOL={env!r} is not a number") from None


def _load(path: str, tol: float | None, seed: int | None) -> WeakHopfStructure:
    tol = _default_tol() if tol is None else tol
    with open(path, "rb") as fh:
        raw = fh.read()
    # a modified file should fail on the axiom it breaks, not on the checksum
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        W = builders.deserialize(raw, strict=False, verify=False, tol=tol,
                                 seed=DEFAULT_SEED if seed is None else seed)
    for w in caught:
        click.echo(f"warning: {w.message}", err=True)
    return W


def _emit(payload: bytes | str, out: str | None) -> None:
    if isinstance(payload, str):
        payload = payload.encode()
    if out is None or out == "-":
        sys.stdout.buffer.write(payload)
        if not payload.endswith(b"\n"):
            sys.stdout.buffer.write(b"\n")
        sys.stdout.flush()
    else:
        with open(out, "wb") as fh:
            fh.write(payload)


def _fail(exc: WhaxError) -> None:
    click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
    sys.exit(1)


tol_option = click.option("--tol", type=float, default=None, help="Axiom tolerance (default: WHAX_TOL or the file's).")
seed_option = click.option("--seed", type=int, default=None, help="Seed for randomized decompositions.")
out_option = click.option("-o", "--output", "out", type=click.Path(dir_okay=False), default=None,
                          help="Output file (default: stdout).")


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
def main():
    """Toolkit for finite-dimensional weak C*-Hopf algebras."""


@main.group()
def build():
    """Write a structure as a .wha.json record."""


@build.command("bbop")
@click.option("--dims", required=True, help="Block sizes of B, e.g. 1,2.")
@click.option("--gamma", required=True, help='Diagonal of γ per block, e.g. "1;sqrt2,sqrt2".')
@out_option
@tol_option
@seed_option
def build_bbop_cmd(dims, gamma, out, tol, seed):
    """The algebra B ⊗ B^op for B a direct sum of full matrix algebras."""
    dims = parse_dims(dims)
    blocks = parse_gamma(gamma)
    try:
        spec = builders.BBOPSpec(dims, tuple(blocks))
        W = builders.build_bbop(spec, **_build_kw(tol, seed))
    except WhaxError as exc:
        _fail(exc)
    _emit(builders.serialize(W), out)


@build.command("groupoid")
@click.option("--pair", "pairs", type=click.IntRange(min=1), multiple=True, help="Pair groupoid on K objects.")
@click.option("--cyclic", type=click.IntRange(min=1), multiple=True, help="Add the cyclic group of order N.")
@click.option("--symmetric", type=click.IntRange(min=1), multiple=True, help="Add the symmetric group on N letters.")
@out_option
@tol_option
@seed_option
def build_groupoid_cmd(pairs, cyclic, symmetric, out, tol, seed):
    """Groupoid algebra; repeated options give the disjoint union of the pieces."""
    parts = [builders.pair_groupoid(k) for k in pairs]
    parts += [builders.group_presentation(builders.cyclic_group(m)) for m in cyclic]
    parts += [builders.group_presentation(*builders.symmetric_group(k)) for k in symmetric]
    if not parts:
        raise click.UsageError("give at least one of --pair, --cyclic, --symmetric")
    pres = parts[0] if len(parts) == 1 else builders.disjoint_union(*parts)
    try:
        W = builders.build_groupoid_algebra(pres, **_build_kw(tol, seed))
    except WhaxError as exc:
        _fail(exc)
    _emit(builders.serialize(W), out)


@build.command("group")
@click.option("--cyclic", type=click.IntRange(min=1), default=None, help="Cyclic group of order N.")
@click.option("--symmetric", type=click.IntRange(min=1), default=None, help="Symmetric group on N letters.")
@out_option
@tol_option
@seed_option
def build_group_cmd(cyclic, symmetric, out, tol, seed):
    """Group algebra of a cyclic or symmetric group."""
    if (cyclic is None) == (symmetric is None):
        raise click.UsageError("give exactly one of --cyclic, --symmetric")
    table, names = (builders.cyclic_group(cyclic), None) if cyclic else builders.symmetric_group(symmetric)
    try:
        W = builders.build_group_algebra(table, names, **_build_kw(tol, seed))
    except WhaxError as exc:
        _fail(exc)
    _emit(builders.serialize(W), out)


@build.command("fixture")
@click.argument("name", type=click.Choice(sorted(builders.FIXTURES)))
@out_option
def build_fixture_cmd(name, out):
    """One of the named test instances."""
    _emit(builders.serialize(builders.fixture(name)), out)


def _build_kw(tol, seed) -> dict:
    kw = {}
    tol = _default_tol() if tol is None else tol
    if tol is not None:
        kw["tol"] = tol
    if seed is not None:
        kw["seed"] = seed
    return kw


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@tol_option
@seed_option
@click.option("--no-weyl", is_flag=True, help="Skip the Weyl-algebra checks.")
def check(file, tol, seed, no_weyl):
    """Run the axiom and theorem suite; exit 1 naming the first failure."""
    try:
        W = _load(file, tol, seed)
    except WhaxError as exc:
        _fail(exc)
    results = run_checks(Analysis(W, verify=False), weyl=not no_weyl)
    for c in results:
        tail = f" (residual {c.residual:.3e})" if c.residual is not None else ""
        click.echo(f"{'pass' if c.passed else 'FAIL'}  {c.name}{tail}")
    bad = [c for c in results if not c.passed]
    if bad:
        click.echo(f"first failing invariant: {bad[0].name}: {bad[0].error}", err=True)
        sys.exit(1)


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
@out_option
@tol_option
@seed_option
@click.option("--no-weyl", is_flag=True, help="Skip the Weyl-algebra section.")
def report(file, fmt, out, tol, seed, no_weyl):
    """All computed invariants with per-check residuals."""
    try:
        W = _load(file, tol, seed)
    except WhaxError as exc:
        _fail(exc)
    rep = build_report(Analysis(W, verify=False), weyl=not no_weyl)
    text = json.dumps(rep.to_json(), indent=1, ensure_ascii=False) if fmt == "json" else render_text(rep)
    _emit(text, out)
    if not rep.passed:
        sys.exit(1)


@main.command("fuse")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.argument("p")
@click.argument("q")
@tol_option
@seed_option
def fuse_cmd(file, p, q, tol, seed):
    """Multiplicities N_pq^r of the truncated tensor product p ⊠ q."""
    try:
        an = Analysis(_load(file, tol, seed))
        for label, n in fuse(an.W, an.sectors, p, q).items():
            click.echo(f"{label}: {n}")
    except WhaxError as exc:
        _fail(exc)


@main.command("dual")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@out_option
@tol_option
@seed_option
def dual_cmd(file, out, tol, seed):
    """Write the dual structure."""
    try:
        W = _load(file, tol, seed)
        check_axioms(W)
        _emit(builders.serialize(W.dual()), out)
    except WhaxError as exc:
        _fail(exc)


if __name__ == "__main__":
    main()
