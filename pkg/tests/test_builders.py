import json
import warnings

import numpy as np
import pytest

from helpers import ALL
from whax import builders
from whax.errors import (AxiomViolation, BadGamma, ChecksumMismatch, FormatVersionUnsupported, NotGroup,
                         NotGroupoid)
from whax.wha import axiom_residuals


@pytest.mark.parametrize("name", ALL)
def test_round_trip_is_bit_identical(name):
    W = builders.fixture(name)
    raw = builders.serialize(W)
    again = builders.serialize(builders.deserialize(raw))
    assert raw == again


def test_dual_round_trip_verifies():
    D = builders.fixture("F2").dual()
    W = builders.deserialize(builders.serialize(D))
    assert max(axiom_residuals(W).values()) < 1e-10


@pytest.mark.parametrize("dims,n", [((1, 2), 25), ((2,), 16), ((1, 1), 4), ((1,), 1)])
def test_bbop_dimension(dims, n):
    gamma = tuple([np.sqrt(k)] * k for k in dims)
    W = builders.build_bbop(builders.BBOPSpec(dims, gamma))
    assert W.dim == n == sum(k * k for k in dims) ** 2


def test_bbop_full_gamma_matrix():
    """A non-diagonal γ block with tr γ^-2 = 1 is accepted."""
    c, s = np.cos(0.3), np.sin(0.3)
    R = np.array([[c, -s], [s, c]])
    g = R @ np.diag([np.sqrt(3), np.sqrt(1.5)]) @ R.T
    W = builders.build_bbop(builders.BBOPSpec((1, 2), ([1.0], g)))
    assert max(axiom_residuals(W).values()) < 1e-10


def test_bad_gamma():
    with pytest.raises(BadGamma):
        builders.BBOPSpec((2,), ([1.0, 1.0],))
    with pytest.raises(BadGamma):
        builders.BBOPSpec((1,), ([-1.0],))
    with pytest.raises(BadGamma):
        builders.BBOPSpec((1, 2), ([1.0],))


def test_not_group():
    with pytest.raises(NotGroup):
        builders.build_group_algebra([[0, 1], [0, 1]])
    with pytest.raises(NotGroup):
        builders.build_group_algebra([[0, 1, 2], [1, 0, 2], [2, 2, 0]])
    with pytest.raises(NotGroup):   # Latin square, no two-sided identity
        builders.build_group_algebra([[0, 1, 2], [2, 0, 1], [1, 2, 0]])


def test_not_groupoid():
    p = builders.pair_groupoid(2)
    broken = builders.GroupoidPresentation(p.objects, p.arrows, p.source, p.target,
                                           {k: v for k, v in list(p.compose.items())[1:]}, p.inverse)
    with pytest.raises(NotGroupoid):
        broken.validate()


def test_disjoint_union_has_two_hypersectors():
    from whax.wha import distinguished_subalgebras
    W = builders.fixture("Z2+Z3")
    assert W.dim == 5
    assert len(distinguished_subalgebras(W).z_H) == 2


def test_checksum_and_version():
    raw = json.loads(builders.serialize(builders.fixture("F1")))
    raw["tol"] = 1e-8
    with pytest.raises(ChecksumMismatch):
        builders.deserialize(raw)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        builders.deserialize(raw, strict=False)
    assert any("checksum" in str(w.message) for w in caught)
    raw["version"] = 99
    with pytest.raises(FormatVersionUnsupported):
        builders.deserialize(raw, strict=False)


@pytest.mark.parametrize("name", ["F1", "F2", "Z3", "C"])
def test_every_single_corruption_is_caught(name):
    """Exhaustive over the stored constants of the small fixtures."""
    rec = json.loads(builders.serialize(builders.fixture(name)))
    n = rec["dim"]
    sites = [("mult", i) for i in range(len(rec["mult"]))] + [("coproduct", i) for i in range(len(rec["coproduct"]))]
    sites += [("unit", i) for i in range(n)] + [("counit", i) for i in range(n)]
    sites += [(f, (i, j)) for f in ("antipode", "star") for i in range(n) for j in range(n)]
    for field, where in sites:
        bad = json.loads(json.dumps(rec))
        if field in ("mult", "coproduct"):
            bad[field][where][3] += 1e-3
        elif field in ("unit", "counit"):
            bad[field][where][0] += 1e-3
        else:
            mat = bad["antipode"] if field == "antipode" else bad["star"]["matrix"]
            mat[where[0]][where[1]][0] += 1e-3
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            with pytest.raises(AxiomViolation):
                builders.deserialize(bad, strict=False)
