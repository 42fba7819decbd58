"""Numerical toolkit for finite-dimensional weak C*-Hopf algebras.

The submodules build on each other: ``mmalg`` (multimatrix algebras),
``wha`` (structure and axioms), ``haar`` (integrals and grouplikes),
``sectors`` (dimensions and fusion), ``markov`` (index calculus),
``weyl`` (the crossed product and its Jones projections).  ``Analysis``
runs them all lazily on one structure.
"""

from .analysis import Analysis
from .builders import (BBOPSpec, FIXTURES, build_bbop, build_group_algebra, build_groupoid_algebra, deserialize,
                       fixture, serialize)
from .errors import ResidualError, WhaxError
from .wha import WeakHopfStructure, check_axioms, distinguished_subalgebras, load_and_verify

__all__ = ["Analysis", "BBOPSpec", "FIXTURES", "build_bbop", "build_group_algebra", "build_groupoid_algebra",
           "deserialize", "fixture", "serialize", "ResidualError", "WhaxError", "WeakHopfStructure",
           "check_axioms", "distinguished_subalgebras", "load_and_verify"]

__version__ = "0.1.0"
