"""Exception hierarchy.

Every failure that carries a numerical residual derives from
:class:`ResidualError`, so callers can report the offending quantity.
"""

from __future__ import annotations


class WhaxError(Exception):
    """Base class of all library errors."""


class ResidualError(WhaxError):
    """A verified identity failed; ``name`` says which, ``residual`` by how much."""

    def __init__(self, name: str, residual: float | None = None, detail: str = ""):
        self.name = name
        self.residual = residual
        msg = name
        if residual is not None:
            msg += f" (residual {residual:.3e})"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


# structure / input errors
class AxiomViolation(ResidualError):
    pass


class NotCStar(WhaxError):
    pass


class NotSemisimple(WhaxError):
    pass


class NotStar(ResidualError):
    pass


class Degenerate(WhaxError):
    pass


class NotPositive(WhaxError):
    pass


class DimensionMismatch(WhaxError):
    pass


class RankInstability(WhaxError):
    pass


# measure layer
class NoIntegral(ResidualError):
    pass


class NonUnique(WhaxError):
    pass


class NoGrouplikeFit(ResidualError):
    pass


class SplitInconsistent(ResidualError):
    pass


# sectors
class VacuumMismatch(WhaxError):
    pass


class FormulaMismatch(ResidualError):
    pass


class UnknownSector(WhaxError):
    pass


class NonIntegralMultiplicity(ResidualError):
    pass


class NotIntertwiner(ResidualError):
    pass


class IndicatorOutOfRange(ResidualError):
    pass


# index calculus
class NotUnitalSubalgebra(ResidualError):
    pass


class NonIntegralInclusion(ResidualError):
    pass


class BadPhi(WhaxError):
    pass


class NotTrace(ResidualError):
    pass


class IndexMismatch(ResidualError):
    pass


class PFMismatch(ResidualError):
    pass


class UniquenessViolated(ResidualError):
    pass


class NotModularInvariant(ResidualError):
    pass


class KacInconsistency(WhaxError):
    pass


# Weyl algebra
class GNSDegenerate(WhaxError):
    pass


class TLResidual(ResidualError):
    pass


class IllDefinedTrace(ResidualError):
    pass


class ReciprocityFailure(WhaxError):
    pass


class PairingResidual(ResidualError):
    pass


# builders / io
class BadGamma(ResidualError):
    pass


class NotGroupoid(WhaxError):
    pass


class NotGroup(WhaxError):
    pass


class FormatVersionUnsupported(WhaxError):
    pass


class ChecksumMismatch(WhaxError):
    pass
