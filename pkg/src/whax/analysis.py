"""Lazy end-to-end pipeline for one weak C*-Hopf algebra and its dual."""

from __future__ import annotations

from functools import cached_property

from .haar import canonical_traces, haar_data, standard_metric, vacuum_weights
from .markov import boundary_dimensions, haar_ce, kac_diagnostics, markov_trace, pf_weights
from .sectors import fusion_tensor, sector_table
from .wha import WeakHopfStructure, check_axioms, distinguished_subalgebras


class Analysis:
    """Every derived object of ``W``, computed on first access and cached.

    ``dual`` is the analysis of ``Â``; the two objects point at each other,
    so quantities that need both sides (Markov trace, Weyl algebra) agree
    on a single computation of each side.
    """

    def __init__(self, W: WeakHopfStructure, *, dual: "Analysis | None" = None, verify: bool = True):
        self.W = W
        self._dual = dual
        if verify and dual is None:
            check_axioms(W)

    @property
    def dual(self) -> "Analysis":
        if self._dual is None:
            self._dual = Analysis(self.W.dual(), dual=self, verify=False)
        return self._dual

    @cached_property
    def lattice(self):
        return distinguished_subalgebras(self.W)

    @cached_property
    def haar(self):
        return haar_data(self.W)

    @cached_property
    def weights(self):
        return vacuum_weights(self.W, self.lattice)

    @cached_property
    def metric(self):
        return standard_metric(self.W, self.haar, self.weights)

    @cached_property
    def sectors(self):
        return sector_table(self.W, self.haar, self.weights, self.metric, self.lattice)

    @cached_property
    def traces(self):
        return canonical_traces(self.W, self.haar, self.sectors.d)

    @cached_property
    def fusion(self):
        return fusion_tensor(self.W, self.sectors)

    @cached_property
    def pf(self):
        """``(f, I_M per hypersector, regular dimension matrix)``."""
        return pf_weights(self.sectors)

    @cached_property
    def haar_ce(self):
        return haar_ce(self.W, self.haar, self.lattice)

    @cached_property
    def markov(self):
        return markov_trace(self.W, self.sectors, self.lattice, self.haar, self.weights, self.dual.pf[0],
                            haar=self.haar_ce, fusion=self.fusion)

    @cached_property
    def boundary(self):
        return boundary_dimensions(self.W, self.sectors, self.lattice, self.metric, self.markov,
                                   dual_dimension_matrix=self.dual.pf[2].data)

    @cached_property
    def kac(self):
        return kac_diagnostics(self.W, self.sectors, self.lattice, self.haar, self.weights, self.markov)

    # Weyl algebra level -------------------------------------------------------

    @cached_property
    def reps(self):
        from .weyl import standard_reps
        return standard_reps(self.W, self.haar.h_hat)

    @cached_property
    def weyl(self):
        from .weyl import build_weyl
        return build_weyl(self.W, self.reps)

    @cached_property
    def weyl_prime(self):
        from .weyl import build_weyl
        return build_weyl(self.W, self.reps, prime=True)

    @cached_property
    def jones(self):
        from .weyl import jones_projections
        return jones_projections(self)

    @cached_property
    def weyl_trace(self):
        from .weyl import weyl_markov_trace
        return weyl_markov_trace(self)

    @cached_property
    def reciprocity(self):
        from .weyl import frobenius_reciprocity
        return frobenius_reciprocity(self)

    @cached_property
    def pairing(self):
        from .weyl import pairing_check
        return pairing_check(self)
