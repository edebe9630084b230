"""Excitation-truncated Hilbert space for mixed hard-core/bosonic sites."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement

import numpy as np
from scipy import sparse

from ..em.materials import DomainError


@dataclass(eq=False)
class RestrictedBasis:
    """States with total excitation <= n_max, grouped by excitation number.

    Within each excitation sector the occupation vectors are ordered
    lexicographically (ascending), which keeps the enumeration stable and
    the sectors contiguous.
    """

    site_kinds: list                 # "hardcore" | "boson" per site
    n_max: int
    states: np.ndarray = field(init=False)       # (S, n_sites) int8
    index: dict = field(init=False)
    sector_slices: list = field(init=False)      # (start, stop) per n

    def __post_init__(self):
        if self.n_max < 1:
            raise DomainError("n_max must be >= 1")
        for k in self.site_kinds:
            if k not in ("hardcore", "boson"):
                raise DomainError(f"unknown site kind {k!r}")
        n_sites = len(self.site_kinds)
        hard = np.array([k == "hardcore" for k in self.site_kinds])
        all_states = []
        slices = []
        start = 0
        for n in range(self.n_max + 1):
            sector = set()
            for combo in combinations_with_replacement(range(n_sites), n):
                occ = np.zeros(n_sites, dtype=np.int8)
                for s in combo:
                    occ[s] += 1
                if np.any(occ[hard] > 1):
                    continue
                sector.add(tuple(occ))
            sector = sorted(sector)
            all_states.extend(sector)
            slices.append((start, start + len(sector)))
            start += len(sector)
        self.states = np.array(all_states, dtype=np.int8)
        self.index = {st: i for i, st in enumerate(all_states)}
        self.sector_slices = slices

    @property
    def size(self) -> int:
        return self.states.shape[0]

    @property
    def n_sites(self) -> int:
        return len(self.site_kinds)

    def annihilation(self, site: int) -> sparse.csr_matrix:
        rows, cols, vals = [], [], []
        for i, occ in enumerate(self.states):
            n = occ[site]
            if n == 0:
                continue
            tgt = list(occ)
            tgt[site] -= 1
            j = self.index[tuple(tgt)]
            rows.append(j)
            cols.append(i)
            vals.append(np.sqrt(float(n)))
        return sparse.csr_matrix((vals, (rows, cols)),
                                 shape=(self.size, self.size), dtype=complex)

    def number(self, site: int) -> sparse.csr_matrix:
        return sparse.diags(self.states[:, site].astype(float),
                            format="csr", dtype=complex)

    def vacuum_index(self) -> int:
        return self.index[tuple([0] * self.n_sites)]


def count_states(site_kinds, n_max) -> int:
    """Combinatorial state count (used as an enumeration oracle)."""
    return RestrictedBasis(site_kinds=list(site_kinds), n_max=n_max).size


def build_basis(site_kinds, n_max: int) -> RestrictedBasis:
    return RestrictedBasis(site_kinds=list(site_kinds), n_max=n_max)
