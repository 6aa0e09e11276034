"""Truncated three-mode Fock basis and its Z2 x Z2 sector partition.

States |na, nb, nc> with 0 <= n_i < C are ordered lexicographically with
``na`` slowest, i.e. index = na*C^2 + nb*C + nc. The two commuting parity
operators S1 = exp(i*pi*(na+nb)) and S2 = exp(i*pi*(na+nc)) split the
basis into four sectors labeled (s1, s2) with s_i in {+1, -1}; the third
parity s3 = s1*s2 is implied.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import CapacityError, DomainError

# Fixed sector ordering used for deterministic merges and tie-breaks.
SECTOR_ORDER = ((1, 1), (1, -1), (-1, 1), (-1, -1))

# Largest cutoff such that C^3 fits comfortably in an int32-indexed CSR.
_MAX_CUTOFF = 1280


@dataclass(frozen=True)
class SectorLabel:
    """Joint parity labels (s1, s2); s3 = s1*s2 is never stored."""

    s1: int
    s2: int

    def __post_init__(self):
        if self.s1 not in (1, -1) or self.s2 not in (1, -1):
            raise DomainError(f"sector labels must be +-1, got {(self.s1, self.s2)}")

    @property
    def s3(self):
        return self.s1 * self.s2

    def __str__(self):
        fmt = {1: "+", -1: "-"}
        return f"({fmt[self.s1]},{fmt[self.s2]})"


def sector_of(na, nb, nc):
    """Parity sector of a single Fock state: s1 = (-1)^(na+nb), s2 = (-1)^(na+nc)."""
    return SectorLabel(1 - 2 * ((na + nb) % 2), 1 - 2 * ((na + nc) % 2))


@dataclass(frozen=True)
class FockBasis:
    """Truncated basis with ``cutoff`` levels per mode (dim = cutoff^3)."""

    cutoff: int
    # occupations[i] = (na, nb, nc) of global index i, shape (dim, 3)
    occupations: np.ndarray = field(repr=False)
    # sector label -> sorted array of global indices
    sectors: dict = field(repr=False)

    @property
    def dim(self):
        return self.cutoff**3

    def index_of(self, na, nb, nc):
        """Global index of |na, nb, nc>."""
        C = self.cutoff
        if not (0 <= na < C and 0 <= nb < C and 0 <= nc < C):
            raise DomainError(f"occupation {(na, nb, nc)} outside cutoff {C}")
        return (na * C + nb) * C + nc

    def sector_indices(self, label: SectorLabel):
        return self.sectors[(label.s1, label.s2)]

    def sector_position(self, label: SectorLabel):
        """Inverse map: global index -> position in the sector sub-basis (-1 outside)."""
        pos = np.full(self.dim, -1, dtype=np.int64)
        idx = self.sector_indices(label)
        pos[idx] = np.arange(len(idx))
        return pos


def build_basis(cutoff: int) -> FockBasis:
    """Build the lexicographically ordered basis and its sector partition."""
    if cutoff < 1:
        raise DomainError(f"cutoff must be >= 1, got {cutoff}")
    if cutoff > _MAX_CUTOFF:
        raise CapacityError(f"cutoff {cutoff} exceeds capacity guard {_MAX_CUTOFF}")
    n = np.arange(cutoff)
    na, nb, nc = np.meshgrid(n, n, n, indexing="ij")
    occ = np.stack([na.ravel(), nb.ravel(), nc.ravel()], axis=1)
    s1 = 1 - 2 * ((occ[:, 0] + occ[:, 1]) % 2)
    s2 = 1 - 2 * ((occ[:, 0] + occ[:, 2]) % 2)
    sectors = {}
    for lab in SECTOR_ORDER:
        sectors[lab] = np.nonzero((s1 == lab[0]) & (s2 == lab[1]))[0]
    return FockBasis(cutoff=cutoff, occupations=occ, sectors=sectors)


def sector_decompose(basis: FockBasis):
    """Map SectorLabel -> ordered global-index array (already sorted)."""
    return {SectorLabel(*lab): basis.sectors[lab] for lab in SECTOR_ORDER}


def embed_sector_indices(basis_small: FockBasis, basis_large: FockBasis, label: SectorLabel):
    """Positions, inside the large sector sub-basis, of the small sector's states.

    Used to zero-pad eigenvectors when comparing two cutoffs: a vector v on
    the cutoff-C sector sub-basis maps to w[positions] = v on the cutoff-C'
    sub-basis.
    """
    if basis_large.cutoff < basis_small.cutoff:
        raise DomainError("large basis must have the larger cutoff")
    occ = basis_small.occupations[basis_small.sector_indices(label)]
    Cl = basis_large.cutoff
    glob = (occ[:, 0] * Cl + occ[:, 1]) * Cl + occ[:, 2]
    pos = basis_large.sector_position(label)[glob]
    if np.any(pos < 0):
        raise AssertionError("sector mismatch while embedding cutoffs")
    return pos
