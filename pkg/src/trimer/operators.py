"""Sparse operators on the truncated three-mode Fock space.

All matrices are real: every term of the trimer Hamiltonian

    H = omega*(n_a+n_b+n_c) + U*(a'a'aa + b'b'bb + c'c'cc) + g*x_a*x_b*x_c

has real matrix elements in the Fock basis (x_i = a_i + a_i'). Operators
are stored as CSR with a basis tag so that sector-restricted matrices
cannot be mixed up with global ones.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .exceptions import StructureError
from .hilbert import FockBasis, SectorLabel
from .model import ModelParams

# Entries below this magnitude are pruned as explicit zeros.
ZERO_TOL = 1e-15
# Cross-sector leakage above this is a structural error (round-off bound).
LEAK_TOL = 1e-12

MODES = ("a", "b", "c")
KINDS = ("annihilate", "create", "number", "quadrature_x")


@dataclass(frozen=True)
class SparseOperator:
    """Dimension-tagged real sparse matrix over a basis or sector sub-basis."""

    matrix: sp.csr_matrix
    cutoff: int
    sector: SectorLabel | None = None  # None = global basis
    hermitian: bool = False

    @property
    def dim(self):
        return self.matrix.shape[0]

    def check_hermitian(self, tol=1e-12):
        d = self.matrix - self.matrix.T
        return abs(d).max() <= tol if d.nnz else True


def _prune(m):
    m = m.tocsr()
    m.data[np.abs(m.data) < ZERO_TOL] = 0.0
    m.eliminate_zeros()
    return m


def _single_mode(cutoff, kind):
    n = np.arange(cutoff, dtype=float)
    a = sp.diags(np.sqrt(n[1:]), 1)  # <n-1|a|n> = sqrt(n)
    if kind == "annihilate":
        return a
    if kind == "create":
        return a.T
    if kind == "number":
        return sp.diags(n)
    if kind == "quadrature_x":
        return a + a.T
    raise ValueError(f"unknown kind {kind!r}")


def mode_operator(basis: FockBasis, mode: str, kind: str) -> SparseOperator:
    """Single-mode ladder/number/quadrature operator embedded in the full space."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    C = basis.cutoff
    op = _single_mode(C, kind)
    eye = sp.identity(C, format="csr")
    factors = [op if m == mode else eye for m in MODES]
    full = sp.kron(sp.kron(factors[0], factors[1]), factors[2], format="csr")
    herm = kind in ("number", "quadrature_x")
    return SparseOperator(_prune(full), C, None, hermitian=herm)


def build_hamiltonian(p: ModelParams, basis: FockBasis) -> SparseOperator:
    """Trimer Hamiltonian with effective couplings g = g0/sqrt(eta), U = U0/eta."""
    C = basis.cutoff
    n = np.arange(C, dtype=float)
    num1 = sp.diags(n)
    kerr1 = sp.diags(n * (n - 1.0))
    x1 = _single_mode(C, "quadrature_x")
    eye = sp.identity(C, format="csr")

    def embed(op, mode):
        factors = [op if m == mode else eye for m in MODES]
        return sp.kron(sp.kron(factors[0], factors[1]), factors[2])

    h = sp.csr_matrix((basis.dim, basis.dim))
    for m in MODES:
        h = h + p.omega * embed(num1, m) + p.u * embed(kerr1, m)
    # Three-body term as a triple Kronecker product of single-mode quadratures.
    h = h + p.g * sp.kron(sp.kron(x1, x1), x1)
    return SparseOperator(_prune(h), C, None, hermitian=True)


def symmetry_operator(basis: FockBasis, which: int) -> SparseOperator:
    """Diagonal parity operator S1, S2 or S3 (which in {1, 2, 3})."""
    occ = basis.occupations
    if which == 1:
        par = occ[:, 0] + occ[:, 1]
    elif which == 2:
        par = occ[:, 0] + occ[:, 2]
    elif which == 3:
        par = occ[:, 1] + occ[:, 2]
    else:
        raise ValueError("which must be 1, 2 or 3")
    diag = 1.0 - 2.0 * (par % 2)
    return SparseOperator(sp.diags(diag).tocsr(), basis.cutoff, None, hermitian=True)


def restrict_to_sector(op: SparseOperator, sector: SectorLabel, basis: FockBasis) -> SparseOperator:
    """Sub-matrix of a global operator on one sector's ordered indices.

    Raises StructureError if the operator couples different sectors (i.e.
    does not commute with S1, S2) above the round-off tolerance.
    """
    if op.sector is not None:
        raise StructureError("operator is already sector-restricted")
    idx = basis.sector_indices(sector)
    # Leakage check on stored entries: every entry must connect states of
    # equal (s1, s2) parity. O(nnz), independent of the sector picked.
    occ = basis.occupations
    s1 = (occ[:, 0] + occ[:, 1]) % 2
    s2 = (occ[:, 0] + occ[:, 2]) % 2
    coo = op.matrix.tocoo()
    cross = (s1[coo.row] != s1[coo.col]) | (s2[coo.row] != s2[coo.col])
    if np.any(cross):
        worst = np.abs(coo.data[cross]).max()
        if worst > LEAK_TOL:
            raise StructureError(
                f"operator has cross-sector entries up to {worst:.3e} "
                f"(> {LEAK_TOL}); it does not commute with S1, S2"
            )
    sub = op.matrix[idx][:, idx]
    return SparseOperator(_prune(sub), op.cutoff, sector, hermitian=op.hermitian)


def dump_triplets(op: SparseOperator, path):
    """Debug dump: one 'row col value' line per stored entry."""
    coo = op.matrix.tocoo()
    with open(path, "w") as fh:
        for r, c, v in zip(coo.row, coo.col, coo.data):
            fh.write(f"{r} {c} {v:.17g}\n")
