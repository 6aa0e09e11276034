"""Low-lying spectra per symmetry sector with cutoff-convergence control.

The convergence protocol compares eigenvectors at cutoff C with those at
C' = C + ceil(eta) + 2 (the smaller vector zero-padded) and accepts when
every tracked state satisfies 1 - |<psi(C)|psi(C')>| < 0.005. Degenerate
states are matched across cutoffs by maximal overlap within clusters whose
internal gaps are below 1e-8.
"""

from dataclasses import dataclass, field
import math

import numpy as np
import scipy.linalg
import scipy.sparse.linalg as spla
from scipy.optimize import linear_sum_assignment

from .exceptions import ConvergenceError, SolverError
from .hilbert import SECTOR_ORDER, FockBasis, SectorLabel, build_basis, embed_sector_indices
from .model import ModelParams
from .observables import ObservableSet, observable_set
from .operators import SparseOperator, build_hamiltonian, restrict_to_sector

# Sector blocks at or below this dimension are diagonalized densely.
DENSE_LIMIT = 512
# Residual bound for accepted eigenpairs.
RESIDUAL_TOL = 1e-9
# Eigenvalue gap below which states are treated as one degenerate cluster.
DEGENERACY_GAP = 1e-8
# Overlap-deficit threshold of the cutoff-convergence protocol.
OVERLAP_DEFICIT_TOL = 0.005


@dataclass(frozen=True)
class MergedState:
    energy: float
    sector: SectorLabel
    local_index: int


@dataclass
class SpectralResult:
    """Eigenpairs of one parameter point, merged across sectors."""

    params: ModelParams
    cutoff_used: int
    # SectorLabel -> (eigenvalues ascending, eigenvectors as columns)
    per_sector: dict
    merged: list          # lowest-k MergedState, globally ascending
    convergence: list = field(default_factory=list)  # (state index, deficit)
    observables: ObservableSet | None = None

    def energy(self, j):
        return self.merged[j].energy

    def vector(self, j):
        st = self.merged[j]
        return self.per_sector[(st.sector.s1, st.sector.s2)][1][:, st.local_index]

    def global_vector(self, j, basis: FockBasis):
        """Sector eigenvector embedded in the full C^3-dimensional space."""
        st = self.merged[j]
        out = np.zeros(basis.dim)
        out[basis.sector_indices(st.sector)] = self.vector(j)
        return out


def _fix_phase(vecs):
    # Deterministic sign: largest-magnitude component made positive.
    for j in range(vecs.shape[1]):
        i = np.argmax(np.abs(vecs[:, j]))
        if vecs[i, j] < 0:
            vecs[:, j] = -vecs[:, j]
    return vecs


def lowest_eigenpairs(h_sector: SparseOperator, k: int, maxiter=None):
    """k smallest eigenvalues and vectors of a hermitian sector block."""
    m = h_sector.matrix
    dim = m.shape[0]
    if k > dim:
        raise ValueError(f"k={k} exceeds sector dimension {dim}")
    if dim <= DENSE_LIMIT or k >= dim - 1:
        vals, vecs = scipy.linalg.eigh(m.toarray())
        vals, vecs = vals[:k], vecs[:, :k]
    else:
        try:
            vals, vecs = spla.eigsh(m, k=k, which="SA", maxiter=maxiter)
        except spla.ArpackNoConvergence as exc:
            res = None
            if exc.eigenvalues is not None and len(exc.eigenvalues):
                res = float("nan")
            raise SolverError(f"eigsh did not converge: {exc}", residual=res) from exc
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
    vecs = _fix_phase(np.ascontiguousarray(vecs))
    for j in range(len(vals)):
        r = np.linalg.norm(m @ vecs[:, j] - vals[j] * vecs[:, j])
        bound = RESIDUAL_TOL * max(1.0, abs(vals[j]))
        if r > bound:
            raise SolverError(
                f"residual {r:.3e} exceeds {bound:.3e} for eigenvalue {vals[j]}",
                residual=r,
            )
    return vals, vecs


def _merge(per_sector, k):
    entries = []
    for si, lab in enumerate(SECTOR_ORDER):
        vals = per_sector[lab][0]
        for li, e in enumerate(vals):
            entries.append((e, si, li))
    entries.sort(key=lambda t: (t[0], t[1], t[2]))
    return [
        MergedState(e, SectorLabel(*SECTOR_ORDER[si]), li)
        for e, si, li in entries[:k]
    ]


def solve_point(p: ModelParams, cutoff: int, k: int, basis: FockBasis | None = None,
                k_per_sector=None) -> SpectralResult:
    """Diagonalize all four sector blocks at one cutoff and merge."""
    basis = basis if basis is not None and basis.cutoff == cutoff else build_basis(cutoff)
    h = build_hamiltonian(p, basis)
    kps = k_per_sector if k_per_sector is not None else k
    per_sector = {}
    for lab in SECTOR_ORDER:
        hs = restrict_to_sector(h, SectorLabel(*lab), basis)
        kk = min(kps, hs.dim)
        per_sector[lab] = lowest_eigenpairs(hs, kk)
    return SpectralResult(p, cutoff, per_sector, _merge(per_sector, k))


def _clusters(vals):
    """Index ranges of nearly-degenerate eigenvalue clusters."""
    out, start = [], 0
    for i in range(1, len(vals)):
        if vals[i] - vals[i - 1] > DEGENERACY_GAP:
            out.append((start, i))
            start = i
    out.append((start, len(vals)))
    return out


def _sector_deficits(vals_s, vecs_s_padded, vals_l, vecs_l):
    """Per-state overlap deficits, maximal-overlap matched inside clusters."""
    n = min(len(vals_s), len(vals_l))
    deficits = np.empty(n)
    for lo, hi in _clusters(vals_s[:n]):
        hi = min(hi, n)
        ov = np.abs(vecs_s_padded[:, lo:hi].T @ vecs_l[:, lo:hi])
        rows, cols = linear_sum_assignment(-ov)
        for r, c in zip(rows, cols):
            deficits[lo + r] = 1.0 - ov[r, c]
    return deficits


def convergence_deficits(res_small: SpectralResult, res_large: SpectralResult, k: int):
    """Overlap deficits of the lowest-k merged states between two cutoffs."""
    b_s = build_basis(res_small.cutoff_used)
    b_l = build_basis(res_large.cutoff_used)
    per_sector_def = {}
    for lab in SECTOR_ORDER:
        vals_s, vecs_s = res_small.per_sector[lab]
        vals_l, vecs_l = res_large.per_sector[lab]
        pos = embed_sector_indices(b_s, b_l, SectorLabel(*lab))
        padded = np.zeros((vecs_l.shape[0], vecs_s.shape[1]))
        padded[pos] = vecs_s
        per_sector_def[lab] = _sector_deficits(vals_s, padded, vals_l, vecs_l)
    out = []
    for j, st in enumerate(res_large.merged[:k]):
        d = per_sector_def[(st.sector.s1, st.sector.s2)]
        if st.local_index < len(d):
            out.append((j, float(d[st.local_index])))
        else:  # state not resolved at the smaller cutoff
            out.append((j, 1.0))
    return out


def next_cutoff(cutoff: int, eta: float) -> int:
    """Convergence-check cutoff C' = C + ceil(eta) + 2."""
    return cutoff + math.ceil(eta) + 2


def converged_ground_state(p: ModelParams, c_start: int, k: int,
                           max_cutoff: int = 120) -> SpectralResult:
    """Iterate the cutoff until the lowest-k states pass the overlap test.

    Returns the result at the final (larger) cutoff, with the convergence
    records of the last comparison attached.
    """
    if c_start < 2:
        raise ValueError("c_start must be >= 2")
    if k < 1:
        raise ValueError("k must be >= 1")
    cutoff = c_start
    res_small = solve_point(p, cutoff, k)
    while True:
        cutoff_big = next_cutoff(cutoff, p.eta)
        if cutoff_big > max_cutoff:
            raise ConvergenceError(
                f"cutoff {cutoff_big} exceeds ceiling {max_cutoff}",
                worst_deficit=None,
            )
        res_large = solve_point(p, cutoff_big, k)
        deficits = convergence_deficits(res_small, res_large, k)
        worst = max(d for _, d in deficits)
        if worst < OVERLAP_DEFICIT_TOL:
            res_large.convergence = deficits
            return res_large
        cutoff, res_small = cutoff_big, res_large
        if next_cutoff(cutoff, p.eta) > max_cutoff:
            raise ConvergenceError(
                f"no convergence below cutoff ceiling {max_cutoff}; "
                f"worst deficit {worst:.3e}",
                worst_deficit=worst,
            )


def _sweep_point(args):
    p, cutoff, k, with_observables, k_per_sector = args
    basis = build_basis(cutoff)
    res = solve_point(p, cutoff, k, basis=basis, k_per_sector=k_per_sector)
    if with_observables:
        gs = res.global_vector(0, basis)
        res.observables = observable_set(gs, basis, p.eta)
    return res


def spectrum_sweep(p_template: ModelParams, g0_grid, k: int,
                   cutoff: int | None = None, c_start: int = 4,
                   max_cutoff: int = 120, with_observables: bool = True,
                   workers: int = 1, k_per_sector: int | None = None):
    """One SpectralResult per g0 grid point, ascending grid required.

    If `cutoff` is None, the convergence protocol is run once at the
    largest g0 (where photon numbers, and hence the needed cutoff, are
    maximal) and the converged cutoff is reused for the whole grid.
    Results come back in grid order for any worker count.
    """
    g0_grid = list(g0_grid)
    if not g0_grid:
        raise ValueError("empty g0 grid")
    if any(b < a for a, b in zip(g0_grid, g0_grid[1:])):
        raise ValueError("g0 grid must be ascending")
    if cutoff is None:
        probe = converged_ground_state(p_template.with_g0(g0_grid[-1]), c_start, k,
                                       max_cutoff=max_cutoff)
        cutoff = probe.cutoff_used
    tasks = [(p_template.with_g0(g0), cutoff, k, with_observables, k_per_sector)
             for g0 in g0_grid]
    try:
        if workers > 1:
            from concurrent.futures import ProcessPoolExecutor
            with ProcessPoolExecutor(max_workers=workers) as pool:
                return list(pool.map(_sweep_point, tasks))
        basis = build_basis(cutoff)
        results = []
        for p, _, _, _, _ in tasks:
            try:
                res = solve_point(p, cutoff, k, basis=basis,
                                  k_per_sector=k_per_sector)
            except (SolverError, ConvergenceError) as exc:
                raise type(exc)(f"at g0={p.g0}: {exc}") from exc
            if with_observables:
                gs = res.global_vector(0, basis)
                res.observables = observable_set(gs, basis, p.eta)
            results.append(res)
        return results
    except (SolverError, ConvergenceError) as exc:
        raise type(exc)(f"sweep failed: {exc}") from exc
