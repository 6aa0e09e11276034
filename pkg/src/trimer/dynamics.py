"""Driven-dissipative dynamics: Liouvillian oracle and quantum trajectories.

Small cutoffs get a vectorized Lindblad superoperator (row-major vec
convention, vec(A rho B) = (A kron B^T) vec(rho)) whose null vector is the
steady state. Larger problems use a first-order quantum-jump unraveling:
piecewise non-Hermitian evolution under H_eff = H - i*(kappa/2)*sum(n_j)
(advanced by an exact or split-operator segment propagator; see OpsBundle),
interrupted by jumps through a, b or c with per-step probability
kappa*dt*<n_j>, capped at 0.1 by adaptive step halving. Ensembles are
seeded deterministically from (master_seed, trajectory index) and reduce
identically for any worker count.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import os

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .exceptions import CapacityError, SteadyStateDegenerateError, TruncationError
from .hilbert import FockBasis, build_basis
from .model import ModelParams
from .operators import build_hamiltonian, mode_operator

# Hard guards for superoperator work.
SPARSE_LIOUVILLIAN_MAX_CUTOFF = 6
DENSE_LIOUVILLIAN_MAX_CUTOFF = 4
# Per-step jump probability cap; steps are halved until all channels obey it.
JUMP_PROB_CAP = 0.1
NORM_FLOOR = 1e-12
# Below this Hilbert dimension, dense matvecs beat CSR for the tight loop.
# The Hamiltonian has ~10 stored entries per row, so CSR wins early.
DENSE_STATE_LIMIT = 128
# Below this dimension the segment propagator exp(-i*H_eff*dt) is built
# densely (one expm per distinct dt); above it the split-operator form is
# cheaper in both time and memory.
DENSE_PROPAGATOR_LIMIT = 300

OBS_NAMES = ("n_a", "n_b", "n_c", "nn_a", "nn_b", "nn_c",
             "x2_a", "x2_b", "x2_c", "xabc")

CHECKPOINT_VERSION = 1


def liouvillian(p: ModelParams, basis: FockBasis, dense=False):
    """Vectorized Lindblad generator with three single-photon loss channels."""
    if basis.cutoff > SPARSE_LIOUVILLIAN_MAX_CUTOFF:
        raise CapacityError(
            f"cutoff {basis.cutoff} exceeds superoperator guard "
            f"{SPARSE_LIOUVILLIAN_MAX_CUTOFF}"
        )
    if dense and basis.cutoff > DENSE_LIOUVILLIAN_MAX_CUTOFF:
        raise CapacityError(
            f"cutoff {basis.cutoff} exceeds dense superoperator guard "
            f"{DENSE_LIOUVILLIAN_MAX_CUTOFF}"
        )
    h = build_hamiltonian(p, basis).matrix
    eye = sp.identity(basis.dim, format="csr")
    lio = -1j * (sp.kron(h, eye) - sp.kron(eye, h.T))
    for mode in ("a", "b", "c"):
        a = mode_operator(basis, mode, "annihilate").matrix
        n = (a.T @ a).tocsr()
        lio = lio + p.kappa * (
            sp.kron(a, a) - 0.5 * (sp.kron(n, eye) + sp.kron(eye, n.T))
        )
    lio = lio.tocsr()
    return lio.toarray() if dense else lio


def _trace_indices(dim):
    return np.arange(dim) * dim + np.arange(dim)


def steady_state_direct(lio, check_multiplicity=True, degeneracy_tol=1e-10,
                        basis: FockBasis | None = None):
    """Steady density matrix from the Liouvillian null space.

    Solves L x = 0 with one row replaced by the trace functional
    (trace(rho) = 1). With `check_multiplicity`, the two slowest
    Liouvillian eigenvalues are inspected; a second one at zero raises
    SteadyStateDegenerateError carrying a null-space basis.

    When `basis` is given, the solve is restricted to the parity-diagonal
    subspace: the loss channels realize S1, S2 only as weak symmetries, so
    the (unique) steady state satisfies S rho S = rho and its matrix
    elements vanish between different sectors. This cuts the unknown count
    by 4x and the factorization cost by far more; C = 6 is intractable
    without it.
    """
    dim_l = lio.shape[0]
    dim = int(round(np.sqrt(dim_l)))
    lio = sp.csr_matrix(lio)
    trace_cols = _trace_indices(dim)
    if basis is not None:
        occ = basis.occupations
        s1 = (occ[:, 0] + occ[:, 1]) % 2
        s2 = (occ[:, 0] + occ[:, 2]) % 2
        sec = 2 * s1 + s2
        keep = np.nonzero((sec[:, None] == sec[None, :]).ravel())[0]
        lio_solve = lio[keep][:, keep].tocsr()
        trace_pos = np.searchsorted(keep, trace_cols)
        rhs_dim = len(keep)
    else:
        keep = None
        lio_solve = lio
        trace_pos = trace_cols
        rhs_dim = dim_l
    lil = sp.lil_matrix(lio_solve)
    lil[0] = 0.0
    for i in trace_pos:
        lil[0, i] = 1.0
    rhs = np.zeros(rhs_dim, dtype=complex)
    rhs[0] = 1.0
    x = spla.spsolve(lil.tocsc(), rhs)
    if keep is not None:
        full = np.zeros(dim_l, dtype=complex)
        full[keep] = x
        x = full
    rho = x.reshape(dim, dim)
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real

    if check_multiplicity:
        lio_csc = sp.csc_matrix(lio_solve)
        # sigma slightly off zero: L itself is exactly singular and would
        # defeat the shift-invert factorization
        vals, vecs = spla.eigs(lio_csc, k=2, sigma=-1e-9, which="LM")
        order = np.argsort(np.abs(vals))
        vals, vecs = vals[order], vecs[:, order]
        if abs(vals[1]) < degeneracy_tol:
            states = []
            for j in range(2):
                v = vecs[:, j]
                if keep is not None:
                    full = np.zeros(dim_l, dtype=complex)
                    full[keep] = v
                    v = full
                states.append(v.reshape(dim, dim))
            raise SteadyStateDegenerateError(
                f"Liouvillian null space is degenerate: |lambda_1| = {abs(vals[1]):.3e}",
                states=states,
            )

    herm_dev = np.abs(rho - rho.conj().T).max()
    if herm_dev > 1e-10:
        raise AssertionError(f"steady state not hermitian: {herm_dev:.3e}")
    ev = np.linalg.eigvalsh(rho)
    if ev.min() < -1e-8:
        raise AssertionError(f"steady state not positive: min eigenvalue {ev.min():.3e}")
    return rho


def evolve_density_matrix(lio, rho0, t):
    """exp(L t) applied to rho0; oracle for steady-state cross-checks."""
    v = rho0.reshape(-1).astype(complex)
    out = spla.expm_multiply(sp.csr_matrix(lio) * t, v)
    return out.reshape(rho0.shape)


def density_matrix_observables(rho, basis: FockBasis):
    """Trace-based moments matching the trajectory observable layout."""
    occ = basis.occupations
    pop = np.real(np.diag(rho))
    out = {}
    for i, m in enumerate(("a", "b", "c")):
        n = occ[:, i].astype(float)
        out[f"n_{m}"] = float(pop @ n)
        out[f"nn_{m}"] = float(pop @ (n * (n - 1.0)))
    xs = {m: mode_operator(basis, m, "quadrature_x").matrix for m in ("a", "b", "c")}
    for m in ("a", "b", "c"):
        out[f"x2_{m}"] = float(np.real(np.trace(rho @ (xs[m] @ xs[m]).toarray())))
    xabc = (xs["a"] @ xs["b"] @ xs["c"]).toarray()
    out["xabc"] = float(np.real(np.trace(rho @ xabc)))
    return out


class OpsBundle:
    """Precomputed matrices shared by every trajectory of one ensemble.

    The deterministic (no-jump) segment between candidate jumps is advanced
    by a Strang split of H_eff = D + g*X with
    D = omega*N + U*Kerr - i*(kappa/2)*N (diagonal) and X = x_a x_b x_c.
    Both factors exponentiate exactly on the truncated space: D is diagonal
    and X is diagonalized by the single-mode quadrature eigenbasis, so the
    step is unconditionally stable. An explicit Euler step is not an option
    here: the purely imaginary spectrum makes it amplify the high-energy
    truncation edge faster than the loss terms damp it.
    """

    def __init__(self, p: ModelParams, basis: FockBasis):
        self.params = p
        self.basis = basis
        occ = basis.occupations.astype(float)
        self.n_diag = [occ[:, i] for i in range(3)]
        self.nn_diag = [occ[:, i] * (occ[:, i] - 1.0) for i in range(3)]
        n_tot = occ.sum(axis=1)
        # diagonal Hamiltonian part plus anti-hermitian loss
        self.d_diag = (p.omega * n_tot + p.u * sum(self.nn_diag)
                       - 0.5j * p.kappa * n_tot)
        # single-mode quadrature eigenbasis; exact within the truncation
        x1 = np.diag(np.sqrt(np.arange(1, basis.cutoff)), 1)
        x1 = x1 + x1.T
        self.x_vals, self.x_vecs = np.linalg.eigh(x1)
        self.jump_ops = [mode_operator(basis, m, "annihilate").matrix
                         for m in ("a", "b", "c")]
        xs = [mode_operator(basis, m, "quadrature_x").matrix for m in ("a", "b", "c")]
        x2 = [(x @ x).tocsr() for x in xs]
        xabc = (xs[0] @ xs[1] @ xs[2]).tocsr()
        if basis.dim <= DENSE_STATE_LIMIT:
            self.x2 = [m.toarray() for m in x2]
            self.xabc = xabc.toarray()
        else:
            self.x2 = x2
            self.xabc = xabc
        self.h_eff = None
        if basis.dim <= DENSE_PROPAGATOR_LIMIT:
            h = build_hamiltonian(p, basis).matrix.astype(complex)
            self.h_eff = (h - 0.5j * p.kappa * sp.diags(n_tot)).toarray()
        self._prop_cache = {}

    def _propagator(self, dt):
        cached = self._prop_cache.get(dt)
        if cached is None:
            if self.h_eff is not None:
                # exact segment propagator, one matvec per step
                cached = scipy.linalg.expm(-1j * dt * self.h_eff)
            else:
                half = np.exp(-0.5j * dt * self.d_diag)
                lam = self.x_vals
                phase_x = np.exp(
                    -1j * dt * self.params.g
                    * lam[:, None, None] * lam[None, :, None] * lam[None, None, :]
                )
                cached = (half, phase_x)
            self._prop_cache[dt] = cached
        return cached

    def drift(self, psi, dt):
        """exp(-i*H_eff*dt) psi, exact or with O(dt^3) splitting error."""
        prop = self._propagator(dt)
        if self.h_eff is not None:
            return prop @ psi
        half, phase_x = prop
        C = self.basis.cutoff
        w = self.x_vecs
        t = (half * psi).reshape(C, C, C)
        # rotate every mode into the x eigenbasis, phase, rotate back
        t = np.einsum("ai,bj,ck,ijk->abc", w.T, w.T, w.T, t, optimize=True)
        t *= phase_x
        t = np.einsum("ia,jb,kc,abc->ijk", w, w, w, t, optimize=True)
        return half * t.reshape(-1)

    def observables(self, psi):
        w = np.abs(psi) ** 2
        row = np.empty(len(OBS_NAMES))
        for i in range(3):
            row[i] = w @ self.n_diag[i]
            row[3 + i] = w @ self.nn_diag[i]
            row[6 + i] = np.real(np.vdot(psi, self.x2[i] @ psi))
        row[9] = np.real(np.vdot(psi, self.xabc @ psi))
        return row


@dataclass
class TrajectoryRecord:
    seed: int
    times: np.ndarray
    observables: np.ndarray      # shape (len(times), len(OBS_NAMES))
    jumps: list = field(default_factory=list)   # (time, channel)


def _jump_probs(ops: OpsBundle, psi, dt, kappa):
    w = np.abs(psi) ** 2
    return np.array([kappa * dt * (w @ nd) for nd in ops.n_diag])


def _advance(ops: OpsBundle, psi, dt, kappa, rng, t, jumps):
    """One step of size dt, recursively halved to respect the jump cap."""
    probs = _jump_probs(ops, psi, dt, kappa)
    if probs.max() > JUMP_PROB_CAP:
        psi = _advance(ops, psi, 0.5 * dt, kappa, rng, t, jumps)
        return _advance(ops, psi, 0.5 * dt, kappa, rng, t + 0.5 * dt, jumps)
    r = rng.random()
    total = probs.sum()
    if r < total:
        edges = np.cumsum(probs)
        ch = int(np.searchsorted(edges, r, side="right"))
        psi = ops.jump_ops[ch] @ psi
        nrm = np.linalg.norm(psi)
        if nrm < NORM_FLOOR:
            raise TruncationError(
                "state norm collapsed after jump; increase the Fock cutoff"
            )
        jumps.append((t, "abc"[ch]))
        return psi / nrm
    psi = ops.drift(psi, dt)
    nrm = np.linalg.norm(psi)
    if nrm < NORM_FLOOR:
        raise TruncationError("state norm collapsed; increase the Fock cutoff")
    return psi / nrm


def run_trajectory(p: ModelParams, basis: FockBasis, seed, t_max, dt,
                   sample_every=None, initial_state=None,
                   ops: OpsBundle | None = None) -> TrajectoryRecord:
    """One quantum trajectory; deterministic given (seed, dt, t_max)."""
    if ops is None:
        ops = OpsBundle(p, basis)
    n_steps = int(round(t_max / dt))
    if sample_every is None:
        sample_every = max(1, n_steps // 200)
    rng = np.random.default_rng(seed)
    if initial_state is None:
        psi = np.zeros(basis.dim, dtype=complex)
        psi[0] = 1.0  # vacuum
    else:
        psi = initial_state.astype(complex)
        psi = psi / np.linalg.norm(psi)
    jumps = []
    times, rows = [0.0], [ops.observables(psi)]
    for step in range(1, n_steps + 1):
        t = (step - 1) * dt
        psi = _advance(ops, psi, dt, p.kappa, rng, t, jumps)
        if step % sample_every == 0 or step == n_steps:
            times.append(step * dt)
            rows.append(ops.observables(psi))
    seed_val = seed if isinstance(seed, (int, np.integer)) else -1
    return TrajectoryRecord(int(seed_val), np.array(times), np.array(rows), jumps)


@dataclass
class EnsembleStats:
    n_traj: int
    times: np.ndarray
    mean_series: np.ndarray        # (n_times, n_obs) ensemble means
    stderr_series: np.ndarray
    window_mask: np.ndarray        # samples belonging to the steady window
    window_mean: dict              # obs name -> mean over window and ensemble
    window_stderr: dict
    n_mean: float                  # mode-averaged steady <n>
    n_stderr: float
    n_rescaled: float
    g2: tuple                      # per-mode, from ratios of ensemble means
    g2_stderr: tuple
    coskewness: float
    coskewness_stderr: float
    drift: float                   # relative first/second half-window change
    converged: bool


def _trajectory_batch(args):
    p, cutoff, seeds, t_max, dt, sample_every, indices, initial_state = args
    basis = build_basis(cutoff)
    ops = OpsBundle(p, basis)
    out = []
    for j, s in zip(indices, seeds):
        rec = run_trajectory(p, basis, s, t_max, dt, sample_every,
                             initial_state=initial_state, ops=ops)
        out.append((j, rec.times, rec.observables))
    return out


def _jackknife_stderr(values):
    n = len(values)
    values = np.asarray(values)
    return float(np.sqrt((n - 1) / n * np.sum((values - values.mean()) ** 2)))


def _ratio_stats(window_means):
    """Steady-state ratios from ensemble-averaged moments plus jackknife errors.

    `window_means` has shape (n_traj, n_obs): per-trajectory means over the
    steady window. Ratios (g2, coskewness) are formed from ensemble means,
    never per trajectory.
    """
    def ratios(mu):
        g2 = tuple(
            mu[3 + i] / mu[i] ** 2 if mu[i] > 0 else float("nan") for i in range(3)
        )
        den = mu[6] * mu[7] * mu[8]
        cosk = mu[9] / np.sqrt(den) if den > 0 else float("nan")
        return g2, cosk

    n = window_means.shape[0]
    mu = window_means.mean(axis=0)
    g2, cosk = ratios(mu)
    g2_samples, cosk_samples = [], []
    for i in range(n):
        mu_i = (mu * n - window_means[i]) / (n - 1)
        g2_i, cosk_i = ratios(mu_i)
        g2_samples.append(g2_i)
        cosk_samples.append(cosk_i)
    g2_err = tuple(_jackknife_stderr([s[i] for s in g2_samples]) for i in range(3))
    cosk_err = _jackknife_stderr(cosk_samples)
    return g2, g2_err, cosk, cosk_err


def ensemble_run(p: ModelParams, basis: FockBasis, n_traj, t_max, dt,
                 master_seed, workers=None, sample_every=None,
                 steady_window_frac=0.25, checkpoint_path=None,
                 initial_state=None) -> EnsembleStats:
    """Trajectory ensemble with deterministic seeding and reduction.

    Trajectory j always receives the j-th child of SeedSequence(master_seed),
    and results are reduced in index order, so the output is identical for
    any worker count.
    """
    if n_traj < 2:
        raise ValueError("n_traj must be >= 2")
    seeds = np.random.SeedSequence(master_seed).spawn(n_traj)
    if workers is None:
        workers = int(os.environ.get("TRIMER_THREADS", "0")) or (os.cpu_count() or 1)

    done = {}
    if checkpoint_path and os.path.exists(checkpoint_path):
        done = _load_checkpoint(checkpoint_path, p, n_traj)

    pending = [j for j in range(n_traj) if j not in done]
    chunk = max(1, len(pending) // (workers * 4) if workers > 1 else len(pending))
    batches = [
        (p, basis.cutoff, [seeds[j] for j in idxs], t_max, dt, sample_every, idxs,
         initial_state)
        for idxs in (pending[i:i + chunk] for i in range(0, len(pending), chunk))
        if idxs
    ]
    if workers > 1 and len(batches) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for out in pool.map(_trajectory_batch, batches):
                for j, times, obs in out:
                    done[j] = (times, obs)
                if checkpoint_path:
                    _save_checkpoint(checkpoint_path, p, n_traj, done)
    else:
        for b in batches:
            for j, times, obs in _trajectory_batch(b):
                done[j] = (times, obs)
            if checkpoint_path:
                _save_checkpoint(checkpoint_path, p, n_traj, done)

    times = done[0][0]
    stack = np.stack([done[j][1] for j in range(n_traj)])  # (traj, time, obs)
    mean_series = stack.mean(axis=0)
    stderr_series = stack.std(axis=0, ddof=1) / np.sqrt(n_traj)

    window_mask = times >= (1.0 - steady_window_frac) * t_max
    window_means = stack[:, window_mask, :].mean(axis=1)   # (traj, obs)
    mu = window_means.mean(axis=0)
    err = window_means.std(axis=0, ddof=1) / np.sqrt(n_traj)
    window_mean = dict(zip(OBS_NAMES, mu))
    window_stderr = dict(zip(OBS_NAMES, err))

    n_mean = float(mu[:3].mean())
    # Modes are statistically equivalent; their errors are averaged, not reduced.
    n_stderr = float(err[:3].mean())
    g2, g2_err, cosk, cosk_err = _ratio_stats(window_means)

    w_times = times[window_mask]
    half = w_times[0] + 0.5 * (w_times[-1] - w_times[0])
    n_series = stack[:, :, :3].mean(axis=(0, 2))
    first = n_series[window_mask & (times <= half)].mean()
    second = n_series[window_mask & (times > half)].mean()
    drift = abs(second - first) / max(abs(n_mean), 1e-300)
    rel_err = n_stderr / max(abs(n_mean), 1e-300)
    converged = bool(rel_err < 0.05 and drift < 0.05)

    return EnsembleStats(
        n_traj=n_traj, times=times, mean_series=mean_series,
        stderr_series=stderr_series, window_mask=window_mask,
        window_mean=window_mean, window_stderr=window_stderr,
        n_mean=n_mean, n_stderr=n_stderr, n_rescaled=n_mean / p.eta,
        g2=g2, g2_stderr=g2_err, coskewness=cosk, coskewness_stderr=cosk_err,
        drift=float(drift), converged=converged,
    )


def _save_checkpoint(path, p: ModelParams, n_traj, done):
    payload = {
        "version": np.array(CHECKPOINT_VERSION),
        "params": np.array([p.omega, p.u0, p.g0, p.eta, p.kappa]),
        "n_traj": np.array(n_traj),
        "indices": np.array(sorted(done)),
    }
    for j in sorted(done):
        payload[f"times_{j}"] = done[j][0]
        payload[f"obs_{j}"] = done[j][1]
    tmp = f"{path}.tmp.npz"
    np.savez(tmp, **payload)
    os.replace(tmp, path)


def _load_checkpoint(path, p: ModelParams, n_traj):
    with np.load(path) as data:
        if int(data["version"]) != CHECKPOINT_VERSION:
            raise ValueError(f"unknown checkpoint version {int(data['version'])}")
        ref = np.array([p.omega, p.u0, p.g0, p.eta, p.kappa])
        if not np.array_equal(data["params"], ref) or int(data["n_traj"]) != n_traj:
            return {}
        return {
            int(j): (data[f"times_{j}"], data[f"obs_{j}"])
            for j in data["indices"]
        }
