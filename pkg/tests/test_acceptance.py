"""End-to-end acceptance suite.

Each test_criterion_NN function checks one release criterion; the conftest
terminal summary prints one pass/fail line per criterion. The eta=10 ground
state sweep (criteria 2-5, 7) and the deep-phase point are computed once per
session. Full runtime is dominated by the trajectory-vs-direct steady-state
comparison (criterion 9) and is of the order of tens of minutes on one core.
"""

import math

import numpy as np
import pytest

from trimer.bogoliubov import (
    fluctuation_table, instability_threshold_formula, instability_threshold_oracle,
    oracle_polariton_covariance, symplectic_oracle,
)
from trimer.dynamics import (
    density_matrix_observables, ensemble_run, liouvillian, steady_state_direct,
)
from trimer.freqplan import (
    ResonatorTable, plan_tones, required_coupling, spurious_scan,
)
from trimer.hilbert import SectorLabel, build_basis
from trimer.meanfield import (
    branch_energy, superposition_coskewness, xbar,
)
from trimer.model import LAMBDA_C, ModelParams, critical_coupling
from trimer.observables import observable_set
from trimer.operators import build_hamiltonian, restrict_to_sector
from trimer.spectral import (
    converged_ground_state, lowest_eigenpairs, solve_point, spectrum_sweep,
)

TAU = 2.0 * math.pi

# eta=10 sweep settings: cutoff 56 passes the overlap-convergence protocol at
# the largest grid point (g0 = 0.9); two states per sector cover the lowest
# five merged levels throughout the grid.
SWEEP_ETA = 10.0
SWEEP_CUTOFF = 56
SWEEP_GRID = [round(0.6 + 0.005 * i, 10) for i in range(61)]
DEEP_G0 = 1.2
DEEP_CUTOFF = 82


@pytest.fixture(scope="module")
def sweep10():
    p = ModelParams(1.0, 1.0, 0.0, SWEEP_ETA)
    return spectrum_sweep(p, SWEEP_GRID, k=5, cutoff=SWEEP_CUTOFF,
                          k_per_sector=2)


@pytest.fixture(scope="module")
def deep10():
    p = ModelParams(1.0, 1.0, DEEP_G0, SWEEP_ETA)
    basis = build_basis(DEEP_CUTOFF)
    res = solve_point(p, DEEP_CUTOFF, k=1, basis=basis, k_per_sector=1)
    res.observables = observable_set(res.global_vector(0, basis), basis, p.eta)
    return res


def test_criterion_01_meanfield_critical_point():
    p = ModelParams(1.0, 1.0, 0.0, 1.0)
    crit = critical_coupling(p)
    assert crit["lambda_c"] == 3.0 / (2.0 * math.sqrt(2.0))
    assert crit["g0_c"] == pytest.approx(0.75, abs=1e-15)
    # the excited branch energy crosses zero exactly at lambda_c
    from scipy.optimize import brentq
    root = brentq(
        lambda lam: branch_energy(
            ModelParams(1.0, 1.0, lam * math.sqrt(0.5), 1.0), +1
        ),
        1.01, 1.4, xtol=1e-14,
    )
    assert abs(root - LAMBDA_C) < 1e-12
    assert abs(branch_energy(
        ModelParams(1.0, 1.0, LAMBDA_C * math.sqrt(0.5), 1.0), +1
    )) < 1e-12


def test_criterion_02_first_order_jump(sweep10):
    n_resc = np.array([r.observables.n_rescaled for r in sweep10])
    jumps = np.diff(n_resc)
    i = int(np.argmax(jumps))
    g0_jump = 0.5 * (SWEEP_GRID[i] + SWEEP_GRID[i + 1])
    assert abs(g0_jump - 0.75) <= 0.03
    assert jumps[i] > 0.5


def test_criterion_03_near_degeneracy(sweep10):
    gap_hi = sweep10[-1].energy(1) - sweep10[-1].energy(0)
    p_lo = ModelParams(1.0, 1.0, 0.5, SWEEP_ETA)
    res_lo = solve_point(p_lo, SWEEP_CUTOFF, k=5, k_per_sector=2)
    gap_lo = res_lo.energy(1) - res_lo.energy(0)
    assert gap_lo >= 100.0 * gap_hi
    for res in sweep10:
        e1, e2, e3 = res.energy(1), res.energy(2), res.energy(3)
        assert max(e1, e2, e3) - min(e1, e2, e3) < 1e-8


def test_criterion_04_avoided_crossing(sweep10):
    gap4 = np.array([r.energy(4) - r.energy(0) for r in sweep10])
    i = int(np.argmin(gap4))
    assert 0 < i < len(gap4) - 1
    assert gap4[i] < gap4[i - 1] and gap4[i] < gap4[i + 1]
    assert gap4.min() >= 1e-6


def test_criterion_05_coskewness(sweep10, deep10):
    cosk = np.array([r.observables.coskewness for r in sweep10])
    # the coskewness divergence sits in a window narrower than the coarse
    # grid step, so refine around the photon-number jump before taking the
    # minimum over the swept range
    n_resc = np.array([r.observables.n_rescaled for r in sweep10])
    i = int(np.argmax(np.diff(n_resc)))
    lo, hi = SWEEP_GRID[i], SWEEP_GRID[i + 1]
    p = ModelParams(1.0, 1.0, 0.0, SWEEP_ETA)
    cosk_min = cosk.min()
    for _ in range(3):
        if cosk_min < -1.0:
            break
        fine_grid = [lo + (hi - lo) * j / 20.0 for j in range(21)]
        fine = spectrum_sweep(p, fine_grid, k=1, cutoff=SWEEP_CUTOFF,
                              k_per_sector=1)
        fine_cosk = [r.observables.coskewness for r in fine]
        cosk_min = min(cosk_min, min(fine_cosk))
        j = int(np.argmin(fine_cosk))
        lo = fine_grid[max(j - 1, 0)]
        hi = fine_grid[min(j + 1, 20)]
    assert cosk_min < -1.0
    p_deep = ModelParams(1.0, 1.0, DEEP_G0, SWEEP_ETA)
    predicted = superposition_coskewness(xbar(p_deep))
    assert abs(deep10.observables.coskewness - predicted) < 0.05


def test_criterion_06_normal_phase_scaling():
    etas = [1.0, 2.0, 4.0, 8.0, 16.0]
    cosks = []
    for eta in etas:
        p = ModelParams(1.0, 1.0, 0.2, eta)
        res = converged_ground_state(p, c_start=4, k=1)
        basis = build_basis(res.cutoff_used)
        obs = observable_set(res.global_vector(0, basis), basis, eta)
        cosks.append(abs(obs.coskewness))
    slope = np.polyfit(np.log(etas), np.log(cosks), 1)[0]
    assert abs(slope - (-0.5)) <= 0.1


def test_criterion_07_photon_statistics(sweep10, deep10):
    for res in sweep10:
        if res.params.g0 <= 0.72:
            g2 = np.mean(res.observables.g2_zero)
            assert g2 > 1.0
    g2_deep = np.mean(deep10.observables.g2_zero)
    assert abs(g2_deep - 1.0) < 0.05


def test_criterion_08_bogoliubov_vs_oracle():
    p = ModelParams(1.0, 1.0, 0.0, 1.0)
    for lam in (1.1, 1.5, 2.0, 3.0):
        rep = fluctuation_table(lam, p)
        gs = symplectic_oracle(lam, p)
        assert rep.stable and gs.stable
        assert rep.x2_local == pytest.approx(gs.cov_xx[0, 0], rel=1e-10)
        assert rep.xx_cross == pytest.approx(gs.cov_xx[0, 1], rel=1e-10)
        assert rep.p2_local == pytest.approx(gs.cov_pp[0, 0], rel=1e-10)
        assert rep.pp_cross == pytest.approx(gs.cov_pp[0, 1], rel=1e-10)
        cov_x, cov_p = oracle_polariton_covariance(lam, p)
        assert cov_x[1, 1] == pytest.approx(rep.y2, rel=1e-10)
        assert cov_p[1, 1] == pytest.approx(rep.py2, rel=1e-10)
    a = instability_threshold_oracle(p)
    b = instability_threshold_formula(p)
    assert abs(a - b) < 1e-9


def test_criterion_09_trajectory_engine():
    # (i) analytic photon decay from |100> at g0 = 0
    p = ModelParams(1.0, 1.0, 0.0, 1.0, kappa=1.0)
    basis = build_basis(3)
    psi0 = np.zeros(basis.dim)
    psi0[basis.index_of(1, 0, 0)] = 1.0
    st = ensemble_run(p, basis, n_traj=1000, t_max=5.0, dt=0.01,
                      master_seed=202, workers=1, initial_state=psi0)
    n_a = st.mean_series[:, 0]
    err = np.maximum(st.stderr_series[:, 0], 1e-4)
    assert np.all(np.abs(n_a - np.exp(-st.times)) <= 3.0 * err)

    # (ii) ensemble steady state vs direct Liouvillian solve at eta=1, C=6
    basis6 = build_basis(6)
    for j, g0 in enumerate((0.375, 0.6, 0.825)):
        p = ModelParams(1.0, 1.0, g0, 1.0, kappa=1.0)
        lio = liouvillian(p, basis6)
        rho = steady_state_direct(lio, check_multiplicity=False, basis=basis6)
        o = density_matrix_observables(rho, basis6)
        n_dir = (o["n_a"] + o["n_b"] + o["n_c"]) / 3.0
        cosk_dir = o["xabc"] / math.sqrt(o["x2_a"] * o["x2_b"] * o["x2_c"])
        st = ensemble_run(p, basis6, n_traj=1200, t_max=60.0, dt=0.01,
                          master_seed=310 + j, workers=1,
                          steady_window_frac=0.6)
        assert abs(st.n_mean - n_dir) <= 0.05 * n_dir
        assert abs(st.coskewness - cosk_dir) <= 0.05 * abs(cosk_dir)


def test_criterion_10_dissipative_coskewness():
    # scaled-up dissipative transition: steady coskewness dips below -1
    p = ModelParams(1.0, 1.0, 0.75, 2.0, kappa=1.0)
    basis = build_basis(10)
    st = ensemble_run(p, basis, n_traj=150, t_max=25.0, dt=0.01,
                      master_seed=11, workers=1)
    assert st.coskewness + 2.0 * st.coskewness_stderr < -1.0

    # the engine accepts the full-scale parameter set (eta=3, C=25)
    p_big = ModelParams(1.0, 1.0, 0.75, 3.0, kappa=1.0)
    basis_big = build_basis(25)
    st_big = ensemble_run(p_big, basis_big, n_traj=2, t_max=0.1, dt=0.02,
                          master_seed=5, workers=1)
    assert np.isfinite(st_big.n_mean)


def test_criterion_11_frequency_plan():
    table = ResonatorTable(freqs={
        "a": (TAU * 7.6, TAU * 11.4),
        "b": (TAU * 6.2, TAU * 9.3),
        "c": (TAU * 4.2, TAU * 6.3),
    })
    plan = plan_tones(table, TAU * 0.010)
    p = ModelParams(omega=TAU * 0.010, u0=TAU * 0.001)
    plan = spurious_scan(table, plan, coupling=required_coupling(p))
    assert plan.min_detuning == pytest.approx(TAU * 0.1, rel=1e-12)
    assert plan.ratio == pytest.approx(2.4e-2, rel=0.05)
    assert plan.safe


def test_criterion_12_structural(tmp_path):
    # hermiticity and symmetry commutation at an arbitrary coupling
    basis = build_basis(5)
    p = ModelParams(1.3, 0.7, 0.9, 2.5)
    h = build_hamiltonian(p, basis)
    assert abs(h.matrix - h.matrix.T).max() == 0.0
    from trimer.operators import symmetry_operator
    for which in (1, 2):
        s = symmetry_operator(basis, which)
        comm = h.matrix @ s.matrix - s.matrix @ h.matrix
        assert comm.nnz == 0 or abs(comm).max() == 0.0

    # sector blocks reassemble the full spectrum; Krylov matches dense
    basis4 = build_basis(4)
    p4 = ModelParams(1.0, 1.0, 0.8, 1.0)
    h4 = build_hamiltonian(p4, basis4)
    dense_vals = np.linalg.eigvalsh(h4.matrix.toarray())
    sector_vals = []
    for s1 in (1, -1):
        for s2 in (1, -1):
            hs = restrict_to_sector(h4, SectorLabel(s1, s2), basis4)
            sector_vals.extend(np.linalg.eigvalsh(hs.matrix.toarray()))
            k = min(4, hs.dim)
            vals, _ = lowest_eigenpairs(hs, k)
            block = np.sort(np.linalg.eigvalsh(hs.matrix.toarray()))[:k]
            assert np.allclose(vals, block, atol=1e-9)
    assert np.allclose(np.sort(sector_vals), dense_vals, atol=1e-9)

    # variational cutoff monotonicity
    energies = [solve_point(p4, c, 1).energy(0) for c in range(3, 9)]
    assert all(b <= a + 1e-12 for a, b in zip(energies, energies[1:]))

    # byte-identical reruns of seeded pipelines
    from trimer.cli import main
    args = ["trajectories", "--g0-min", "0.4", "--g0-steps", "1", "--eta", "1",
            "--kappa", "1.0", "--cutoff", "3", "--ntraj", "4", "--tmax", "2.0",
            "--dt", "0.01", "--seed", "9"]
    out1, out2 = str(tmp_path / "r1.csv"), str(tmp_path / "r2.csv")
    assert main(args + ["--out", out1]) == 0
    assert main(args + ["--out", out2]) == 0
    assert open(out1, "rb").read() == open(out2, "rb").read()
