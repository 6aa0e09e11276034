import math

import numpy as np
import pytest

from trimer.exceptions import (
    InputError, SymmetryViolationError, UndefinedObservableError,
)
from trimer.hilbert import build_basis
from trimer.meanfield import superposition_coskewness
from trimer.observables import (
    coskewness, g2_zero, observable_set, photon_numbers, quadrature_moment,
)


def fock_state(basis, na, nb, nc):
    v = np.zeros(basis.dim)
    v[basis.index_of(na, nb, nc)] = 1.0
    return v


def coherent_product(basis, alpha, beta, gamma):
    """Unnormalized |alpha>|beta>|gamma> on the truncated basis."""
    n = np.arange(basis.cutoff)
    log_fact = np.cumsum(np.concatenate([[0.0], np.log(n[1:])]))
    def mode_vec(a):
        return np.exp(n * np.log(abs(a)) - 0.5 * log_fact) * np.sign(a) ** n \
            if a != 0 else (n == 0).astype(float)
    v = np.einsum("i,j,k->ijk", mode_vec(alpha), mode_vec(beta), mode_vec(gamma))
    return v.ravel()


def test_vacuum_moments():
    basis = build_basis(4)
    vac = fock_state(basis, 0, 0, 0)
    assert photon_numbers(vac, basis) == (0.0, 0.0, 0.0)
    for m in ("a", "b", "c"):
        assert quadrature_moment(vac, basis, {m: 2}) == pytest.approx(1.0)
        assert quadrature_moment(vac, basis, {m: 1}) == 0.0
    with pytest.raises(UndefinedObservableError):
        g2_zero(vac, basis, "a")


def test_one_photon_each_mode():
    basis = build_basis(4)
    st = fock_state(basis, 1, 1, 1)
    means, resc = photon_numbers(st, basis, eta=2.0)
    assert means == (1.0, 1.0, 1.0)
    assert resc == (0.5, 0.5, 0.5)
    for m in ("a", "b", "c"):
        # <n|x^2|n> = 2n + 1
        assert quadrature_moment(st, basis, {m: 2}) == pytest.approx(3.0)
        assert g2_zero(st, basis, m) == 0.0


def test_g2_of_two_photon_fock():
    basis = build_basis(4)
    st = fock_state(basis, 2, 0, 0)
    assert g2_zero(st, basis, "a") == pytest.approx(0.5)


def test_g2_of_coherent_state():
    basis = build_basis(20)
    alpha = math.sqrt(0.5)
    v = coherent_product(basis, alpha, alpha, alpha)
    v /= np.linalg.norm(v)
    for m in ("a", "b", "c"):
        assert g2_zero(v, basis, m) == pytest.approx(1.0, abs=1e-6)


def test_coskewness_requires_vanishing_first_moments():
    basis = build_basis(12)
    v = coherent_product(basis, 0.8, 0.8, 0.8)
    v /= np.linalg.norm(v)
    with pytest.raises(SymmetryViolationError):
        coskewness(v, basis)


def test_coskewness_of_four_state_superposition():
    """Symmetric superposition of the four displaced products vs closed form."""
    basis = build_basis(40)
    xbar = -2.0  # per-mode coherent amplitude of the displaced wells
    patterns = ((1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1))
    v = np.zeros(basis.dim)
    for sa, sb, sc in patterns:
        w = coherent_product(basis, sa * xbar, sb * xbar, sc * xbar)
        v += w / np.linalg.norm(w)
    v /= np.linalg.norm(v)
    # closed form drops a (1 + 3exp(-4*X^2))^(1/2) overlap factor, which is
    # ~1.7e-7 relative at X = -2
    assert coskewness(v, basis) == pytest.approx(
        superposition_coskewness(xbar), abs=1e-6
    )


def test_quadrature_moment_validation():
    basis = build_basis(3)
    vac = fock_state(basis, 0, 0, 0)
    with pytest.raises(InputError):
        quadrature_moment(vac, basis, {"a": 3, "b": 2})
    with pytest.raises(InputError):
        quadrature_moment(vac, basis, {"a": -1})
    with pytest.raises(InputError):
        photon_numbers(2.0 * vac, basis)


def test_observable_set_consistency():
    basis = build_basis(6)
    rng = np.random.default_rng(3)
    # random parity-symmetric state: support on one sector only
    from trimer.hilbert import SectorLabel
    idx = basis.sector_indices(SectorLabel(1, 1))
    v = np.zeros(basis.dim)
    v[idx] = rng.standard_normal(len(idx))
    v /= np.linalg.norm(v)
    obs = observable_set(v, basis, eta=2.0)
    assert obs.n_rescaled == pytest.approx(sum(obs.n_mean) / 6.0)
    assert obs.coskewness == pytest.approx(
        obs.xabc / math.sqrt(obs.x2[0] * obs.x2[1] * obs.x2[2])
    )
    assert obs.coskewness == pytest.approx(coskewness(v, basis))
