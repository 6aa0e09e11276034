"""Observables on pure states of the truncated three-mode basis.

Photon-number statistics are diagonal in the Fock basis and evaluated as
weighted sums; quadrature moments are evaluated by repeated sparse
application of x_i = a_i + a_i'. Mixed/ensemble versions (ratios of
ensemble-averaged moments) live in `dynamics`.
"""

from dataclasses import dataclass
import math

import numpy as np

from .exceptions import InputError, SymmetryViolationError, UndefinedObservableError
from .hilbert import FockBasis
from .operators import mode_operator

NORM_TOL = 1e-8
FIRST_MOMENT_TOL = 1e-8

_MODE_COL = {"a": 0, "b": 1, "c": 2}

# Cache of quadrature matrices keyed by (cutoff, mode); rebuilding the
# Kronecker products at every sweep point dominates otherwise.
_x_cache = {}


def _x_op(basis: FockBasis, mode: str):
    key = (basis.cutoff, mode)
    if key not in _x_cache:
        # Keep a single cutoff resident; large cutoffs are memory-heavy.
        for stale in [k for k in _x_cache if k[0] != basis.cutoff]:
            del _x_cache[stale]
        _x_cache[key] = mode_operator(basis, mode, "quadrature_x").matrix
    return _x_cache[key]


@dataclass(frozen=True)
class ObservableSet:
    """Ground-state observables reported by sweeps."""

    n_mean: tuple          # <n_a>, <n_b>, <n_c>
    n_rescaled: float      # mode-averaged <n>/eta
    g2_zero: tuple         # per-mode g2(0) (nan where undefined)
    coskewness: float
    x2: tuple              # <x_a^2>, <x_b^2>, <x_c^2>
    xx: tuple              # <x_a x_b>, <x_b x_c>, <x_c x_a>
    xabc: float            # <x_a x_b x_c>


def _check_normalized(state):
    nrm = np.linalg.norm(state)
    if abs(nrm - 1.0) > NORM_TOL:
        raise InputError(f"state norm {nrm} deviates from 1 beyond {NORM_TOL}")


def photon_numbers(state, basis: FockBasis, eta=None):
    """Per-mode mean photon numbers; optionally the eta-rescaled means too."""
    _check_normalized(state)
    w = np.abs(state) ** 2
    means = tuple(float(w @ basis.occupations[:, i]) for i in range(3))
    if eta is None:
        return means
    return means, tuple(m / eta for m in means)


def g2_zero(state, basis: FockBasis, mode: str):
    """Second-order correlation <a'a'aa>/<a'a>^2 of one mode."""
    _check_normalized(state)
    w = np.abs(state) ** 2
    n = basis.occupations[:, _MODE_COL[mode]].astype(float)
    n_mean = float(w @ n)
    if n_mean <= 0.0:
        raise UndefinedObservableError(f"g2(0) undefined: <n_{mode}> = 0")
    nn = float(w @ (n * (n - 1.0)))
    return nn / n_mean**2


def quadrature_moment(state, basis: FockBasis, powers: dict):
    """<x_a^ka x_b^kb x_c^kc> for total order <= 4.

    `powers` maps mode name to exponent; missing modes mean exponent 0.
    """
    _check_normalized(state)
    ks = {m: int(powers.get(m, 0)) for m in ("a", "b", "c")}
    if any(k < 0 for k in ks.values()):
        raise InputError("moment exponents must be non-negative")
    if sum(ks.values()) > 4:
        raise InputError("moments beyond total order 4 are unsupported")
    v = state
    for m in ("c", "b", "a"):  # x operators commute across modes
        x = _x_op(basis, m)
        for _ in range(ks[m]):
            v = x @ v
    return float(np.real(np.vdot(state, v)))


def coskewness(state, basis: FockBasis):
    """Normalized third cross-moment <x_a x_b x_c> / sqrt(prod <x_i^2>).

    First moments are not subtracted; they must vanish by parity symmetry
    and are asserted to be below FIRST_MOMENT_TOL.
    """
    _check_normalized(state)
    for m in ("a", "b", "c"):
        x1 = quadrature_moment(state, basis, {m: 1})
        if abs(x1) > FIRST_MOMENT_TOL:
            raise SymmetryViolationError(
                f"<x_{m}> = {x1:.3e} exceeds {FIRST_MOMENT_TOL}; state is not "
                "a parity eigenstate"
            )
    num = quadrature_moment(state, basis, {"a": 1, "b": 1, "c": 1})
    den = math.prod(quadrature_moment(state, basis, {m: 2}) for m in ("a", "b", "c"))
    return num / math.sqrt(den)


def observable_set(state, basis: FockBasis, eta: float) -> ObservableSet:
    """Bundle of all sweep-reported observables for one pure state."""
    means, resc = photon_numbers(state, basis, eta)
    g2 = []
    for m in ("a", "b", "c"):
        try:
            g2.append(g2_zero(state, basis, m))
        except UndefinedObservableError:
            g2.append(float("nan"))
    x2 = tuple(quadrature_moment(state, basis, {m: 2}) for m in ("a", "b", "c"))
    xx = tuple(
        quadrature_moment(state, basis, {m1: 1, m2: 1})
        for m1, m2 in (("a", "b"), ("b", "c"), ("c", "a"))
    )
    xabc = quadrature_moment(state, basis, {"a": 1, "b": 1, "c": 1})
    cosk = xabc / math.sqrt(x2[0] * x2[1] * x2[2])
    return ObservableSet(
        n_mean=means,
        n_rescaled=sum(resc) / 3.0,
        g2_zero=tuple(g2),
        coskewness=cosk,
        x2=x2,
        xx=xx,
        xabc=xabc,
    )
