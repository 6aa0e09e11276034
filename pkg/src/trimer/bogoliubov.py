"""Quadratic fluctuations around the (+++) superradiant mean field.

The second-order Hamiltonian in the local fluctuation quadratures
(x_mu, x_nu, x_zeta; p_mu, p_nu, p_zeta), with x = a + a' so that vacuum
variances are 1, is

    H2 = (omega/4)(1+f^2) sum p_i^2 + (omega/4)(1+3f^2) sum x_i^2
         - omega*lambda*f * (x_mu x_nu + x_nu x_zeta + x_zeta x_mu)

with f = f_plus(lambda). A collective rotation (symmetric mode y plus two
degenerate modes u, z) followed by reciprocal x/p rescalings brings it to
normal form with renormalized frequency omega_tilde and coupling
lambda_tilde; the y mode turns unstable exactly at lambda_tilde = 1.
The closed-form fluctuation table is validated against an independent
symplectic (normal-mode) diagonalization of the same quadratic form.
"""

from dataclasses import dataclass
import math

import numpy as np

from .exceptions import DomainError
from .meanfield import f_pm
from .model import ModelParams


@dataclass(frozen=True)
class BogoliubovReport:
    lam: float
    lambda_tilde: float
    omega_tilde: float
    stable: bool
    # polariton second moments; None when unstable
    u2: float | None = None
    y2: float | None = None
    z2: float | None = None
    pu2: float | None = None
    py2: float | None = None
    pz2: float | None = None
    # local-mode second moments
    x2_local: float | None = None       # <x_mu^2> (equal for all three)
    xx_cross: float | None = None       # <x_mu x_nu>
    p2_local: float | None = None
    pp_cross: float | None = None
    third_moment: float = 0.0           # <x_mu x_nu x_zeta> vanishes identically


def renormalized_params(lam: float, p: ModelParams):
    """(lambda_tilde, omega_tilde) of the collective-mode normal form."""
    if lam < 1.0:
        raise DomainError(f"no superradiant expansion point for lambda={lam} < 1")
    root = math.sqrt(lam * lam - 1.0)
    f = f_pm(lam, +1)
    one_minus = root * (lam + root) / (3.0 * lam * root + 3.0 * lam * lam - 1.0)
    lam_tilde = 1.0 - one_minus
    omega_tilde = p.omega * math.sqrt((1.0 + f * f) * (1.0 + 3.0 * f * f))
    return lam_tilde, omega_tilde


def _scale(f):
    # Quadrature rescaling ((1+f^2)/(1+3f^2))^(1/2) entering the local table.
    return math.sqrt((1.0 + f * f) / (1.0 + 3.0 * f * f))


def polariton_moments(lam_tilde: float):
    """Collective-mode second moments as functions of lambda_tilde alone."""
    if lam_tilde >= 1.0:
        raise DomainError(f"y mode unstable for lambda_tilde={lam_tilde} >= 1")
    return {
        "u2": 1.0 / math.sqrt(1.0 + lam_tilde / 2.0),
        "y2": 1.0 / math.sqrt(1.0 - lam_tilde),
        "z2": 1.0 / math.sqrt(1.0 + lam_tilde / 2.0),
        "pu2": math.sqrt(1.0 + lam_tilde / 2.0),
        "py2": math.sqrt(1.0 - lam_tilde),
        "pz2": math.sqrt(1.0 + lam_tilde / 2.0),
    }


def fluctuation_table(lam: float, p: ModelParams) -> BogoliubovReport:
    """Closed-form second moments; flagged unstable when lambda_tilde >= 1."""
    lam_tilde, omega_tilde = renormalized_params(lam, p)
    if lam_tilde >= 1.0:
        return BogoliubovReport(lam, lam_tilde, omega_tilde, stable=False)
    f = f_pm(lam, +1)
    u2 = z2 = 1.0 / math.sqrt(1.0 + lam_tilde / 2.0)
    y2 = 1.0 / math.sqrt(1.0 - lam_tilde)
    pu2 = pz2 = math.sqrt(1.0 + lam_tilde / 2.0)
    py2 = math.sqrt(1.0 - lam_tilde)
    s = _scale(f)
    x2_local = (s / 3.0) * (2.0 * z2 + y2)
    xx_cross = (s / 3.0) * (y2 - z2)
    p2_local = (1.0 / (3.0 * s)) * (2.0 * pz2 + py2)
    pp_cross = (1.0 / (3.0 * s)) * (py2 - pz2)
    return BogoliubovReport(
        lam, lam_tilde, omega_tilde, stable=True,
        u2=u2, y2=y2, z2=z2, pu2=pu2, py2=py2, pz2=pz2,
        x2_local=x2_local, xx_cross=xx_cross,
        p2_local=p2_local, pp_cross=pp_cross,
    )


# Orthogonal part of the collective-mode rotation; columns are (u, y, z).
_SQ3 = math.sqrt(3.0)
BOGO_MATRIX = np.array([
    [1.0, 1.0, 1.0],
    [-(1.0 + _SQ3) / 2.0, 1.0, (_SQ3 - 1.0) / 2.0],
    [(_SQ3 - 1.0) / 2.0, 1.0, -(1.0 + _SQ3) / 2.0],
])


@dataclass(frozen=True)
class SymplecticGroundState:
    stable: bool
    cov_xx: np.ndarray | None   # 3x3 <x_i x_j>
    cov_pp: np.ndarray | None   # 3x3 <p_i p_j>
    mode_frequencies: np.ndarray | None  # normal-mode quanta (ascending)


def symplectic_oracle(lam: float, p: ModelParams) -> SymplecticGroundState:
    """Ground covariance of H2 by normal-mode decomposition.

    H2 = (1/2)(x^T A x + b p^T p) with commutators [x_i, p_j] = 2i delta_ij.
    Since the momentum block is proportional to the identity, an orthogonal
    diagonalization of A is a symplectic transformation; each normal mode
    (1/2)(a_k X^2 + b P^2) has ground variances <X^2> = sqrt(b/a_k),
    <P^2> = sqrt(a_k/b). Indefinite A reports instability.
    """
    if lam < 1.0:
        raise DomainError(f"no superradiant expansion point for lambda={lam} < 1")
    f = f_pm(lam, +1)
    w = p.omega
    off = np.ones((3, 3)) - np.eye(3)
    a_block = 0.5 * w * (1.0 + 3.0 * f * f) * np.eye(3) - w * lam * f * off
    b = 0.5 * w * (1.0 + f * f)
    vals, vecs = np.linalg.eigh(a_block)
    if vals[0] <= 0.0:
        return SymplecticGroundState(False, None, None, None)
    cov_xx = (vecs * np.sqrt(b / vals)) @ vecs.T
    cov_pp = (vecs * np.sqrt(vals / b)) @ vecs.T
    freqs = 2.0 * np.sqrt(vals * b)  # quantum of each normal mode
    return SymplecticGroundState(True, cov_xx, cov_pp, np.sort(freqs))


def oracle_polariton_covariance(lam: float, p: ModelParams):
    """Oracle covariances rotated into the (u, y, z) polariton frame."""
    gs = symplectic_oracle(lam, p)
    if not gs.stable:
        return None
    f = f_pm(lam, +1)
    s = math.sqrt(_scale(f))  # quartic-root factor of the transformation
    # x = (s/sqrt(3)) M q  =>  q = (1/(sqrt(3) s)) M^T x
    t_x = BOGO_MATRIX.T / (_SQ3 * s)
    t_p = BOGO_MATRIX.T * (s / _SQ3)
    return t_x @ gs.cov_xx @ t_x.T, t_p @ gs.cov_pp @ t_p.T


def _bisect_threshold(stable, lo, hi, tol):
    # The y mode is marginal exactly at lambda = 1 and stable above, so the
    # threshold is the boundary point of the stability predicate.
    if stable(lo) or not stable(hi):
        raise DomainError("bracket does not straddle the instability threshold")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if stable(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def instability_threshold_oracle(p: ModelParams, hi=5.0, tol=1e-12):
    """Threshold lambda where the quadratic form loses positivity."""
    return _bisect_threshold(lambda lam: symplectic_oracle(lam, p).stable,
                             1.0, hi, tol)


def instability_threshold_formula(p: ModelParams, hi=5.0, tol=1e-12):
    """Threshold lambda where lambda_tilde reaches 1, from the closed form."""
    return _bisect_threshold(lambda lam: renormalized_params(lam, p)[0] < 1.0,
                             1.0, hi, tol)
