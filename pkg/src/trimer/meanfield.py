"""Semiclassical analysis of the trimer: stationary points and phases.

The mean-field potential over real amplitudes (alpha, beta, gamma) is

    V = omega*(a^2+b^2+c^2) + 8*g*a*b*c + U*(a^4+b^4+c^4)

with g = g0/sqrt(eta), U = U0/eta. For lambda > 1 there are nine
stationary points: the vacuum, four displaced minima at amplitude
magnitude X_plus and four barrier points at X_minus, with
X_pm = sqrt(omega*eta/(2*U0)) * f_pm(lambda) and
f_pm = lambda +- sqrt(lambda^2 - 1). The all-equal displaced minimum sits
at negative amplitude Xbar = -X_plus.
"""

from dataclasses import dataclass
import math

import numpy as np

from .model import LAMBDA_C, ModelParams

# Sign patterns of the displaced stationary points: amplitudes are
# (s_a, s_b, s_c) * (-X) so that (+++) is the all-equal minimum at -X.
SIGN_PATTERNS = ((1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1))

REGIMES = (
    "normal_only",
    "superradiant_unstable",
    "superradiant_metastable",
    "superradiant_ground",
)


@dataclass(frozen=True)
class StationaryPoint:
    amplitudes: tuple      # (alpha, beta, gamma), real
    branch: str            # vacuum | X_plus | X_minus
    sign_pattern: tuple | None
    energy: float
    nature: str            # minimum | maximum | saddle


@dataclass(frozen=True)
class PhaseReport:
    lam: float
    regime: str
    stability_window: float    # l = (U0/(eta*omega))^(4/5)
    lambda_max_estimate: float  # vacuum destabilization ~ sqrt(omega*eta/U0)
    energy_plus: float
    energy_minus: float


def f_pm(lam, sign):
    """Displacement factor f_pm = lambda +- sqrt(lambda^2 - 1) (lambda >= 1)."""
    return lam + sign * math.sqrt(lam * lam - 1.0)


def branch_energy(p: ModelParams, sign):
    """Semiclassical energy of the X_plus (+1) or X_minus (-1) branch."""
    f = f_pm(p.lam, sign)
    pref = 3.0 * p.omega**2 * p.eta / (4.0 * p.u0)
    return pref * (2.0 * f**2 - (8.0 / 3.0) * p.lam * f**3 + f**4)


def potential(p: ModelParams, amps):
    a, b, c = amps
    return (
        p.omega * (a * a + b * b + c * c)
        + 8.0 * p.g * a * b * c
        + p.u * (a**4 + b**4 + c**4)
    )


def potential_gradient(p: ModelParams, amps):
    a, b, c = amps
    return np.array([
        2.0 * p.omega * a + 8.0 * p.g * b * c + 4.0 * p.u * a**3,
        2.0 * p.omega * b + 8.0 * p.g * a * c + 4.0 * p.u * b**3,
        2.0 * p.omega * c + 8.0 * p.g * a * b + 4.0 * p.u * c**3,
    ])


def _hessian_nature(p: ModelParams, amps):
    a, b, c = amps
    h = np.array([
        [2 * p.omega + 12 * p.u * a * a, 8 * p.g * c, 8 * p.g * b],
        [8 * p.g * c, 2 * p.omega + 12 * p.u * b * b, 8 * p.g * a],
        [8 * p.g * b, 8 * p.g * a, 2 * p.omega + 12 * p.u * c * c],
    ])
    ev = np.linalg.eigvalsh(h)
    if np.all(ev > 0):
        return "minimum"
    if np.all(ev < 0):
        return "maximum"
    return "saddle"


def displacement(p: ModelParams, sign):
    """Amplitude magnitude X_pm = sqrt(omega*eta/(2*U0)) * f_pm."""
    return math.sqrt(p.omega * p.eta / (2.0 * p.u0)) * f_pm(p.lam, sign)


def xbar(p: ModelParams):
    """Coherent amplitude of the (+++) superradiant minimum (negative)."""
    return -displacement(p, +1)


def stationary_points(p: ModelParams):
    """All real stationary points of the mean-field potential."""
    points = [StationaryPoint((0.0, 0.0, 0.0), "vacuum", None,
                              0.0, _hessian_nature(p, (0.0, 0.0, 0.0)))]
    if p.lam <= 1.0:
        return points
    for sign, branch in ((+1, "X_plus"), (-1, "X_minus")):
        x = displacement(p, sign)
        e = branch_energy(p, sign)
        for pat in SIGN_PATTERNS:
            amps = tuple(-s * x for s in pat)
            points.append(StationaryPoint(amps, branch, pat, e,
                                          _hessian_nature(p, amps)))
    return points


def stability_window(p: ModelParams):
    """Width l of the fluctuation-unstable interval (1, 1+l]."""
    return (p.u0 / (p.eta * p.omega)) ** 0.8


def classify_phase(p: ModelParams) -> PhaseReport:
    """Assign the regime by comparing lambda against 1, 1+l and 3/(2*sqrt(2))."""
    lam = p.lam
    window = stability_window(p)
    lam_max = math.sqrt(p.omega * p.eta / p.u0)  # order-of-magnitude only
    if lam > 1.0:
        e_plus, e_minus = branch_energy(p, +1), branch_energy(p, -1)
    else:
        e_plus = e_minus = float("nan")
    if lam <= 1.0:
        regime = "normal_only"
    elif lam <= 1.0 + window:
        regime = "superradiant_unstable"
    elif lam < LAMBDA_C:
        regime = "superradiant_metastable"
    else:
        regime = "superradiant_ground"
    return PhaseReport(lam, regime, window, lam_max, e_plus, e_minus)


def superposition_coskewness(xbar_value: float):
    """Coskewness of the symmetric four-coherent-state superposition.

    8*X^3 / (4*X^2 + 1 + (4*X^2 + 3)*exp(-4*X^2))^(3/2); the superradiant
    branch carries X < 0, giving values in (-1, 0].
    """
    x2 = 4.0 * xbar_value * xbar_value
    den = x2 + 1.0 + (x2 + 3.0) * math.exp(-x2)
    return 8.0 * xbar_value**3 / den**1.5


def meanfield_observables(p: ModelParams):
    """Thermodynamic-limit predictions for <n>/eta and the coskewness."""
    report = classify_phase(p)
    if report.regime == "superradiant_ground":
        n_rescaled = (p.omega / (2.0 * p.u0)) * f_pm(p.lam, +1) ** 2
        cosk = superposition_coskewness(xbar(p))
    else:
        n_rescaled = 0.0
        cosk = 0.0
    return {"n_rescaled": n_rescaled, "coskewness": cosk, "regime": report.regime}
