"""Physical parameters of the three-mode trimer and their scaling laws.

All energies are expressed in units of the bare mode frequency ``omega``
(default 1). The scaling parameter ``eta`` plays the role of an effective
system size: the bare Kerr strength scales as ``U = U0/eta`` and the
three-body coupling as ``g = g0/sqrt(eta)``, so that the dimensionless
coupling ``lambda = g0*sqrt(2/(omega*U0))`` is independent of ``eta``.
"""

from dataclasses import dataclass
import math

from .exceptions import DomainError

# First-order transition point of the dimensionless coupling.
LAMBDA_C = 3.0 / (2.0 * math.sqrt(2.0))


@dataclass(frozen=True)
class ModelParams:
    """Couplings of the trimer Hamiltonian.

    Attributes
    ----------
    omega : float
        Bare mode frequency (> 0). Sets the energy unit.
    u0 : float
        Bare Kerr scale (> 0); the effective Kerr is ``u0/eta``.
    g0 : float
        Bare three-body coupling scale; the effective coupling is
        ``g0/sqrt(eta)``.
    eta : float
        Scaling parameter (> 0), any positive real.
    kappa : float
        Single-photon loss rate (>= 0); 0 for closed-system work.
    """

    omega: float = 1.0
    u0: float = 1.0
    g0: float = 0.0
    eta: float = 1.0
    kappa: float = 0.0

    def __post_init__(self):
        if self.omega <= 0:
            raise DomainError(f"omega must be > 0, got {self.omega}")
        if self.u0 <= 0:
            raise DomainError(f"u0 must be > 0, got {self.u0}")
        if self.eta <= 0:
            raise DomainError(f"eta must be > 0, got {self.eta}")
        if self.kappa < 0:
            raise DomainError(f"kappa must be >= 0, got {self.kappa}")

    @property
    def g(self):
        """Effective three-body coupling g0/sqrt(eta)."""
        return self.g0 / math.sqrt(self.eta)

    @property
    def u(self):
        """Effective Kerr strength U0/eta."""
        return self.u0 / self.eta

    @property
    def lam(self):
        """Dimensionless coupling; eta-independent by construction."""
        return self.g0 * math.sqrt(2.0 / (self.omega * self.u0))

    def with_g0(self, g0):
        """Copy with a different bare coupling (sweep helper)."""
        return ModelParams(self.omega, self.u0, g0, self.eta, self.kappa)


def derive_couplings(p: ModelParams):
    """Return the eta-scaled couplings and the dimensionless coupling.

    Returns a dict with keys ``g``, ``u`` and ``lam``.
    """
    return {"g": p.g, "u": p.u, "lam": p.lam}


def critical_coupling(p: ModelParams):
    """First-order transition point.

    Returns ``lambda_c = 3/(2*sqrt(2))`` and the corresponding bare
    coupling ``g0_c = lambda_c * sqrt(omega*u0/2)``, both eta-independent.
    """
    g0_c = LAMBDA_C * math.sqrt(p.omega * p.u0 / 2.0)
    return {"lambda_c": LAMBDA_C, "g0_c": g0_c}
