"""Physical parameters of the ring / channel / loss-channel system and the
rates derived from them.

Unit conventions
----------------
* Angular frequencies and damping rates are in rad/s.  Figure-style "GHz"
  damping rates are interpreted as angular rates in units of 1e9 s^-1
  (a 10 GHz linewidth means Gamma_bar = 1e10 s^-1), so that Gamma_bar and
  the angular detuning kappa*v enter Lorentzians on equal footing.
* Group speeds are in m/s; wavevector offsets kappa in rad/m.
* Ring-channel couplings gamma_J and ring-loss couplings mu_J are complex
  with |gamma_J|^2 / (2 v_J) and |mu_J|^2 / (2 u_J) in s^-1.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidParameterError

__all__ = [
    "HBAR",
    "EPSILON_0",
    "MODES",
    "RingSystem",
    "DerivedRates",
    "derive_rates",
    "detuning",
    "MaterialEstimate",
    "NonlinearCouplings",
    "estimate_nonlinear_couplings",
]

HBAR = 1.054571817e-34       # J*s (CODATA 2018)
EPSILON_0 = 8.8541878128e-12  # F/m (CODATA 2018)

MODES = ("P", "S", "I")

#: Default relative tolerance for declaring a mode critically coupled.
CRITICAL_COUPLING_RTOL = 1e-9


@dataclass(frozen=True)
class RingSystem:
    """All parameters of the pump/signal/idler ring-channel system.

    Attributes
    ----------
    omega_P, omega_S, omega_I : float
        Reference angular frequencies [rad/s].
    v_P, v_S, v_I : float
        Physical-channel group speeds [m/s].
    gamma_P, gamma_S, gamma_I : complex
        Ring-channel coupling constants; |gamma_J|^2/(2 v_J) is the
        channel-coupling damping rate Gamma_J [s^-1].
    mu_P, mu_S, mu_I : complex
        Ring to loss-channel coupling constants; |mu_J|^2/(2 u_J) is the
        scattering-loss rate M_J [s^-1].
    u_P, u_S, u_I : float or None
        Loss-channel group speeds [m/s]; default to the physical speeds.
    lambda_fwm : complex
        Four-wave-mixing coupling [rad/s per pair amplitude].
    eta_spm : complex
        Pump self-phase-modulation coefficient [rad/s per photon].
    zeta_xpm : complex
        Pump-signal/idler cross-phase-modulation coefficient
        [rad/s per photon].
    """

    omega_P: float
    omega_S: float
    omega_I: float
    v_P: float
    v_S: float
    v_I: float
    gamma_P: complex
    gamma_S: complex
    gamma_I: complex
    mu_P: complex = 0j
    mu_S: complex = 0j
    mu_I: complex = 0j
    u_P: float | None = None
    u_S: float | None = None
    u_I: float | None = None
    lambda_fwm: complex = 0j
    eta_spm: complex = 0j
    zeta_xpm: complex = 0j

    def __post_init__(self) -> None:
        for j in MODES:
            v = getattr(self, f"v_{j}")
            if not (np.isfinite(v) and v > 0):
                raise InvalidParameterError(f"v_{j} must be positive, got {v}")
            u = getattr(self, f"u_{j}")
            if u is None:
                object.__setattr__(self, f"u_{j}", v)
            elif not (np.isfinite(u) and u > 0):
                raise InvalidParameterError(f"u_{j} must be positive, got {u}")
        for j in MODES:
            if not self.Gamma_bar(j) > 0:
                raise InvalidParameterError(
                    f"mode {j} has zero total damping; need gamma_{j} or mu_{j}")
        if not np.isfinite(self.detuning):
            raise InvalidParameterError("detuning is not finite")

    @classmethod
    def from_rates(cls, *, omega_P: float, omega_S: float, omega_I: float,
                   v_P: float, v_S: float, v_I: float,
                   Gamma_P: float, Gamma_S: float, Gamma_I: float,
                   M_P: float = 0.0, M_S: float = 0.0, M_I: float = 0.0,
                   u_P: float | None = None, u_S: float | None = None,
                   u_I: float | None = None,
                   lambda_fwm: complex = 0j, eta_spm: complex = 0j,
                   zeta_xpm: complex = 0j) -> "RingSystem":
        """Build a system from damping rates [s^-1] instead of couplings.

        Couplings are taken real and non-negative:
        gamma_J = sqrt(2 Gamma_J v_J), mu_J = sqrt(2 M_J u_J).  All
        observables in this package depend on the couplings only through
        Gamma_J and M_J, so the phase choice is immaterial.
        """
        speeds = {"P": (v_P, u_P), "S": (v_S, u_S), "I": (v_I, u_I)}
        rates = {"P": (Gamma_P, M_P), "S": (Gamma_S, M_S), "I": (Gamma_I, M_I)}
        kw: dict = dict(omega_P=omega_P, omega_S=omega_S, omega_I=omega_I,
                        v_P=v_P, v_S=v_S, v_I=v_I,
                        u_P=u_P, u_S=u_S, u_I=u_I,
                        lambda_fwm=lambda_fwm, eta_spm=eta_spm,
                        zeta_xpm=zeta_xpm)
        for j, (v, u) in speeds.items():
            g, m = rates[j]
            if g < 0 or m < 0:
                raise InvalidParameterError(
                    f"rates for mode {j} must be non-negative, got {g}, {m}")
            if v <= 0 or (u is not None and u <= 0):
                raise InvalidParameterError(
                    f"speeds for mode {j} must be positive, got v={v}, u={u}")
            kw[f"gamma_{j}"] = complex(np.sqrt(2.0 * g * v))
            kw[f"mu_{j}"] = complex(np.sqrt(2.0 * m * (u if u is not None else v)))
        return cls(**kw)

    # -- derived rates ----------------------------------------------------

    def Gamma(self, mode: str) -> float:
        """Channel-coupling damping rate Gamma_J = |gamma_J|^2/(2 v_J)."""
        return abs(getattr(self, f"gamma_{mode}")) ** 2 / (2.0 * getattr(self, f"v_{mode}"))

    def M(self, mode: str) -> float:
        """Scattering-loss rate M_J = |mu_J|^2/(2 u_J)."""
        return abs(getattr(self, f"mu_{mode}")) ** 2 / (2.0 * getattr(self, f"u_{mode}"))

    def Gamma_bar(self, mode: str) -> float:
        """Total damping rate of ring mode J."""
        return self.Gamma(mode) + self.M(mode)

    @property
    def detuning(self) -> float:
        """Pair-generation detuning omega_S + omega_I - 2 omega_P [rad/s]."""
        return self.omega_S + self.omega_I - 2.0 * self.omega_P

    def replace(self, **changes) -> "RingSystem":
        return replace(self, **changes)


@dataclass(frozen=True)
class DerivedRates:
    """Damping rates per mode with critical-coupling flags."""

    Gamma: dict[str, float]
    M: dict[str, float]
    Gamma_bar: dict[str, float]
    critical_coupling: dict[str, bool]
    detuning: float


def derive_rates(sys: RingSystem,
                 rel_tol: float = CRITICAL_COUPLING_RTOL) -> DerivedRates:
    """Compute Gamma_J, M_J, Gamma_bar_J and flag critically coupled modes.

    A mode is critically coupled when |Gamma_J - M_J| <= rel_tol * Gamma_bar_J,
    i.e. loss and channel coupling balance and on-resonance transmission
    through the device vanishes.
    """
    gamma = {j: sys.Gamma(j) for j in MODES}
    m = {j: sys.M(j) for j in MODES}
    gbar = {j: gamma[j] + m[j] for j in MODES}
    crit = {j: abs(gamma[j] - m[j]) <= rel_tol * gbar[j] for j in MODES}
    return DerivedRates(gamma, m, gbar, crit, sys.detuning)


def detuning(sys: RingSystem) -> float:
    """omega_S + omega_I - 2 omega_P [rad/s]."""
    return sys.detuning


@dataclass(frozen=True)
class MaterialEstimate:
    """Inputs for the crude single-mode estimate of the nonlinear couplings.

    Attributes
    ----------
    chi3 : float
        Third-order susceptibility [m^2/V^2].
    n : float
        Refractive index of the ring.
    Omega_ring : float
        Ring mode volume [m^3].
    omega_P : float
        Pump angular frequency [rad/s].
    """

    chi3: float
    n: float
    Omega_ring: float
    omega_P: float

    def __post_init__(self) -> None:
        if not self.n > 0:
            raise InvalidParameterError(f"n must be positive, got {self.n}")
        if not self.Omega_ring > 0:
            raise InvalidParameterError(
                f"Omega_ring must be positive, got {self.Omega_ring}")


@dataclass(frozen=True)
class NonlinearCouplings:
    """Estimated nonlinear coefficients [rad/s]."""

    lambda_fwm: float
    eta_spm: float
    zeta_xpm: float


def estimate_nonlinear_couplings(m: MaterialEstimate) -> NonlinearCouplings:
    """Single-uniform-mode estimate of the chi(3) couplings:

        lambda = 3 hbar omega_P^2 chi3 / (4 epsilon_0 n^4 Omega_ring),
        eta = lambda / 2,   zeta = 2 lambda.
    """
    lam = 3.0 * HBAR * m.omega_P ** 2 * m.chi3 / (
        4.0 * EPSILON_0 * m.n ** 4 * m.Omega_ring)
    return NonlinearCouplings(lam, lam / 2.0, 2.0 * lam)
