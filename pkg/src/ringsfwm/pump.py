"""Incoming pump pulse and the intracavity semiclassical pump amplitude.

The incoming coherent amplitude alpha_P(kappa) is normalized so that
integral |alpha_P(kappa)|^2 dkappa is the mean photon number of the
incoming pulse; the intracavity envelope beta_P(t) is then a photon-number
amplitude, which is the natural argument of the SPM/XPM terms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.interpolate import CubicSpline

from .errors import CoverageError, InvalidParameterError
from .model import RingSystem
from .numerics import (
    SpectralGrid,
    TimeGrid,
    dft_time_to_kappa,
    ode_solve,
    suggested_half_width,
    trapezoid_weights,
)

__all__ = [
    "PumpSpec",
    "PumpField",
    "incoming_spectrum",
    "intracavity_spectrum",
    "pump_time_evolution",
    "default_time_grid",
    "default_pump_grid",
]

_SQRT_2PI = np.sqrt(2.0 * np.pi)


@dataclass(frozen=True)
class PumpSpec:
    """Incoming pump pulse description.

    kind "gaussian": alpha_P(kappa) = amplitude * exp(-(kappa v_P sigma/2)^2)
    with duration sigma [s].  kind "tabulated": alpha_P sampled on
    table_kappas (uniform, decayed at the edges).
    """

    kind: str
    amplitude: complex = 1.0 + 0j
    duration: float | None = None
    table_kappas: NDArray | None = None
    table_values: NDArray | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("gaussian", "tabulated"):
            raise InvalidParameterError(f"unknown pump kind {self.kind!r}")
        if self.kind == "gaussian":
            if self.duration is None or not self.duration > 0:
                raise InvalidParameterError(
                    f"gaussian pump needs duration > 0, got {self.duration}")
        else:
            if self.table_kappas is None or self.table_values is None:
                raise InvalidParameterError("tabulated pump needs a table")
            k = np.asarray(self.table_kappas, dtype=float)
            a = np.asarray(self.table_values, dtype=complex)
            if k.shape != a.shape or k.ndim != 1 or len(k) < 8:
                raise InvalidParameterError("pump table shape mismatch")
            if not (np.all(np.isfinite(k)) and np.all(np.isfinite(a))):
                raise InvalidParameterError("pump table has non-finite entries")
            peak = np.max(np.abs(a))
            if peak > 0 and max(abs(a[0]), abs(a[-1])) > 1e-6 * peak:
                raise InvalidParameterError(
                    "tabulated pump spectrum has not decayed at table edges")
            object.__setattr__(self, "table_kappas", k)
            object.__setattr__(self, "table_values", a)


@dataclass(frozen=True)
class PumpField:
    """Intracavity semiclassical pump amplitude in both domains.

    spectrum samples beta_P(kappa) on spectral_grid; envelope samples
    beta_P(t) on time_grid.  photon_number is |beta_P(t)|^2, the mean
    intracavity photon-number history.
    """

    spectral_grid: SpectralGrid
    spectrum: NDArray[np.complex128]
    time_grid: TimeGrid
    envelope: NDArray[np.complex128]
    v_P: float

    @property
    def photon_number(self) -> NDArray[np.float64]:
        return np.abs(self.envelope) ** 2

    def envelope_interpolator(self) -> CubicSpline:
        """Cubic-spline interpolant of beta_P(t) on the stored time grid."""
        return CubicSpline(self.time_grid.times, self.envelope)

    def spectrum_interpolator(self) -> CubicSpline:
        """Cubic-spline interpolant of beta_P(kappa); zero outside the grid."""
        return CubicSpline(self.spectral_grid.points, self.spectrum,
                           extrapolate=False)


def _sinc_resample(kappas_in: NDArray, values_in: NDArray,
                   kappas_out: NDArray) -> NDArray[np.complex128]:
    """Whittaker (band-limited) interpolation from one uniform grid to
    arbitrary points; zero outside the source grid support."""
    dk = kappas_in[1] - kappas_in[0]
    args = (kappas_out[:, None] - kappas_in[None, :]) / dk
    out = np.sinc(args) @ values_in
    out[(kappas_out < kappas_in[0]) | (kappas_out > kappas_in[-1])] = 0.0
    return out


def incoming_spectrum(sys: RingSystem, spec: PumpSpec,
                      grid: SpectralGrid) -> NDArray[np.complex128]:
    """Sample the incoming pump amplitude alpha_P(kappa) on the grid.

    Raises CoverageError if the grid does not span the pump bandwidth
    (+-6/(v_P sigma) for the gaussian kind, the table support otherwise).
    """
    kappas = grid.points
    if spec.kind == "gaussian":
        needed = 6.0 / (sys.v_P * spec.duration)
        if grid.half_width < needed:
            raise CoverageError(
                f"grid half_width {grid.half_width:.3e} rad/m does not cover "
                f"the pump bandwidth; need >= {needed:.3e} rad/m")
        return spec.amplitude * np.exp(
            -(kappas * sys.v_P * spec.duration / 2.0) ** 2) + 0j
    support = np.abs(spec.table_values) > 1e-9 * np.max(np.abs(spec.table_values))
    if np.any(support):
        k_lo = spec.table_kappas[support][0]
        k_hi = spec.table_kappas[support][-1]
        if kappas[0] > k_lo or kappas[-1] < k_hi:
            raise CoverageError("grid does not cover the tabulated pump support")
    return _sinc_resample(spec.table_kappas, spec.table_values, kappas)


def intracavity_spectrum(sys: RingSystem,
                         kappas: NDArray,
                         alpha: NDArray) -> NDArray[np.complex128]:
    """Lorentzian-filtered intracavity pump spectrum (linear, eta = 0):

        beta_P(kappa) = -i gamma_P^* alpha_P(kappa) / (-i kappa v_P + Gamma_bar_P)

    Valid for an undepleted pump with vacuum in the loss channel.
    """
    kappas = np.asarray(kappas, dtype=float)
    den = -1j * kappas * sys.v_P + sys.Gamma_bar("P")
    return -1j * np.conj(sys.gamma_P) * np.asarray(alpha, dtype=complex) / den


def default_time_grid(sys: RingSystem, spec: PumpSpec,
                      steps_per_scale: int = 24,
                      max_steps: int = 200_000) -> TimeGrid:
    """Time window with vacuum at the start (drive < 1e-6 of peak at t0)
    and a decayed tail: [-6 sigma, 4 sigma + 14/Gamma_bar_P]."""
    gbar = sys.Gamma_bar("P")
    if spec.kind == "gaussian":
        sigma = spec.duration
    else:
        # Tabulated spectra: infer a duration scale from the table bandwidth.
        a = np.abs(spec.table_values)
        k = spec.table_kappas
        mean = np.sum(k * a ** 2) / np.sum(a ** 2)
        rms = np.sqrt(np.sum((k - mean) ** 2 * a ** 2) / np.sum(a ** 2))
        sigma = 1.0 / (rms * sys.v_P)
    t0 = -6.0 * sigma
    t1 = 4.0 * sigma + 14.0 / gbar
    dt = min(sigma, 1.0 / gbar) / steps_per_scale
    n = min(int(np.ceil((t1 - t0) / dt)), max_steps)
    return TimeGrid(t0, t1, n)


def default_pump_grid(sys: RingSystem, spec: PumpSpec,
                      n_points: int = 1024) -> SpectralGrid:
    """Default kappa grid for the pump spectrum.

    The intracavity spectrum inherits the Gaussian decay of the incoming
    pulse, so the grid only needs to cover the pulse bandwidth; tying it
    to the (possibly much wider) ring linewidth would waste resolution
    where the spectrum is negligible.
    """
    if spec.kind == "gaussian":
        half_width = 12.0 / (sys.v_P * spec.duration)
    else:
        k = spec.table_kappas
        half_width = max(abs(k[0]), abs(k[-1]))
    return SpectralGrid(half_width, n_points)


def _drive_callable(sys: RingSystem, spec: PumpSpec):
    """Incoming channel drive psi_P<(0, t) synthesized from alpha_P(kappa).

    For the gaussian kind the transform is analytic:
    psi(t) = amplitude * sqrt(2)/(v_P sigma) * exp(-t^2/sigma^2).
    """
    if spec.kind == "gaussian":
        amp = spec.amplitude * np.sqrt(2.0) / (sys.v_P * spec.duration)
        sigma = spec.duration

        def drive(t):
            return amp * np.exp(-(t / sigma) ** 2)

        return drive

    kappas = spec.table_kappas
    values = spec.table_values
    w = trapezoid_weights(len(kappas), kappas[1] - kappas[0]) * values

    def drive(t):
        return np.exp(-1j * kappas * sys.v_P * t) @ w / _SQRT_2PI

    return drive


def pump_time_evolution(sys: RingSystem, spec: PumpSpec,
                        grid: TimeGrid | None = None,
                        spectral_grid: SpectralGrid | None = None) -> PumpField:
    """Integrate the semiclassical undepleted pump envelope

        d beta/dt = -(Gamma_bar_P + 2 i eta |beta|^2) beta
                    - i gamma_P^* psi_P<(0, t)

    from a vacuum initial condition and return both representations.
    With eta = 0 the resulting spectrum matches intracavity_spectrum to
    the transform tolerance.
    """
    if grid is None:
        grid = default_time_grid(sys, spec)
    if spectral_grid is None:
        spectral_grid = default_pump_grid(sys, spec)
    drive = _drive_callable(sys, spec)
    peak = abs(drive(0.0))
    for t_edge in (grid.t0,):
        if peak > 0 and abs(drive(t_edge)) > 1e-6 * peak:
            raise CoverageError(
                "time grid starts inside the pump pulse; the vacuum initial "
                "condition would be violated (drive(t0) > 1e-6 of peak)")
    gbar = sys.Gamma_bar("P")
    eta = sys.eta_spm
    g_conj = np.conj(sys.gamma_P)

    def rhs(t, y):
        return -(gbar + 2j * eta * (y * np.conj(y))) * y - 1j * g_conj * drive(t)

    sol = ode_solve(rhs, grid, 0.0 + 0.0j)
    envelope = sol.states
    spectrum = dft_time_to_kappa(envelope, sol.times, spectral_grid.points,
                                 sys.v_P)
    return PumpField(spectral_grid, spectrum, grid, envelope, sys.v_P)
