"""Time-domain Green-function machinery: the linearized signal/idler
drive matrix under a classical pump (including cross-phase modulation),
the 2x2 propagator G(t, t') of the resulting linear system, and the
assembly of the time-domain pair amplitude S(kappa, kappa') for
comparison with the perturbative frequency-domain path.

The propagated vector is (b_S, b_I^dagger) in the rotating frame, so a
nonzero pair coupling lambda mixes annihilation and creation sectors and
G is generally non-unitary even before damping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .errors import (
    AccuracyError,
    CoverageError,
    DivergenceError,
    InvalidParameterError,
)
from .model import RingSystem
from .numerics import Grid2D, SpectralGrid, TimeGrid, trapezoid_weights
from .pump import PumpField

__all__ = [
    "DriveMatrix",
    "PropagatorTable",
    "build_drive_matrix",
    "solve_propagator",
    "propagator_between",
    "pair_amplitude_time_domain",
]


@dataclass(frozen=True)
class DriveMatrix:
    """Time-dependent matrix M(t) of the linearized ring equations
    d/dt (b_S, b_I^dag) = M(t) (b_S, b_I^dag) + D(t):

        M11 = -Gbar_S - i zeta |beta(t)|^2
        M12 = -i lambda beta(t)^2 e^{+i Delta t}
        M21 = +i lambda^* beta^*(t)^2 e^{-i Delta t}
        M22 = -Gbar_I + i zeta^* |beta(t)|^2

    beta is the intracavity pump amplitude; outside its sampled span it
    is taken to be zero (the pump grid is required to cover any time at
    which it is non-negligible).
    """

    Gamma_bar_S: float
    Gamma_bar_I: float
    lambda_fwm: complex
    zeta_xpm: complex
    delta: float
    t_span: tuple[float, float]
    _beta: object = field(repr=False)

    def beta(self, t) -> NDArray[np.complex128]:
        """Intracavity pump amplitude at time t [s], zero outside the
        sampled pump span."""
        t = np.asarray(t, dtype=float)
        out = np.asarray(self._beta(t), dtype=complex)
        return np.where((t >= self.t_span[0]) & (t <= self.t_span[1]),
                        out, 0.0)

    def __call__(self, t) -> NDArray[np.complex128]:
        """M(t); scalar t gives shape (2, 2), array t shape t.shape+(2, 2)."""
        t = np.asarray(t, dtype=float)
        b = self.beta(t)
        b2 = b * b
        absb2 = np.abs(b) ** 2
        phase = np.exp(1j * self.delta * t)
        m = np.empty(t.shape + (2, 2), dtype=complex)
        m[..., 0, 0] = -self.Gamma_bar_S - 1j * self.zeta_xpm * absb2
        m[..., 0, 1] = -1j * self.lambda_fwm * b2 * phase
        m[..., 1, 0] = (1j * np.conj(self.lambda_fwm) * np.conj(b2)
                        / phase)
        m[..., 1, 1] = -self.Gamma_bar_I + 1j * np.conj(self.zeta_xpm) * absb2
        return m


def build_drive_matrix(sys: RingSystem, pump: PumpField) -> DriveMatrix:
    """Assemble M(t) from the system rates and a solved pump field."""
    interp = pump.envelope_interpolator()
    t = pump.time_grid.times
    return DriveMatrix(
        Gamma_bar_S=sys.Gamma_bar("S"),
        Gamma_bar_I=sys.Gamma_bar("I"),
        lambda_fwm=sys.lambda_fwm,
        zeta_xpm=sys.zeta_xpm,
        delta=sys.detuning,
        t_span=(float(t[0]), float(t[-1])),
        _beta=interp,
    )


def _rk4_matrix_steps(M: DriveMatrix, times: NDArray[np.float64]
                      ) -> NDArray[np.complex128]:
    """One-step propagators U_n = G(t_{n+1}, t_n) for every grid step,
    by one classical RK4 step of dG/dt = M(t) G from G = I, batched over
    steps."""
    t0 = times[:-1]
    dt = np.diff(times)
    m0 = M(t0)
    m1 = M(t0 + 0.5 * dt)
    m2 = M(t0 + dt)
    h = dt[:, None, None]
    eye = np.broadcast_to(np.eye(2, dtype=complex), m0.shape)
    k1 = m0
    k2 = m1 @ (eye + 0.5 * h * k1)
    k3 = m1 @ (eye + 0.5 * h * k2)
    k4 = m2 @ (eye + h * k3)
    return eye + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@dataclass(frozen=True)
class PropagatorTable:
    """Propagators of d/dt G(t, t') = M(t) G(t, t'), G(t', t') = I,
    sampled on a time grid.

    Only the one-step factors U_n = G(t_{n+1}, t_n) are stored; any
    ordered pair follows from the semigroup property
    G(t_m, t_n) = U_{m-1} ... U_n.
    """

    grid: TimeGrid
    steps: NDArray[np.complex128]
    error_estimate: float

    def __post_init__(self):
        if not np.all(np.isfinite(self.steps)):
            raise DivergenceError("propagator table contains non-finite "
                                  "entries")

    def propagator(self, m: int, n: int) -> NDArray[np.complex128]:
        """G(t_m, t_n) for grid indices m >= n."""
        if m < n:
            raise InvalidParameterError(
                f"propagator requires m >= n, got m={m}, n={n}")
        g = np.eye(2, dtype=complex)
        for idx in range(n, m):
            g = self.steps[idx] @ g
        return g

    def column(self, n: int) -> NDArray[np.complex128]:
        """All G(t_m, t_n) for m >= n, shape (n_times - n, 2, 2)."""
        n_times = len(self.grid.times)
        out = np.empty((n_times - n, 2, 2), dtype=complex)
        out[0] = np.eye(2, dtype=complex)
        for i, idx in enumerate(range(n, n_times - 1), start=1):
            out[i] = self.steps[idx] @ out[i - 1]
        return out

    def first_column_tables(self) -> tuple[NDArray[np.complex128],
                                           NDArray[np.complex128]]:
        """Lower-triangular tables of the first column of G: arrays
        (G11, G21) with element [m, n] = component of G(t_m, t_n) acting
        on (1, 0), zero above the diagonal.

        Built by one recursion over the later time, O(n_times^2) work.
        """
        n_times = len(self.grid.times)
        g11 = np.zeros((n_times, n_times), dtype=complex)
        g21 = np.zeros((n_times, n_times), dtype=complex)
        c1 = np.ones(n_times, dtype=complex)
        c2 = np.zeros(n_times, dtype=complex)
        g11[np.diag_indices(n_times)] = 1.0
        for m in range(1, n_times):
            u = self.steps[m - 1]
            c1_new = u[0, 0] * c1[:m] + u[0, 1] * c2[:m]
            c2_new = u[1, 0] * c1[:m] + u[1, 1] * c2[:m]
            c1[:m] = c1_new
            c2[:m] = c2_new
            g11[m, :m] = c1[:m]
            g21[m, :m] = c2[:m]
        return g11, g21


def solve_propagator(M: DriveMatrix, grid: TimeGrid,
                     tol: float = 1e-7) -> PropagatorTable:
    """Integrate the propagator ODE over the grid with fixed-step RK4.

    Each step is also taken as two half-steps; the largest discrepancy,
    scaled by the usual 1/(2^4 - 1) Richardson factor, is the reported
    error estimate.  An estimate above tol raises AccuracyError.
    """
    times = grid.times
    full = _rk4_matrix_steps(M, times)
    mids = 0.5 * (times[:-1] + times[1:])
    t_half = np.empty(2 * len(mids) + 1)
    t_half[0::2] = times
    t_half[1::2] = mids
    halves = _rk4_matrix_steps(M, t_half)
    combined = halves[1::2] @ halves[0::2]
    err = float(np.max(np.abs(combined - full))) / 15.0
    if err > tol:
        raise AccuracyError(
            f"propagator step error estimate {err:.3e} exceeds tol={tol}; "
            "refine the time grid", error_estimate=err)
    return PropagatorTable(grid, combined, err)


def propagator_between(M: DriveMatrix, t0: float, t1: float,
                       n_steps: int = 512) -> NDArray[np.complex128]:
    """G(t1, t0) by direct fixed-step RK4 on [t0, t1], independent of any
    table; intended as a cross-check oracle."""
    if t1 < t0:
        raise InvalidParameterError("propagator_between requires t1 >= t0")
    if t1 == t0:
        return np.eye(2, dtype=complex)
    times = np.linspace(t0, t1, n_steps + 1)
    steps = _rk4_matrix_steps(M, times)
    g = np.eye(2, dtype=complex)
    for u in steps:
        g = u @ g
    return g


def pair_amplitude_time_domain(sys: RingSystem, pump: PumpField,
                               table: PropagatorTable,
                               axis_s: SpectralGrid, axis_i: SpectralGrid,
                               check_resolution: bool = False,
                               resolution_rtol: float = 5e-3) -> Grid2D:
    """Time-domain pair amplitude S(kappa, kappa') = <c_S(kappa) c_I(kappa')>.

    Expanding the outgoing channel operators c_J = a_J - (i gamma_J / v_J)
    b_J, inserting the Green-function solution with the homogeneous term
    dropped (vacuum, drive-free start), and contracting against the
    white-noise vacuum correlators leaves two terms:

        S = (gamma_S gamma_I / 2 pi) * (T2 - 2 Gbar_S T4)

        T2(k, k') = int dt' e^{i k' v_I t'} int_{t0}^{t'} dt
                    e^{i k v_S t} conj(G21)(t', t)
        T4(k, k') = int dt e^{i k v_S t} int dt' e^{i k' v_I t'}
                    int_{t0}^{min(t, t')} ds G11(t, s) conj(G21)(t', s)

    (the aa and b a contractions vanish on vacuum).  Both terms are
    evaluated by trapezoid sums arranged as matrix products, O(n_t^2 n_k).

    With check_resolution the amplitude is recomputed from every second
    grid time and the peak deviation must stay below resolution_rtol.
    """
    times = table.grid.times
    n_t = len(times)
    dt = table.grid.dt
    ks = axis_s.points
    ki = axis_i.points

    g11, g21 = table.first_column_tables()
    a = np.conj(g21)

    def assemble(times, dt, g11, a):
        n_t = len(times)
        w = trapezoid_weights(n_t, dt)
        e_s = np.exp(1j * np.outer(times, ks) * sys.v_S)
        e_i = np.exp(1j * np.outer(times, ki) * sys.v_I)

        # T2: inner trapezoid over t in [t0, t'] needs half weight at both
        # ends.  The full-grid weights already halve t = t0; the upper
        # edge t = t' multiplies conj(G21)(t', t') = 0, and entries with
        # t > t' vanish by triangularity, so full-grid weights are exact.
        a_w = a * w[None, :]
        t2 = e_s.T @ a_w.T @ (e_i * w[:, None])

        # T4: outer integrals over t and t' carry full trapezoid weights;
        # the inner s trapezoid has half weight at s = t0 and at
        # s = min(t, t'), the latter realized by halving the diagonal of
        # G11 (G11(s, s) = 1) and relying on conj(G21)(s, s) = 0.
        g11_h = g11.copy()
        g11_h[np.diag_indices(n_t)] *= 0.5
        h1 = (g11_h * w[:, None]).T @ e_s      # [s, k]
        h2 = a.T @ (e_i * w[:, None])          # [s, k']
        w_s = np.full(n_t, dt)
        w_s[0] *= 0.5
        t4 = (h1 * w_s[:, None]).T @ h2
        return t2, t4

    t2, t4 = assemble(times, dt, g11, a)
    pref = sys.gamma_S * sys.gamma_I / (2.0 * np.pi)
    values = pref * (t2 - 2.0 * sys.Gamma_bar("S") * t4)

    if check_resolution:
        if (n_t - 1) % 2 != 0:
            raise InvalidParameterError(
                "resolution check requires an even number of time steps")
        sub = slice(0, n_t, 2)
        t2c, t4c = assemble(times[sub], 2.0 * dt, g11[sub, sub], a[sub, sub])
        coarse = pref * (t2c - 2.0 * sys.Gamma_bar("S") * t4c)
        peak = float(np.max(np.abs(values)))
        if peak > 0.0:
            dev = float(np.max(np.abs(coarse - values))) / peak
            if dev > resolution_rtol:
                raise AccuracyError(
                    "time grid under-resolves the pair amplitude "
                    f"(halving-grid deviation {dev:.2e})",
                    error_estimate=dev)

    return Grid2D(axis_s, axis_i, values)
