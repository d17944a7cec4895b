"""Time integration of the dimer equations in both charts.

A single adaptive embedded Runge-Kutta 5(4) pair (Dormand-Prince
coefficients, FSAL) drives both the (z, theta) phase chart and the complex
amplitude chart.  Steps are clipped so that every output sample is a genuine
step endpoint: conservation diagnostics then measure the integrator itself,
with no interpolation error mixed in.  Energy (and, in the amplitude chart,
norm) is recorded at every sample; the maximum drift is a first-class
diagnostic and is never silently corrected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    TWO_PI,
    AmplitudePair,
    DimerParams,
    PhasePoint,
    Z_ENDPOINT_GUARD,
    amplitude_hamiltonian,
    hamiltonian_raw,
)
from .errors import EndpointSingularity, StepUnderflow

#: default spacing of output samples in rescaled time
DEFAULT_SAMPLE_STRIDE = 0.01

#: |z| at or beyond this aborts phase-chart integration (ChartEscape)
ESCAPE_THRESHOLD = 1.0 - 10.0 * Z_ENDPOINT_GUARD

#: hard floor on the internal step size
MIN_STEP = 1e-14

# Dormand-Prince 5(4) tableau
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
# fifth-minus-fourth-order weights: h * sum(_ERR[i] * k[i]) estimates the local error
_ERR = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)

_SAFETY = 0.9
# the controller aims below tol so accepted-step errors keep a wide margin
_ERR_TARGET_FRACTION = 0.05


class _StageFailure(Exception):
    """A Runge-Kutta stage left the chart domain; reject and halve the step."""


@dataclass
class Trajectory:
    """Sampled solution of one integration run.

    states is (n, 2): float columns (z, theta) for the phase chart, complex
    columns (a_R, a_L) for the amplitude chart.  energies holds H for the
    phase chart and H_amp for the amplitude chart.  escaped marks a partial
    phase-chart trajectory that hit |z| >= ESCAPE_THRESHOLD; the caller
    should re-run in the amplitude chart.
    """

    chart: str  # "phase" | "amplitude"
    times: np.ndarray
    states: np.ndarray
    energies: np.ndarray
    norms: np.ndarray | None
    energy_drift: float
    norm_drift: float | None
    escaped: bool = False

    def imbalance(self) -> np.ndarray:
        """z(tau) regardless of chart."""
        if self.chart == "phase":
            return self.states[:, 0].real.copy()
        return np.abs(self.states[:, 0]) ** 2 - np.abs(self.states[:, 1]) ** 2

    def phase_coordinates(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(z, theta, theta_defined) per sample; theta is 0 where undefined."""
        if self.chart == "phase":
            z = self.states[:, 0].real
            return z.copy(), self.states[:, 1].real.copy(), np.ones(z.size, dtype=bool)
        a_r, a_l = self.states[:, 0], self.states[:, 1]
        z = np.clip(np.abs(a_r) ** 2 - np.abs(a_l) ** 2, -1.0, 1.0)
        defined = (np.abs(a_r) > Z_ENDPOINT_GUARD) & (np.abs(a_l) > Z_ENDPOINT_GUARD)
        theta = np.where(defined, (np.angle(a_r) - np.angle(a_l)) % TWO_PI, 0.0)
        return z, theta, defined


def _advance(rhs, y0, tau_end, dt_init, tol, stride, escape=None, post_output=None):
    """Shared adaptive 5(4) loop; returns (times, states, escaped)."""
    n = len(y0)
    t = 0.0
    y = list(y0)
    k = [None] * 7
    k[0] = rhs(y)
    times = [0.0]
    states = [tuple(y)]
    iout = 1
    h = dt_init
    err_target = _ERR_TARGET_FRACTION * tol
    escaped = False
    while True:
        t_next = min(iout * stride, tau_end)
        h = min(h, t_next - t)
        # attempt steps until one passes the error test
        while True:
            if h < MIN_STEP:
                raise StepUnderflow(f"step size underflow at tau = {t!r}")
            failed = False
            for i in range(1, 7):
                yi = list(y)
                row = _A[i]
                for j in range(i):
                    a = row[j]
                    if a != 0.0:
                        kj = k[j]
                        for m in range(n):
                            yi[m] += h * a * kj[m]
                try:
                    k[i] = rhs(yi)
                except _StageFailure:
                    failed = True
                    break
            if failed:
                h *= 0.5
                continue
            err = 0.0
            for m in range(n):
                e = 0.0
                for i in range(7):
                    w = _ERR[i]
                    if w != 0.0:
                        e += w * k[i][m]
                e = abs(h * e)
                if e > err:
                    err = e
            if err <= tol:
                break
            h *= max(0.2, _SAFETY * (err_target / err) ** 0.2)
        y_new = list(y)
        for i in range(7):
            b = _B5[i]
            if b != 0.0:
                ki = k[i]
                for m in range(n):
                    y_new[m] += h * b * ki[m]
        hit_output = h >= t_next - t - 1e-15 * max(1.0, t_next)
        t = t_next if hit_output else t + h
        y = y_new
        k[0] = k[6]  # FSAL
        if escape is not None and escape(y):
            escaped = True
            break
        if hit_output:
            if post_output is not None:
                y = list(post_output(y))
                k[0] = rhs(y)
            times.append(t)
            states.append(tuple(y))
            if t_next >= tau_end - 1e-15 * max(1.0, tau_end):
                break
            iout += 1
        if err > 0.0:
            h *= min(5.0, max(0.2, _SAFETY * (err_target / err) ** 0.2))
        else:
            h *= 5.0
    return times, states, escaped


def _check_common(tau_end: float, dt_init: float, tol: float) -> None:
    if not tau_end > 0.0:
        raise ValueError(f"tau_end must be > 0, got {tau_end!r}")
    if not dt_init > 0.0:
        raise ValueError(f"dt_init must be > 0, got {dt_init!r}")
    if not 1e-14 <= tol <= 1e-6:
        raise ValueError(f"tol must lie in [1e-14, 1e-6], got {tol!r}")


def integrate_phase(
    p0: PhasePoint,
    params: DimerParams,
    tau_end: float,
    dt_init: float = 1e-3,
    tol: float = 1e-10,
    sample_stride: float = DEFAULT_SAMPLE_STRIDE,
    reverse: bool = False,
) -> Trajectory:
    """Integrate (z, theta) under the reduced Hamiltonian flow.

    theta is integrated unwrapped and stored wrapped into [0, 2*pi).  If any
    step drives |z| to within the escape threshold of a pole the run stops
    and the partial trajectory is returned with escaped=True.  reverse=True
    integrates the time-reversed flow (both derivatives negated).
    """
    _check_common(tau_end, dt_init, tol)
    if abs(p0.z) > ESCAPE_THRESHOLD:
        raise EndpointSingularity(
            f"initial z = {p0.z!r} is inside the endpoint guard; use the amplitude chart"
        )
    mu, eta = params.mu, params.eta
    two_mu = 2.0 ** mu
    sgn = -1.0 if reverse else 1.0

    def rhs(y):
        z, th = y
        one = 1.0 - z * z
        if one <= 1e-22:
            raise _StageFailure
        root = math.sqrt(one)
        dz = 2.0 * root * math.sin(th)
        dth = -2.0 * z * math.cos(th) / root - eta * ((1.0 + z) ** mu - (1.0 - z) ** mu) / two_mu
        return (sgn * dz, sgn * dth)

    times, raw, escaped = _advance(
        rhs, (p0.z, p0.theta), tau_end, dt_init, tol, sample_stride,
        escape=lambda y: abs(y[0]) >= ESCAPE_THRESHOLD,
    )
    zs = np.clip(np.array([s[0] for s in raw]), -1.0, 1.0)
    ths = np.array([s[1] for s in raw])
    energies = np.array([hamiltonian_raw(z, th, mu, eta) for z, th in zip(zs, ths)])
    states = np.column_stack([zs, ths % TWO_PI])
    drift = float(np.max(np.abs(energies - energies[0])))
    return Trajectory("phase", np.array(times), states, energies, None, drift, None, escaped)


def integrate_amplitudes(
    a0: AmplitudePair,
    params: DimerParams,
    tau_end: float,
    dt_init: float = 1e-3,
    tol: float = 1e-10,
    sample_stride: float = DEFAULT_SAMPLE_STRIDE,
    reverse: bool = False,
    renormalize: bool = False,
) -> Trajectory:
    """Integrate the complex amplitude equations (4 real components).

    Norm and energy are recorded at every sample.  By default the state is
    never renormalized, so norm_drift measures the integrator honestly;
    renormalize=True projects the state back to the unit sphere at each
    output sample instead.
    """
    _check_common(tau_end, dt_init, tol)
    mu, eta = params.mu, params.eta
    sgn = -1.0 if reverse else 1.0

    def rhs(y):
        xr, yr, xl, yl = y
        m_r = (xr * xr + yr * yr) ** mu
        m_l = (xl * xl + yl * yl) ** mu
        return (
            sgn * (-yl + eta * m_r * yr),
            sgn * (xl - eta * m_r * xr),
            sgn * (-yr + eta * m_l * yl),
            sgn * (xr - eta * m_l * xl),
        )

    def unit_sphere(y):
        s = 1.0 / math.sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2] + y[3] * y[3])
        return (y[0] * s, y[1] * s, y[2] * s, y[3] * s)

    y0 = (a0.a_R.real, a0.a_R.imag, a0.a_L.real, a0.a_L.imag)
    times, raw, _ = _advance(rhs, y0, tau_end, dt_init, tol, sample_stride,
                             post_output=unit_sphere if renormalize else None)
    arr = np.array(raw)
    states = np.column_stack([arr[:, 0] + 1j * arr[:, 1], arr[:, 2] + 1j * arr[:, 3]])
    norms = np.abs(states[:, 0]) ** 2 + np.abs(states[:, 1]) ** 2
    p2 = 2.0 * mu + 2.0
    energies = (-2.0 * (np.conj(states[:, 0]) * states[:, 1]).real
                + eta * (np.abs(states[:, 0]) ** p2 + np.abs(states[:, 1]) ** p2) / (mu + 1.0))
    drift = float(np.max(np.abs(energies - energies[0])))
    ndrift = float(np.max(np.abs(norms - norms[0])))
    return Trajectory("amplitude", np.array(times), states, energies, norms, drift, ndrift)


#: |z| must leave this band before zero crossings are counted
CROSSING_DEADBAND = 1e-8


def beating_period(traj: Trajectory) -> float | None:
    """Mean spacing of upward zero crossings of z(tau), or None.

    Crossing times are linearly interpolated.  Self-trapped trajectories
    (z never changes sign) and stationary ones have no upward crossings and
    yield None, as do runs too short to contain two of them.
    """
    z = traj.imbalance()
    t = traj.times
    crossings = []
    armed = z[0] < -CROSSING_DEADBAND
    for i in range(1, z.size):
        if z[i] < -CROSSING_DEADBAND:
            armed = True
        elif z[i] > CROSSING_DEADBAND and armed:
            # locate the sign flip nearest this exit from the deadband
            j = i
            while j > 0 and z[j - 1] > 0.0:
                j -= 1
            if j > 0:
                frac = -z[j - 1] / (z[j] - z[j - 1])
                crossings.append(t[j - 1] + frac * (t[j] - t[j - 1]))
            armed = False
    if len(crossings) < 2:
        return None
    return float(np.mean(np.diff(crossings)))
