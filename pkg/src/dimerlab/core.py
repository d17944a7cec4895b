"""Closed-form mathematics of the two-mode (dimer) model.

Everything in this module is a pure function of its inputs: the reduced
Hamiltonian on the (z, theta) cylinder, its vector field, the stationarity
functions f_+/f_-, the branch function eta(z) with its critical constants
(eta_star, eta_plus, mu_threshold), and the maps between the imbalance/phase
chart and the complex amplitude chart.

Conventions: z is the population imbalance in [-1, +1], theta the relative
phase in [0, 2*pi), mu > 0 the nonlinearity power and eta > 0 the
dimensionless nonlinear strength.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConvergenceFailure, DomainError, EndpointSingularity

#: |z| within this distance of 1 counts as a chart endpoint (pole).
Z_ENDPOINT_GUARD = 1e-12

#: tolerance on |a_R|^2 + |a_L|^2 = 1 at AmplitudePair construction
UNIT_NORM_TOL = 1e-12

TWO_PI = 2.0 * math.pi

#: universal critical nonlinearity power, positive root of mu^2 - 3*mu - 1
MU_THRESHOLD = (3.0 + math.sqrt(13.0)) / 2.0


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DimerParams:
    """Model parameters: nonlinearity power mu > 0 and strength eta > 0."""

    mu: float
    eta: float

    def __post_init__(self):
        if not (math.isfinite(self.mu) and self.mu > 0.0):
            raise ValueError(f"mu must be finite and > 0, got {self.mu!r}")
        if not (math.isfinite(self.eta) and self.eta > 0.0):
            raise ValueError(f"eta must be finite and > 0, got {self.eta!r}")


@dataclass(frozen=True)
class PhasePoint:
    """Point on the reduced phase cylinder: imbalance z and phase theta.

    theta is normalized into [0, 2*pi) at construction; z must lie in
    [-1, +1].
    """

    z: float
    theta: float

    def __post_init__(self):
        if not (math.isfinite(self.z) and -1.0 <= self.z <= 1.0):
            raise ValueError(f"z must lie in [-1, 1], got {self.z!r}")
        if not math.isfinite(self.theta):
            raise ValueError(f"theta must be finite, got {self.theta!r}")
        object.__setattr__(self, "theta", self.theta % TWO_PI)


@dataclass(frozen=True)
class AmplitudePair:
    """Complex amplitudes (a_R, a_L) on the unit sphere."""

    a_R: complex
    a_L: complex

    def __post_init__(self):
        nrm = abs(self.a_R) ** 2 + abs(self.a_L) ** 2
        if not abs(nrm - 1.0) <= UNIT_NORM_TOL:
            raise ValueError(
                f"|a_R|^2 + |a_L|^2 must equal 1 within {UNIT_NORM_TOL:g}, got {nrm!r}"
            )


class StabilityTag(Enum):
    """Fixed-point type of the planar Hamiltonian flow."""

    CENTER = "center"        # neutrally stable
    SADDLE = "saddle"        # unstable
    DEGENERATE = "degenerate"  # classifying determinant within tolerance of 0


# ---------------------------------------------------------------------------
# raw scalar kernels (plain-float, reused by the integrators)
# ---------------------------------------------------------------------------

def hamiltonian_raw(z: float, theta: float, mu: float, eta: float) -> float:
    """H(z, theta) without type wrappers; exact at z = +-1."""
    pw = ((1.0 + z) ** (mu + 1.0) + (1.0 - z) ** (mu + 1.0)) / (2.0 ** mu * (mu + 1.0))
    return 2.0 * math.sqrt(1.0 - z * z) * math.cos(theta) - eta * pw


def vector_field_raw(z: float, theta: float, mu: float, eta: float) -> tuple[float, float]:
    """(dz/dtau, dtheta/dtau) without type wrappers; caller guards |z| < 1."""
    root = math.sqrt(1.0 - z * z)
    dz = 2.0 * root * math.sin(theta)
    dtheta = (-2.0 * z * math.cos(theta) / root
              - eta * ((1.0 + z) ** mu - (1.0 - z) ** mu) / 2.0 ** mu)
    return dz, dtheta


# ---------------------------------------------------------------------------
# Hamiltonian, vector field, stationarity functions
# ---------------------------------------------------------------------------

def hamiltonian(p: PhasePoint, params: DimerParams) -> float:
    """Energy H = 2*sqrt(1-z^2)*cos(theta) - eta*[(1+z)^(mu+1)+(1-z)^(mu+1)] / (2^mu*(mu+1))."""
    return hamiltonian_raw(p.z, p.theta, params.mu, params.eta)


def vector_field(p: PhasePoint, params: DimerParams) -> tuple[float, float]:
    """Hamiltonian vector field (dz/dtau, dtheta/dtau) = (-dH/dtheta, dH/dz).

    Raises EndpointSingularity within Z_ENDPOINT_GUARD of the poles, where
    dtheta/dtau diverges; switch to the amplitude chart there.
    """
    if abs(p.z) >= 1.0 - Z_ENDPOINT_GUARD:
        raise EndpointSingularity(f"vector field singular at z = {p.z!r}")
    return vector_field_raw(p.z, p.theta, params.mu, params.eta)


def f_pm(z, sign: str, params: DimerParams):
    """Stationarity function f_+/f_- = (-/+) 2z/sqrt(1-z^2) - eta*[(1+z)^mu-(1-z)^mu]/2^mu.

    f_pm(z, "plus", .) = 0 is the theta = 0 stationarity condition,
    f_pm(z, "minus", .) = 0 the theta = pi one.  Accepts scalars or arrays.
    """
    if sign == "plus":
        s = -1.0
    elif sign == "minus":
        s = 1.0
    else:
        raise ValueError(f"sign must be 'plus' or 'minus', got {sign!r}")
    z = np.asarray(z, dtype=float)
    if np.any(np.abs(z) >= 1.0 - Z_ENDPOINT_GUARD):
        raise EndpointSingularity("f_pm undefined within the endpoint guard of |z| = 1")
    mu, eta = params.mu, params.eta
    out = (s * 2.0 * z / np.sqrt(1.0 - z * z)
           - eta * ((1.0 + z) ** mu - (1.0 - z) ** mu) / 2.0 ** mu)
    return float(out) if out.ndim == 0 else out


def eta_of_z(z: float, mu: float) -> float:
    """Strength at which z is a theta = pi stationary imbalance.

    eta(z) = 2^(mu+1) * z / [sqrt(1-z^2) * ((1+z)^mu - (1-z)^mu)], extended
    evenly to negative z.  Undefined at z = 0 (limit is eta_star) and at the
    poles.
    """
    if mu <= 0.0:
        raise DomainError(f"mu must be > 0, got {mu!r}")
    if z == 0.0:
        raise DomainError("eta_of_z is undefined at z = 0; the z -> 0 limit is eta_star(mu)")
    z = abs(z)
    if z >= 1.0 - Z_ENDPOINT_GUARD:
        raise EndpointSingularity(f"eta_of_z singular at |z| = {z!r}")
    return 2.0 ** (mu + 1.0) * z / (math.sqrt(1.0 - z * z) * ((1.0 + z) ** mu - (1.0 - z) ** mu))


def eta_star(mu: float) -> float:
    """Pitchfork strength eta* = 2^mu / mu, the z -> 0 limit of eta_of_z."""
    if mu <= 0.0:
        raise DomainError(f"mu must be > 0, got {mu!r}")
    return 2.0 ** mu / mu


def mu_threshold() -> float:
    """Universal critical power (3 + sqrt(13))/2, the positive root of mu^2 - 3*mu - 1."""
    return MU_THRESHOLD


def d2eta_at_zero(mu: float) -> float:
    """Curvature d^2 eta/dz^2 of the branch function at z = 0.

    Equals 2^mu * (3*mu + 1 - mu^2) / (3*mu); positive below mu_threshold,
    negative above, zero exactly at it.
    """
    if mu <= 0.0:
        raise DomainError(f"mu must be > 0, got {mu!r}")
    return 2.0 ** mu * (3.0 * mu + 1.0 - mu * mu) / (3.0 * mu)


def g_func(z: float, mu: float) -> float:
    """g(z, mu) = (mu*z^2 - mu*z + 1) * (1+z)^mu on [-1, 1]."""
    if not -1.0 <= z <= 1.0:
        raise DomainError(f"z must lie in [-1, 1], got {z!r}")
    return (mu * z * z - mu * z + 1.0) * (1.0 + z) ** mu


def fold_condition(z: float, mu: float) -> float:
    """g(z, mu) - g(-z, mu); its root in (0, 1) is where d eta/dz vanishes."""
    return g_func(z, mu) - g_func(-z, mu)


def _golden_min(f, lo: float, hi: float, tol: float, max_iter: int) -> float:
    """Golden-section minimum of a unimodal f on [lo, hi], to interval width tol."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if hi - lo <= tol:
            return 0.5 * (lo + hi)
        if f1 > f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = f(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = f(x1)
    raise ConvergenceFailure(
        f"golden-section search did not reach width {tol:g} in {max_iter} iterations"
    )


def eta_plus(mu: float, *, z_tol: float = 1e-12, max_iter: int = 200) -> float | None:
    """Saddle-node strength: the interior minimum of eta_of_z over z in (0, 1).

    Exists only for mu > mu_threshold(); returns None otherwise (the infimum
    is then the z -> 0 limit eta_star).  Located by a 1e4-point coarse scan
    followed by golden-section refinement of the bracket.
    """
    if mu <= 0.0:
        raise DomainError(f"mu must be > 0, got {mu!r}")
    if mu <= MU_THRESHOLD + 1e-12:
        return None
    zg = np.linspace(1e-6, 1.0 - 1e-6, 10_000)
    vals = (2.0 ** (mu + 1.0) * zg
            / (np.sqrt(1.0 - zg * zg) * ((1.0 + zg) ** mu - (1.0 - zg) ** mu)))
    i = int(np.argmin(vals))
    lo = zg[max(i - 1, 0)]
    hi = zg[min(i + 1, zg.size - 1)]
    z_min = _golden_min(lambda z: eta_of_z(z, mu), lo, hi, z_tol, max_iter)
    return eta_of_z(z_min, mu)


# ---------------------------------------------------------------------------
# chart maps
# ---------------------------------------------------------------------------

def to_phase(a: AmplitudePair) -> tuple[PhasePoint, bool]:
    """Map amplitudes to (z, theta); second value is False when theta is undefined.

    z = |a_R|^2 - |a_L|^2 and theta = arg(a_R) - arg(a_L) mod 2*pi.  When
    either amplitude magnitude is below Z_ENDPOINT_GUARD the relative phase
    is meaningless; theta is set to 0 and the flag cleared.
    """
    pr = abs(a.a_R)
    pl = abs(a.a_L)
    z = min(1.0, max(-1.0, pr * pr - pl * pl))
    if pr <= Z_ENDPOINT_GUARD or pl <= Z_ENDPOINT_GUARD:
        return PhasePoint(z, 0.0), False
    theta = cmath.phase(a.a_R) - cmath.phase(a.a_L)
    return PhasePoint(z, theta), True


def to_amplitudes(p: PhasePoint, global_phase: float = 0.0) -> AmplitudePair:
    """Inverse chart map: a_R = sqrt((1+z)/2) e^{i(gamma+theta)}, a_L = sqrt((1-z)/2) e^{i gamma}."""
    pr = math.sqrt(0.5 * (1.0 + p.z))
    pl = math.sqrt(0.5 * (1.0 - p.z))
    return AmplitudePair(cmath.rect(pr, global_phase + p.theta), cmath.rect(pl, global_phase))


def amplitude_hamiltonian(a: AmplitudePair, params: DimerParams) -> float:
    """Conserved energy of the amplitude equations; equals -H(to_phase(a))/2.

    H_amp = -(conj(a_R) a_L + conj(a_L) a_R) + eta*(|a_R|^(2mu+2) + |a_L|^(2mu+2))/(mu+1).
    """
    mu, eta = params.mu, params.eta
    coupling = -2.0 * (a.a_R.conjugate() * a.a_L).real
    p2 = 2.0 * mu + 2.0
    return coupling + eta * (abs(a.a_R) ** p2 + abs(a.a_L) ** p2) / (mu + 1.0)
