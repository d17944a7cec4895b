"""Ground-doublet reduction of a 1D symmetric double-well potential.

Discretizes -(hbar^2/2) psi'' + V psi on a symmetric Dirichlet box with the
three-point stencil and splits the problem by parity: even states solve a
half-domain problem with a mirror (Neumann) condition at x = 0, odd states a
half-domain Dirichlet problem.  The split is an exact block-diagonalization
of the full-grid operator, so the computed doublet is parity-pure by
construction even when the splitting is tiny.  Eigenvalues/vectors come from
LAPACK's Sturm-sequence bisection + inverse iteration (scipy
eigh_tridiagonal); the grid is doubled until the doublet converges and the
box is widened until the eigenfunctions vanish at its edge.

Units: m = 1; hbar, lengths and energies are whatever consistent units the
caller picks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import eigh_tridiagonal, eigvalsh_tridiagonal

from .errors import (
    DomainError,
    GridCapExceeded,
    NoDoubletGap,
    SymmetryViolation,
)

#: lambda_2 must exceed lambda_minus by this many splittings (omega)
DOUBLET_GAP_FACTOR = 10.0

#: relative eigenvalue change per grid doubling at convergence
EIGENVALUE_REL_TOL = 1e-8

#: eigenfunction amplitude allowed at the box edge, relative to its peak
BOUNDARY_AMPLITUDE_TOL = 1e-10

#: absolute symmetry tolerance for potentials (spec'd for tabulated input)
POTENTIAL_SYMMETRY_TOL = 1e-12

#: half-grid interval cap for refinement
MAX_HALF_INTERVALS = 1 << 20

_WIDEN_FACTOR = 1.3
_MAX_WIDENINGS = 60
_WIDEN_HALF_INTERVALS = 2048


@dataclass
class PotentialSpec:
    """A symmetric double-well problem: potential family, hbar, box, grid.

    half_width None means the box is sized automatically (three times the
    outer turning point of the estimated doublet energy, then widened until
    the eigenfunctions vanish at the edge).  grid_points is the initial node
    count; the solver refines from there.
    """

    family: str  # "quartic" | "gaussian_wells" | "tabulated"
    hbar: float
    params: dict
    half_width: float | None = None
    grid_points: int = 2049

    def __post_init__(self):
        if not (math.isfinite(self.hbar) and self.hbar > 0.0):
            raise ValueError(f"hbar must be finite and > 0, got {self.hbar!r}")
        if self.half_width is not None and not self.half_width > 0.0:
            raise ValueError(f"half_width must be > 0, got {self.half_width!r}")
        if self.grid_points < 128:
            raise ValueError(f"grid_points must be >= 128, got {self.grid_points!r}")
        if self.family not in ("quartic", "gaussian_wells", "tabulated"):
            raise ValueError(f"unknown potential family {self.family!r}")

    # -- constructors -------------------------------------------------------

    @classmethod
    def quartic(cls, a: float, b: float, hbar: float, **kw) -> "PotentialSpec":
        """V(x) = a * (x^2 - b^2)^2 with a, b > 0."""
        if not (a > 0.0 and b > 0.0):
            raise ValueError(f"quartic requires a > 0 and b > 0, got a={a!r}, b={b!r}")
        return cls("quartic", hbar, {"a": float(a), "b": float(b)}, **kw)

    @classmethod
    def gaussian_wells(cls, amplitude: float, x0: float, width: float, hbar: float,
                       **kw) -> "PotentialSpec":
        """V(x) = -amplitude * [exp(-(x-x0)^2/width^2) + exp(-(x+x0)^2/width^2)]."""
        if not (amplitude > 0.0 and x0 > 0.0 and width > 0.0):
            raise ValueError("gaussian_wells requires amplitude, x0, width all > 0")
        return cls("gaussian_wells", hbar,
                   {"amplitude": float(amplitude), "x0": float(x0), "width": float(width)}, **kw)

    @classmethod
    def tabulated(cls, x: np.ndarray, v: np.ndarray, hbar: float, **kw) -> "PotentialSpec":
        """Tabulated (x, V) samples; must be mirror-symmetric about x = 0.

        Mirrored sample pairs are averaged; their pre-average mismatch must
        stay within POTENTIAL_SYMMETRY_TOL.
        """
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        if x.ndim != 1 or x.shape != v.shape or x.size < 8:
            raise ValueError("tabulated potential needs matching 1D x and V arrays (>= 8 rows)")
        order = np.argsort(x)
        x, v = x[order], v[order]
        if np.max(np.abs(x + x[::-1])) > 1e-9 * max(1.0, float(np.max(np.abs(x)))):
            raise ValueError("tabulated x grid must be mirror-symmetric about 0")
        asym = np.max(np.abs(v - v[::-1]))
        if asym > POTENTIAL_SYMMETRY_TOL:
            raise ValueError(
                f"tabulated potential asymmetric by {asym:.3e} (> {POTENTIAL_SYMMETRY_TOL:g})"
            )
        v = 0.5 * (v + v[::-1])  # midpoint averaging: exactly symmetric
        spec = cls("tabulated", hbar, {"x": x, "v": v}, **kw)
        return spec

    @classmethod
    def from_table_file(cls, path, hbar: float, **kw) -> "PotentialSpec":
        """Read a two-column (x, V) plain-text table; '#' starts a comment."""
        data = np.loadtxt(path, comments="#", ndmin=2)
        if data.shape[1] != 2:
            raise ValueError(f"{path}: expected two columns (x, V), got {data.shape[1]}")
        return cls.tabulated(data[:, 0], data[:, 1], hbar, **kw)

    # -- evaluation ---------------------------------------------------------

    def potential(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.family == "quartic":
            a, b = self.params["a"], self.params["b"]
            return a * (x * x - b * b) ** 2
        if self.family == "gaussian_wells":
            amp = self.params["amplitude"]
            x0, s = self.params["x0"], self.params["width"]
            return -amp * (np.exp(-((x - x0) / s) ** 2) + np.exp(-((x + x0) / s) ** 2))
        spline = self._spline()
        out = spline(x)
        if np.any(np.isnan(out)):
            raise DomainError(
                "tabulated potential evaluated outside its table; provide a wider table"
            )
        return out

    def _spline(self) -> CubicSpline:
        if "_spline" not in self.params:
            self.params["_spline"] = CubicSpline(
                self.params["x"], self.params["v"], extrapolate=False
            )
        return self.params["_spline"]

    def table_extent(self) -> float | None:
        if self.family == "tabulated":
            return float(self.params["x"][-1])
        return None


@dataclass
class ReductionResult:
    """Ground doublet of a double-well problem plus derived dimer constants.

    Grid functions are trapezoid-normalized on the symmetric grid x; c is
    None until attached from compute_c.
    """

    x: np.ndarray
    phi_plus: np.ndarray
    phi_minus: np.ndarray
    phi_R: np.ndarray
    phi_L: np.ndarray
    lambda_plus: float
    lambda_minus: float
    lambda_2: float
    omega: float
    Omega: float
    overlap: float
    beating_period_T: float
    hbar: float
    half_width: float
    c: float | None = None


def _half_grid(half_width: float, k: int) -> tuple[np.ndarray, float]:
    h = half_width / k
    return h * np.arange(k + 1), h


def _full_grid(x_half: np.ndarray) -> np.ndarray:
    return np.concatenate([-x_half[:0:-1], x_half])


def _parity_eigvals(v_half: np.ndarray, hbar: float, h: float) -> tuple[float, float, float, float]:
    """(even0, even1, odd0, odd1) lowest eigenvalues of the two parity blocks."""
    k = v_half.size - 1
    b = hbar * hbar / (2.0 * h * h)
    d_even = 2.0 * b + v_half[:k]
    e_even = np.full(k - 1, -b)
    e_even[0] = -math.sqrt(2.0) * b  # mirror row symmetrized
    ev = eigvalsh_tridiagonal(d_even, e_even, select="i", select_range=(0, 1))
    d_odd = 2.0 * b + v_half[1:k]
    e_odd = np.full(k - 2, -b)
    od = eigvalsh_tridiagonal(d_odd, e_odd, select="i", select_range=(0, 1))
    return float(ev[0]), float(ev[1]), float(od[0]), float(od[1])


def _parity_eigvecs(x_half: np.ndarray, v_half: np.ndarray, hbar: float, h: float):
    """Ground even/odd eigenpairs; vectors on the full symmetric grid, normalized."""
    k = v_half.size - 1
    b = hbar * hbar / (2.0 * h * h)
    d_even = 2.0 * b + v_half[:k]
    e_even = np.full(k - 1, -b)
    e_even[0] = -math.sqrt(2.0) * b
    w_e, u_e = eigh_tridiagonal(d_even, e_even, select="i", select_range=(0, 0))
    u_e = u_e[:, 0].copy()
    u_e[0] *= math.sqrt(2.0)  # undo the similarity scaling of the mirror node

    d_odd = 2.0 * b + v_half[1:k]
    e_odd = np.full(k - 2, -b)
    w_o, u_o = eigh_tridiagonal(d_odd, e_odd, select="i", select_range=(0, 0))
    u_o = u_o[:, 0]

    n_full = 2 * k + 1
    x = _full_grid(x_half)
    phi_plus = np.zeros(n_full)
    phi_plus[k] = u_e[0]
    phi_plus[k + 1:2 * k] = u_e[1:]
    phi_plus[k - 1:0:-1] = u_e[1:]
    phi_minus = np.zeros(n_full)
    phi_minus[k + 1:2 * k] = u_o
    phi_minus[k - 1:0:-1] = -u_o

    if phi_plus[k] < 0.0:
        phi_plus = -phi_plus
    if phi_minus[k + 1] < 0.0:
        phi_minus = -phi_minus
    phi_plus /= math.sqrt(np.trapezoid(phi_plus * phi_plus, x))
    phi_minus /= math.sqrt(np.trapezoid(phi_minus * phi_minus, x))
    return float(w_e[0]), float(w_o[0]), x, phi_plus, phi_minus


def _structure_checks(x: np.ndarray, v: np.ndarray) -> None:
    if np.max(np.abs(v - v[::-1])) > POTENTIAL_SYMMETRY_TOL * max(1.0, float(np.max(np.abs(v)))):
        raise ValueError("potential is not symmetric on the solver grid")
    interior = (v[1:-1] < v[:-2]) & (v[1:-1] <= v[2:])
    minima = np.nonzero(interior)[0] + 1
    # collapse adjacent plateau indices
    if minima.size:
        groups = np.split(minima, np.nonzero(np.diff(minima) > 1)[0] + 1)
        minima = np.array([g[0] for g in groups])
    if minima.size != 2:
        raise ValueError(
            f"expected exactly two potential minima on the grid, found {minima.size}"
        )
    center = x.size // 2
    if not (v[minima[0]] < v[center] and v[minima[1]] < v[center]):
        raise ValueError("potential minima must lie below the barrier value V(0)")


def _auto_half_width(spec: PotentialSpec) -> float:
    """3x the outer turning point of the estimated doublet energy."""
    extent = spec.table_extent()
    probe_max = extent if extent is not None else 50.0
    xs = np.linspace(0.0, probe_max, 20_001)
    vs = spec.potential(xs)
    i_min = int(np.argmin(vs))
    x_min = float(xs[i_min])
    v_min = float(vs[i_min])
    dx = 1e-4 * max(1.0, x_min)
    if x_min + dx <= probe_max and x_min - dx >= -probe_max:
        vpp = float(
            (spec.potential(np.array([x_min + dx]))[0]
             - 2.0 * v_min
             + spec.potential(np.array([x_min - dx]))[0]) / (dx * dx)
        )
    else:
        vpp = 0.0
    omega_well = math.sqrt(max(vpp, 1e-12))
    e_est = v_min + 0.5 * spec.hbar * omega_well
    above = np.nonzero((xs > x_min) & (vs > e_est))[0]
    x_turn = float(xs[above[0]]) if above.size else probe_max / 3.0
    half = 3.0 * x_turn
    if extent is not None:
        half = min(half, extent)
    return max(half, 1e-3)


def solve_doublet(spec: PotentialSpec, structure_checks: bool = True) -> ReductionResult:
    """Lowest doublet, single-well states and dimer constants for a spec.

    structure_checks=False is validation mode: the double-well structure and
    doublet-gap requirements are skipped so single-well sanity oracles (e.g.
    a harmonic potential) can exercise the eigensolver.

    Raises NoDoubletGap when the third level is closer to the doublet than
    DOUBLET_GAP_FACTOR splittings, and GridCapExceeded when refinement or
    box widening hits its cap.
    """
    half = spec.half_width if spec.half_width is not None else _auto_half_width(spec)
    extent = spec.table_extent()

    # widen the box until the doublet eigenfunctions vanish at its edge
    for _ in range(_MAX_WIDENINGS):
        x_half, h = _half_grid(half, _WIDEN_HALF_INTERVALS)
        v_half = spec.potential(x_half)
        _, _, x, phi_p, phi_m = _parity_eigvecs(x_half, v_half, spec.hbar, h)
        edge = max(abs(phi_p[1]), abs(phi_m[1]), abs(phi_p[-2]), abs(phi_m[-2]))
        peak = max(float(np.max(np.abs(phi_p))), float(np.max(np.abs(phi_m))))
        if edge <= BOUNDARY_AMPLITUDE_TOL * peak:
            break
        if extent is not None and half >= extent:
            raise GridCapExceeded(
                "eigenfunctions do not vanish within the tabulated domain; widen the table"
            )
        half = min(half * _WIDEN_FACTOR, extent) if extent is not None else half * _WIDEN_FACTOR
    else:
        raise GridCapExceeded("box widening did not converge")

    # refine the grid until both doublet eigenvalues settle
    k = max(spec.grid_points // 2, 512)
    prev = None
    while True:
        x_half, h = _half_grid(half, k)
        v_half = spec.potential(x_half)
        e0, e1, o0, o1 = _parity_eigvals(v_half, spec.hbar, h)
        if prev is not None:
            scale = max(abs(e0), abs(o0), 1e-12)
            # second-order stencil: the remaining error of the finer level is
            # the Richardson estimate |delta|/3
            if max(abs(e0 - prev[0]), abs(o0 - prev[1])) <= 3.0 * EIGENVALUE_REL_TOL * scale:
                break
        prev = (e0, o0)
        k *= 2
        if k > MAX_HALF_INTERVALS:
            raise GridCapExceeded(
                f"eigenvalues did not converge below {MAX_HALF_INTERVALS} half-grid intervals"
            )

    lam_p, lam_m, x, phi_plus, phi_minus = _parity_eigvecs(x_half, v_half, spec.hbar, h)
    lam_2 = min(e1, o1)
    if not lam_p < lam_m:
        raise DomainError("even ground level is not below the odd one; not a double-well doublet")
    omega = 0.5 * (lam_m - lam_p)
    big_omega = 0.5 * (lam_m + lam_p)

    if structure_checks:
        _structure_checks(x, spec.potential(x))
        if lam_2 - lam_m < DOUBLET_GAP_FACTOR * omega:
            raise NoDoubletGap(
                f"third level at {lam_2!r} sits only {(lam_2 - lam_m):.3e} above the doublet "
                f"(needs >= {DOUBLET_GAP_FACTOR:g} * omega = {DOUBLET_GAP_FACTOR * omega:.3e})"
            )

    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    phi_r = (phi_plus + phi_minus) * inv_sqrt2
    phi_l = (phi_plus - phi_minus) * inv_sqrt2
    overlap = float(np.max(np.abs(phi_r * phi_l)))
    return ReductionResult(
        x=x,
        phi_plus=phi_plus,
        phi_minus=phi_minus,
        phi_R=phi_r,
        phi_L=phi_l,
        lambda_plus=lam_p,
        lambda_minus=lam_m,
        lambda_2=lam_2,
        omega=omega,
        Omega=big_omega,
        overlap=overlap,
        beating_period_T=2.0 * math.pi * spec.hbar / omega,
        hbar=spec.hbar,
        half_width=half,
    )


def compute_c(result: ReductionResult, mu: float) -> float:
    """Self-interaction constant c = integral |phi_R|^(2*mu+2) dx (trapezoid).

    The phi_L value must agree to relative 1e-8 (mirror symmetry); a larger
    mismatch raises SymmetryViolation.  mu = 0 recovers the norm, 1.
    """
    if mu < 0.0:
        raise DomainError(f"mu must be >= 0, got {mu!r}")
    p = 2.0 * mu + 2.0
    c_r = float(np.trapezoid(np.abs(result.phi_R) ** p, result.x))
    c_l = float(np.trapezoid(np.abs(result.phi_L) ** p, result.x))
    if abs(c_r - c_l) > 1e-8 * max(abs(c_r), abs(c_l)):
        raise SymmetryViolation(
            f"c disagrees between wells: right {c_r!r} vs left {c_l!r}"
        )
    return c_r


def cross_terms(result: ReductionResult, mu: float) -> tuple[float, float]:
    """(max_x |phi_R phi_L|, integral phi_R |phi_L|^(2*mu) phi_L dx).

    Both quantify the two-level truncation error; they shrink rapidly as the
    wells decouple (hbar decreases or the barrier grows).
    """
    if mu < 0.0:
        raise DomainError(f"mu must be >= 0, got {mu!r}")
    overlap = float(np.max(np.abs(result.phi_R * result.phi_L)))
    cross = float(
        np.trapezoid(result.phi_R * np.abs(result.phi_L) ** (2.0 * mu) * result.phi_L, result.x)
    )
    return overlap, cross


def map_epsilon_to_eta(result: ReductionResult, c: float, epsilon: float) -> float:
    """Dimensionless strength eta = c * epsilon / omega."""
    return c * epsilon / result.omega


def epsilon_of_eta(result: ReductionResult, c: float, eta: float) -> float:
    """Inverse of map_epsilon_to_eta: epsilon = eta * omega / c."""
    return eta * result.omega / c
