"""Stationary points, stability classification, bifurcation diagrams, portraits.

Fixed points of the reduced flow live at theta = 0 or theta = pi.  The two
symmetric points (z = 0 at either phase) always exist; asymmetric ones are
roots of f_-(z) = 0 (theta = pi only: f_+ is strictly decreasing for eta > 0,
so z = 0 is its only root).  Roots are located by sign-change bracketing on a
uniform grid followed by bisection.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .core import (
    TWO_PI,
    DimerParams,
    PhasePoint,
    StabilityTag,
    Z_ENDPOINT_GUARD,
    hamiltonian_raw,
    vector_field_raw,
)
from .errors import BranchMatchingAmbiguous, NotStationary

#: number of grid points for sign-change bracketing of f_-
ROOT_SCAN_POINTS = 10_000

#: roots are bisected until the bracket is narrower than this
ROOT_Z_TOL = 5e-13

#: |z| below this is the already-known symmetric root and is dropped
SYMMETRIC_ROOT_TOL = 1e-9

#: residual magnitude beyond which a point fails the stationarity precondition
STATIONARY_RESIDUAL_TOL = 1e-8

#: |H_zz * H_theta_theta| below this is classified Degenerate
DEGENERACY_TOL = 1e-9

#: max |z| jump allowed when threading branch samples between adjacent etas
BRANCH_JUMP_GUARD = 0.1

#: two continuation candidates closer than this are reported as ambiguous
BRANCH_AMBIGUITY_TOL = 1e-9


@dataclass(frozen=True)
class StationaryPoint:
    """A fixed point with its stability tag and classifying determinant."""

    point: PhasePoint
    params: DimerParams
    stability: StabilityTag
    hessian_product: float


class BranchLabel(Enum):
    SYMMETRIC_THETA0 = "symmetric_theta0"
    ANTISYMMETRIC_THETAPI = "antisymmetric_thetapi"
    ASYMMETRIC_STABLE = "asymmetric_stable"
    ASYMMETRIC_UNSTABLE = "asymmetric_unstable"


class BranchSample(NamedTuple):
    eta: float
    z: float
    stability: StabilityTag


@dataclass
class Branch:
    """A continued family of stationary points over eta (samples eta-ascending)."""

    label: BranchLabel
    samples: list[BranchSample]

    @property
    def theta(self) -> float:
        return 0.0 if self.label is BranchLabel.SYMMETRIC_THETA0 else math.pi


@dataclass
class PhasePortrait:
    """Energy samples on a (z, theta) lattice plus fixed points and saddle energies."""

    params: DimerParams
    z_grid: np.ndarray
    theta_grid: np.ndarray
    energy: np.ndarray  # shape (nz, ntheta), energy[i, j] = H(z_i, theta_j)
    fixed_points: list[StationaryPoint]
    separatrix_energies: list[float]


def _f_minus_grid(z: np.ndarray, mu: float, eta: float) -> np.ndarray:
    return (2.0 * z / np.sqrt(1.0 - z * z)
            - eta * ((1.0 + z) ** mu - (1.0 - z) ** mu) / 2.0 ** mu)


def _f_minus_scalar(z: float, mu: float, eta: float) -> float:
    return (2.0 * z / math.sqrt(1.0 - z * z)
            - eta * ((1.0 + z) ** mu - (1.0 - z) ** mu) / 2.0 ** mu)


def classify_stability(point: PhasePoint, params: DimerParams) -> tuple[StabilityTag, float]:
    """Center/saddle test from the diagonal Hessian of H at a fixed point.

    At theta in {0, pi} the mixed partial vanishes, so the classifying
    determinant is H_zz * H_theta_theta: Center if positive, Saddle if
    negative, Degenerate within DEGENERACY_TOL of zero.  Raises NotStationary
    if the vector field magnitude at the point exceeds the precondition.
    """
    z, theta = point.z, point.theta
    if abs(z) >= 1.0 - Z_ENDPOINT_GUARD:
        raise NotStationary(f"cannot classify at the chart endpoint z = {z!r}")
    dz, dtheta = vector_field_raw(z, theta, params.mu, params.eta)
    if max(abs(dz), abs(dtheta)) >= STATIONARY_RESIDUAL_TOL:
        raise NotStationary(
            f"point (z={z!r}, theta={theta!r}) has residual {max(abs(dz), abs(dtheta)):.3e}"
        )
    mu, eta = params.mu, params.eta
    c = math.cos(theta)
    h_zz = (-2.0 * c * (1.0 - z * z) ** -1.5
            - eta * mu * ((1.0 + z) ** (mu - 1.0) + (1.0 - z) ** (mu - 1.0)) / 2.0 ** mu)
    h_tt = -2.0 * math.sqrt(1.0 - z * z) * c
    prod = h_zz * h_tt
    if prod > DEGENERACY_TOL:
        tag = StabilityTag.CENTER
    elif prod < -DEGENERACY_TOL:
        tag = StabilityTag.SADDLE
    else:
        tag = StabilityTag.DEGENERATE
    return tag, prod


def _asymmetric_roots(params: DimerParams) -> list[float]:
    """All nonzero roots of f_-(z) = 0 in (-1, 1), ascending."""
    mu, eta = params.mu, params.eta
    grid = np.linspace(-1.0 + 1e-6, 1.0 - 1e-6, ROOT_SCAN_POINTS)
    f = _f_minus_grid(grid, mu, eta)
    roots: list[float] = []
    exact = np.nonzero(f == 0.0)[0]
    roots.extend(float(grid[i]) for i in exact)
    change = np.nonzero(f[:-1] * f[1:] < 0.0)[0]
    for i in change:
        lo, hi = float(grid[i]), float(grid[i + 1])
        flo = float(f[i])
        while hi - lo > ROOT_Z_TOL:
            mid = 0.5 * (lo + hi)
            fmid = _f_minus_scalar(mid, mu, eta)
            if fmid == 0.0:
                lo = hi = mid
                break
            if (flo < 0.0) == (fmid < 0.0):
                lo, flo = mid, fmid
            else:
                hi = mid
        roots.append(0.5 * (lo + hi))
    return sorted(r for r in roots if abs(r) > SYMMETRIC_ROOT_TOL)


def _stationary_at(z: float, theta: float, params: DimerParams) -> StationaryPoint:
    p = PhasePoint(z, theta)
    tag, prod = classify_stability(p, params)
    return StationaryPoint(p, params, tag, prod)


def find_stationary_points(params: DimerParams, debug: bool = False) -> list[StationaryPoint]:
    """All fixed points for the given parameters, classified.

    Ordering: (0, 0) first, then (0, pi), then asymmetric theta = pi points
    by ascending z.  Asymmetric points off z = 0 occur in exact mirror pairs.
    Only f_- is searched: f_+ is strictly decreasing for eta > 0, so z = 0 is
    its only root; debug=True re-verifies that by a sign scan.
    """
    if debug:
        grid = np.linspace(-1.0 + 1e-6, 1.0 - 1e-6, ROOT_SCAN_POINTS)
        fp = (-2.0 * grid / np.sqrt(1.0 - grid * grid)
              - params.eta * ((1.0 + grid) ** params.mu - (1.0 - grid) ** params.mu)
              / 2.0 ** params.mu)
        off_origin = np.nonzero(fp[:-1] * fp[1:] < 0.0)[0]
        off_origin = [i for i in off_origin if abs(grid[i]) > 1e-3]
        assert not off_origin, f"f_+ has unexpected nonzero roots near {grid[off_origin]}"
    points = [
        _stationary_at(0.0, 0.0, params),
        _stationary_at(0.0, math.pi, params),
    ]
    points.extend(_stationary_at(z, math.pi, params) for z in _asymmetric_roots(params))
    return points


def _thread_branches(
    etas: np.ndarray, per_eta_roots: list[list[tuple[float, StabilityTag]]]
) -> list[Branch]:
    """Connect per-eta asymmetric roots into branches by z-continuity."""
    active: list[dict] = []   # each: {"samples": [...], "last_z": float}
    closed: list[dict] = []
    for eta, roots in zip(etas, per_eta_roots):
        taken = [False] * len(roots)
        # candidate (distance, branch index, root index), deterministic order
        pairs = []
        for bi, br in enumerate(active):
            cands = [(abs(rz - br["last_z"]), ri) for ri, (rz, _) in enumerate(roots)
                     if abs(rz - br["last_z"]) < BRANCH_JUMP_GUARD]
            cands.sort()
            if len(cands) >= 2:
                z0 = roots[cands[0][1]][0]
                z1 = roots[cands[1][1]][0]
                if abs(z0 - z1) < BRANCH_AMBIGUITY_TOL:
                    raise BranchMatchingAmbiguous(
                        f"at eta={eta!r}: roots {z0!r} and {z1!r} both continue "
                        f"the branch ending at z={br['last_z']!r}"
                    )
            pairs.extend((d, bi, ri) for d, ri in cands)
        pairs.sort()
        matched_branch = [False] * len(active)
        for _, bi, ri in pairs:
            if matched_branch[bi] or taken[ri]:
                continue
            z, tag = roots[ri]
            active[bi]["samples"].append(BranchSample(float(eta), z, tag))
            active[bi]["last_z"] = z
            matched_branch[bi] = True
            taken[ri] = True
        still_active = []
        for bi, br in enumerate(active):
            (still_active if matched_branch[bi] else closed).append(br)
        active = still_active
        for ri, (z, tag) in enumerate(roots):
            if not taken[ri]:
                active.append({"samples": [BranchSample(float(eta), z, tag)], "last_z": z})
    closed.extend(active)

    branches = []
    for br in sorted(closed, key=lambda b: (b["samples"][0].eta, b["samples"][0].z)):
        tags = [s.stability for s in br["samples"]]
        n_center = sum(t is StabilityTag.CENTER for t in tags)
        n_saddle = sum(t is StabilityTag.SADDLE for t in tags)
        label = (BranchLabel.ASYMMETRIC_STABLE if n_center >= n_saddle
                 else BranchLabel.ASYMMETRIC_UNSTABLE)
        branches.append(Branch(label, br["samples"]))
    return branches


def bifurcation_diagram(
    mu: float,
    eta_range: tuple[float, float],
    n_samples: int,
    workers: int = 1,
) -> list[Branch]:
    """Stationary-state branches over a uniform eta grid.

    Emits the two z = 0 branches (theta = 0 and theta = pi, with per-sample
    stability tags) plus every asymmetric branch threaded by nearest-z
    continuity.  eta samples may be evaluated concurrently (workers > 1); the
    threading pass is single-threaded and deterministic either way.
    """
    lo, hi = eta_range
    if not 0.0 < lo < hi:
        raise ValueError(f"need 0 < lo < hi, got ({lo!r}, {hi!r})")
    if n_samples < 2:
        raise ValueError(f"n_samples must be >= 2, got {n_samples!r}")
    etas = np.linspace(lo, hi, n_samples)

    def sample(eta: float):
        params = DimerParams(mu, float(eta))
        sym0 = _stationary_at(0.0, 0.0, params)
        sym_pi = _stationary_at(0.0, math.pi, params)
        asym = [(z, classify_stability(PhasePoint(z, math.pi), params)[0])
                for z in _asymmetric_roots(params)]
        return sym0.stability, sym_pi.stability, asym

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(sample, etas))
    else:
        results = [sample(e) for e in etas]

    branch0 = Branch(
        BranchLabel.SYMMETRIC_THETA0,
        [BranchSample(float(e), 0.0, r[0]) for e, r in zip(etas, results)],
    )
    branch_pi = Branch(
        BranchLabel.ANTISYMMETRIC_THETAPI,
        [BranchSample(float(e), 0.0, r[1]) for e, r in zip(etas, results)],
    )
    return [branch0, branch_pi] + _thread_branches(etas, [r[2] for r in results])


def phase_portrait(params: DimerParams, nz: int = 401, ntheta: int = 401) -> PhasePortrait:
    """Energy lattice over [-1, 1] x [0, 2*pi) with fixed points and saddle energies.

    Consumers contour the grid at the separatrix energies (H at each saddle)
    plus any levels of their own choosing.
    """
    if nz < 16 or ntheta < 16:
        raise ValueError(f"grid must be at least 16 x 16, got {nz} x {ntheta}")
    z = np.linspace(-1.0, 1.0, nz)
    theta = np.linspace(0.0, TWO_PI, ntheta, endpoint=False)
    mu, eta = params.mu, params.eta
    pw = ((1.0 + z) ** (mu + 1.0) + (1.0 - z) ** (mu + 1.0)) / (2.0 ** mu * (mu + 1.0))
    energy = (2.0 * np.sqrt(np.clip(1.0 - z * z, 0.0, None))[:, None] * np.cos(theta)[None, :]
              - eta * pw[:, None])
    fixed = find_stationary_points(params)
    sep = [hamiltonian_raw(fp.point.z, fp.point.theta, mu, eta)
           for fp in fixed if fp.stability is StabilityTag.SADDLE]
    return PhasePortrait(params, z, theta, energy, fixed, sep)
