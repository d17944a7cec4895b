"""Tests for fixed-point finding, stability, branches and portraits."""

import math

import numpy as np
import pytest

from dimerlab.core import (
    DimerParams,
    PhasePoint,
    StabilityTag,
    eta_plus,
    eta_star,
    vector_field,
)
from dimerlab.errors import BranchMatchingAmbiguous, NotStationary
from dimerlab.stationary import (
    BranchLabel,
    _thread_branches,
    bifurcation_diagram,
    classify_stability,
    find_stationary_points,
    phase_portrait,
)


def brute_force_theta_pi_roots(mu, eta, n=10**6):
    """Sign-scan oracle for f_-(z) = 0, counting all roots including z = 0."""
    z = np.linspace(-1 + 1e-6, 1 - 1e-6, n)
    f = 2 * z / np.sqrt(1 - z * z) - eta * ((1 + z) ** mu - (1 - z) ** mu) / 2**mu
    return int(np.count_nonzero(f[:-1] * f[1:] < 0))


def theta_pi_points(points):
    return [p for p in points if abs(p.point.theta - math.pi) < 1e-9]


class TestClassifyStability:
    def test_antisymmetric_state_below_eta_star(self):
        tag, prod = classify_stability(PhasePoint(0.0, math.pi), DimerParams(1.0, 1.0))
        assert tag is StabilityTag.CENTER
        assert prod > 0

    def test_antisymmetric_state_above_eta_star(self):
        tag, _ = classify_stability(PhasePoint(0.0, math.pi), DimerParams(1.0, 3.0))
        assert tag is StabilityTag.SADDLE

    def test_degenerate_exactly_at_eta_star(self):
        for mu in (1.0, 2.0, 5.0, 3.7):
            tag, prod = classify_stability(PhasePoint(0.0, math.pi),
                                           DimerParams(mu, eta_star(mu)))
            assert tag is StabilityTag.DEGENERATE
            assert abs(prod) <= 1e-9

    def test_rejects_non_stationary_point(self):
        with pytest.raises(NotStationary):
            classify_stability(PhasePoint(0.3, 0.0), DimerParams(1.0, 1.0))

    def test_symmetric_point_always_center(self):
        for eta in np.geomspace(1e-2, 100.0, 12):
            for mu in np.linspace(0.25, 10.0, 8):
                tag, prod = classify_stability(PhasePoint(0.0, 0.0),
                                               DimerParams(float(mu), float(eta)))
                assert tag is StabilityTag.CENTER
                assert prod > 0


class TestFindStationaryPoints:
    def test_mu5_eta2_two_centers(self):
        pts = find_stationary_points(DimerParams(5.0, 2.0))
        assert len(pts) == 2
        assert all(p.stability is StabilityTag.CENTER for p in pts)
        assert brute_force_theta_pi_roots(5.0, 2.0) == 1

    def test_mu5_eta5_six_points(self):
        pts = find_stationary_points(DimerParams(5.0, 5.0))
        assert len(pts) == 6
        assert brute_force_theta_pi_roots(5.0, 5.0) == 5
        tags = {round(p.point.z, 6): p.stability for p in pts[2:]}
        zs = sorted(tags)
        assert zs[0] == -zs[3] and zs[1] == -zs[2]  # mirror pairs
        inner = [z for z in zs if abs(z) < 0.7]
        outer = [z for z in zs if abs(z) > 0.7]
        assert all(tags[z] is StabilityTag.SADDLE for z in inner)
        assert all(tags[z] is StabilityTag.CENTER for z in outer)

    def test_mu5_eta65_four_points(self):
        pts = find_stationary_points(DimerParams(5.0, 6.5))
        assert len(pts) == 4
        assert brute_force_theta_pi_roots(5.0, 6.5) == 3
        assert pts[0].stability is StabilityTag.CENTER          # (0, 0)
        assert pts[1].stability is StabilityTag.SADDLE          # (0, pi)
        assert all(p.stability is StabilityTag.CENTER for p in pts[2:])

    def test_root_count_law_mu5(self):
        ep = eta_plus(5.0)
        es = eta_star(5.0)
        for eta in (2.0, ep - 1e-3, ep - 0.3):
            assert len(theta_pi_points(find_stationary_points(DimerParams(5.0, eta)))) == 1
        for eta in (ep + 1e-3, 5.0, es - 1e-3):
            assert len(theta_pi_points(find_stationary_points(DimerParams(5.0, eta)))) == 5
        for eta in (es + 1e-3, 6.5, 9.0):
            assert len(theta_pi_points(find_stationary_points(DimerParams(5.0, eta)))) == 3

    def test_debug_scan_confirms_f_plus_rootless(self):
        for mu, eta in [(1.0, 3.0), (5.0, 5.0), (5.0, 6.5), (0.5, 9.0)]:
            pts = find_stationary_points(DimerParams(mu, eta), debug=True)
            assert len(pts) >= 2

    def test_mirror_pairs_and_residuals(self):
        for mu, eta in [(5.0, 5.0), (5.0, 6.5), (1.0, 3.0), (2.0, 3.5)]:
            params = DimerParams(mu, eta)
            pts = find_stationary_points(params)
            asym = sorted(p.point.z for p in pts[2:])
            for lo_z, hi_z in zip(asym, reversed(asym)):
                assert abs(lo_z + hi_z) < 1e-11
            for p in pts:
                dz, dth = vector_field(p.point, params)
                assert max(abs(dz), abs(dth)) < 1e-10

    def test_pitchfork_onset_matches_eta_star(self):
        for mu in (1.0, 2.0, 3.0):
            star = eta_star(mu)
            lo, hi = 0.5 * star, 1.5 * star
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                has_asym = len(find_stationary_points(DimerParams(mu, mid))) > 2
                if has_asym:
                    hi = mid
                else:
                    lo = mid
            onset = 0.5 * (lo + hi)
            assert abs(onset - star) <= 1e-6
            # stability of (0, pi) flips Center -> Saddle at the same strength
            lo, hi = 0.5 * star, 1.5 * star
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                tag, _ = classify_stability(PhasePoint(0.0, math.pi), DimerParams(mu, mid))
                if tag is StabilityTag.CENTER:
                    lo = mid
                else:
                    hi = mid
            flip = 0.5 * (lo + hi)
            assert abs(flip - star) <= 1e-6
            assert abs(flip - onset) <= 2e-6

    def test_saddle_node_onset_matches_eta_plus(self):
        for mu in (4.0, 5.0):
            plus = eta_plus(mu)
            lo, hi = 0.75 * plus, 1.25 * plus
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if len(find_stationary_points(DimerParams(mu, mid))) > 2:
                    hi = mid
                else:
                    lo = mid
            assert abs(0.5 * (lo + hi) - plus) <= 1e-6


class TestBifurcationDiagram:
    def test_supercritical_pitchfork_mu1(self):
        branches = bifurcation_diagram(1.0, (0.1, 4.0), 400)
        by_label = {}
        for br in branches:
            by_label.setdefault(br.label, []).append(br)
        sym_pi = by_label[BranchLabel.ANTISYMMETRIC_THETAPI][0]
        flips = 0
        for a, b in zip(sym_pi.samples, sym_pi.samples[1:]):
            if a.stability is not b.stability and StabilityTag.DEGENERATE not in (
                    a.stability, b.stability):
                flips += 1
        assert flips == 1
        star = eta_star(1.0)
        for s in sym_pi.samples:
            if s.eta < star - 0.02:
                assert s.stability is StabilityTag.CENTER
            elif s.eta > star + 0.02:
                assert s.stability is StabilityTag.SADDLE
        asym = by_label.get(BranchLabel.ASYMMETRIC_STABLE, [])
        assert len(asym) == 2  # +z and -z mirror branches
        assert BranchLabel.ASYMMETRIC_UNSTABLE not in by_label
        for br in asym:
            assert br.samples[0].eta >= star - 0.02
            assert all(s.stability is StabilityTag.CENTER for s in br.samples)

    def test_saddle_node_plus_inverse_pitchfork_mu5(self):
        branches = bifurcation_diagram(5.0, (3.0, 8.0), 500)
        spacing = 5.0 / 499
        stable = [b for b in branches if b.label is BranchLabel.ASYMMETRIC_STABLE]
        unstable = [b for b in branches if b.label is BranchLabel.ASYMMETRIC_UNSTABLE]
        assert len(stable) == 2 and len(unstable) == 2
        ep, es = eta_plus(5.0), eta_star(5.0)
        for br in stable + unstable:
            assert abs(br.samples[0].eta - ep) <= 2 * spacing
        for br in stable:
            assert br.samples[-1].eta == pytest.approx(8.0)
        for br in unstable:
            # unstable pair dies on the z = 0 branch at eta_star
            assert es - 2 * spacing <= br.samples[-1].eta <= es + spacing
            assert abs(br.samples[-1].z) < 0.2

    def test_no_asymmetric_branches_below_eta_plus(self):
        branches = bifurcation_diagram(5.0, (0.1, 4.0), 120)
        assert {b.label for b in branches} == {
            BranchLabel.SYMMETRIC_THETA0, BranchLabel.ANTISYMMETRIC_THETAPI}

    def test_samples_strictly_increasing(self):
        for br in bifurcation_diagram(5.0, (3.0, 8.0), 60):
            etas = [s.eta for s in br.samples]
            assert all(a < b for a, b in zip(etas, etas[1:]))

    def test_workers_do_not_change_output(self):
        a = bifurcation_diagram(5.0, (3.0, 8.0), 80, workers=1)
        b = bifurcation_diagram(5.0, (3.0, 8.0), 80, workers=4)
        assert len(a) == len(b)
        for br_a, br_b in zip(a, b):
            assert br_a.label is br_b.label
            assert br_a.samples == br_b.samples

    def test_invalid_ranges_rejected(self):
        with pytest.raises(ValueError):
            bifurcation_diagram(1.0, (0.0, 4.0), 10)
        with pytest.raises(ValueError):
            bifurcation_diagram(1.0, (2.0, 1.0), 10)
        with pytest.raises(ValueError):
            bifurcation_diagram(1.0, (0.1, 4.0), 1)

    def test_ambiguous_continuation_reported(self):
        etas = np.array([1.0, 1.1])
        roots = [
            [(0.5, StabilityTag.CENTER)],
            [(0.5, StabilityTag.CENTER), (0.5 + 5e-10, StabilityTag.SADDLE)],
        ]
        with pytest.raises(BranchMatchingAmbiguous):
            _thread_branches(etas, roots)


class TestPhasePortrait:
    def test_separatrix_counts_across_regimes(self):
        for eta, n_sep, n_fixed in [(2.0, 0, 2), (5.0, 2, 6), (6.5, 1, 4)]:
            por = phase_portrait(DimerParams(5.0, eta), 64, 64)
            assert len(por.separatrix_energies) == n_sep
            assert len(por.fixed_points) == n_fixed

    def test_mirror_saddles_share_energy(self):
        por = phase_portrait(DimerParams(5.0, 5.0), 64, 64)
        e1, e2 = por.separatrix_energies
        assert abs(e1 - e2) <= 1e-12

    def test_grid_layout(self):
        por = phase_portrait(DimerParams(1.0, 1.0), 33, 48)
        assert por.energy.shape == (33, 48)
        assert por.z_grid[0] == -1.0 and por.z_grid[-1] == 1.0
        assert por.theta_grid[0] == 0.0 and por.theta_grid[-1] < 2 * math.pi
        # lattice energies match the scalar evaluation
        from dimerlab.core import hamiltonian
        for i in (0, 16, 32):
            for j in (0, 21, 47):
                assert por.energy[i, j] == pytest.approx(
                    hamiltonian(PhasePoint(float(por.z_grid[i]), float(por.theta_grid[j])),
                                por.params), abs=1e-14)

    def test_minimum_grid_enforced(self):
        with pytest.raises(ValueError):
            phase_portrait(DimerParams(1.0, 1.0), 8, 64)
        with pytest.raises(ValueError):
            phase_portrait(DimerParams(1.0, 1.0), 64, 15)
