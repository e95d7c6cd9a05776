import numpy as np
import pytest

from facgas.core import (ExclusionConfig, LineWindow, Phase, Torus,
                         classify_exclusion, classify_zero_range, hole_count,
                         particle_count)
from facgas.dynamics import SimParams
from facgas.mapping import (MacroTransform, TagState,
                            interface_offset_chi_from_alpha,
                            interface_offset_chi_from_rho,
                            interface_offset_sigma, macro_ex_to_zr,
                            macro_zr_to_ex, map_exclusion_to_zr,
                            map_zr_to_exclusion, mass_deficit,
                            trajectory_commutation_check, zr_time)
from facgas.measures import Profile
from facgas.pde import (DensityField, G, H, flux_eval, riemann_exact,
                        solve_hyperbolic, solve_parabolic)


def eta_from_sites(n, sites):
    occ = np.zeros(n, dtype=np.uint8)
    occ[list(sites)] = 1
    return ExclusionConfig(Torus(n), occ)


class TestMicroMapping:
    def test_figure_configuration(self):
        omega, tag = map_exclusion_to_zr(eta_from_sites(8, [0, 2, 3, 6, 7]))
        assert np.array_equal(omega.heights, [2, 0, 3])
        assert tag.x1 == 1 and tag.m_holes == 3

    def test_all_empty(self):
        omega, tag = map_exclusion_to_zr(
            ExclusionConfig(Torus(8), np.zeros(8, dtype=np.uint8)))
        assert omega.heights.shape == (8,)
        assert omega.heights.sum() == 0

    def test_degenerate_no_hole(self):
        omega, tag = map_exclusion_to_zr(
            ExclusionConfig(Torus(8), np.ones(8, dtype=np.uint8)))
        assert tag.degenerate and tag.m_holes == 1 and tag.x1 == 1
        assert np.array_equal(omega.heights, [8])

    def test_exhaustive_bookkeeping_and_roundtrip_n10(self):
        n = 10
        for code in range(2 ** n - 1):  # exclude all-ones (no hole)
            occ = np.array([(code >> i) & 1 for i in range(n)], dtype=np.uint8)
            eta = ExclusionConfig(Torus(n), occ)
            omega, tag = map_exclusion_to_zr(eta)
            assert omega.heights.sum() == particle_count(eta)
            assert omega.heights.shape[0] == hole_count(eta)
            back = map_zr_to_exclusion(omega, tag, n)
            assert np.array_equal(back.occupancy, occ)

    def test_alternating_inverse(self):
        omega, tag = map_exclusion_to_zr(
            ExclusionConfig(Torus(8), np.tile([0, 1], 4).astype(np.uint8)))
        assert np.all(omega.heights == 1)
        back = map_zr_to_exclusion(omega, TagState(0, 4), 8)
        assert np.array_equal(back.occupancy, np.tile([0, 1], 4))

    def test_inconsistent_size_rejected(self):
        omega, tag = map_exclusion_to_zr(eta_from_sites(8, [0, 2, 3, 6, 7]))
        with pytest.raises(ValueError):
            map_zr_to_exclusion(omega, tag, 9)

    def test_phase_agreement_through_mapping(self):
        n = 10
        for code in range(2 ** n - 1):
            occ = np.array([(code >> i) & 1 for i in range(n)], dtype=np.uint8)
            eta = ExclusionConfig(Torus(n), occ)
            omega, _ = map_exclusion_to_zr(eta)
            pe = classify_exclusion(eta)
            pz = classify_zero_range(omega)
            assert pe is pz


class TestCommutation:
    def test_frozen_is_vacuous(self):
        eta0 = eta_from_sites(8, [2, 4, 7])
        rep = trajectory_commutation_check(
            eta0, SimParams.symmetric(T=1.0, seed=0))
        assert rep.ok and rep.n_events == 0

    def test_torus_symmetric(self):
        rng = np.random.default_rng(3)
        eta0 = ExclusionConfig(Torus(10), (rng.random(10) < 0.6).astype(np.uint8))
        params = SimParams.symmetric(T=40.0, seed=11, obs_times=(10.0, 40.0))
        rep = trajectory_commutation_check(eta0, params, max_events=100_000)
        assert rep.ok and rep.n_events >= 10_000
        assert rep.x1_identity_max_abs == 0

    def test_line_asymmetric_totally(self):
        geom = LineWindow(-10, 10, 40)
        occ = np.zeros(geom.n_sim, np.uint8)
        occ[geom.window_slice()] = (np.random.default_rng(5).random(20) < 0.7)
        params = SimParams.asymmetric(T=0.8, seed=7, obs_times=(0.4, 0.8))
        rep = trajectory_commutation_check(ExclusionConfig(geom, occ), params,
                                           max_events=100_000)
        assert rep.ok

    def test_current_identity_n512(self):
        rng = np.random.default_rng(0)
        eta0 = ExclusionConfig(Torus(512), (rng.random(512) < 0.7).astype(np.uint8))
        params = SimParams.symmetric(T=0.002, seed=1,
                                     obs_times=(0.0005, 0.001, 0.002))
        rep = trajectory_commutation_check(eta0, params, max_events=2_000_000)
        assert rep.ok and rep.x1_identity_max_abs == 0


class TestMacroMapping:
    def test_constant_closed_form(self):
        alpha, tr = macro_ex_to_zr(DensityField.torus(np.full(256, 0.8)))
        assert tr.theta == pytest.approx(0.2, abs=1e-14)
        assert np.allclose(alpha.cells, 4.0)
        assert np.allclose(tr.v_of_u(np.array([0.0, 0.3, 1.0])), [0.0, 0.3, 1.0])

    def test_critical_maps_to_critical(self):
        alpha, _ = macro_ex_to_zr(DensityField.torus(np.full(256, 0.5)))
        assert np.allclose(alpha.cells, 1.0)

    def test_step_closed_form(self):
        # theta = 0.45, v(1/2) = (0.2*0.5)/0.45 = 2/9, alpha = 4 then 3/7
        n = 576  # multiple of 9 and even, so the images are cell-aligned
        rho = DensityField.from_profile(Profile.step(0.8, 0.3, 0.5), n)
        alpha, tr = macro_ex_to_zr(rho, m_out=n)
        assert tr.theta == pytest.approx(0.45, abs=1e-14)
        assert tr.v_of_u(0.5) == pytest.approx(2.0 / 9.0, abs=1e-13)
        k = round(2 / 9 * n)
        assert np.allclose(alpha.cells[:k], 4.0)
        assert np.allclose(alpha.cells[k:], 3.0 / 7.0)

    def test_inverse_constant(self):
        alpha = DensityField.torus(np.full(128, 4.0))
        rho = macro_zr_to_ex(alpha, 0.0, 0.2)
        assert np.allclose(rho.cells, 0.8)
        rho2 = macro_zr_to_ex(DensityField.torus(np.ones(128)), 0.0, 0.5)
        assert np.allclose(rho2.cells, 0.5)

    def test_inconsistent_theta_rejected(self):
        alpha = DensityField.torus(np.full(128, 4.0))
        with pytest.raises(ValueError):
            macro_zr_to_ex(alpha, 0.0, 0.3)

    def test_near_one_density_rejected(self):
        with pytest.raises(ValueError):
            macro_ex_to_zr(DensityField.torus(np.full(64, 1.0 - 1e-9)))

    def test_round_trips_within_a_cell(self):
        n = 512
        rho = DensityField.from_profile(Profile.step(0.8, 0.3, 0.5), n)
        alpha, tr = macro_ex_to_zr(rho, m_out=n)
        back = macro_zr_to_ex(alpha, 0.0, tr.theta, n_out=n)
        assert np.abs(back.cells - rho.cells).mean() <= 2.0 / n
        alpha2, tr2 = macro_ex_to_zr(back, m_out=n)
        assert np.abs(alpha2.cells - alpha.cells).mean() <= 4.0 * 2.0 / n

    def test_nonzero_chi_round_trip(self):
        n = 512
        rho = DensityField.from_profile(Profile.step(0.8, 0.3, 0.5), n)
        alpha, tr = macro_ex_to_zr(rho, m_out=n)
        shifted = macro_zr_to_ex(alpha, 0.25, tr.theta, n_out=n)
        # the image is the original field translated by chi
        k = round(0.25 * n)
        assert np.abs(np.roll(rho.cells, k) - shifted.cells).mean() <= 2.0 / n

    def test_flux_relation_through_the_maps(self):
        n = 576
        rho = DensityField.from_profile(Profile.step(0.8, 0.3, 0.5), n)
        alpha, tr = macro_ex_to_zr(rho, m_out=n)
        v_c = alpha.centers()
        rho_at = rho.interp_at(tr.u_of_v(v_c))
        assert np.max(np.abs(flux_eval(G, alpha.cells) - flux_eval(H, rho_at))) < 1e-12


class TestInterfaceOffsets:
    def setup_method(self):
        self.n = 1024
        self.rho0 = DensityField.from_profile(Profile.step(0.8, 0.3, 0.5), self.n)
        self.alpha0, self.tr = macro_ex_to_zr(self.rho0, m_out=self.n)

    def test_chi_zero_at_time_zero(self):
        assert interface_offset_chi_from_alpha(self.alpha0, self.alpha0,
                                               self.tr.theta) == 0.0
        assert abs(interface_offset_chi_from_rho(self.rho0, self.rho0)) < 1e-12

    def test_chi_zero_for_stationary_constant(self):
        const = DensityField.torus(np.full(256, 2.0))
        assert interface_offset_chi_from_alpha(const, const, 0.5) == 0.0

    def test_dual_formulas_agree_after_evolution(self):
        T = 0.02
        rho_T = solve_parabolic(self.rho0, H, T).final
        Tz = zr_time(T, self.tr.theta)
        alpha_T = solve_parabolic(self.alpha0, G, Tz).final
        chi_a = interface_offset_chi_from_alpha(self.alpha0, alpha_T, self.tr.theta)
        chi_r = interface_offset_chi_from_rho(self.rho0, rho_T)
        assert abs(chi_a - chi_r) <= 2.0 / self.n
        # theta is invariant in time along the solution
        assert abs(mass_deficit(rho_T) - self.tr.theta) < 1e-12

    def test_sigma_trivial_cases(self):
        a = DensityField.interval(np.full(128, 2.0), -1.0, 1.0)
        assert interface_offset_sigma(a, a) == 0.0

    def test_sigma_matches_riemann_mass_flux(self):
        # data (1.5, 3), p = 1, t = 0.5: sigma = t (G(a_r) - G(a(0)))
        # = t G(1.5) here since G(3) - G(1.5) = G(1.5) = 1/3
        n, t = 4000, 0.5
        v = np.linspace(-2, 2, n, endpoint=False) + 2.0 / n
        a0 = DensityField.interval(np.where(v < 0, 1.5, 3.0), -2.0, 2.0)
        traj = solve_hyperbolic(a0, G, 1.0, t)
        sigma = interface_offset_sigma(a0, traj.final)
        sol = riemann_exact(1.5, 3.0, 1.0)
        a_at_zero = float(sol(np.array([0.0]))[0])
        target = t * (flux_eval(G, 3.0) - flux_eval(G, a_at_zero))
        assert target == pytest.approx(t * flux_eval(G, 1.5))
        assert abs(sigma - target) <= 5e-3
