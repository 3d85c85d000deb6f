import numpy as np
import pytest
from scipy.integrate import quad

from halfspace_bubbles.bubble_family import solve_betas
from halfspace_bubbles.conformal_ball import recover_mu_alpha, setup_from_params
from halfspace_bubbles.errors import HorizonExceeded, PositivityLoss, ShootFailed
from halfspace_bubbles.exponent_system import EllipticSystemSpec
from halfspace_bubbles.radial_ode import (
    closed_form_psi,
    closed_form_radial_residual,
    halfline_breakdown,
    integrate_radial,
    shoot_robin,
)


def breakdown_time_oracle() -> float:
    """Independent quadrature oracle for a=5, c=0, u(0)=1.

    The conserved energy (u')^2/2 + u^6/6 = 1/6 turns the crossing time into
    sqrt(3) * int_0^1 (1 - s^6)^(-1/2) ds.  Substituting s = 1 - v^2 removes
    the endpoint singularity: the integrand becomes 2 / sqrt(sum_k (1-v^2)^k).
    """

    def smooth(v):
        s = 1.0 - v * v
        return 2.0 / np.sqrt(sum(s**k for k in range(6)))

    value, err = quad(smooth, 0.0, 1.0, epsabs=1e-14, epsrel=1e-13)
    assert err < 1e-12
    return float(np.sqrt(3.0) * value)


def fixture_mu_alpha(spec, params):
    setup = setup_from_params(params)
    mu, alphas = recover_mu_alpha(setup, params)
    return setup.d, mu, alphas


class TestClosedForm:
    def test_value_at_origin(self):
        psi = closed_form_psi(3, [2.0], 1.5, 0.0)
        assert psi[0] == pytest.approx(2.0 * 1.5 ** (2 - 3), rel=1e-15)

    def test_residual_of_consistent_profile(self, fixture_pair):
        spec, params = fixture_pair
        d, mu, alphas = fixture_mu_alpha(spec, params)
        r = np.linspace(1e-3, 2 * d, 57)
        rel = closed_form_radial_residual(spec, alphas, mu, r)
        assert rel.max() <= 1e-12

    def test_residual_at_scale_radius(self, params_f2, spec_f2):
        d, mu, alphas = fixture_mu_alpha(spec_f2, params_f2)
        rel = closed_form_radial_residual(spec_f2, alphas, mu, np.array([mu]))
        assert rel.max() <= 1e-13

    def test_far_field_decay(self):
        alphas, mu = np.array([3.0]), 2.0
        R = 1e6
        psi = closed_form_psi(3, alphas, mu, R)
        assert R * psi[0] == pytest.approx(3.0, rel=1e-9)


class TestIntegrateRadial:
    def test_matches_closed_form_on_ball(self, fixture_pair):
        spec, params = fixture_pair
        d, mu, alphas = fixture_mu_alpha(spec, params)
        psi0 = alphas * mu ** (2 - spec.N)
        r = np.linspace(0.0, 2 * d, 200)
        traj = integrate_radial(spec, psi0, 2 * d, tol=1e-10, r_eval=r)
        exact = closed_form_psi(spec.N, alphas, mu, r)
        assert np.max(np.abs(traj.psi - exact) / exact) <= 1e-8

    def test_initial_curvature_matches_series(self, spec_f2, params_f2):
        # psi''(0) = -prod_j psi_j(0)^A[i,j] / N, the regularized origin limit
        spec = spec_f2
        d, mu, alphas = fixture_mu_alpha(spec, params_f2)
        psi0 = alphas * mu ** (2 - spec.N)
        delta = 1e-3
        traj = integrate_radial(spec, psi0, 2 * d, tol=1e-12, r_eval=[delta])
        prod0 = np.exp(spec.A @ np.log(psi0))
        curvature = 2 * (traj.psi[0] - psi0) / delta**2
        np.testing.assert_allclose(curvature, -prod0 / spec.N, rtol=1e-4)

    def test_zero_interval_returns_single_identity_state(self, spec_f1):
        traj = integrate_radial(spec_f1, [1.3], 0.0, tol=1e-10)
        assert traj.r.shape == (1,)
        assert traj.r[0] == 0.0
        np.testing.assert_array_equal(traj.psi[0], [1.3])
        np.testing.assert_array_equal(traj.dpsi[0], [0.0])

    def test_tolerance_controls_error_with_consistent_order(self, spec_f2, params_f2):
        # An adaptive error-per-step scheme tracks tol roughly linearly, so a
        # 16x tighter tolerance must cut the match error by at least 4x.
        spec = spec_f2
        d, mu, alphas = fixture_mu_alpha(spec, params_f2)
        psi0 = alphas * mu ** (2 - spec.N)
        r = np.linspace(0.0, 2 * d, 100)
        exact = closed_form_psi(spec.N, alphas, mu, r)

        def err(tol):
            traj = integrate_radial(spec, psi0, 2 * d, tol=tol, r_eval=r)
            return np.max(np.abs(traj.psi - exact) / exact)

        assert err(1e-6) / err(1e-6 / 16) >= 4.0

    def test_positivity_loss_for_mismatched_components(self, spec_f3):
        with pytest.raises(PositivityLoss):
            integrate_radial(spec_f3, np.array([1.0, 5.0]), 100.0, tol=1e-10)

    def test_rejects_bad_inputs(self, spec_f1):
        with pytest.raises(ValueError):
            integrate_radial(spec_f1, [-1.0], 1.0, 1e-10)
        with pytest.raises(ValueError):
            integrate_radial(spec_f1, [1.0], 1.0, 0.0)


class TestShooting:
    def test_reproduces_recovered_parameters(self, fixture_pair):
        spec, params = fixture_pair
        d, mu, alphas = fixture_mu_alpha(spec, params)
        alphas_shot, mu_shot = shoot_robin(spec, d, tol=1e-10)
        assert abs(mu_shot - mu) / mu <= 1e-8
        np.testing.assert_allclose(alphas_shot, alphas, rtol=1e-8)

    def test_terminal_value_matches_transported_boundary_value(self, fixture_pair):
        # psi(2d) must equal 2^(2-N) u(xbar) for the matching half-space bubble
        from halfspace_bubbles.bubble_family import evaluate_bubble

        spec, params = fixture_pair
        setup = setup_from_params(params)
        d = setup.d
        alphas, mu = shoot_robin(spec, d, tol=1e-10)
        psi_2d = closed_form_psi(spec.N, alphas, mu, 2 * d)
        expected = 2.0 ** (2 - spec.N) * evaluate_bubble(params, setup.xbar)
        np.testing.assert_allclose(psi_2d, expected, rtol=1e-8)

    def test_incompatible_rows_fail(self):
        spec = EllipticSystemSpec(
            N=4, m=2, A=[[1.0, 2.0], [2.0, 1.0]], B=[[2.0, 0.0], [0.0, 2.0]], c=[-1.0, -0.5]
        )
        with pytest.raises(ShootFailed):
            shoot_robin(spec, np.sqrt(3.0), tol=1e-10)


class TestHalflineBreakdown:
    def test_breakdown_time_matches_energy_oracle(self, spec_f1):
        oracle = breakdown_time_oracle()
        assert oracle == pytest.approx(2.1032731579881814, abs=1e-12)
        cert = halfline_breakdown(spec_f1, [1.0])
        assert abs(cert.t_star - oracle) / oracle <= 1e-8
        assert cert.failing_component == 0

    def test_negative_coefficient_breaks_down_sooner(self, spec_f1, spec_f2):
        t_free = halfline_breakdown(spec_f1, [1.0]).t_star
        t_pulled = halfline_breakdown(spec_f2, [1.0]).t_star
        assert t_pulled < t_free

    def test_positive_coefficient_rises_then_falls(self):
        spec = EllipticSystemSpec(N=3, m=1, A=[[5.0]], B=[[3.0]], c=[1.0])
        cert = halfline_breakdown(spec, [1.0])
        slopes = cert.trace[:, 2]
        assert slopes[0] > 0.0  # starts climbing
        assert slopes[-1] < 0.0  # ends falling
        assert cert.t_star > 0.0

    def test_slopes_decrease_monotonically(self, fixture_pair):
        spec, _ = fixture_pair
        cert = halfline_breakdown(spec, np.full(spec.m, 1.0))
        slopes = cert.trace[:, 1 + spec.m :]
        assert np.max(np.diff(slopes, axis=0)) <= 1e-9

    def test_energy_conserved_for_single_component(self, spec_f1):
        cert = halfline_breakdown(spec_f1, [1.0])
        u = cert.trace[:, 1]
        du = cert.trace[:, 2]
        energy = du**2 / 2 + u**6 / 6
        assert np.max(np.abs(energy - 1.0 / 6.0)) * 6 <= 1e-8

    def test_certificate_invariants(self, spec_f2):
        cert = halfline_breakdown(spec_f2, [2.0], tol=1e-12)
        lo, hi = cert.bracket
        assert lo <= cert.t_star <= hi
        assert hi - lo <= max(1e-12, 1e-12 * hi) or abs(
            cert.u_at_t_star[cert.failing_component]
        ) <= 1e-12 * 2.0
        assert abs(cert.u_at_t_star[cert.failing_component]) <= 1e-10 * 2.0
        # positive all along the recorded trace before the crossing
        before = cert.trace[:-1]
        assert np.all(before[:, 1 : 1 + spec_f2.m] > 0.0)

    def test_every_coefficient_and_scale_terminates(self):
        for c in (-1.0, 0.0, 1.0):
            spec = EllipticSystemSpec(N=3, m=1, A=[[5.0]], B=[[3.0]], c=[c])
            for u0 in (0.5, 1.0, 2.0):
                cert = halfline_breakdown(spec, [u0])
                assert np.isfinite(cert.t_star) and cert.t_star > 0.0

    def test_two_component_certificate(self, spec_f3):
        cert = halfline_breakdown(spec_f3, [1.0, 1.0])
        assert cert.t_star > 0.0

    def test_horizon_flags_setup_problem(self, spec_f1):
        with pytest.raises(HorizonExceeded):
            halfline_breakdown(spec_f1, [1.0], horizon=0.1)

    def test_rejects_nonpositive_start(self, spec_f1):
        with pytest.raises(ValueError):
            halfline_breakdown(spec_f1, [0.0])


def test_degenerate_family_shoots_with_kernel_direction():
    # rank-deficient amplitude system: shooting carries one kernel coordinate
    spec = EllipticSystemSpec(
        N=4, m=2, A=[[2.0, 1.0], [1.0, 2.0]], B=[[1.0, 1.0], [1.0, 1.0]], c=[-1.0, -1.0]
    )
    assert solve_betas(spec, 1.0).nullity == 1
    d = np.sqrt(3.0)
    alphas, mu = shoot_robin(spec, d, tol=1e-10)
    # whatever member the shot lands on must satisfy the amplitude identity
    condition = np.log(alphas) - spec.A @ np.log(alphas) + np.log(mu**2 * 8.0)
    assert np.max(np.abs(condition)) <= 1e-8
