import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cnoma_eh.errors import DivisionDegenerate, DomainError, InfeasibleChannel
from cnoma_eh.model import (
    ChannelRealization,
    DesignPoint,
    SystemParams,
    rates,
    sinr_mrc_at_u2,
    sinr_x2_at_u1,
)
from cnoma_eh.optimizer import (
    AlphaGridSpec,
    Grid2DSpec,
    SolverBranch,
    boundary_coeffs,
    df_drho_numerator,
    f_objective,
    inner_coeffs,
    optimal_rho_for_alpha,
    rho_bar,
    rho_tilde,
    solve_1d,
    solve_2d_exhaustive,
    theta_beta,
)
from cnoma_eh.validation import random_instances

from conftest import ordered_channels, system_params_strategy


def sinr_gap(p, ch, alpha, rho):
    d = DesignPoint(alpha=alpha, rho=rho)
    return sinr_x2_at_u1(p, ch, d) - sinr_mrc_at_u2(p, ch, d)


def bisect_crossing(p, ch, alpha, iters=200):
    """Independent root finder for the SINR crossing in rho; None if the
    constraint never binds on [0, 1)."""
    lo, hi = 0.0, 1.0 - 1e-15
    if sinr_gap(p, ch, alpha, hi) >= 0.0:
        return None
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if sinr_gap(p, ch, alpha, mid) >= 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def log_f_alpha(ic, wtilde2, rho):
    return (
        np.log(ic.d - ic.e * rho) - np.log(ic.t - rho)
        + wtilde2 * np.log(ic.p + ic.q * rho)
    )


class TestInnerCoefficients:
    def test_hand_values(self):
        p = SystemParams(avg_snr=40.0, mu=1.0, eta=1.0, w1=1.0, w2=2.0)
        ch = ChannelRealization(g1=0.5, g2=0.1, g3=0.5)
        ic = inner_coeffs(p, ch, 0.25)
        assert (ic.d, ic.e, ic.t) == (7.0, 6.0, 2.0)
        assert ic.q == 5.0

    def test_mu_zero_collapses_d_to_e(self):
        p = SystemParams(avg_snr=10.0, mu=0.0)
        ch = ChannelRealization(g1=1.0, g2=0.3, g3=0.4)
        ic = inner_coeffs(p, ch, 0.4)
        assert ic.d == ic.e
        assert ic.t == 1.0

    @given(p=system_params_strategy(), ch=ordered_channels(),
           alpha=st.floats(0.01, 0.99))
    def test_structural_invariants(self, p, ch, alpha):
        ic = inner_coeffs(p, ch, alpha)
        assert ic.d == pytest.approx(ic.e + p.mu, rel=1e-15)
        assert ic.t <= ic.d
        assert ic.p >= 1.0
        assert ic.q >= 0.0

    @given(p=system_params_strategy(), ch=ordered_channels(),
           alpha=st.floats(0.01, 0.99), rho=st.floats(0.0, 0.95))
    def test_f_alpha_matches_raw_sinr_objective(self, p, ch, alpha, rho):
        ic = inner_coeffs(p, ch, alpha)
        d = DesignPoint(alpha=alpha, rho=rho)
        f_raw = f_objective(p, ch, d)
        f_coeff = (ic.d - ic.e * rho) / (ic.t - rho) * (ic.p + ic.q * rho) ** p.wtilde2
        assert f_coeff == pytest.approx(f_raw, rel=1e-12)


class TestBoundary:
    def test_coefficient_signs(self):
        for p, ch in random_instances(3, 50):
            bc = boundary_coeffs(p, ch, 0.4)
            if p.eta > 0 and ch.g1 > 0 and ch.g3 > 0:
                assert bc.a > 0
            assert bc.c > 0  # holds whenever g1 > g2

    def test_requires_ordered_channel(self):
        p = SystemParams(avg_snr=10.0)
        with pytest.raises(InfeasibleChannel):
            rho_tilde(p, ChannelRealization(g1=0.5, g2=0.5, g3=1.0), 0.5)
        with pytest.raises(InfeasibleChannel):
            rho_tilde(p, ChannelRealization(g1=0.2, g2=0.5, g3=1.0), 0.5)

    def test_alpha_domain(self):
        p = SystemParams(avg_snr=10.0)
        ch = ChannelRealization(g1=1.0, g2=0.5, g3=1.0)
        for bad in (0.0, 1.0, -0.5):
            with pytest.raises(DomainError):
                rho_tilde(p, ch, bad)

    def test_hand_instance_matches_bisection(self):
        p = SystemParams(avg_snr=100.0, mu=0.5, eta=1.0)
        ch = ChannelRealization(g1=2.0, g2=0.5, g3=1.0)
        rt = rho_tilde(p, ch, 0.3)
        ref = bisect_crossing(p, ch, 0.3)
        assert ref is not None
        assert rt == pytest.approx(ref, abs=1e-12)
        d = DesignPoint(alpha=0.3, rho=rt)
        s_mrc = sinr_mrc_at_u2(p, ch, d)
        assert abs(sinr_x2_at_u1(p, ch, d) - s_mrc) / (1.0 + s_mrc) < 1e-9

    def test_strictly_positive_at_ordered_channels(self):
        for p, ch in random_instances(5, 100):
            assert rho_tilde(p, ch, 0.25) > 0.0

    def test_random_instances_match_bisection(self):
        rng = np.random.default_rng(17)
        for p, ch in random_instances(11, 200):
            alpha = float(rng.uniform(0.02, 0.98))
            rt = rho_tilde(p, ch, alpha)
            ref = bisect_crossing(p, ch, alpha)
            if ref is None:
                # no crossing below 1: the boundary sits at 1 up to roundoff
                assert rt >= 1.0 - 1e-9
            else:
                assert rt == pytest.approx(ref, abs=1e-9)

    def test_weak_relay_with_no_conversion_noise_never_binds(self):
        # with mu = 0 the decode SINR no longer depends on rho, so a weak
        # enough relay link leaves the whole [0, 1) range feasible
        p = SystemParams(avg_snr=10.0, mu=0.0, eta=1.0)
        ch = ChannelRealization(g1=1.0, g2=0.3, g3=1e-9)
        assert rho_tilde(p, ch, 0.5) == 1.0
        assert bisect_crossing(p, ch, 0.5) is None
        # and as the relay weakens, the boundary climbs toward 1
        prev = 0.0
        for g3 in (0.5, 0.2, 0.1, 0.05):
            rt = rho_tilde(p, ChannelRealization(g1=1.0, g2=0.3, g3=g3), 0.5)
            assert rt >= prev
            prev = rt

    def test_constraint_equivalence(self):
        rng = np.random.default_rng(23)
        for p, ch in random_instances(29, 200):
            alpha = float(rng.uniform(0.02, 0.98))
            rt = rho_tilde(p, ch, alpha)
            for rho in rng.uniform(0.0, 0.999, 50):
                gap = sinr_gap(p, ch, alpha, float(rho))
                d = DesignPoint(alpha=alpha, rho=float(rho))
                band = 1e-8 * (1.0 + sinr_mrc_at_u2(p, ch, d))
                if rho <= rt - 1e-12:
                    assert gap >= -band
                elif rho >= rt + 1e-12:
                    assert gap <= band


class TestObjective:
    def test_reformulation_equivalence(self):
        for p, ch in random_instances(31, 100):
            d = DesignPoint(alpha=0.35, rho=0.2)
            f = f_objective(p, ch, d)
            r = rates(p, ch, d)
            lhs = 0.5 * p.w1 * math.log2(f)
            rhs = p.w1 * r.c1 + p.w2 * 0.5 * math.log2(1 + sinr_mrc_at_u2(p, ch, d))
            assert lhs == pytest.approx(rhs, rel=1e-12)
            assert f > 0

    def test_degenerate_values(self):
        p = SystemParams(avg_snr=1.0, w1=1.0, w2=2.0)
        ch = ChannelRealization(g1=0.0, g2=0.0, g3=0.0)
        assert f_objective(p, ch, DesignPoint(0.5, 0.0)) == 1.0

    def test_exact_sinr_pair_values(self):
        # decode SINR 3 and combiner SINR 1: f = 4 * 2^wr
        ch = ChannelRealization(g1=0.25, g2=1.0 / 24.0, g3=0.0)
        d = DesignPoint(alpha=0.25, rho=0.0)
        p1 = SystemParams(avg_snr=48.0, mu=0.0, w1=1.0, w2=1.0)
        p2 = SystemParams(avg_snr=48.0, mu=0.0, w1=1.0, w2=2.0)
        assert f_objective(p1, ch, d) == pytest.approx(8.0, rel=1e-14)
        assert f_objective(p2, ch, d) == pytest.approx(16.0, rel=1e-14)


class TestDerivativeNumerator:
    def test_rho_domain(self):
        p = SystemParams(avg_snr=10.0)
        ic = inner_coeffs(p, ChannelRealization(2.0, 0.5, 1.0), 0.5)
        with pytest.raises(DomainError):
            df_drho_numerator(ic, 2.0, 1.0)

    def test_mu_zero_form(self):
        # with d = e and t = 1 the numerator reduces to q wr (1 - rho)(d - e rho) > 0
        p = SystemParams(avg_snr=10.0, mu=0.0, w1=1.0, w2=3.0)
        ic = inner_coeffs(p, ChannelRealization(1.5, 0.5, 0.7), 0.4)
        for rho in (0.0, 0.3, 0.9):
            expected = ic.q * 3.0 * (1 - rho) * (ic.d - ic.e * rho)
            assert df_drho_numerator(ic, 3.0, rho) == pytest.approx(expected, rel=1e-13)
            assert df_drho_numerator(ic, 3.0, rho) > 0

    def test_dead_relay_form(self):
        # q = 0: numerator = (d - e t) p = -mu alpha snr g1 p <= 0
        p = SystemParams(avg_snr=10.0, mu=0.8, w1=1.0, w2=2.0)
        ic = inner_coeffs(p, ChannelRealization(1.5, 0.5, 0.0), 0.4)
        assert ic.q == 0.0
        expected = -(0.8 * 0.4 * 10.0 * 1.5) * ic.p
        for rho in (0.0, 0.5):
            assert df_drho_numerator(ic, 2.0, rho) == pytest.approx(expected, rel=1e-13)

    def test_sign_matches_finite_differences(self):
        rng = np.random.default_rng(37)
        for p, ch in random_instances(41, 100):
            alpha = float(rng.uniform(0.05, 0.95))
            rho = float(rng.uniform(0.0, 0.9))
            ic = inner_coeffs(p, ch, alpha)
            num = df_drho_numerator(ic, p.wtilde2, rho)
            h = 1e-7
            fd = (log_f_alpha(ic, p.wtilde2, rho + h)
                  - log_f_alpha(ic, p.wtilde2, max(rho - h, 0.0)))
            scale = abs(ic.d * ic.p) + abs(ic.q * p.wtilde2 * ic.t * ic.d)
            if abs(num) > 1e-6 * scale:  # away from the stationary point
                assert math.copysign(1, num) == math.copysign(1, fd)


class TestThetaBeta:
    def test_dead_relay(self):
        p = SystemParams(avg_snr=10.0, mu=1.0)
        ic = inner_coeffs(p, ChannelRealization(1.0, 0.5, 0.0), 0.5)
        theta, beta = theta_beta(ic, 2.0)
        assert beta == 0.0
        assert theta == 0.0

    def test_equal_weights_beta(self):
        p = SystemParams(avg_snr=10.0, mu=0.7)
        ic = inner_coeffs(p, ChannelRealization(1.3, 0.4, 0.9), 0.35)
        _, beta = theta_beta(ic, 1.0)
        assert beta == pytest.approx(ic.q * ic.e * ic.t, rel=1e-14)

    def test_discriminant_matches_polynomial_fit(self):
        # interpolate the quadratic numerator through three points in
        # high-precision arithmetic and compare its discriminant with 4 theta
        mp = pytest.importorskip("mpmath")
        rng = np.random.default_rng(43)
        with mp.workdps(50):
            for p, ch in random_instances(47, 100):
                alpha = float(rng.uniform(0.05, 0.95))
                ic = inner_coeffs(p, ch, alpha)
                if ic.q == 0.0:
                    continue
                wr = mp.mpf(p.wtilde2)
                d, e, t, pp, q = (mp.mpf(v) for v in (ic.d, ic.e, ic.t, ic.p, ic.q))

                def num(rho):
                    return (d - e * t) * (pp + q * rho) + q * wr * (t - rho) * (d - e * rho)

                n_m, n_0, n_p = num(-1), num(0), num(1)
                a_fit = (n_p + n_m) / 2 - n_0
                b_fit = (n_p - n_m) / 2
                disc_fit = b_fit * b_fit - 4 * a_fit * n_0
                theta, beta = theta_beta(ic, p.wtilde2)
                constant = (ic.d - ic.e * ic.t) * ic.p + ic.q * p.wtilde2 * ic.t * ic.d
                scale = 4.0 * max(beta * beta, abs(ic.q * p.wtilde2 * ic.e * constant))
                assert abs(float(disc_fit) - 4.0 * theta) <= 1e-10 * scale


class TestRhoBar:
    def interior_cases(self, n=400, seed=53):
        rng = np.random.default_rng(seed)
        for p, ch in random_instances(seed, n):
            alpha = float(rng.uniform(0.05, 0.95))
            ic = inner_coeffs(p, ch, alpha)
            if ic.q == 0.0:
                continue
            theta, _ = theta_beta(ic, p.wtilde2)
            if theta <= 0.0:
                continue
            rb = rho_bar(ic, p.wtilde2)
            yield p, ch, alpha, ic, rb

    def test_degenerate_division(self):
        p = SystemParams(avg_snr=10.0, mu=1.0)
        ic = inner_coeffs(p, ChannelRealization(1.0, 0.5, 0.0), 0.5)
        with pytest.raises(DivisionDegenerate):
            rho_bar(ic, 2.0)

    def test_stationary_point_of_derivative(self):
        found = 0
        for p, ch, alpha, ic, rb in self.interior_cases():
            if not 0.0 <= rb < 1.0:
                continue
            found += 1
            # conditioning scale of evaluating the quadratic at rb
            theta, beta = theta_beta(ic, p.wtilde2)
            constant = (ic.d - ic.e * ic.t) * ic.p + ic.q * p.wtilde2 * ic.t * ic.d
            scale = ic.q * p.wtilde2 * ic.e * rb * rb + 2 * abs(beta) * rb + abs(constant)
            assert abs(df_drho_numerator(ic, p.wtilde2, rb)) <= 1e-9 * scale
        assert found > 10

    def test_local_maximum_probe(self):
        eps = 1e-4
        for p, ch, alpha, ic, rb in self.interior_cases():
            if not eps < rb < 1.0 - eps:
                continue
            fm = log_f_alpha(ic, p.wtilde2, rb - eps)
            f0 = log_f_alpha(ic, p.wtilde2, rb)
            fp = log_f_alpha(ic, p.wtilde2, rb + eps)
            assert fm < f0 and fp < f0

    def test_bounded_by_t_for_growing_weight_ratio(self):
        p0 = SystemParams(avg_snr=30.0, mu=1.0)
        ch = ChannelRealization(g1=1.2, g2=0.4, g3=0.8)
        ic = inner_coeffs(p0, ch, 0.3)
        grid = np.linspace(0.0, 0.999999, 10_000)
        for wr in (1.5, 3.0, 10.0, 1e2, 1e4):
            theta, _ = theta_beta(ic, wr)
            if theta <= 0:
                continue
            rb = rho_bar(ic, wr)
            assert rb <= ic.t + 1e-12
            if 0 < rb < 1:  # fine-grid argmax agrees with the closed form
                best = grid[np.argmax(log_f_alpha(ic, wr, grid))]
                assert abs(best - rb) < 2e-4


class TestRhoPolicy:
    def test_dead_relay_goes_to_zero_not_boundary(self):
        p = SystemParams(avg_snr=10.0, mu=1.0, w1=1.0, w2=2.0)
        ch = ChannelRealization(g1=1.5, g2=0.5, g3=0.0)
        rho, branch = optimal_rho_for_alpha(p, ch, 0.4)
        assert rho == 0.0
        assert branch is SolverBranch.LOWER
        ic = inner_coeffs(p, ch, 0.4)
        grid = np.linspace(0.0, rho_tilde(p, ch, 0.4), 10_000)
        vals = log_f_alpha(ic, p.wtilde2, grid)
        assert vals[0] == pytest.approx(float(np.max(vals)), rel=1e-12)

    def test_no_conversion_noise_rides_the_boundary(self):
        p = SystemParams(avg_snr=10.0, mu=0.0, w1=1.0, w2=2.0)
        ch = ChannelRealization(g1=1.5, g2=0.5, g3=0.8)
        rho, branch = optimal_rho_for_alpha(p, ch, 0.4)
        assert branch is SolverBranch.BOUNDARY
        assert rho == pytest.approx(rho_tilde(p, ch, 0.4), abs=1e-9)

    def test_policy_beats_dense_grid(self):
        rng = np.random.default_rng(61)
        for p, ch in random_instances(67, 300):
            alpha = float(rng.uniform(0.05, 0.95))
            rho, _ = optimal_rho_for_alpha(p, ch, alpha)
            ic = inner_coeffs(p, ch, alpha)
            rt = min(rho_tilde(p, ch, alpha), 1.0 - 1e-9)
            grid = np.linspace(0.0, rt, 10_000)
            best = float(np.max(log_f_alpha(ic, p.wtilde2, grid)))
            mine = log_f_alpha(ic, p.wtilde2, rho)
            assert mine >= best - 1e-6 * abs(best) - 1e-12

    def test_unimodal_shape_classification(self):
        # the fixed-alpha objective is monotone or single-peaked as the
        # (theta, rho_bar) classification predicts
        rng = np.random.default_rng(71)
        for p, ch in random_instances(73, 120):
            alpha = float(rng.uniform(0.05, 0.95))
            ic = inner_coeffs(p, ch, alpha)
            grid = np.linspace(0.0, 1.0 - 1e-6, 10_000)
            vals = log_f_alpha(ic, p.wtilde2, grid)
            diffs = np.diff(vals)
            signs = np.sign(diffs[np.abs(diffs) > 1e-13])
            changes = int(np.count_nonzero(np.diff(signs)))
            if ic.q == 0.0:
                assert changes == 0 and (len(signs) == 0 or signs[0] <= 0)
                continue
            theta, _ = theta_beta(ic, p.wtilde2)
            rb = rho_bar(ic, p.wtilde2) if theta > 0 else None
            if theta > 0 and rb is not None and 1e-4 < rb < 1 - 1e-4:
                assert changes <= 1
                if changes == 1:
                    assert signs[0] > 0 and signs[-1] < 0
            elif theta > 0 and rb is not None and rb <= 0:
                assert changes == 0 and signs[0] < 0
            elif theta <= 0:
                assert changes == 0 and (len(signs) == 0 or signs[0] > 0)


class TestSolve1D:
    def test_trivial_weights(self):
        ch = ChannelRealization(g1=1.5, g2=0.5, g3=0.8)
        for w1, w2 in ((2.0, 1.0), (1.0, 1.0)):
            p = SystemParams(avg_snr=10.0, w1=w1, w2=w2)
            out = solve_1d(p, ch)
            assert out.branch is SolverBranch.TRIVIAL
            assert out.alpha_star == 1.0 - 1e-4
            assert out.rho_star == 0.0
            assert out.evaluations == 1

    def test_requires_ordered_channel(self):
        p = SystemParams(avg_snr=10.0, w1=1.0, w2=2.0)
        with pytest.raises(InfeasibleChannel):
            solve_1d(p, ChannelRealization(g1=0.5, g2=0.5, g3=0.8))

    def test_weight_scaling_leaves_argmax_unchanged(self):
        ch = ChannelRealization(g1=1.5, g2=0.5, g3=0.8)
        p = SystemParams(avg_snr=10.0, w1=1.0, w2=2.0)
        p7 = SystemParams(avg_snr=10.0, w1=7.0, w2=14.0)
        a, b = solve_1d(p, ch), solve_1d(p7, ch)
        assert a.alpha_star == b.alpha_star
        assert a.rho_star == b.rho_star
        assert b.rate_triple.weighted_sum == pytest.approx(
            7 * a.rate_triple.weighted_sum, rel=1e-12
        )

    def test_beats_2d_oracle(self):
        for p, ch in random_instances(79, 40):
            ws_1d = solve_1d(p, ch).rate_triple.weighted_sum
            ws_2d = solve_2d_exhaustive(
                p, ch, Grid2DSpec(n_alpha=150, n_rho=150)
            ).rate_triple.weighted_sum
            assert ws_1d >= ws_2d - 1e-4

    def test_feasible_and_combiner_limited_at_optimum(self):
        for p, ch in random_instances(83, 40):
            out = solve_1d(p, ch)
            assert 0.0 <= out.rho_star <= rho_tilde(p, ch, out.alpha_star) + 1e-12
            d = DesignPoint(out.alpha_star, out.rho_star)
            s_mrc = sinr_mrc_at_u2(p, ch, d)
            assert sinr_x2_at_u1(p, ch, d) >= s_mrc - 1e-8 * (1.0 + s_mrc)
            # reported branch is the case actually taken at alpha_star
            rho_again, branch_again = optimal_rho_for_alpha(p, ch, out.alpha_star)
            assert out.branch is branch_again
            assert out.rho_star == rho_again

    def test_objective_consistent_with_rates(self):
        p = SystemParams(avg_snr=25.0, mu=0.5, w1=1.0, w2=3.0)
        ch = ChannelRealization(g1=2.0, g2=0.6, g3=1.1)
        out = solve_1d(p, ch)
        d = DesignPoint(out.alpha_star, out.rho_star)
        assert out.objective_f == pytest.approx(f_objective(p, ch, d), rel=1e-12)
        assert out.rate_triple.weighted_sum == pytest.approx(
            rates(p, ch, d).weighted_sum, rel=1e-14
        )
        assert out.evaluations >= 1000

    def test_refinement_never_hurts(self):
        for p, ch in random_instances(89, 30):
            coarse = solve_1d(p, ch, AlphaGridSpec(n=200, refine=False))
            refined = solve_1d(p, ch, AlphaGridSpec(n=200, refine=True))
            assert refined.rate_triple.weighted_sum >= coarse.rate_triple.weighted_sum - 1e-12


class TestSolve2D:
    def test_degenerate_grid_returns_best_corner(self):
        p = SystemParams(avg_snr=10.0, mu=1.0, w1=1.0, w2=2.0)
        ch = ChannelRealization(g1=1.5, g2=0.5, g3=0.8)
        grid = Grid2DSpec(n_alpha=2, n_rho=2)
        out = solve_2d_exhaustive(p, ch, grid)
        corners = []
        for a in (grid.alpha_margin, 1 - grid.alpha_margin):
            for r in (0.0, grid.rho_max):
                corners.append(rates(p, ch, DesignPoint(a, r)).weighted_sum)
        assert out.rate_triple.weighted_sum == max(corners)
        assert out.evaluations == 4

    def test_grid_must_have_two_points_per_axis(self):
        with pytest.raises(DomainError):
            Grid2DSpec(n_alpha=1, n_rho=10)

    def test_nested_refinement_is_monotone(self):
        p = SystemParams(avg_snr=15.0, mu=1.0, w1=1.0, w2=3.0)
        ch = ChannelRealization(g1=1.2, g2=0.4, g3=0.9)
        values = []
        for n in (25, 49, 97):  # nested uniform grids: midpoints added
            out = solve_2d_exhaustive(p, ch, Grid2DSpec(n_alpha=n, n_rho=n))
            values.append(out.rate_triple.weighted_sum)
        assert values[0] <= values[1] <= values[2]

    def test_tie_break_prefers_smallest_rho(self):
        # mu = 0 and a dead relay make the weighted sum independent of rho,
        # so the argmax must land on rho = 0
        p = SystemParams(avg_snr=10.0, mu=0.0, w1=1.0, w2=2.0)
        ch = ChannelRealization(g1=1.5, g2=0.5, g3=0.0)
        out = solve_2d_exhaustive(p, ch, Grid2DSpec(n_alpha=40, n_rho=40))
        assert out.rho_star == 0.0
        assert out.branch is SolverBranch.GRID
