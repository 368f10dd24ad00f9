import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import oracle_threshold, xi_fraction, xi_mpmath
from swaplab import stats

# frozen independent-oracle values (fractions/mpmath, see oracles.py)
XI_10_05_09 = 0.0016349374  # exact rational: 16349374/10^10 at these floats
KL_05_09 = 0.5108256237659907
GAMMA_TILDE_05_09 = 0.7745966692414834  # = sqrt(0.6)


class TestConversions:
    def test_prob_to_overlap_parallel(self):
        assert stats.prob_to_overlap_sq(1.0) == 1.0

    def test_prob_to_overlap_orthogonal(self):
        assert stats.prob_to_overlap_sq(0.5) == 0.0

    def test_prob_to_overlap_mid(self):
        assert stats.prob_to_overlap_sq(0.75) == pytest.approx(0.5)

    def test_prob_to_overlap_clamps(self):
        assert stats.prob_to_overlap_sq(0.2) == 0.0

    def test_distance_identical(self):
        assert stats.overlap_to_distance(1.0) == 0.0

    def test_distance_orthogonal(self):
        assert stats.overlap_to_distance(0.0) == pytest.approx(math.sqrt(2))

    def test_distance_inv_sqrt2(self):
        # sqrt(2 - sqrt(2)), cross-checked against the classical distance of
        # unit 2-vectors at 45 degrees
        expected = 0.7653668647301795
        assert stats.overlap_to_distance(1 / math.sqrt(2)) == pytest.approx(
            expected, abs=1e-12
        )
        u = np.array([1.0, 0.0])
        w = np.array([1.0, 1.0]) / math.sqrt(2)
        assert np.linalg.norm(u - w) == pytest.approx(expected, abs=1e-12)

    def test_distance_domain(self):
        with pytest.raises(ValueError):
            stats.overlap_to_distance(1.5)

    @given(st.floats(0.0, 1.0))
    @settings(max_examples=100, deadline=None)
    def test_round_trip(self, x):
        assert stats.prob_to_overlap_sq((1.0 + x) / 2.0) == pytest.approx(
            x, abs=1e-15
        )

    @given(st.floats(0.001, 1.0), st.floats(0.001, 1.0))
    @settings(max_examples=100, deadline=None)
    def test_distance_monotone_decreasing(self, a, b):
        lo, hi = min(a, b), max(a, b)
        assert stats.overlap_to_distance(hi) <= stats.overlap_to_distance(lo)


class TestAlphaEps:
    def test_standard_sqrt2(self):
        assert stats.alpha_eps_standard(math.sqrt(2)) == pytest.approx(0.5)

    def test_standard_one(self):
        assert stats.alpha_eps_standard(1.0) == pytest.approx(0.625)

    def test_standard_small_eps_limit(self):
        assert stats.alpha_eps_standard(1e-9) == pytest.approx(1.0)

    def test_standard_domain(self):
        with pytest.raises(ValueError):
            stats.alpha_eps_standard(0.0)
        with pytest.raises(ValueError):
            stats.alpha_eps_standard(1.5)

    def test_multi_sqrt2_n4(self):
        assert stats.alpha_eps_multi(math.sqrt(2), 4) == pytest.approx(0.125)

    def test_multi_one_n4(self):
        assert stats.alpha_eps_multi(1.0, 4) == pytest.approx(0.15625)

    def test_multi_sqrt2_n8(self):
        assert stats.alpha_eps_multi(math.sqrt(2), 8) == pytest.approx(8 / 512)

    def test_multi_equals_scaled_standard(self):
        for n in (4, 8, 16):
            assert stats.alpha_eps_multi(0.8, n) == pytest.approx(
                stats.alpha_eps_standard(0.8) * 16 / n**3
            )


class TestP0ijTheory:
    def test_parallel_n4(self):
        assert stats.p0ij_theory(1.0, 4) == pytest.approx(0.25)

    def test_orthogonal_n4(self):
        assert stats.p0ij_theory(0.0, 4) == pytest.approx(0.125)

    def test_half_n8(self):
        assert stats.p0ij_theory(0.5, 8) == pytest.approx(0.0234375)

    def test_range(self):
        for n in (4, 8, 16):
            assert 8 / n**3 <= stats.p0ij_theory(0.0, n) <= 16 / n**3
            assert 8 / n**3 <= stats.p0ij_theory(1.0, n) <= 16 / n**3

    def test_bad_n(self):
        with pytest.raises(ValueError):
            stats.p0ij_theory(0.5, 6)


class TestKL:
    def test_worked_value(self):
        assert stats.kl_bernoulli(0.5, 0.9) == pytest.approx(0.5108, abs=1e-4)

    def test_identical(self):
        assert stats.kl_bernoulli(0.3, 0.3) == 0.0

    def test_symmetric_closed_form(self):
        assert stats.kl_bernoulli(0.25, 0.75) == pytest.approx(0.5 * math.log(3))

    def test_endpoints(self):
        with pytest.raises(ValueError):
            stats.kl_bernoulli(0.0, 0.5)
        with pytest.raises(ValueError):
            stats.kl_bernoulli(0.5, 1.0)

    @given(st.floats(0.01, 0.99), st.floats(0.01, 0.99))
    @settings(max_examples=200, deadline=None)
    def test_nonnegative(self, a, p):
        assert stats.kl_bernoulli(a, p) >= 0.0


class TestFalseNegativeExact:
    def test_single_trial(self):
        assert stats.false_negative_exact(1, 0.5, 0.9) == pytest.approx(0.1)

    def test_frozen_worked_value(self):
        assert stats.false_negative_exact(10, 0.5, 0.9) == pytest.approx(
            XI_10_05_09, rel=1e-9
        )

    def test_near_deterministic_success(self):
        assert stats.false_negative_exact(100, 0.5, 1 - 1e-15) < 1e-100

    def test_zero_n(self):
        with pytest.raises(ValueError):
            stats.false_negative_exact(0, 0.5, 0.9)

    def test_matches_fraction_oracle_small_n(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            N = int(rng.integers(1, 60))
            alpha = float(rng.uniform(0.05, 0.9))
            p = float(rng.uniform(alpha + 0.02, 0.99))
            got = stats.false_negative_exact(N, alpha, p)
            want = float(xi_fraction(N, alpha, p))
            assert got == pytest.approx(want, rel=1e-12, abs=1e-300)

    @pytest.mark.parametrize(
        "cell",
        [
            (10, 0.5, 0.9),
            (137, 0.35, 0.62),
            (200, 0.95, 0.99),
            (1000, 0.5, 0.9),
            (10**5, 0.5, 0.52),
            (10**6, 0.5, 0.506),
        ],
    )
    def test_matches_mpmath_oracle(self, cell):
        N, alpha, p = cell
        got = stats.false_negative_exact(N, alpha, p)
        want = float(xi_mpmath(N, alpha, p))
        assert got == pytest.approx(want, rel=1e-12)

    def test_threshold_exact_rational_ceiling(self):
        # N*(1-alpha) meant to be integral must not ceil upward through float fuzz
        assert stats.tail_threshold(10, 0.5) == 5
        assert stats.tail_threshold(3, 1 / 3) == 2
        assert stats.tail_threshold(100, 0.95) == 5
        assert stats.tail_threshold(20, 0.95) == 1
        # genuine fractions still ceil
        assert stats.tail_threshold(1, 0.5) == 1
        assert stats.tail_threshold(10, 0.55) == 5  # 4.5 -> 5
        assert stats.tail_threshold(10, 0.54) == 5  # 4.6 -> 5

    def test_monotone_in_p(self):
        values = [stats.false_negative_exact(25, 0.4, p) for p in (0.5, 0.6, 0.8, 0.95)]
        assert values == sorted(values, reverse=True)

    def test_monotone_in_alpha(self):
        values = [stats.false_negative_exact(25, a, 0.9) for a in (0.2, 0.4, 0.6, 0.8)]
        assert values == sorted(values)


class TestBoundPair:
    def test_n_gamma_sharpness_point(self):
        assert stats.n_gamma(GAMMA_TILDE_05_09, 0.5, 0.9) == pytest.approx(
            0.5, abs=0.005
        )

    def test_n_gamma_worked_value(self):
        assert stats.n_gamma(0.1, 0.5, 0.9) == pytest.approx(
            math.log(10) / KL_05_09, rel=1e-12
        )
        assert stats.n_gamma(0.1, 0.5, 0.9) == pytest.approx(4.51, abs=0.005)

    def test_n_gamma_diverges_near_alpha(self):
        assert stats.n_gamma(0.1, 0.5, 0.5 + 1e-9) > 1e15

    def test_n_gamma_orientation(self):
        with pytest.raises(ValueError):
            stats.n_gamma(0.1, 0.9, 0.5)

    def test_upper_inverts_n_gamma(self):
        for gamma in (0.9, 0.5, 0.1, 1e-3):
            N = stats.n_gamma(gamma, 0.5, 0.9)
            assert stats.chernoff_upper(N, 0.5, 0.9) == pytest.approx(
                gamma, rel=1e-12
            )

    def test_upper_worked_value(self):
        assert stats.chernoff_upper(10, 0.5, 0.9) == pytest.approx(
            math.exp(-10 * KL_05_09), rel=1e-12
        )
        assert stats.chernoff_upper(10, 0.5, 0.9) == pytest.approx(0.0060466176)

    def test_lower_worked_value(self):
        assert stats.chernoff_lower(10, 0.5, 0.9) == pytest.approx(
            0.0060466176 / math.sqrt(20), rel=1e-9
        )

    def test_lower_upper_ratio_identity(self):
        for N in (1, 2, 7, 50, 1000):
            ratio = stats.chernoff_lower(N, 0.3, 0.8) / stats.chernoff_upper(
                N, 0.3, 0.8
            )
            assert ratio == pytest.approx(1 / math.sqrt(2 * N), rel=1e-12)

    def test_lower_at_n_gamma_closed_form(self):
        gamma = 0.3
        alpha, p = 0.4, 0.7
        kl = stats.kl_bernoulli(alpha, p)
        N = stats.n_gamma(gamma, alpha, p)
        expected = gamma / math.sqrt(2 * math.log(1 / gamma) / kl)
        assert stats.chernoff_lower(N, alpha, p) == pytest.approx(expected, rel=1e-12)

    def test_zero_repetitions_limit(self):
        assert stats.chernoff_upper(1e-12, 0.5, 0.9) == pytest.approx(1.0)


class TestGammaTilde:
    def test_worked_value(self):
        assert stats.gamma_tilde(0.5, 0.9) == pytest.approx(0.7746, abs=5e-3)
        assert stats.gamma_tilde(0.5, 0.9) == pytest.approx(
            math.sqrt(0.6), rel=1e-12
        )

    def test_near_equal_parameters(self):
        assert stats.gamma_tilde(0.5, 0.5 + 1e-12) == pytest.approx(1.0)

    def test_definition_consistency(self):
        for alpha, p in [(0.5, 0.9), (0.2, 0.6), (0.7, 0.95)]:
            kl = stats.kl_bernoulli(alpha, p)
            assert kl == pytest.approx(
                2 * math.log(1 / stats.gamma_tilde(alpha, p)), rel=1e-12
            )

    @pytest.mark.parametrize("alpha,p", [(0.5, 0.9), (0.1, 0.3), (0.6, 0.99), (0.3, 0.35)])
    def test_sharpness_identity(self, alpha, p):
        g = stats.gamma_tilde(alpha, p)
        N = stats.n_gamma(g, alpha, p)
        assert abs(stats.chernoff_lower(N, alpha, p) - g) < 1e-12


class TestScalingCurves:
    def test_theorem1_substitutions(self):
        assert stats.theorem1_calls(4, 1.0) == pytest.approx(64.0)
        assert stats.theorem1_calls(8, 0.5) == pytest.approx(16384.0)

    def test_theorem1_doubling(self):
        for n in (4, 8, 16, 512):
            assert stats.theorem1_calls(2 * n, 0.2) == pytest.approx(
                64 * stats.theorem1_calls(n, 0.2)
            )

    def test_proposition1_substitutions(self):
        assert stats.proposition1_lower(8, 1 / math.e) == pytest.approx(
            512 / math.log(8)
        )
        assert stats.proposition1_lower(4, 1 / math.e) == pytest.approx(
            64 / math.log(4)
        )

    def test_proposition1_monotone(self):
        values = [stats.proposition1_lower(n, 0.5) for n in (4, 8, 16, 32, 64)]
        assert values == sorted(values)


class TestEstimates:
    def test_standard_parallel(self):
        est = stats.estimate_from_counts(100, 100, "standard")
        assert est.p_hat == 1.0 and est.overlap_sq_hat == 1.0 and est.distance_hat == 0.0

    def test_standard_orthogonal(self):
        est = stats.estimate_from_counts(50, 100, "standard")
        assert est.overlap_sq_hat == 0.0
        assert est.distance_hat == pytest.approx(math.sqrt(2))

    def test_multi_inversion_n4(self):
        est = stats.estimate_from_counts(25, 100, "multi", n=4)
        assert est.p_hat == 0.25
        assert est.overlap_sq_hat == pytest.approx(1.0)
        assert est.distance_hat == pytest.approx(0.0, abs=1e-7)

    def test_multi_custom_constant(self):
        est = stats.estimate_from_counts(30, 100, "multi", constant=0.2)
        assert est.overlap_sq_hat == pytest.approx(0.5)

    def test_clamping_flag(self):
        est = stats.estimate_from_counts(10, 100, "standard")
        assert est.clamped and est.overlap_sq_hat == 0.0
        est = stats.estimate_from_counts(90, 100, "standard")
        assert not est.clamped

    def test_hits_exceed_shots(self):
        with pytest.raises(ValueError):
            stats.estimate_from_counts(101, 100, "standard")

    def test_exact_probability_variant(self):
        est = stats.estimate_from_probability(0.75, "standard", pair=(0, 1))
        assert est.shots_total == 0 and est.overlap_sq_hat == pytest.approx(0.5)

    def test_bounds_query_validation(self):
        with pytest.raises(ValueError):
            stats.BoundsQuery(alpha=0.9, p=0.5, N=10, gamma=0.1)
        q = stats.BoundsQuery(alpha=0.5, p=0.9, N=10, gamma=0.1)
        assert q.xi_exact() == pytest.approx(XI_10_05_09, rel=1e-9)
        assert q.lower() <= q.xi_exact() <= q.upper()


class TestSandwich:
    def test_upper_bound_holds_everywhere(self):
        rng = np.random.default_rng(10)
        for _ in range(300):
            N = int(rng.integers(1, 201))
            alpha = float(rng.uniform(0.05, 0.95))
            p = float(rng.uniform(alpha + 0.02, 0.99))
            xi = stats.false_negative_exact(N, alpha, p)
            assert xi <= stats.chernoff_upper(N, alpha, p) + 1e-12

    def test_lower_bound_holds_on_aligned_cells(self):
        # N*(1-alpha) integral: the regime the lower bound is stated for
        rng = np.random.default_rng(20)
        checked = 0
        for _ in range(2000):
            N = int(rng.integers(1, 201))
            k = int(rng.integers(1, N + 1))
            alpha = 1.0 - k / N
            if not 0.03 <= alpha <= 0.97:
                continue
            p = float(rng.uniform(min(alpha + 0.02, 0.989), 0.99))
            if not alpha < p < 1.0:
                continue
            xi = stats.false_negative_exact(N, alpha, p)
            assert stats.chernoff_lower(N, alpha, p) <= xi * (1 + 1e-12)
            checked += 1
        assert checked > 400

    def test_lower_bound_counterexample_when_not_aligned(self):
        # the documented caveat: at N=1, alpha=0.5, p=0.9 the formula exceeds
        # the exact tail
        xi = stats.false_negative_exact(1, 0.5, 0.9)
        assert stats.chernoff_lower(1, 0.5, 0.9) > xi

    def test_asymptotic_sharpness_trend(self):
        # |ln xi - ln upper| / N decreases along aligned N at fixed (alpha, p);
        # (0.5, 0.62) keeps the N=10^4 tail inside double range
        gaps = []
        for N in (10, 100, 1000, 10000):
            xi = stats.false_negative_exact(N, 0.5, 0.62)
            upper = stats.chernoff_upper(N, 0.5, 0.62)
            gaps.append(abs(math.log(xi) - math.log(upper)) / N)
        assert gaps == sorted(gaps, reverse=True)
        assert gaps[-1] < gaps[0] / 100


class TestThresholdCorrectness:
    def test_decision_equivalence_random_pairs(self):
        """distance < eps <=> exact P(0) > alpha_eps_standard(eps)."""
        from swaplab import circuits as qc
        from swaplab import statevec as sv

        rng = np.random.default_rng(2718)
        circuit = qc.build_swap_test(1)
        eps_grid = [0.3, 0.7, 1.0, 1.2, math.sqrt(2)]
        for _ in range(1000):
            a = sv.make_qubit_state(rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi))
            b = sv.make_qubit_state(rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi))
            ovl = abs(sv.inner_product(a, b))
            dist = stats.overlap_to_distance(ovl)
            state = qc.simulate(circuit, [a, b])
            p0 = sv.exact_marginal(state, [0])[(0,)]
            for eps in eps_grid:
                if abs(dist - eps) < 1e-9:
                    continue  # boundary excluded
                assert (dist < eps) == (p0 > stats.alpha_eps_standard(eps))
