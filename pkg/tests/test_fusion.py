import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import expit, logit

from jointsnr.errors import CostConditionError, DegeneratePriorError
from jointsnr.fusion import (
    COMPACT,
    GAMMA0,
    GAMMA1,
    JOINT,
    SEPARATE,
    LogGlrPair,
    ModelPriors,
    compact_bracket,
    conditional_risks,
    detect,
    detect_compact,
    detect_joint,
    detect_separate,
    log_glrs,
    optimal_noise_estimates,
    optimal_signal_estimate,
)
from jointsnr.model import (
    CostParams,
    HypothesisPriors,
    JointPriorParams,
    NoisePriorParams,
    SufficientStatistic,
    sufficient_statistic,
)
from jointsnr.moments import ConditionalEstimates, conditional_estimates, log_evidence_ratio, posterior_moments

H1 = JointPriorParams(3.0, 9.1, 0.0, math.pi / 8)
PRIORS = ModelPriors(HypothesisPriors(), NoisePriorParams(3.0, 1.0), H1)
UNIT = CostParams()
ENERGIES = np.concatenate([[0.0], np.logspace(-2, 4, 400)])


def _priors(beta0, alpha=3.0, pi1=0.5):
    return ModelPriors(
        HypothesisPriors(1.0 - pi1, pi1), NoisePriorParams(alpha, beta0), JointPriorParams(alpha, 9.1, 0.0, math.pi / 8)
    )


class TestLogGlrs:
    def test_equal_costs_give_evidence_ratio(self):
        stat = SufficientStatistic(4, 10.0)
        glr = log_glrs(stat, PRIORS, UNIT)
        assert glr.log_lambda1 == glr.log_lambda0 == log_evidence_ratio(stat, PRIORS.noise, H1)
        assert glr.log_lambda1 == pytest.approx(2.0974998030894483, rel=1e-14)

    @settings(max_examples=200)
    @given(
        b=st.tuples(*[st.floats(0.01, 100.0)] * 4),
        t=st.floats(0.0, 1e4),
        pi1=st.floats(0.01, 0.99),
    )
    def test_odds_ratio_identity(self, b, t, pi1):
        costs = CostParams(b00=b[0], b01=b[1], b10=b[2], b11=b[3])
        glr = log_glrs(SufficientStatistic(16, t), _priors(1.0, pi1=pi1), costs)
        target = math.log(b[3] * b[0] / (b[1] * b[2]))
        assert glr.log_lambda1 - glr.log_lambda0 == pytest.approx(target, rel=1e-10, abs=1e-12)

    def test_logistic_weights_odds_ratio(self):
        costs = CostParams(b00=2.0, b01=0.5, b10=3.0, b11=1.5)
        glr = log_glrs(SufficientStatistic(8, 5.0), PRIORS, costs)
        # logit(expit(x)) round-trips at moderate |x|
        diff = logit(expit(glr.log_lambda1)) - logit(expit(glr.log_lambda0))
        assert diff == pytest.approx(math.log(1.5 * 2.0 / (0.5 * 3.0)), rel=1e-10)

    @pytest.mark.parametrize("pi0", [0.0, 1.0])
    def test_degenerate_priors_raise(self, pi0):
        priors = ModelPriors(HypothesisPriors(pi0, 1.0 - pi0), PRIORS.noise, H1)
        with pytest.raises(DegeneratePriorError):
            log_glrs(SufficientStatistic(4, 1.0), priors, UNIT)


class TestBlendedEstimates:
    @pytest.mark.parametrize("log_lambda", [-1e4, -800.0, -30.0, 0.0, 30.0, 800.0, 1e4])
    def test_extreme_weights_are_finite(self, log_lambda):
        cond = ConditionalEstimates(2.0, 1.0, 3.0)
        glr = LogGlrPair(log_lambda, log_lambda)
        s = optimal_signal_estimate(glr, cond)
        v1, v0 = optimal_noise_estimates(glr, cond)
        assert all(math.isfinite(x) for x in (s, v1, v0))
        if log_lambda >= 800:
            assert (s, v1) == (2.0, 1.0)
        if log_lambda <= -800:
            assert (s, v1) == (0.0, 3.0)

    def test_convex_bounds_on_fuzzed_inputs(self):
        rng = np.random.default_rng(7)
        total = 0
        for _ in range(100):
            alpha0, alpha1 = rng.uniform(1.0, 10.0), rng.uniform(2.5, 10.0)
            phi1 = rng.uniform(0.0, 1.0)
            phi2 = rng.uniform(phi1 + 0.05, math.pi / 2)
            b = rng.uniform(0.01, 10.0, size=4)
            priors = ModelPriors(
                HypothesisPriors(*(lambda p: (1 - p, p))(rng.uniform(0.01, 0.99))),
                NoisePriorParams(alpha0, rng.uniform(0.01, 100.0)),
                JointPriorParams(alpha1, rng.uniform(0.01, 100.0), phi1, phi2),
            )
            costs = CostParams(b00=b[0], b01=b[1], b10=b[2], b11=b[3])
            n = int(rng.integers(1, 257))
            t = np.exp(rng.uniform(-10.0, 25.0, size=1000))
            stat = SufficientStatistic(n, t)
            cond = conditional_estimates(stat, priors.noise, priors.joint)
            glr = log_glrs(stat, priors, costs)
            s = optimal_signal_estimate(glr, cond)
            v1, v0 = optimal_noise_estimates(glr, cond)
            lo = np.minimum(cond.v_h0, cond.v_h1)
            hi = np.maximum(cond.v_h0, cond.v_h1)
            assert np.all((s >= 0) & (s <= cond.s_h1))
            assert np.all((v1 >= lo) & (v1 <= hi))
            assert np.all((v0 >= lo) & (v0 <= hi))
            total += t.size
        assert total == 100_000


class TestConditionalRisks:
    def test_vanishing_costs(self):
        # b_ij must be positive, so approach zero cost with tiny b and zero a
        costs = CostParams(a01=0.0, a10=0.0, b00=1e-300, b01=1e-300, b10=1e-300, b11=1e-300)
        r = conditional_risks(SufficientStatistic(8, 3.0), costs, PRIORS, 1.0, 1.0, 1.0)
        assert max(r.r11, r.r01, r.r10, r.r00) < 1e-290

    def test_posterior_means_leave_only_variance(self):
        stat = SufficientStatistic(8, 3.0)
        cond = conditional_estimates(stat, PRIORS.noise, H1)
        pm = posterior_moments(stat, PRIORS.noise, H1)
        costs = CostParams(a11=0.0, b11=1.0)
        r = conditional_risks(stat, costs, PRIORS, cond.s_h1, cond.v_h1, cond.v_h0)
        llr = log_evidence_ratio(stat, PRIORS.noise, H1)
        w1 = math.exp(min(llr, 0.0))
        assert r.r11 == pytest.approx(w1 * (pm.s_var + pm.v_var), rel=1e-12)

    def test_nonnegative(self):
        r = conditional_risks(SufficientStatistic(128, ENERGIES), UNIT, PRIORS, 0.3, 1.0, 2.0)
        for x in (r.r11, r.r01, r.r10, r.r00):
            assert np.all(np.asarray(x) >= 0) and np.all(np.isfinite(x))


class TestDetectJoint:
    def test_zero_energy_with_informative_h1_prior(self):
        priors = ModelPriors(HypothesisPriors(), NoisePriorParams(3.0, 0.5), JointPriorParams(3.0, 100.0, 0.0, math.pi / 8))
        rep = detect_joint(SufficientStatistic(4, 0.0), priors, UNIT)
        assert rep.decision == GAMMA0 and rep.s_hat == 0.0

    @pytest.mark.parametrize("t", [0.0, 1e-3, 1.0, 1e3])
    def test_near_certain_signal(self, t):
        priors = ModelPriors(HypothesisPriors(1e-12, 1.0 - 1e-12), PRIORS.noise, H1)
        assert detect_joint(SufficientStatistic(4, t), priors, UNIT).decision == GAMMA1

    def test_cost_homogeneity(self):
        costs = CostParams(a00=0.1, a01=2.0, a10=0.7, a11=0.05, b00=1.3, b01=0.4, b10=2.2, b11=0.9)
        stat = SufficientStatistic(128, ENERGIES * 50)
        a = detect_joint(stat, PRIORS, costs)
        b = detect_joint(stat, PRIORS, costs.scaled(2.0))
        assert np.array_equal(a.decision, b.decision)
        assert np.array_equal(a.s_hat, b.s_hat) and np.array_equal(a.v_hat, b.v_hat)

    def test_issued_estimates_follow_decision(self):
        rep = detect_joint(SufficientStatistic(128, ENERGIES * 50), PRIORS, UNIT)
        assert np.all(rep.s_hat[rep.decision == GAMMA0] == 0.0)
        assert np.any(rep.decision == GAMMA0) and np.any(rep.decision == GAMMA1)

    def test_zero_gain_matches_separate_under_unit_costs(self):
        for beta0 in (0.5, 1.0, 2.0, 4.0, 8.0):
            stat = SufficientStatistic(128, np.linspace(0.0, 5000.0, 20001))
            priors = _priors(beta0)
            j = detect_joint(stat, priors, UNIT, signal_gain=0.0)
            s = detect_separate(stat, priors, UNIT)
            assert np.array_equal(j.decision, s.decision)


class TestDetectCompact:
    def test_bracket_is_one_at_zero(self):
        assert compact_bracket(0.0, 3.7) == 1.0

    def test_zero_gain_matches_separate(self):
        for beta0 in (0.5, 1.0, 2.0, 4.0, 8.0):
            stat = SufficientStatistic(128, np.linspace(0.0, 5000.0, 20001))
            priors = _priors(beta0)
            c = detect_compact(stat, priors, UNIT, signal_gain=0.0)
            s = detect_separate(stat, priors, UNIT)
            assert np.array_equal(c.decision, s.decision)

    @pytest.mark.parametrize(
        "costs", [CostParams(a00=0.1), CostParams(a11=0.1), CostParams(b10=2.0), CostParams(b01=2.0, a01=2.0)]
    )
    def test_rejects_other_costs(self, costs):
        with pytest.raises(CostConditionError):
            detect_compact(SufficientStatistic(4, 1.0), PRIORS, costs)

    def test_accepts_scaled_family(self):
        costs = CostParams(a01=2.0, b01=2.0, b00=2.0, a10=0.5, b10=0.5, b11=0.5)
        rep = detect_compact(SufficientStatistic(4, 10.0), PRIORS, costs)
        assert rep.decision in (GAMMA0, GAMMA1)


class TestDetectSeparate:
    def test_threshold_at_zero_for_equal_priors(self):
        stat = SufficientStatistic(128, ENERGIES * 50)
        rep = detect_separate(stat, PRIORS, UNIT)
        llr = log_evidence_ratio(stat, PRIORS.noise, H1)
        assert np.array_equal(rep.decision == GAMMA1, llr >= 0)

    def test_estimates_never_blended(self):
        stat = SufficientStatistic(128, ENERGIES * 50)
        rep = detect_separate(stat, PRIORS, UNIT)
        cond = conditional_estimates(stat, PRIORS.noise, H1)
        expected = np.where(rep.decision == GAMMA1, cond.v_h1, cond.v_h0)
        assert np.array_equal(rep.v_hat, expected)


class TestInvariances:
    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(-1e3, 1e3), min_size=4, max_size=64), st.randoms(use_true_random=False))
    def test_permutation_and_sign(self, y, rnd):
        z = [(-x if rnd.random() < 0.5 else x) for x in y]
        rnd.shuffle(z)
        a, b = sufficient_statistic(y), sufficient_statistic(z)
        for method in (JOINT, COMPACT, SEPARATE):
            ra, rb = detect(method, a, PRIORS, UNIT), detect(method, b, PRIORS, UNIT)
            assert ra == rb

    @pytest.mark.parametrize("method", [JOINT, SEPARATE])
    def test_scale_equivariance(self, method):
        lam = 4.0
        stat = SufficientStatistic(128, ENERGIES * 50)
        scaled_stat = SufficientStatistic(128, ENERGIES * 50 * lam)
        scaled_priors = ModelPriors(
            PRIORS.hypothesis, NoisePriorParams(3.0, lam * 1.0), JointPriorParams(3.0, lam * 9.1, 0.0, math.pi / 8)
        )
        # quadratic costs are in squared power units, so b picks up 1/lam^2
        costs = CostParams(b00=1 / lam**2, b01=1 / lam**2, b10=1 / lam**2, b11=1 / lam**2)
        a = detect(method, stat, PRIORS, UNIT)
        b = detect(method, scaled_stat, scaled_priors, costs)
        assert np.array_equal(a.decision, b.decision)
        np.testing.assert_allclose(b.s_hat, lam * np.asarray(a.s_hat), rtol=1e-10)
        np.testing.assert_allclose(b.v_hat, lam * np.asarray(a.v_hat), rtol=1e-10)

    @pytest.mark.parametrize("method", [JOINT, COMPACT, SEPARATE])
    def test_finite_up_to_huge_energy(self, method):
        stat = SufficientStatistic(128, np.concatenate([[0.0], np.logspace(-6, 12, 500)]))
        rep = detect(method, stat, PRIORS, UNIT)
        for x in (rep.s_hat, rep.v_hat, rep.glr.log_lambda1, rep.glr.log_lambda0):
            assert np.all(np.isfinite(x))


class TestDispatch:
    def test_unknown_method(self):
        with pytest.raises(ValueError, match="unknown method"):
            detect("bogus", SufficientStatistic(4, 1.0), PRIORS, UNIT)

    def test_gain_rejected_for_separate(self):
        with pytest.raises(ValueError):
            detect(SEPARATE, SufficientStatistic(4, 1.0), PRIORS, UNIT, signal_gain=0.5)
