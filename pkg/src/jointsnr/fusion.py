"""Joint detection and power estimation.

Decision ``gamma1`` means "signal present", ``gamma0`` "noise only". Each
detector returns a :class:`DecisionReport` carrying the decision together
with the signal and noise power estimates issued alongside it. Functions
accept a :class:`~jointsnr.model.SufficientStatistic` whose energy ``t`` is
either a scalar or an array; array inputs are processed elementwise.

Three detectors are provided:

``detect_joint``
    Minimises the posterior expected quadratic cost over decision and
    estimates together. The decision compares the conditional risks
    ``pi1 (r10 - r11) >= pi0 (r01 - r00)``.
``detect_compact``
    The closed-form threshold test valid for the restricted cost family
    ``b10 = a10 = b11, a11 = 0, b01 = a01 = b00, a00 = 0``.
``detect_separate``
    The classical pipeline: threshold the evidence ratio, then issue the
    posterior means of whichever hypothesis was chosen.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.special import expit

from .errors import CostConditionError, DegeneratePriorError
from .model import (
    ArrayLike,
    CostParams,
    HypothesisPriors,
    JointPriorParams,
    NoisePriorParams,
    SufficientStatistic,
)
from .moments import (
    ConditionalEstimates,
    conditional_estimates,
    log_evidence_ratio,
    log_moment_h0,
    posterior_moments,
)

GAMMA0 = 0
GAMMA1 = 1

JOINT = "joint"
COMPACT = "compact"
SEPARATE = "separate"
METHODS = (JOINT, COMPACT, SEPARATE)


def _out(x):
    x = np.asarray(x)
    return x if x.ndim else x.item()


@dataclass(frozen=True)
class ModelPriors:
    """Hypothesis probabilities plus the parameter priors under each hypothesis."""

    hypothesis: HypothesisPriors
    noise: NoisePriorParams
    joint: JointPriorParams


@dataclass(frozen=True)
class LogGlrPair:
    """Log generalized likelihood ratios for the gamma1 and gamma0 branches."""

    log_lambda1: ArrayLike
    log_lambda0: ArrayLike


@dataclass(frozen=True)
class DecisionReport:
    decision: ArrayLike
    s_hat: ArrayLike
    v_hat: ArrayLike
    glr: LogGlrPair
    method: str


@dataclass(frozen=True)
class ConditionalRisks:
    """Conditional risks ``r_ij`` divided by ``exp(log_scale)``.

    The unscaled risks are integrals against the marginal likelihood and
    underflow for long vectors, so a common factor is pulled out. Decisions
    only depend on differences of the scaled values.
    """

    r11: ArrayLike
    r01: ArrayLike
    r10: ArrayLike
    r00: ArrayLike
    log_scale: ArrayLike = 0.0

    def unscaled(self) -> "ConditionalRisks":
        f = np.exp(self.log_scale)
        return ConditionalRisks(
            _out(self.r11 * f), _out(self.r01 * f), _out(self.r10 * f), _out(self.r00 * f), 0.0
        )


def _check_priors(hyp: HypothesisPriors) -> None:
    if hyp.pi0 <= 0 or hyp.pi1 <= 0:
        raise DegeneratePriorError(
            f"likelihood ratios need pi0 > 0 and pi1 > 0, got ({hyp.pi0}, {hyp.pi1})"
        )


def log_glrs(stat: SufficientStatistic, priors: ModelPriors, costs: CostParams) -> LogGlrPair:
    """``log Lambda1`` and ``log Lambda0`` computed in the log domain."""
    hyp = priors.hypothesis
    _check_priors(hyp)
    llr = np.asarray(log_evidence_ratio(stat, priors.noise, priors.joint))
    log_odds = math.log(hyp.pi1) - math.log(hyp.pi0)
    c1 = math.log(costs.b11) - math.log(costs.b01) + log_odds
    c0 = math.log(costs.b10) - math.log(costs.b00) + log_odds
    return LogGlrPair(_out(c1 + llr), _out(c0 + llr))


def optimal_signal_estimate(glr: LogGlrPair, cond: ConditionalEstimates) -> ArrayLike:
    """Signal estimate under H1 weighted by ``Lambda1 / (Lambda1 + 1)``."""
    return _out(expit(glr.log_lambda1) * np.asarray(cond.s_h1))


def _blend(log_lambda, v_h1, v_h0):
    w1 = expit(log_lambda)
    w0 = expit(-np.asarray(log_lambda))
    lo = np.minimum(v_h1, v_h0)
    hi = np.maximum(v_h1, v_h0)
    # clip absorbs the ulp by which w1 + w0 may miss 1
    return np.clip(w1 * v_h1 + w0 * v_h0, lo, hi)


def optimal_noise_estimates(
    glr: LogGlrPair, cond: ConditionalEstimates
) -> Tuple[ArrayLike, ArrayLike]:
    """Noise estimates ``(v_gamma1, v_gamma0)`` for each possible decision."""
    v_h1 = np.asarray(cond.v_h1)
    v_h0 = np.asarray(cond.v_h0)
    return _out(_blend(glr.log_lambda1, v_h1, v_h0)), _out(_blend(glr.log_lambda0, v_h1, v_h0))


def conditional_risks(
    stat: SufficientStatistic,
    costs: CostParams,
    priors: ModelPriors,
    s_hat_gamma1: ArrayLike,
    v_hat_gamma1: ArrayLike,
    v_hat_gamma0: ArrayLike,
) -> ConditionalRisks:
    """Evaluate the four conditional risks for the given issued estimates.

    Each quadratic cost is integrated against the posterior using
    ``E(x - c)^2 = Var(x) + (E x - c)^2``, then weighted by the marginal
    likelihood of the true hypothesis.
    """
    pm = posterior_moments(stat, priors.noise, priors.joint)
    llr = np.asarray(log_evidence_ratio(stat, priors.noise, priors.joint))
    log_f0 = np.asarray(log_moment_h0(0, stat, priors.noise).log_value)
    w1 = np.exp(np.minimum(llr, 0.0))
    w0 = np.exp(-np.maximum(llr, 0.0))
    log_scale = log_f0 + np.maximum(llr, 0.0)

    s1 = np.asarray(s_hat_gamma1, dtype=float)
    v1 = np.asarray(v_hat_gamma1, dtype=float)
    v0 = np.asarray(v_hat_gamma0, dtype=float)
    s_var, v_var, n_var = pm.s_var, pm.v_var, pm.v0_var

    def sig_err(c):
        return s_var + (pm.s1 - c) ** 2

    def h1_noise_err(c):
        return v_var + (pm.v1 - c) ** 2

    def h0_noise_err(c):
        return n_var + (pm.v0_1 - c) ** 2

    r11 = w1 * (costs.b11 * (sig_err(s1) + h1_noise_err(v1)) + costs.a11)
    r10 = w1 * (costs.b10 * (sig_err(0.0) + h1_noise_err(v0)) + costs.a10)
    r01 = w0 * (costs.b01 * (s1 * s1 + h0_noise_err(v1)) + costs.a01)
    r00 = w0 * (costs.b00 * h0_noise_err(v0) + costs.a00)
    return ConditionalRisks(_out(r11), _out(r01), _out(r10), _out(r00), _out(log_scale))


def _blended(stat, priors, costs, signal_gain):
    cond = conditional_estimates(stat, priors.noise, priors.joint)
    glr = log_glrs(stat, priors, costs)
    s_opt = np.asarray(optimal_signal_estimate(glr, cond)) * signal_gain
    v_g1, v_g0 = optimal_noise_estimates(glr, cond)
    return cond, glr, s_opt, np.asarray(v_g1), np.asarray(v_g0)


def _report(decide, s_opt, v_g1, v_g0, glr, method):
    return DecisionReport(
        decision=_out(np.where(decide, GAMMA1, GAMMA0)),
        s_hat=_out(np.where(decide, s_opt, 0.0)),
        v_hat=_out(np.where(decide, v_g1, v_g0)),
        glr=glr,
        method=method,
    )


def detect_joint(
    stat: SufficientStatistic, priors: ModelPriors, costs: CostParams, signal_gain: float = 1.0
) -> DecisionReport:
    """Jointly optimal decision and estimates.

    ``signal_gain`` multiplies the optimal signal estimate before the risks
    are evaluated and the estimate is issued; values other than 1 give a
    deliberately perturbed rule, useful for probing optimality.
    """
    _, glr, s_opt, v_g1, v_g0 = _blended(stat, priors, costs, signal_gain)
    risks = conditional_risks(stat, costs, priors, s_opt, v_g1, v_g0)
    hyp = priors.hypothesis
    lhs = hyp.pi1 * (np.asarray(risks.r10) - np.asarray(risks.r11))
    rhs = hyp.pi0 * (np.asarray(risks.r01) - np.asarray(risks.r00))
    return _report(lhs >= rhs, s_opt, v_g1, v_g0, glr, JOINT)


def compact_conditions_hold(costs: CostParams) -> bool:
    return (
        costs.b10 == costs.a10 == costs.b11
        and costs.a11 == 0
        and costs.b01 == costs.a01 == costs.b00
        and costs.a00 == 0
    )


def compact_bracket(s_opt: ArrayLike, s_h1: ArrayLike) -> ArrayLike:
    """Weighting term ``1 - s + 2 s s_h1 / (s + 1)`` applied to the evidence ratio."""
    s = np.asarray(s_opt, dtype=float)
    return _out(1.0 - s + 2.0 * s * np.asarray(s_h1) / (s + 1.0))


def detect_compact(
    stat: SufficientStatistic, priors: ModelPriors, costs: CostParams, signal_gain: float = 1.0
) -> DecisionReport:
    """Closed-form threshold detector for the restricted cost family.

    A nonpositive bracket makes the left side of the test nonpositive, which
    never reaches the positive threshold, so those inputs decide gamma0.
    """
    if not compact_conditions_hold(costs):
        raise CostConditionError(
            "compact detector needs b10 = a10 = b11, a11 = 0, b01 = a01 = b00, a00 = 0"
        )
    cond, glr, s_opt, v_g1, v_g0 = _blended(stat, priors, costs, signal_gain)
    hyp = priors.hypothesis
    llr = np.asarray(log_evidence_ratio(stat, priors.noise, priors.joint))
    bracket = np.asarray(compact_bracket(s_opt, cond.s_h1))
    with np.errstate(divide="ignore", invalid="ignore"):
        log_bracket = np.where(bracket > 0, np.log(np.where(bracket > 0, bracket, 1.0)), -np.inf)
    lhs = llr + log_bracket + (math.log(costs.b11) - math.log(costs.b00))
    decide = lhs >= math.log(hyp.pi0) - math.log(hyp.pi1)
    return _report(decide, s_opt, v_g1, v_g0, glr, COMPACT)


def detect_separate(
    stat: SufficientStatistic, priors: ModelPriors, costs: CostParams
) -> DecisionReport:
    """Evidence-ratio test followed by the single-hypothesis posterior means."""
    hyp = priors.hypothesis
    _check_priors(hyp)
    cond = conditional_estimates(stat, priors.noise, priors.joint)
    glr = log_glrs(stat, priors, costs)
    llr = np.asarray(log_evidence_ratio(stat, priors.noise, priors.joint))
    decide = llr >= math.log(hyp.pi0) - math.log(hyp.pi1)
    return _report(decide, np.asarray(cond.s_h1), np.asarray(cond.v_h1), np.asarray(cond.v_h0), glr, SEPARATE)


def detect(
    method: str,
    stat: SufficientStatistic,
    priors: ModelPriors,
    costs: CostParams,
    signal_gain: float = 1.0,
) -> DecisionReport:
    """Dispatch to one of the three detectors by name."""
    if method == JOINT:
        return detect_joint(stat, priors, costs, signal_gain)
    if method == COMPACT:
        return detect_compact(stat, priors, costs, signal_gain)
    if method == SEPARATE:
        if signal_gain != 1.0:
            raise ValueError("signal_gain applies to the joint and compact detectors only")
        return detect_separate(stat, priors, costs)
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
