"""Closed-form prior-weighted likelihood moments.

For the conjugate priors in :mod:`jointsnr.model` every integral of the form
``<s^p v^q f1(y|s,v)>`` or ``<v^q f0(y|v)>`` reduces to gamma functions of a
shifted shape and the updated scale ``beta + t/2``. Moments are returned as
logs because for realistic vector lengths they underflow double precision
by hundreds of orders of magnitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ShapeUnderflowError
from .model import ArrayLike, JointPriorParams, NoisePriorParams, SufficientStatistic

HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _scalar_or_array(x):
    return x if np.ndim(x) else float(x)


@dataclass(frozen=True)
class LogMoment:
    """Natural log of a (nonnegative) moment integral."""

    log_value: ArrayLike

    @property
    def value(self) -> ArrayLike:
        return _scalar_or_array(np.exp(self.log_value))


@dataclass(frozen=True)
class ConditionalEstimates:
    """Posterior-mean power estimates under each hypothesis taken as true.

    s_h1, v_h1 : estimates of signal and noise power assuming H1.
    v_h0 : estimate of noise power assuming H0.
    """

    s_h1: ArrayLike
    v_h1: ArrayLike
    v_h0: ArrayLike


def posterior_shape_h0(stat: SufficientStatistic, prior: NoisePriorParams) -> float:
    return prior.alpha0 + 0.5 * stat.n


def posterior_shape_h1(stat: SufficientStatistic, prior: JointPriorParams) -> float:
    """Shape of the inverse-gamma posterior on the total power ``s + v``."""
    return prior.alpha1 - 1.0 + 0.5 * stat.n


def _require_shape(shape: float, what: str) -> None:
    if not shape > 0:
        raise ShapeUnderflowError(f"{what} = {shape:g} must be positive")


def log_moment_h0(q: int, stat: SufficientStatistic, prior: NoisePriorParams) -> LogMoment:
    """``log <v^q f0(y|v)>_V``."""
    shape = posterior_shape_h0(stat, prior) - q
    _require_shape(shape, f"alpha0 + n/2 - {q}")
    t = np.asarray(stat.t, dtype=float)
    out = (
        prior.alpha0 * math.log(prior.beta0)
        - stat.n * HALF_LOG_2PI
        - math.lgamma(prior.alpha0)
        + math.lgamma(shape)
        - shape * np.log(prior.beta0 + 0.5 * t)
    )
    return LogMoment(_scalar_or_array(out))


def log_moment_h1(p: int, q: int, stat: SufficientStatistic, prior: JointPriorParams) -> LogMoment:
    """``log <s^p v^q f1(y|s,v)>_{S,V}``.

    The power factor ``s^p v^q = r^(p+q) cos^(2p) sin^(2q)`` splits into a
    shift of the inverse-gamma shape and the angular factor
    ``C_(1+2q),(1+2p) / C_11``.
    """
    shape = posterior_shape_h1(stat, prior) - p - q
    _require_shape(shape, f"alpha1 + n/2 - 1 - {p + q}")
    t = np.asarray(stat.t, dtype=float)
    log_angle = 0.0 if p == q == 0 else math.log(prior.angular_ratio(1 + 2 * q, 1 + 2 * p))
    out = (
        log_angle
        + (prior.alpha1 - 1.0) * math.log(prior.beta1)
        - stat.n * HALF_LOG_2PI
        - math.lgamma(prior.alpha1 - 1.0)
        + math.lgamma(shape)
        - shape * np.log(prior.beta1 + 0.5 * t)
    )
    return LogMoment(_scalar_or_array(out))


def log_evidence_ratio(
    stat: SufficientStatistic, h0: NoisePriorParams, h1: JointPriorParams
) -> ArrayLike:
    """``log <f1> - log <f0>`` with the common ``(2 pi)^(-n/2)`` factor cancelled analytically."""
    a1 = posterior_shape_h1(stat, h1)
    a0 = posterior_shape_h0(stat, h0)
    _require_shape(a1, "alpha1 + n/2 - 1")
    t = np.asarray(stat.t, dtype=float)
    const = (
        (h1.alpha1 - 1.0) * math.log(h1.beta1)
        - math.lgamma(h1.alpha1 - 1.0)
        + math.lgamma(a1)
        - h0.alpha0 * math.log(h0.beta0)
        + math.lgamma(h0.alpha0)
        - math.lgamma(a0)
    )
    out = const - a1 * np.log(h1.beta1 + 0.5 * t) + a0 * np.log(h0.beta0 + 0.5 * t)
    return _scalar_or_array(out)


def conditional_estimates(
    stat: SufficientStatistic, h0: NoisePriorParams, h1: JointPriorParams
) -> ConditionalEstimates:
    """Posterior means of the powers given H1, and of the noise power given H0."""
    shape1 = posterior_shape_h1(stat, h1) - 1.0
    shape0 = posterior_shape_h0(stat, h0) - 1.0
    _require_shape(shape1, "alpha1 + n/2 - 2")
    _require_shape(shape0, "alpha0 + n/2 - 1")
    t = np.asarray(stat.t, dtype=float)
    total = (h1.beta1 + 0.5 * t) / shape1
    return ConditionalEstimates(
        s_h1=_scalar_or_array(h1.angular_ratio(1, 3) * total),
        v_h1=_scalar_or_array(h1.angular_ratio(3, 1) * total),
        v_h0=_scalar_or_array((h0.beta0 + 0.5 * t) / shape0),
    )


@dataclass(frozen=True)
class PosteriorMoments:
    """First and second posterior moments of the powers under each hypothesis.

    Second moments are needed to evaluate the quadratic conditional risks;
    they are ratios of the log moments above, collapsed to rational
    expressions in the updated scale.
    """

    s1: ArrayLike
    s2: ArrayLike
    v1: ArrayLike
    v2: ArrayLike
    v0_1: ArrayLike
    v0_2: ArrayLike

    @property
    def s_var(self) -> ArrayLike:
        return np.maximum(self.s2 - self.s1 * self.s1, 0.0)

    @property
    def v_var(self) -> ArrayLike:
        return np.maximum(self.v2 - self.v1 * self.v1, 0.0)

    @property
    def v0_var(self) -> ArrayLike:
        return np.maximum(self.v0_2 - self.v0_1 * self.v0_1, 0.0)


def posterior_moments(
    stat: SufficientStatistic, h0: NoisePriorParams, h1: JointPriorParams
) -> PosteriorMoments:
    a1 = posterior_shape_h1(stat, h1)
    a0 = posterior_shape_h0(stat, h0)
    _require_shape(a1 - 2.0, "alpha1 + n/2 - 3")
    _require_shape(a0 - 2.0, "alpha0 + n/2 - 2")
    t = np.asarray(stat.t, dtype=float)
    b1 = h1.beta1 + 0.5 * t
    b0 = h0.beta0 + 0.5 * t
    r1 = b1 / (a1 - 1.0)
    r2 = r1 * b1 / (a1 - 2.0)
    m1 = b0 / (a0 - 1.0)
    return PosteriorMoments(
        s1=h1.angular_ratio(1, 3) * r1,
        s2=h1.angular_ratio(1, 5) * r2,
        v1=h1.angular_ratio(3, 1) * r1,
        v2=h1.angular_ratio(5, 1) * r2,
        v0_1=m1,
        v0_2=m1 * b0 / (a0 - 2.0),
    )

