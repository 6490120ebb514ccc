"""Generative model: parameter types, prior densities and exact samplers.

Under H0 the observations are ``y_i ~ N(0, v)`` with an inverse-gamma prior
on the noise power ``v``. Under H1 they are ``y_i ~ N(0, s + v)`` and the
pair ``(s, v)`` has a conjugate prior that factorises in polar-like
coordinates

    s = r cos^2(theta),  v = r sin^2(theta),

into an inverse-gamma density on the total power ``r`` (shape ``alpha1 - 1``,
scale ``beta1``) and the angular density ``sin(2 theta) / C11`` on
``[phi1, phi2]``. Small ``phi2`` therefore encodes "signal much stronger than
noise".
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence, Union

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import gammaln

from .errors import (
    EmptyInputError,
    InvalidExponentError,
    InvalidSupportError,
    JointSNRError,
    NonFiniteError,
)

ArrayLike = Union[float, np.ndarray]

HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class HypothesisPriors:
    """Prior probabilities of H0 (noise only) and H1 (signal present)."""

    pi0: float = 0.5
    pi1: float = 0.5

    def __post_init__(self):
        if not (self.pi0 >= 0 and self.pi1 >= 0):
            raise JointSNRError(f"hypothesis priors must be nonnegative, got {self.pi0}, {self.pi1}")
        if abs(self.pi0 + self.pi1 - 1.0) > 1e-12:
            raise JointSNRError(f"pi0 + pi1 must equal 1, got {self.pi0 + self.pi1!r}")


@dataclass(frozen=True)
class NoisePriorParams:
    """Inverse-gamma prior on the noise power under H0."""

    alpha0: float
    beta0: float

    def __post_init__(self):
        if not (self.alpha0 > 0 and math.isfinite(self.alpha0)):
            raise JointSNRError(f"alpha0 must be positive, got {self.alpha0}")
        if not (self.beta0 > 0 and math.isfinite(self.beta0)):
            raise JointSNRError(f"beta0 must be positive, got {self.beta0}")


@dataclass(frozen=True)
class JointPriorParams:
    """Conjugate prior on (signal power, noise power) under H1."""

    alpha1: float
    beta1: float
    phi1: float = 0.0
    phi2: float = HALF_PI

    def __post_init__(self):
        if not (self.alpha1 > 1 and math.isfinite(self.alpha1)):
            raise JointSNRError(f"alpha1 must exceed 1, got {self.alpha1}")
        if not (self.beta1 > 0 and math.isfinite(self.beta1)):
            raise JointSNRError(f"beta1 must be positive, got {self.beta1}")
        _check_support(self.phi1, self.phi2)

    @cached_property
    def c11(self) -> float:
        return angular_constant(1, 1, self.phi1, self.phi2)

    @cached_property
    def sin2_phi1(self) -> float:
        return math.sin(self.phi1) ** 2

    @cached_property
    def sin2_phi2(self) -> float:
        return math.sin(self.phi2) ** 2

    def angular_ratio(self, m: int, n: int) -> float:
        """``C_mn / C_11`` on this prior's support."""
        return angular_constant(m, n, self.phi1, self.phi2) / self.c11


@dataclass(frozen=True)
class CostParams:
    """Quadratic cost model.

    ``a_ij`` is the detection cost of deciding gamma_j under H_i and ``b_ij``
    converts squared power-estimation error into the same units. Index order
    is (true hypothesis, decision).
    """

    a00: float = 0.0
    a01: float = 1.0
    a10: float = 1.0
    a11: float = 0.0
    b00: float = 1.0
    b01: float = 1.0
    b10: float = 1.0
    b11: float = 1.0

    def __post_init__(self):
        for name in ("a00", "a01", "a10", "a11"):
            value = getattr(self, name)
            if not (value >= 0 and math.isfinite(value)):
                raise JointSNRError(f"{name} must be nonnegative, got {value}")
        for name in ("b00", "b01", "b10", "b11"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise JointSNRError(f"{name} must be positive, got {value}")

    def a(self, i: int, j: int) -> float:
        return getattr(self, f"a{i}{j}")

    def b(self, i: int, j: int) -> float:
        return getattr(self, f"b{i}{j}")

    def scaled(self, factor: float) -> "CostParams":
        """All a_ij and b_ij multiplied by ``factor``."""
        return CostParams(**{k: factor * v for k, v in self.__dict__.items()})


@dataclass(frozen=True)
class SufficientStatistic:
    """Sample count ``n`` and energy ``t = sum(y**2)``.

    ``t`` may be an array, in which case the statistic describes a batch of
    observation vectors sharing the same length.
    """

    n: int
    t: ArrayLike

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise JointSNRError(f"n must be a positive integer, got {self.n}")
        t = np.asarray(self.t, dtype=float)
        if not np.all(np.isfinite(t)) or np.any(t < 0):
            raise JointSNRError("energy t must be finite and nonnegative")


@dataclass(frozen=True)
class PowerPair:
    """Signal power ``s`` and noise power ``v`` (scalars or equal-shape arrays)."""

    s: ArrayLike
    v: ArrayLike

    def __post_init__(self):
        if np.any(np.asarray(self.s) < 0) or not np.all(np.asarray(self.v) > 0):
            raise JointSNRError("powers must satisfy s >= 0 and v > 0")

    @property
    def total(self) -> ArrayLike:
        return self.s + self.v


def _check_support(phi1: float, phi2: float) -> None:
    if not (0.0 <= phi1 < phi2 <= HALF_PI):
        raise InvalidSupportError(
            f"angular support must satisfy 0 <= phi1 < phi2 <= pi/2, got [{phi1}, {phi2}]"
        )


def angular_constant(m: int, n: int, phi1: float, phi2: float) -> float:
    """Integral of ``2 sin^m(theta) cos^n(theta)`` over ``[phi1, phi2]``.

    With ``u = sin^2(theta)`` the integrand becomes the polynomial
    ``u^((m-1)/2) (1-u)^((n-1)/2)`` on ``[sin^2 phi1, sin^2 phi2]``, which a
    Gauss-Legendre rule of matching degree integrates exactly. Nodes are
    written as convex combinations of the endpoint values of ``u`` and
    ``1 - u`` so every term is positive and no cancellation occurs, even for
    very narrow supports or supports hugging 0 or pi/2.
    """
    _check_support(phi1, phi2)
    if m < 1 or n < 1 or m % 2 == 0 or n % 2 == 0:
        raise InvalidExponentError(f"exponents must be odd positive integers, got ({m}, {n})")
    a = (m - 1) // 2
    b = (n - 1) // 2
    nodes, weights = leggauss((a + b) // 2 + 1)
    lo = 0.5 * (1.0 - nodes)
    hi = 0.5 * (1.0 + nodes)
    s1, s2 = math.sin(phi1) ** 2, math.sin(phi2) ** 2
    c1, c2 = math.cos(phi1) ** 2, math.cos(phi2) ** 2
    u = lo * s1 + hi * s2
    w = lo * c1 + hi * c2
    width = math.sin(phi2 - phi1) * math.sin(phi2 + phi1)
    return float(0.5 * width * np.dot(weights, u**a * w**b))


def inv_gamma_logpdf(v: ArrayLike, alpha: float, beta: float) -> ArrayLike:
    """Log-density of the inverse-gamma distribution with shape ``alpha`` and scale ``beta``."""
    if isinstance(v, float) and isinstance(alpha, (int, float)) and isinstance(beta, (int, float)):
        if not (v > 0 and alpha > 0 and beta > 0):
            raise JointSNRError(f"inverse-gamma density needs v, alpha, beta > 0, got ({v}, {alpha}, {beta})")
        return alpha * math.log(beta) - math.lgamma(alpha) - (alpha + 1) * math.log(v) - beta / v
    v_arr = np.asarray(v, dtype=float)
    if np.any(v_arr <= 0):
        raise JointSNRError("inverse-gamma density is defined for v > 0 only")
    if not (alpha > 0 and beta > 0):
        raise JointSNRError(f"inverse-gamma parameters must be positive, got ({alpha}, {beta})")
    out = alpha * math.log(beta) - gammaln(alpha) - (alpha + 1) * np.log(v_arr) - beta / v_arr
    return out if np.ndim(out) else float(out)


def joint_prior_logpdf(s: ArrayLike, v: ArrayLike, params: JointPriorParams) -> ArrayLike:
    """Log-density of the H1 prior at ``(s, v)``; ``-inf`` outside its support cone."""
    if isinstance(s, float) and isinstance(v, float):
        if not (s >= 0 and v > 0):
            return -math.inf
        total = s + v
        if not (params.sin2_phi1 <= v / total <= params.sin2_phi2):
            return -math.inf
        return (
            (params.alpha1 - 1) * math.log(params.beta1)
            - math.log(params.c11)
            - math.lgamma(params.alpha1 - 1)
            - (params.alpha1 + 1) * math.log(total)
            - params.beta1 / total
        )
    s_arr = np.asarray(s, dtype=float)
    v_arr = np.asarray(v, dtype=float)
    total = s_arr + v_arr
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = v_arr / total
        inside = (s_arr >= 0) & (v_arr > 0) & (frac >= params.sin2_phi1) & (frac <= params.sin2_phi2)
        alpha1, beta1 = params.alpha1, params.beta1
        logp = (
            (alpha1 - 1) * math.log(beta1)
            - math.log(params.c11)
            - gammaln(alpha1 - 1)
            - (alpha1 + 1) * np.log(total)
            - beta1 / total
        )
    out = np.where(inside, logp, -np.inf)
    return out if np.ndim(out) else float(out)


def angle_from_uniform(u: ArrayLike, params: JointPriorParams) -> ArrayLike:
    """Inverse CDF of the angular density ``sin(2 theta) / C11`` on ``[phi1, phi2]``."""
    sin2 = np.clip(params.sin2_phi1 + np.asarray(u, dtype=float) * params.c11, 0.0, 1.0)
    out = np.arcsin(np.sqrt(sin2))
    return out if np.ndim(out) else float(out)


def sample_noise_power(rng: np.random.Generator, params: NoisePriorParams, size=None) -> ArrayLike:
    """Exact inverse-gamma draw(s): ``beta0 / G`` with ``G ~ Gamma(alpha0, 1)``."""
    return params.beta0 / rng.standard_gamma(params.alpha0, size=size)


def sample_power_pair(rng: np.random.Generator, params: JointPriorParams, size=None) -> PowerPair:
    """Exact draw(s) of ``(s, v)`` from the H1 prior.

    The total power comes from an inverse-gamma with shape ``alpha1 - 1``;
    ``sin^2(theta)`` is uniform on ``[sin^2 phi1, sin^2 phi2]`` so the split is
    obtained without evaluating the angle itself.
    """
    total = params.beta1 / rng.standard_gamma(params.alpha1 - 1.0, size=size)
    # 1 - U lies in (0, 1], keeping v strictly positive when phi1 = 0
    u = 1.0 - rng.random(size=size)
    sin2 = np.minimum(params.sin2_phi1 + u * params.c11, 1.0)
    s = total * (1.0 - sin2)
    v = total * sin2
    if size is None:
        return PowerPair(float(s), float(v))
    return PowerPair(s, v)


def sufficient_statistic(y: Sequence[float]) -> SufficientStatistic:
    """Reduce an observation vector to ``(n, sum(y**2))``.

    The energy is accumulated with :func:`math.fsum`, which is correctly
    rounded, so the result is bit-identical under any permutation or sign
    flip of ``y``.
    """
    arr = np.asarray(y, dtype=float).ravel()
    if arr.size == 0:
        raise EmptyInputError("observation vector is empty")
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr))[0])
        raise NonFiniteError(f"observation {bad} is not finite ({arr[bad]})")
    with np.errstate(over="ignore"):
        sq = arr * arr
    t = math.fsum(sq.tolist()) if np.all(np.isfinite(sq)) else math.inf
    if not math.isfinite(t):
        raise NonFiniteError("observation energy overflows")
    return SufficientStatistic(int(arr.size), t)


def batch_statistic(y: np.ndarray) -> SufficientStatistic:
    """Row-wise :func:`sufficient_statistic` for a 2-D array of equal-length vectors."""
    arr = np.asarray(y, dtype=float)
    if arr.ndim != 2 or arr.shape[1] == 0:
        raise EmptyInputError("expected a nonempty 2-D array of observation vectors")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError("observations contain non-finite values")
    sq = (arr * arr).tolist()
    t = np.fromiter((math.fsum(row) for row in sq), dtype=float, count=arr.shape[0])
    return SufficientStatistic(arr.shape[1], t)
