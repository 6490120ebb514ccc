"""Brute-force quadrature of the prior-weighted likelihood moments.

Everything here integrates the raw definitions (Gaussian likelihood times
prior density) with QUADPACK and shares no algebra with
:mod:`jointsnr.moments`. It is slow and only meant for validation.

Integrals over powers run in log coordinates, ``r = exp(x)``, and the
integrand is evaluated in log space and divided by its numerically located
peak before exponentiation, so likelihoods as small as ``1e-300`` are
handled without underflow.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Tuple, Union

from scipy import integrate, optimize

from .errors import JointSNRError, QuadratureError
from .model import (
    CostParams,
    JointPriorParams,
    NoisePriorParams,
    SufficientStatistic,
    inv_gamma_logpdf,
    joint_prior_logpdf,
)

LOG_2PI = math.log(2.0 * math.pi)
# integrand values below exp(-TAIL_DROP) times the peak are dropped
TAIL_DROP = 80.0
X_MAX = 700.0


@dataclass(frozen=True)
class QuadratureSettings:
    rel_tol: float = 1e-12
    abs_tol: float = 1e-14
    max_subdivisions: int = 200

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise JointSNRError("quadrature tolerances must be positive")
        if self.max_subdivisions < 10:
            raise JointSNRError("max_subdivisions must be at least 10")


DEFAULT_SETTINGS = QuadratureSettings()


def _quad(func: Callable[[float], float], lo: float, hi: float, settings: QuadratureSettings) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        out = integrate.quad(
            func,
            lo,
            hi,
            epsabs=settings.abs_tol,
            epsrel=settings.rel_tol,
            limit=settings.max_subdivisions,
            full_output=1,
        )
    if len(out) > 3:
        reason = " ".join(str(out[3]).split())
        raise QuadratureError(f"quadrature on [{lo}, {hi}] failed: {reason}")
    return out[0]


def _peak(log_f: Callable[[float], float]) -> float:
    """Location of the maximum of a unimodal log-integrand on the real line."""
    grid = [0.25 * k for k in range(-400, 401)]
    best = max(grid, key=log_f)
    res = optimize.minimize_scalar(
        lambda x: -log_f(x), bracket=(best - 0.25, best, best + 0.25), tol=1e-10
    )
    return float(res.x)


def _tail_limit(log_f: Callable[[float], float], x0: float, ref: float, direction: float) -> float:
    """Walk away from the peak until the integrand is below ``exp(-TAIL_DROP)`` of it."""
    step = 1.0
    x = x0
    while abs(x) < X_MAX:
        x = x0 + direction * step
        if log_f(x) - ref < -TAIL_DROP:
            return x
        step *= 2.0
    raise QuadratureError("integrand does not decay within the representable range")


def _integrate_line(log_f, x0, ref, settings):
    """Integral of ``exp(log_f - ref)`` split at the peak ``x0``."""
    lo = _tail_limit(log_f, x0, ref, -1.0)
    hi = _tail_limit(log_f, x0, ref, 1.0)
    f = lambda x: math.exp(log_f(x) - ref)  # noqa: E731
    return _quad(f, lo, x0, settings) + _quad(f, x0, hi, settings)


def _integrate_log_line(log_f: Callable[[float], float], settings: QuadratureSettings) -> float:
    """Integral of ``exp(log_f(x))`` over the real line, returned as a log."""
    x0 = _peak(log_f)
    ref = log_f(x0)
    return ref + math.log(_integrate_line(log_f, x0, ref, settings))


def _log_gauss_lik(power: float, stat: SufficientStatistic) -> float:
    return -0.5 * stat.n * (LOG_2PI + math.log(power)) - 0.5 * stat.t / power


def _safe_log(x: float) -> float:
    return math.log(x) if x > 0 else -math.inf


def quad_expectation_h0(
    func: Callable[[float], float],
    stat: SufficientStatistic,
    prior: NoisePriorParams,
    settings: QuadratureSettings = DEFAULT_SETTINGS,
) -> float:
    """``integral func(v) f0(y | v) p_V(v) dv`` for a nonnegative ``func``."""

    def log_f(x):
        v = math.exp(x)
        # trailing x is the Jacobian of v = exp(x)
        return (
            _safe_log(func(v))
            + _log_gauss_lik(v, stat)
            + inv_gamma_logpdf(v, prior.alpha0, prior.beta0)
            + x
        )

    return math.exp(_integrate_log_line(log_f, settings))


def quad_expectation_h1(
    func: Callable[[float, float], float],
    stat: SufficientStatistic,
    prior: JointPriorParams,
    settings: QuadratureSettings = DEFAULT_SETTINGS,
) -> float:
    """``double integral func(s, v) f1(y | s, v) p_SV(s, v) ds dv`` for a nonnegative ``func``.

    Integration runs over the rectangle ``x = log r``, ``theta in [phi1, phi2]``
    with ``s = r cos^2 theta`` and ``v = r sin^2 theta``; the Jacobian of the
    map is ``2 r^2 sin(theta) cos(theta)`` (one factor of ``r`` from
    ``dr = r dx``). The prior density is evaluated pointwise in ``(s, v)``.
    """

    def log_f(x, theta):
        r = math.exp(x)
        s = r * math.cos(theta) ** 2
        v = r - s
        log_prior = joint_prior_logpdf(s, v, prior)
        if log_prior == -math.inf:
            return -math.inf
        return (
            _safe_log(func(s, v))
            + _log_gauss_lik(r, stat)
            + log_prior
            + 2.0 * x
            + math.log(2.0 * math.sin(theta) * math.cos(theta))
        )

    mid = 0.5 * (prior.phi1 + prior.phi2)
    x0 = _peak(lambda x: log_f(x, mid))
    ref = log_f(x0, mid)

    def inner(theta):
        return _integrate_line(lambda x: log_f(x, theta), x0, ref, settings)

    # Gauss-Kronrod never samples the endpoints, where s or v may vanish
    return math.exp(ref) * _quad(inner, prior.phi1, prior.phi2, settings)


def quad_moment_h0(
    q: int,
    stat: SufficientStatistic,
    prior: NoisePriorParams,
    settings: QuadratureSettings = DEFAULT_SETTINGS,
) -> float:
    """``integral v^q f0(y | v) p_V(v) dv`` by adaptive quadrature."""
    return quad_expectation_h0(lambda v: v**q, stat, prior, settings)


def quad_moment_h1(
    p: int,
    q: int,
    stat: SufficientStatistic,
    prior: JointPriorParams,
    settings: QuadratureSettings = DEFAULT_SETTINGS,
) -> float:
    """``double integral s^p v^q f1(y | s, v) p_SV(s, v) ds dv`` by nested quadrature."""
    return quad_expectation_h1(lambda s, v: s**p * v**q, stat, prior, settings)


def quad_conditional_risks(
    stat: SufficientStatistic,
    costs: CostParams,
    noise: NoisePriorParams,
    joint: JointPriorParams,
    s_hat: float,
    v_gamma1: float,
    v_gamma0: float,
    settings: QuadratureSettings = DEFAULT_SETTINGS,
) -> Tuple[float, float, float, float]:
    """``(r11, r01, r10, r00)``: each quadratic cost integrated against likelihood times prior."""
    r11 = quad_expectation_h1(
        lambda s, v: costs.b11 * ((s - s_hat) ** 2 + (v - v_gamma1) ** 2) + costs.a11, stat, joint, settings
    )
    r10 = quad_expectation_h1(
        lambda s, v: costs.b10 * (s**2 + (v - v_gamma0) ** 2) + costs.a10, stat, joint, settings
    )
    r01 = quad_expectation_h0(
        lambda v: costs.b01 * (s_hat**2 + (v - v_gamma1) ** 2) + costs.a01, stat, noise, settings
    )
    r00 = quad_expectation_h0(
        lambda v: costs.b00 * (v - v_gamma0) ** 2 + costs.a00, stat, noise, settings
    )
    return r11, r01, r10, r00


def quad_angular_constant(
    m: int, n: int, phi1: float, phi2: float, settings: QuadratureSettings = DEFAULT_SETTINGS
) -> float:
    """``integral 2 |sin^m cos^n|`` over ``[phi1, phi2]``; any integer exponents."""
    return _quad(
        lambda th: 2.0 * abs(math.sin(th) ** m * math.cos(th) ** n), phi1, phi2, settings
    )


def prior_mass(
    prior: Union[JointPriorParams, NoisePriorParams],
    settings: QuadratureSettings = DEFAULT_SETTINGS,
) -> float:
    """Total probability mass of a prior density."""
    if isinstance(prior, NoisePriorParams):
        log_f = lambda x: inv_gamma_logpdf(math.exp(x), prior.alpha0, prior.beta0) + x  # noqa: E731
        return math.exp(_integrate_log_line(log_f, settings))

    def log_f(x, theta):
        r = math.exp(x)
        s = r * math.cos(theta) ** 2
        lp = joint_prior_logpdf(s, r - s, prior)
        if lp == -math.inf:
            return -math.inf
        return lp + 2.0 * x + math.log(2.0 * math.sin(theta) * math.cos(theta))

    mid = 0.5 * (prior.phi1 + prior.phi2)
    x0 = _peak(lambda x: log_f(x, mid))
    ref = log_f(x0, mid)

    def inner(theta):
        return _integrate_line(lambda x: log_f(x, theta), x0, ref, settings)

    return math.exp(ref) * _quad(inner, prior.phi1, prior.phi2, settings)
