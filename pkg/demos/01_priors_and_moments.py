"""
Priors, closed-form moments and the quadrature check
=====================================================

The noise-only prior is inverse gamma on the noise power. The signal prior
puts an inverse gamma on total power and an angular density on how that
power splits between signal and noise.
"""

import math

import numpy as np

from jointsnr import JointPriorParams, NoisePriorParams, SufficientStatistic
from jointsnr.model import sample_power_pair
from jointsnr.moments import conditional_estimates, log_moment_h1
from jointsnr.oracle import quad_moment_h1

# a narrow cone near the signal axis: at most sin^2(pi/8) of the power is noise
h0 = NoisePriorParams(alpha0=3.0, beta0=1.0)
h1 = JointPriorParams(alpha1=3.0, beta1=9.1, phi1=0.0, phi2=math.pi / 8)
print("C11 =", h1.c11)

# draws respect the cone
pair = sample_power_pair(np.random.default_rng(0), h1, size=100_000)
frac = pair.v / pair.total
print("noise fraction range:", frac.min(), frac.max(), "bound:", math.sin(math.pi / 8) ** 2)

# moments come out in the log domain; compare one against 2-D quadrature
stat = SufficientStatistic(n=8, t=40.0)
closed = math.exp(log_moment_h1(1, 1, stat, h1).log_value)
brute = quad_moment_h1(1, 1, stat, h1)
print(f"<s v f1>: closed {closed:.15e}  quadrature {brute:.15e}")

# posterior means split the updated total-power scale by angular ratios
est = conditional_estimates(stat, h0, h1)
print(f"s_h1 = {est.s_h1:.4f}  v_h1 = {est.v_h1:.4f}  v_h0 = {est.v_h0:.4f}")

# long vectors: the moments themselves underflow, their logs stay finite
big = SufficientStatistic(n=128, t=1e12)
print("log <f1> at t=1e12:", log_moment_h1(0, 0, big, h1).log_value)
