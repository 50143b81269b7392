"""How far does the center of mass of a cascade travel?

Compare the closed-form mean of cosh(eta_cm) with a Monte Carlo estimate,
then look at the special rate lam = 3c and the long-time growth.
"""
import math

import numpy as np

from hypcascade import analytics, verify
from hypcascade.analytics import RateSpeed
from hypcascade.cascade import ModelParams

# a single (c, lam) pair first
rs = RateSpeed(c=1.0, lam=2.0)
for t in (0.5, 1.0, 2.0):
    p = ModelParams(rs.c, rs.lam, t, seed=1, reps=20_000)
    est = verify.mc_mean_cosh_cm(p)
    exact = analytics.mean_cosh_cm(rs, t)
    z = (est.mean - exact) / est.std_error
    print(f"t={t:3.1f}  closed={exact:.6f}  mc={est.mean:.6f} +- {est.std_error:.6f}  z={z:+.2f}")

# without events the particle never turns, so the mean is cosh(ct)
print("lam=0:", analytics.mean_cosh_cm(RateSpeed(1.0, 0.0), 1.5), math.cosh(1.5))

# at lam = 3c two coefficients of the general formula blow up, but the sum
# does not; the limit form takes over inside a tiny window
c = 1.0
for lam in (3 * c * (1 - 1e-4), 3 * c, 3 * c * (1 + 1e-4)):
    print(f"lam={lam:.6f}  u(2)={analytics.mean_cosh_cm(RateSpeed(c, lam), 2.0):.10f}")

# the center of mass still grows like e^{ct}, only with a smaller prefactor
ts = np.array([5.0, 10.0, 20.0])
ratio = np.exp(analytics.log_mean_cosh_cm(RateSpeed(c, 3 * c), ts) - c * ts)
print("u(t) e^{-ct} at lam=3c:", ratio, "-> 5/12 =", 5 / 12)

# the rate moves u(t) below cosh(ct), but not monotonically: rare and very
# frequent turns both stay close to straight-line motion in the mean
for lam in (0.0, 1.0, 4.0, 16.0):
    print(f"lam={lam:5.1f}  u(3)={analytics.mean_cosh_cm(RateSpeed(1.0, lam), 3.0):9.4f}")
