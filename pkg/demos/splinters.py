"""Following one splinter instead of the center of mass.

The k-th splinter moves like a particle that starts running straight at
a random time; its defective mean E[cosh(eta_k) 1{N >= k}] is an integral
against a weighted density of that delay.
"""
import math

from scipy import integrate

from hypcascade import analytics, verify
from hypcascade.analytics import SplinterLaw
from hypcascade.cascade import ModelParams

c, lam, t = 1.0, 2.0, 1.5

p = ModelParams(c, lam, t, seed=3, reps=50_000)
mc = verify.mc_mean_cosh_splinters(p, [0, 1, 2, 3, 4])
for k, est in mc.items():
    exact = analytics.mean_cosh_splinter(SplinterLaw(k, c, lam), t)
    print(f"k={k}  exact={exact:.6f}  mc={est.mean:.6f} +- {est.std_error:.6f}")

# f_k carries the cosh weights of the turns, so it is not a probability
# density: for lam > c its total mass is (lam^2 / (lam^2 - c^2))^k
for k in (1, 2, 3):
    sl = SplinterLaw(k, c, lam)
    mass, _ = integrate.quad(lambda s: analytics.splinter_stopping_density(sl, s), 0, 50)
    print(f"k={k}  mass={mass:.10f}  expected={(lam ** 2 / (lam ** 2 - c ** 2)) ** k:.10f}")

# the Laplace transform is a k-th power, which makes a quick sanity check
mu = 2.5
for k in (1, 2, 3):
    sl = SplinterLaw(k, c, lam)
    num, _ = integrate.quad(lambda s: math.exp(-mu * s) * analytics.mean_cosh_splinter(sl, s), 0, 40, limit=200)
    print(f"k={k}  numeric={num:.10f}  closed={analytics.laplace_mean_cosh_splinter(sl, mu):.10f}")
