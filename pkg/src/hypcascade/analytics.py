"""Closed forms and quadratures for mean hyperbolic distances.

Notation: ``c`` is the hyperbolic speed, ``lam`` the Poisson rate and
``R = sqrt(lam^2 + 16 c^2)``.  The center-of-mass mean is

    u(t) = 8c^2/R e^{-3 lam t/4} [ e^{-tR/4}/(3R + 5 lam) + e^{tR/4}/(3R - 5 lam) ]
           + (lam + 2c)/(2(lam + 3c)) e^{ct} + (lam - 2c)/(2(lam - 3c)) e^{-ct}.

Two of its coefficients blow up at ``lam = 3c`` while their sum stays
finite.  :func:`_cm_scaled` evaluates that pair in a factored form which is
exact at ``lam = 3c`` and loses no digits near it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import special

from . import quadrature

__all__ = [
    "RateSpeed", "LaplaceParams", "SplinterLaw", "CurvePoint", "LIMIT_WINDOW",
    "LIMIT_COEFFS", "in_limit_window", "mean_cosh_cm", "mean_cosh_cm_closed",
    "log_mean_cosh_cm", "mean_cosh_cm_limit_3c", "mean_cosh_cm_derivative",
    "mean_cosh_cm_acceleration", "mean_cosh_cm_derivative_quad",
    "mean_cosh_all_deviating", "ode_rhs", "laplace_mean_cosh_cm",
    "laplace_mean_cosh_splinter", "gamma_density", "beta_expectation",
    "beta_exp_factor", "splinter_stopping_density", "mean_cosh_splinter",
    "g_nk", "g_nk_closed", "series_mean_cosh_cm", "curve",
]

LIMIT_WINDOW = 1e-6
# e^{-ct} (53/100 + 3/10 ct) + 5/12 e^{ct} + 4/75 e^{-7ct/2}
LIMIT_COEFFS = (Fraction(53, 100), Fraction(3, 10), Fraction(5, 12), Fraction(4, 75))
G_NK_MAX_N = 4


@dataclass(frozen=True)
class RateSpeed:
    c: float
    lam: float

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("speed c must be positive")
        if not self.lam >= 0:
            raise ValueError("rate lambda must be non-negative")

    @property
    def radical(self) -> float:
        return math.sqrt(self.lam ** 2 + 16.0 * self.c ** 2)


@dataclass(frozen=True)
class LaplaceParams:
    mu: float
    gamma: float

    @classmethod
    def for_rate(cls, lam: float, mu: float) -> "LaplaceParams":
        return cls(mu, lam + mu)


@dataclass(frozen=True)
class SplinterLaw:
    k: int
    c: float
    lam: float
    nodes: int = 64

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("splinter index must be non-negative")
        if self.nodes < 16:
            raise ValueError("need at least 16 quadrature nodes")
        if not self.c > 0 or not self.lam >= 0:
            raise ValueError("need c > 0 and lam >= 0")


@dataclass(frozen=True)
class CurvePoint:
    t: float
    value: float


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def _expm1_ratio(x):
    # expm1(x)/x, equal to 1 at x = 0
    safe = np.where(x == 0.0, 1.0, x)
    return np.where(x == 0.0, 1.0, np.expm1(safe) / safe)


def in_limit_window(rs: RateSpeed) -> bool:
    return abs(rs.lam - 3.0 * rs.c) / rs.c < LIMIT_WINDOW


def _cm_scaled(rs: RateSpeed, t, order: int = 0):
    """e^{-ct} times the ``order``-th time derivative of the closed form."""
    c, lam = rs.c, rs.lam
    t = np.asarray(t, dtype=float)
    R = rs.radical
    m = order
    a1 = 8.0 * c * c / (R * (3.0 * R + 5.0 * lam))
    r1 = -(3.0 * lam + R) / 4.0
    a3 = (lam + 2.0 * c) / (2.0 * (lam + 3.0 * c))
    p = (R - 3.0 * lam) / 4.0
    out = a1 * r1 ** m * np.exp((r1 - c) * t) + a3 * c ** m
    q = c * c * (3.0 * R + 5.0 * lam) / (2.0 * R * (lam + 3.0 * c))
    if abs(lam - 3.0 * c) >= c:
        a2 = -q / (lam - 3.0 * c)
        a4 = (lam - 2.0 * c) / (2.0 * (lam - 3.0 * c))
        pair = a2 * p ** m * np.exp((p - c) * t) + a4 * (-c) ** m * np.exp(-2.0 * c * t)
    else:
        # pair = e^{-ct}/(lam-3c) [ (lam-2c)/2 (-c)^m - q p^m e^{delta t} ], delta = p + c;
        # both (lam-2c)/2 - q and delta carry an exact factor (lam - 3c)
        A = lam * lam + lam * c - 9.0 * c * c
        k0 = (5.0 * c + A / (R + 5.0 * c)) / (2.0 * R)
        dprime = -2.0 * lam / (R + 3.0 * lam - 4.0 * c)
        delta = dprime * (lam - 3.0 * c)
        geo = sum(p ** j * (-c) ** (m - 1 - j) for j in range(m))
        bracket = ((-c) ** m * k0 - q * dprime * geo
                   - q * p ** m * dprime * t * _expm1_ratio(delta * t))
        pair = np.exp(-2.0 * c * t) * bracket
    val = out + pair
    if m < 2:
        # u(0) = 1 and u'(0) = 0 hold exactly; rounding would leave ~1e-17
        val = np.where(t == 0.0, 1.0 - m, val)
    return val


def _limit_scaled(c, t):
    t = np.asarray(t, dtype=float)
    k1, k2, k3, k4 = (float(v) for v in LIMIT_COEFFS)
    ct = c * t
    return np.exp(-2.0 * ct) * (k1 + k2 * ct) + k3 + k4 * np.exp(-4.5 * ct)


def mean_cosh_cm_limit_3c(c: float, t):
    """Mean cosh distance of the center of mass at ``lam = 3c``."""
    t = np.asarray(t, dtype=float)
    return _out(_limit_scaled(c, t) * np.exp(c * t))


def mean_cosh_cm_closed(rs: RateSpeed, t):
    """Closed form for every (c, lam), without switching to the limit formula."""
    t = np.asarray(t, dtype=float)
    return _out(_cm_scaled(rs, t) * np.exp(rs.c * t))


def mean_cosh_cm(rs: RateSpeed, t):
    """E cosh(eta_cm(t)).

    Inside the window ``|lam - 3c|/c < LIMIT_WINDOW`` the limit formula is
    returned.  Accepts scalar or array ``t``.
    """
    if in_limit_window(rs):
        return mean_cosh_cm_limit_3c(rs.c, t)
    return mean_cosh_cm_closed(rs, t)


def log_mean_cosh_cm(rs: RateSpeed, t):
    """log E cosh(eta_cm(t)); finite for any ``c t``."""
    t = np.asarray(t, dtype=float)
    scaled = _limit_scaled(rs.c, t) if in_limit_window(rs) else _cm_scaled(rs, t)
    return _out(np.log(scaled) + rs.c * t)


def mean_cosh_cm_derivative(rs: RateSpeed, t):
    t = np.asarray(t, dtype=float)
    return _out(_cm_scaled(rs, t, 1) * np.exp(rs.c * t))


def mean_cosh_cm_acceleration(rs: RateSpeed, t):
    """Second time derivative of the closed form."""
    t = np.asarray(t, dtype=float)
    return _out(_cm_scaled(rs, t, 2) * np.exp(rs.c * t))


def mean_cosh_cm_derivative_quad(rs: RateSpeed, t: float, atol: float = 1e-13) -> float:
    """Derivative from its integral representation (sinh/cosh convolutions)."""
    c, lam, R = rs.c, rs.lam, rs.radical
    first = 4.0 * c * c * math.exp(-0.75 * lam * t) * math.sinh(t * R / 4.0) / R
    if t == 0.0 or lam == 0.0:
        return first

    def common(s):
        return np.exp(-0.75 * lam * s) * np.sinh(s * R / 4.0)

    i1, _ = quadrature.adaptive(lambda s: common(s) * np.sinh(c * (t - s)), 0.0, t, atol=atol)
    i2, _ = quadrature.adaptive(lambda s: common(s) * np.cosh(c * (t - s)), 0.0, t, atol=atol)
    return first + 2.0 * c * lam * lam / R * i1 + 4.0 * c * c * lam / R * i2


def mean_cosh_all_deviating(rs: RateSpeed, t):
    """Mean cosh distance of a particle turning orthogonally at every event.

    ``rs.lam`` is the rate of the turning clock itself.
    """
    c, lam = rs.c, rs.lam
    t = np.asarray(t, dtype=float)
    R2 = math.sqrt(lam * lam + 4.0 * c * c)
    grow = (R2 + lam) / (2.0 * R2) * np.exp((R2 - lam) * t / 2.0)
    decay = 2.0 * c * c / (R2 * (R2 + lam)) * np.exp(-(R2 + lam) * t / 2.0)
    return _out(np.where(t == 0.0, 1.0, grow + decay))


def ode_rhs(rs: RateSpeed, t):
    """Forcing term of u'' - c^2 u; non-positive for t >= 0."""
    c, lam, R = rs.c, rs.lam, rs.radical
    t = np.asarray(t, dtype=float)
    return _out(-2.0 * lam * c * c * np.exp(-0.75 * lam * t) * np.sinh(t * R / 4.0) / R + 0.0)


def _as_laplace(rs, lp):
    if isinstance(lp, LaplaceParams):
        if not math.isclose(lp.gamma, rs.lam + lp.mu, rel_tol=1e-12, abs_tol=1e-12):
            raise ValueError("gamma must equal lambda + mu")
        return lp
    return LaplaceParams.for_rate(rs.lam, float(lp))


def laplace_mean_cosh_cm(rs: RateSpeed, lp) -> float:
    """Laplace transform of :func:`mean_cosh_cm` at ``mu`` (``lp`` or a number)."""
    lp = _as_laplace(rs, lp)
    c, lam, mu = rs.c, rs.lam, lp.mu
    if not mu > c:
        raise ValueError(f"transform diverges: need mu > c (mu={mu}, c={c})")
    den = lam * lam + 2.0 * mu * mu + 3.0 * lam * mu - 2.0 * c * c
    if not den > 0:
        raise ValueError("transform diverges: need 2c^2 < lam^2 + 2mu^2 + 3 lam mu")
    return (lam / 2.0 * ((lam + mu + c) / (mu - c) + (lam + mu - c) / (mu + c)) + 2.0 * lam + 2.0 * mu) / den


def laplace_mean_cosh_splinter(sl: SplinterLaw, mu: float) -> float:
    """Laplace transform of E[cosh(eta_k(t)) 1{N(t) >= k}]."""
    c, lam, k = sl.c, sl.lam, sl.k
    if not mu > c:
        raise ValueError("transform diverges: need mu > c")
    g = lam + mu
    return 0.5 * (lam * g / (g * g - c * c)) ** k * (1.0 / (mu + c) + 1.0 / (mu - c))


def gamma_density(k: int, lam: float, s):
    """Gamma(k, lam) density at ``s``."""
    if k < 1:
        raise ValueError("shape must be at least 1")
    s = np.asarray(s, dtype=float)
    if lam == 0.0:
        return _out(np.zeros_like(s))
    pos = np.where(s > 0, s, 1.0)
    logv = -lam * pos + k * math.log(lam) + (k - 1) * np.log(pos) - math.lgamma(k)
    at_zero = lam if k == 1 else 0.0
    return _out(np.where(s > 0, np.exp(logv), np.where(s == 0, at_zero, 0.0)))


def _beta_expectation_fixed(r, k, x, n):
    nodes, w = quadrature.legendre_rule(n)
    y = 0.5 * (nodes + 1.0)
    logb = math.lgamma(r) + math.lgamma(k - r) - math.lgamma(k)
    dens = 0.5 * w * np.exp((r - 1) * np.log(y) + (k - r - 1) * np.log1p(-y) - logb)
    return dens @ np.exp(np.outer(2.0 * y - 1.0, x))


def beta_expectation(r: int, k: int, x, nodes: int = 64, rtol: float = 1e-12):
    """E exp(x (2Y - 1)) for Y ~ Beta(r, k - r), 1 <= r <= k - 1.

    Gauss-Legendre on (0, 1), doubling the node count until two successive
    estimates agree to ``rtol``.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    prev = _beta_expectation_fixed(r, k, x, nodes)
    while nodes < 1024:
        nodes *= 2
        cur = _beta_expectation_fixed(r, k, x, nodes)
        if np.all(np.abs(cur - prev) <= rtol * np.abs(cur)):
            return cur
        prev = cur
    return prev


def beta_exp_factor(sl: SplinterLaw, s):
    """h(k, c, s): endpoint terms e^{cs} + e^{-cs} plus binomially weighted Beta terms."""
    if sl.k < 1:
        raise ValueError("defined for k >= 1")
    s = np.asarray(s, dtype=float)
    x = np.atleast_1d(sl.c * s)
    total = np.exp(x) + np.exp(-x)
    for r in range(1, sl.k):
        total = total + math.comb(sl.k, r) * beta_expectation(r, sl.k, x, sl.nodes)
    return _out(total.reshape(s.shape))


def _conv_term(r, k, c, lam, s, n):
    if s == 0.0:
        return 0.0
    x, w = quadrature.legendre_rule(n)
    wv = 0.5 * s * (x + 1.0)
    f = (wv ** (r - 1) / math.factorial(r - 1) * np.exp(wv * (c - lam))
         * (s - wv) ** (k - r - 1) / math.factorial(k - r - 1) * np.exp(-(s - wv) * (lam + c)))
    return 0.5 * s * float(np.dot(w, f))


def splinter_stopping_density(sl: SplinterLaw, s):
    """Inverse Laplace transform f_k(s) of [lam (lam+mu) / ((lam+mu)^2 - c^2)]^k.

    Two endpoint exponentials plus the binomial sum of convolutions; the
    convolutions are integrated on [0, s] with doubling Gauss-Legendre rules.
    """
    k, c, lam = sl.k, sl.c, sl.lam
    if k < 1:
        raise ValueError("f_0 is the unit point mass at 0")
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    out = np.empty_like(s_arr)
    for i, sv in enumerate(s_arr):
        lead = sv ** (k - 1) / math.factorial(k - 1) * (math.exp((c - lam) * sv) + math.exp(-(c + lam) * sv))
        conv = 0.0
        for r in range(1, k):
            n = sl.nodes
            prev = _conv_term(r, k, c, lam, sv, n)
            while n < 1024:
                n *= 2
                cur = _conv_term(r, k, c, lam, sv, n)
                if abs(cur - prev) <= 1e-13 * abs(cur):
                    break
                prev = cur
            conv += math.comb(k, r) * cur if k > 1 else 0.0
        out[i] = (lam / 2.0) ** k * (lead + conv)
    return _out(out.reshape(np.shape(s)))


def mean_cosh_splinter(sl: SplinterLaw, t: float, atol: float = 1e-10, rtol: float = 1e-13) -> float:
    """E[cosh(eta_k(t)) 1{N(t) >= k}] as a randomly delayed straight motion.

    Integrates cosh(c(t - s)) against the stopping density 2^{-k} h g with
    adaptive panels split at the Gamma mode.
    """
    k, c, lam = sl.k, sl.c, sl.lam
    if t < 0:
        raise ValueError("t must be non-negative")
    if k == 0:
        return math.cosh(c * t)
    if lam == 0.0 or t == 0.0:
        return 0.0

    def integrand(s):
        return np.cosh(c * (t - s)) * beta_exp_factor(sl, s) * gamma_density(k, lam, s) / 2.0 ** k

    mode = (k - 1) / lam
    value, _ = quadrature.adaptive(integrand, 0.0, t, atol=atol, rtol=rtol, breakpoints=(mode,))
    return value


def _nested(n, k, t, c, nodes):
    x, w = quadrature.legendre_rule(nodes)

    def level(j, lower):
        # integral over s_j in [lower, t]; lower has shape (...,)
        half = 0.5 * (t - lower)[..., None]
        s = lower[..., None] + half * (x + 1.0)
        ww = half * w
        link = np.cosh(c * (s - lower[..., None]))
        if j == k:
            tail = (t - s) ** (n - k) / math.factorial(n - k) * np.cosh(c * (t - s))
            return np.sum(ww * link * tail, axis=-1)
        return np.sum(ww * link * level(j + 1, s), axis=-1)

    return float(level(1, np.array(0.0)))


def g_nk(n: int, k: int, t: float, c: float, nodes: int | None = None, rtol: float = 1e-8) -> float:
    """G_{n,k}(t) by nested one-dimensional Gauss-Legendre rules.

    The integral over the ordered times after ``s_k`` is done in closed
    form, leaving ``k`` nested dimensions.  With ``nodes=None`` the node
    count starts at 16 and doubles until two estimates agree to ``rtol``;
    pass a fixed ``nodes`` for values that must be smooth in ``t``.
    """
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    if n > G_NK_MAX_N:
        raise ValueError(f"nested quadrature limited to n <= {G_NK_MAX_N}; use g_nk_closed")
    if t < 0:
        raise ValueError("t must be non-negative")
    if k == 0:
        return t ** n / math.factorial(n) * math.cosh(c * t)
    if nodes is not None:
        return _nested(n, k, t, c, nodes)
    m = 16
    prev = _nested(n, k, t, c, m)
    while m < 128:
        m *= 2
        cur = _nested(n, k, t, c, m)
        if abs(cur - prev) <= rtol * abs(cur):
            return cur
        prev = cur
    return prev


def _inv_pair(a, b, t, c):
    # inverse Laplace transform of (g - c)^{-a} (g + c)^{-b}
    if b == 0:
        return t ** (a - 1) / math.factorial(a - 1) * math.exp(c * t)
    if a == 0:
        return t ** (b - 1) / math.factorial(b - 1) * math.exp(-c * t)
    return (math.exp(-c * t) * t ** (a + b - 1) / math.factorial(a + b - 1)
            * float(special.hyp1f1(a, a + b, 2.0 * c * t)))


def g_nk_closed(n: int, k: int, t: float, c: float) -> float:
    """G_{n,k}(t) from its Laplace transform, via Kummer functions; any n."""
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    j = n - k + 1
    total = 0.0
    for r in range(k + 1):
        b = math.comb(k, r)
        total += b * (_inv_pair(r + j, k - r, t, c) + _inv_pair(r, k - r + j, t, c))
    return total / 2.0 ** (k + 1)


def series_mean_cosh_cm(rs: RateSpeed, t: float, n_max: int = 12) -> float:
    """Poisson-mixture series for E cosh(eta_cm(t)) truncated at ``n_max`` events."""
    c, lam = rs.c, rs.lam
    terms = [(lam / 2.0) ** n * g_nk_closed(n, n, t, c) for n in range(n_max + 1)]
    for n in range(1, n_max + 1):
        terms += [lam ** n * g_nk_closed(n, k, t, c) / 2.0 ** (k + 1) for k in range(n)]
    return math.exp(-lam * t) * math.fsum(terms)


def curve(fn, rs: RateSpeed, t_max: float, dt: float) -> list[CurvePoint]:
    ts = np.linspace(0.0, t_max, int(round(t_max / dt)) + 1)
    return [CurvePoint(float(a), float(b)) for a, b in zip(ts, np.atleast_1d(fn(rs, ts)))]
