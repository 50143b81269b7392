"""Oracle suite: Monte Carlo estimators and residual checks against closed forms.

Every check returns a :class:`CheckReport`.  Checks that compare analytic
quantities accept a ``perturb`` factor which scales the closed-form side;
any value other than 1 should make them fail.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import integrate

from . import analytics, cascade, hypgeo, quadrature
from .analytics import RateSpeed, SplinterLaw
from .cascade import ModelParams

__all__ = [
    "McEstimate", "CheckReport", "SUITES", "Z_BAND", "mc_estimate",
    "mc_mean_cosh_cm", "mc_mean_cosh_splinter", "mc_mean_cosh_splinters",
    "splinter_k1_integral", "compare", "check_ode", "check_acceleration_identity",
    "check_laplace", "laplace_truncation", "check_gnk_system", "check_limit_3c",
    "check_series", "check_splinter_law", "check_splinter_k1", "check_geometry", "run_suite",
    "report_json", "format_table", "sub_seed",
]

Z_BAND = 3.5
SUITES = ("mc", "ode", "laplace", "gnk", "limit3c", "geometry", "all")

# (c, lam, t) triples for the center-of-mass comparisons
MC_POINTS = ((1.0, 1.0, 1.0), (0.5, 2.0, 2.0), (1.0, 3.0, 1.0), (2.0, 0.5, 1.0))
ODE_GRID = [(c, lam) for c in (0.5, 1.0, 2.0) for lam in (0.5, 1.0, 2.0, 3.0, 5.0)]
LAPLACE_POINTS = ((1.0, 1.0, 2.0), (1.0, 2.0, 3.0), (0.5, 1.0, 1.5))


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    reps: int


@dataclass(frozen=True)
class CheckReport:
    name: str
    max_residual: float
    tolerance: float
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict:
        res = self.max_residual if math.isfinite(self.max_residual) else None
        return {"name": self.name, "max_residual": res, "tolerance": self.tolerance,
                "passed": self.passed, "detail": self.detail}


def _report(name, residual, tol, detail=""):
    residual = float(residual)
    ok = bool(residual <= tol) if not math.isnan(residual) else False
    return CheckReport(name, residual, tol, ok, detail)


def sub_seed(seed: int, tag: int) -> int:
    """Independent 64-bit key for check ``tag`` under master ``seed``."""
    return int(np.random.SeedSequence([seed, tag]).generate_state(1, np.uint64)[0])


def mc_estimate(values) -> McEstimate:
    """Sample mean and standard error; the mean is exact for constant samples."""
    x = np.asarray(values, dtype=float)
    n = len(x)
    if n < 2:
        raise ValueError("need at least two samples")
    x0 = float(x[0])
    mean = x0 + math.fsum((x - x0).tolist()) / n
    se = float(np.std(x - x0, ddof=1)) / math.sqrt(n)
    return McEstimate(mean, se, n)


def mc_mean_cosh_cm(params: ModelParams, workers: int = 1, terminal_only: bool = False) -> McEstimate:
    """Monte Carlo mean of cosh(eta_cm(t)).

    With ``terminal_only`` the statistic is the unweighted cosh distance of
    the splinter that deviated at every event.
    """
    c, t = params.c, params.horizon
    if terminal_only:
        def stat(times):
            return cascade.cosh_eta_splinter(times, len(times), t, c)
    else:
        def stat(times):
            return cascade.distances_from_times(times, t, c)[2]
    return mc_estimate(cascade.replicate(params, stat, workers))


def mc_mean_cosh_splinters(params: ModelParams, ks, workers: int = 1) -> dict[int, McEstimate]:
    """Defective means E[cosh(eta_k(t)) 1{N(t) >= k}] for several k from one sample."""
    c, t = params.c, params.horizon
    ks = list(ks)

    def stat(times):
        n = len(times)
        return [cascade.cosh_eta_splinter(times, k, t, c) if k <= n else 0.0 for k in ks]

    rows = np.array(cascade.replicate(params, stat, workers), dtype=float).reshape(-1, len(ks))
    return {k: mc_estimate(rows[:, i]) for i, k in enumerate(ks)}


def mc_mean_cosh_splinter(params: ModelParams, k: int, workers: int = 1) -> McEstimate:
    return mc_mean_cosh_splinters(params, [k], workers)[k]


def splinter_k1_integral(c: float, lam: float, t: float) -> float:
    """int_0^t cosh(c(t-s)) cosh(cs) lam e^{-lam s} ds by QUADPACK."""
    v, _ = integrate.quad(lambda s: math.cosh(c * (t - s)) * math.cosh(c * s) * lam * math.exp(-lam * s),
                          0.0, t, epsabs=0.0, epsrel=1e-12, limit=200)
    return v


def compare(est: McEstimate, reference: float, name: str = "compare") -> CheckReport:
    """Pass iff the estimate lies within 3.5 standard errors of ``reference``."""
    diff = abs(est.mean - reference)
    if est.std_error > 0:
        z = diff / est.std_error
    else:
        z = 0.0 if diff == 0 else math.inf
    detail = f"mean={est.mean!r} se={est.std_error!r} ref={reference!r} z={z:.3f} reps={est.reps}"
    return _report(name, z, Z_BAND, detail)


def _d2(f, t, h):
    return (-f(t + 2 * h) + 16 * f(t + h) - 30 * f(t) + 16 * f(t - h) - f(t - 2 * h)) / (12 * h * h)


def _d1(f, t, h):
    return (-f(t + 2 * h) + 8 * f(t + h) - 8 * f(t - h) + f(t - 2 * h)) / (12 * h)


def _default_grid():
    return [round(0.1 * i, 10) for i in range(1, 51)]


def check_ode(rs: RateSpeed, t_grid=None, fd_step: float = 1e-3, perturb: float = 1.0) -> CheckReport:
    """Residual of u'' - c^2 u = ode_rhs with u the closed form, scaled by max(1, |u|)."""
    t_grid = _default_grid() if t_grid is None else list(t_grid)
    if fd_step > 1e-3 or min(t_grid) < 2 * fd_step:
        raise ValueError("need fd_step <= 1e-3 and grid points >= 2 fd_step")

    def u(t):
        return perturb * analytics.mean_cosh_cm(rs, t)

    worst = 0.0
    for t in t_grid:
        ut = u(t)
        r = abs(_d2(u, t, fd_step) - rs.c ** 2 * ut - analytics.ode_rhs(rs, t)) / max(1.0, abs(ut))
        worst = max(worst, r)
    return _report(f"ode(c={rs.c},lambda={rs.lam})", worst, 1e-6, f"{len(t_grid)} points")


def check_acceleration_identity(rs: RateSpeed, t_grid=None, perturb: float = 1.0) -> CheckReport:
    """c^2 u - u'' against 2 lam c^2 e^{-3 lam t/4} sinh(tR/4)/R, both in closed form."""
    t_grid = _default_grid() if t_grid is None else list(t_grid)
    c, lam, R = rs.c, rs.lam, rs.radical
    worst = 0.0
    for t in t_grid:
        u = perturb * analytics.mean_cosh_cm(rs, t)
        lhs = c * c * u - perturb * analytics.mean_cosh_cm_acceleration(rs, t)
        rhs = 2 * lam * c * c * math.exp(-0.75 * lam * t) * math.sinh(t * R / 4) / R
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(u)))
    return _report(f"distance-acceleration(c={rs.c},lambda={rs.lam})", worst, 1e-6)


def laplace_truncation(c: float, mu: float, tail: float = 1e-9) -> float:
    """Horizon T with int_T^inf e^{(c-mu)t} dt = ``tail``; the integrand is below e^{(c-mu)t}."""
    return math.log(1.0 / (tail * (mu - c))) / (mu - c)


def check_laplace(rs: RateSpeed, mu: float, truncation: float | None = None, perturb: float = 1.0) -> CheckReport:
    exact = analytics.laplace_mean_cosh_cm(rs, mu)
    T = laplace_truncation(rs.c, mu) if truncation is None else truncation

    def f(t):
        return np.exp(-mu * t) * analytics.mean_cosh_cm(rs, t)

    num, _ = quadrature.adaptive(f, 0.0, T, atol=1e-13, rtol=1e-14)
    rel = abs(perturb * num - exact) / abs(exact)
    return _report(f"laplace(c={rs.c},lambda={rs.lam},mu={mu})", rel, 1e-5,
                   f"numeric={num!r} closed={exact!r} T={T:.3f}")


def check_gnk_system(n_max: int = 3, c: float = 1.0, t_grid=None, nodes: int = 24,
                     fd_step: float = 1e-3, perturb: float = 1.0) -> CheckReport:
    """Finite-difference residuals of the three families of the G_{n,k} system.

    Fixed-node quadrature keeps every G_{n,k} a smooth function of t, which
    the finite differences need.  ``G_{-1,-1}`` is taken as zero.
    """
    if n_max > 3:
        raise ValueError("n_max <= 3")
    t_grid = [0.5 + 0.25 * i for i in range(11)] if t_grid is None else list(t_grid)
    h = fd_step

    def G(n, k):
        if n < 0:
            return lambda t: 0.0
        return lambda t: analytics.g_nk(n, k, t, c, nodes=nodes)

    worst = 0.0
    where = ""
    for n in range(n_max + 1):
        for k in range(n + 1):
            lhs_f = G(n, k)
            for t in t_grid:
                lhs = perturb * _d2(lhs_f, t, h)
                gnk = lhs_f(t)
                if k <= n - 2:
                    rhs = 2 * _d1(G(n - 1, k), t, h) - G(n - 2, k)(t) + c * c * gnk
                elif k == n - 1:
                    rhs = 2 * _d1(G(n - 1, n - 1), t, h) - G(n - 2, n - 2)(t) + c * c * gnk
                else:
                    rhs = _d1(G(n - 1, n - 1), t, h) + c * c * gnk
                r = abs(lhs - rhs) / max(1.0, abs(rhs))
                if r > worst:
                    worst, where = r, f"n={n} k={k} t={t}"
    return _report(f"gnk-system(n<={n_max},c={c})", worst, 1e-5, f"worst at {where}")


def check_limit_3c(c: float = 1.0, t_grid=None, perturb: float = 1.0) -> CheckReport:
    """Continuity of the closed form at lam = 3c and the 5/12 e^{ct} asymptote."""
    t_grid = [0.1 * i for i in range(51)] if t_grid is None else list(t_grid)
    worst = 0.0
    for lam in (3 * c * (1 - 1e-8), 3 * c * (1 + 1e-8)):
        rs = RateSpeed(c, lam)
        for t in t_grid:
            lim = analytics.mean_cosh_cm_limit_3c(c, t)
            worst = max(worst, abs(perturb * analytics.mean_cosh_cm_closed(rs, t) - lim) / lim)
    t_far = 20.0 / c
    log_ratio = analytics.log_mean_cosh_cm(RateSpeed(c, 3 * c), t_far) - (math.log(5 / 12) + c * t_far)
    ratio_err = abs(math.expm1(log_ratio + math.log(perturb)))
    exact_one = sum(analytics.LIMIT_COEFFS[i] for i in (0, 2, 3)) == Fraction(1)
    detail = f"continuity={worst:.3e} ratio_err={ratio_err:.3e} t0_exact={exact_one}"
    # both parts share the 1e-4 budget scale: continuity at 1e-4, ratio at 1e-3
    residual = max(worst, ratio_err / 10.0) if exact_one else math.inf
    return _report(f"limit-3c(c={c})", residual, 1e-4, detail)


def check_series(rs: RateSpeed, t: float, n_max: int = 12, perturb: float = 1.0) -> CheckReport:
    """Truncated Poisson-mixture series against the closed form (lam t <= 2)."""
    s = analytics.series_mean_cosh_cm(rs, t, n_max)
    u = perturb * analytics.mean_cosh_cm(rs, t)
    return _report(f"series(c={rs.c},lambda={rs.lam},t={t})", abs(s - u), 1e-4, f"series={s!r} closed={u!r}")


def check_splinter_law(k_max: int = 5, c: float = 1.0, lam: float = 2.0, s_grid=None,
                       perturb: float = 1.0) -> CheckReport:
    """f_k from the three-term formula against 2^{-k} h g, relative."""
    s_grid = [0.1, 0.35, 0.7, 1.0, 1.5, 2.5, 4.0] if s_grid is None else list(s_grid)
    worst = 0.0
    for k in range(1, k_max + 1):
        sl = SplinterLaw(k, c, lam)
        for s in s_grid:
            a = analytics.splinter_stopping_density(sl, s)
            b = perturb * analytics.beta_exp_factor(sl, s) * analytics.gamma_density(k, lam, s) / 2 ** k
            worst = max(worst, abs(a - b) / abs(b))
    return _report(f"splinter-law(k<={k_max},c={c},lambda={lam})", worst, 1e-9)


def check_splinter_k1(c: float = 1.0, lam: float = 2.0, t_grid=None, perturb: float = 1.0) -> CheckReport:
    """First splinter's defective mean against its one-dimensional integral."""
    t_grid = [0.25, 0.5, 1.0, 1.5, 2.0, 3.0] if t_grid is None else list(t_grid)
    sl = SplinterLaw(1, c, lam)
    worst = max(abs(perturb * analytics.mean_cosh_splinter(sl, t) - splinter_k1_integral(c, lam, t))
                for t in t_grid)
    return _report(f"splinter-k1(c={c},lambda={lam})", worst, 1e-10)


def _geometry_checks(seed, n_cascades, perturb):
    rng = np.random.Generator(np.random.Philox(key=sub_seed(seed, 900)))
    reports = []

    pts = np.column_stack([rng.normal(0, 2, 2000), np.exp(rng.normal(0, 1.2, 2000))])
    worst = 0.0
    for x, y in pts:
        q = hypgeo.to_polar((x, y))
        x2, y2 = hypgeo.from_polar(q)
        y2 *= perturb
        worst = max(worst, abs(x2 - x) / max(1, abs(x)), abs(y2 - y) / max(1, abs(y)))
        for cay in (False, True):
            x3, y3 = hypgeo.disk_to_halfplane(hypgeo.halfplane_to_disk((x, y), cay), cay)
            worst = max(worst, abs(x3 - x) / max(1, abs(x)), abs(y3 - y) / max(1, abs(y)))
    reports.append(_report("round-trips", worst, 1e-12, f"{len(pts)} points"))

    legs = rng.uniform(0, 5, size=(2000, 2))
    worst = 0.0
    for e1, e2 in legs:
        a = rng.uniform(-math.pi, math.pi)
        v1 = perturb * hypgeo.carnot(e1, e2, a + math.pi / 2, a)
        v2 = hypgeo.pythagoras(e1, e2)
        worst = max(worst, abs(v1 - v2) / max(1.0, v2))
    reports.append(_report("carnot-right-angle", worst, 1e-12))

    worst = 0.0
    for x0, r in zip(rng.normal(0, 3, 2000), np.exp(rng.normal(0, 1, 2000))):
        img = hypgeo.geodesic_image(float(x0), float(r))
        if isinstance(img, hypgeo.GeodesicImage):
            (u, v), rad = img
            worst = max(worst, abs(perturb * (u * u + v * v) - rad * rad - 1) / max(1.0, rad * rad))
    reports.append(_report("geodesic-orthogonality", worst, 1e-10))

    worst_frame = 0.0
    worst_mass = 0.0
    policies = list(cascade.DirectionPolicy)
    key = sub_seed(seed, 901)
    for i in range(n_cascades):
        p = ModelParams(c=float(rng.uniform(0.2, 2)), lam=float(rng.uniform(0, 4)),
                        horizon=float(rng.uniform(0.1, 2)), seed=key,
                        direction_policy=policies[i % len(policies)])
        run = cascade.build_cascade(p, cascade.replication_stream(key, i))
        worst_mass = max(worst_mass, abs(math.fsum(perturb * s.mass for s in run.splinters) - 1.0))
        for s in run.splinters:
            d = hypgeo.cosh_dist_origin(s.frame.base_point())
            worst_frame = max(worst_frame, abs(perturb * d - s.cosh_eta) / s.cosh_eta)
    reports.append(_report("frame-vs-product", worst_frame, 1e-9, f"{n_cascades} cascades, relative"))
    reports.append(_report("mass-conservation", worst_mass, 1e-15, f"{n_cascades} cascades"))
    return reports


def check_geometry(seed: int = 0, n_cascades: int = 10_000, perturb: float = 1.0) -> list[CheckReport]:
    return _geometry_checks(seed, n_cascades, perturb)


def _mc_checks(seed, reps, workers, perturb):
    out = []
    for i, (c, lam, t) in enumerate(MC_POINTS):
        p = ModelParams(c, lam, t, seed=sub_seed(seed, 100 + i), reps=reps)
        ref = analytics.mean_cosh_cm(RateSpeed(c, lam), t)
        out.append(compare(mc_mean_cosh_cm(p, workers), perturb * ref, f"mc-cm(c={c},lambda={lam},t={t})"))
    p = ModelParams(1.0, 2.0, 1.5, seed=sub_seed(seed, 200), reps=reps)
    ests = mc_mean_cosh_splinters(p, [1, 2, 3], workers)
    for k, est in ests.items():
        ref = analytics.mean_cosh_splinter(SplinterLaw(k, 1.0, 2.0), 1.5)
        out.append(compare(est, perturb * ref, f"mc-splinter(k={k},c=1,lambda=2,t=1.5)"))
    p = ModelParams(1.0, 1.0, 1.0, seed=sub_seed(seed, 300), reps=reps)
    ref = analytics.mean_cosh_all_deviating(RateSpeed(1.0, 1.0), 1.0)
    out.append(compare(mc_mean_cosh_cm(p, workers, terminal_only=True), perturb * ref,
                       "mc-all-deviating(c=1,lambda=1,t=1)"))
    return out


def run_suite(suite: str = "all", seed: int = 0, reps: int = 100_000, workers: int = 1,
              perturb: float = 1.0) -> list[CheckReport]:
    """Run one named suite (or ``"all"``) and return its reports in a fixed order."""
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    want = set(SUITES[:-1]) if suite == "all" else {suite}
    out: list[CheckReport] = []
    if "ode" in want:
        for c, lam in ODE_GRID:
            rs = RateSpeed(c, lam)
            out.append(check_ode(rs, perturb=perturb))
            out.append(check_acceleration_identity(rs, perturb=perturb))
    if "laplace" in want:
        for c, lam, mu in LAPLACE_POINTS:
            out.append(check_laplace(RateSpeed(c, lam), mu, perturb=perturb))
        out.append(check_laplace(RateSpeed(1.0, 0.0), 2.0, perturb=perturb))
    if "gnk" in want:
        out.append(check_gnk_system(3, 1.0, perturb=perturb))
        out.append(check_series(RateSpeed(1.0, 1.0), 2.0, perturb=perturb))
        out.append(check_splinter_law(perturb=perturb))
        out.append(check_splinter_k1(perturb=perturb))
    if "limit3c" in want:
        out.append(check_limit_3c(1.0, perturb=perturb))
    if "geometry" in want:
        out.extend(check_geometry(seed, perturb=perturb))
    if "mc" in want:
        out.extend(_mc_checks(seed, reps, workers, perturb))
    return out


def report_json(reports, suite: str, seed: int) -> dict:
    return {
        "format_version": 1,
        "suite": suite,
        "seed": seed,
        "passed": all(r.passed for r in reports),
        "checks": [r.to_dict() for r in reports],
    }


def format_table(reports) -> str:
    width = max([len(r.name) for r in reports] + [5])
    lines = [f"{'check':<{width}}  {'residual':>11}  {'tolerance':>9}  result"]
    for r in reports:
        lines.append(f"{r.name:<{width}}  {r.max_residual:11.3e}  {r.tolerance:9.1e}  "
                     f"{'PASS' if r.passed else 'FAIL'}")
    return "\n".join(lines)
