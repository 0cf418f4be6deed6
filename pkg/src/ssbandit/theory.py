"""Information-theoretic diagnostics and numeric checks of supporting inequalities.

Covers KL information and large-deviation rate functions in one-parameter
exponential families, regret lower bounds, the density of sums of Laplace
variables with exact rational coefficients, and Monte Carlo / quadrature
verifiers for the tail inequalities those results rely on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import integrate, optimize, stats

__all__ = [
    "BernoulliFamily",
    "ExponentialFamily",
    "ExponentialRateFamily",
    "LowerBoundReport",
    "NormalFamily",
    "PoissonFamily",
    "VerificationReport",
    "burnetas_katehakis_bound",
    "de_coefficients",
    "de_density",
    "de_tail",
    "kl_divergence",
    "lai_robbins_bound",
    "m_of_g",
    "rate_function",
    "verify_b2_bound",
    "verify_chisq_chernoff",
    "verify_ctj_inequality",
    "verify_min1_asymptotic",
]


# --- exponential families --------------------------------------------------------


class ExponentialFamily:
    """Densities ``exp(theta x - psi(theta)) f(x; 0)``.

    Subclasses give the log-MGF ``psi``, its derivative (the mean map) and the
    natural-parameter interval ``(theta_min, theta_max)``.
    """

    name = "exponential-family"
    theta_min = -math.inf
    theta_max = math.inf

    def psi(self, theta: float) -> float:
        raise NotImplementedError

    def mean(self, theta: float) -> float:
        raise NotImplementedError

    def theta(self, mean: float) -> float:
        """Natural parameter with the given mean (inverse of the mean map)."""
        lo, hi = self.mean_range()
        if not lo < mean < hi:
            raise ValueError(f"mean {mean} outside ({lo}, {hi})")
        a, b = self._bracket(mean)
        return optimize.brentq(lambda th: self.mean(th) - mean, a, b, xtol=1e-14, rtol=1e-14)

    def mean_range(self) -> tuple[float, float]:
        return self._limit_mean(self.theta_min), self._limit_mean(self.theta_max)

    def _limit_mean(self, theta):
        raise NotImplementedError

    def contains(self, theta: float) -> bool:
        return self.theta_min < theta < self.theta_max

    def _bracket(self, x):
        # expand geometrically from 0 towards the domain ends until mean(.) brackets x
        lo = hi = 0.0 if self.contains(0.0) else 0.5 * (self.theta_min + self.theta_max)
        step = 1.0
        while self.mean(lo) > x:
            lo = lo - step if math.isinf(self.theta_min) else 0.5 * (lo + self.theta_min)
            step *= 2
        step = 1.0
        while self.mean(hi) < x:
            hi = hi + step if math.isinf(self.theta_max) else 0.5 * (hi + self.theta_max)
            step *= 2
        return lo, hi

    def closed_form_rate(self, theta_ref: float, x: float):
        return None


class BernoulliFamily(ExponentialFamily):
    name = "bernoulli"

    def psi(self, theta):
        return float(np.logaddexp(0.0, theta) - math.log(2.0))

    def mean(self, theta):
        return float(1.0 / (1.0 + math.exp(-theta))) if theta > -700 else 0.0

    def theta(self, mean):
        if not 0.0 < mean < 1.0:
            raise ValueError(f"Bernoulli mean {mean} outside (0, 1)")
        return math.log(mean / (1.0 - mean))

    def _limit_mean(self, theta):
        return 0.0 if theta < 0 else 1.0

    def closed_form_rate(self, theta_ref, x):
        p = self.mean(theta_ref)
        if not 0.0 <= x <= 1.0:
            return math.inf
        out = 0.0
        if x > 0:
            out += x * math.log(x / p)
        if x < 1:
            out += (1 - x) * math.log((1 - x) / (1 - p))
        return max(out, 0.0)


class NormalFamily(ExponentialFamily):
    """Normal means with known standard deviation ``sigma``."""

    name = "normal"

    def __init__(self, sigma: float = 1.0):
        if not sigma > 0:
            raise ValueError("sigma must be positive")
        self.sigma = float(sigma)

    def psi(self, theta):
        return 0.5 * self.sigma**2 * theta**2

    def mean(self, theta):
        return self.sigma**2 * theta

    def theta(self, mean):
        return mean / self.sigma**2

    def _limit_mean(self, theta):
        return theta

    def closed_form_rate(self, theta_ref, x):
        return (x - self.mean(theta_ref)) ** 2 / (2 * self.sigma**2)


class PoissonFamily(ExponentialFamily):
    name = "poisson"

    def psi(self, theta):
        return math.exp(theta) - 1.0

    def mean(self, theta):
        return math.exp(theta)

    def theta(self, mean):
        if not mean > 0:
            raise ValueError("Poisson mean must be positive")
        return math.log(mean)

    def _limit_mean(self, theta):
        return 0.0 if theta < 0 else math.inf


class ExponentialRateFamily(ExponentialFamily):
    """Exponential distributions, tilted from Exp(1); ``theta < 1``."""

    name = "exponential"
    theta_max = 1.0

    def psi(self, theta):
        return -math.log1p(-theta)

    def mean(self, theta):
        return 1.0 / (1.0 - theta)

    def _limit_mean(self, theta):
        return 0.0 if theta < 0 else math.inf


def kl_divergence(family: ExponentialFamily, theta_k: float, theta_ref: float) -> float:
    """``D(f_k | f_ref) = (theta_k - theta_ref) psi'(theta_k) - psi(theta_k) + psi(theta_ref)``."""
    for th in (theta_k, theta_ref):
        if not family.contains(th):
            raise ValueError(f"theta={th} outside the natural parameter space")
    if theta_k == theta_ref:
        return 0.0
    d = (theta_k - theta_ref) * family.mean(theta_k) - family.psi(theta_k) + family.psi(theta_ref)
    return max(d, 0.0)


def rate_function(family: ExponentialFamily, theta_ref: float, x: float, closed_form: bool = True) -> float:
    """Large-deviation rate ``sup_theta [theta x - psi(theta_ref + theta) + psi(theta_ref)]``.

    Returns ``inf`` for ``x`` outside the closure of the mean range.
    """
    if closed_form:
        value = family.closed_form_rate(theta_ref, x)
        if value is not None:
            return value
    lo, hi = family.mean_range()
    if not lo <= x <= hi or math.isinf(x):
        return math.inf
    if x == family.mean(theta_ref):
        return 0.0
    if not lo < x < hi:
        # boundary of the mean range: the supremum is a limit along the domain edge
        edge = family.theta_min if x == lo else family.theta_max
        return _boundary_rate(family, theta_ref, x, edge)
    phi = family.theta(x)
    return max((phi - theta_ref) * x - family.psi(phi) + family.psi(theta_ref), 0.0)


def _boundary_rate(family, theta_ref, x, edge):
    f = lambda th: (th - theta_ref) * x - family.psi(th) + family.psi(theta_ref)
    # monotone along the edge direction; evaluate a convergent sequence
    if math.isinf(edge):
        ths = [math.copysign(10.0**p, edge) for p in range(1, 6)]
    else:
        ths = [edge - math.copysign(10.0 ** (-p), edge - theta_ref) for p in range(1, 12)]
    vals = [f(th) for th in ths if family.contains(th)]
    return max(vals) if vals else math.inf


def m_of_g(g: float) -> float:
    """``log(1 + g^2) / 2``: information per pull for normal arms with unknown variance."""
    return 0.5 * math.log1p(g * g)


@dataclass(frozen=True)
class LowerBoundReport:
    """Per-arm coefficients of an asymptotic regret lower bound.

    ``coefficients[k]`` is the gap divided by the information number (zero
    for optimal arms) and ``limits[k]`` the matching bound on
    ``E N_k / log N``.
    """

    coefficients: tuple[float, ...]
    information: tuple[float, ...]
    limits: tuple[float, ...]
    horizon: int
    bound: float

    @property
    def coefficient_sum(self) -> float:
        return float(sum(self.coefficients))

    def inferior_arms(self) -> list[int]:
        return [k for k, c in enumerate(self.coefficients) if c > 0]


def _report(gaps, info, horizon):
    coeffs, limits = [], []
    for g, d in zip(gaps, info):
        if g > 0:
            coeffs.append(g / d)
            limits.append(1.0 / d)
        else:
            coeffs.append(0.0)
            limits.append(0.0)
    log_n = math.log(horizon)
    return LowerBoundReport(tuple(coeffs), tuple(info), tuple(limits), int(horizon), sum(coeffs) * log_n)


def lai_robbins_bound(means: Sequence[float], family: ExponentialFamily, horizon: int) -> LowerBoundReport:
    """``sum_k (mu* - mu_k) / D(f_k | f*) * log N`` over inferior arms."""
    means = [float(m) for m in means]
    best = max(means)
    th_best = family.theta(best)
    gaps = [best - m for m in means]
    info = [kl_divergence(family, family.theta(m), th_best) if g > 0 else 0.0 for m, g in zip(means, gaps)]
    return _report(gaps, info, horizon)


def burnetas_katehakis_bound(means: Sequence[float], stddevs: Sequence[float], horizon: int) -> LowerBoundReport:
    """Normal arms with unknown, unequal variances: information ``M(gap / sigma_k)``."""
    if any(s <= 0 for s in stddevs):
        raise ValueError("standard deviations must be positive")
    best = max(means)
    gaps = [best - m for m in means]
    info = [m_of_g(g / s) if g > 0 else 0.0 for g, s in zip(gaps, stddevs)]
    return _report(gaps, info, horizon)


# --- sums of Laplace variables ---------------------------------------------------


def de_coefficients(t: int) -> list[Fraction]:
    """Exact ``c_{tj} = (2t-2-j)! 2^j / (j! (t-1-j)!)`` for ``j = 0..t-1``."""
    if t < 1:
        raise ValueError("t must be at least 1")
    f = math.factorial
    return [Fraction(f(2 * t - 2 - j) * 2**j, f(j) * f(t - 1 - j)) for j in range(t)]


def _poly(t: int) -> np.ndarray:
    norm = Fraction(1, math.factorial(t - 1) * 2 ** (2 * t - 1))
    return np.array([float(c * norm) for c in de_coefficients(t)])


def de_density(t: int, x):
    """Density of the sum of ``t`` i.i.d. standard Laplace variables.

    ``f_t(x) = exp(-|x|) g_t(|x|)`` with ``g_t`` a degree ``t-1`` polynomial.
    """
    a = _poly(t)
    ax = np.abs(np.asarray(x, dtype=float))
    out = np.exp(-ax) * np.polynomial.polynomial.polyval(ax, a)
    return float(out) if out.ndim == 0 else out


def de_tail(t: int, z: float) -> float:
    """``P(S_t > z)`` by adaptive quadrature of :func:`de_density`."""
    if z < 0:
        return 1.0 - de_tail(t, -z)
    val, _ = integrate.quad(lambda x: de_density(t, x), z, np.inf, epsabs=1e-13, epsrel=1e-11, limit=200)
    return val


@dataclass
class VerificationReport:
    """Outcome of a verifier: overall verdict plus one row per checked point."""

    name: str
    passed: bool
    rows: list[dict] = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def columns(self) -> list[str]:
        cols: list[str] = []
        for row in self.rows:
            cols.extend(c for c in row if c not in cols)
        return cols

    def __str__(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        extra = ", ".join(f"{k}={_fmt(v)}" for k, v in self.summary.items())
        return f"{self.name}: {verdict} ({len(self.rows)} checks{', ' + extra if extra else ''})"


def _fmt(v):
    return f"{v:.6g}" if isinstance(v, float) else str(v)


def verify_ctj_inequality(t_max: int) -> VerificationReport:
    """Check ``(j+1) c_{t,j+1} + j/(2t) c_{tj} <= c_{tj}`` exactly, ``c_{tt} = 0``."""
    if t_max < 1:
        raise ValueError("t_max must be at least 1")
    rows, first_fail = [], None
    for t in range(1, t_max + 1):
        c = de_coefficients(t) + [Fraction(0)]
        for j in range(t):
            lhs = (j + 1) * c[j + 1] + Fraction(j, 2 * t) * c[j]
            ok = lhs <= c[j]
            rows.append({"t": t, "j": j, "lhs": lhs, "rhs": c[j], "slack": c[j] - lhs, "ok": ok})
            if not ok and first_fail is None:
                first_fail = (t, j)
    summary = {"t_max": t_max, "equalities": sum(r["slack"] == 0 for r in rows)}
    if first_fail:
        summary["first_counterexample"] = first_fail
    return VerificationReport("ctj", first_fail is None, rows, summary)


def _g_and_derivative(t, x):
    a = _poly(t)
    P = np.polynomial.polynomial
    return P.polyval(x, a), P.polyval(x, P.polyder(a))


def verify_b2_bound(t: int, delta: float, z_grid: Sequence[float], slack: float = 1e-6) -> VerificationReport:
    """Check ``P(S_t > z + delta t) <= exp(-t b1) P(S_t > z)``, ``b1 = delta - 2 log(1 + delta/2)``.

    Also spot-checks the polynomial inequality ``g_t'(x)(1 + x/(2t)) <= g_t(x)``
    at the grid points and their shifted counterparts.
    """
    if not 1 <= t <= 10:
        raise ValueError("quadrature check supports 1 <= t <= 10")
    if not delta > 0:
        raise ValueError("delta must be positive")
    b1 = delta - 2.0 * math.log1p(delta / 2.0)
    rows, ok_all = [], True
    for z in z_grid:
        if z < 0:
            raise ValueError("z must be nonnegative")
        lhs = de_tail(t, z + delta * t)
        rhs = math.exp(-t * b1) * de_tail(t, z)
        g, dg = _g_and_derivative(t, np.array([z, z + delta * t]))
        poly_ok = bool(np.all(dg * (1 + np.array([z, z + delta * t]) / (2 * t)) <= g * (1 + 1e-12)))
        ok = lhs <= rhs + slack and poly_ok
        ok_all &= ok
        rows.append({"t": t, "delta": delta, "z": z, "lhs": lhs, "rhs": rhs, "b1": b1,
                     "poly_ok": poly_ok, "ok": ok})
    return VerificationReport("b2", ok_all, rows, {"t": t, "delta": delta, "b1": b1})


def min_window_mean(y: np.ndarray, width: int) -> float:
    c = np.concatenate(([0.0], np.cumsum(y)))
    return float(np.min(c[width:] - c[:-width]) / width)


def verify_min1_asymptotic(n: int, n2: int | None = None, replications: int = 200,
                           rng: np.random.Generator | None = None,
                           band: tuple[float, float] = (0.8, 1.05)) -> VerificationReport:
    """Monte Carlo check that the smallest running mean of ``n2`` standard
    normals among ``n - n2`` sits about ``sqrt(2 log n / n2)`` below zero.

    Reports the ratio of the observed drop to ``sqrt(2 log n / n2)``; passes
    when its median lies in ``band``.
    """
    rng = rng if rng is not None else np.random.default_rng()
    if n2 is None:
        n2 = math.ceil(2 * math.log(n))
    n1 = n - n2
    if not 1 <= n2 <= n1:
        raise ValueError("need 1 <= n2 <= n - n2")
    scale = math.sqrt(2 * math.log(n) / n2)
    ratios = np.empty(replications)
    for r in range(replications):
        ratios[r] = -min_window_mean(rng.standard_normal(n1), n2) / scale
    med = float(np.median(ratios))
    lower = math.sqrt(max(math.log(n / math.log(n) ** 2), 0.0) / math.log(n))
    q = np.quantile(ratios, [0.1, 0.25, 0.75, 0.9])
    rows = [{"n": n, "n2": n2, "replication": r, "ratio": float(x)} for r, x in enumerate(ratios)]
    summary = {"n": n, "n2": n2, "median": med, "q10": float(q[0]), "q90": float(q[3]),
               "sandwich_lower": lower, "band_lo": band[0], "band_hi": band[1]}
    return VerificationReport("min1", band[0] <= med <= band[1], rows, summary)


def chernoff_variance_bound(t: int, x: float) -> float:
    """``exp((t-1)/2 (log x - x + 1))``: tail bound for the sample variance ratio."""
    return math.exp(0.5 * (t - 1) * (math.log(x) - x + 1.0))


def verify_chisq_chernoff(t: int, x_grid: Sequence[float] = (0.25, 0.5, 0.75, 1.25, 1.5, 2.0, 3.0),
                          replications: int = 20000, rng: np.random.Generator | None = None) -> VerificationReport:
    """Empirical tails of ``sigma_hat^2 / sigma^2`` from ``t`` normals versus the
    Chernoff bound; upper tail for ``x > 1``, lower tail for ``x < 1``.

    Passes when every empirical frequency is within three binomial standard
    errors of being below the bound. The exact chi-square tail is reported
    alongside.
    """
    if t < 2:
        raise ValueError("t must be at least 2")
    rng = rng if rng is not None else np.random.default_rng()
    ratio = rng.standard_normal((replications, t)).var(axis=1, ddof=1)
    rows, ok_all = [], True
    for x in x_grid:
        if x <= 0 or x == 1:
            raise ValueError("grid points must be positive and different from 1")
        bound = chernoff_variance_bound(t, x)
        if x > 1:
            emp = float(np.mean(ratio >= x))
            exact = float(stats.chi2.sf(x * (t - 1), t - 1))
            side = "upper"
        else:
            emp = float(np.mean(ratio <= x))
            exact = float(stats.chi2.cdf(x * (t - 1), t - 1))
            side = "lower"
        b = min(bound, 1.0)
        se = math.sqrt(b * (1 - b) / replications)
        ok = emp <= bound + 3 * se
        ok_all &= ok
        rows.append({"t": t, "x": x, "side": side, "empirical": emp, "exact": exact, "bound": bound, "ok": ok})
    return VerificationReport("chernoff", ok_all, rows, {"t": t, "replications": replications})
