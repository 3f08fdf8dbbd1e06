"""Nakagami-m kernel: moments, sampling, moment-matched sum/difference laws,
and the one-sample Kolmogorov-Smirnov test used to validate them."""

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DegenerateMatch, EmptySample, InvalidShape


@dataclass(frozen=True)
class NakagamiParams:
    m: float
    omega: float

    def __post_init__(self):
        if not self.m >= 0.5:
            raise InvalidShape(f"Nakagami m = {self.m} must be >= 0.5")
        if not (self.omega > 0 and math.isfinite(self.omega)):
            raise ValueError(f"Nakagami omega = {self.omega} must be positive and finite")

    def scaled(self, power_gain):
        """Law of sqrt(power_gain) * X for X ~ Nakagami(m, omega)."""
        return NakagamiParams(self.m, self.omega * power_gain)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return special.gammainc(self.m, self.m * np.maximum(x, 0.0) ** 2 / self.omega)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        m, om = self.m, self.omega
        with np.errstate(divide="ignore"):
            logpdf = (math.log(2.0) + m * math.log(m / om) - math.lgamma(m)
                      + (2 * m - 1) * np.log(x) - m * x**2 / om)
        return np.where(x > 0, np.exp(logpdf), 0.0)


@dataclass(frozen=True)
class NormalParams:
    mu: float
    sigma2: float

    def __post_init__(self):
        if not self.sigma2 >= 0:
            raise ValueError(f"normal variance {self.sigma2} must be non-negative")

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.sigma2 == 0:
            return (x >= self.mu).astype(float)
        return special.ndtr((x - self.mu) / math.sqrt(self.sigma2))


@dataclass(frozen=True)
class KsReport:
    statistic: float
    critical: float
    n_samples: int
    alpha: float
    reject: bool


def nakagami_moment(p: NakagamiParams, n: int) -> float:
    """E[X^n] = Gamma(m + n/2) / Gamma(m) * (omega / m)^(n/2)."""
    if n < 1 or int(n) != n:
        raise ValueError(f"moment order {n} must be a positive integer")
    return math.exp(math.lgamma(p.m + n / 2) - math.lgamma(p.m)
                    + (n / 2) * math.log(p.omega / p.m))


def sample_nakagami(p: NakagamiParams, rng: np.random.Generator, size=None):
    """Draw sqrt(G), G ~ Gamma(shape=m, scale=omega/m).

    numpy's gamma sampler is the Marsaglia-Tsang rejection method, exact for
    every shape in use here.
    """
    return np.sqrt(rng.gamma(p.m, p.omega / p.m, size))


def approx_sum(p1: NakagamiParams, p2: NakagamiParams) -> NakagamiParams:
    """Nakagami law matching the second and fourth moments of X1 + X2."""
    e1 = [0.0] + [nakagami_moment(p1, n) for n in range(1, 5)]
    e2 = [0.0] + [nakagami_moment(p2, n) for n in range(1, 5)]
    omega = p1.omega + p2.omega + 2.0 * e1[1] * e2[1]
    fourth = (e1[4] + 4.0 * e1[3] * e2[1] + 6.0 * p1.omega * p2.omega
              + 4.0 * e1[1] * e2[3] + e2[4])
    spread = fourth - omega**2
    if not spread > 0:
        raise DegenerateMatch(f"E[R^4] - E[R^2]^2 = {spread} is not positive")
    return NakagamiParams(omega**2 / spread, omega)


def approx_diff(p1: NakagamiParams, p2: NakagamiParams) -> NormalParams:
    """Normal law matching the first two moments of X1 - X2."""
    m1 = nakagami_moment(p1, 1)
    m2 = nakagami_moment(p2, 1)
    mu = m1 - m2
    second = p1.omega + p2.omega - 2.0 * m1 * m2
    sigma2 = second - mu**2
    if sigma2 < 0:
        if sigma2 < -1e-12 * max(1.0, second):
            raise DegenerateMatch(f"matched variance {sigma2} is negative")
        sigma2 = 0.0
    return NormalParams(mu, sigma2)


def ks_test(samples, hypothesized_cdf, alpha: float = 0.05) -> KsReport:
    """One-sample two-sided K-S test with the asymptotic critical value
    sqrt(ln(2/alpha) / (2N))."""
    if not 0 < alpha < 1:
        raise ValueError(f"alpha = {alpha} must lie in (0, 1)")
    y = np.sort(np.asarray(samples, dtype=float).ravel())
    n = y.size
    if n < 2:
        raise EmptySample(f"K-S test needs at least 2 samples, got {n}")
    f = np.asarray(hypothesized_cdf(y), dtype=float)
    i = np.arange(1, n + 1)
    stat = float(max(np.max(np.abs(i / n - f)), np.max(np.abs((i - 1) / n - f))))
    critical = math.sqrt(math.log(2.0 / alpha) / (2.0 * n))
    return KsReport(stat, critical, n, alpha, stat > critical)
