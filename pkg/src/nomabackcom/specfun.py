"""Special functions behind the closed-form BER expressions.

Everything here is a pure scalar function of real arguments.
"""

import logging
import math

from scipy import integrate, special

from .errors import InvalidShape, NonConvergent, PoleAtC

log = logging.getLogger(__name__)

Probability = float

_SERIES_TOL = 1e-17
_MAX_TERMS = 1_000_000
# |t1| + |t2| may exceed |t1 + t2| by at most this factor in the 1 - z transform
_MAX_CANCELLATION = 1e4
_QUAD_LIMIT = 2**14


def q_func(x: float) -> Probability:
    """Gaussian tail probability Q(x) = P(N(0, 1) > x)."""
    return float(0.5 * special.erfc(x / math.sqrt(2.0)))


def _is_nonpos_int(x):
    return x <= 0 and x == math.floor(x)


def _gamma_signed_log(x):
    """Return (sign, log|Gamma(x)|); sign is 0 at the poles of Gamma."""
    if _is_nonpos_int(x):
        return 0, -math.inf
    if x > 0:
        return 1, math.lgamma(x)
    sign = -1 if math.floor(-x) % 2 == 0 else 1
    return sign, math.lgamma(x)


def _gamma_ratio(num, den):
    """prod Gamma(num) / prod Gamma(den), evaluated in log space."""
    sign, logval = 1, 0.0
    for x in num:
        s, lg = _gamma_signed_log(x)
        if s == 0:
            raise NonConvergent(f"Gamma pole at {x} in numerator")
        sign *= s
        logval += lg
    for x in den:
        s, lg = _gamma_signed_log(x)
        if s == 0:
            return 0.0
        sign *= s
        logval -= lg
    return sign * math.exp(logval)


def _series(a, b, c, z, max_terms=_MAX_TERMS):
    term = 1.0
    total = 1.0
    for n in range(max_terms):
        ratio = (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z
        term *= ratio
        total += term
        if term == 0.0:
            return total
        if abs(ratio) < 1.0 and abs(term) <= _SERIES_TOL * abs(total):
            return total
    raise NonConvergent(
        f"2F1({a}, {b}; {c}; {z}) series did not converge in {max_terms} terms"
    )


def _one_minus_z(a, b, c, z):
    """Linear transformation z -> 1 - z, valid when c - a - b is not an integer.

    Returns None when the two branches cancel too strongly to trust.
    """
    s = c - a - b
    w = 1.0 - z
    t1 = _gamma_ratio((c, s), (c - a, c - b))
    if t1:
        t1 *= _series(a, b, 1.0 - s, w)
    t2 = _gamma_ratio((c, -s), (a, b))
    if t2:
        t2 *= w**s * _series(c - a, c - b, s + 1.0, w)
    total = t1 + t2
    if abs(t1) + abs(t2) > _MAX_CANCELLATION * abs(total):
        return None
    return total


def gauss_2f1(a: float, b: float, c: float, z: float) -> float:
    """Gauss hypergeometric function 2F1(a, b; c; z) for real arguments, z <= 1."""
    if not all(math.isfinite(v) for v in (a, b, c, z)):
        raise ValueError("2F1 arguments must be finite")
    if _is_nonpos_int(c):
        raise PoleAtC(f"c = {c} is a non-positive integer")
    if z == 0.0:
        return 1.0
    if _is_nonpos_int(a) or _is_nonpos_int(b):
        # terminating polynomial, any z
        return _series(a, b, c, z)
    if z > 1.0:
        raise NonConvergent(f"2F1 is not real-analytic at z = {z} > 1")
    if z == 1.0:
        if c - a - b <= 0:
            raise NonConvergent(f"2F1 diverges at z = 1 with c - a - b = {c - a - b}")
        return _gamma_ratio((c, c - a - b), (c - a, c - b))
    if z < -0.5:
        # Pfaff: maps (-inf, -0.5) onto (1/3, 1)
        return (1.0 - z) ** (-a) * gauss_2f1(a, c - b, c, z / (z - 1.0))
    if abs(z) <= 0.75:
        return _series(a, b, c, z)
    s = c - a - b
    if s != math.floor(s):
        value = _one_minus_z(a, b, c, z)
        if value is not None:
            return value
        log.debug("2F1(%g, %g; %g; %g): 1 - z branch cancelled, summing directly",
                  a, b, c, z)
    return _series(a, b, c, z)


def _check_shape(m):
    if not m >= 0.5:
        raise InvalidShape(f"Nakagami shape m = {m} must be >= 0.5")


def phi_numeric(m: float, gamma_bar: float) -> Probability:
    """E[Q(R)] for a Nakagami(m, gamma_bar) amplitude R, by quadrature of
    Craig's form (1/pi) int_0^{pi/2} (1 + gamma_bar / (2 m sin^2 t))^(-m) dt.
    """
    _check_shape(m)
    if gamma_bar < 0:
        raise ValueError(f"gamma_bar = {gamma_bar} must be non-negative")
    if gamma_bar == 0:
        return 0.5
    c = gamma_bar / (2.0 * m)

    def integrand(t):
        s2 = math.sin(t) ** 2
        if s2 == 0.0:
            return 0.0
        return math.exp(-m * math.log1p(c / s2))

    value, _ = integrate.quad(integrand, 0.0, math.pi / 2, epsabs=1e-13,
                              epsrel=1e-13, limit=_QUAD_LIMIT)
    return value / math.pi


def phi_closed(m: float, gamma_bar: float) -> Probability:
    """Closed form of E[Q(R)], R ~ Nakagami(m, gamma_bar).

    Integer m uses the finite binomial sum; any other m uses the 2F1
    representation, falling back to quadrature if that comes out unusable.
    """
    _check_shape(m)
    if gamma_bar < 0:
        raise ValueError(f"gamma_bar = {gamma_bar} must be non-negative")
    if gamma_bar == 0:
        return 0.5
    half = gamma_bar / 2.0
    if float(m).is_integer():
        psi = math.sqrt(half / (m + half))
        x = (m / (m + half)) / 4.0  # (1 - psi^2) / 4
        total, term = 0.0, 1.0
        for k in range(int(m)):
            total += term
            term *= 2.0 * (2 * k + 1) / (k + 1) * x
        return 0.5 * (1.0 - psi * total)

    c = gamma_bar / (2.0 * m)
    log_pref = (0.5 * math.log(c) - (m + 0.5) * math.log1p(c)
                + math.lgamma(m + 0.5) - math.lgamma(m + 1.0)
                - math.log(2.0 * math.sqrt(math.pi)))
    try:
        value = math.exp(log_pref) * gauss_2f1(1.0, m + 0.5, m + 1.0, 1.0 / (1.0 + c))
    except NonConvergent:
        value = math.nan
    if not (math.isfinite(value) and 0.0 <= value <= 0.5 + 1e-12):
        log.warning("phi_closed(%g, %g): hypergeometric branch unusable, using quadrature",
                    m, gamma_bar)
        return phi_numeric(m, gamma_bar)
    return min(value, 0.5)


def lambda_normal(mu: float, sigma2: float) -> Probability:
    """E[Q(W)] for W ~ N(mu, sigma2): Q(mu / sqrt(sigma2 + 1))."""
    if sigma2 < 0:
        raise ValueError(f"sigma2 = {sigma2} must be non-negative")
    return q_func(mu / math.sqrt(sigma2 + 1.0))
