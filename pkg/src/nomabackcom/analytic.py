"""Closed-form BER of a two-node NOMA backscatter cluster under Nakagami-m fading.

Amplitudes are normalized by the in-phase noise deviation sqrt(N0/2), so a
realized amplitude pair (y1, y2) enters the conditional error probabilities
directly as Q-function arguments.
"""

import logging
import math
from dataclasses import dataclass, replace

from .distributions import NakagamiParams, approx_diff, approx_sum
from .specfun import Probability, lambda_normal, phi_closed, q_func

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class BsnLink:
    """One backscatter node: power reflection coefficient, transmit SNR
    (dB, excluding the reflection loss) and backscatter-channel fading."""

    reflection: float
    snr_db: float
    fading: NakagamiParams

    def __post_init__(self):
        if not 0 < self.reflection <= 1:
            raise ValueError(f"reflection coefficient {self.reflection} must lie in (0, 1]")
        if math.isnan(self.snr_db) or self.snr_db == -math.inf:
            raise ValueError(f"snr_db = {self.snr_db} is not usable")

    @property
    def snr_linear(self):
        return 10.0 ** (self.snr_db / 10.0)


@dataclass(frozen=True)
class ClusterConfig:
    """bsn1 is always decoded first (strong user), bsn2 after SIC."""

    bsn1: BsnLink
    bsn2: BsnLink

    def swapped(self):
        return ClusterConfig(self.bsn2, self.bsn1)

    def with_values(self, *, gamma1=None, gamma2=None, m1=None, m2=None,
                    snr_db=None, snr1_db=None, snr2_db=None):
        """Copy with selected fields overridden; snr_db sets both users."""
        b1, b2 = self.bsn1, self.bsn2
        if snr_db is not None:
            snr1_db = snr2_db = snr_db
        if gamma1 is not None:
            b1 = replace(b1, reflection=gamma1)
        if gamma2 is not None:
            b2 = replace(b2, reflection=gamma2)
        if m1 is not None:
            b1 = replace(b1, fading=replace(b1.fading, m=m1))
        if m2 is not None:
            b2 = replace(b2, fading=replace(b2.fading, m=m2))
        if snr1_db is not None:
            b1 = replace(b1, snr_db=snr1_db)
        if snr2_db is not None:
            b2 = replace(b2, snr_db=snr2_db)
        return ClusterConfig(b1, b2)


@dataclass(frozen=True)
class EffectiveOmegas:
    omega1: float
    omega2: float


def _effective_omega(link):
    return 2.0 * link.snr_linear * link.reflection * link.fading.omega


def effective_omegas(c: ClusterConfig) -> EffectiveOmegas:
    """Mean-square normalized amplitudes 2 * SNR_i * Gamma_i * Omega_h,i (N0 = 1)."""
    return EffectiveOmegas(_effective_omega(c.bsn1), _effective_omega(c.bsn2))


def received_laws(c: ClusterConfig):
    """Nakagami laws of the two normalized received amplitudes."""
    om = effective_omegas(c)
    return (NakagamiParams(c.bsn1.fading.m, om.omega1),
            NakagamiParams(c.bsn2.fading.m, om.omega2))


def ber_u1_conditional(y1: float, y2: float) -> Probability:
    return 0.5 * (q_func(y1 + y2) + q_func(y1 - y2))


def ber_u2_conditional(y1: float, y2: float) -> Probability:
    """Weak-user error probability with SIC error propagation.

    The first two terms cover a correct strong-user decision, the bracket an
    incorrect one.
    """
    return (q_func(y2) - 0.5 * q_func(y1 + y2)
            + 0.5 * (q_func(2 * y1 + y2) + q_func(y1 - y2) - q_func(2 * y1 - y2)))


def _sum_diff_terms(p1, p2):
    s = approx_sum(p1, p2)
    d = approx_diff(p1, p2)
    return phi_closed(s.m, s.omega), lambda_normal(d.mu, d.sigma2)


def ber_u1_avg(c: ClusterConfig) -> Probability:
    p1, p2 = received_laws(c)
    phi_y, lam_z = _sum_diff_terms(p1, p2)
    return 0.5 * (phi_y + lam_z)


def ber_u2_avg_raw(c: ClusterConfig) -> float:
    """Average weak-user BER before clamping to [0, 1]."""
    p1, p2 = received_laws(c)
    phi_y, lam_z = _sum_diff_terms(p1, p2)
    phi_c, lam_d = _sum_diff_terms(p1.scaled(4.0), p2)
    return phi_closed(p2.m, p2.omega) + 0.5 * (-phi_y + phi_c + lam_z - lam_d)


def ber_u2_avg(c: ClusterConfig) -> Probability:
    raw = ber_u2_avg_raw(c)
    clamped = min(max(raw, 0.0), 1.0)
    if clamped != raw:
        log.debug("ber_u2_avg clamped %.3g to %.3g", raw, clamped)
    return clamped


def ber_single_user(link: BsnLink) -> Probability:
    """Interference-free BPSK BER of one node over its own link (OMA slot)."""
    return phi_closed(link.fading.m, _effective_omega(link))
