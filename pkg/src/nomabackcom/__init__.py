"""Link-level BER analysis of NOMA backscatter clusters under Nakagami-m fading."""

from .analytic import (BsnLink, ClusterConfig, ber_u1_avg, ber_u1_conditional,
                       ber_u2_avg, ber_u2_conditional, effective_omegas)
from .distributions import NakagamiParams, NormalParams, approx_diff, approx_sum, ks_test
from .simulator import effective_bits, simulate_cluster, simulate_tdma
from .specfun import gauss_2f1, lambda_normal, phi_closed, phi_numeric, q_func

__version__ = "0.1.0"

__all__ = [
    "BsnLink", "ClusterConfig", "NakagamiParams", "NormalParams",
    "approx_diff", "approx_sum", "ber_u1_avg", "ber_u1_conditional", "ber_u2_avg",
    "ber_u2_conditional", "effective_bits", "effective_omegas", "gauss_2f1",
    "ks_test", "lambda_normal", "phi_closed", "phi_numeric", "q_func",
    "simulate_cluster", "simulate_tdma",
]
