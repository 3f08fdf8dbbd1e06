"""Monte Carlo link-level simulation of the NOMA backscatter cluster and of
the OMA-TDMA baseline.

Real-baseband coherent BPSK: channel amplitudes are non-negative Nakagami
draws, the noise is the in-phase component N(0, N0/2) with N0 = 1, and bit 0
maps to symbol +1. Trials are split into fixed-size blocks and every block
draws from its own Philox stream keyed by (seed, scheme, block index), so the
error counts do not depend on how blocks are distributed over workers.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .analytic import BsnLink, ClusterConfig
from .distributions import sample_nakagami
from .errors import InsufficientTrials

MIN_TRIALS = 10_000
BLOCK_TRIALS = 1 << 17
WORKERS_ENV = "NOMABACKCOM_WORKERS"

_NOISE_SD = math.sqrt(0.5)
_STREAM_NOMA = 0
_STREAM_TDMA = 1


class Scheme(str, Enum):
    NOMA = "NOMA"
    TDMA = "TDMA"


@dataclass(frozen=True)
class BerEstimate:
    ber1: float
    ber2: float
    trials: int
    stderr1: float
    stderr2: float
    seed: int
    errors1: int = 0
    errors2: int = 0

    @classmethod
    def from_counts(cls, errors1, errors2, trials, seed):
        b1, b2 = errors1 / trials, errors2 / trials
        return cls(b1, b2, trials,
                   math.sqrt(b1 * (1 - b1) / trials), math.sqrt(b2 * (1 - b2) / trials),
                   seed, errors1, errors2)


@dataclass(frozen=True)
class EffectiveBits:
    scheme: Scheme
    per_slot: float
    normalized: float


def effective_bits(e: BerEstimate, scheme) -> EffectiveBits:
    """Expected correctly decoded bits per slot: NOMA carries two bits per
    slot, TDMA one (the users alternate)."""
    scheme = Scheme(scheme)
    good = (1.0 - e.ber1) + (1.0 - e.ber2)
    if scheme is Scheme.NOMA:
        return EffectiveBits(scheme, good, good / 2.0)
    return EffectiveBits(scheme, good / 2.0, good / 2.0)


def resolve_workers(workers=None):
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1"))
    if workers < 1:
        raise ValueError(f"worker count {workers} must be >= 1")
    return workers


def _check_seed(seed):
    if not (isinstance(seed, (int, np.integer)) and 0 <= seed < 2**64):
        raise ValueError(f"seed {seed!r} must be an integer in [0, 2**64)")
    return int(seed)


def _block_rng(seed, stream, block):
    ss = np.random.SeedSequence(seed, spawn_key=(stream, block))
    return np.random.Generator(np.random.Philox(ss))


def _noiseless(c: ClusterConfig):
    inf1, inf2 = math.isinf(c.bsn1.snr_db), math.isinf(c.bsn2.snr_db)
    if inf1 != inf2:
        raise ValueError("noise-free mode needs snr_db = +inf on both links")
    return inf1


def _amplitude_scale(link: BsnLink, noiseless):
    energy = 1.0 if noiseless else link.snr_linear
    return math.sqrt(energy * link.reflection)


def _symbols(rng, n):
    return 1 - 2 * rng.integers(0, 2, n, dtype=np.int8)


def _gains(rng, link, n, fixed):
    if fixed is None:
        return sample_nakagami(link.fading, rng, n)
    return np.full(n, float(fixed))


def _noise(rng, n, noiseless):
    if noiseless:
        return np.zeros(n)
    return rng.normal(0.0, _NOISE_SD, n)


def _decide(r):
    # ties (measure zero) go to bit 0
    return np.where(r >= 0, 1, -1).astype(np.int8)


def _noma_block(c, seed, fixed_gains, noiseless, block, n):
    rng = _block_rng(seed, _STREAM_NOMA, block)
    g1, g2 = fixed_gains if fixed_gains is not None else (None, None)
    s1 = _amplitude_scale(c.bsn1, noiseless) * _gains(rng, c.bsn1, n, g1)
    s2 = _amplitude_scale(c.bsn2, noiseless) * _gains(rng, c.bsn2, n, g2)
    x1 = _symbols(rng, n)
    x2 = _symbols(rng, n)
    y = s1 * x1 + s2 * x2 + _noise(rng, n, noiseless)
    x1_hat = _decide(y)
    x2_hat = _decide(y - s1 * x1_hat)
    return np.count_nonzero(x1_hat != x1), np.count_nonzero(x2_hat != x2)


def _tdma_block(c, seed, fixed_gains, noiseless, block, n):
    rng = _block_rng(seed, _STREAM_TDMA, block)
    errors = []
    for i, link in enumerate((c.bsn1, c.bsn2)):
        g = None if fixed_gains is None else fixed_gains[i]
        s = _amplitude_scale(link, noiseless) * _gains(rng, link, n, g)
        x = _symbols(rng, n)
        x_hat = _decide(s * x + _noise(rng, n, noiseless))
        errors.append(np.count_nonzero(x_hat != x))
    return tuple(errors)


def _run(block_fn, c, trials, seed, fixed_gains, workers):
    if trials < MIN_TRIALS:
        raise InsufficientTrials(f"{trials} trials requested, at least {MIN_TRIALS} required")
    seed = _check_seed(seed)
    noiseless = _noiseless(c)
    workers = resolve_workers(workers)
    n_blocks = -(-trials // BLOCK_TRIALS)
    sizes = [min(BLOCK_TRIALS, trials - b * BLOCK_TRIALS) for b in range(n_blocks)]

    def job(b):
        return block_fn(c, seed, fixed_gains, noiseless, b, sizes[b])

    if workers == 1 or n_blocks == 1:
        counts = [job(b) for b in range(n_blocks)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(job, range(n_blocks)))
    e1 = sum(int(k[0]) for k in counts)
    e2 = sum(int(k[1]) for k in counts)
    return BerEstimate.from_counts(e1, e2, trials, seed)


def simulate_cluster(c: ClusterConfig, trials: int, seed: int, *,
                     fixed_gains=None, workers=None) -> BerEstimate:
    """NOMA uplink: sign-rule ML detection of bsn1, then SIC with the
    detected (possibly wrong) symbol and sign detection of bsn2.

    fixed_gains=(h1, h2) replaces the fading draws by constant amplitudes;
    snr_db = +inf on both links switches the noise off.
    """
    return _run(_noma_block, c, trials, seed, fixed_gains, workers)


def simulate_tdma(c: ClusterConfig, trials: int, seed: int, *,
                  fixed_gains=None, workers=None) -> BerEstimate:
    """Orthogonal baseline: each node alone in its own slot, no IUI."""
    return _run(_tdma_block, c, trials, seed, fixed_gains, workers)
