"""
Seed-reproducible sampling.

The generator is SplitMix64 in its counter form: draw i (0-based) of a stream seeded with s is

    z = s + (i + 1) * 0x9E3779B97F4A7C15   (mod 2^64)
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    z =  z ^ (z >> 31)

and the uniform variate is (z >> 11) * 2^-53. A symbol is the number of cumulative pmf
thresholds that are <= u, so the mapping is monotone in u. Both the generator and the threshold
construction are frozen: changing either changes every database and breaks old containers.
"""
import logging
from fractions import Fraction

import numpy as np
from django.conf import settings

from rd_core.exceptions import MemoryCap
from rd_core.models import check_pmf

from .models import SymbolBlock, check_seed, symbol_dtype

logger = logging.getLogger(__name__)

GOLDEN_GAMMA = np.uint64(0x9E3779B97F4A7C15)
MIX_1 = np.uint64(0xBF58476D1CE4E5B9)
MIX_2 = np.uint64(0x94D049BB133111EB)
STREAM_SALT = 0xD1B54A32D192ED03
UNIT_53 = 2.0 ** -53
CHUNK = 1 << 22

# stream ids for derive_seed
MESSAGE_STREAM = 1
PROBE_STREAM = 2


def _mix(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(30))
    z = z * MIX_1
    z = z ^ (z >> np.uint64(27))
    z = z * MIX_2
    return z ^ (z >> np.uint64(31))


def splitmix64(seed: int, start: int, count: int) -> np.ndarray:
    """Raw 64-bit draws start .. start+count-1 of the stream seeded with `seed`."""
    seed = check_seed(seed)
    with np.errstate(over='ignore'):
        counter = np.arange(start + 1, start + count + 1, dtype=np.uint64)
        return _mix(np.uint64(seed) + counter * GOLDEN_GAMMA)


def uniforms(seed: int, start: int, count: int) -> np.ndarray:
    """Draws mapped to [0, 1) with 53 bits of precision."""
    return (splitmix64(seed, start, count) >> np.uint64(11)).astype(np.float64) * UNIT_53


def derive_seed(seed: int, stream: int) -> int:
    """An independent seed for a named sub-stream (the message, the match probes, ...)."""
    base = check_seed(seed) ^ ((stream * STREAM_SALT) % 2 ** 64)
    return int(splitmix64(base, 0, 1)[0])


def cumulative_thresholds(pmf) -> np.ndarray:
    """Prefix sums of the pmf, summed exactly and rounded once; the last one is pinned to 1."""
    values = check_pmf(pmf)
    running = Fraction(0)
    cum = []
    for p in values:
        running += Fraction(p)
        cum.append(float(running))
    cum[-1] = 1.0
    return np.asarray(cum, dtype=np.float64)


def inverse_cdf(u: np.ndarray, thresholds: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(thresholds, u, side='right')
    # zero-probability tail letters share the pinned 1.0 threshold and are never reached
    return np.minimum(idx, thresholds.size - 1)


def sample_block(pmf, n: int, seed: int) -> SymbolBlock:
    """
    n i.i.d. draws from pmf, one 64-bit generator output per symbol.

    :param pmf: probabilities indexed by symbol
    :param n: block length, >= 1
    :param seed: 64-bit seed
    :return: SymbolBlock over len(pmf) letters
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    thresholds = cumulative_thresholds(pmf)
    out = np.empty(n, dtype=symbol_dtype(thresholds.size))
    for start in range(0, n, CHUNK):
        count = min(CHUNK, n - start)
        out[start:start + count] = inverse_cdf(uniforms(seed, start, count), thresholds)
    return SymbolBlock(out, thresholds.size)


def generate_database(q_star, m: int, seed: int, memory_cap: int | None = None) -> SymbolBlock:
    """The shared random database (or the flattened GVW codebook) of m symbols from Q*."""
    cap = memory_cap if memory_cap is not None else settings.RDC_MEMORY_CAP_SYMBOLS
    if m > cap:
        raise MemoryCap(f"database of {m} symbols exceeds the cap of {cap} symbols")
    logger.info(f"Generating database of {m} symbols (seed={seed})")
    return sample_block(q_star, m, seed)
