"""
Parameter selection for the three codecs.

Two families live here: the fixed heuristics used for desk-scale experiments (block length
chosen so that the codebook or database holds about 2^22 candidates), and the block lengths and
schedules that come with the asymptotic guarantees. The latter are usually far too large to run;
they are computed so their growth can be inspected.
"""
import logging
import math

from django.conf import settings

from rd_core.exceptions import (DegenerateConstants, DistortionOutOfRange, GammaOutOfRange,
                                EpsilonOutOfRange, InvalidScheduleArgument)
from rd_core.models import SourceModel, DistortionSpec
from rd_core.utils import rate_distortion, rd_slope, d_max
from lossy_codecs.models import GvwParams, HybParams, LlzParams, LLZ, MICRO, to_micro
from lossy_codecs.pipeline import build_params

from .models import Theorem2Constants

logger = logging.getLogger(__name__)

HEURISTIC_LOG_SIZE = 22  # log2 of the number of candidates the heuristic aims for
BLOCK_GAMMA = 0.002
LLZ_GAMMA = 0.03
LLZ_ALPHA = 0.1
DEFAULT_N = 1050


def bits_log(x: float) -> float:
    """The logarithm in the block-length and schedule formulas. Base 2, like every rate here."""
    return math.log2(x)


def natural_exp(x: float) -> float:
    """The exponential in the epsilon bound, read as e^x."""
    return math.exp(x)


# ---- heuristics ----

def heuristic_ell(source: SourceModel, dist: DistortionSpec, D: float, codec: str) -> int:
    D = to_micro(D) / MICRO  # the value the params will carry
    r_d = rate_distortion(source, dist, D).rate
    if codec == LLZ:
        return math.ceil(HEURISTIC_LOG_SIZE / r_d)
    return math.ceil(HEURISTIC_LOG_SIZE / (r_d + BLOCK_GAMMA))


def heuristic_params(source: SourceModel, dist: DistortionSpec, D: float, codec: str,
                     n: int = DEFAULT_N, seed: int = 0, max_ell_rate: float | None = None):
    """
    Fully derived params with the experimental defaults:
    GVW/HYB use gamma 0.002 and ell = ceil(22 / (R(D) + gamma)); LLZ uses gamma 0.03,
    alpha 0.1 and ell = ceil(22 / R(D)).
    """
    ell = heuristic_ell(source, dist, D, codec)
    if codec == LLZ:
        return build_params(codec, source, dist, n, ell, LLZ_GAMMA, D, seed, alpha=LLZ_ALPHA,
                            max_ell_rate=max_ell_rate)
    return build_params(codec, source, dist, n, ell, BLOCK_GAMMA, D, seed, max_ell_rate=max_ell_rate)


# ---- guaranteed block length ----

def theorem2_constants(source: SourceModel, dist: DistortionSpec, D: float) -> Theorem2Constants:
    dm = d_max(source, dist).value
    if not 0 < D < dm:
        raise DistortionOutOfRange(D, dm)
    d1 = D / 2
    r_d = rate_distortion(source, dist, D).rate
    r_d1 = rate_distortion(source, dist, d1).rate
    if r_d1 <= r_d:
        raise DegenerateConstants(f"R(D/2)={r_d1} is not above R(D)={r_d}")

    k_const = (D - d1) / (r_d1 - r_d)
    slope = rd_slope(source, dist, d1)
    c_const = min(k_const ** 2 / (8 * dm ** 2), 1 / (32 * (slope * dm) ** 2), 0.25)
    eps_hat = min(natural_exp(16 * c_const) / (3 * (dm - D)), 3 * natural_exp(-1) * (dm - D))
    gamma_hat = min(1.0, 2 * (r_d1 - r_d))

    constants = Theorem2Constants(d=D, d_max=dm, d1=d1, k_const=k_const, c_const=c_const,
                                  gamma_hat=gamma_hat, eps_hat=eps_hat)
    logger.debug(f"Block-length constants at D={D}: {constants}")
    return constants


def theorem2_block_length(source: SourceModel, dist: DistortionSpec, D: float, gamma: float,
                          eps: float, constants: Theorem2Constants | None = None, max_ell_rate: float | None = None) -> int:
    """
    ell = ceil( log(3 (Dmax - D) / eps) / (C(D) gamma^2) ), the HYB block length at which one
    block has expected distortion below D + eps at rate R(D) + gamma.
    """
    c = constants or theorem2_constants(source, dist, D)
    if not 0 < gamma < c.gamma_hat:
        raise GammaOutOfRange(f"gamma={gamma} must lie in (0, {c.gamma_hat})")
    if not 0 < eps < c.eps_hat:
        raise EpsilonOutOfRange(f"eps={eps} must lie in (0, {c.eps_hat})")

    ell = math.ceil(block_length_value(c, gamma, eps))
    guard = max_ell_rate if max_ell_rate is not None else settings.RDC_MAX_ELL_RATE
    ell_rate = ell * (rate_distortion(source, dist, D).rate + gamma)
    if ell_rate > guard:
        logger.warning(f"Guaranteed block length ell={ell} gives ell*R={ell_rate:.1f}, "
                       f"beyond the memory guard of {guard}; it cannot be run")
    return ell


def block_length_value(constants: Theorem2Constants, gamma: float, eps: float) -> float:
    """The block-length formula before the ceiling."""
    c = constants
    return bits_log(3 * (c.d_max - c.d) / eps) / (c.c_const * gamma ** 2)


def block_excess_bound(constants: Theorem2Constants, ell: int, gamma: float) -> float:
    """Upper bound on the probability that one HYB block exceeds distortion D."""
    return 2 * 2 ** (-ell * constants.c_const * gamma ** 2) + ell * 2 ** (-ell * gamma / 4)


# ---- growing schedule ----

def theorem3_schedule(source: SourceModel, dist: DistortionSpec, D: float, n: int, g_of_n: float,
                      c: float) -> tuple[int, float]:
    """
    Block length and slack for a search budget of g(n) candidates per block:
    ell = ceil(log g(n) / (R(D) + c)), gamma = sqrt(log ell / ell).
    """
    if g_of_n <= 1:
        raise InvalidScheduleArgument(f"g(n) must be > 1, got {g_of_n}")
    if c <= 0:
        raise InvalidScheduleArgument(f"c must be > 0, got {c}")
    if n < 1:
        raise InvalidScheduleArgument(f"n must be >= 1, got {n}")
    r_d = rate_distortion(source, dist, D).rate
    ell = math.ceil(bits_log(g_of_n) / (r_d + c))
    gamma = math.sqrt(bits_log(ell) / ell)
    logger.info(f"Schedule at n={n}, g(n)={g_of_n}: ell={ell}, gamma={gamma:.6f}")
    return ell, gamma


# ---- LLZ helpers ----

def llz_gamma_for_slack(source: SourceModel, dist: DistortionSpec, D: float, delta: float) -> float:
    """gamma that makes the LLZ working distortion D(R(D) - gamma/2) equal D + delta."""
    dm = d_max(source, dist).value
    if delta <= 0 or not 0 < D + delta < dm:
        raise DistortionOutOfRange(D + delta, dm)
    return 2 * (rate_distortion(source, dist, D).rate - rate_distortion(source, dist, D + delta).rate)


def working_rate(params) -> float:
    """R(D_bar). D_bar is defined by R(D_bar) = R(D) +/- gamma/2 and R = R(D) + gamma."""
    if params.codec == LLZ:
        return params.rate - 1.5 * params.gamma
    return params.rate - 0.5 * params.gamma


def predicted_match_length(params: LlzParams | HybParams) -> float:
    """Typical longest-match length log2(m) / R(D_bar); close to ell by construction."""
    return math.log2(params.database_size) / working_rate(params)


def memory_estimate(params: GvwParams | HybParams | LlzParams) -> dict:
    symbols = params.memory_symbols
    return {
        'memory_symbols': symbols,
        'memory_bytes': math.ceil(symbols * params.symbol_bits / 8),
    }

