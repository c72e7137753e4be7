"""
Codec parameters and encoder reports.

Real-valued knobs (gamma, alpha, the target distortion) are carried as integer micro-units so
that the encoder and a decoder rebuilding the parameters from a container header start from
identical numbers. Everything else is derived once, in build(), and frozen.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction

from django.conf import settings

from rd_core.exceptions import ParamInvariantViolation
from rd_core.models import SourceModel, DistortionSpec
from rd_core.utils import rate_distortion, distortion_rate
from source_sim.models import SymbolBlock, check_seed

logger = logging.getLogger(__name__)

MICRO = 10 ** 6
D_BAR_TOL = 1e-9

GVW, LLZ, HYB = 'gvw', 'llz', 'hyb'
CODEC_IDS = {GVW: 1, LLZ: 2, HYB: 3}
CODEC_NAMES = {v: k for k, v in CODEC_IDS.items()}


def to_micro(value: float) -> int:
    return int(round(value * MICRO))


def ceil_log2(x: int) -> int:
    """Smallest f with 2**f >= x, for integers x >= 1."""
    return (x - 1).bit_length()


def literal_bits(length: int, repro_alphabet_size: int) -> int:
    """ceil(length * log2 |Â|), computed exactly as the bit size of the largest base-|Â| value."""
    return ceil_log2(repro_alphabet_size ** length)


def _check_common(n: int, ell: int, gamma_micro: int, d_micro: int):
    if n < 1:
        raise ParamInvariantViolation(f"n must be >= 1, got {n}")
    if ell < 1:
        raise ParamInvariantViolation(f"block length must be >= 1, got {ell}")
    if gamma_micro <= 0:
        raise ParamInvariantViolation(f"gamma must be > 0, got {gamma_micro / MICRO}")
    if d_micro <= 0:
        raise ParamInvariantViolation(f"D must be > 0, got {d_micro / MICRO}")


def _codebook_size(ell: int, rate: float, max_ell_rate: float | None) -> int:
    guard = max_ell_rate if max_ell_rate is not None else settings.RDC_MAX_ELL_RATE
    if ell * rate > guard:
        raise ParamInvariantViolation(
            f"ell*R = {ell * rate:.4f} exceeds the memory guard of {guard}")
    size = math.floor(2.0 ** (ell * rate))
    if size < 2:
        raise ParamInvariantViolation(f"2^(ell*R) = {2.0 ** (ell * rate):.4f} gives fewer than 2 words")
    return size


@dataclass(frozen=True)
class CodecParams:
    codec = None

    n: int
    ell: int
    gamma_micro: int
    d_micro: int
    seed: int
    rate: float  # R = R(D) + gamma, bits/symbol
    d_bar: float  # working distortion
    q_star: tuple[float, ...]  # reproduction pmf at d_bar
    repro_alphabet_size: int

    @property
    def gamma(self) -> float:
        return self.gamma_micro / MICRO

    @property
    def d_target(self) -> float:
        return self.d_micro / MICRO

    @property
    def codec_id(self) -> int:
        return CODEC_IDS[self.codec]

    @property
    def symbol_bits(self) -> int:
        return ceil_log2(self.repro_alphabet_size)


@dataclass(frozen=True)
class BlockCodecParams(CodecParams):
    """Shared by GVW and HYB: fixed-rate block coding with W candidates and B-bit indices."""
    codebook_size: int  # W
    index_bits: int  # B

    @property
    def blocks(self) -> int:
        return -(-self.n // self.ell)

    @property
    def total_bits(self) -> int:
        return self.blocks * self.index_bits

    @classmethod
    def _derive(cls, source: SourceModel, dist: DistortionSpec, n: int, ell: int, gamma: float,
                D: float, seed: int, max_ell_rate: float | None) -> dict:
        gamma_micro, d_micro = to_micro(gamma), to_micro(D)
        _check_common(n, ell, gamma_micro, d_micro)
        dist.check_source(source)
        D = d_micro / MICRO
        gamma = gamma_micro / MICRO

        r_d = rate_distortion(source, dist, D).rate
        rate = r_d + gamma
        d_bar = distortion_rate(source, dist, r_d + gamma / 2, tol=D_BAR_TOL)
        if d_bar > D:
            raise ParamInvariantViolation(f"working distortion {d_bar} exceeds D={D}")
        W = _codebook_size(ell, rate, max_ell_rate)
        return dict(
            n=n, ell=ell, gamma_micro=gamma_micro, d_micro=d_micro, seed=check_seed(seed),
            rate=rate, d_bar=d_bar,
            q_star=rate_distortion(source, dist, d_bar).q_star,
            repro_alphabet_size=dist.repro_alphabet_size,
            codebook_size=W, index_bits=ceil_log2(W),
        )


@dataclass(frozen=True)
class GvwParams(BlockCodecParams):
    codec = GVW

    @property
    def memory_symbols(self) -> int:
        return self.ell * self.codebook_size

    @classmethod
    def build(cls, source: SourceModel, dist: DistortionSpec, n: int, ell: int, gamma: float,
              D: float, seed: int, max_ell_rate: float | None = None) -> "GvwParams":
        params = cls(**cls._derive(source, dist, n, ell, gamma, D, seed, max_ell_rate))
        logger.info(f"GVW params: ell={ell}, R={params.rate:.6f}, D_bar={params.d_bar:.6f}, "
                    f"W={params.codebook_size}, B={params.index_bits}")
        return params


@dataclass(frozen=True)
class HybParams(BlockCodecParams):
    """
    stride 1 is the HYB window set over m = W + ell - 1 symbols. stride ell lays the same W
    candidates out back to back over ell*W symbols, which is exactly a GVW codebook.
    """
    codec = HYB
    stride: int = 1

    @property
    def database_size(self) -> int:
        return (self.codebook_size - 1) * self.stride + self.ell

    @property
    def memory_symbols(self) -> int:
        return self.database_size

    @classmethod
    def build(cls, source: SourceModel, dist: DistortionSpec, n: int, ell: int, gamma: float,
              D: float, seed: int, max_ell_rate: float | None = None, stride: int = 1) -> "HybParams":
        if stride not in (1, ell):
            raise ParamInvariantViolation(f"stride must be 1 or ell={ell}, got {stride}")
        params = cls(stride=stride, **cls._derive(source, dist, n, ell, gamma, D, seed, max_ell_rate))
        logger.info(f"HYB params: ell={ell}, R={params.rate:.6f}, D_bar={params.d_bar:.6f}, "
                    f"W={params.codebook_size}, m={params.database_size}, stride={stride}")
        return params


@dataclass(frozen=True)
class LlzParams(CodecParams):
    codec = LLZ

    alpha_micro: int
    database_size: int  # m
    cap: int  # floor((1 + alpha) ell)
    length_bits: int  # F
    pointer_bits: int  # Pbits

    @property
    def alpha(self) -> float:
        return self.alpha_micro / MICRO

    @property
    def memory_symbols(self) -> int:
        return self.database_size

    def literal_bits(self, length: int) -> int:
        return literal_bits(length, self.repro_alphabet_size)

    def uses_literal(self, length: int) -> bool:
        # ties go to the pointer
        return self.literal_bits(length) < self.pointer_bits

    def phrase_bits(self, length: int) -> int:
        return self.length_bits + min(self.pointer_bits, self.literal_bits(length))

    @classmethod
    def build(cls, source: SourceModel, dist: DistortionSpec, n: int, ell: int, gamma: float,
              D: float, alpha: float, seed: int, max_ell_rate: float | None = None) -> "LlzParams":
        gamma_micro, d_micro, alpha_micro = to_micro(gamma), to_micro(D), to_micro(alpha)
        _check_common(n, ell, gamma_micro, d_micro)
        if alpha_micro <= 0:
            raise ParamInvariantViolation(f"alpha must be > 0, got {alpha}")
        dist.check_source(source)
        D = d_micro / MICRO
        gamma = gamma_micro / MICRO

        r_d = rate_distortion(source, dist, D).rate
        rate = r_d + gamma
        d_bar = distortion_rate(source, dist, r_d - gamma / 2, tol=D_BAR_TOL)
        W = _codebook_size(ell, rate, max_ell_rate)
        m = W + ell - 1

        stretch = Fraction(MICRO + alpha_micro, MICRO) * ell
        pointer_bits = ceil_log2(m)
        if ceil_log2(dist.repro_alphabet_size) >= pointer_bits:
            raise ParamInvariantViolation(
                f"a one-symbol literal ({ceil_log2(dist.repro_alphabet_size)} bits) must be shorter "
                f"than a pointer ({pointer_bits} bits); increase ell or gamma")

        params = cls(
            n=n, ell=ell, gamma_micro=gamma_micro, d_micro=d_micro, seed=check_seed(seed),
            rate=rate, d_bar=d_bar,
            q_star=rate_distortion(source, dist, d_bar).q_star,
            repro_alphabet_size=dist.repro_alphabet_size,
            alpha_micro=alpha_micro, database_size=m,
            cap=math.floor(stretch), length_bits=ceil_log2(math.ceil(stretch)),
            pointer_bits=pointer_bits,
        )
        logger.info(f"LLZ params: ell={ell}, R={rate:.6f}, D_bar={d_bar:.6f}, m={m}, "
                    f"cap={params.cap}, F={params.length_bits}, Pbits={pointer_bits}")
        return params


@dataclass(frozen=True)
class PhraseRecord:
    length: int
    mode: str  # 'pointer' or 'literal'
    position: int  # 1-based database start, 0 for literals
    distortion: float


@dataclass(frozen=True)
class EncodeReport:
    n: int
    total_bits: int
    achieved_distortion: float
    reconstruction: SymbolBlock
    indices: tuple[int, ...] = ()  # GVW/HYB block indices, 0-based
    phrase_log: tuple[PhraseRecord, ...] = ()  # LLZ only
    database_checksum: int = 0

    @property
    def rate(self) -> float:
        return self.total_bits / self.n

    @property
    def phrase_count(self) -> int:
        return len(self.phrase_log)
