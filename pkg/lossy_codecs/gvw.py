"""
Random-codebook block coding.

The codebook is W i.i.d. words of length ell drawn from Q* at the working distortion, stored
flat (word j occupies symbols j*ell .. j*ell+ell-1). Each block is replaced by its nearest word
and described by the word's index in B = ceil(log2 W) bits.
"""
import logging

from rd_core.models import SourceModel, DistortionSpec
from matcher.models import CandidateSet
from source_sim.models import SymbolBlock
from source_sim.utils import generate_database

from .bitstream import Bitstream
from .models import GvwParams, EncodeReport
from .utils import encode_blocks, decode_blocks, check_message, verify_checksum

logger = logging.getLogger(__name__)


def build_codebook(p: GvwParams, memory_cap: int | None = None) -> SymbolBlock:
    codebook = generate_database(p.q_star, p.memory_symbols, p.seed, memory_cap=memory_cap)
    assert len(codebook) == p.ell * p.codebook_size
    return codebook


def gvw_encode(x: SymbolBlock, p: GvwParams, source: SourceModel, dist: DistortionSpec,
               workers: int | None = None, memory_cap: int | None = None) -> tuple[Bitstream, EncodeReport]:
    dist.check_source(source)
    check_message(x, p.n, dist)
    codebook = build_codebook(p, memory_cap)
    stream, report = encode_blocks(x, codebook, CandidateSet.strided(p.ell, p.codebook_size),
                                   p.ell, p.index_bits, dist, workers)
    logger.info(f"GVW encoded n={p.n} in {report.total_bits} bits, "
                f"distortion={report.achieved_distortion:.5f}")
    return stream, report


def gvw_decode(stream: Bitstream, p: GvwParams, dist: DistortionSpec, checksum: int | None = None,
               memory_cap: int | None = None) -> SymbolBlock:
    codebook = build_codebook(p, memory_cap)
    verify_checksum(codebook, checksum)
    return decode_blocks(stream, codebook, CandidateSet.strided(p.ell, p.codebook_size),
                         p.n, p.ell, p.index_bits)
