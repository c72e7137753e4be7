"""
Hybrid coding: GVW's fixed-rate block indices, but the candidates are the first W sliding
windows of one shared database of m = W + ell - 1 symbols instead of W separate words.
"""
import logging

from rd_core.models import SourceModel, DistortionSpec
from matcher.models import CandidateSet
from source_sim.models import SymbolBlock
from source_sim.utils import generate_database

from .bitstream import Bitstream
from .models import HybParams, EncodeReport
from .utils import encode_blocks, decode_blocks, check_message, verify_checksum

logger = logging.getLogger(__name__)


def build_database(p: HybParams, memory_cap: int | None = None) -> SymbolBlock:
    database = generate_database(p.q_star, p.database_size, p.seed, memory_cap=memory_cap)
    assert len(database) == p.memory_symbols
    return database


def candidates_for(p: HybParams) -> CandidateSet:
    return CandidateSet(p.codebook_size, p.stride)


def hyb_encode(x: SymbolBlock, p: HybParams, source: SourceModel, dist: DistortionSpec,
               workers: int | None = None, memory_cap: int | None = None) -> tuple[Bitstream, EncodeReport]:
    dist.check_source(source)
    check_message(x, p.n, dist)
    database = build_database(p, memory_cap)
    stream, report = encode_blocks(x, database, candidates_for(p), p.ell, p.index_bits, dist, workers)
    logger.info(f"HYB encoded n={p.n} in {report.total_bits} bits, "
                f"distortion={report.achieved_distortion:.5f}")
    return stream, report


def hyb_decode(stream: Bitstream, p: HybParams, dist: DistortionSpec, checksum: int | None = None,
               memory_cap: int | None = None) -> SymbolBlock:
    database = build_database(p, memory_cap)
    verify_checksum(database, checksum)
    return decode_blocks(stream, database, candidates_for(p), p.n, p.ell, p.index_bits)
