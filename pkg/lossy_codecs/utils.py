import binascii
import logging

import numpy as np

from rd_core.exceptions import IndexOutOfRange, StreamLengthMismatch, ParamMismatch, SeedMismatch
from rd_core.models import DistortionSpec
from matcher.models import CandidateSet
from matcher.utils import nearest_window
from source_sim.models import SymbolBlock

from .bitstream import Bitstream
from .models import EncodeReport

logger = logging.getLogger(__name__)

CHECKSUM_SYMBOLS = 64


def database_checksum(database: SymbolBlock) -> int:
    """CRC-16/CCITT over the first 64 database symbols, each as a little-endian u32."""
    head = np.asarray(database.symbols[:CHECKSUM_SYMBOLS], dtype='<u4')
    return binascii.crc_hqx(head.tobytes(), 0)


def verify_checksum(database: SymbolBlock, expected: int | None):
    if expected is None:
        return
    actual = database_checksum(database)
    if actual != expected:
        raise SeedMismatch(f"database checksum {actual:#06x} does not match the stream's "
                           f"{expected:#06x}; wrong seed or parameters")


def average_distortion(x: SymbolBlock, y: SymbolBlock, dist: DistortionSpec) -> float:
    """rho_n(x, y)"""
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    table = dist.table()
    return float(table[x.symbols.astype(np.int64), y.symbols.astype(np.int64)].sum()) / len(x)


def check_message(x: SymbolBlock, n: int, dist: DistortionSpec):
    if len(x) != n:
        raise ParamMismatch(f"message has {len(x)} symbols, params say n={n}")
    if x.alphabet_size != dist.source_alphabet_size:
        raise ParamMismatch(f"message alphabet has {x.alphabet_size} letters, "
                            f"distortion rows say {dist.source_alphabet_size}")


def pack_literal(values, base: int) -> int:
    """Base-|Â| positional value, first symbol most significant."""
    out = 0
    for v in values:
        out = out * base + int(v)
    return out


def unpack_literal(value: int, length: int, base: int) -> list[int]:
    if value >= base ** length:
        raise IndexOutOfRange(f"literal value {value} does not encode {length} base-{base} digits")
    digits = [0] * length
    for i in range(length - 1, -1, -1):
        value, digits[i] = divmod(value, base)
    return digits


def encode_blocks(x: SymbolBlock, database: SymbolBlock, candidates: CandidateSet, ell: int,
                  index_bits: int, dist: DistortionSpec, workers: int | None = None):
    """
    Nearest-candidate coding of the k = ceil(n/ell) blocks of x, the last one possibly short
    and matched against candidate prefixes. Shared by GVW (strided codebook) and HYB (windows).
    """
    n = len(x)
    stream = Bitstream()
    pieces = []
    indices = []
    for start in range(0, n, ell):
        block = x[start:start + ell]
        found = nearest_window(block, database, dist, candidates, workers=workers)
        index = found.position - 1
        stream.write(index, index_bits)
        indices.append(index)
        offset = candidates.offset(found.position)
        pieces.append(database.symbols[offset:offset + len(block)])

    reconstruction = SymbolBlock(np.concatenate(pieces), database.alphabet_size)
    report = EncodeReport(
        n=n,
        total_bits=stream.bit_length,
        achieved_distortion=average_distortion(x, reconstruction, dist),
        reconstruction=reconstruction,
        indices=tuple(indices),
        database_checksum=database_checksum(database),
    )
    return stream, report


def decode_blocks(stream: Bitstream, database: SymbolBlock, candidates: CandidateSet, n: int,
                  ell: int, index_bits: int) -> SymbolBlock:
    blocks = -(-n // ell)
    if stream.bit_length != blocks * index_bits:
        raise StreamLengthMismatch(f"stream has {stream.bit_length} bits, expected "
                                   f"{blocks} blocks x {index_bits} bits")
    reader = stream.reader()
    pieces = []
    for start in range(0, n, ell):
        index = reader.read(index_bits)
        if index >= candidates.count:
            raise IndexOutOfRange(f"index {index} at block {start // ell} is not below "
                                  f"W={candidates.count}")
        offset = candidates.offset(index + 1)
        pieces.append(database.symbols[offset:offset + min(ell, n - start)])
    return SymbolBlock(np.concatenate(pieces), database.alphabet_size)
