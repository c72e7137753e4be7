"""
Lossy Lempel-Ziv against a fixed random database.

The message is parsed greedily into phrases. Each phrase is the longest prefix of what is left
that some database window matches within average distortion D_bar (at most cap symbols), and is
described by its length (L - 1 in F bits) followed by either

    a pointer: the 1-based window start minus one, in Pbits bits, or
    a literal: the phrase mapped letter by letter to a zero-distortion reproduction and packed
               as one base-|Â| number in ceil(L log2 |Â|) bits,

whichever is strictly shorter, the pointer on ties. The decoder makes the same choice from L
alone. When nothing matches, a one-symbol literal is sent.
"""
import logging

import numpy as np

from rd_core.exceptions import DistortionBudgetExceeded, PointerOutOfRange, StreamLengthMismatch
from rd_core.models import SourceModel, DistortionSpec
from matcher.utils import longest_match
from source_sim.models import SymbolBlock
from source_sim.utils import generate_database

from .bitstream import Bitstream
from .models import LlzParams, EncodeReport, PhraseRecord
from .utils import (average_distortion, check_message, database_checksum, verify_checksum,
                    pack_literal, unpack_literal)

logger = logging.getLogger(__name__)

POINTER, LITERAL = 'pointer', 'literal'
DISTORTION_SLACK = 1e-12


def build_database(p: LlzParams, memory_cap: int | None = None) -> SymbolBlock:
    database = generate_database(p.q_star, p.database_size, p.seed, memory_cap=memory_cap)
    assert len(database) == p.memory_symbols
    return database


def description_length(p: LlzParams, phrase_log) -> int:
    """Total bits for a parsing: sum over phrases of F + min(Pbits, literal bits)."""
    return sum(p.phrase_bits(record.length) for record in phrase_log)


def llz_encode(x: SymbolBlock, p: LlzParams, source: SourceModel, dist: DistortionSpec,
               workers: int | None = None, memory_cap: int | None = None) -> tuple[Bitstream, EncodeReport]:
    dist.check_source(source)
    check_message(x, p.n, dist)
    database = build_database(p, memory_cap)
    phi = np.asarray(dist.zero_distortion_map(), dtype=np.int64)
    base = p.repro_alphabet_size

    stream = Bitstream()
    pieces = []
    phrases = []
    pos = 0
    while pos < p.n:
        found = longest_match(x[pos:pos + p.cap], database, dist, p.d_bar, p.cap, workers=workers)
        length = min(found.length or 1, p.n - pos)
        stream.write(length - 1, p.length_bits)

        if p.uses_literal(length):
            values = phi[x.symbols[pos:pos + length]]
            stream.write(pack_literal(values, base), p.literal_bits(length))
            pieces.append(values)
            phrases.append(PhraseRecord(length, LITERAL, 0, 0.0))
        else:
            stream.write(found.position - 1, p.pointer_bits)
            pieces.append(database.symbols[found.position - 1:found.position - 1 + length])
            phrases.append(PhraseRecord(length, POINTER, found.position, found.distortion))
        pos += length

    reconstruction = SymbolBlock(np.concatenate(pieces), base)
    achieved = average_distortion(x, reconstruction, dist)
    if achieved > p.d_bar + DISTORTION_SLACK:
        raise DistortionBudgetExceeded(f"achieved distortion {achieved} exceeds D_bar={p.d_bar}")

    report = EncodeReport(
        n=p.n,
        total_bits=stream.bit_length,
        achieved_distortion=achieved,
        reconstruction=reconstruction,
        phrase_log=tuple(phrases),
        database_checksum=database_checksum(database),
    )
    literals = sum(1 for r in phrases if r.mode == LITERAL)
    logger.info(f"LLZ encoded n={p.n} in {report.total_bits} bits, {len(phrases)} phrases "
                f"({literals} literal), distortion={achieved:.5f}")
    return stream, report


def llz_decode(stream: Bitstream, p: LlzParams, dist: DistortionSpec, n: int | None = None,
               checksum: int | None = None, memory_cap: int | None = None) -> SymbolBlock:
    n = p.n if n is None else n
    database = build_database(p, memory_cap)
    verify_checksum(database, checksum)
    m = len(database)
    base = p.repro_alphabet_size

    reader = stream.reader()
    pieces = []
    emitted = 0
    while emitted < n:
        length = reader.read(p.length_bits) + 1
        if length > p.cap or emitted + length > n:
            raise StreamLengthMismatch(f"phrase of length {length} at symbol {emitted} overruns "
                                       f"n={n} or cap={p.cap}")
        if p.uses_literal(length):
            values = unpack_literal(reader.read(p.literal_bits(length)), length, base)
            pieces.append(np.asarray(values, dtype=np.int64))
        else:
            start = reader.read(p.pointer_bits)
            if start + length > m:
                raise PointerOutOfRange(f"pointer {start + 1} with length {length} runs past m={m}")
            pieces.append(database.symbols[start:start + length])
        emitted += length

    if reader.remaining:
        raise StreamLengthMismatch(f"{reader.remaining} bits left over after {n} symbols")
    return SymbolBlock(np.concatenate(pieces).astype(np.int64), base)
