"""
The RDC1 container. All integers little-endian:

    magic      4s   b"RDC1"
    codec      u8   1 = GVW, 2 = LLZ, 3 = HYB
    version    u8   1
    n          u64
    ell        u32
    alpha      u32  micro-units, 0 unless LLZ
    gamma      u32  micro-units
    D          u32  micro-units
    seed       u64
    pmf        u16 length + UTF-8, comma separated
    matrix     u32 length + UTF-8, rows separated by ';'
    checksum   u16  CRC-16/CCITT of the first 64 database symbols
    bit_length u64
    payload    ceil(bit_length / 8) bytes, zero padded

The raw database is never stored; the decoder regenerates it from the header.
"""
import logging
import struct
from dataclasses import dataclass

from rd_core.exceptions import ContainerFormatError, SpecParseError, WorkbenchError
from rd_core.models import SourceModel, DistortionSpec
from rd_core.specs import format_pmf, format_matrix, parse_pmf, parse_matrix

from .bitstream import Bitstream
from .models import CODEC_IDS, CODEC_NAMES, LLZ

logger = logging.getLogger(__name__)

MAGIC = b"RDC1"
VERSION = 1
FIXED = struct.Struct('<4sBBQIIIIQ')
U16 = struct.Struct('<H')
U32 = struct.Struct('<I')
TAIL = struct.Struct('<HQ')


@dataclass(frozen=True)
class Container:
    codec: str
    n: int
    ell: int
    alpha_micro: int
    gamma_micro: int
    d_micro: int
    seed: int
    source: SourceModel
    dist: DistortionSpec
    checksum: int
    stream: Bitstream

    @classmethod
    def wrap(cls, params, source: SourceModel, dist: DistortionSpec, stream: Bitstream,
             checksum: int) -> "Container":
        return cls(
            codec=params.codec,
            n=params.n,
            ell=params.ell,
            alpha_micro=params.alpha_micro if params.codec == LLZ else 0,
            gamma_micro=params.gamma_micro,
            d_micro=params.d_micro,
            seed=params.seed,
            source=source,
            dist=dist,
            checksum=checksum,
            stream=stream,
        )


def pack_container(c: Container) -> bytes:
    pmf = format_pmf(c.source).encode('utf-8')
    matrix = format_matrix(c.dist).encode('utf-8')
    try:
        head = FIXED.pack(MAGIC, CODEC_IDS[c.codec], VERSION, c.n, c.ell, c.alpha_micro,
                          c.gamma_micro, c.d_micro, c.seed)
        return b''.join([
            head,
            U16.pack(len(pmf)), pmf,
            U32.pack(len(matrix)), matrix,
            TAIL.pack(c.checksum, c.stream.bit_length),
            c.stream.to_bytes(),
        ])
    except struct.error as e:
        raise ContainerFormatError(f"header field out of range: {e}") from e


class _Cursor:

    def __init__(self, data: bytes):
        self.data = data
        self.offset = 0

    def take(self, size: int) -> bytes:
        if self.offset + size > len(self.data):
            raise ContainerFormatError(f"truncated container: needed {size} bytes at {self.offset}")
        chunk = self.data[self.offset:self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, layout: struct.Struct):
        return layout.unpack(self.take(layout.size))


def unpack_container(data: bytes) -> Container:
    cursor = _Cursor(data)
    magic, codec_id, version, n, ell, alpha, gamma, d, seed = cursor.unpack(FIXED)
    if magic != MAGIC:
        raise ContainerFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise ContainerFormatError(f"unsupported container version {version}")
    if codec_id not in CODEC_NAMES:
        raise ContainerFormatError(f"unknown codec id {codec_id}")

    (pmf_len,) = cursor.unpack(U16)
    pmf = cursor.take(pmf_len)
    (matrix_len,) = cursor.unpack(U32)
    matrix = cursor.take(matrix_len)
    checksum, bit_length = cursor.unpack(TAIL)
    payload = data[cursor.offset:]

    try:
        source = parse_pmf(pmf.decode('utf-8'))
        dist = parse_matrix(matrix.decode('utf-8'))
        dist.check_source(source)
    except (UnicodeDecodeError, SpecParseError, WorkbenchError) as e:
        raise ContainerFormatError(f"bad source or distortion in header: {e}") from e

    container = Container(
        codec=CODEC_NAMES[codec_id], n=n, ell=ell, alpha_micro=alpha, gamma_micro=gamma,
        d_micro=d, seed=seed, source=source, dist=dist, checksum=checksum,
        stream=Bitstream.from_bytes(payload, bit_length),
    )
    logger.info(f"Read {container.codec} container: n={n}, ell={ell}, {bit_length} payload bits")
    return container


def write_container(path: str, c: Container):
    with open(path, 'wb') as f:
        f.write(pack_container(c))


def read_container(path: str) -> Container:
    with open(path, 'rb') as f:
        return unpack_container(f.read())
