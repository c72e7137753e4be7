"""Packed MSB-first bit streams on top of bitarray."""
from bitarray import bitarray
from bitarray.util import int2ba, ba2int

from rd_core.exceptions import StreamExhausted, ContainerFormatError


class Bitstream:
    """Append-only bit buffer. Fields are written most significant bit first."""

    def __init__(self, bits: bitarray | None = None):
        self.bits = bits if bits is not None else bitarray(endian='big')

    @property
    def bit_length(self) -> int:
        return len(self.bits)

    def __len__(self):
        return len(self.bits)

    def write(self, value: int, nbits: int):
        if nbits < 0:
            raise ValueError(f"nbits must be >= 0, got {nbits}")
        if value < 0 or value >> nbits:
            raise ValueError(f"{value} does not fit in {nbits} bits")
        if nbits:
            self.bits.extend(int2ba(value, length=nbits, endian='big'))

    def to_bytes(self) -> bytes:
        # bitarray pads the last byte with zeros
        return self.bits.tobytes()

    @classmethod
    def from_bytes(cls, data: bytes, bit_length: int) -> "Bitstream":
        if bit_length < 0 or len(data) != (bit_length + 7) // 8:
            raise ContainerFormatError(f"{len(data)} payload bytes cannot hold exactly {bit_length} bits")
        bits = bitarray(endian='big')
        bits.frombytes(data)
        if bits[bit_length:].any():
            raise ContainerFormatError("nonzero padding after the last payload bit")
        del bits[bit_length:]
        return cls(bits)

    def reader(self) -> "BitReader":
        return BitReader(self)

    def __eq__(self, other):
        if not isinstance(other, Bitstream):
            return NotImplemented
        return self.bits == other.bits

    def __repr__(self):
        return f"Bitstream(bit_length={self.bit_length})"


class BitReader:

    def __init__(self, stream: Bitstream):
        self.bits = stream.bits
        self.offset = 0

    @property
    def remaining(self) -> int:
        return len(self.bits) - self.offset

    def read(self, nbits: int) -> int:
        if nbits == 0:
            return 0
        if nbits > self.remaining:
            raise StreamExhausted(f"needed {nbits} bits at offset {self.offset}, "
                                  f"only {self.remaining} left")
        value = ba2int(self.bits[self.offset:self.offset + nbits], signed=False)
        self.offset += nbits
        return value
