"""
Shared plumbing for the workbench management commands.

Machine-readable results go to stdout as key=value lines, everything meant for a person goes
to stderr. Failures leave through CommandError with the exit code of their category:
2 for bad input, 3 for failures while working, 4 for file problems.
"""
import logging
import struct

import numpy as np
from bitarray import bitarray
from django.core.management.base import BaseCommand, CommandError

from rd_core.exceptions import WorkbenchError, SpecParseError, ParamMismatch, EXIT_IO, EXIT_VALIDATION
from rd_core.models import SourceModel, DistortionSpec
from rd_core.specs import load_source, load_distortion
from source_sim.models import SymbolBlock

logger = logging.getLogger(__name__)

PACKED_COUNT = struct.Struct('<Q')


class WorkbenchCommand(BaseCommand):
    """Subclasses implement run(); handle() maps library errors onto exit codes."""

    def run(self, *args, **options):
        raise NotImplementedError

    def handle(self, *args, **options):
        try:
            self.run(*args, **options)
        except WorkbenchError as e:
            logger.info(f"{self.__module__.rsplit('.', 1)[-1]} failed: {e}")
            raise CommandError(f"{type(e).__name__}: {e}", returncode=e.exit_code) from e
        except OSError as e:
            raise CommandError(f"{e.strerror or e}: {e.filename}", returncode=EXIT_IO) from e

    def emit(self, **pairs):
        for key, value in pairs.items():
            if isinstance(value, float):
                value = f"{value:.6f}"
            self.stdout.write(f"{key}={value}")

    def say(self, message: str):
        self.stderr.write(message)

    def usage_error(self, message: str):
        return CommandError(message, returncode=EXIT_VALIDATION)


def add_source_arguments(parser):
    group = parser.add_argument_group('Source')
    group.add_argument('--source', default='bern:0.4', help="bern:p, uniform:k or a config file")
    group.add_argument('--dist', default='hamming', help="hamming or a config file with the matrix rows")


def add_limit_arguments(parser):
    group = parser.add_argument_group('Limits')
    group.add_argument('--workers', type=int, help="search workers (default RDC_WORKERS)")
    group.add_argument('--memory-cap', type=int, help="largest database/codebook in symbols")
    group.add_argument('--max-ell-rate', type=float, help="memory guard on ell*R")


def resolve_source(options) -> tuple[SourceModel, DistortionSpec]:
    source = load_source(options['source'])
    return source, load_distortion(options['dist'], source)


def parse_float_list(value: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in value.split(',') if v.strip())
    except ValueError as e:
        raise SpecParseError(f"expected comma separated numbers, got '{value}'") from e


# ---- symbol files ----

def read_symbols(path: str, alphabet_size: int, packed: bool = False) -> SymbolBlock:
    """
    :param path: one nonnegative integer per line, or with packed=True a u64 little-endian
                 count followed by the symbols as bits, MSB first
    :param alphabet_size: symbols must lie below this
    """
    if packed:
        if alphabet_size != 2:
            raise ParamMismatch(f"packed symbol files hold binary symbols, the source has {alphabet_size} letters")
        with open(path, 'rb') as f:
            data = f.read()
        if len(data) < PACKED_COUNT.size:
            raise SpecParseError(f"{path}: too short for a packed symbol file")
        (count,) = PACKED_COUNT.unpack_from(data)
        bits = bitarray(endian='big')
        bits.frombytes(data[PACKED_COUNT.size:])
        if len(bits) < count or len(bits) - count >= 8:
            raise SpecParseError(f"{path}: header says {count} symbols, payload holds {len(bits)} bits")
        values = np.frombuffer(bits[:count].unpack(), dtype=np.uint8)
    else:
        with open(path, 'r', encoding='utf-8') as f:
            lines = [line.strip() for line in f if line.strip()]
        try:
            values = np.asarray([int(line) for line in lines], dtype=np.int64)
        except ValueError as e:
            raise SpecParseError(f"{path}: {e}") from e

    if values.size == 0:
        raise SpecParseError(f"{path}: no symbols")
    try:
        block = SymbolBlock(values, alphabet_size)
    except ValueError as e:
        raise SpecParseError(f"{path}: {e}") from e
    logger.info(f"Read {len(block)} symbols from {path}")
    return block


def write_symbols(path: str, block: SymbolBlock, packed: bool = False):
    if packed:
        if block.alphabet_size != 2:
            raise ParamMismatch(f"only binary blocks can be packed, this one has {block.alphabet_size} letters")
        bits = bitarray(endian='big')
        bits.pack(block.symbols.astype(np.uint8).tobytes())
        with open(path, 'wb') as f:
            f.write(PACKED_COUNT.pack(len(block)) + bits.tobytes())
    else:
        with open(path, 'w', encoding='utf-8') as f:
            f.write(''.join(f"{v}\n" for v in block.tolist()))
    logger.info(f"Wrote {len(block)} symbols to {path}")
