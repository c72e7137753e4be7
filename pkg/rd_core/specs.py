"""
Loading sources and distortion measures from the short builtin names used on the command
line ("bern:0.4", "uniform:4", "hamming") or from a plain-text config file:

    # Bern(0.4) under Hamming distortion
    source_alphabet_size 2
    repro_alphabet_size 2
    pmf 0.6 0.4
    row 0 1
    row 1 0
"""
import logging
import os

from .exceptions import SpecParseError, InvalidPmf, InvalidDistortion
from .models import SourceModel, DistortionSpec

logger = logging.getLogger(__name__)


def parse_spec_file(path: str) -> tuple[SourceModel | None, DistortionSpec | None]:
    pmf = None
    rows = []
    sizes = {}

    # content that is not a text config is a parse error, other OS errors stay file errors
    try:
        with open(path, "r", encoding="utf-8") as f:
            lines = f.readlines()
    except UnicodeDecodeError as e:
        raise SpecParseError(f"{path}: not a utf-8 text file") from e
    except IsADirectoryError as e:
        raise SpecParseError(f"{path}: is a directory, not a config file") from e

    for lineno, raw in enumerate(lines, start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        key, *values = line.split()
        try:
            if key == 'pmf':
                if pmf is not None:
                    raise SpecParseError(f"{path}:{lineno}: pmf given twice")
                pmf = [float(v) for v in values]
            elif key == 'row':
                rows.append([float(v) for v in values])
            elif key in ('source_alphabet_size', 'repro_alphabet_size'):
                sizes[key] = int(values[0])
            else:
                raise SpecParseError(f"{path}:{lineno}: unknown key '{key}'")
        except (ValueError, IndexError) as e:
            raise SpecParseError(f"{path}:{lineno}: {e}") from e

    source = SourceModel(tuple(pmf)) if pmf is not None else None
    dist = DistortionSpec(tuple(tuple(r) for r in rows)) if rows else None

    # declared sizes are optional, but must agree when present
    if 'source_alphabet_size' in sizes:
        for what, actual in (('pmf', source and source.alphabet_size),
                             ('distortion rows', dist and dist.source_alphabet_size)):
            if actual is not None and actual != sizes['source_alphabet_size']:
                raise SpecParseError(f"{path}: {what} has {actual} letters, "
                                     f"source_alphabet_size says {sizes['source_alphabet_size']}")
    if 'repro_alphabet_size' in sizes and dist is not None:
        if dist.repro_alphabet_size != sizes['repro_alphabet_size']:
            raise SpecParseError(f"{path}: rows have {dist.repro_alphabet_size} columns, "
                                 f"repro_alphabet_size says {sizes['repro_alphabet_size']}")

    logger.info(f"Loaded spec file {path}: source={source}, distortion rows={len(rows)}")
    return source, dist


def load_source(value: str) -> SourceModel:
    """'bern:p', 'uniform:k' or a config file path."""
    kind, _, arg = value.partition(':')
    try:
        if kind == 'bern' and arg:
            return SourceModel.bernoulli(float(arg))
        if kind == 'uniform' and arg:
            return SourceModel.uniform(int(arg))
    except ValueError as e:
        raise SpecParseError(f"bad source spec '{value}': {e}") from e

    if not os.path.exists(value):
        raise SpecParseError(f"'{value}' is neither a builtin source (bern:p, uniform:k) nor a file")
    source, _ = parse_spec_file(value)
    if source is None:
        raise InvalidPmf(f"{value} has no pmf line")
    return source


def load_distortion(value: str, source: SourceModel) -> DistortionSpec:
    """'hamming' (sized to the source alphabet) or a config file path."""
    if value == 'hamming':
        return DistortionSpec.hamming(source.alphabet_size)

    if not os.path.exists(value):
        raise SpecParseError(f"'{value}' is neither 'hamming' nor a file")
    _, dist = parse_spec_file(value)
    if dist is None:
        raise InvalidDistortion(f"{value} has no row lines")
    dist.check_source(source)
    return dist


def format_pmf(source: SourceModel) -> str:
    """Shortest round-trip decimals, so both ends of a container rebuild identical floats."""
    return ','.join(repr(p) for p in source.pmf)


def format_matrix(dist: DistortionSpec) -> str:
    return ';'.join(','.join(repr(v) for v in row) for row in dist.matrix)


def parse_pmf(text: str) -> SourceModel:
    try:
        return SourceModel(tuple(float(v) for v in text.split(',')))
    except ValueError as e:
        raise SpecParseError(f"bad pmf string '{text}': {e}") from e


def parse_matrix(text: str) -> DistortionSpec:
    try:
        return DistortionSpec(tuple(tuple(float(v) for v in row.split(',')) for row in text.split(';')))
    except ValueError as e:
        raise SpecParseError(f"bad matrix string: {e}") from e
