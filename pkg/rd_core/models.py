"""
Domain types for the rate-distortion math.

Nothing in here is an ORM model; the only persisted table in the project is bench.RunRecord.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidPmf, InvalidDistortion

PMF_TOLERANCE = 1e-12
Q_STAR_TOLERANCE = 1e-10


def check_pmf(pmf, tolerance: float = PMF_TOLERANCE, min_size: int = 1) -> tuple[float, ...]:
    """Validate a probability sequence and return it as a tuple of floats."""
    try:
        values = tuple(float(p) for p in pmf)
    except (TypeError, ValueError) as e:
        raise InvalidPmf(f"pmf entries must be reals: {e}") from e

    if len(values) < min_size:
        raise InvalidPmf(f"pmf needs at least {min_size} entries, got {len(values)}")
    if any(not math.isfinite(p) or p < 0 for p in values):
        raise InvalidPmf(f"pmf entries must be finite and >= 0: {values}")
    total = math.fsum(values)
    if abs(total - 1.0) > tolerance:
        raise InvalidPmf(f"pmf sums to {total!r}, not 1")
    return values


@dataclass(frozen=True)
class SourceModel:
    """Memoryless source on the alphabet {0, ..., alphabet_size - 1}."""
    pmf: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, 'pmf', check_pmf(self.pmf, min_size=2))

    @property
    def alphabet_size(self) -> int:
        return len(self.pmf)

    @property
    def probabilities(self) -> np.ndarray:
        return np.asarray(self.pmf, dtype=np.float64)

    @classmethod
    def bernoulli(cls, p: float) -> "SourceModel":
        if not 0.0 <= p <= 1.0:
            raise InvalidPmf(f"Bernoulli parameter must be in [0, 1], got {p}")
        return cls((1.0 - p, p))

    @classmethod
    def uniform(cls, k: int) -> "SourceModel":
        if k < 2:
            raise InvalidPmf(f"uniform source needs at least 2 letters, got {k}")
        return cls(tuple(1.0 / k for _ in range(k)))

    def is_uniform(self) -> bool:
        return all(p == self.pmf[0] for p in self.pmf)

    def __str__(self):
        return f"Source({', '.join(repr(p) for p in self.pmf)})"


@dataclass(frozen=True)
class DistortionSpec:
    """|A| x |Â| distortion matrix rho(x, y)."""
    matrix: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        try:
            rows = tuple(tuple(float(v) for v in row) for row in self.matrix)
        except (TypeError, ValueError) as e:
            raise InvalidDistortion(f"distortion entries must be reals: {e}") from e

        if not rows or not rows[0]:
            raise InvalidDistortion("distortion matrix is empty")
        width = len(rows[0])
        if any(len(row) != width for row in rows):
            raise InvalidDistortion("distortion matrix rows have different lengths")
        if any(not math.isfinite(v) or v < 0 for row in rows for v in row):
            raise InvalidDistortion("distortion entries must be finite and >= 0")
        # zero-distortion assumption: every source letter has an exact reproduction
        for x, row in enumerate(rows):
            if min(row) != 0.0:
                raise InvalidDistortion(f"source letter {x} has no zero-distortion reproduction")
        object.__setattr__(self, 'matrix', rows)

    @property
    def source_alphabet_size(self) -> int:
        return len(self.matrix)

    @property
    def repro_alphabet_size(self) -> int:
        return len(self.matrix[0])

    @property
    def is_integer_valued(self) -> bool:
        return all(v == int(v) for row in self.matrix for v in row)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.matrix, dtype=np.float64)

    def table(self) -> np.ndarray:
        """Lookup table for distortion sums: int64 when every entry is an integer so sums stay exact."""
        if self.is_integer_valued:
            return np.asarray(self.matrix, dtype=np.int64)
        return self.as_array()

    def zero_distortion_map(self) -> tuple[int, ...]:
        """phi(a) = argmin_y rho(a, y), smallest index on ties."""
        return tuple(row.index(min(row)) for row in self.matrix)

    def is_hamming(self) -> bool:
        k = self.source_alphabet_size
        if self.repro_alphabet_size != k:
            return False
        return all(self.matrix[x][y] == (0.0 if x == y else 1.0) for x in range(k) for y in range(k))

    def check_source(self, source: SourceModel):
        if source.alphabet_size != self.source_alphabet_size:
            raise InvalidDistortion(
                f"distortion matrix has {self.source_alphabet_size} rows "
                f"but the source alphabet has {source.alphabet_size} letters")

    @classmethod
    def hamming(cls, k: int) -> "DistortionSpec":
        return cls(tuple(tuple(0.0 if x == y else 1.0 for y in range(k)) for x in range(k)))


@dataclass(frozen=True)
class RdPoint:
    distortion: float
    rate: float  # bits/symbol
    slope: float  # bits per distortion unit
    q_star: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, 'q_star', check_pmf(self.q_star, tolerance=Q_STAR_TOLERANCE))
        if self.slope > 0:
            raise ValueError(f"R'(D) must be <= 0, got {self.slope}")
        if self.rate < 0:
            raise ValueError(f"R(D) must be >= 0, got {self.rate}")


@dataclass(frozen=True)
class RdCurve:
    points: tuple[RdPoint, ...] = field(default_factory=tuple)

    CONVEXITY_SLACK = 1e-9

    def __post_init__(self):
        object.__setattr__(self, 'points', tuple(self.points))
        d = [p.distortion for p in self.points]
        r = [p.rate for p in self.points]
        if any(b <= a for a, b in zip(d, d[1:])):
            raise ValueError("curve distortions must be strictly increasing")
        if any(b > a + 1e-9 for a, b in zip(r, r[1:])):
            raise ValueError("curve rates must be nonincreasing")
        # each interior point must lie on or below the chord of its neighbours
        for i in range(1, len(d) - 1):
            chord = r[i - 1] + (r[i + 1] - r[i - 1]) * (d[i] - d[i - 1]) / (d[i + 1] - d[i - 1])
            if r[i] > chord + self.CONVEXITY_SLACK:
                raise ValueError(f"curve is not convex at D={d[i]}")

    @property
    def distortions(self) -> list[float]:
        return [p.distortion for p in self.points]

    @property
    def rates(self) -> list[float]:
        return [p.rate for p in self.points]

    def __len__(self):
        return len(self.points)
