from dataclasses import dataclass

from rd_core.exceptions import EmptyCandidates


@dataclass(frozen=True)
class CandidateSet:
    """
    Which database windows nearest_window may choose from.

    Candidate j (1-based) starts at database offset (j - 1) * stride. Sliding mode (stride 1)
    is the HYB window set; strided mode (stride ell) reads a flat GVW codebook.
    """
    count: int
    stride: int = 1

    def __post_init__(self):
        if self.count < 1:
            raise EmptyCandidates(f"candidate count must be >= 1, got {self.count}")
        if self.stride < 1:
            raise ValueError(f"stride must be >= 1, got {self.stride}")

    @classmethod
    def sliding(cls, count: int) -> "CandidateSet":
        return cls(count, 1)

    @classmethod
    def strided(cls, ell: int, count: int) -> "CandidateSet":
        return cls(count, ell)

    def span(self, window: int) -> int:
        """Database symbols needed to hold every candidate window of the given length."""
        return (self.count - 1) * self.stride + window

    def offset(self, position: int) -> int:
        return (position - 1) * self.stride


@dataclass(frozen=True)
class NearestResult:
    position: int  # 1-based candidate index
    distortion: float  # per symbol
    total: float  # summed over the block

    def __post_init__(self):
        if self.distortion < 0:
            raise ValueError("distortion must be >= 0")


@dataclass(frozen=True)
class MatchResult:
    length: int
    position: int = 0  # 1-based database start, 0 when length is 0
    distortion: float = 0.0

    @property
    def found(self) -> bool:
        return self.length >= 1
