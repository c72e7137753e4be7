import math
from dataclasses import dataclass

from rd_core.exceptions import DegenerateConstants


@dataclass(frozen=True)
class Theorem2Constants:
    """Constants behind the guaranteed HYB block length at one target distortion."""
    d: float
    d_max: float
    d1: float  # D / 2
    k_const: float  # K(D)
    c_const: float  # C(D), never above 1/4
    gamma_hat: float  # gamma must stay below this
    eps_hat: float  # epsilon must stay below this

    def __post_init__(self):
        for name in ('d1', 'k_const', 'c_const', 'gamma_hat', 'eps_hat'):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise DegenerateConstants(f"{name}={value} must be finite and positive")
        if self.c_const > 0.25:
            raise DegenerateConstants(f"C(D)={self.c_const} exceeds 1/4")
