import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .exceptions import DistortionOutOfRange, NoConvergence, RateOutOfRange, InvalidDistortion
from .models import SourceModel, DistortionSpec, RdPoint, RdCurve

logger = logging.getLogger(__name__)

LN2 = math.log(2.0)

CLOSED_FORM_TOL = 1e-9
BA_TOL = 1e-7
BA_MAX_ITER = 100000
BISECTION_MAX_STEPS = 200


def entropy_bits(pmf) -> float:
    """Shannon entropy in bits, with 0 log 0 = 0."""
    p = np.asarray(pmf, dtype=np.float64)
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def mutual_information(pmf, channel) -> float:
    """I(X;Y) in bits for X ~ pmf and Y|X ~ channel rows."""
    p = np.asarray(pmf, dtype=np.float64)
    w = np.asarray(channel, dtype=np.float64)
    joint = p[:, None] * w
    q = joint.sum(axis=0)
    mask = joint > 0
    ratio = np.ones_like(joint)
    ratio[mask] = w[mask] / np.broadcast_to(q, w.shape)[mask]
    return float((joint[mask] * np.log2(ratio[mask])).sum())


def expected_distortion(pmf, channel, dist: DistortionSpec) -> float:
    p = np.asarray(pmf, dtype=np.float64)
    return float((p[:, None] * np.asarray(channel, dtype=np.float64) * dist.as_array()).sum())


def channel_from_q(q_star, slope: float, dist: DistortionSpec) -> np.ndarray:
    """Test channel W(y|x) proportional to Q*(y) 2^{slope * rho(x, y)}."""
    q = np.asarray(q_star, dtype=np.float64)
    weights = q[None, :] * np.exp(slope * LN2 * dist.as_array())
    return weights / weights.sum(axis=1, keepdims=True)


class Dmax(NamedTuple):
    value: float
    letter: int  # reproduction letter achieving it (smallest index on ties)

    @property
    def degenerate(self) -> bool:
        # a constant reproduction already costs nothing, R(D) is identically 0
        return self.value <= 0.0


def d_max(source: SourceModel, dist: DistortionSpec) -> Dmax:
    dist.check_source(source)
    expected = source.probabilities @ dist.as_array()
    letter = int(np.argmin(expected))
    return Dmax(float(expected[letter]), letter)


def _check_interior(source, dist, D: float) -> Dmax:
    dm = d_max(source, dist)
    if not (0.0 < D < dm.value):
        raise DistortionOutOfRange(D, dm.value)
    return dm


def closed_form_kind(source: SourceModel, dist: DistortionSpec) -> str | None:
    if not dist.is_hamming():
        return None
    if source.alphabet_size == 2:
        return 'binary'
    if source.is_uniform():
        return 'uniform'
    return None


# ---- closed forms ----

def _binary_point(source: SourceModel, D: float) -> RdPoint:
    p = source.pmf[1]
    q1 = (p - D) / (1.0 - 2.0 * D)
    return RdPoint(
        distortion=D,
        rate=max(0.0, binary_entropy(p) - binary_entropy(D)),
        slope=math.log2(D / (1.0 - D)),
        q_star=(1.0 - q1, q1),
    )


def _uniform_point(source: SourceModel, D: float) -> RdPoint:
    k = source.alphabet_size
    rate = math.log2(k) - binary_entropy(D) - D * math.log2(k - 1)
    return RdPoint(
        distortion=D,
        rate=max(0.0, rate),
        slope=math.log2(D / ((1.0 - D) * (k - 1))),
        q_star=tuple(1.0 / k for _ in range(k)),
    )


# ---- Blahut-Arimoto ----

@dataclass(frozen=True)
class BaSolution:
    s: float  # slope parameter, nats per distortion unit
    q: np.ndarray
    channel: np.ndarray  # W*(y|x), exposed for tests
    distortion: float
    rate: float  # bits
    gap: float  # upper minus lower rate bound at exit, bits
    iterations: int

    @property
    def slope(self) -> float:
        return self.s / LN2


def blahut_arimoto(source: SourceModel, dist: DistortionSpec, s: float,
                   tol: float = BA_TOL, max_iter: int = BA_MAX_ITER) -> BaSolution:
    """
    Blahut-Arimoto iteration at a fixed slope parameter s < 0.

    Starts from the uniform reproduction pmf so the returned Q* is deterministic when the
    minimiser is not unique. Stops when the upper and lower rate bounds are within tol bits.
    """
    p = source.probabilities
    rho = dist.as_array()
    a = np.exp(s * rho)
    q = np.full(dist.repro_alphabet_size, 1.0 / dist.repro_alphabet_size)

    gap = math.inf
    for iteration in range(1, max_iter + 1):
        denom = a @ q
        c = (p / denom) @ a
        log_c = np.log(c)
        # Blahut's bounds differ by max log c - sum q c log c (nats)
        gap = float((log_c.max() - (q * c * log_c).sum()) / LN2)
        q = q * c
        q = q / q.sum()
        if gap < tol:
            break
    else:
        raise NoConvergence(f"Blahut-Arimoto did not reach {tol} bits in {max_iter} iterations "
                            f"(s={s}, gap={gap})")

    if iteration > max_iter // 10:
        logger.warning(f"Blahut-Arimoto needed {iteration} iterations at s={s}")

    channel = q[None, :] * a
    channel = channel / channel.sum(axis=1, keepdims=True)
    return BaSolution(
        s=s,
        q=q,
        channel=channel,
        distortion=expected_distortion(p, channel, dist),
        rate=mutual_information(p, channel),
        gap=gap,
        iterations=iteration,
    )


def solve_at_distortion(source: SourceModel, dist: DistortionSpec, D: float,
                        tol: float = BA_TOL) -> BaSolution:
    """Bisect the slope parameter until the BA solution sits at distortion D (within tol)."""
    dm = _check_interior(source, dist, D)

    # s = 0 gives the uniform-output distortion, which is >= Dmax > D
    lo, hi = -1.0, 0.0
    solution = blahut_arimoto(source, dist, lo, tol)
    steps = 0
    while solution.distortion > D:
        hi = lo
        lo *= 2.0
        steps += 1
        if steps > 64:
            raise NoConvergence(f"could not bracket D={D} (Dmax={dm.value})")
        solution = blahut_arimoto(source, dist, lo, tol)

    best = solution
    for _ in range(BISECTION_MAX_STEPS):
        if abs(best.distortion - D) <= tol or hi - lo <= 1e-15 * max(1.0, abs(lo)):
            break
        mid = 0.5 * (lo + hi)
        solution = blahut_arimoto(source, dist, mid, tol)
        if solution.distortion < D:
            lo = mid
        else:
            hi = mid
        if abs(solution.distortion - D) < abs(best.distortion - D):
            best = solution

    logger.debug(f"BA at D={D}: s={best.s}, D_s={best.distortion}, R_s={best.rate}, "
                 f"iterations={best.iterations}")
    return best


# ---- public operations ----

def rate_distortion(source: SourceModel, dist: DistortionSpec, D: float, tol: float | None = None) -> RdPoint:
    """R(D), Q* and R'(D). Closed forms for binary and uniform Hamming sources, BA otherwise."""
    _check_interior(source, dist, D)
    kind = closed_form_kind(source, dist)
    if kind == 'binary':
        return _binary_point(source, D)
    if kind == 'uniform':
        return _uniform_point(source, D)

    solution = solve_at_distortion(source, dist, D, tol or BA_TOL)
    # first-order correction for the small residual D - D_s
    rate = solution.rate + solution.slope * (D - solution.distortion)
    q = solution.q / solution.q.sum()
    return RdPoint(distortion=D, rate=max(0.0, rate), slope=solution.slope, q_star=tuple(float(v) for v in q))


def distortion_rate(source: SourceModel, dist: DistortionSpec, R: float, tol: float = CLOSED_FORM_TOL) -> float:
    """D(R) by bisection on D over (0, Dmax), using that R(D) is decreasing there."""
    top = math.log2(source.alphabet_size)
    if not (0.0 < R < top):
        raise RateOutOfRange(f"rate {R} is outside (0, {top})")

    dm = d_max(source, dist)
    if dm.degenerate:
        raise InvalidDistortion("Dmax is 0, the rate-distortion function is identically zero")

    lo, hi = 0.0, dm.value
    mid = 0.5 * (lo + hi)
    for _ in range(BISECTION_MAX_STEPS):
        mid = 0.5 * (lo + hi)
        rate = rate_distortion(source, dist, mid, tol=min(tol, BA_TOL)).rate
        if hi - lo <= tol and abs(rate - R) <= tol:
            break
        if rate > R:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 4 * math.ulp(hi):
            break
    return mid


def rd_slope(source: SourceModel, dist: DistortionSpec, D: float) -> float:
    """R'(D) in bits per distortion unit."""
    _check_interior(source, dist, D)
    kind = closed_form_kind(source, dist)
    if kind == 'binary':
        return math.log2(D / (1.0 - D))
    if kind == 'uniform':
        return math.log2(D / ((1.0 - D) * (source.alphabet_size - 1)))
    return rate_distortion(source, dist, D).slope


def rate_at_zero(source: SourceModel, dist: DistortionSpec) -> float:
    """R(0+): H(P) for the Hamming closed forms, otherwise the BA rate just above D = 0."""
    kind = closed_form_kind(source, dist)
    if kind is not None:
        return entropy_bits(source.pmf)
    dm = d_max(source, dist)
    return rate_distortion(source, dist, dm.value * 1e-6).rate


def timesharing_rate(source: SourceModel, dist: DistortionSpec, D: float, r0: float | None = None) -> float:
    """The chord from (0, R(0+)) to (Dmax, 0); a reference line for practical schemes."""
    dm = d_max(source, dist)
    if r0 is None:
        r0 = rate_at_zero(source, dist)
    if D >= dm.value:
        return 0.0
    return r0 * (1.0 - D / dm.value)


def rd_curve(source: SourceModel, dist: DistortionSpec, points: int = 50, tol: float | None = None) -> RdCurve:
    """Sample R(D) on an evenly spaced interior grid of (0, Dmax)."""
    if points < 1:
        raise ValueError("points must be >= 1")
    dm = d_max(source, dist)
    if dm.degenerate:
        raise InvalidDistortion("Dmax is 0, there is no curve to sample")
    grid = [dm.value * i / (points + 1) for i in range(1, points + 1)]
    return RdCurve(tuple(rate_distortion(source, dist, D, tol) for D in grid))
