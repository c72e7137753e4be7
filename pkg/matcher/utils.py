"""
Approximate matching against a read-only reproduction database.

Both searches are the plain O(candidates x length) scans, vectorized over candidate starts with
numpy. Distortion sums run column by column, so candidates whose partial sum already exceeds what
they are allowed are dropped early. Dropping never changes the answer, only the work done.

Candidates are split into contiguous partitions that workers search independently; results are
reduced by (distortion, position) for nearest_window and (length desc, position) for
longest_match, so the outcome does not depend on the number of workers.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np
from django.conf import settings

from rd_core.exceptions import EmptyCandidates
from rd_core.models import DistortionSpec
from source_sim.models import SymbolBlock

from .models import CandidateSet, NearestResult, MatchResult

logger = logging.getLogger(__name__)

CHUNK = 1 << 16
ABANDON_EVERY = 4
FLOAT_SLACK = 1e-12


def resolve_workers(workers: int | None) -> int:
    workers = workers if workers is not None else settings.RDC_WORKERS
    return max(1, int(workers))


def _partitions(total: int, workers: int) -> list[tuple[int, int]]:
    """Split range(total) into at most `workers` contiguous, nonempty slices."""
    workers = max(1, min(workers, total))
    edges = np.linspace(0, total, workers + 1).astype(np.int64)
    return [(int(a), int(b)) for a, b in zip(edges, edges[1:]) if b > a]


def _run(jobs, fn, workers: int):
    if workers == 1 or len(jobs) == 1:
        return [fn(*job) for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


# ---- nearest window ----

def _nearest_in_range(block, db, table, candidates: CandidateSet, first: int, last: int,
                      early_abandon: bool):
    """Best (total, position) over candidate indices first..last-1 (0-based), or (inf, -1)."""
    best_total = math.inf
    best_index = -1
    b = block.size
    rows = table[block]  # rows[t] is the distortion row of the t-th block symbol

    for lo in range(first, last, CHUNK):
        hi = min(lo + CHUNK, last)
        index = np.arange(lo, hi, dtype=np.int64)
        starts = index * candidates.stride
        partial = np.zeros(index.size, dtype=table.dtype)

        for t in range(b):
            partial += rows[t][db[starts + t]]
            if early_abandon and best_index >= 0 and (t + 1) % ABANDON_EVERY == 0 and t + 1 < b:
                keep = partial <= best_total
                if not keep.all():
                    index, starts, partial = index[keep], starts[keep], partial[keep]
                    if index.size == 0:
                        break

        if index.size == 0:
            continue
        at = int(np.argmin(partial))  # first minimum, so the smallest index in the chunk
        if partial[at] < best_total:
            best_total = partial[at].item()
            best_index = int(index[at])

    return best_total, best_index


def nearest_window(block: SymbolBlock, database: SymbolBlock, dist: DistortionSpec,
                   candidates: CandidateSet, workers: int | None = None,
                   early_abandon: bool = True) -> NearestResult:
    """
    The candidate window closest to `block` under average distortion.

    :param block: the message block, length b
    :param database: reproduction symbols holding every candidate window
    :param candidates: sliding or strided candidate set
    :return: 1-based candidate position, smallest one on ties
    """
    if candidates.count < 1:
        raise EmptyCandidates("no candidates to search")
    b = len(block)
    if b < 1:
        raise ValueError("block must be nonempty")
    if candidates.span(b) > len(database):
        raise ValueError(f"database of {len(database)} symbols cannot hold {candidates.count} "
                         f"candidates of length {b} at stride {candidates.stride}")

    table = dist.table()
    query = block.symbols.astype(np.int64)
    workers = resolve_workers(workers)
    jobs = [(query, database.symbols, table, candidates, a, z, early_abandon)
            for a, z in _partitions(candidates.count, workers)]
    found = _run(jobs, _nearest_in_range, workers)

    total, index = min((t, i) for t, i in found if i >= 0)
    return NearestResult(position=index + 1, distortion=float(total) / b, total=float(total))


# ---- longest match ----

def admissible_limits(budget: float, upto: int, integer_sums: bool) -> np.ndarray:
    """
    limits[k] is the largest distortion sum a length-k window may have.

    Integer tables compare against floor(k * budget) computed exactly, float tables against
    k * budget plus a small slack.
    """
    if integer_sums:
        exact = Fraction(budget)
        return np.asarray([math.floor(exact * k) for k in range(upto + 1)], dtype=np.int64)
    return np.arange(upto + 1, dtype=np.float64) * budget + FLOAT_SLACK


def _longest_in_range(suffix, db, table, limits, first: int, last: int, early_abandon: bool):
    """Largest admissible length and its smallest start among starts first..last-1."""
    m = db.size
    K = suffix.size
    rows = table[suffix]
    best_len, best_start = 0, -1

    for lo in range(first, last, CHUNK):
        hi = min(lo + CHUNK, last)
        starts = np.arange(lo, hi, dtype=np.int64)
        partial = np.zeros(starts.size, dtype=table.dtype)

        for k in range(1, K + 1):
            # windows must fit: start + k <= m
            fits = starts <= m - k
            if not fits.all():
                starts, partial = starts[fits], partial[fits]
            if starts.size == 0:
                break
            partial += rows[k - 1][db[starts + k - 1]]
            ok = partial <= limits[k]
            if k >= best_len and ok.any():
                first_ok = int(starts[np.argmax(ok)])
                if k > best_len or first_ok < best_start:
                    best_len, best_start = k, first_ok
            if early_abandon:
                # sums only grow, so nothing above limits[K] can ever become admissible
                keep = partial <= limits[K]
                if not keep.all():
                    starts, partial = starts[keep], partial[keep]

    return best_len, best_start


def longest_match(suffix: SymbolBlock, database: SymbolBlock, dist: DistortionSpec, budget: float,
                  cap: int, workers: int | None = None, early_abandon: bool = True) -> MatchResult:
    """
    Longest prefix of `suffix` (at most `cap` symbols) found in the database within average
    distortion `budget`. Admissibility is not monotone in the length, so every start is scanned
    up to the full cap and the largest admissible length is kept.
    """
    if cap < 1:
        raise ValueError(f"cap must be >= 1, got {cap}")
    if budget < 0:
        raise ValueError(f"budget must be >= 0, got {budget}")

    K = min(cap, len(suffix))
    if K == 0 or len(database) == 0:
        return MatchResult(length=0)

    table = dist.table()
    limits = admissible_limits(budget, K, dist.is_integer_valued)
    query = suffix.symbols[:K].astype(np.int64)
    workers = resolve_workers(workers)
    jobs = [(query, database.symbols, table, limits, a, z, early_abandon)
            for a, z in _partitions(len(database), workers)]
    found = _run(jobs, _longest_in_range, workers)

    length = max(n for n, _ in found)
    if length == 0:
        return MatchResult(length=0)
    start = min(s for n, s in found if n == length)
    window = database.symbols[start:start + length].astype(np.int64)
    total = table[query[:length], window].sum()
    return MatchResult(length=length, position=start + 1, distortion=float(total) / length)
