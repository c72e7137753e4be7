import csv
import dataclasses
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from rd_core.exceptions import ParamMismatch, ScenarioError, WorkbenchError
from rd_core.models import SourceModel, DistortionSpec, RdCurve
from rd_core.utils import timesharing_rate
from lossy_codecs.models import GvwParams, HybParams, LlzParams, LLZ
from lossy_codecs.pipeline import build_params, encode, verify_roundtrip
from matcher.utils import longest_match, resolve_workers
from params.utils import heuristic_params, memory_estimate, predicted_match_length, working_rate
from source_sim.models import check_seed
from source_sim.utils import sample_block, derive_seed, generate_database, MESSAGE_STREAM, PROBE_STREAM

from .models import RunRecord
from .scenarios import ScenarioSpec, EXPLICIT, PUBLISHED_BAND, default_seeds
from .serializers import RunRecordSerializer, CSV_FIELDS

logger = logging.getLogger(__name__)


def _params_for(spec: ScenarioSpec, D: float, seed: int):
    if spec.mode == EXPLICIT:
        return build_params(spec.codec, spec.source, spec.dist, spec.n, spec.ell, spec.gamma, D, seed,
                            alpha=spec.alpha, max_ell_rate=spec.max_ell_rate)
    return heuristic_params(spec.source, spec.dist, D, spec.codec, n=spec.n, seed=seed,
                            max_ell_rate=spec.max_ell_rate)


def _sample_std(values) -> float:
    return float(np.std(values, ddof=1)) if len(values) > 1 else 0.0


def message_for(source: SourceModel, n: int, seed: int):
    """The message a run with this seed encodes; the database uses the seed itself."""
    return sample_block(source.pmf, n, derive_seed(seed, MESSAGE_STREAM))


def run_point(spec: ScenarioSpec, D: float, workers: int | None = None) -> RunRecord:
    """All seeds at one target distortion, aggregated into one unsaved record."""
    base = _params_for(spec, D, spec.seeds[0])
    achieved, rates, encode_times, decode_times = [], [], [], []

    seed = None
    try:
        for seed in spec.seeds:
            params = dataclasses.replace(base, seed=check_seed(seed))
            x = message_for(spec.source, spec.n, seed)

            started = time.perf_counter()
            stream, report = encode(params, x, spec.source, spec.dist, workers=workers,
                                    memory_cap=spec.memory_cap)
            encoded = time.perf_counter()
            verify_roundtrip(params, stream, report, spec.dist, memory_cap=spec.memory_cap)
            decode_times.append(time.perf_counter() - encoded)
            encode_times.append(encoded - started)

            achieved.append(report.achieved_distortion)
            rates.append(report.rate)
            logger.debug(f"{spec.codec} D={D} seed={seed}: distortion={report.achieved_distortion:.5f}, "
                         f"rate={report.rate:.5f}")
    except WorkbenchError as e:
        raise ScenarioError(f"{spec.codec} at D={D}, seed={seed}: {e}", spec.codec, D, seed) from e

    memory = memory_estimate(base)
    record = RunRecord(
        scenario=spec.name,
        codec=spec.codec,
        ell=base.ell,
        d_target=D,
        d_achieved_mean=float(np.mean(achieved)),
        d_achieved_std=_sample_std(achieved),
        rate_mean=float(np.mean(rates)),
        rate_std=_sample_std(rates),
        memory_symbols=memory['memory_symbols'],
        memory_bytes=memory['memory_bytes'],
        encode_wall_time=float(np.mean(encode_times)),
        decode_wall_time=float(np.mean(decode_times)),
        seeds=len(spec.seeds),
        excess_fraction=float(np.mean([d > D for d in achieved])),
    )
    logger.info(f"[{spec.name}] {spec.codec} D={D}: ell={record.ell}, "
                f"distortion={record.d_achieved_mean:.5f}+/-{record.d_achieved_std:.5f}, "
                f"rate={record.rate_mean:.5f}, memory={record.memory_symbols} symbols, "
                f"encode={record.encode_wall_time:.2f}s")
    return record


def run_scenario(spec: ScenarioSpec, workers: int | None = None) -> list[RunRecord]:
    """
    One record per target distortion, in grid order. Nothing is saved.

    With more than one worker the grid points run side by side, each with a single-threaded
    search, so up to `workers` databases are held in memory at once.
    """
    workers = resolve_workers(workers)
    logger.info(f"Running scenario '{spec.name}': {spec.codec} on {spec.source}, "
                f"{len(spec.targets)} targets x {len(spec.seeds)} seeds, n={spec.n}, workers={workers}")
    if workers == 1 or len(spec.targets) == 1:
        return [run_point(spec, D, workers) for D in spec.targets]
    with ThreadPoolExecutor(max_workers=min(workers, len(spec.targets))) as pool:
        return list(pool.map(lambda D: run_point(spec, D, 1), spec.targets))


class PublishedCheck(NamedTuple):
    codec: str
    d_target: float
    published: float
    achieved: float  # mean over seeds
    band: float

    @property
    def deviation(self) -> float:
        return self.achieved - self.published

    @property
    def within_band(self) -> bool:
        return abs(self.deviation) <= self.band


def compare_published(spec: ScenarioSpec, records, band: float = PUBLISHED_BAND) -> list[PublishedCheck]:
    """Mean achieved distortion per grid point against the reference value; empty when there is none."""
    if spec.published is None:
        return []
    reference = dict(zip(spec.targets, spec.published))
    checks = []
    for record in records:
        if record.codec != spec.codec or record.d_target not in reference:
            continue
        check = PublishedCheck(spec.codec, record.d_target, reference[record.d_target], record.d_achieved_mean, band)
        if not check.within_band:
            logger.warning(f"[{spec.name}] {spec.codec} D={check.d_target}: mean distortion {check.achieved:.5f} "
                           f"is {check.deviation:+.5f} from {check.published}")
        checks.append(check)
    return checks


def memory_ratio(gvw: GvwParams, hyb: HybParams) -> Fraction:
    """GVW codebook symbols over HYB database symbols: l W / (W + l - 1), just under l."""
    if gvw.ell != hyb.ell or gvw.codebook_size != hyb.codebook_size:
        raise ParamMismatch(f"GVW (ell={gvw.ell}, W={gvw.codebook_size}) and HYB "
                            f"(ell={hyb.ell}, W={hyb.codebook_size}) do not share ell and R")
    if hyb.stride != 1:
        raise ParamMismatch("the HYB side must use sliding windows")
    return Fraction(gvw.memory_symbols, hyb.memory_symbols)


# ---- files ----

def write_csv(records, f):
    writer = csv.DictWriter(f, fieldnames=CSV_FIELDS, lineterminator='\n')
    writer.writeheader()
    for row in RunRecordSerializer(records, many=True).data:
        writer.writerow(row)


def emit_csv(records, path: str):
    with open(path, 'w', newline='', encoding='utf-8') as f:
        write_csv(records, f)
    logger.info(f"Wrote {len(records)} records to {path}")


def read_csv(path: str) -> list[RunRecord]:
    """Parse a file written by emit_csv back into unsaved records."""
    records = []
    with open(path, 'r', newline='', encoding='utf-8') as f:
        for row in csv.DictReader(f):
            serializer = RunRecordSerializer(data=row)
            serializer.is_valid(raise_exception=True)
            records.append(RunRecord(**serializer.validated_data))
    return records


def write_plot_data(records, curve: RdCurve, source: SourceModel, dist: DistortionSpec, f):
    f.write("# curve\nD,R,timesharing\n")
    for point in curve.points:
        f.write(f"{point.distortion!r},{point.rate!r},{timesharing_rate(source, dist, point.distortion)!r}\n")
    f.write("# scatter\ncodec,D_achieved,rate\n")
    for record in records:
        f.write(f"{record.codec},{record.d_achieved_mean!r},{record.rate_mean!r}\n")


def emit_plot_data(records, curve: RdCurve, source: SourceModel, dist: DistortionSpec, path: str):
    with open(path, 'w', encoding='utf-8') as f:
        write_plot_data(records, curve, source, dist, f)
    logger.info(f"Wrote plot data ({len(curve)} curve points, {len(records)} scatter points) to {path}")


def read_plot_data(path: str) -> dict[str, list[tuple]]:
    sections = {'curve': [], 'scatter': []}
    current = None
    with open(path, 'r', encoding='utf-8') as f:
        for line in f:
            line = line.strip()
            if line.startswith('# '):
                current = line[2:]
                next(f)  # column names
            elif line:
                first, *rest = line.split(',')
                if current == 'curve':
                    sections[current].append(tuple(float(v) for v in [first, *rest]))
                else:
                    sections[current].append((first, *(float(v) for v in rest)))
    return sections


# ---- desk checks on the asymptotic claims ----

class TrendPoint(NamedTuple):
    ell: int
    rate_mean: float
    rate_std: float
    working_rate: float  # R(D_bar)
    gap: float  # rate_mean - working_rate


def llz_rate_trend(source: SourceModel, dist: DistortionSpec, D: float, ells=(8, 12, 16, 20),
                   seeds: tuple[int, ...] | None = None, n: int = 1050, gamma: float = 0.03,
                   alpha: float = 0.1, workers: int | None = None) -> list[TrendPoint]:
    """Mean LLZ rate at one D for growing ell; it should fall towards R(D_bar)."""
    trend = []
    for ell in ells:
        spec = ScenarioSpec(name=f'llz-trend-{ell}', source=source, dist=dist, codec=LLZ, targets=(D,), n=n,
                            seeds=seeds or default_seeds(),
                            mode=EXPLICIT, ell=ell, gamma=gamma, alpha=alpha)
        record = run_point(spec, D, workers)
        target = working_rate(build_params(LLZ, source, dist, n, ell, gamma, D, spec.seeds[0], alpha=alpha))
        trend.append(TrendPoint(ell, record.rate_mean, record.rate_std, target, record.rate_mean - target))
        logger.info(f"LLZ trend ell={ell}: rate={record.rate_mean:.5f}, R(D_bar)={target:.5f}")
    return trend


class MatchStats(NamedTuple):
    probes: int
    mean: float
    std: float
    predicted: float  # log2(m) / R(D_bar)

    @property
    def relative_error(self) -> float:
        return (self.mean - self.predicted) / self.predicted


def match_length_concentration(params: LlzParams | HybParams, source: SourceModel, dist: DistortionSpec,
                               probes: int = 100, cap: int | None = None, workers: int | None = None,
                               memory_cap: int | None = None) -> MatchStats:
    """
    Longest-match lengths of fresh source strings against the params' database, at budget
    D_bar. Lengths are capped at the LLZ cap, or at 2l for HYB.
    """
    if probes < 1:
        raise ValueError(f"probes must be >= 1, got {probes}")
    cap = cap or getattr(params, 'cap', 2 * params.ell)
    database = generate_database(params.q_star, params.database_size, params.seed, memory_cap=memory_cap)
    x = sample_block(source.pmf, probes * cap, derive_seed(params.seed, PROBE_STREAM))

    lengths = [
        longest_match(x[i * cap:(i + 1) * cap], database, dist, params.d_bar, cap, workers=workers).length
        for i in range(probes)
    ]
    stats = MatchStats(probes, float(np.mean(lengths)), _sample_std(lengths), predicted_match_length(params))
    logger.info(f"{params.codec} match lengths over {probes} probes: mean={stats.mean:.2f}, "
                f"predicted={stats.predicted:.2f}")
    return stats
