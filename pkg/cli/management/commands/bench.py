import dataclasses
import logging

from bench.scenarios import (ScenarioSpec, EXPLICIT, HEURISTIC, BUILTIN, PUBLISHED_BAND, builtin_scenario,
                             default_seeds)
from bench.utils import (run_scenario, emit_csv, write_csv, emit_plot_data, llz_rate_trend,
                         match_length_concentration, compare_published)
from lossy_codecs.models import GVW, LLZ, HYB
from lossy_codecs.pipeline import build_params
from rd_core.exceptions import PublishedDistortionMismatch
from rd_core.utils import rd_curve

from cli.utils import (WorkbenchCommand, add_source_arguments, add_limit_arguments, resolve_source,
                       parse_float_list)

logger = logging.getLogger(__name__)


class Command(WorkbenchCommand):
    help = ("Run a builtin table grid (--scenario table1..table4) or a custom grid, writing CSV and "
            "optionally plot data; --proxy runs the LLZ rate trend or the match-length check.")

    def add_arguments(self, parser):
        parser.add_argument('--scenario', choices=list(BUILTIN))
        parser.add_argument('--codec', choices=[GVW, LLZ, HYB], action='append', dest='codecs',
                            help="codec to run, repeatable; a custom grid takes exactly one")
        add_source_arguments(parser)

        group = parser.add_argument_group('Custom grid')
        group.add_argument('--targets', help="comma separated target distortions")
        group.add_argument('--ell', type=int, help="explicit block length; heuristic when omitted")
        group.add_argument('--gamma', type=float)
        group.add_argument('--alpha', type=float)

        group = parser.add_argument_group('Runs')
        group.add_argument('--n', type=int, default=1050)
        group.add_argument('--seeds', type=int, help="number of seeds (default RDC_DEFAULT_SEEDS)")
        group.add_argument('--seed-base', type=int, help="first seed (default RDC_SEED_BASE)")

        group = parser.add_argument_group('Output')
        group.add_argument('--csv', default='-', help="CSV path, '-' for stdout")
        group.add_argument('--plot', help="plot data path (curve and scatter blocks)")
        group.add_argument('--curve-points', type=int, default=100)
        group.add_argument('--save', action='store_true', help="store the records in the database")
        group.add_argument('--check-published', action='store_true',
                           help="compare mean distortions with reference values")
        group.add_argument('--published', help="comma separated reference distortions for a custom grid")
        group.add_argument('--band', type=float, default=PUBLISHED_BAND,
                           help="allowed distance of a mean from its reference value")

        group = parser.add_argument_group('Asymptotic proxies')
        group.add_argument('--proxy', choices=['trend', 'matches'])
        group.add_argument('--ells', default='8,12,16,20', help="block lengths for the LLZ trend")
        group.add_argument('--probes', type=int, default=100)
        add_limit_arguments(parser)

    def run(self, *args, **options):
        seeds = default_seeds(options['seeds'], options['seed_base'])
        if not seeds:
            raise self.usage_error("--seeds must be >= 1")
        if options['proxy']:
            return self.run_proxy(options, seeds)

        specs = self.scenarios(options, seeds)
        if options['check_published'] and not any(spec.published for spec in specs):
            raise self.usage_error("--check-published needs --scenario table1 (gvw), table2 or a --published grid")
        records = []
        checks = []
        for spec in specs:
            if options['memory_cap'] is not None or options['max_ell_rate'] is not None:
                spec = dataclasses.replace(
                    spec,
                    memory_cap=options['memory_cap'] if options['memory_cap'] is not None else spec.memory_cap,
                    max_ell_rate=options['max_ell_rate'] if options['max_ell_rate'] is not None else spec.max_ell_rate,
                )
            self.say(f"Running {spec.name}: {spec.codec} over {len(spec.targets)} targets, {len(seeds)} seeds")
            spec_records = run_scenario(spec, workers=options['workers'])
            records.extend(spec_records)
            checks.extend(compare_published(spec, spec_records, band=options['band']))

        if options['save']:
            for record in records:
                record.save()
            self.say(f"Saved {len(records)} records")

        if options['csv'] == '-':
            write_csv(records, self.stdout)
        else:
            emit_csv(records, options['csv'])
        if options['plot']:
            curve = rd_curve(specs[0].source, specs[0].dist, options['curve_points'])
            emit_plot_data(records, curve, specs[0].source, specs[0].dist, options['plot'])

        if options['check_published']:
            self.report_published(checks)

    def report_published(self, checks):
        # stdout may be carrying the CSV
        for check in checks:
            self.say(f"codec={check.codec} d_target={check.d_target} published={check.published} "
                     f"achieved={check.achieved:.5f} deviation={check.deviation:+.5f} "
                     f"within_band={check.within_band}")
        outside = [check for check in checks if not check.within_band]
        if outside:
            raise PublishedDistortionMismatch(
                f"{len(outside)} of {len(checks)} grid points are more than {outside[0].band} "
                f"from the reported distortion, first at {outside[0].codec} D={outside[0].d_target}")
        self.say(f"All {len(checks)} grid points within the reported distortion band")

    def scenarios(self, options, seeds) -> list[ScenarioSpec]:
        if options['scenario']:
            return builtin_scenario(options['scenario'], seeds=seeds, n=options['n'],
                                    codecs=tuple(options['codecs']) if options['codecs'] else None)

        targets = parse_float_list(options['targets'] or '')
        if not targets:
            raise self.usage_error("give --scenario or a non-empty --targets grid")
        codecs = options['codecs'] or []
        if len(codecs) != 1:
            raise self.usage_error("a custom grid needs exactly one --codec")

        source, dist = resolve_source(options)
        explicit = options['ell'] is not None
        return [ScenarioSpec(
            name='custom', source=source, dist=dist, codec=codecs[0], targets=targets, n=options['n'],
            seeds=seeds, mode=EXPLICIT if explicit else HEURISTIC,
            ell=options['ell'], gamma=options['gamma'], alpha=options['alpha'],
            published=parse_float_list(options['published']) if options['published'] else None,
        )]

    def run_proxy(self, options, seeds):
        source, dist = resolve_source(options)
        targets = parse_float_list(options['targets'] or '')
        if len(targets) != 1:
            raise self.usage_error("--proxy needs exactly one --targets value")
        D = targets[0]

        if options['proxy'] == 'trend':
            ells = tuple(int(v) for v in parse_float_list(options['ells']))
            trend = llz_rate_trend(source, dist, D, ells=ells, seeds=seeds, n=options['n'],
                                   gamma=options['gamma'] or 0.03, alpha=options['alpha'] or 0.1,
                                   workers=options['workers'])
            for point in trend:
                self.stdout.write(f"ell={point.ell} rate={point.rate_mean:.6f} rate_std={point.rate_std:.6f} "
                                  f"working_rate={point.working_rate:.6f} gap={point.gap:.6f}")
            return

        codecs = options['codecs'] or []
        if len(codecs) != 1 or codecs[0] == GVW or options['ell'] is None or options['gamma'] is None:
            raise self.usage_error("--proxy matches needs one --codec (llz or hyb), --ell and --gamma")
        p = build_params(codecs[0], source, dist, options['n'], options['ell'], options['gamma'], D, seeds[0],
                         alpha=options['alpha'], max_ell_rate=options['max_ell_rate'])
        stats = match_length_concentration(p, source, dist, probes=options['probes'], workers=options['workers'],
                                           memory_cap=options['memory_cap'])
        self.emit(probes=stats.probes, mean=stats.mean, std=stats.std, predicted=stats.predicted,
                  relative_error=stats.relative_error)
