import csv

from rd_core.utils import rd_curve, d_max, timesharing_rate

from cli.utils import WorkbenchCommand, add_source_arguments, resolve_source


class Command(WorkbenchCommand):
    help = "Sample R(D) on an even grid over (0, Dmax) and write it as CSV (D,R,slope,timesharing)."

    def add_arguments(self, parser):
        add_source_arguments(parser)
        parser.add_argument('--points', type=int, default=50)
        parser.add_argument('--output', default='-', help="CSV path, '-' for stdout")

    def run(self, *args, **options):
        if options['points'] < 1:
            raise self.usage_error("--points must be >= 1")
        source, dist = resolve_source(options)
        curve = rd_curve(source, dist, options['points'])

        rows = [(p.distortion, p.rate, p.slope, timesharing_rate(source, dist, p.distortion)) for p in curve.points]
        if options['output'] == '-':
            self._write(self.stdout, rows)
            return

        with open(options['output'], 'w', newline='', encoding='utf-8') as f:
            self._write(f, rows)
        self.emit(points=len(rows), d_max=d_max(source, dist).value, output=options['output'])
        self.say(f"Wrote {len(rows)} curve points for {source}")

    @staticmethod
    def _write(f, rows):
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(['D', 'R', 'slope', 'timesharing'])
        writer.writerows([repr(v) for v in row] for row in rows)
