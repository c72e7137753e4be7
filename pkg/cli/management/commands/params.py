from lossy_codecs.models import GVW, LLZ, HYB
from lossy_codecs.pipeline import build_params
from params.utils import (heuristic_params, memory_estimate, predicted_match_length, theorem2_constants,
                          theorem2_block_length, block_excess_bound, theorem3_schedule)

from cli.utils import WorkbenchCommand, add_source_arguments, resolve_source


class Command(WorkbenchCommand):
    help = ("Print derived codec parameters, or with --theorem2 / --theorem3 the guaranteed "
            "block length and the growing schedule.")

    def add_arguments(self, parser):
        add_source_arguments(parser)
        parser.add_argument('--D', type=float, required=True)
        parser.add_argument('--codec', choices=[GVW, LLZ, HYB], default=GVW)
        parser.add_argument('--n', type=int, default=1050)
        parser.add_argument('--ell', type=int, help="explicit block length; heuristic when omitted")
        parser.add_argument('--gamma', type=float)
        parser.add_argument('--alpha', type=float)
        parser.add_argument('--max-ell-rate', type=float)

        group = parser.add_mutually_exclusive_group()
        group.add_argument('--theorem2', action='store_true', help="constants and block length for --gamma, --eps")
        group.add_argument('--theorem3', action='store_true', help="schedule for --g-of-n and --c")
        parser.add_argument('--eps', type=float)
        parser.add_argument('--g-of-n', type=float)
        parser.add_argument('--c', type=float)

    def run(self, *args, **options):
        if options['theorem2']:
            return self.block_length(options)
        if options['theorem3']:
            return self.schedule(options)
        self.codec_report(options)

    def codec_report(self, options):
        source, dist = resolve_source(options)
        codec, D = options['codec'], options['D']
        if options['ell'] is None:
            p = heuristic_params(source, dist, D, codec, n=options['n'], max_ell_rate=options['max_ell_rate'])
        else:
            if options['gamma'] is None or (codec == LLZ and options['alpha'] is None):
                raise self.usage_error("--ell needs --gamma (and --alpha for llz)")
            p = build_params(codec, source, dist, options['n'], options['ell'], options['gamma'], D, 0,
                             alpha=options['alpha'], max_ell_rate=options['max_ell_rate'])

        self.emit(codec=codec, ell=p.ell, gamma=p.gamma, rate=p.rate, d_bar=p.d_bar)
        if codec == LLZ:
            self.emit(alpha=p.alpha, m=p.database_size, cap=p.cap, F=p.length_bits, Pbits=p.pointer_bits)
        else:
            self.emit(W=p.codebook_size, B=p.index_bits, k=p.blocks, total_bits=p.total_bits,
                      bits_per_symbol=p.total_bits / p.n)
            if codec == HYB:
                self.emit(m=p.database_size)
        if codec != GVW:
            self.emit(predicted_match_length=predicted_match_length(p))
        self.emit(**memory_estimate(p))

    def block_length(self, options):
        if options['gamma'] is None or options['eps'] is None:
            raise self.usage_error("--theorem2 needs --gamma and --eps")
        source, dist = resolve_source(options)
        c = theorem2_constants(source, dist, options['D'])
        ell = theorem2_block_length(source, dist, options['D'], options['gamma'], options['eps'], constants=c,
                                    max_ell_rate=options['max_ell_rate'])
        self.emit(d_max=c.d_max, d1=c.d1, K=c.k_const, C=c.c_const, gamma_hat=c.gamma_hat, eps_hat=c.eps_hat,
                  ell=ell, block_excess_bound=block_excess_bound(c, ell, options['gamma']))

    def schedule(self, options):
        if options['g_of_n'] is None or options['c'] is None:
            raise self.usage_error("--theorem3 needs --g-of-n and --c")
        source, dist = resolve_source(options)
        ell, gamma = theorem3_schedule(source, dist, options['D'], options['n'], options['g_of_n'], options['c'])
        self.emit(n=options['n'], ell=ell, gamma=gamma)
