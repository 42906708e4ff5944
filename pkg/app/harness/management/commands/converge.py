"""
Django command for convergence-order studies against a reference.
"""
from harness.experiments import converge
from harness.management.base import HarnessCommand
from harness.output import converge_csv, converge_table
from harness.serializers import ConvergeSerializer


class Command(HarnessCommand):
    """Errors and observed rates on the grids h0 / n."""

    help = ('Compare methods against a LIM(12,6) reference for step sizes '
            'h0/n. The table goes to stdout; --out also writes it as CSV.')
    serializer_class = ConvergeSerializer

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--methods',
                            help='Comma list of boris and lim(k,s)')
        parser.add_argument('--n-list', help='Comma list of refinements n')
        parser.add_argument('--h0', dest='h', type=float,
                            help='Coarsest step size')

    def run(self, config):
        problem = config.build_problem()
        self.stdout.write(
            f'{problem.label} on [0, {config.t_final:g}], '
            f'h = {config.h:g}/n, n = {list(config.n_list)}'
        )
        rows = converge(problem, config.methods, config.h, config.n_list,
                        config.t_final, config.solver_config())
        invariants = list(problem.extra_invariants)
        self.stdout.write(converge_table(rows, invariants))
        if config.out != '-':
            self.emit(converge_csv(rows, invariants), config.out)
