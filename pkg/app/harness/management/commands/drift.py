"""
Django command for the long-time Hamiltonian error series.
"""
from harness.experiments import drift
from harness.management.base import HarnessCommand
from harness.output import drift_csv
from harness.serializers import DriftSerializer


class Command(HarnessCommand):
    """Energy error every --window time units and its drift slope."""

    help = 'Sample H_err over a long run and fit its linear drift.'
    serializer_class = DriftSerializer

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--window', type=float,
                            help='Sampling interval in time units')
        parser.add_argument('--full-horizon', action='store_true',
                            default=None,
                            help='Integrate up to the full drift horizon')

    def run(self, config):
        problem = config.build_problem()
        method = config.method_spec()
        result = drift(problem, method, config.h, config.t_final,
                       config.window, config.solver_config())
        self.emit(drift_csv(result), config.out)
        self.note(config, f'{method.label} drift slope of |H_err|: '
                          f'{result.slope:.6e} per unit time')
