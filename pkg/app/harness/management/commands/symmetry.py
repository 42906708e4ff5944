"""
Django command checking forward/backward round trips.
"""
from django.core.management.base import CommandError

from harness.experiments import symmetry
from harness.management.base import NUMERICAL_ERROR, HarnessCommand
from harness.serializers import SymmetrySerializer


class Command(HarnessCommand):
    """Step forward with h and back with -h from random states."""

    help = 'Round-trip symmetry check near the builtin initial state.'
    serializer_class = SymmetrySerializer

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--trials', type=int,
                            help='Number of random states')

    def run(self, config):
        problem = config.build_problem()
        method = config.method_spec()
        report = symmetry(problem, method, config.h, config.trials,
                          seed=config.seed, solver=config.solver_config())
        for trial, error in enumerate(report.errors, start=1):
            self.stdout.write(
                f'trial {trial:3d}: round-trip error {error:.3e}')
        summary = (f'{method.label} on {problem.label}, h={config.h:g}: '
                   f'max error {report.max_error:.3e}, '
                   f'tolerance {report.tolerance:.1e}')
        if not report.passed:
            self.stdout.write(self.style.ERROR(f'FAIL {summary}'))
            raise CommandError(f'Round trip exceeds tolerance: {summary}',
                               returncode=NUMERICAL_ERROR)
        self.stdout.write(self.style.SUCCESS(f'PASS {summary}'))
