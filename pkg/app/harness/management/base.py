"""
Shared base for the harness management commands.
"""
import functools
import sys

from django.core.management.base import BaseCommand, CommandError

from core.exceptions import (IntegrationError, ProblemError, QuadratureError,
                             TableauError)
from harness.config import ConfigFileError, read_config
from harness.serializers import RunConfigSerializer

USAGE_ERROR = 1
NUMERICAL_ERROR = 2


def usage_error(parser, message):
    """argparse error hook: malformed flags exit with status 1."""
    if parser.called_from_command_line:
        parser.print_usage(sys.stderr)
        parser.exit(USAGE_ERROR, f'{parser.prog}: error: {message}\n')
    raise CommandError(f'Error: {message}', returncode=USAGE_ERROR)


def format_errors(errors):
    return '; '.join(
        f'{field}: {" ".join(str(message) for message in messages)}'
        for field, messages in errors.items()
    )


class HarnessCommand(BaseCommand):
    """Validate flags and --config into a run configuration, then run it.

    Precedence: settings defaults < --config file < flags.
    """

    serializer_class = RunConfigSerializer

    def create_parser(self, prog_name, subcommand, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)
        parser.error = functools.partial(usage_error, parser)
        return parser

    def add_arguments(self, parser):
        parser.add_argument('--problem', help='Builtin problem name')
        parser.add_argument('--method', help='lim or boris')
        parser.add_argument('--s', type=int, help='LIM stages (order 2s)')
        parser.add_argument('--k', type=int,
                            help='LIM quadrature nodes (default 2s)')
        parser.add_argument('--h', type=float, help='Step size')
        parser.add_argument('--tfinal', dest='t_final', type=float,
                            help='Final time')
        parser.add_argument('--solver',
                            help='fixed_point, blended_magnetic or '
                                 'blended_electric')
        parser.add_argument('--tol', type=float, help='Solver tolerance')
        parser.add_argument('--max-iter', type=int,
                            help='Solver iteration cap')
        parser.add_argument('--constant-b', action='store_true', default=None,
                            help='Use the uniform-field fast path')
        parser.add_argument('--lipschitz', type=float,
                            help='Lipschitz bound for the contraction check')
        parser.add_argument('--record-every', type=int,
                            help='Record every n-th step')
        parser.add_argument('--out', help="Output path, '-' for stdout")
        parser.add_argument('--config', help='key=value configuration file')
        parser.add_argument('--seed', type=int, help='Random seed')

    def load_config(self, options):
        """Merge --config and flags and validate them."""
        serializer = self.serializer_class()
        fields = set(serializer.fields)
        data = {}
        if options.get('config'):
            try:
                data.update(read_config(options['config']))
            except ConfigFileError as exc:
                raise CommandError(str(exc), returncode=USAGE_ERROR)
            unknown = sorted(set(data) - fields)
            if unknown:
                raise CommandError(
                    f'Unknown config keys: {", ".join(unknown)}',
                    returncode=USAGE_ERROR,
                )
        data.update({
            key: value for key, value in options.items()
            if key in fields and value is not None
        })

        serializer = self.serializer_class(data=data)
        if not serializer.is_valid():
            raise CommandError(format_errors(serializer.errors),
                               returncode=USAGE_ERROR)
        return serializer.save()

    def emit(self, text, out):
        """Write text to the --out path, or to stdout for '-'."""
        if out == '-':
            self.stdout.write(text, ending='')
            return
        try:
            with open(out, 'w', newline='', encoding='utf-8') as stream:
                stream.write(text)
        except OSError as exc:
            raise CommandError(f'Cannot write {out}: {exc}',
                               returncode=USAGE_ERROR)
        self.stdout.write(self.style.SUCCESS(f'Wrote {out}'))

    def note(self, config, message):
        """Summary line, kept off stdout while CSV goes there."""
        stream = self.stderr if config.out == '-' else self.stdout
        stream.write(message)

    def handle(self, *args, **options):
        """Entrypoint for command."""
        config = self.load_config(options)
        try:
            self.run(config)
        except (IntegrationError, QuadratureError) as exc:
            raise CommandError(str(exc), returncode=NUMERICAL_ERROR) from exc
        except (ProblemError, TableauError, ValueError) as exc:
            raise CommandError(str(exc), returncode=USAGE_ERROR) from exc

    def run(self, config):
        raise NotImplementedError
