"""
Test the harness management commands.
"""
import os
import tempfile
from io import StringIO
from unittest.mock import patch

import numpy as np
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, tag

from core.exceptions import QuadratureError
from harness.experiments import SymmetryReport


def _run(*args, **kwargs):
    stdout, stderr = StringIO(), StringIO()
    call_command(*args, stdout=stdout, stderr=stderr, **kwargs)
    return stdout.getvalue(), stderr.getvalue()


def _rows(text):
    lines = text.strip().split('\n')
    header = lines[0].split(',')
    values = np.array([[float(cell) for cell in line.split(',')]
                       for line in lines[1:]])
    return header, values


class SimulateCommandTests(SimpleTestCase):
    """Test the simulate command."""

    def test_free_flight_csv(self):
        """Ten steps of free flight give q = q0 + t p0."""
        stdout, _ = _run('simulate', problem='free', h=0.1, t_final=1.0)

        header, values = _rows(stdout)
        self.assertEqual(header, ['t', 'q1', 'q2', 'q3', 'p1', 'p2', 'p3',
                                  'H_err', 'iters'])
        self.assertEqual(values.shape, (11, 9))
        t = values[:, 0]
        p0 = np.array([1.0, 0.5, -0.25])
        np.testing.assert_allclose(values[:, 1:4], np.outer(t, p0),
                                   atol=1e-14)

    def test_writes_file(self):
        """--out writes the CSV to a file."""
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, 'run.csv')

            stdout, _ = _run('simulate', '--problem', 'ex3', '--h', '0.1',
                             '--tfinal', '1', '--record-every', '5',
                             '--out', path)

            with open(path, newline='') as stream:
                header, values = _rows(stream.read())
        self.assertIn('Wrote', stdout)
        self.assertEqual(header[-2:], ['M_err', 'iters'])
        np.testing.assert_allclose(values[:, 0], [0.0, 0.5, 1.0], atol=1e-14)
        self.assertLessEqual(np.max(np.abs(values[:, 7])), 1e-12)

    def test_config_file_and_flag_precedence(self):
        """Flags override --config, which overrides settings."""
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, 'run.cfg')
            with open(path, 'w') as stream:
                stream.write('problem = free\nh = 0.5\ntfinal = 1\n')

            stdout, _ = _run('simulate', '--config', path, '--h', '0.25')

        _, values = _rows(stdout)
        self.assertEqual(list(values[:, 0]), [0.0, 0.25, 0.5, 0.75, 1.0])

    def test_boris(self):
        """The Boris method records zero iterations."""
        stdout, _ = _run('simulate', problem='ex1', method='boris', h=0.01,
                         t_final=0.1)

        _, values = _rows(stdout)
        self.assertTrue(np.all(values[:, -1] == 0))

    def test_invalid_config_exits_1(self):
        """Validation errors are usage errors."""
        with self.assertRaises(CommandError) as context:
            _run('simulate', problem='free', h=0.3, t_final=1.0)

        self.assertEqual(context.exception.returncode, 1)
        self.assertIn('t_final', str(context.exception))

    def test_malformed_flag_exits_1(self):
        """Unparseable flag values are usage errors."""
        with self.assertRaises(CommandError) as context:
            _run('simulate', '--s', 'two')

        self.assertEqual(context.exception.returncode, 1)

    def test_unknown_config_key_exits_1(self):
        """Keys the command does not know are rejected."""
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, 'run.cfg')
            with open(path, 'w') as stream:
                stream.write('stepsize = 0.1\n')

            with self.assertRaises(CommandError) as context:
                _run('simulate', config=path)

        self.assertEqual(context.exception.returncode, 1)
        self.assertIn('stepsize', str(context.exception))

    def test_solver_failure_exits_2(self):
        """Non-convergence is a numerical error naming the step."""
        with self.assertRaises(CommandError) as context:
            _run('simulate', problem='ex1', h=0.1, t_final=1.0,
                 solver='fixed_point', max_iter=1)

        self.assertEqual(context.exception.returncode, 2)
        self.assertIn('step 1', str(context.exception))

    @patch('harness.management.commands.simulate.run_simulation')
    def test_quadrature_failure_exits_2(self, patched_run):
        """Node refinement failures are numerical errors."""
        patched_run.side_effect = QuadratureError('no convergence')

        with self.assertRaises(CommandError) as context:
            _run('simulate', problem='free', h=0.1, t_final=1.0)

        self.assertEqual(context.exception.returncode, 2)

    def test_constant_field_on_varying_field_exits_1(self):
        """constant_B needs a uniform field."""
        with self.assertRaises(CommandError) as context:
            _run('simulate', problem='ex1', h=0.1, t_final=1.0,
                 constant_b=True)

        self.assertEqual(context.exception.returncode, 1)

    def test_constant_field(self):
        """The uniform builtin runs on the constant-B path."""
        stdout, _ = _run('simulate', problem='uniform', h=0.05, t_final=1.0,
                         constant_b=True)

        _, values = _rows(stdout)
        self.assertLessEqual(np.max(np.abs(values[:, 7])), 1e-12)


class ConvergeCommandTests(SimpleTestCase):
    """Test the converge command."""

    def test_table(self):
        """The table lists every method and refinement."""
        stdout, _ = _run('converge', problem='free', methods='boris,lim(4,2)',
                         n_list='1,2', h0=0.1, t_final=1.0)

        self.assertIn('Boris', stdout)
        self.assertIn('LIM(4,2)', stdout)
        self.assertIn('***', stdout)

    def test_csv_file(self):
        """--out also writes the table as CSV."""
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, 'converge.csv')

            _run('converge', problem='ex3', methods='lim(4,2)', n_list='1',
                 h0=0.5, t_final=1.0, out=path)

            with open(path) as stream:
                lines = stream.read().splitlines()
        self.assertEqual(lines[0],
                         'method,n,h,e_y,rate_y,e_H,rate_H,e_M,seconds')
        self.assertTrue(lines[1].startswith('LIM(4,2),1,'))

    def test_efficiency_columns(self):
        """Every method on ex1 gets an error and a timing."""
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, 'efficiency.csv')

            _run('converge', problem='ex1',
                 methods='boris,lim(4,2),lim(6,3),lim(8,4)', n_list='1',
                 h0=0.05, t_final=1.0, out=path)

            with open(path) as stream:
                lines = stream.read().splitlines()
        self.assertEqual(lines[0], 'method,n,h,e_y,rate_y,e_H,rate_H,seconds')
        self.assertEqual([line.split(',')[0] for line in lines[1:]],
                         ['Boris', 'LIM(4,2)', 'LIM(6,3)', 'LIM(8,4)'])
        for line in lines[1:]:
            self.assertGreaterEqual(float(line.split(',')[-1]), 0.0)

    def test_reference_failure_exits_2(self):
        """A failed reference self-check is a numerical error."""
        with patch('harness.experiments.max_norm', side_effect=[1.0, 0.0]):
            with self.assertRaises(CommandError) as context:
                _run('converge', problem='free', methods='boris', n_list='1',
                     h0=0.5, t_final=1.0)

        self.assertEqual(context.exception.returncode, 2)


class DriftCommandTests(SimpleTestCase):
    """Test the drift command."""

    def test_series_and_slope(self):
        """CSV on stdout, slope on stderr."""
        stdout, stderr = _run('drift', problem='ex1', method='lim', s=2,
                              h=0.01, t_final=2.0, window=0.5,
                              solver='blended_magnetic')

        header, values = _rows(stdout)
        self.assertEqual(header, ['t', 'H_err'])
        np.testing.assert_allclose(values[:, 0], [0.0, 0.5, 1.0, 1.5, 2.0],
                                   atol=1e-12)
        self.assertLessEqual(np.max(np.abs(values[:, 1])), 1e-12)
        self.assertIn('LIM(4,2) drift slope', stderr)


class SymmetryCommandTests(SimpleTestCase):
    """Test the symmetry command."""

    def test_pass(self):
        """Boris passes the round-trip check."""
        stdout, _ = _run('symmetry', problem='ex1', method='boris', h=0.01,
                         trials=3, seed=4)

        self.assertIn('trial   3', stdout)
        self.assertIn('PASS', stdout)

    @patch('harness.management.commands.symmetry.symmetry')
    def test_fail_exits_2(self, patched_symmetry):
        """A failing round trip exits with status 2."""
        patched_symmetry.return_value = SymmetryReport((1e-3,), 1e-12)

        with self.assertRaises(CommandError) as context:
            _run('symmetry', problem='ex2', h=0.05, trials=1)

        self.assertEqual(context.exception.returncode, 2)


@tag('slow')
class EnergyCommandTests(SimpleTestCase):
    """Energy behaviour through the command line."""

    def test_lim_conserves_energy(self):
        """ex1, LIM(4,2), h = 0.01 up to t = 100."""
        stdout, _ = _run('simulate', problem='ex1', method='lim', s=2, k=4,
                         h=0.01, t_final=100.0, record_every=100)

        _, values = _rows(stdout)
        self.assertLessEqual(np.max(np.abs(values[:, 7])), 1e-12)

    def test_boris_drifts(self):
        """ex1, Boris, h = 0.01: the error at t = 1000 exceeds t = 100."""
        stdout, _ = _run('simulate', problem='ex1', method='boris', h=0.01,
                         t_final=1000.0, record_every=10000)

        _, values = _rows(stdout)
        self.assertEqual(list(values[:, 0].round(6)),
                         [float(t) for t in range(0, 1001, 100)])
        self.assertGreater(abs(values[-1, 7]), abs(values[1, 7]))
