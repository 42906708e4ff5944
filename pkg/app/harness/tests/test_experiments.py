"""
Tests for the harness experiments.
"""
import math

import numpy as np
from django.test import SimpleTestCase, override_settings, tag

from core.exceptions import ReferenceCheckError
from core.problems import builtin_problem
from harness import experiments
from harness.experiments import BORIS, LIM, MethodSpec
from integrator.lim import (BLENDED_ELECTRIC, BLENDED_MAGNETIC, FIXED_POINT,
                            SolverConfig)

BLENDED = SolverConfig(kind=BLENDED_MAGNETIC)


class ParseMethodTests(SimpleTestCase):
    """Test parse_method."""

    def test_names(self):
        """boris, lim with s and k, and lim(k,s)."""
        self.assertEqual(experiments.parse_method('Boris'), MethodSpec(BORIS))
        self.assertEqual(experiments.parse_method('lim', s=3),
                         MethodSpec(LIM, 6, 3))
        self.assertEqual(experiments.parse_method('lim(5, 2)'),
                         MethodSpec(LIM, 5, 2))
        self.assertEqual(MethodSpec(LIM, 5, 2).label, 'LIM(5,2)')

    def test_invalid(self):
        """Unknown methods and bare lim without s are rejected."""
        for text in ('rk4', 'lim(4)', 'lim'):
            with self.assertRaises(ValueError):
                experiments.parse_method(text)


class ReferenceTests(SimpleTestCase):
    """Test generate_reference."""

    def test_free_flight_reference(self):
        """The reference of free flight is the straight line."""
        problem = builtin_problem('free')

        reference = experiments.generate_reference(problem, 1.0, 0.25)

        state0 = problem.initial_state
        np.testing.assert_allclose(reference.times, [0, 0.25, 0.5, 0.75, 1])
        expected = np.array([
            np.concatenate([state0.q + t * state0.p, state0.p])
            for t in reference.times
        ])
        np.testing.assert_allclose(reference.states, expected, atol=1e-14)
        self.assertAlmostEqual(reference.h, 0.25 / 8)

    def test_finest_step_sets_reference_step(self):
        """h_ref is the finest experiment step over refine."""
        problem = builtin_problem('free')

        reference = experiments.generate_reference(problem, 1.0, 0.5,
                                                   h_finest=0.125, refine=2)

        self.assertAlmostEqual(reference.h, 0.0625)
        self.assertEqual(reference.states.shape, (3, 6))

    def test_self_check_failure(self):
        """A reference that moves under step halving is rejected."""
        problem = builtin_problem('ex2')

        with self.assertRaises(ReferenceCheckError):
            experiments.generate_reference(problem, 1.0, 0.1, k=4, s=2,
                                           refine=1, solver=BLENDED)


class ConvergeTests(SimpleTestCase):
    """Test converge."""

    def test_exact_problem(self):
        """Free flight is reproduced to round-off by every method."""
        problem = builtin_problem('free')
        methods = [MethodSpec(BORIS), MethodSpec(LIM, 4, 2)]

        rows = experiments.converge(problem, methods, 0.1, [1], 1.0)

        self.assertEqual([row.method for row in rows], ['Boris', 'LIM(4,2)'])
        for row in rows:
            self.assertLessEqual(row.e_y, 1e-14)
            self.assertIsNone(row.rate_y)

    @override_settings(HARNESS_WORKERS=2)
    def test_rates(self):
        """Observed rates are close to 2 for Boris and 4 for LIM(4,2)."""
        problem = builtin_problem('ex2')
        methods = [MethodSpec(BORIS), MethodSpec(LIM, 4, 2)]

        rows = experiments.converge(problem, methods, 0.1, [2, 1], 1.0,
                                    solver=BLENDED)

        self.assertEqual([(row.method, row.n) for row in rows], [
            ('Boris', 1), ('Boris', 2), ('LIM(4,2)', 1), ('LIM(4,2)', 2)])
        boris_fine, lim_coarse, lim_fine = rows[1], rows[2], rows[3]
        self.assertAlmostEqual(boris_fine.rate_y, 2.0, delta=0.2)
        self.assertIsNone(lim_coarse.rate_y)
        self.assertAlmostEqual(lim_fine.rate_y, 4.0, delta=0.4)
        self.assertLessEqual(lim_fine.e_H, 1e-13)
        self.assertEqual(lim_fine.h, 0.05)
        self.assertGreaterEqual(lim_fine.elapsed, 0.0)

    def test_invariant_columns(self):
        """Problems with extra invariants report their errors."""
        problem = builtin_problem('ex3')

        rows = experiments.converge(problem, [MethodSpec(LIM, 4, 2)],
                                    math.pi / 10, [1], math.pi,
                                    solver=BLENDED)

        self.assertIn('M', rows[0].invariant_errors)
        self.assertLess(rows[0].invariant_errors['M'], 1e-3)


class DriftTests(SimpleTestCase):
    """Test drift."""

    def test_lim_has_no_drift(self):
        """LIM(4,2) on ex1 has a round-off level slope."""
        problem = builtin_problem('ex1')

        result = experiments.drift(problem, MethodSpec(LIM, 4, 2), 0.01,
                                   10.0, 1.0, BLENDED)

        self.assertEqual(len(result.times), 11)
        self.assertAlmostEqual(result.times[-1], 10.0, places=12)
        self.assertLess(abs(result.slope), 1e-13)

    def test_boris_energy_error(self):
        """Boris on ex2 has a visible, non-monotone energy error."""
        problem = builtin_problem('ex2')

        result = experiments.drift(problem, MethodSpec(BORIS), 0.05, 25.0,
                                   0.5)

        self.assertGreater(np.max(np.abs(result.errors)), 1e-6)
        steps = np.diff(result.errors)
        self.assertTrue(np.any(steps > 0) and np.any(steps < 0))


class SymmetryTests(SimpleTestCase):
    """Test symmetry."""

    def test_lim_round_trips(self):
        """LIM(6,3) on ex2 returns to every start state."""
        problem = builtin_problem('ex2')

        report = experiments.symmetry(problem, MethodSpec(LIM, 6, 3), 0.05,
                                      20, seed=1, solver=BLENDED)

        self.assertEqual(len(report.errors), 20)
        self.assertAlmostEqual(report.tolerance / 1e-12, 1.0)
        self.assertTrue(report.passed)

    def test_boris_round_trips(self):
        """Boris is symmetric by construction."""
        problem = builtin_problem('ex1')

        report = experiments.symmetry(problem, MethodSpec(BORIS), 0.01, 10)

        self.assertTrue(report.passed)

    def test_free_flight(self):
        """Zero fields round trip to round-off."""
        problem = builtin_problem('free')

        report = experiments.symmetry(problem, MethodSpec(LIM, 4, 2), 0.1, 5)

        self.assertLessEqual(report.max_error, 1e-15)

    def test_all_builtins_and_solvers(self):
        """s in {2, 3}, every solver kind, every builtin."""
        for name in ('ex1', 'ex2', 'ex3', 'free', 'uniform'):
            problem = builtin_problem(name)
            for s in (2, 3):
                for kind in (FIXED_POINT, BLENDED_MAGNETIC,
                             BLENDED_ELECTRIC):
                    report = experiments.symmetry(
                        problem, MethodSpec(LIM, 2 * s, s), 0.05, 20,
                        solver=SolverConfig(kind=kind))

                    self.assertTrue(report.passed, (name, s, kind))

    def test_seed_determines_trials(self):
        """The same seed gives the same report."""
        problem = builtin_problem('ex1')
        method = MethodSpec(BORIS)

        first = experiments.symmetry(problem, method, 0.01, 3, seed=5)
        second = experiments.symmetry(problem, method, 0.01, 3, seed=5)

        self.assertEqual(first.errors, second.errors)


@tag('slow')
class ConvergenceTableTests(SimpleTestCase):
    """Maximum errors on ex2 over [0, 25] with h = 0.05 / n."""

    BORIS_ERRORS = (3.30, 8.67e-1, 2.18e-1, 5.46e-2, 1.37e-2)
    LIM42_ERRORS = (1.86e-2, 1.17e-3, 7.30e-5, 4.56e-6, 2.85e-7)

    def test_table(self):
        problem = builtin_problem('ex2')
        reference = experiments.generate_reference(
            problem, 25.0, 0.05, h_finest=0.05 / 16, tolerance=1e-10,
            solver=BLENDED)
        methods = [MethodSpec(BORIS), MethodSpec(LIM, 4, 2),
                   MethodSpec(LIM, 6, 3)]

        rows = experiments.converge(problem, methods, 0.05, [1, 2, 4, 8, 16],
                                    25.0, solver=BLENDED,
                                    reference=reference)

        boris_rows, lim42_rows, lim63_rows = rows[:5], rows[5:10], rows[10:]
        for row, expected in zip(boris_rows, self.BORIS_ERRORS):
            self.assertLess(max(row.e_y / expected, expected / row.e_y), 3)
        for row in boris_rows[1:]:
            self.assertAlmostEqual(row.rate_y, 2.0, delta=0.2)
        for row, expected in zip(lim42_rows, self.LIM42_ERRORS):
            self.assertLess(max(row.e_y / expected, expected / row.e_y), 3)
            self.assertLessEqual(row.e_H, 1e-12)
        for row in lim42_rows[1:]:
            self.assertAlmostEqual(row.rate_y, 4.0, delta=0.25)
        self.assertLess(lim63_rows[0].e_y, 6e-5)
        self.assertAlmostEqual(lim63_rows[1].rate_y, 6.0, delta=0.3)


@tag('slow')
class InvariantTableTests(SimpleTestCase):
    """ex3 with h = pi/10 over [0, 1000 pi]."""

    def test_table(self):
        problem = builtin_problem('ex3')
        h = math.pi / 10
        t_final = 1000 * math.pi
        reference = experiments.generate_reference(
            problem, t_final, h, tolerance=1e-9, solver=BLENDED)

        rows = experiments.converge(
            problem,
            [MethodSpec(BORIS)] + [MethodSpec(LIM, 2 * s, s)
                                   for s in range(2, 6)],
            h, [1], t_final, solver=BLENDED, reference=reference)

        boris_row, lim42, lim63 = rows[0], rows[1], rows[2]
        self.assertLess(max(boris_row.e_H / 1.1461e-3,
                            1.1461e-3 / boris_row.e_H), 10)
        self.assertLess(max(lim42.e_y / 2.4553e-2, 2.4553e-2 / lim42.e_y), 3)
        self.assertLessEqual(lim42.invariant_errors['M'], 1e-5)
        self.assertLess(max(lim63.e_y / 3.2533e-5, 3.2533e-5 / lim63.e_y), 3)
        self.assertLessEqual(lim63.invariant_errors['M'], 3e-8)
        for row in rows[1:]:
            self.assertLessEqual(row.e_H, 1e-12)
