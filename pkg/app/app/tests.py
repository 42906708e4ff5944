"""
Tests for the numeric helpers.
"""
import math

from django.test import SimpleTestCase

from app import calc


class CalcTest(SimpleTestCase):
    "Test the calc module"

    def test_observed_rate(self):
        "Halving h and quartering the error is rate 2"
        self.assertAlmostEqual(calc.observed_rate(4.0, 1.0), 2.0)

    def test_observed_rate_other_ratio(self):
        "Rates use the given refinement ratio"
        self.assertAlmostEqual(calc.observed_rate(27.0, 1.0, ratio=3.0), 3.0)

    def test_observed_rate_undefined(self):
        "Zero errors have no rate"
        self.assertIsNone(calc.observed_rate(1e-3, 0.0))
        self.assertIsNone(calc.observed_rate(0.0, 1e-3))

    def test_drift_slope(self):
        "Slope of |errors| against time"
        times = [0.0, 1.0, 2.0, 3.0]
        errors = [0.0, -2.0, 4.0, -6.0]

        self.assertAlmostEqual(calc.drift_slope(times, errors), 2.0)

    def test_drift_slope_single_point(self):
        "A single sample has zero slope"
        self.assertEqual(calc.drift_slope([1.0], [5.0]), 0.0)

    def test_max_norm(self):
        "Largest absolute entry"
        self.assertEqual(calc.max_norm([[1.0, -3.0], [2.0, 0.5]]), 3.0)
        self.assertEqual(calc.max_norm([]), 0.0)

    def test_grid_steps(self):
        "Spans that are whole multiples of h"
        self.assertEqual(calc.grid_steps(25.0, 0.05), 500)
        self.assertEqual(calc.grid_steps(1000 * math.pi, -math.pi / 10), 10000)

    def test_grid_steps_off_grid(self):
        "Spans that are not whole multiples of h"
        for span, h in ((1.0, 0.3), (0.01, 0.1), (1.0, 0.0)):
            with self.assertRaises(ValueError):
                calc.grid_steps(span, h)
