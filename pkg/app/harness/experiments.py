"""
Experiments behind the harness commands.
"""
import logging
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Optional, Tuple

import numpy as np
from django.conf import settings

from app.calc import drift_slope, grid_steps, max_norm, observed_rate
from core.exceptions import ReferenceCheckError
from core.legendre import build_tableau
from core.problems import State, sample_points
from integrator.boris import boris_integrate, boris_step
from integrator.lim import LimIntegrator, SolverConfig, integrate
from integrator.records import max_abs

logger = logging.getLogger(__name__)

BORIS = 'boris'
LIM = 'lim'
METHODS = (LIM, BORIS)

_METHOD_RE = re.compile(r'^lim\(\s*(\d+)\s*,\s*(\d+)\s*\)$')


@dataclass(frozen=True)
class MethodSpec:
    """An integrator choice: Boris or LIM(k, s)."""

    name: str
    k: Optional[int] = None
    s: Optional[int] = None

    @property
    def label(self):
        if self.name == BORIS:
            return 'Boris'
        return f'LIM({self.k},{self.s})'

    def tableau(self):
        return build_tableau(self.k, self.s)

    def integrate(self, problem, state0, h, n_steps, solver=None,
                  observers=(), record_every=1):
        if self.name == BORIS:
            return boris_integrate(problem, state0, h, n_steps, observers,
                                   record_every)
        return integrate(self.tableau(), problem, state0, h, n_steps,
                         solver, observers, record_every)

    def stepper(self, problem, solver=None):
        """One-step map state, h -> state with a cold-started solver."""
        if self.name == BORIS:
            return lambda state, h: boris_step(problem, state, h)
        integrator = LimIntegrator(self.tableau(), problem, solver)
        return lambda state, h: integrator.step(state, h)[0]


def parse_method(text, s=None, k=None):
    """Parse 'boris', 'lim' (with s and k) or 'lim(k,s)'."""
    text = text.strip().lower()
    if text == BORIS:
        return MethodSpec(BORIS)
    if text == LIM:
        if s is None:
            raise ValueError('lim needs s (and optionally k)')
        return MethodSpec(LIM, k if k is not None else 2 * s, s)
    match = _METHOD_RE.match(text)
    if not match:
        raise ValueError(
            f'Unknown method {text!r}; expected boris, lim or lim(k,s)'
        )
    k, s = int(match.group(1)), int(match.group(2))
    build_tableau(k, s)
    return MethodSpec(LIM, k, s)


def _stack(records):
    return np.array([np.concatenate([r.q, r.p]) for r in records])


def run_simulation(config):
    """Run one configured simulation; returns the problem and its records."""
    problem = config.build_problem()
    records = config.method_spec().integrate(
        problem, problem.initial_state, config.h, config.n_steps,
        config.solver_config(), record_every=config.record_every)
    return problem, records


@dataclass(frozen=True)
class Reference:
    """Reference states on the grid t_j = j * h_grid."""

    times: np.ndarray
    states: np.ndarray
    h: float
    self_check: float


def generate_reference(problem, t_final, h_grid, h_finest=None, k=None,
                       s=None, refine=None, tolerance=None, solver=None):
    """High-order reference trajectory on a grid of spacing h_grid.

    Integrates LIM(k, s) with h_finest / refine and accepts the result
    when halving that step changes no state by more than
    tolerance * (1 + max |y|).
    """
    defaults = settings.HARNESS_REFERENCE
    k = k or defaults['k']
    s = s or defaults['s']
    refine = refine or defaults['refine']
    tolerance = defaults['tolerance'] if tolerance is None else tolerance
    h_finest = h_grid if h_finest is None else h_finest

    n_grid = grid_steps(t_final, h_grid)
    substeps = grid_steps(abs(h_grid), h_finest) * refine
    h_ref = h_grid / substeps
    tableau = build_tableau(k, s)
    state0 = problem.initial_state

    logger.info('Reference for %s: %s, h=%g, %d steps', problem.label,
                tableau.label, h_ref, n_grid * substeps)
    states = _stack(integrate(tableau, problem, state0, h_ref,
                              n_grid * substeps, solver,
                              record_every=substeps))
    halved = _stack(integrate(tableau, problem, state0, h_ref / 2,
                              2 * n_grid * substeps, solver,
                              record_every=2 * substeps))
    change = max_norm(states - halved)
    if change > tolerance * (1.0 + max_norm(states)):
        raise ReferenceCheckError(
            f'reference for {problem.label} moved by {change:.3e} when '
            f'halving h={h_ref:g}; expected at most {tolerance:.1e}'
        )
    times = state0.t + h_grid * np.arange(n_grid + 1)
    return Reference(times, states, h_ref, change)


@dataclass
class ConvergeRow:
    """Errors of one method at one refinement n."""

    method: str
    n: int
    h: float
    e_y: float
    e_H: float
    invariant_errors: Mapping[str, float] = field(default_factory=dict)
    elapsed: float = 0.0
    rate_y: Optional[float] = None
    rate_H: Optional[float] = None


def _converge_point(problem, method, h0, n, n_grid, solver, reference):
    h = h0 / n
    started = time.perf_counter()
    records = method.integrate(problem, problem.initial_state, h,
                               n_grid * n, solver, record_every=n)
    elapsed = time.perf_counter() - started
    return ConvergeRow(
        method=method.label,
        n=n,
        h=h,
        e_y=max_norm(_stack(records) - reference.states),
        e_H=max_abs(records, 'H_err'),
        invariant_errors={
            name: max_abs(records, name) for name in problem.extra_invariants
        },
        elapsed=elapsed,
    )


def converge(problem, methods, h0, n_list, t_final, solver=None,
             reference=None, workers=None):
    """Errors and observed rates of every method on the grid h0 / n.

    The (method, n) runs are independent and may run concurrently;
    rows come back grouped by method in n order.
    """
    n_list = sorted(set(n_list))
    n_grid = grid_steps(t_final, h0)
    if reference is None:
        reference = generate_reference(problem, t_final, h0,
                                       h_finest=h0 / n_list[-1],
                                       solver=solver)
    workers = workers or settings.HARNESS_WORKERS

    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(_converge_point, problem, method, h0, n, n_grid,
                        solver, reference)
            for method in methods for n in n_list
        ]
        rows = [future.result() for future in futures]

    for previous, row in zip(rows, rows[1:]):
        if previous.method != row.method:
            continue
        ratio = row.n / previous.n
        row.rate_y = observed_rate(previous.e_y, row.e_y, ratio)
        row.rate_H = observed_rate(previous.e_H, row.e_H, ratio)
    return rows


@dataclass(frozen=True)
class DriftResult:
    times: np.ndarray
    errors: np.ndarray
    slope: float


def drift(problem, method, h, t_final, window, solver=None):
    """Energy error sampled every window time units, with its slope."""
    records = method.integrate(problem, problem.initial_state, h,
                               grid_steps(t_final, h), solver,
                               record_every=grid_steps(window, h))
    times = np.array([record.t for record in records])
    errors = np.array([record.H_err for record in records])
    return DriftResult(times, errors, drift_slope(times, errors))


@dataclass(frozen=True)
class SymmetryReport:
    errors: Tuple[float, ...]
    tolerance: float

    @property
    def max_error(self):
        return max(self.errors) if self.errors else 0.0

    @property
    def passed(self):
        return self.max_error <= self.tolerance


def round_trip_error(step, state, h):
    """Max-norm distance between state and one step forward then back."""
    back = step(step(state, h), -h)
    return max_norm(back.as_vector() - state.as_vector())


def symmetry(problem, method, h, trials, seed=0, radius=None, solver=None):
    """Forward/backward round trips from random states near the start."""
    defaults = settings.HARNESS_SYMMETRY
    radius = defaults['radius'] if radius is None else radius
    if method.name == BORIS:
        tolerance = defaults['boris_tolerance']
    else:
        tolerance = 100 * (solver or SolverConfig()).tol

    rng = np.random.default_rng(seed)
    start = problem.initial_state
    qs = sample_points(start.q, trials, radius, rng)
    ps = sample_points(start.p, trials, radius, rng)
    step = method.stepper(problem, solver)
    errors = tuple(
        round_trip_error(step, State(start.t, q, p), h)
        for q, p in zip(qs, ps)
    )
    return SymmetryReport(errors, tolerance)
