"""
LIM(k, s) one-step method: the psi-system, its solvers and the
integration loop.

The block unknown psi is stored as an (s, m) array whose rows are the
blocks psi_0 .. psi_{s-1}, so (A (x) I) psi is A @ psi.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from core.exceptions import (ConvergenceError, NonFiniteError, ProblemError,
                             SingularPreconditionerError)
from core.legendre import step_bound
from core.problems import State, apply_magnetic
from integrator.records import run_steps

logger = logging.getLogger(__name__)

FIXED_POINT = 'fixed_point'
BLENDED_MAGNETIC = 'blended_magnetic'
BLENDED_ELECTRIC = 'blended_electric'
SOLVER_KINDS = (FIXED_POINT, BLENDED_MAGNETIC, BLENDED_ELECTRIC)

DEFAULT_TOL = 1e-14
DEFAULT_MAX_ITER = 100
UNIFORM_FIELD_TOL = 1e-12
SINGULAR_COND = 1.0 / np.finfo(float).eps


@dataclass(frozen=True)
class SolverConfig:
    """Nonlinear solver settings for one run."""

    kind: str = FIXED_POINT
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    constant_B: bool = False
    lipschitz: Optional[float] = None

    def __post_init__(self):
        if self.kind not in SOLVER_KINDS:
            raise ValueError(
                f'Unknown solver {self.kind!r}; expected one of '
                f'{", ".join(SOLVER_KINDS)}'
            )
        if not self.tol > 0:
            raise ValueError(
                f'Solver tolerance must be positive, got {self.tol}')
        if self.max_iter < 1:
            raise ValueError(
                f'max_iter must be at least 1, got {self.max_iter}'
            )


@dataclass(frozen=True)
class StepReport:
    """Outcome of the nonlinear solve of one step."""

    iterations: int
    residual_norm: float
    converged: bool
    psi: Optional[np.ndarray] = None
    increments: tuple = ()


def _norm(values):
    return float(np.max(np.abs(values))) if np.size(values) else 0.0


def _initial_psi(tableau, problem, psi0):
    if psi0 is None:
        return np.zeros((tableau.s, problem.dim))
    psi = np.array(psi0, dtype=float)
    if psi.shape != (tableau.s, problem.dim):
        raise ProblemError(
            f'psi must have shape {(tableau.s, problem.dim)}, got {psi.shape}'
        )
    return psi


def psi_map(tableau, problem, q0, p0, h, psi, uniform_B=None):
    """Right-hand side of the psi-system (fixed-point map).

    With uniform_B the magnetic block reduces to
    e1 (x) B p0 + h X_s (x) B psi.
    """
    q0 = np.asarray(q0, dtype=float)
    p0 = np.asarray(p0, dtype=float)
    h2 = h * h
    if uniform_B is None:
        q_inner = (q0 + h * tableau.inner_rule.nodes[:, None] * p0
                   + h2 * tableau.IhatX @ psi)
        p_inner = p0 + h * tableau.Ihat @ psi
        magnetic = tableau.Phat_w @ apply_magnetic(problem, q_inner, p_inner)
    else:
        magnetic = (np.outer(tableau.e1, uniform_B @ p0)
                    + h * tableau.Xs @ psi @ uniform_B.T)
    q_outer = (q0 + h * tableau.outer_rule.nodes[:, None] * p0
               + h2 * tableau.ImatX @ psi)
    electric = tableau.Pmat_w @ problem.grad_U(q_outer)
    update = magnetic - electric
    if not np.all(np.isfinite(update)):
        raise NonFiniteError('field evaluation returned non-finite values')
    return update


def psi_residual(tableau, problem, q0, p0, h, psi, uniform_B=None):
    """F(psi) = psi - (magnetic projection) + (electric projection)."""
    psi = np.asarray(psi, dtype=float)
    return psi - psi_map(tableau, problem, q0, p0, h, psi, uniform_B)


def _converged(increment, psi, tol):
    return increment <= tol * (1.0 + _norm(psi))


def _not_converged(kind, config, increments):
    last = increments[-1] if increments else float('nan')
    return ConvergenceError(
        f'{kind} iteration did not converge in {config.max_iter} iterations '
        f'(last increment {last:.3e}); the step size is likely too large',
        iterations=len(increments),
        residual_norm=last,
    )


def solve_fixed_point(tableau, problem, q0, p0, h, config, psi0=None,
                      uniform_B=None):
    """Solve the psi-system by plain fixed-point iteration."""
    psi = _initial_psi(tableau, problem, psi0)
    increments = []
    for iteration in range(1, config.max_iter + 1):
        updated = psi_map(tableau, problem, q0, p0, h, psi, uniform_B)
        increment = _norm(updated - psi)
        increments.append(increment)
        psi = updated
        if _converged(increment, psi, config.tol):
            return psi, StepReport(iteration, increment, True, psi,
                                   tuple(increments))
    raise _not_converged(FIXED_POINT, config, increments)


def factor_preconditioner(matrix, name):
    """LU-factor an m x m preconditioner, rejecting singular matrices."""
    if not np.all(np.isfinite(matrix)):
        raise NonFiniteError(f'{name} matrix has non-finite entries')
    if np.linalg.cond(matrix) > SINGULAR_COND:
        raise SingularPreconditionerError(
            f'{name} matrix is singular to working precision; '
            'try the fixed_point solver'
        )
    return lu_factor(matrix)


def magnetic_preconditioner(tableau, problem, q0, h, uniform_B=None):
    """Factor of I - h rho_s B(q0), the inverse of Theta."""
    matrix = problem.magnetic_matrix(q0) if uniform_B is None else uniform_B
    return factor_preconditioner(
        np.eye(problem.dim) - h * tableau.rho_s * matrix, 'Theta')


def electric_preconditioner(tableau, problem, q0, h):
    """Factor of I + h^2 rho_s^2 Hess U(q0), the inverse of Theta_1."""
    hessian = problem.hessian(q0)
    return factor_preconditioner(
        np.eye(problem.dim) + (h * tableau.rho_s) ** 2 * hessian, 'Theta_1')


def _blended(kind, tableau, problem, q0, p0, h, config, psi0, factor,
             weight, uniform_B):
    """Blended iteration with Theta given by its LU factor."""
    def theta(blocks):
        return lu_solve(factor, blocks.T).T

    psi = _initial_psi(tableau, problem, psi0)
    increments = []
    for iteration in range(1, config.max_iter + 1):
        b = -psi_residual(tableau, problem, q0, p0, h, psi, uniform_B)
        b1 = weight @ b
        delta = theta(b1 + theta(b - b1))
        psi = psi + delta
        increment = _norm(delta)
        increments.append(increment)
        if _converged(increment, psi, config.tol):
            return psi, StepReport(iteration, increment, True, psi,
                                   tuple(increments))
    raise _not_converged(kind, config, increments)


def solve_blended_magnetic(tableau, problem, q0, p0, h, config, psi0=None,
                           uniform_B=None, factor=None):
    """Blended iteration preconditioned by Theta = (I - h rho_s B)^-1."""
    if factor is None:
        factor = magnetic_preconditioner(tableau, problem, q0, h, uniform_B)
    weight = tableau.rho_s * tableau.Xs_inv
    return _blended(BLENDED_MAGNETIC, tableau, problem, q0, p0, h, config,
                    psi0, factor, weight, uniform_B)


def solve_blended_electric(tableau, problem, q0, p0, h, config, psi0=None,
                           uniform_B=None, factor=None):
    """Blended iteration preconditioned by Theta_1, for strong E fields."""
    if factor is None:
        factor = electric_preconditioner(tableau, problem, q0, h)
    weight = tableau.rho_s ** 2 * tableau.Xs_inv2
    return _blended(BLENDED_ELECTRIC, tableau, problem, q0, p0, h, config,
                    psi0, factor, weight, uniform_B)


SOLVERS = {
    FIXED_POINT: solve_fixed_point,
    BLENDED_MAGNETIC: solve_blended_magnetic,
    BLENDED_ELECTRIC: solve_blended_electric,
}


def advance(q0, p0, h, psi):
    """New (q1, p1) from the solved blocks psi_0 and psi_1."""
    q1 = q0 + h * p0 + 0.5 * h * h * (psi[0] - psi[1] / np.sqrt(3.0))
    p1 = p0 + h * psi[0]
    return q1, p1


class LimIntegrator:
    """LIM(k, s) applied to one problem with one solver configuration.

    Holds the per-run scratch: the uniform magnetic matrix and, for the
    blended magnetic solver, the factored Theta of each step size.
    """

    def __init__(self, tableau, problem, config=None):
        self.tableau = tableau
        self.problem = problem
        self.config = config or SolverConfig()
        self._uniform_B = None
        self._theta = {}

    def uniform_matrix(self, q0):
        """The constant magnetic matrix, checked for uniformity once."""
        if self._uniform_B is None:
            matrix = self.problem.magnetic_matrix(q0)
            shifted = self.problem.magnetic_matrix(np.asarray(q0) + 1.0)
            if np.max(np.abs(matrix - shifted)) > UNIFORM_FIELD_TOL * max(
                    1.0, np.max(np.abs(matrix))):
                raise ProblemError(
                    f'constant_B requires a uniform field; '
                    f'{self.problem.label} varies with q'
                )
            self._uniform_B = matrix
        return self._uniform_B

    def solve(self, q0, p0, h, psi0=None):
        """Solve the psi-system for one step with the configured solver."""
        kind = self.config.kind
        kwargs = {}
        if self.config.constant_B:
            kwargs['uniform_B'] = self.uniform_matrix(q0)
            if kind == BLENDED_MAGNETIC:
                if h not in self._theta:
                    self._theta[h] = magnetic_preconditioner(
                        self.tableau, self.problem, q0, h,
                        kwargs['uniform_B'])
                kwargs['factor'] = self._theta[h]
        return SOLVERS[kind](self.tableau, self.problem, q0, p0, h,
                             self.config, psi0=psi0, **kwargs)

    def step(self, state, h, psi0=None):
        """One step of size h (negative h steps backwards)."""
        psi, report = self.solve(state.q, state.p, h, psi0)
        q1, p1 = advance(state.q, state.p, h, psi)
        return State(state.t + h, q1, p1), report

    def run(self, state0, h, n_steps, observers=(), record_every=1):
        """Integrate n_steps steps, warm-starting each solve."""
        if self.config.lipschitz is not None:
            bound = step_bound(self.tableau, h, self.config.lipschitz)
            if bound >= 1.0:
                logger.warning(
                    '%s with h=%g: contraction bound %.3f >= 1, the '
                    'fixed-point iteration may diverge',
                    self.tableau.label, h, bound,
                )
        psi = None

        def advance_state(state):
            nonlocal psi
            new_state, report = self.step(state, h, psi0=psi)
            psi = report.psi
            return new_state, report.iterations

        return run_steps(advance_state, self.problem, state0, n_steps,
                         observers, record_every)


def lim_step(tableau, problem, state, h, config=None, psi0=None):
    """One LIM(k, s) step; returns the new state and the solver report."""
    return LimIntegrator(tableau, problem, config).step(state, h, psi0)


def integrate(tableau, problem, state0, h, n_steps, config=None,
              observers=(), record_every=1):
    """Run LIM(k, s) for n_steps steps and return the run records."""
    return LimIntegrator(tableau, problem, config).run(
        state0, h, n_steps, observers, record_every)
