"""
Boris method, the second-order symmetric baseline.

Synchronized one-step form of the Boris leapfrog, with q and p at
integer times:

    p_half = p + h/2 (p x L(q) - grad U(q))
    q1     = q + h p_half
    p1     = p_half + h/2 (p1 x L(q1) - grad U(q1))

The kicks use grad U at the endpoint positions q and q1. The implicit
last relation is the magnetic rotation: with r = p_half - h/2 grad U(q1)
and t = h/2 L(q1) it is solved exactly by
p1 = (r + r x t + (r.t) t) / (1 + |t|^2). The positions coincide with
the staggered t/s-vector push started from the matching half-step
velocity.
"""
import numpy as np

from core.exceptions import ProblemError
from core.problems import CrossField, State
from integrator.records import run_steps

BorisState = State


def _require_cross_field(problem):
    if problem.dim != 3 or not isinstance(problem.magnetic, CrossField):
        raise ProblemError(
            'The Boris method needs m = 3 and a cross-product field L(q)'
        )


def rotate(r, t):
    """Solve p = r + p x t for p."""
    return (r + np.cross(r, t) + np.dot(r, t) * t) / (1.0 + np.dot(t, t))


def boris_step(problem, state, h):
    """Advance one Boris step of size h (negative h steps backwards)."""
    _require_cross_field(problem)
    field = problem.magnetic.field
    q, p = state.q, state.p

    p_half = p + 0.5 * h * (np.cross(p, field(q)) - problem.grad_U(q))
    q1 = q + h * p_half
    kicked = p_half - 0.5 * h * problem.grad_U(q1)
    p1 = rotate(kicked, 0.5 * h * field(q1))
    return State(state.t + h, q1, p1)


def boris_integrate(problem, state0, h, n_steps, observers=(),
                    record_every=1):
    """Run the Boris method for n_steps steps and return the run records."""
    _require_cross_field(problem)

    def advance_state(state):
        return boris_step(problem, state, h), 0

    return run_steps(advance_state, problem, state0, n_steps, observers,
                     record_every)
