"""
Per-step run records and the stepping loop shared by every method.
"""
import logging
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from core.exceptions import IntegrationError, NonFiniteError
from core.problems import hamiltonian

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunRecord:
    """State and error measurements after one recorded step."""

    step: int
    t: float
    q: np.ndarray
    p: np.ndarray
    H_err: float
    invariant_errors: Mapping[str, float] = field(default_factory=dict)
    iterations: int = 0


class Recorder:
    """Measure errors against the initial state and notify observers."""

    def __init__(self, problem, state0, observers=()):
        self.problem = problem
        self.H0 = hamiltonian(problem, state0)
        self.invariants0 = problem.invariants(state0)
        self.observers = list(observers)
        self.records = []

    def record(self, step, state, iterations=0):
        current = self.problem.invariants(state)
        record = RunRecord(
            step=step,
            t=state.t,
            q=state.q.copy(),
            p=state.p.copy(),
            H_err=hamiltonian(self.problem, state) - self.H0,
            invariant_errors={
                name: current[name] - value
                for name, value in self.invariants0.items()
            },
            iterations=iterations,
        )
        self.records.append(record)
        for observer in self.observers:
            observer(record)
        return record


def run_steps(advance, problem, state0, n_steps, observers=(),
              record_every=1):
    """Apply advance(state) -> (state, iterations) n_steps times.

    Records step 0, every record_every-th step and the last step.
    Failures are re-raised with the index of the failing step.
    """
    if n_steps < 1:
        raise ValueError(f'n_steps must be at least 1, got {n_steps}')
    if record_every < 1:
        raise ValueError(
            f'record_every must be at least 1, got {record_every}')

    recorder = Recorder(problem, state0, observers)
    recorder.record(0, state0)
    state = state0
    for step in range(1, n_steps + 1):
        try:
            state, iterations = advance(state)
        except IntegrationError as exc:
            raise exc.at_step(step)
        if not state.is_finite():
            raise NonFiniteError('state is no longer finite', step=step)
        if step % record_every == 0 or step == n_steps:
            recorder.record(step, state, iterations)
    logger.debug('Completed %d steps of %s', n_steps, problem.label)
    return recorder.records


def max_abs(records, key):
    """Largest |value| of a record attribute or invariant error."""
    values = [
        record.invariant_errors[key] if key in record.invariant_errors
        else getattr(record, key)
        for record in records
    ]
    return float(np.max(np.abs(values)))
