"""
Charged-particle problems: fields, invariants and the builtin examples.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Union

import numpy as np

from core.exceptions import ProblemError

logger = logging.getLogger(__name__)

SKEW_TOL = 1e-12
ORTHOGONALITY_TOL = 1e-12
HESSIAN_SYMMETRY_TOL = 1e-10
HESSIAN_FD_TOL = 1e-5
GRADIENT_FD_TOL = 1e-6
FD_STEP = np.cbrt(np.finfo(float).eps)


@dataclass(frozen=True)
class CrossField:
    """Magnetic field given as L(q) in R^3; the force is p x L(q)."""

    field: Callable


@dataclass(frozen=True)
class MatrixField:
    """Magnetic term given as a skew matrix B(q); the force is B(q) p."""

    matrix: Callable


@dataclass(frozen=True)
class State:
    """Time, position and momentum."""

    t: float
    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        q = np.array(self.q, dtype=float)
        p = np.array(self.p, dtype=float)
        if q.shape != p.shape or q.ndim != 1:
            raise ProblemError(
                f'q and p must be vectors of equal size, got {q.shape} '
                f'and {p.shape}'
            )
        object.__setattr__(self, 't', float(self.t))
        object.__setattr__(self, 'q', q)
        object.__setattr__(self, 'p', p)

    @property
    def dim(self):
        return self.q.size

    def is_finite(self):
        return bool(
            np.isfinite(self.t)
            and np.all(np.isfinite(self.q))
            and np.all(np.isfinite(self.p))
        )

    def as_vector(self):
        """Stacked y = (q, p)."""
        return np.concatenate([self.q, self.p])


@dataclass(frozen=True)
class Problem:
    """A Lorentz-type problem q' = p, p' = magnetic(q, p) - grad U(q)."""

    dim: int
    grad_U: Callable
    potential_U: Callable
    magnetic: Union[CrossField, MatrixField]
    hessian_U: Optional[Callable] = None
    extra_invariants: Mapping[str, Callable] = field(default_factory=dict)
    label: str = ''
    initial_state: Optional[State] = None

    def __post_init__(self):
        if self.dim < 1:
            raise ProblemError(f'Dimension must be positive, got {self.dim}')
        if isinstance(self.magnetic, CrossField) and self.dim != 3:
            raise ProblemError(
                f'A cross-product field needs m = 3, got m = {self.dim}'
            )
        if not isinstance(self.magnetic, (CrossField, MatrixField)):
            raise ProblemError('magnetic must be a CrossField or MatrixField')

    def magnetic_matrix(self, q):
        """Matrix M(q) with M(q) p equal to the magnetic force."""
        q = np.asarray(q, dtype=float)
        if isinstance(self.magnetic, MatrixField):
            return np.asarray(self.magnetic.matrix(q), dtype=float)
        # p x L = -(L x p)
        return -cross_matrix(self.magnetic.field(q))

    def invariants(self, state):
        """Values of the extra invariants at state, by name."""
        return {
            name: float(function(state.q, state.p))
            for name, function in self.extra_invariants.items()
        }

    def hessian(self, q):
        """Hessian of U at q, by finite differences when not supplied."""
        if self.hessian_U is not None:
            return np.asarray(self.hessian_U(q), dtype=float)
        return finite_difference_hessian(self, q)


def cross_matrix(vector):
    """Skew matrix [v]x with [v]x w = v x w (vectorised on leading axes)."""
    v = np.asarray(vector, dtype=float)
    zero = np.zeros_like(v[..., 0])
    return np.stack([
        np.stack([zero, -v[..., 2], v[..., 1]], axis=-1),
        np.stack([v[..., 2], zero, -v[..., 0]], axis=-1),
        np.stack([-v[..., 1], v[..., 0], zero], axis=-1),
    ], axis=-2)


def _check_dims(problem, q, p):
    if q.shape[-1] != problem.dim or p.shape != q.shape:
        raise ProblemError(
            f'Expected arrays of trailing size {problem.dim}, got '
            f'q {q.shape} and p {p.shape}'
        )


def apply_magnetic(problem, q, p, check=False):
    """Magnetic force at (q, p): p x L(q) or B(q) p.

    Vectorised over leading axes. With check=True the result is verified
    to be orthogonal to p.
    """
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    _check_dims(problem, q, p)
    if isinstance(problem.magnetic, CrossField):
        field_value = np.asarray(problem.magnetic.field(q), dtype=float)
        result = np.cross(p, field_value)
        scale = (np.linalg.norm(p, axis=-1)
                 * np.linalg.norm(field_value, axis=-1))
    else:
        matrix = np.asarray(problem.magnetic.matrix(q), dtype=float)
        result = np.einsum('...ij,...j->...i', matrix, p)
        scale = (np.linalg.norm(p, axis=-1)
                 * np.linalg.norm(matrix, axis=(-2, -1)))
    if check:
        work = np.abs(np.einsum('...i,...i->...', result, p))
        bound = ORTHOGONALITY_TOL * np.linalg.norm(p, axis=-1) * np.maximum(
            np.linalg.norm(result, axis=-1), scale)
        if np.any(work > bound):
            raise ProblemError(
                'Magnetic force is not orthogonal to p '
                f'(max |p.F| = {np.max(work):.3e})'
            )
    return result


def hamiltonian(problem, state):
    """H(q, p) = p.p / 2 + U(q)."""
    return float(0.5 * state.p @ state.p + problem.potential_U(state.q))


def finite_difference_hessian(problem, q):
    """Central differences of grad_U, step cbrt(eps) (1 + |q_j|)."""
    q = np.asarray(q, dtype=float)
    hessian = np.empty((problem.dim, problem.dim))
    for j in range(problem.dim):
        step = FD_STEP * (1.0 + abs(q[j]))
        shift = np.zeros(problem.dim)
        shift[j] = step
        hessian[:, j] = (problem.grad_U(q + shift)
                         - problem.grad_U(q - shift)) / (2.0 * step)
    return 0.5 * (hessian + hessian.T)


def _finite_difference_gradient(problem, q):
    gradient = np.empty(problem.dim)
    for j in range(problem.dim):
        step = FD_STEP * (1.0 + abs(q[j]))
        shift = np.zeros(problem.dim)
        shift[j] = step
        gradient[j] = (problem.potential_U(q + shift)
                       - problem.potential_U(q - shift)) / (2.0 * step)
    return gradient


def _relative_error(value, expected):
    scale = max(1.0, np.max(np.abs(expected)))
    return np.max(np.abs(value - expected)) / scale


def sample_points(center, n_samples, radius, rng):
    """Uniform points from the ball of given radius around center."""
    center = np.asarray(center, dtype=float)
    directions = rng.normal(size=(n_samples, center.size))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = radius * rng.random(n_samples) ** (1.0 / center.size)
    return center + directions * radii[:, None]


def validate_problem(problem, n_samples=100, seed=0, radius=1.0):
    """Check skewness, orthogonality and derivative consistency.

    Points are drawn from a ball around the initial state (or the origin).
    Raises ProblemError on the first violated check.
    """
    rng = np.random.default_rng(seed)
    if problem.initial_state is not None:
        q_center = problem.initial_state.q
        p_center = problem.initial_state.p
    else:
        q_center = p_center = np.zeros(problem.dim)
    qs = sample_points(q_center, n_samples, radius, rng)
    ps = sample_points(p_center, n_samples, radius, rng)

    for q, p in zip(qs, ps):
        matrix = problem.magnetic_matrix(q)
        skew = np.max(np.abs(matrix + matrix.T))
        if skew > SKEW_TOL * max(1.0, np.max(np.abs(matrix))):
            raise ProblemError(f'B(q) is not skew at q={q} ({skew:.3e})')
        apply_magnetic(problem, q, p, check=True)

        gradient = problem.grad_U(q)
        if _relative_error(gradient, _finite_difference_gradient(
                problem, q)) > GRADIENT_FD_TOL:
            raise ProblemError(f'grad_U disagrees with U at q={q}')

        if problem.hessian_U is not None:
            hessian = np.asarray(problem.hessian_U(q), dtype=float)
            if np.max(np.abs(hessian - hessian.T)) > HESSIAN_SYMMETRY_TOL:
                raise ProblemError(f'Hessian is not symmetric at q={q}')
            if _relative_error(hessian, finite_difference_hessian(
                    problem, q)) > HESSIAN_FD_TOL:
                raise ProblemError(f'Hessian disagrees with grad_U at q={q}')
    logger.debug('Validated %s on %d points', problem.label, n_samples)
    return True


# Builtin problems. Field callables act on the last axis; the examples
# take the magnetic force as L(q) x p.

def _u1(q):
    x, y, z = q[..., 0], q[..., 1], q[..., 2]
    return x ** 3 - y ** 3 + x ** 4 / 5.0 + y ** 4 + z ** 4


def _grad_u1(q):
    x, y, z = q[..., 0], q[..., 1], q[..., 2]
    return np.stack([
        3.0 * x ** 2 + 0.8 * x ** 3,
        -3.0 * y ** 2 + 4.0 * y ** 3,
        4.0 * z ** 3,
    ], axis=-1)


def _hessian_u1(q):
    x, y, z = q[0], q[1], q[2]
    return np.diag([
        6.0 * x + 2.4 * x ** 2,
        -6.0 * y + 12.0 * y ** 2,
        12.0 * z ** 2,
    ])


def _radial_field(q):
    zero = np.zeros_like(q[..., 0])
    return np.stack([zero, zero, np.hypot(q[..., 0], q[..., 1])], axis=-1)


def _linear_field(q):
    x, y, z = q[..., 0], q[..., 1], q[..., 2]
    return 0.5 * np.stack([y - z, x + z, y - x], axis=-1)


def _lorentz(field_function):
    """L(q) x p, written as the CrossField p x (-L(q))."""
    def reversed_field(q):
        return -field_function(q)
    return CrossField(reversed_field)


def _uniform_field(q):
    field_value = np.zeros(np.shape(q))
    field_value[..., 2] = 1.0
    return field_value


def _zero_field(q):
    return np.zeros(np.shape(q))


def _u2d(q):
    return 1.0 / (10.0 * (q[..., 0] ** 2 + q[..., 1] ** 2))


def _grad_u2d(q):
    r4 = (q[..., 0] ** 2 + q[..., 1] ** 2) ** 2
    return np.stack([
        -q[..., 0] / (5.0 * r4),
        -q[..., 1] / (5.0 * r4),
        np.zeros_like(r4),
    ], axis=-1)


def _hessian_u2d(q):
    planar = np.array([q[0], q[1]])
    r2 = planar @ planar
    hessian = np.zeros((3, 3))
    hessian[:2, :2] = (4.0 * np.outer(planar, planar) / (5.0 * r2 ** 3)
                       - np.eye(2) / (5.0 * r2 ** 2))
    return hessian


def angular_momentum(q, p):
    """M = q1 p2 - q2 p1 - (q1^2 + q2^2)^(3/2) / 3."""
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    r2 = q[..., 0] ** 2 + q[..., 1] ** 2
    return q[..., 0] * p[..., 1] - q[..., 1] * p[..., 0] - r2 ** 1.5 / 3.0


def _zero_potential(q):
    return np.zeros(np.shape(q)[:-1])


def _zero_hessian(q):
    return np.zeros((len(q), len(q)))


EXAMPLE1_STATE = ((0.0, 1.0, 0.1), (0.09, 0.55, 0.3))


def _example1():
    return Problem(
        dim=3,
        grad_U=_grad_u1,
        potential_U=_u1,
        magnetic=_lorentz(_radial_field),
        hessian_U=_hessian_u1,
        label='ex1',
        initial_state=State(0.0, *EXAMPLE1_STATE),
    )


def _example2():
    return Problem(
        dim=3,
        grad_U=_grad_u1,
        potential_U=_u1,
        magnetic=_lorentz(_linear_field),
        hessian_U=_hessian_u1,
        label='ex2',
        initial_state=State(0.0, *EXAMPLE1_STATE),
    )


def _example3():
    return Problem(
        dim=3,
        grad_U=_grad_u2d,
        potential_U=_u2d,
        magnetic=_lorentz(_radial_field),
        hessian_U=_hessian_u2d,
        extra_invariants={'M': angular_momentum},
        label='ex3',
        initial_state=State(0.0, (0.0, 1.0, 0.0), (0.1, 0.01, 0.0)),
    )


def _free():
    return Problem(
        dim=3,
        grad_U=_zero_field,
        potential_U=_zero_potential,
        magnetic=CrossField(_zero_field),
        hessian_U=_zero_hessian,
        label='free',
        initial_state=State(0.0, (0.0, 0.0, 0.0), (1.0, 0.5, -0.25)),
    )


def _uniform():
    return Problem(
        dim=3,
        grad_U=_grad_u1,
        potential_U=_u1,
        magnetic=CrossField(_uniform_field),
        hessian_U=_hessian_u1,
        label='uniform',
        initial_state=State(0.0, *EXAMPLE1_STATE),
    )


BUILTIN_PROBLEMS = {
    'ex1': _example1,
    'ex2': _example2,
    'ex3': _example3,
    'free': _free,
    'uniform': _uniform,
}


def builtin_problem(name):
    """Return the builtin problem registered under name."""
    try:
        factory = BUILTIN_PROBLEMS[name]
    except KeyError:
        known = ', '.join(sorted(BUILTIN_PROBLEMS))
        raise ProblemError(
            f'Unknown problem {name!r}; expected one of {known}'
        ) from None
    return factory()
