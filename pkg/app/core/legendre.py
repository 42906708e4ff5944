"""
Shifted orthonormal Legendre basis on [0, 1], Gauss-Legendre rules and
the tableau matrices of the LIM(k, s) methods.
"""
import functools
import logging
from dataclasses import dataclass

import numpy as np

from core.exceptions import QuadratureError, TableauError

logger = logging.getLogger(__name__)

MAX_NODES = 64
ROOT_TOL = 1e-15
ROOT_MAX_ITER = 100
XS_CHECK_TOL = 1e-12
EIGEN_CHECK_TOL = 1e-10


def _frozen(values):
    """Return a read-only float copy of values."""
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


def _legendre_rows(n, t):
    """Classical Legendre polynomials L_0..L_n at t, stacked on axis 0."""
    t = np.asarray(t, dtype=float)
    rows = np.empty((n + 1,) + t.shape)
    rows[0] = 1.0
    if n >= 1:
        rows[1] = t
    for j in range(1, n):
        rows[j + 1] = ((2 * j + 1) * t * rows[j] - j * rows[j - 1]) / (j + 1)
    return rows


def _as_result(value):
    return float(value) if np.ndim(value) == 0 else value


def xi(i):
    """Coefficient (2 sqrt|4i^2 - 1|)^-1 of the integrated basis."""
    i = np.asarray(i, dtype=float)
    return _as_result(1.0 / (2.0 * np.sqrt(np.abs(4.0 * i * i - 1.0))))


def legendre_eval(j, x):
    """Evaluate the orthonormal shifted Legendre polynomial P_j at x."""
    if j < 0:
        raise ValueError(f'Polynomial degree must be nonnegative, got {j}')
    t = 2.0 * np.asarray(x, dtype=float) - 1.0
    return _as_result(np.sqrt(2 * j + 1) * _legendre_rows(j, t)[j])


def legendre_integral(j, c):
    """Return the integral of P_j over [0, c]."""
    if j < 0:
        raise ValueError(f'Polynomial degree must be nonnegative, got {j}')
    c = np.asarray(c, dtype=float)
    if j == 0:
        return _as_result(c.copy())
    rows = _legendre_rows(j + 1, 2.0 * c - 1.0)
    value = (rows[j + 1] - rows[j - 1]) / (2.0 * np.sqrt(2 * j + 1))
    return _as_result(value)


@dataclass(frozen=True)
class GaussRule:
    """Gauss-Legendre rule on [0, 1] with ascending nodes."""

    n: int
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, values):
        """Apply the rule to samples taken at the nodes (first axis)."""
        return np.tensordot(self.weights, np.asarray(values), axes=1)


def gauss_rule(n):
    """Build the n-point Gauss-Legendre rule on [0, 1].

    Roots of P_n are refined by Newton's method from the interlacing
    guesses cos(pi (4i - 1) / (4n + 2)); refinement stops once the
    Newton step or the residual |P_n| drops to ROOT_TOL.
    """
    if not 1 <= n <= MAX_NODES:
        raise ValueError(f'Node count must be in [1, {MAX_NODES}], got {n}')

    index = np.arange(1, n + 1)
    t = np.cos(np.pi * (4 * index - 1) / (4 * n + 2))
    scale = np.sqrt(2 * n + 1)
    for _ in range(ROOT_MAX_ITER):
        rows = _legendre_rows(n, t)
        derivative = n * (t * rows[n] - rows[n - 1]) / (t * t - 1.0)
        step = rows[n] / derivative
        t = t - step
        if (np.max(np.abs(step)) <= ROOT_TOL
                or scale * np.max(np.abs(rows[n])) <= ROOT_TOL):
            break
    else:
        residual = scale * np.max(np.abs(_legendre_rows(n, t)[n]))
        raise QuadratureError(
            f'Roots of P_{n} not refined within {ROOT_MAX_ITER} '
            f'iterations (residual {residual:.3e})'
        )

    rows = _legendre_rows(n, t)
    derivative = n * (t * rows[n] - rows[n - 1]) / (t * t - 1.0)
    nodes = (1.0 + t) / 2.0
    weights = 1.0 / ((1.0 - t * t) * derivative * derivative)
    order = np.argsort(nodes)
    nodes, weights = nodes[order], weights[order]
    # enforce the reflection symmetry c_l = 1 - c_{n-l+1} exactly
    nodes = 0.5 * (nodes + 1.0 - nodes[::-1])
    weights = 0.5 * (weights + weights[::-1])
    return GaussRule(n=n, nodes=_frozen(nodes), weights=_frozen(weights))


def xs_matrix(s):
    """Closed form of X_s: xi_0 in the corner, +/-xi_i off the diagonal."""
    coeffs = xi(np.arange(s))
    matrix = np.zeros((s, s))
    matrix[0, 0] = coeffs[0]
    i = np.arange(1, s)
    matrix[i, i - 1] = coeffs[1:]
    matrix[i - 1, i] = -coeffs[1:]
    return matrix


def basis_matrix(nodes, s):
    """Matrix with entries P_j(c_i), i over nodes, j < s."""
    return np.column_stack([legendre_eval(j, nodes) for j in range(s)])


def integral_matrix(nodes, s):
    """Matrix with entries int_0^{c_i} P_j, i over nodes, j < s."""
    return np.column_stack([legendre_integral(j, nodes) for j in range(s)])


@dataclass(frozen=True)
class Tableau:
    """All (k, s)-dependent constants of LIM(k, s)."""

    k: int
    s: int
    inner_rule: GaussRule
    outer_rule: GaussRule
    Phat: np.ndarray
    Ihat: np.ndarray
    Pmat: np.ndarray
    Imat: np.ndarray
    Xs: np.ndarray
    Xs_inv: np.ndarray
    rho_s: float
    e1: np.ndarray
    # derived products used by every step
    Phat_w: np.ndarray
    Pmat_w: np.ndarray
    IhatX: np.ndarray
    ImatX: np.ndarray
    Xs_inv2: np.ndarray

    @property
    def label(self):
        return f'LIM({self.k},{self.s})'


def _min_modulus_eigenvalue(matrix):
    """Smallest |lambda| of a small dense matrix, with a residual check."""
    values, vectors = np.linalg.eig(matrix)
    index = int(np.argmin(np.abs(values)))
    value, vector = values[index], vectors[:, index]
    identity = np.eye(matrix.shape[0])
    residual = np.linalg.norm((matrix - value * identity) @ vector)
    if residual > EIGEN_CHECK_TOL * max(1.0, np.linalg.norm(matrix)):
        raise TableauError(
            f'Eigenpair residual {residual:.3e} too large for rho_s'
        )
    return float(abs(value))


@functools.lru_cache(maxsize=None)
def build_tableau(k, s):
    """Build (and memoize) the tableau of LIM(k, s)."""
    if s < 2:
        raise TableauError(
            f'LIM(k, s) needs s >= 2 to form the position update, got s={s}'
        )
    if k < s:
        raise TableauError(
            f'The outer quadrature needs k >= s, got k={k} < s={s}'
        )
    if k > MAX_NODES:
        raise TableauError(f'k={k} exceeds the {MAX_NODES}-node limit')

    inner = gauss_rule(s)
    outer = gauss_rule(k)
    phat = basis_matrix(inner.nodes, s)
    ihat = integral_matrix(inner.nodes, s)
    pmat = basis_matrix(outer.nodes, s)
    imat = integral_matrix(outer.nodes, s)
    phat_w = phat.T * inner.weights
    pmat_w = pmat.T * outer.weights

    xs = xs_matrix(s)
    for name, product in (('inner', phat_w @ ihat), ('outer', pmat_w @ imat)):
        mismatch = np.max(np.abs(product - xs))
        if mismatch > XS_CHECK_TOL:
            raise TableauError(
                f'{name} product differs from closed-form X_s by '
                f'{mismatch:.3e}'
            )
    xs_inv = np.linalg.inv(xs)
    rho = _min_modulus_eigenvalue(xs)
    e1 = np.zeros(s)
    e1[0] = 1.0

    logger.debug('Built LIM(%d,%d) tableau, rho_s=%.6e', k, s, rho)
    return Tableau(
        k=k,
        s=s,
        inner_rule=inner,
        outer_rule=outer,
        Phat=_frozen(phat),
        Ihat=_frozen(ihat),
        Pmat=_frozen(pmat),
        Imat=_frozen(imat),
        Xs=_frozen(xs),
        Xs_inv=_frozen(xs_inv),
        rho_s=rho,
        e1=_frozen(e1),
        Phat_w=_frozen(phat_w),
        Pmat_w=_frozen(pmat_w),
        IhatX=_frozen(ihat @ xs),
        ImatX=_frozen(imat @ xs),
        Xs_inv2=_frozen(xs_inv @ xs_inv),
    )


def step_bound(tableau, h, mu):
    """Left-hand side of the fixed-point contraction condition.

    Uses max norms. The iteration is guaranteed to contract when the
    returned value is below 1; larger values are not a proof of failure.
    """
    def norm(matrix):
        return np.linalg.norm(matrix, np.inf)

    inner = norm(tableau.Ihat) * norm(tableau.Phat_w)
    outer = norm(tableau.Imat) * norm(tableau.Pmat_w)
    h = abs(h)
    return h * mu * (inner + h * norm(tableau.Xs) * (inner + outer))
