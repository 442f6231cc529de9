"""Independent brute-force references used by the test suite.

The QP here is solved as a plain geometric projection onto a halfspace,
derived from first principles; it never calls the safety-filter code it is
meant to cross-check. The derivative checker compares a Jacobian-vector
product built from axis-wise central differences against a single
directional central difference.
"""

from dataclasses import dataclass

import numpy as np


class InfeasibleError(ValueError):
    """Constraint row is zero while the constraint is violated."""


@dataclass(frozen=True)
class QpProblem:
    """min ||v - target||^2  s.t.  row . v >= -offset."""

    target: np.ndarray
    row: np.ndarray
    offset: float

    def __post_init__(self):
        object.__setattr__(self, "target", np.asarray(self.target, dtype=float))
        object.__setattr__(self, "row", np.asarray(self.row, dtype=float))
        object.__setattr__(self, "offset", float(self.offset))


def solve_qp_projection(p: QpProblem) -> np.ndarray:
    """Minimizer of the single-constraint QP via halfspace projection.

    If the target already satisfies row.v >= -offset it is optimal; otherwise
    the unique minimizer is the Euclidean projection of the target onto the
    hyperplane row.v = -offset.
    """
    residual = float(p.row @ p.target) + p.offset
    if residual >= 0.0:
        return p.target.copy()
    nn = float(p.row @ p.row)
    if nn == 0.0:
        raise InfeasibleError("zero constraint row with violated constraint")
    return p.target - p.row * (residual / nn)


def numeric_jacobian(f, x, step: float = 1e-6) -> np.ndarray:
    """Axis-wise central-difference Jacobian of a vector function."""
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = step
        cols.append((np.asarray(f(x + e)) - np.asarray(f(x - e))) / (2.0 * step))
    return np.stack(cols, axis=-1)


def check_derivative(f, x, direction, step: float = 1e-6) -> float:
    """Discrepancy between J_f(x) @ direction and the directional difference.

    The Jacobian side uses axis-wise differences (mirroring how the library
    builds Jacobians), the reference side a single two-sided difference along
    `direction`; the returned norm bounds the inconsistency between the two.
    """
    x = np.asarray(x, dtype=float)
    direction = np.asarray(direction, dtype=float)
    jvp = numeric_jacobian(f, x, step) @ direction
    hd = step * direction
    directional = (np.asarray(f(x + hd)) - np.asarray(f(x - hd))) / (2.0 * step)
    return float(np.linalg.norm(jvp - directional))
