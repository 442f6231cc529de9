"""Uncertain double-integrator plant and its model-bound checkers.

The acceleration channel is G(x)((I + Delta_b(t, x)) u + delta(t, x)).
Models are plain callables taken from a small catalog (identity or constant
input matrix; scaled all-ones input uncertainty; sinusoidal and
piecewise-sinusoidal disturbances), and the bound checkers verify the
claimed norm bounds by sampling a grid plus random states.
"""

from dataclasses import dataclass, field
from math import sin, sqrt
from typing import Callable, NamedTuple, Optional

import numpy as np


class PlantState(NamedTuple):
    x: np.ndarray
    xdot: np.ndarray


def spectral_norm(A: np.ndarray) -> float:
    """Largest singular value; closed form for 2x2, LAPACK otherwise."""
    if A.shape == (2, 2):
        a, b = A[0, 0], A[0, 1]
        c, d = A[1, 0], A[1, 1]
        frob2 = a * a + b * b + c * c + d * d
        det = a * d - b * c
        gap = frob2 * frob2 - 4.0 * det * det
        if gap < 0.0:
            gap = 0.0
        return sqrt(0.5 * (frob2 + sqrt(gap)))
    return float(np.linalg.norm(A, 2))


def symmetric_min_eig(A: np.ndarray) -> float:
    """Smallest eigenvalue of the symmetric part of A."""
    S = 0.5 * (A + A.T)
    if S.shape == (2, 2):
        half_tr = 0.5 * (S[0, 0] + S[1, 1])
        return half_tr - sqrt((0.5 * (S[0, 0] - S[1, 1])) ** 2 + S[0, 1] ** 2)
    return float(np.linalg.eigvalsh(S)[0])


@dataclass
class UncertaintyModel:
    """Plant model callables together with the bounds they are claimed to obey."""

    dim: int
    input_matrix: Callable[[PlantState], np.ndarray]
    input_uncertainty: Callable[[float, PlantState], np.ndarray]
    disturbance: Callable[[float, PlantState], np.ndarray]
    disturbance_bound: Callable[[float, PlantState], float]
    mu: float
    uncertainty_norm_bound: float
    constant_input_matrix: Optional[np.ndarray] = None

    def __post_init__(self):
        if not self.uncertainty_norm_bound < 1.0:
            raise ValueError("input-uncertainty norm bound must be < 1")
        if not 1.0 + self.mu > 0.0:
            raise ValueError("mu must exceed -1")
        if self.constant_input_matrix is not None:
            G = np.asarray(self.constant_input_matrix, dtype=float)
            self.constant_input_matrix = G
            self._const_inv = np.linalg.inv(G)
            self._const_norm = spectral_norm(G)
            self._identity = bool(np.array_equal(G, np.eye(self.dim)))
        else:
            self._const_inv = None
            self._const_norm = None
            self._identity = False

    def matrix(self, state: PlantState) -> np.ndarray:
        if self.constant_input_matrix is not None:
            return self.constant_input_matrix
        return np.asarray(self.input_matrix(state), dtype=float)

    def matrix_inverse(self, state: PlantState) -> np.ndarray:
        if self._const_inv is not None:
            return self._const_inv
        return np.linalg.inv(self.matrix(state))

    def matrix_norm(self, state: PlantState) -> float:
        if self._const_norm is not None:
            return self._const_norm
        return spectral_norm(self.matrix(state))

    def apply(self, state: PlantState, vec: np.ndarray) -> np.ndarray:
        if self._identity:
            return vec
        return self.matrix(state) @ vec

    def apply_inverse(self, state: PlantState, vec: np.ndarray) -> np.ndarray:
        if self._identity:
            return vec
        return self.matrix_inverse(state) @ vec


class SingularInputMatrixError(ValueError):
    """Input matrix not invertible at the queried state."""


def closed_loop_rhs(model: UncertaintyModel, control_law, t: float,
                    state: PlantState) -> np.ndarray:
    """Stacked state derivative (xdot, G(x)((I + Delta_b) u + delta))."""
    u = control_law(t, state)
    return np.concatenate([state.xdot, acceleration(model, u, t, state)])


def acceleration(model: UncertaintyModel, u: np.ndarray, t: float,
                 state: PlantState) -> np.ndarray:
    inner = u + model.input_uncertainty(t, state) @ u + model.disturbance(t, state)
    return model.apply(state, inner)


# --- model catalog -------------------------------------------------------

def identity_input_matrix(dim: int):
    I = np.eye(dim)
    return lambda state: I


def constant_input_matrix(matrix) -> np.ndarray:
    G = np.asarray(matrix, dtype=float)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise ValueError("input matrix must be square")
    if abs(np.linalg.det(G)) < 1e-12:
        raise SingularInputMatrixError("constant input matrix is singular")
    return G


def zero_uncertainty(dim: int):
    Z = np.zeros((dim, dim))

    def delta_b(t, state):
        return Z

    delta_b.catalog = ("zero",)
    return delta_b


def scaled_ones_uncertainty(coeff: float, dim: int, componentwise: bool = False):
    """coeff * sin(.) times the all-ones matrix.

    Default applies sin to the first position component; the componentwise
    variant scales row i by sin of position component i instead.
    """
    ones = np.ones((dim, dim))

    if componentwise:
        def delta_b(t, state):
            return coeff * np.sin(state.x)[:, None] * ones
    else:
        def delta_b(t, state):
            return (coeff * sin(state.x[0])) * ones

    delta_b.catalog = ("scaled_ones", float(coeff), bool(componentwise))
    return delta_b


def zero_disturbance(dim: int):
    z = np.zeros(dim)

    def delta(t, state):
        return z

    delta.catalog = ("zero",)
    return delta


def constant_disturbance(values) -> Callable:
    v = np.asarray(values, dtype=float)

    def delta(t, state):
        return v

    delta.catalog = ("constant", tuple(v.tolist()))
    return delta


def sinusoidal_disturbance(amplitude: float, frequency: float, dim: int):
    """amplitude * sin(frequency * t) on every component."""
    ones = np.ones(dim)

    def delta(t, state):
        return (amplitude * sin(frequency * t)) * ones

    delta.catalog = ("sinusoidal", float(amplitude), float(frequency))
    return delta


def piecewise_sinusoidal_disturbance(amplitude_before: float, amplitude_after: float,
                                     frequency: float, switch_time: float, dim: int):
    """Sinusoidal on every component, amplitude stepping at the switch time."""
    if switch_time < 0.0:
        raise ValueError("switch time must be nonnegative")
    ones = np.ones(dim)

    def delta(t, state):
        amp = amplitude_before if t <= switch_time else amplitude_after
        return (amp * sin(frequency * t)) * ones

    delta.catalog = ("piecewise_sinusoidal", float(amplitude_before),
                     float(amplitude_after), float(frequency), float(switch_time))
    return delta


def disturbance_norm_bound(disturbance: Callable):
    """Tight bound d(t, x) = ||delta(t, x)||."""

    def d_bound(t, state):
        return float(np.linalg.norm(disturbance(t, state)))

    d_bound.catalog = ("disturbance_norm",) + getattr(disturbance, "catalog", ("?",))
    return d_bound


def constant_bound(value: float):
    if value < 0.0:
        raise ValueError("disturbance bound must be nonnegative")

    def d_bound(t, state):
        return value

    d_bound.catalog = ("constant", float(value))
    return d_bound


# --- sampled bound checks ------------------------------------------------

@dataclass
class BoundCheckReport:
    """Outcome of a sampled bound verification."""

    name: str
    ok: bool
    n_samples: int
    worst_margin: float
    worst_at: Optional[tuple] = None
    violations: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "ok": self.ok,
            "n_samples": self.n_samples,
            "worst_margin": self.worst_margin,
            "violations": len(self.violations),
        }


def _sample_states(box, n_grid, n_random, velocity_scale, seed):
    positions = box.grid(n_grid)
    states = [PlantState(p, np.zeros(box.dim)) for p in positions]
    rng = np.random.default_rng(seed)
    for p, v in zip(box.sample(rng, n_random),
                    rng.uniform(-velocity_scale, velocity_scale, (n_random, box.dim))):
        states.append(PlantState(p, v))
    return states


def check_disturbance_bound(model: UncertaintyModel, box, t_span=(0.0, 10.0),
                            n_grid: int = 50, n_time: int = 100,
                            n_random: int = 200, velocity_scale: float = 5.0,
                            seed: int = 0, tol: float = 1e-9,
                            max_violations: int = 20) -> BoundCheckReport:
    """Verify ||delta(t, x)|| <= d(t, x) on a time x state sample set."""
    states = _sample_states(box, n_grid, n_random, velocity_scale, seed)
    times = np.linspace(t_span[0], t_span[1], n_time)
    worst = np.inf
    worst_at = None
    violations = []
    count = 0
    for t in times:
        for state in states:
            count += 1
            value = float(np.linalg.norm(model.disturbance(t, state)))
            bound = model.disturbance_bound(t, state)
            margin = bound - value
            if margin < worst:
                worst, worst_at = margin, (float(t), state.x.copy())
            if margin < -tol and len(violations) < max_violations:
                violations.append((float(t), state.x.copy(), value, bound))
    return BoundCheckReport("disturbance_bound", worst >= -tol, count, worst,
                            worst_at, violations)


def check_uncertainty_bounds(model: UncertaintyModel, box, t_span=(0.0, 10.0),
                             n_grid: int = 50, n_time: int = 100,
                             n_random: int = 200, velocity_scale: float = 5.0,
                             seed: int = 0, tol: float = 1e-9,
                             max_violations: int = 20) -> BoundCheckReport:
    """Verify ||Delta_b|| <= bound < 1 and the mu floor on the symmetric part
    of G Delta_b G^-1 over a time x state sample set."""
    states = _sample_states(box, n_grid, n_random, velocity_scale, seed)
    times = np.linspace(t_span[0], t_span[1], n_time)
    gamma = model.uncertainty_norm_bound
    worst = np.inf
    worst_at = None
    violations = []
    count = 0
    for t in times:
        for state in states:
            count += 1
            Db = np.asarray(model.input_uncertainty(t, state), dtype=float)
            norm_margin = gamma - spectral_norm(Db)
            if model._identity:
                conj = Db
            else:
                G = model.matrix(state)
                conj = G @ Db @ model.matrix_inverse(state)
            mu_margin = symmetric_min_eig(conj) - model.mu
            margin = min(norm_margin, mu_margin)
            if margin < worst:
                worst, worst_at = margin, (float(t), state.x.copy())
            if margin < -tol and len(violations) < max_violations:
                violations.append((float(t), state.x.copy(), norm_margin, mu_margin))
    ok = worst >= -tol and gamma < 1.0
    return BoundCheckReport("uncertainty_bounds", ok, count, worst,
                            worst_at, violations)
