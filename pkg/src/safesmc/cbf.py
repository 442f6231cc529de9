"""Circular-obstacle barrier function, safe sets, and the gradient-norm bound.

The barrier is h(x) = ||x - center||^2 - radius^2, so the safe set
{h >= 0} is the complement of an open disk. All operations accept state
vectors of any dimension; the bundled scenarios use n = 2.
"""

from dataclasses import dataclass
from itertools import product

import numpy as np


@dataclass(frozen=True)
class ObstacleCbf:
    """Barrier h(x) = ||x - center||^2 - radius^2 with gradient 2(x - center)."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        center = np.asarray(self.center, dtype=float)
        if center.ndim != 1:
            raise ValueError("center must be a 1-D position vector")
        if not self.radius > 0.0:
            raise ValueError("radius must be positive")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius", float(self.radius))

    def h(self, x) -> float:
        """Barrier value; nonnegative outside the obstacle disk."""
        d = np.asarray(x, dtype=float) - self.center
        return float(d @ d - self.radius * self.radius)

    def grad(self, x) -> np.ndarray:
        """Gradient of h, which vanishes only at the obstacle center."""
        return 2.0 * (np.asarray(x, dtype=float) - self.center)

    def is_safe(self, x, gamma: float = 0.0) -> bool:
        """True iff h(x) + gamma >= 0; gamma = 0 is plain safe-set membership."""
        if gamma < 0.0:
            raise ValueError("gamma must be nonnegative")
        return self.h(x) + gamma >= 0.0


@dataclass(frozen=True)
class StateBox:
    """Axis-aligned position box. Degenerate (lower == upper) boxes are allowed;
    any component with lower > upper is rejected."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        if lower.shape != upper.shape or lower.ndim != 1 or lower.size == 0:
            raise ValueError("lower/upper must be 1-D vectors of equal length")
        if np.any(lower > upper):
            raise ValueError("box is empty: lower > upper in some component")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self) -> int:
        return self.lower.size

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))

    def corners(self) -> np.ndarray:
        """All 2^n corner points, shape (2^n, n)."""
        axes = [(lo, up) for lo, up in zip(self.lower, self.upper)]
        return np.array(list(product(*axes)))

    def grid(self, resolution: int) -> np.ndarray:
        """Uniform grid with `resolution` points per axis, shape (resolution^n, n)."""
        if resolution < 2:
            raise ValueError("grid resolution must be at least 2 per axis")
        axes = [np.linspace(lo, up, resolution) for lo, up in zip(self.lower, self.upper)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.uniform(self.lower, self.upper, size=(size, self.dim))


@dataclass(frozen=True)
class ClassKGain:
    """Linear extended class-K map alpha(h) = alpha * h with alpha > 0."""

    alpha: float

    def __post_init__(self):
        if not self.alpha > 0.0:
            raise ValueError("alpha must be positive")
        object.__setattr__(self, "alpha", float(self.alpha))

    def __call__(self, h: float) -> float:
        return self.alpha * h


def grad_norm_bound(cbf: ObstacleCbf, box: StateBox, grid_resolution: int = 2) -> float:
    """Maximum of ||grad h|| over the box.

    For this quadratic barrier the norm is convex in x, so the maximum sits at
    a corner and corner evaluation is exact; the grid only serves future
    non-quadratic barriers.
    """
    if grid_resolution < 2:
        raise ValueError("grid resolution must be at least 2 per axis")
    if box.dim != cbf.center.size:
        raise ValueError("box dimension does not match barrier dimension")
    points = box.corners()
    if np.any(box.upper > box.lower):
        points = np.vstack([points, box.grid(grid_resolution)])
    norms = np.linalg.norm(2.0 * (points - cbf.center), axis=1)
    return float(norms.max())
