"""Sliding variable and the two robust control laws.

The base law steers sigma = xdot - v(x) to zero with a unit-vector term
whose gain compensates the matched-uncertainty bound; its safe-reaching
gain is derived from the initial condition so the reaching phase cannot
leave the safe set. The adaptive law switches to a barrier-function gain
once the sliding variable is small, trading exact convergence for bounded
gains without a known disturbance bound.
"""

import warnings
from dataclasses import dataclass, replace
from math import sqrt
from typing import Callable, Optional

import numpy as np

from . import safety_filter as sf
from .plant import PlantState, UncertaintyModel, spectral_norm

TOL_SIGMA = 1e-9
BARRIER_GAIN_MAX = 1e6
EPSILON_CHECK_TOL = 5e-5


@dataclass(frozen=True)
class SlidingVar:
    sigma: np.ndarray
    norm: float


@dataclass(frozen=True)
class SmcGains:
    """Constants of the unit-vector law: gain (kappa + rho) / (1 + mu)."""

    kappa: float
    mu: float
    beta: float
    alpha_c: float
    d_bound: Callable[[float, PlantState], float]

    def __post_init__(self):
        if not self.kappa > 0.0:
            raise ValueError("kappa must be positive")
        if not 1.0 + self.mu > 0.0:
            raise ValueError("mu must exceed -1")


@dataclass(frozen=True)
class AdaptiveGainState:
    """Switching state of the adaptive law; latches at most once."""

    epsilon: float
    gamma: float
    switched: bool = False
    tau: Optional[float] = None

    def __post_init__(self):
        if not self.epsilon > 0.0:
            raise ValueError("epsilon must be positive")
        if not self.gamma > 0.0:
            raise ValueError("gamma must be positive")
        if self.switched != (self.tau is not None):
            raise ValueError("switched flag must mirror tau")


def sliding_var(params: sf.FilterParams, state: PlantState, field=None) -> SlidingVar:
    """sigma = xdot - v(x)."""
    v = field(state.x) if field is not None else sf.velocity(params, state.x)
    sigma = np.asarray(state.xdot, dtype=float) - v
    return SlidingVar(sigma, sqrt(float(sigma @ sigma)))


def disturbance_compensation(gains: SmcGains, G: np.ndarray, t: float,
                             state: PlantState, vdot: np.ndarray) -> float:
    """rho = ||G|| d(t, state) + ||vdot|| with the spectral norm of G."""
    d = gains.d_bound(t, state)
    if d < 0.0:
        raise ValueError("disturbance bound must be nonnegative")
    return spectral_norm(np.asarray(G, dtype=float)) * d + float(np.linalg.norm(vdot))


def safe_reaching_gain(alpha: float, sigma0_norm: float, beta: float,
                       h0: float, grad_bound: float) -> tuple[float, float]:
    """Reaching gain (kappa, alpha_c) that certifies a safe reaching phase.

    alpha_c = (||sigma_0||^2 + beta) / (2 h(x_0));
    kappa = (alpha / 2) ||sigma_0|| + alpha_c * grad_bound.
    Requires the start strictly inside the safe set.
    """
    if not h0 > 0.0:
        raise ValueError(
            "initial position must lie strictly inside the safe set (h(x0) > 0)"
        )
    if not beta > 0.0:
        raise ValueError("beta must be positive")
    if grad_bound < 0.0:
        raise ValueError("gradient bound must be nonnegative")
    alpha_c = (sigma0_norm * sigma0_norm + beta) / (2.0 * h0)
    kappa = 0.5 * alpha * sigma0_norm + alpha_c * grad_bound
    return kappa, alpha_c


def smc_control(gains: SmcGains, G_inv: np.ndarray, sv: SlidingVar,
                rho_val: float, tol_sigma: float = TOL_SIGMA) -> np.ndarray:
    """u = -((kappa + rho) / (1 + mu)) G^-1 sigma / ||sigma||, regularized so
    that u = 0 at sigma = 0."""
    k = (gains.kappa + rho_val) / (1.0 + gains.mu)
    unit = sv.sigma / max(sv.norm, tol_sigma)
    return -k * (np.asarray(G_inv, dtype=float) @ unit)


def barrier_gain(sigma_norm: float, epsilon: float,
                 k_max: float = BARRIER_GAIN_MAX) -> float:
    """Adaptive gain r / (epsilon - r), clamped at k_max near the tube edge.

    The clamp only triggers when discretization pushes ||sigma|| essentially
    onto epsilon; the containment monitor treats any clamp as a failure.
    """
    if sigma_norm < 0.0:
        raise ValueError("sigma norm must be nonnegative")
    if sigma_norm >= epsilon * (1.0 - 1.0 / k_max):
        return k_max
    return sigma_norm / (epsilon - sigma_norm)


def barrier_gain_clamps(sigma_norm: float, epsilon: float,
                        k_max: float = BARRIER_GAIN_MAX) -> bool:
    return sigma_norm >= epsilon * (1.0 - 1.0 / k_max)


def max_admissible_epsilon(alpha: float, gamma: float, grad_bound: float) -> float:
    """Largest tube radius alpha*gamma/grad_bound that keeps the relaxed
    safe set invariant after switching."""
    if not grad_bound > 0.0:
        raise ValueError("gradient bound must be positive")
    return alpha * gamma / grad_bound


def validate_epsilon(epsilon: float, alpha: float, gamma: float, grad_bound: float,
                     tol: float = EPSILON_CHECK_TOL) -> None:
    """Reject tube radii beyond the admissible bound (small slack so values
    quoted at four decimals are accepted)."""
    limit = max_admissible_epsilon(alpha, gamma, grad_bound)
    if epsilon > limit + tol:
        raise ValueError(
            f"epsilon={epsilon} exceeds the admissible bound "
            f"alpha*gamma/grad_bound={limit:.6g}"
        )


def adaptive_control(adapt: AdaptiveGainState, gains: SmcGains,
                     params: sf.FilterParams, model: UncertaintyModel,
                     t: float, state: PlantState,
                     field=None) -> tuple[np.ndarray, AdaptiveGainState, float]:
    """One adaptive-law evaluation at a recorded sample.

    Latches the switching time at the first sample with ||sigma|| <=
    epsilon/2; from then on the barrier gain replaces the full gain. Both
    regimes use the stabilizing (negative) unit-vector direction. Returns
    the control, the updated switching state, and the applied scalar gain.
    """
    sv = sliding_var(params, state, field=field)
    if not adapt.switched and sv.norm <= 0.5 * adapt.epsilon:
        adapt = replace(adapt, switched=True, tau=float(t))
    if adapt.switched:
        k = barrier_gain(sv.norm, adapt.epsilon)
        unit = sv.sigma / max(sv.norm, TOL_SIGMA)
        u = -k * model.apply_inverse(state, unit)
        return u, adapt, k
    vdot = sf.velocity_rate(params, state.x, state.xdot, field=field)
    rho_val = disturbance_compensation(gains, model.matrix(state), t, state, vdot)
    u = smc_control(gains, model.matrix_inverse(state), sv, rho_val)
    return u, adapt, (gains.kappa + rho_val) / (1.0 + gains.mu)


class SmcController:
    """Unit-vector controller bound to one plant/filter pair.

    `control` is pure and safe to call at integrator stage states;
    `at_sample` additionally returns the applied gain and sliding-variable
    norm for trajectory recording.
    """

    def __init__(self, gains: SmcGains, model: UncertaintyModel,
                 params: sf.FilterParams, tol_sigma: float = TOL_SIGMA):
        self.gains = gains
        self.model = model
        self.params = params
        self.tol_sigma = tol_sigma
        self.kappa = gains.kappa
        self._field = sf.velocity_field(params)

    def _sigma(self, x, xdot):
        sigma = xdot - self._field(x)
        return sigma, sqrt(float(sigma @ sigma))

    def _full_gain(self, t, state):
        vdot = sf.velocity_rate(self.params, state.x, state.xdot, field=self._field)
        rho_val = (self.model.matrix_norm(state) * self.gains.d_bound(t, state)
                   + sqrt(float(vdot @ vdot)))
        return (self.gains.kappa + rho_val) / (1.0 + self.gains.mu)

    def _gain_at(self, t, state, sigma_norm):
        return self._full_gain(t, state)

    def _eval(self, t, x, xdot):
        state = PlantState(x, xdot)
        sigma, norm = self._sigma(x, xdot)
        k = self._gain_at(t, state, norm)
        u = -k * self.model.apply_inverse(state, sigma / max(norm, self.tol_sigma))
        return u, k, norm

    def control(self, t, x, xdot) -> np.ndarray:
        return self._eval(t, x, xdot)[0]

    def at_sample(self, t, x, xdot):
        return self._eval(t, x, xdot)


class AdaptiveController(SmcController):
    """Unit-vector controller with the barrier-gain regime after switching.

    The switching state is owned by one simulation run: `at_sample` latches
    it at recorded samples, while `control` (used at integrator stage
    states) keeps the state machine frozen.
    """

    def __init__(self, gains: SmcGains, adapt: AdaptiveGainState,
                 model: UncertaintyModel, params: sf.FilterParams,
                 alpha: float, grad_bound: float,
                 tol_sigma: float = TOL_SIGMA):
        super().__init__(gains, model, params, tol_sigma=tol_sigma)
        validate_epsilon(adapt.epsilon, alpha, adapt.gamma, grad_bound)
        self.adapt = adapt
        self.clamp_times: list[float] = []

    @property
    def tau(self) -> Optional[float]:
        return self.adapt.tau

    def _gain_at(self, t, state, sigma_norm):
        if self.adapt.switched:
            if barrier_gain_clamps(sigma_norm, self.adapt.epsilon):
                self.clamp_times.append(float(t))
                warnings.warn(
                    f"barrier gain clamped at t={t:.6g}: sliding variable "
                    "reached the tube radius",
                    RuntimeWarning,
                    stacklevel=3,
                )
            return barrier_gain(sigma_norm, self.adapt.epsilon)
        return self._full_gain(t, state)

    def at_sample(self, t, x, xdot):
        state = PlantState(x, xdot)
        sigma, norm = self._sigma(x, xdot)
        if not self.adapt.switched and norm <= 0.5 * self.adapt.epsilon:
            self.adapt = replace(self.adapt, switched=True, tau=float(t))
        k = self._gain_at(t, state, norm)
        u = -k * self.model.apply_inverse(state, sigma / max(norm, self.tol_sigma))
        return u, k, norm
