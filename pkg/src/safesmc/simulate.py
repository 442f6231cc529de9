"""Fixed-step integration of the discontinuous closed loop.

The unit-vector control makes the right-hand side discontinuous on the
sliding manifold, so small fixed steps (explicit Euler or RK4, with the
controller re-evaluated at every stage state) are used instead of adaptive
steppers, which stall on chattering. Events (switching time, first manifold
hit, gain clamps) are latched on post-step samples.
"""

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .plant import PlantState, UncertaintyModel, acceleration

SCHEMES = ("euler", "rk4")


class DivergenceError(RuntimeError):
    """State became non-finite during integration."""

    def __init__(self, t: float, step: int):
        super().__init__(t, step)
        self.t = t
        self.step = step

    def __str__(self):
        return f"state diverged (NaN/inf) at t={self.t:.6g}, step {self.step}"


@dataclass(frozen=True)
class SimConfig:
    dt: float
    horizon: float
    scheme: str = "rk4"
    tol_sigma: float = 1e-9
    reach_threshold: float = 1e-3
    record_stride: int = 1

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ValueError("dt must be positive")
        if not self.horizon >= self.dt:
            raise ValueError("horizon must be at least one step")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        if self.record_stride < 1:
            raise ValueError("record stride must be at least 1")


@dataclass(frozen=True)
class EventLog:
    tau: Optional[float] = None
    first_reach: Optional[float] = None
    clamp_times: tuple = ()


@dataclass
class Trajectory:
    """Time-indexed record of one closed-loop run.

    All series share the sample axis; `gamma` is the safe-set relaxation the
    h_gamma column was recorded with (0 for the plain safe set).
    """

    times: np.ndarray
    x: np.ndarray
    xdot: np.ndarray
    sigma_norm: np.ndarray
    h: np.ndarray
    h_gamma: np.ndarray
    gain: np.ndarray
    u: np.ndarray
    events: EventLog = field(default_factory=EventLog)
    dt: float = 0.0
    scheme: str = "rk4"
    record_stride: int = 1
    gamma: float = 0.0

    def __post_init__(self):
        n = self.times.size
        for name in ("x", "xdot", "sigma_norm", "h", "h_gamma", "gain", "u"):
            if getattr(self, name).shape[0] != n:
                raise ValueError(f"series '{name}' does not match the time axis")
        if n > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("sample times must be strictly increasing")

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    def final_state(self) -> PlantState:
        return PlantState(self.x[-1].copy(), self.xdot[-1].copy())

    def series_equal(self, other: "Trajectory") -> bool:
        """Bitwise equality of all recorded series."""
        return all(
            np.array_equal(getattr(self, name), getattr(other, name))
            for name in ("times", "x", "xdot", "sigma_norm", "h", "h_gamma",
                         "gain", "u")
        )


@dataclass
class RunOutcome:
    """One batch entry: either a trajectory or the error that ended the run."""

    trajectory: Optional[Trajectory] = None
    error: Optional[Exception] = None

    @property
    def ok(self) -> bool:
        return self.error is None


def simulate(model: UncertaintyModel, controller, params, config: SimConfig,
             initial: PlantState, gamma: float = 0.0,
             use_fast=None) -> Trajectory:
    """Integrate the closed loop over [0, horizon] and record every invariant
    the monitors need.

    The controller is evaluated once per integrator stage; its sample-level
    evaluation (which may latch the adaptive switch) doubles as the first
    stage of each step. Raises DivergenceError on the first non-finite state.

    Planar catalog models run through a scalarized kernel with identical
    semantics (see _fastpath); pass use_fast=False to force the generic loop
    or use_fast=True to require the kernel.
    """
    if use_fast is not False:
        from ._fastpath import try_fast_simulate

        fast = try_fast_simulate(model, controller, params, config, initial,
                                 gamma)
        if fast is not None:
            return fast
        if use_fast is True:
            raise ValueError("fast path unavailable for this configuration")

    n = model.dim
    x0 = np.asarray(initial.x, dtype=float)
    v0 = np.asarray(initial.xdot, dtype=float)
    if x0.shape != (n,) or v0.shape != (n,):
        raise ValueError("initial state dimension does not match the model")

    dt = config.dt
    n_steps = int(round(config.horizon / dt))
    if n_steps < 1:
        raise ValueError("horizon shorter than one step")

    stride = config.record_stride
    rec_steps = list(range(0, n_steps + 1, stride))
    if rec_steps[-1] != n_steps:
        rec_steps.append(n_steps)
    n_rec = len(rec_steps)

    times = np.empty(n_rec)
    xs = np.empty((n_rec, n))
    vs = np.empty((n_rec, n))
    signorm = np.empty(n_rec)
    hs = np.empty(n_rec)
    hgs = np.empty(n_rec)
    gains = np.empty(n_rec)
    us = np.empty((n_rec, n))

    cbf = params.cbf
    state = np.concatenate([x0, v0])
    first_reach = None
    kappa = getattr(controller, "kappa", None)

    rec = 0
    for k in range(n_steps + 1):
        t = k * dt
        x = state[:n]
        xd = state[n:]
        u, gain, snorm = controller.at_sample(t, x, xd)
        if k == 0 and kappa is not None and snorm > 0.0 and kappa * dt >= snorm:
            warnings.warn(
                f"step kappa*dt={kappa * dt:.3g} is not small against "
                f"||sigma(x0)||={snorm:.3g}; reaching resolution will be poor",
                RuntimeWarning,
            )
        if first_reach is None and snorm <= config.reach_threshold:
            first_reach = t
        if k == rec_steps[rec]:
            times[rec] = t
            xs[rec] = x
            vs[rec] = xd
            signorm[rec] = snorm
            hval = cbf.h(x)
            hs[rec] = hval
            hgs[rec] = hval + gamma
            gains[rec] = gain
            us[rec] = u
            rec += 1
        if k == n_steps:
            break
        state = _step(model, controller, t, state, dt, u, n, config.scheme)
        if not np.isfinite(state).all():
            raise DivergenceError(t + dt, k + 1)

    events = EventLog(
        tau=getattr(controller, "tau", None),
        first_reach=first_reach,
        clamp_times=tuple(getattr(controller, "clamp_times", ())),
    )
    return Trajectory(times, xs, vs, signorm, hs, hgs, gains, us, events,
                      dt=dt, scheme=config.scheme, record_stride=stride,
                      gamma=gamma)


def _step(model, controller, t, state, dt, u_sample, n, scheme):
    k1 = _deriv_known_u(model, u_sample, t, state, n)
    if scheme == "euler":
        return state + dt * k1
    half = 0.5 * dt
    k2 = _deriv(model, controller, t + half, state + half * k1, n)
    k3 = _deriv(model, controller, t + half, state + half * k2, n)
    k4 = _deriv(model, controller, t + dt, state + dt * k3, n)
    return state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _deriv(model, controller, t, state, n):
    x = state[:n]
    xd = state[n:]
    u = controller.control(t, x, xd)
    return np.concatenate([xd, acceleration(model, u, t, PlantState(x, xd))])


def _deriv_known_u(model, u, t, state, n):
    x = state[:n]
    xd = state[n:]
    return np.concatenate([xd, acceleration(model, u, t, PlantState(x, xd))])


def batch_simulate(scenario, initial_conditions=None) -> list[RunOutcome]:
    """Run one trajectory per initial condition, order-preserving.

    `scenario` must provide `build_run(initial) -> (model, controller,
    params, config, gamma)`. Per-run errors are collected in the outcome
    list instead of aborting the batch.
    """
    if initial_conditions is None:
        initial_conditions = scenario.initial_conditions
    outcomes = []
    for ic in initial_conditions:
        try:
            model, controller, params, config, gamma = scenario.build_run(ic)
            traj = simulate(model, controller, params, config, ic, gamma=gamma)
            outcomes.append(RunOutcome(trajectory=traj))
        except Exception as exc:  # noqa: BLE001 - collected per run by contract
            outcomes.append(RunOutcome(error=exc))
    return outcomes
