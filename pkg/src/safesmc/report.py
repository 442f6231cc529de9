"""Trajectory CSV serialization and the run-level JSON report.

Floats are written with 17 significant digits so a parsed CSV reproduces
the recorded series bit for bit. The CSV columns map one-to-one onto the
usual result panels: positions, velocities, sliding-variable norm, barrier
values, gain, and control.
"""

import json
from pathlib import Path

import numpy as np

from .simulate import EventLog, Trajectory


def _columns(dim: int) -> list[str]:
    cols = ["t"]
    cols += [f"x{i + 1}" for i in range(dim)]
    cols += [f"v{i + 1}" for i in range(dim)]
    cols += ["sigma_norm", "h", "h_gamma", "gain"]
    cols += [f"u{i + 1}" for i in range(dim)]
    return cols


def write_trajectory_csv(traj: Trajectory, path) -> None:
    path = Path(path)
    n = traj.dim
    table = np.column_stack([
        traj.times, traj.x, traj.xdot, traj.sigma_norm, traj.h, traj.h_gamma,
        traj.gain, traj.u,
    ])
    with path.open("w", newline="") as fh:
        fh.write(",".join(_columns(n)) + "\n")
        for row in table:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def read_trajectory_csv(path) -> Trajectory:
    """Rebuild a trajectory from its CSV (events and step metadata are not
    stored in the CSV; the step is inferred from the time axis)."""
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    n = sum(1 for c in header if c.startswith("x"))
    times = data[:, 0]
    x = data[:, 1:1 + n]
    xdot = data[:, 1 + n:1 + 2 * n]
    sigma_norm = data[:, 1 + 2 * n]
    h = data[:, 2 + 2 * n]
    h_gamma = data[:, 3 + 2 * n]
    gain = data[:, 4 + 2 * n]
    u = data[:, 5 + 2 * n:5 + 3 * n]
    dt = float(times[1] - times[0]) if times.size > 1 else 0.0
    return Trajectory(times, x, xdot, sigma_norm, h, h_gamma, gain, u,
                      events=EventLog(), dt=dt)


def run_report(scenario, runs: list[dict], status: int) -> dict:
    """Assemble the run-level JSON report structure."""
    return {
        "scenario": scenario.name,
        "description": scenario.description,
        "status": status,
        "resolved": {
            "controller": scenario.controller_type,
            "alpha": scenario.alpha,
            "beta": scenario.beta,
            "mu": scenario.model.mu,
            "uncertainty_norm_bound": scenario.model.uncertainty_norm_bound,
            "grad_bound": scenario.grad_bound,
            "grad_bound_mode": scenario.grad_bound_mode,
            "grad_bound_computed": scenario.grad_bound_computed,
            "gamma": scenario.gamma,
            "epsilon": scenario.epsilon,
            "epsilon_mode": scenario.epsilon_mode,
            "dt": scenario.sim.dt,
            "horizon": scenario.sim.horizon,
            "scheme": scenario.sim.scheme,
        },
        "runs": runs,
    }


def write_report_json(report: dict, path) -> None:
    Path(path).write_text(json.dumps(report, indent=2, default=_jsonable) + "\n")


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj)}")
