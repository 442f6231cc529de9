"""Runtime verification of the closed-loop guarantees on recorded trajectories.

Each monitor is a pure function of a trajectory and parameters, evaluated on
recorded samples only (no interpolation; certification runs use record
stride 1). Continuous-time strict inequalities acquire O(dt) slack, so the
default tolerances scale with the recorded step and tighten under
refinement.
"""

from dataclasses import dataclass, field
from math import sqrt
from typing import Optional

import numpy as np

from .cbf import ObstacleCbf
from .simulate import Trajectory

TOL_H = 1e-6


@dataclass(frozen=True)
class MonitorVerdict:
    """Pass/fail with the worst margin over the checked samples.

    The margin convention is 'checked quantity minus its bound', so the
    verdict passes iff worst_margin >= -tolerance (plus any extra condition
    recorded in details, e.g. the reaching-time deadline).
    """

    name: str
    passed: bool
    worst_margin: float
    worst_time: float
    tolerance: float
    note: str = ""
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "worst_margin": self.worst_margin,
            "worst_time": self.worst_time,
            "tolerance": self.tolerance,
            "note": self.note,
            "details": {k: v for k, v in self.details.items()},
        }


def monitor_safety(traj: Trajectory, cbf: ObstacleCbf, gamma: float = 0.0,
                   tol_h: float = TOL_H) -> MonitorVerdict:
    """Membership of the (gamma-relaxed) safe set along the whole run."""
    if gamma < 0.0:
        raise ValueError("gamma must be nonnegative")
    diffs = traj.x - cbf.center
    margins = np.einsum("ij,ij->i", diffs, diffs) - cbf.radius ** 2 + gamma
    worst = int(np.argmin(margins))
    return MonitorVerdict(
        name=f"safety(gamma={gamma:g})",
        passed=bool(margins[worst] >= -tol_h),
        worst_margin=float(margins[worst]),
        worst_time=float(traj.times[worst]),
        tolerance=tol_h,
    )


def monitor_reaching(traj: Trajectory, kappa: float,
                     envelope_tol: Optional[float] = None,
                     reach_threshold: Optional[float] = None,
                     time_tol: Optional[float] = None) -> MonitorVerdict:
    """Finite-time reaching of the sliding manifold.

    Checks the decay envelope ||sigma(t)|| <= max(0, ||sigma_0|| -
    kappa t / sqrt(2)) on pre-switch samples and that the sliding-variable
    norm first dips under the reach threshold no later than
    sqrt(2) ||sigma_0|| / kappa plus slack.
    """
    dt = traj.dt
    if envelope_tol is None:
        envelope_tol = 50.0 * kappa * dt
    if reach_threshold is None:
        reach_threshold = 1e-3
    if time_tol is None:
        time_tol = 10.0 * dt

    t = traj.times
    sig = traj.sigma_norm
    if traj.events.tau is not None:
        mask = t <= traj.events.tau
        t = t[mask]
        sig = sig[mask]

    s0 = float(sig[0])
    envelope = np.maximum(0.0, s0 - (kappa / sqrt(2.0)) * t)
    margins = envelope - sig
    worst = int(np.argmin(margins))
    envelope_ok = bool(margins[worst] >= -envelope_tol)

    deadline = sqrt(2.0) * s0 / kappa + time_tol
    below = np.nonzero(traj.sigma_norm <= reach_threshold)[0]
    reach_time = float(traj.times[below[0]]) if below.size else None
    reach_ok = reach_time is not None and reach_time <= deadline

    note = ""
    if reach_time is None:
        note = "sliding variable never dipped under the reach threshold"
    elif not reach_ok:
        note = f"manifold reached at t={reach_time:.6g}, after the deadline"
    return MonitorVerdict(
        name="reaching",
        passed=envelope_ok and reach_ok,
        worst_margin=float(margins[worst]),
        worst_time=float(t[worst]),
        tolerance=envelope_tol,
        note=note,
        details={"reach_time": reach_time, "deadline": deadline,
                 "reach_threshold": reach_threshold},
    )


def monitor_reach_certificate(traj: Trajectory, cbf: ObstacleCbf, alpha: float,
                              alpha_c: float, gamma: float = 0.0,
                              tol: Optional[float] = None) -> MonitorVerdict:
    """Exponential lower envelope of the reaching-phase safety certificate.

    The certificate -||sigma||^2 / 2 + alpha_c (h + gamma) must stay above
    its initial value times exp(-alpha t) until the manifold is reached (or
    the adaptive law switches). A nonpositive initial certificate means the
    configuration violates the gain-derivation precondition.
    """
    if tol is None:
        tol = 1e-4 + 10.0 * traj.dt

    t = traj.times
    end = traj.events.tau if traj.events.tau is not None else traj.events.first_reach
    if end is not None:
        mask = t <= end
        t = t[mask]
    diffs = traj.x[: t.size] - cbf.center
    h = np.einsum("ij,ij->i", diffs, diffs) - cbf.radius ** 2
    cert = -0.5 * traj.sigma_norm[: t.size] ** 2 + alpha_c * (h + gamma)
    if cert[0] <= 0.0:
        raise ValueError(
            "initial certificate value is nonpositive; the initial condition "
            "violates the safe-reaching precondition"
        )
    envelope = cert[0] * np.exp(-alpha * t)
    margins = cert - envelope
    worst = int(np.argmin(margins))
    return MonitorVerdict(
        name=f"reach_certificate(gamma={gamma:g})",
        passed=bool(margins[worst] >= -tol),
        worst_margin=float(margins[worst]),
        worst_time=float(t[worst]),
        tolerance=tol,
        details={"checked_until": float(t[-1])},
    )


def monitor_sigma_containment(traj: Trajectory, epsilon: float,
                              tol: Optional[float] = None) -> MonitorVerdict:
    """Post-switch confinement ||sigma(t)|| < epsilon for t >= tau.

    Vacuously passes (with a note) when the switch never latched; any gain
    clamp recorded during the run fails the verdict at the clamp time, since
    a clamp means the sliding variable reached the tube radius.
    """
    if tol is None:
        tol = 0.05 * epsilon
    tau = traj.events.tau
    if tau is None:
        return MonitorVerdict(
            name="sigma_containment",
            passed=True,
            worst_margin=float("inf"),
            worst_time=float(traj.times[0]),
            tolerance=tol,
            note="no switch latched; containment vacuous",
        )
    if traj.events.clamp_times:
        t_clamp = traj.events.clamp_times[0]
        return MonitorVerdict(
            name="sigma_containment",
            passed=False,
            worst_margin=-float(epsilon),
            worst_time=float(t_clamp),
            tolerance=tol,
            note="barrier gain clamped: sliding variable reached the tube radius",
            details={"clamp_times": list(traj.events.clamp_times)},
        )
    mask = traj.times >= tau
    t = traj.times[mask]
    margins = epsilon - traj.sigma_norm[mask]
    worst = int(np.argmin(margins))
    return MonitorVerdict(
        name="sigma_containment",
        passed=bool(margins[worst] >= -tol),
        worst_margin=float(margins[worst]),
        worst_time=float(t[worst]),
        tolerance=tol,
        details={"tau": float(tau)},
    )
