"""Figure rendering for run reports.

Writes one plane overview (all trajectories around the obstacle, with the
unsafe disk and its relaxation shaded) and a per-run panel figure (states,
control, sliding-variable norm against time). Long series are thinned for
drawing only; the CSV keeps full resolution.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.patches import Circle, Rectangle  # noqa: E402

MAX_DRAW_POINTS = 4000


def _thin(*arrays):
    n = arrays[0].shape[0]
    stride = max(1, n // MAX_DRAW_POINTS)
    return [a[::stride] for a in arrays]


def plot_overview(trajectories, cbf, box, goal, gamma: float, path) -> None:
    """All position trajectories in the plane with the unsafe disk."""
    fig, ax = plt.subplots(figsize=(6, 6))
    ax.add_patch(Rectangle(
        (box.lower[0], box.lower[1]),
        box.upper[0] - box.lower[0], box.upper[1] - box.lower[1],
        fill=False, edgecolor="0.6", linewidth=1.0))
    if gamma > 0.0:
        relaxed = np.sqrt(max(cbf.radius ** 2 - gamma, 0.0))
        ax.add_patch(Circle(cbf.center, cbf.radius, color="#ffd8a8", zorder=1))
        ax.add_patch(Circle(cbf.center, relaxed, color="#ff922b", zorder=2))
    else:
        ax.add_patch(Circle(cbf.center, cbf.radius, color="#ffd8a8", zorder=1))
    for traj in trajectories:
        xs, = _thin(traj.x)
        ax.plot(xs[:, 0], xs[:, 1], linewidth=1.0, zorder=3)
        ax.plot(xs[0, 0], xs[0, 1], "k.", markersize=4, zorder=4)
    ax.plot(goal[0], goal[1], "g*", markersize=12, zorder=5)
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    ax.set_aspect("equal")
    margin = 0.3
    ax.set_xlim(box.lower[0] - margin, box.upper[0] + margin)
    ax.set_ylim(box.lower[1] - margin, box.upper[1] + margin)
    ax.set_title("position trajectories")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_run(traj, path, epsilon: float | None = None) -> None:
    """States, control, and sliding-variable panels for one run."""
    t, x, v, u, sig = _thin(traj.times, traj.x, traj.xdot, traj.u,
                            traj.sigma_norm)
    fig, axes = plt.subplots(3, 1, figsize=(7, 8), sharex=True)

    for i in range(x.shape[1]):
        axes[0].plot(t, x[:, i], color="black", linewidth=1.0,
                     label="position" if i == 0 else None)
        axes[0].plot(t, v[:, i], color="tab:blue", linewidth=1.0,
                     label="velocity" if i == 0 else None)
    axes[0].set_ylabel("states")
    axes[0].legend(loc="best", fontsize=8)

    for i in range(u.shape[1]):
        axes[1].plot(t, u[:, i], linewidth=0.8, label=f"u{i + 1}")
    axes[1].set_ylabel("control")
    axes[1].legend(loc="best", fontsize=8)

    axes[2].plot(t, sig, linewidth=1.0)
    if epsilon is not None:
        axes[2].axhline(epsilon, linestyle="--", color="tab:red",
                        linewidth=0.8, label="tube radius")
        axes[2].axhline(0.5 * epsilon, linestyle=":", color="tab:red",
                        linewidth=0.8, label="switch level")
        axes[2].legend(loc="best", fontsize=8)
    if traj.events.tau is not None:
        axes[2].axvline(traj.events.tau, color="0.5", linewidth=0.8)
    axes[2].set_ylabel("sliding-variable norm")
    axes[2].set_xlabel("t [s]")

    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
