"""Scenario-driven command line: run, resolve, check.

`run` simulates every initial condition of a scenario, writes per-trajectory
CSVs, a JSON report with all resolved constants and monitor verdicts, and
(by default) the overview/per-run figures next to them.

Exit codes: 0 all monitors passed, 1 monitor failure, 2 invalid scenario
(message names the field), 3 divergence (takes precedence over 1).
"""

import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import click

from . import monitors as mon
from . import plots, report
from .plant import check_disturbance_bound, check_uncertainty_bounds
from .scenario import (ResolvedScenario, ScenarioError, bundled_scenario_names,
                       load_scenario, locate_scenario)
from .simulate import DivergenceError, RunOutcome, batch_simulate, simulate

EXIT_OK = 0
EXIT_MONITOR = 1
EXIT_SCHEMA = 2
EXIT_DIVERGED = 3


@click.group()
def main():
    """Simulation and runtime verification for safe sliding-mode control."""


@main.command(name="run")
@click.argument("scenario")
@click.option("--out", type=click.Path(file_okay=False), default=None,
              help="Output directory (default: out_<scenario-name>).")
@click.option("--dt", type=float, default=None, help="Override the step size.")
@click.option("--horizon", type=float, default=None, help="Override the horizon.")
@click.option("--parallel", type=int, default=1,
              help="Worker processes for the trajectory batch.")
@click.option("--plot/--no-plot", default=True, help="Render figures.")
def run_cmd(scenario, out, dt, horizon, parallel, plot):
    """Simulate a scenario and write CSVs, report, and figures."""
    sys.exit(run_scenario(scenario, out_dir=out, dt=dt, horizon=horizon,
                          parallel=parallel, plot=plot))


@main.command(name="resolve")
@click.argument("scenario")
def resolve_cmd(scenario):
    """Print every derived constant without simulating."""
    sys.exit(print_resolved(scenario))


@main.command(name="check")
@click.argument("scenario")
def check_cmd(scenario):
    """Run the model-bound checkers on the scenario plant."""
    sys.exit(check_scenario(scenario))


@main.command(name="scenarios")
def scenarios_cmd():
    """List bundled scenario names."""
    for name in bundled_scenario_names():
        click.echo(name)


def _load(ref, dt=None, horizon=None) -> ResolvedScenario:
    return load_scenario(locate_scenario(ref), dt=dt, horizon=horizon)


def _monitor_suite(scenario: ResolvedScenario, traj, gains: dict):
    if scenario.controller_type == "adaptive":
        return [
            mon.monitor_safety(traj, scenario.cbf, gamma=scenario.gamma),
            mon.monitor_reach_certificate(
                traj, scenario.cbf, scenario.alpha, gains["alpha_c"],
                gamma=scenario.gamma),
            mon.monitor_sigma_containment(traj, scenario.epsilon),
        ]
    return [
        mon.monitor_safety(traj, scenario.cbf, gamma=0.0),
        mon.monitor_reaching(traj, gains["kappa"],
                             reach_threshold=scenario.sim.reach_threshold),
        mon.monitor_reach_certificate(
            traj, scenario.cbf, scenario.alpha, gains["alpha_c"], gamma=0.0),
    ]


def _worker(args):
    ref, dt, horizon, index = args
    scenario = _load(ref, dt=dt, horizon=horizon)
    ic = scenario.initial_conditions[index]
    try:
        model, controller, params, config, gamma = scenario.build_run(ic)
        traj = simulate(model, controller, params, config, ic, gamma=gamma)
        return index, RunOutcome(trajectory=traj)
    except Exception as exc:  # noqa: BLE001 - mirrored from batch_simulate
        return index, RunOutcome(error=exc)


def run_scenario(ref, out_dir=None, dt=None, horizon=None, parallel=1,
                 plot=True) -> int:
    try:
        scenario = _load(ref, dt=dt, horizon=horizon)
    except ScenarioError as exc:
        click.echo(f"scenario error: {exc}", err=True)
        return EXIT_SCHEMA

    out = Path(out_dir) if out_dir else Path(f"out_{scenario.name}")
    out.mkdir(parents=True, exist_ok=True)

    ics = scenario.initial_conditions
    if parallel > 1 and len(ics) > 1:
        path = str(locate_scenario(ref))
        jobs = [(path, dt, horizon, i) for i in range(len(ics))]
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            results = dict(pool.map(_worker, jobs))
        outcomes = [results[i] for i in range(len(ics))]
    else:
        outcomes = batch_simulate(scenario)

    diverged = False
    all_passed = True
    run_dicts = []
    trajectories = []
    for i, (ic, outcome) in enumerate(zip(ics, outcomes)):
        gains = scenario.resolve_gains(ic)
        entry = {
            "index": i,
            "initial": {"x": ic.x.tolist(), "xdot": ic.xdot.tolist()},
            **gains,
        }
        if not outcome.ok:
            if isinstance(outcome.error, DivergenceError):
                diverged = True
                entry["error"] = str(outcome.error)
            else:
                raise outcome.error
            run_dicts.append(entry)
            click.echo(f"run {i}: ERROR {entry['error']}")
            continue

        traj = outcome.trajectory
        trajectories.append(traj)
        verdicts = _monitor_suite(scenario, traj, gains)
        all_passed &= all(v.passed for v in verdicts)

        csv_name = f"traj_{i:03d}.csv"
        report.write_trajectory_csv(traj, out / csv_name)
        goal_dist = float(
            ((traj.x[-1] - scenario.filter_params.goal) ** 2).sum() ** 0.5)
        entry.update({
            "csv": csv_name,
            "tau": traj.events.tau,
            "first_reach": traj.events.first_reach,
            "clamp_events": len(traj.events.clamp_times),
            "final_position": traj.x[-1].tolist(),
            "goal_distance": goal_dist,
            "monitors": [v.to_dict() for v in verdicts],
        })
        run_dicts.append(entry)
        flags = " ".join(
            f"{v.name}={'pass' if v.passed else 'FAIL'}" for v in verdicts)
        click.echo(f"run {i}: {flags} goal_distance={goal_dist:.4g}")

        if plot:
            eps = scenario.epsilon if scenario.controller_type == "adaptive" else None
            plots.plot_run(traj, out / f"run_{i:03d}.png", epsilon=eps)

    if plot and trajectories:
        plots.plot_overview(trajectories, scenario.cbf, scenario.box,
                            scenario.filter_params.goal, scenario.gamma,
                            out / "overview.png")

    status = exit_status(diverged, all_passed)
    report.write_report_json(report.run_report(scenario, run_dicts, status),
                             out / "report.json")
    click.echo(f"report: {out / 'report.json'} (status {status})")
    return status


def exit_status(diverged: bool, all_passed: bool) -> int:
    """Divergence dominates monitor failures."""
    if diverged:
        return EXIT_DIVERGED
    return EXIT_OK if all_passed else EXIT_MONITOR


def print_resolved(ref) -> int:
    try:
        scenario = _load(ref)
    except ScenarioError as exc:
        click.echo(f"scenario error: {exc}", err=True)
        return EXIT_SCHEMA

    click.echo(f"scenario: {scenario.name}")
    click.echo(f"controller: {scenario.controller_type}")
    click.echo(f"alpha: {scenario.alpha:.6g}")
    click.echo(f"beta: {scenario.beta:.6g}")
    click.echo(f"mu: {scenario.model.mu:.6g}")
    click.echo("uncertainty_norm_bound: "
               f"{scenario.model.uncertainty_norm_bound:.6g}")
    click.echo(f"grad_bound: {scenario.grad_bound:.6g} "
               f"({scenario.grad_bound_mode}; computed={scenario.grad_bound_computed:.6g})")
    if scenario.controller_type == "adaptive":
        click.echo(f"gamma: {scenario.gamma:.6g}")
        click.echo(f"epsilon: {scenario.epsilon:.6g} ({scenario.epsilon_mode})")
    click.echo(f"sim: dt={scenario.sim.dt:g} horizon={scenario.sim.horizon:g} "
               f"scheme={scenario.sim.scheme}")

    for i, ic in enumerate(scenario.initial_conditions):
        gains = scenario.resolve_gains(ic)
        click.echo(
            f"ic[{i}] x={ic.x.tolist()} xdot={ic.xdot.tolist()} "
            f"h0={gains['h0']:.6g} sigma0={gains['sigma0_norm']:.6g} "
            f"alpha_c={gains['alpha_c']:.6g} kappa={gains['kappa']:.6g}")

    for rep in _bound_reports(scenario, n_grid=15, n_time=20, n_random=50):
        click.echo(f"{rep.name}: {'ok' if rep.ok else 'VIOLATED'} "
                   f"(worst margin {rep.worst_margin:.3g} "
                   f"over {rep.n_samples} samples)")
    return EXIT_OK


def _bound_reports(scenario: ResolvedScenario, **kwargs):
    t_span = (0.0, scenario.sim.horizon)
    return [
        check_disturbance_bound(scenario.model, scenario.box, t_span=t_span,
                                **kwargs),
        check_uncertainty_bounds(scenario.model, scenario.box, t_span=t_span,
                                 **kwargs),
    ]


def check_scenario(ref) -> int:
    try:
        scenario = _load(ref)
    except ScenarioError as exc:
        click.echo(f"scenario error: {exc}", err=True)
        return EXIT_SCHEMA
    ok = True
    for rep in _bound_reports(scenario, n_grid=50, n_time=100, n_random=200):
        ok &= rep.ok
        click.echo(f"{rep.name}: {'ok' if rep.ok else 'VIOLATED'} "
                   f"(worst margin {rep.worst_margin:.3g} "
                   f"over {rep.n_samples} samples)")
        for viol in rep.violations:
            click.echo(f"  violation at t={viol[0]:.4g}, x={viol[1].tolist()}")
    return EXIT_OK if ok else EXIT_MONITOR


if __name__ == "__main__":
    main()
