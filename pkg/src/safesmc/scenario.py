"""Declarative scenario files: schema validation, catalog resolution, and
derivation of the run constants.

A scenario is a flat YAML key tree (see README for the schema). Plant
callables come from a named catalog rather than arbitrary code; the
reaching gain, gradient bound, and tube radius are either derived here or
taken as literals, and every derived value is reported per initial
condition so a run is fully reproducible from its report.
"""

from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from . import plant
from .cbf import ClassKGain, ObstacleCbf, StateBox, grad_norm_bound
from .control import (AdaptiveController, AdaptiveGainState, SmcController,
                      SmcGains, max_admissible_epsilon, safe_reaching_gain,
                      sliding_var, validate_epsilon)
from .plant import PlantState, UncertaintyModel
from .safety_filter import FilterParams
from .simulate import SimConfig


class ScenarioError(ValueError):
    """Schema or precondition violation, carrying the offending field path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _get(tree: dict, path: str, typ=None, required=True, default=None):
    node = tree
    walked = []
    for part in path.split("."):
        walked.append(part)
        if not isinstance(node, dict) or part not in node:
            if required:
                raise ScenarioError(".".join(walked), "missing required field")
            return default
        node = node[part]
    if typ is not None and not isinstance(node, typ):
        if typ is float and isinstance(node, int) and not isinstance(node, bool):
            return float(node)
        raise ScenarioError(path, f"expected {typ.__name__}, got {type(node).__name__}")
    return node


def _vector(tree: dict, path: str, dim: Optional[int] = None) -> np.ndarray:
    raw = _get(tree, path, list)
    try:
        vec = np.asarray([float(v) for v in raw])
    except (TypeError, ValueError):
        raise ScenarioError(path, "expected a list of numbers") from None
    if dim is not None and vec.size != dim:
        raise ScenarioError(path, f"expected {dim} components, got {vec.size}")
    return vec


@dataclass
class ResolvedScenario:
    """Fully validated scenario with resolved constants and run factories."""

    name: str
    description: str
    model: UncertaintyModel
    cbf: ObstacleCbf
    box: StateBox
    filter_params: FilterParams
    controller_type: str
    beta: float
    grad_bound: float
    grad_bound_mode: str
    grad_bound_computed: float
    kappa_literal: Optional[float]
    gamma: float
    epsilon: Optional[float]
    epsilon_mode: str
    sim: SimConfig
    initial_conditions: list

    @property
    def alpha(self) -> float:
        return self.filter_params.alpha.alpha

    def resolve_gains(self, initial: PlantState) -> dict:
        """Derived per-run constants for the given initial condition."""
        h0 = self.cbf.h(initial.x)
        sv = sliding_var(self.filter_params, initial)
        if self.kappa_literal is not None:
            kappa = self.kappa_literal
            alpha_c = (sv.norm ** 2 + self.beta) / (2.0 * h0) if h0 > 0 else float("nan")
        else:
            kappa, alpha_c = safe_reaching_gain(
                self.alpha, sv.norm, self.beta, h0, self.grad_bound)
        return {"sigma0_norm": sv.norm, "h0": h0, "kappa": kappa,
                "alpha_c": alpha_c}

    def build_run(self, initial: PlantState):
        """(model, controller, params, sim config, gamma) for one trajectory."""
        gains_info = self.resolve_gains(initial)
        gains = SmcGains(
            kappa=gains_info["kappa"],
            mu=self.model.mu,
            beta=self.beta,
            alpha_c=gains_info["alpha_c"],
            d_bound=self.model.disturbance_bound,
        )
        if self.controller_type == "adaptive":
            adapt = AdaptiveGainState(epsilon=self.epsilon, gamma=self.gamma)
            controller = AdaptiveController(
                gains, adapt, self.model, self.filter_params,
                alpha=self.alpha, grad_bound=self.grad_bound,
                tol_sigma=self.sim.tol_sigma)
            gamma = self.gamma
        else:
            controller = SmcController(gains, self.model, self.filter_params,
                                       tol_sigma=self.sim.tol_sigma)
            gamma = 0.0
        return self.model, controller, self.filter_params, self.sim, gamma


def bundled_scenario_path(name: str) -> Path:
    """Path of a scenario shipped with the package (name without extension)."""
    candidate = resources.files("safesmc").joinpath(f"scenarios/{name}.yaml")
    with resources.as_file(candidate) as path:
        return Path(path)


def bundled_scenario_names() -> list[str]:
    root = resources.files("safesmc").joinpath("scenarios")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".yaml"))


def locate_scenario(ref: str) -> Path:
    """Resolve a CLI scenario reference: a file path or a bundled name."""
    path = Path(ref)
    if path.exists():
        return path
    if path.suffix == "" and ref in bundled_scenario_names():
        return bundled_scenario_path(ref)
    raise ScenarioError("scenario", f"no such file or bundled scenario: {ref}")


def load_scenario(path, dt: Optional[float] = None,
                  horizon: Optional[float] = None) -> ResolvedScenario:
    """Parse, validate, and resolve a scenario file.

    dt/horizon override the file values (CLI flags). All violations raise
    ScenarioError with the offending field path.
    """
    path = Path(path)
    try:
        tree = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ScenarioError("<file>", f"invalid YAML: {exc}") from exc
    if not isinstance(tree, dict):
        raise ScenarioError("<file>", "scenario must be a mapping")
    return resolve_scenario(tree, dt=dt, horizon=horizon)


def resolve_scenario(tree: dict, dt: Optional[float] = None,
                     horizon: Optional[float] = None) -> ResolvedScenario:
    name = _get(tree, "name", str)
    description = _get(tree, "description", str, required=False, default="")

    dim = _get(tree, "plant.dimension", int)
    if dim < 1:
        raise ScenarioError("plant.dimension", "must be at least 1")

    center = _vector(tree, "cbf.center", dim)
    radius = _get(tree, "cbf.radius", float)
    try:
        cbf = ObstacleCbf(center, radius)
    except ValueError as exc:
        raise ScenarioError("cbf", str(exc)) from exc

    lower = _vector(tree, "state_box.lower", dim)
    upper = _vector(tree, "state_box.upper", dim)
    try:
        box = StateBox(lower, upper)
    except ValueError as exc:
        raise ScenarioError("state_box", str(exc)) from exc
    if not np.all(lower < upper):
        raise ScenarioError("state_box", "box must have nonempty interior")

    goal = _vector(tree, "filter.goal", dim)
    alpha = _get(tree, "filter.alpha", float)
    smoothing = _get(tree, "filter.smoothing", float)
    try:
        filter_params = FilterParams(cbf, ClassKGain(alpha), smoothing, goal)
    except ValueError as exc:
        raise ScenarioError("filter", str(exc)) from exc

    model = _build_model(tree, dim)

    ctype = _get(tree, "controller.type", str)
    if ctype not in ("smc", "adaptive"):
        raise ScenarioError("controller.type", "must be 'smc' or 'adaptive'")
    beta = _get(tree, "controller.beta", float)
    if beta <= 0:
        raise ScenarioError("controller.beta", "must be positive")

    eta_mode = _get(tree, "controller.grad_bound.mode", str)
    eta_computed = grad_norm_bound(cbf, box)
    if eta_mode == "computed":
        eta = eta_computed
    elif eta_mode == "literal":
        eta = _get(tree, "controller.grad_bound.value", float)
        if eta <= 0:
            raise ScenarioError("controller.grad_bound.value", "must be positive")
    else:
        raise ScenarioError("controller.grad_bound.mode",
                            "must be 'computed' or 'literal'")

    kappa_mode = _get(tree, "controller.kappa.mode", str, required=False,
                      default="derived")
    if kappa_mode == "derived":
        kappa_literal = None
    elif kappa_mode == "literal":
        kappa_literal = _get(tree, "controller.kappa.value", float)
        if kappa_literal <= 0:
            raise ScenarioError("controller.kappa.value", "must be positive")
    else:
        raise ScenarioError("controller.kappa.mode",
                            "must be 'derived' or 'literal'")

    gamma = 0.0
    epsilon = None
    eps_mode = "none"
    if ctype == "adaptive":
        gamma = _get(tree, "controller.gamma", float)
        if gamma <= 0:
            raise ScenarioError("controller.gamma", "must be positive")
        eps_mode = _get(tree, "controller.epsilon.mode", str)
        if eps_mode == "max_admissible":
            epsilon = max_admissible_epsilon(alpha, gamma, eta)
        elif eps_mode == "literal":
            epsilon = _get(tree, "controller.epsilon.value", float)
            try:
                validate_epsilon(epsilon, alpha, gamma, eta)
            except ValueError as exc:
                raise ScenarioError("controller.epsilon.value", str(exc)) from exc
        else:
            raise ScenarioError("controller.epsilon.mode",
                                "must be 'max_admissible' or 'literal'")

    _get(tree, "sim", dict)
    try:
        sim = SimConfig(
            dt=dt if dt is not None else _get(tree, "sim.dt", float),
            horizon=horizon if horizon is not None else _get(tree, "sim.horizon", float),
            scheme=_get(tree, "sim.scheme", str, required=False, default="rk4"),
            tol_sigma=_get(tree, "sim.tol_sigma", float, required=False,
                           default=1e-9),
            reach_threshold=_get(tree, "sim.reach_threshold", float,
                                 required=False, default=1e-3),
            record_stride=_get(tree, "sim.record_stride", int, required=False,
                               default=1),
        )
    except ValueError as exc:
        raise ScenarioError("sim", str(exc)) from exc

    raw_ics = _get(tree, "initial_conditions", list)
    ics = []
    for i, entry in enumerate(raw_ics):
        prefix = f"initial_conditions[{i}]"
        if not isinstance(entry, dict):
            raise ScenarioError(prefix, "expected a mapping with x and xdot")
        ic = PlantState(_vector(entry, "x", dim), _vector(entry, "xdot", dim))
        h0 = cbf.h(ic.x)
        if h0 <= 0.0:
            raise ScenarioError(
                f"{prefix}.x",
                f"initial position has h(x0)={h0:g} <= 0; it must lie strictly "
                "inside the safe set")
        ics.append(ic)

    return ResolvedScenario(
        name=name, description=description, model=model, cbf=cbf, box=box,
        filter_params=filter_params, controller_type=ctype, beta=beta,
        grad_bound=eta, grad_bound_mode=eta_mode,
        grad_bound_computed=eta_computed, kappa_literal=kappa_literal,
        gamma=gamma, epsilon=epsilon, epsilon_mode=eps_mode, sim=sim,
        initial_conditions=ics,
    )


def _build_model(tree: dict, dim: int) -> UncertaintyModel:
    gkind = _get(tree, "plant.input_matrix.kind", str)
    constant = None
    if gkind == "identity":
        constant = np.eye(dim)
        g_fun = plant.identity_input_matrix(dim)
    elif gkind == "constant":
        raw = _get(tree, "plant.input_matrix.matrix", list)
        try:
            constant = plant.constant_input_matrix(raw)
        except ValueError as exc:
            raise ScenarioError("plant.input_matrix.matrix", str(exc)) from exc
        if constant.shape != (dim, dim):
            raise ScenarioError("plant.input_matrix.matrix",
                                f"expected shape ({dim}, {dim})")
        g_fun = (lambda G: (lambda state: G))(constant)
    else:
        raise ScenarioError("plant.input_matrix.kind",
                            "must be 'identity' or 'constant'")

    ukind = _get(tree, "plant.input_uncertainty.kind", str)
    if ukind == "zero":
        delta_b = plant.zero_uncertainty(dim)
    elif ukind == "scaled_ones":
        coeff = _get(tree, "plant.input_uncertainty.coeff", float)
        componentwise = _get(tree, "plant.input_uncertainty.componentwise",
                             bool, required=False, default=False)
        delta_b = plant.scaled_ones_uncertainty(coeff, dim, componentwise)
    else:
        raise ScenarioError("plant.input_uncertainty.kind",
                            "must be 'zero' or 'scaled_ones'")

    dkind = _get(tree, "plant.disturbance.kind", str)
    if dkind == "zero":
        delta = plant.zero_disturbance(dim)
    elif dkind == "constant":
        delta = plant.constant_disturbance(
            _vector(tree, "plant.disturbance.values", dim))
    elif dkind == "sinusoidal":
        delta = plant.sinusoidal_disturbance(
            _get(tree, "plant.disturbance.amplitude", float),
            _get(tree, "plant.disturbance.frequency", float), dim)
    elif dkind == "piecewise_sinusoidal":
        try:
            delta = plant.piecewise_sinusoidal_disturbance(
                _get(tree, "plant.disturbance.amplitude_before", float),
                _get(tree, "plant.disturbance.amplitude_after", float),
                _get(tree, "plant.disturbance.frequency", float),
                _get(tree, "plant.disturbance.switch_time", float), dim)
        except ValueError as exc:
            raise ScenarioError("plant.disturbance.switch_time", str(exc)) from exc
    else:
        raise ScenarioError(
            "plant.disturbance.kind",
            "must be one of zero, constant, sinusoidal, piecewise_sinusoidal")

    bkind = _get(tree, "plant.disturbance_bound.kind", str)
    if bkind == "disturbance_norm":
        d_bound = plant.disturbance_norm_bound(delta)
    elif bkind == "constant":
        value = _get(tree, "plant.disturbance_bound.value", float)
        if value < 0:
            raise ScenarioError("plant.disturbance_bound.value",
                                "must be nonnegative")
        d_bound = plant.constant_bound(value)
    else:
        raise ScenarioError("plant.disturbance_bound.kind",
                            "must be 'disturbance_norm' or 'constant'")

    mu = _get(tree, "plant.mu", float)
    gamma_db = _get(tree, "plant.uncertainty_norm_bound", float)
    try:
        return UncertaintyModel(
            dim=dim, input_matrix=g_fun, input_uncertainty=delta_b,
            disturbance=delta, disturbance_bound=d_bound, mu=mu,
            uncertainty_norm_bound=gamma_db, constant_input_matrix=constant)
    except ValueError as exc:
        raise ScenarioError("plant", str(exc)) from exc
