"""Safe sliding-mode position control for uncertain double integrators:
velocity safety filter, robust and adaptive sliding-mode laws, fixed-step
simulation, and runtime monitors for the closed-loop guarantees."""

from .cbf import ClassKGain, ObstacleCbf, StateBox, grad_norm_bound
from .control import (AdaptiveController, AdaptiveGainState, SlidingVar,
                      SmcController, SmcGains, adaptive_control, barrier_gain,
                      disturbance_compensation, max_admissible_epsilon,
                      safe_reaching_gain, sliding_var, smc_control,
                      validate_epsilon)
from .monitors import (MonitorVerdict, monitor_reach_certificate,
                       monitor_reaching, monitor_safety,
                       monitor_sigma_containment)
from .plant import (BoundCheckReport, PlantState, UncertaintyModel,
                    check_disturbance_bound, check_uncertainty_bounds,
                    closed_loop_rhs)
from .safety_filter import (FilterParams, desired_velocity, neg_part,
                            safety_correction, safety_correction_smooth,
                            smooth_neg_part, velocity, velocity_field,
                            velocity_rate)
from .scenario import (ResolvedScenario, ScenarioError, bundled_scenario_names,
                       bundled_scenario_path, load_scenario, locate_scenario)
from .simulate import (DivergenceError, EventLog, RunOutcome, SimConfig,
                       Trajectory, batch_simulate, simulate)

__version__ = "0.1.0"

__all__ = [
    "AdaptiveController", "AdaptiveGainState", "BoundCheckReport",
    "ClassKGain", "DivergenceError", "EventLog", "FilterParams",
    "MonitorVerdict", "ObstacleCbf", "PlantState", "ResolvedScenario",
    "RunOutcome", "ScenarioError", "SimConfig", "SlidingVar", "SmcController",
    "SmcGains", "StateBox", "Trajectory", "UncertaintyModel",
    "adaptive_control", "barrier_gain", "batch_simulate",
    "bundled_scenario_names", "bundled_scenario_path",
    "check_disturbance_bound", "check_uncertainty_bounds", "closed_loop_rhs",
    "desired_velocity", "disturbance_compensation", "grad_norm_bound",
    "load_scenario", "locate_scenario", "max_admissible_epsilon",
    "monitor_reach_certificate", "monitor_reaching", "monitor_safety",
    "monitor_sigma_containment", "neg_part", "safe_reaching_gain",
    "safety_correction", "safety_correction_smooth", "simulate",
    "sliding_var", "smc_control", "smooth_neg_part", "validate_epsilon",
    "velocity", "velocity_field", "velocity_rate",
]
