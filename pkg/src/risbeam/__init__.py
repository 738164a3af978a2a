"""Passive beamforming for RIS-assisted links with non-ideal hardware.

Optimizes the reflection coefficients of a reconfigurable intelligent
surface under transceiver distortion and a phase-dependent amplitude
model, with projected-gradient and random-phase baselines, an analytic
capacity ceiling, and a Monte Carlo harness that reproduces the
performance sweeps.
"""

from .baselines import PgaConfig, objective_gradient, pga_solve, project, random_solve
from .channel import (ChannelParams, ChannelRealization, composite_channel,
                      generate_realization, make_rng)
from .hardware import (PhaseModelParams, ReflectionState, amplitude_response,
                       feasible_point, is_feasible, wrap_phase)
from .harness import (ConfigError, ExperimentConfig, SummaryRow, TrialRecord,
                      aggregate, emit, load_config, run_experiment)
from .metrics import (ImpairmentParams, ObjectiveBreakdown, amplitudes,
                      breakdown, capacity_upper_bound, objective, snr,
                      spectral_efficiency)
from .optimizer import (SolveReport, SolverConfig, amplitude_sum_gradient,
                        cccp_step, initial_state, phase_line_search, solve,
                        surrogate_objective, update_auxiliaries)

__version__ = "0.1.0"

__all__ = [
    "ChannelParams", "ChannelRealization", "generate_realization",
    "composite_channel", "make_rng",
    "PhaseModelParams", "ReflectionState", "amplitude_response",
    "feasible_point", "is_feasible", "wrap_phase",
    "ImpairmentParams", "ObjectiveBreakdown", "amplitudes", "breakdown",
    "objective", "snr", "spectral_efficiency", "capacity_upper_bound",
    "SolverConfig", "SolveReport", "update_auxiliaries",
    "surrogate_objective", "amplitude_sum_gradient", "cccp_step",
    "phase_line_search", "initial_state", "solve",
    "PgaConfig", "objective_gradient", "project", "pga_solve", "random_solve",
    "ExperimentConfig", "TrialRecord", "SummaryRow", "ConfigError",
    "load_config", "run_experiment", "aggregate", "emit",
]
