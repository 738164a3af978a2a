"""Reference methods: projected gradient ascent and random phase search.

Both share the optimizer's per-element phase search as their projection
onto the realizable amplitude curve, so comparisons isolate the update
rule rather than the projection quality.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization
from .hardware import PhaseModelParams, ReflectionState, feasible_point
from .metrics import ImpairmentParams, objective_from_amplitudes, se_from_objective
from .optimizer import (SolveReport, SolverConfig, initial_state,
                        phase_line_search, update_auxiliaries)

_MIN_STEP = 1e-18


@dataclass(frozen=True)
class PgaConfig:
    """Projected-gradient settings.

    ``step_size`` None picks a Lipschitz-scale surrogate per realization,
    1 / (||cascade||_F^2 / sigma^2 + 1).  Backtracking halves the step
    until the objective does not decrease.
    """

    step_size: float | None = None
    max_iters: int = 500
    tol: float = 1e-6
    step_rule: str = "backtracking"  # "fixed" | "backtracking"
    init_strategy: str = "direct-align"

    def __post_init__(self) -> None:
        if self.step_size is not None and self.step_size <= 0.0:
            raise ValueError(f"step_size must be > 0, got {self.step_size}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.tol <= 0.0:
            raise ValueError(f"tol must be > 0, got {self.tol}")
        if self.step_rule not in ("fixed", "backtracking"):
            raise ValueError(f"unknown step_rule {self.step_rule!r}")


def objective_gradient(real: ChannelRealization, x: np.ndarray,
                       imp: ImpairmentParams) -> np.ndarray:
    """Wirtinger derivative of the sum-of-ratios objective.

    Per antenna the ratio a^2/(rho*a^2 + sigma^2) differentiates to a
    weight sigma^2/(rho*a^2 + sigma^2)^2 on the channel-coupling term.
    """
    x = np.asarray(x, dtype=complex)
    h = real.h_direct + real.cascade @ x
    w = imp.sigma2 / (imp.rho * np.abs(h) ** 2 + imp.sigma2) ** 2
    return real.cascade.T @ (w * np.conj(h))


def project(x: np.ndarray, phase_params: PhaseModelParams,
            cfg: SolverConfig | None = None) -> ReflectionState:
    """Closest realizable state per element (phase search + amplitude map)."""
    return feasible_point(phase_line_search(x, phase_params, cfg), phase_params)


def _auto_step(real: ChannelRealization, imp: ImpairmentParams) -> float:
    scale = float(np.sum(np.abs(real.cascade) ** 2)) / imp.sigma2
    return 1.0 / (scale + 1.0)


def pga_solve(real: ChannelRealization, imp: ImpairmentParams,
              phase_params: PhaseModelParams,
              cfg: PgaConfig | None = None) -> SolveReport:
    """Projected gradient ascent on the sum-of-ratios objective.

    Each iteration steps along the conjugate of the Wirtinger gradient
    (the ascent direction in the real parameterization) and projects back
    onto the realizable curve.  Under backtracking the objective trace is
    non-decreasing.
    """
    if cfg is None:
        cfg = PgaConfig()
    sc = SolverConfig(init_strategy=cfg.init_strategy)
    state = initial_state(real, phase_params, sc)

    def value(s: ReflectionState) -> float:
        return objective_from_amplitudes(
            np.abs(real.h_direct + real.cascade @ s.x), imp)

    obj = value(state)
    trace = [obj]
    base_step = cfg.step_size if cfg.step_size is not None else _auto_step(real, imp)
    termination = "max-iters"
    backtracks = 0

    if real.num_elements == 0:
        termination = "converged"
    else:
        for _ in range(cfg.max_iters):
            direction = np.conj(objective_gradient(real, state.x, imp))
            step = base_step
            cand = project(state.x + step * direction, phase_params, sc)
            cand_obj = value(cand)
            if cfg.step_rule == "backtracking":
                while cand_obj < obj and step > _MIN_STEP:
                    step *= 0.5
                    backtracks += 1
                    cand = project(state.x + step * direction, phase_params, sc)
                    cand_obj = value(cand)
                if cand_obj < obj:  # no improving step along this direction
                    trace.append(obj)
                    termination = "converged"
                    break
            state, prev, obj = cand, obj, cand_obj
            trace.append(obj)
            if abs(obj - prev) <= cfg.tol * (1.0 + abs(prev)):
                termination = "converged"
                break

    amps = np.abs(real.h_direct + real.cascade @ state.x)
    return SolveReport(final_state=state, objective_trace=trace,
                       se_trace=[se_from_objective(v, imp) for v in trace],
                       auxiliaries=update_auxiliaries(amps, imp),
                       outer_iters=len(trace) - 1, total_inner_iters=backtracks,
                       termination=termination, feasibility_residual=0.0)


def random_solve(real: ChannelRealization, imp: ImpairmentParams,
                 phase_params: PhaseModelParams, rng: np.random.Generator,
                 restarts: int = 1) -> SolveReport:
    """Best of ``restarts`` uniformly random feasible phase draws."""
    if restarts < 1:
        raise ValueError(f"restarts must be >= 1, got {restarts}")
    n = real.num_elements
    best_state = feasible_point(np.zeros(n), phase_params)
    best_obj = -np.inf
    trace = []
    for _ in range(restarts):
        state = feasible_point(rng.uniform(-np.pi, np.pi, size=n), phase_params)
        obj = objective_from_amplitudes(
            np.abs(real.h_direct + real.cascade @ state.x), imp)
        if obj > best_obj:
            best_state, best_obj = state, obj
        trace.append(best_obj)
    amps = np.abs(real.h_direct + real.cascade @ best_state.x)
    return SolveReport(final_state=best_state, objective_trace=trace,
                       se_trace=[se_from_objective(v, imp) for v in trace],
                       auxiliaries=update_auxiliaries(amps, imp),
                       outer_iters=restarts, total_inner_iters=0,
                       termination="converged", feasibility_residual=0.0)
