"""Reflection-element hardware model.

Each RIS element applies a phase shift whose attainable amplitude depends
on the phase itself: the reflection coefficient is alpha(theta)*exp(j*theta)
with alpha dipping toward ``alpha_min`` around the resonance phase.  The
ideal constant-amplitude surface is the special case alpha_min = 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PhaseModelParams:
    """Circuit constants of the phase-dependent amplitude response.

    Defaults are the canonical fit of the practical varactor model:
    alpha_min = 0.2, phi = 0.43*pi, gamma = 1.6.  They are configuration,
    not constants baked into any algorithm.
    """

    alpha_min: float = 0.2
    phi: float = 0.43 * np.pi
    gamma: float = 1.6

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha_min <= 1.0:
            raise ValueError(f"alpha_min must be in [0, 1], got {self.alpha_min}")
        if self.phi < 0.0:
            raise ValueError(f"phi must be >= 0, got {self.phi}")
        if self.gamma < 0.0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")

    @classmethod
    def ideal(cls) -> "PhaseModelParams":
        """Constant unit amplitude for every phase."""
        return cls(alpha_min=1.0, phi=0.0, gamma=0.0)


@dataclass(frozen=True)
class ReflectionState:
    """Phases and reflection coefficients of the N elements."""

    theta: np.ndarray
    x: np.ndarray

    def __post_init__(self) -> None:
        theta = np.asarray(self.theta, dtype=float)
        x = np.asarray(self.x, dtype=complex)
        if theta.shape != x.shape or theta.ndim != 1:
            raise ValueError("theta and x must be vectors of equal length")
        if theta.size and (theta.min() < -np.pi or theta.max() >= np.pi):
            raise ValueError("phases must lie in [-pi, pi)")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "x", x)

    @property
    def num_elements(self) -> int:
        return self.theta.size


def wrap_phase(theta: np.ndarray | float) -> np.ndarray | float:
    """Wrap angles into [-pi, pi), half-open at +pi."""
    out = (np.asarray(theta, dtype=float) + np.pi) % (2.0 * np.pi) - np.pi
    return out if out.ndim else float(out)


def amplitude_response(theta, params: PhaseModelParams):
    """Amplitude alpha(theta) in [alpha_min, 1]; accepts scalars or arrays.

    gamma = 0 is treated as a constant unit base (the 0**0 corner is
    defined as 1), so the response degenerates to 1 for all phases.
    """
    theta = np.asarray(theta, dtype=float)
    base = (np.sin(theta - params.phi) + 1.0) / 2.0
    if params.gamma == 0.0:
        powered = np.ones_like(base)
    else:
        powered = base ** params.gamma
    out = (1.0 - params.alpha_min) * powered + params.alpha_min
    return out if out.ndim else float(out)


def feasible_point(theta: np.ndarray, params: PhaseModelParams) -> ReflectionState:
    """Wrap phases and attach the amplitudes the hardware can realize."""
    theta = wrap_phase(np.asarray(theta, dtype=float))
    x = amplitude_response(theta, params) * np.exp(1j * theta)
    return ReflectionState(theta=theta, x=np.asarray(x, dtype=complex))


def is_feasible(state: ReflectionState, params: PhaseModelParams,
                tol: float) -> bool:
    """Whether every coefficient sits on the realizable amplitude curve."""
    if tol <= 0.0:
        raise ValueError(f"tol must be > 0, got {tol}")
    if state.num_elements == 0:
        return True
    ang = np.angle(state.x)
    target = amplitude_response(ang, params) * np.exp(1j * ang)
    return float(np.max(np.abs(state.x - target))) <= tol
