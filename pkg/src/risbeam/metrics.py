"""Link-quality metrics under transceiver distortion.

The figure of merit maximized by the reflection optimizer is a sum of
per-antenna ratios: each antenna m contributes |h_m|^2 / (rho*|h_m|^2 +
sigma^2), where h is the composite channel and rho aggregates the
transmit- and receive-side distortion coefficients.  Spectral efficiency
follows as log2(1 + Q/(1 + rho_u*Q)), which saturates at a hardware-
imposed capacity ceiling no reflection design can exceed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, composite_channel


@dataclass(frozen=True)
class ImpairmentParams:
    """Distortion proportionality coefficients and effective noise power.

    ``rho_b`` and ``rho_u`` scale the distortion-noise power at the BS and
    user respectively; ``sigma2`` is the receiver noise power normalized by
    transmit power.  The combined coefficient rho_b*(1 + rho_u) is always
    derived, never stored.
    """

    rho_b: float = 0.05 ** 2
    rho_u: float = 0.05 ** 2
    sigma2: float = 1.0

    def __post_init__(self) -> None:
        if self.rho_b < 0.0:
            raise ValueError(f"rho_b must be >= 0, got {self.rho_b}")
        if self.rho_u < 0.0:
            raise ValueError(f"rho_u must be >= 0, got {self.rho_u}")
        if self.sigma2 <= 0.0:
            raise ValueError(f"sigma2 must be > 0, got {self.sigma2}")

    @property
    def rho(self) -> float:
        return self.rho_b * (1.0 + self.rho_u)


@dataclass(frozen=True)
class ObjectiveBreakdown:
    """Per-antenna composite amplitudes with the resulting objective and SE."""

    amplitudes: np.ndarray
    objective: float
    spectral_efficiency: float


def amplitudes(real: ChannelRealization, x: np.ndarray) -> np.ndarray:
    """Moduli |h_m| of the composite channel entries."""
    return np.abs(composite_channel(real, x))


def objective(real: ChannelRealization, x: np.ndarray,
              imp: ImpairmentParams) -> float:
    """Sum of per-antenna distortion-limited power ratios.

    Always evaluated in the O(M*N) sum-of-ratios form; the equivalent
    M x M matrix-inverse quadratic form exists only in test oracles.
    """
    return objective_from_amplitudes(amplitudes(real, x), imp)


def objective_from_amplitudes(amps: np.ndarray, imp: ImpairmentParams) -> float:
    a2 = np.asarray(amps, dtype=float) ** 2
    return float(np.sum(a2 / (imp.rho * a2 + imp.sigma2)))


def snr(real: ChannelRealization, x: np.ndarray, imp: ImpairmentParams) -> float:
    """Post-beamforming SNR; the receive-side distortion saturates it at 1/rho_u."""
    return snr_from_objective(objective(real, x, imp), imp)


def snr_from_objective(obj: float, imp: ImpairmentParams) -> float:
    return obj / (1.0 + imp.rho_u * obj)


def spectral_efficiency(real: ChannelRealization, x: np.ndarray,
                        imp: ImpairmentParams) -> float:
    """Achievable rate log2(1 + SNR) in bits/s/Hz."""
    return se_from_objective(objective(real, x, imp), imp)


def se_from_objective(obj: float, imp: ImpairmentParams) -> float:
    return float(np.log2(1.0 + snr_from_objective(obj, imp)))


def breakdown(real: ChannelRealization, x: np.ndarray,
              imp: ImpairmentParams) -> ObjectiveBreakdown:
    amps = amplitudes(real, x)
    obj = objective_from_amplitudes(amps, imp)
    return ObjectiveBreakdown(amplitudes=amps, objective=obj,
                              spectral_efficiency=se_from_objective(obj, imp))


def capacity_upper_bound(num_antennas: int, imp: ImpairmentParams) -> float:
    """Distortion-imposed ceiling log2(1 + M/(rho_b + rho_u*(M + rho_b))).

    The ceiling is what the rate approaches as transmit power or the
    number of reflecting elements grows without bound; it is infinite for
    ideal hardware, which is reported as an error so callers must handle
    the unbounded case explicitly.
    """
    if num_antennas < 1:
        raise ValueError(f"num_antennas must be >= 1, got {num_antennas}")
    if imp.rho_b == 0.0 and imp.rho_u == 0.0:
        raise ValueError(
            "capacity is unbounded for ideal hardware (rho_b = rho_u = 0)")
    m = float(num_antennas)
    return float(np.log2(1.0 + m / (imp.rho_b + imp.rho_u * (m + imp.rho_b))))
