"""Rician channel generation for an RIS-assisted downlink.

Draws the direct base-station/user channel, the base-station/RIS channel
and the RIS/user channel, and assembles the cascade matrix the reflection
optimizer works on.  All randomness flows through an explicit
counter-based generator (Philox) so runs are reproducible across
processes and platforms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator (Philox4x64-10) seeded deterministically."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


@dataclass(frozen=True)
class ChannelParams:
    """Dimensions and fading statistics of the three links.

    Rician factors are linear (0 = pure Rayleigh); large-scale gains are
    linear power gains.  Link quality is usually swept through the
    effective noise power instead of these gains.
    """

    num_antennas: int = 10
    num_elements: int = 36
    rician_direct: float = 1.0
    rician_bs_ris: float = 1.0
    rician_ris_user: float = 1.0
    gain_direct: float = 1.0
    gain_bs_ris: float = 1.0
    gain_ris_user: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.num_antennas < 1:
            raise ValueError(f"num_antennas must be >= 1, got {self.num_antennas}")
        if self.num_elements < 1:
            raise ValueError(f"num_elements must be >= 1, got {self.num_elements}")
        for name in ("rician_direct", "rician_bs_ris", "rician_ris_user"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        for name in ("gain_direct", "gain_bs_ris", "gain_ris_user"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")


@dataclass(frozen=True)
class ChannelRealization:
    """One draw of the three links plus the precomputed cascade matrix.

    ``cascade`` holds G @ diag(h_ris_user); its m-th row is the coupling
    between every RIS element and BS antenna m, so the composite channel
    is ``h_direct + cascade @ x`` for reflection coefficients x.
    """

    h_direct: np.ndarray
    bs_ris: np.ndarray
    ris_user: np.ndarray
    cascade: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        h_d = np.asarray(self.h_direct, dtype=complex)
        g = np.asarray(self.bs_ris, dtype=complex)
        h_r = np.asarray(self.ris_user, dtype=complex)
        if h_d.ndim != 1 or g.ndim != 2 or h_r.ndim != 1:
            raise ValueError("h_direct and ris_user must be vectors, bs_ris a matrix")
        m, n = g.shape
        if h_d.shape != (m,) or h_r.shape != (n,):
            raise ValueError(
                f"inconsistent dimensions: h_direct {h_d.shape}, "
                f"bs_ris {g.shape}, ris_user {h_r.shape}"
            )
        if not (np.all(np.isfinite(h_d.view(float))) and
                np.all(np.isfinite(g.view(float))) and
                np.all(np.isfinite(h_r.view(float)))):
            raise ValueError("channel entries must be finite")
        object.__setattr__(self, "h_direct", h_d)
        object.__setattr__(self, "bs_ris", g)
        object.__setattr__(self, "ris_user", h_r)
        object.__setattr__(self, "cascade", g * h_r[np.newaxis, :])

    @property
    def num_antennas(self) -> int:
        return self.h_direct.size

    @property
    def num_elements(self) -> int:
        return self.ris_user.size

    def digest(self) -> str:
        """Short stable hash of the draw, used to verify matched seeding."""
        import hashlib

        h = hashlib.blake2b(digest_size=8)
        for arr in (self.h_direct, self.bs_ris, self.ris_user):
            h.update(np.ascontiguousarray(arr).tobytes())
        return h.hexdigest()


def _steering(num: int, angle: float) -> np.ndarray:
    # Uniform linear array, half-wavelength spacing: unit-modulus entries.
    return np.exp(1j * np.pi * np.arange(num) * np.sin(angle))


def _rician(los: np.ndarray, factor: float, gain: float,
            rng: np.random.Generator) -> np.ndarray:
    nlos = (rng.standard_normal(los.shape) + 1j * rng.standard_normal(los.shape))
    nlos /= np.sqrt(2.0)
    return (np.sqrt(gain * factor / (factor + 1.0)) * los
            + np.sqrt(gain / (factor + 1.0)) * nlos)


def generate_realization(params: ChannelParams,
                         rng: np.random.Generator | None = None) -> ChannelRealization:
    """Draw one channel realization.

    Each link mixes a line-of-sight steering component and an i.i.d.
    circularly-symmetric Gaussian component according to its Rician
    factor.  Line-of-sight terms are half-wavelength ULA steering vectors
    with angles drawn uniformly from [-pi/2, pi/2] per realization.  With
    ``rng`` omitted the draw is a pure function of ``params.seed``.
    """
    if rng is None:
        rng = make_rng(params.seed)
    m, n = params.num_antennas, params.num_elements

    ang = rng.uniform(-np.pi / 2, np.pi / 2, size=4)
    h_d = _rician(_steering(m, ang[0]), params.rician_direct, params.gain_direct, rng)
    g_los = np.outer(_steering(m, ang[1]), _steering(n, ang[2]))
    g = _rician(g_los, params.rician_bs_ris, params.gain_bs_ris, rng)
    h_r = _rician(_steering(n, ang[3]), params.rician_ris_user,
                  params.gain_ris_user, rng)
    return ChannelRealization(h_direct=h_d, bs_ris=g, ris_user=h_r)


def composite_channel(real: ChannelRealization, x: np.ndarray) -> np.ndarray:
    """Effective BS/user channel ``h_direct + cascade @ x`` for reflections x."""
    x = np.asarray(x, dtype=complex)
    if x.shape != (real.num_elements,):
        raise ValueError(
            f"x has shape {x.shape}, expected ({real.num_elements},)")
    return real.h_direct + real.cascade @ x
