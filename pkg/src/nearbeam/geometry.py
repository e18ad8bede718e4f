"""ULA geometry, near-field steering vectors, and multipath channel synthesis.

Conventions used throughout the package:

* the array is a uniform linear array centered on its reference point, so
  antenna n sits at offset ``delta_n = n - (N-1)/2`` spacings from the center;
* ``theta`` is the sine of the physical angle of arrival, in [-1, 1);
* distances are in meters, measured from the array reference point;
* steering phases use the exp(-j...) sign, matched-filter combining uses
  exp(+j...) (see :mod:`nearbeam.codebook`).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ArrayConfig:
    """Uniform linear array at the base station.

    Attributes:
        num_antennas:       number of antennas N.
        carrier_wavelength: carrier wavelength in meters (default 30 GHz).
        antenna_spacing:    element spacing in meters; None means half-wavelength.
    """

    num_antennas: int
    carrier_wavelength: float = 0.00999308193333333  # c / 30 GHz
    antenna_spacing: float | None = None

    def __post_init__(self):
        if self.num_antennas < 1:
            raise ValueError(f"num_antennas must be >= 1, got {self.num_antennas}")
        if self.carrier_wavelength <= 0:
            raise ValueError("carrier_wavelength must be positive")
        if self.antenna_spacing is None:
            object.__setattr__(self, "antenna_spacing", self.carrier_wavelength / 2.0)
        if self.antenna_spacing <= 0:
            raise ValueError("antenna_spacing must be positive")


@dataclass(frozen=True)
class PathParams:
    """One propagation path: complex gain, distance and sine-angle."""

    gain: complex
    distance: float
    angle: float

    def __post_init__(self):
        if self.distance <= 0:
            raise ValueError(f"path distance must be positive, got {self.distance}")
        if not -1.0 <= self.angle < 1.0:
            raise ValueError(f"path angle must lie in [-1, 1), got {self.angle}")


@dataclass(frozen=True)
class ScenarioConfig:
    """Multipath scenario: one LoS path followed by weaker NLoS scatterers.

    Gains are drawn circularly-symmetric complex Gaussian with the listed
    variances; distances and sine-angles are uniform over their ranges.
    The NLoS distance/angle distributions are modeling assumptions (the
    scatter geometry is not otherwise constrained).
    """

    num_paths: int = 3
    gain_variances: tuple[float, ...] = (1.0, 0.01, 0.01)
    distance_range: tuple[float, float] = (10.0, 60.0)
    angle_range: tuple[float, float] = (-1.0, 1.0)

    def __post_init__(self):
        if self.num_paths < 1:
            raise ValueError("num_paths must be >= 1")
        if len(self.gain_variances) != self.num_paths:
            raise ValueError(
                f"need {self.num_paths} gain variances, got {len(self.gain_variances)}"
            )
        lo, hi = self.distance_range
        if not 0 < lo <= hi:
            raise ValueError(f"invalid distance_range {self.distance_range}")
        lo, hi = self.angle_range
        if not -1.0 <= lo <= hi <= 1.0:
            raise ValueError(f"invalid angle_range {self.angle_range}")


def antenna_offsets(cfg: ArrayConfig) -> np.ndarray:
    """Per-antenna offsets from the array center, in units of spacings."""
    n = cfg.num_antennas
    return np.arange(n, dtype=np.float64) - (n - 1) / 2.0


def element_distance(cfg: ArrayConfig, r: float, theta: float, n=None) -> np.ndarray | float:
    """Exact distance from antenna(s) ``n`` to the point at polar (r, theta).

    ``theta`` is the sine of the physical angle. With the source at
    (r*theta, r*sqrt(1-theta^2)) and antenna n at (delta_n*d, 0) this is the
    plain Euclidean law of cosines; no Fresnel approximation is applied.

    Args:
        n: antenna index (0-based), array of indices, or None for all antennas.
    """
    if r <= 0:
        raise ValueError(f"distance must be positive, got {r}")
    if n is None:
        delta = antenna_offsets(cfg)
    else:
        delta = np.asarray(n, dtype=np.float64) - (cfg.num_antennas - 1) / 2.0
    offset = delta * cfg.antenna_spacing
    dist = np.sqrt(r * r + offset * offset - 2.0 * r * offset * theta)
    return dist if dist.ndim else float(dist)


def near_steering(cfg: ArrayConfig, theta: float, r: float) -> np.ndarray:
    """Unit-norm near-field steering vector b(theta, r).

    Entry n carries exp(-j*2*pi/lambda*(r_n - r)) / sqrt(N). The phase
    argument r_n - r is evaluated in the cancellation-free form
    (r_n^2 - r^2) / (r_n + r), which is exact algebra and keeps full
    precision at large r where r_n and r agree to many digits.
    """
    if r <= 0:
        raise ValueError(f"distance must be positive, got {r}")
    offset = antenna_offsets(cfg) * cfg.antenna_spacing
    excess = offset * offset - 2.0 * r * offset * theta  # r_n^2 - r^2
    dist = np.sqrt(r * r + excess)
    phase = -(2.0 * np.pi / cfg.carrier_wavelength) * (excess / (dist + r))
    return np.exp(1j * phase) / np.sqrt(cfg.num_antennas)


def synth_channel(cfg: ArrayConfig, paths: list[PathParams]) -> np.ndarray:
    """Multipath near-field channel h = sqrt(N/L) * sum_l g_l e^{-j2pi r_l/lam} b(theta_l, r_l)."""
    if not paths:
        raise ValueError("synth_channel requires at least one path")
    lam = cfg.carrier_wavelength
    h = np.zeros(cfg.num_antennas, dtype=np.complex128)
    for p in paths:
        h += p.gain * np.exp(-2j * np.pi * p.distance / lam) * near_steering(cfg, p.angle, p.distance)
    return np.sqrt(cfg.num_antennas / len(paths)) * h


def sample_paths(rng: np.random.Generator, scenario: ScenarioConfig) -> list[PathParams]:
    """Draw the path set for one channel realization; path 0 is the LoS path."""
    r_lo, r_hi = scenario.distance_range
    a_lo, a_hi = scenario.angle_range
    paths = []
    for var in scenario.gain_variances:
        gain = np.sqrt(var / 2.0) * complex(rng.standard_normal(), rng.standard_normal())
        r = rng.uniform(r_lo, r_hi)
        theta = rng.uniform(a_lo, a_hi)
        # uniform() can return the closed upper end; the angle domain is half-open
        if theta >= 1.0:
            theta = np.nextafter(1.0, -1.0)
        paths.append(PathParams(gain=gain, distance=r, angle=theta))
    return paths
