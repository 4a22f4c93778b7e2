"""Uniform circular array, analog beam weights and beam-scanning codebooks."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

TWO_PI = 2.0 * np.pi
SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class UcaDescriptor:
    """M-element uniform circular array with half-wavelength element spacing.

    The radius follows from the spacing constraint, ``r = lambda / (4 sin(pi/M))``;
    element ``i`` sits at angle ``2 pi i / M`` on that circle.
    """

    num_antennas: int
    wavelength_m: float

    def __post_init__(self):
        if self.num_antennas < 1:
            raise ValueError("num_antennas must be >= 1")
        if not self.wavelength_m > 0:
            raise ValueError("wavelength must be positive")

    @classmethod
    def at_carrier(cls, num_antennas: int, carrier_ghz: float) -> UcaDescriptor:
        return cls(num_antennas, SPEED_OF_LIGHT / (carrier_ghz * 1e9))

    @cached_property
    def radius_m(self) -> float:
        return self.wavelength_m / (4.0 * np.sin(np.pi / self.num_antennas))

    @cached_property
    def element_angles(self) -> np.ndarray:
        return TWO_PI * np.arange(self.num_antennas) / self.num_antennas

    @cached_property
    def x_coords(self) -> np.ndarray:
        return self.radius_m * np.cos(self.element_angles)

    @cached_property
    def y_coords(self) -> np.ndarray:
        return self.radius_m * np.sin(self.element_angles)


@dataclass(frozen=True)
class ScanConfig:
    """One beam-scanning configuration: ``C`` beams covering ``center +- half_range``."""

    center_rad: float
    half_range_rad: float
    codebook_size: int
    tx_power_w: float

    def __post_init__(self):
        if self.codebook_size < 1:
            raise ValueError("codebook_size must be >= 1")
        if not 0 < self.half_range_rad <= np.pi * (1 + 1e-12):
            raise ValueError(f"half_range must be in (0, pi], got {self.half_range_rad}")
        if self.tx_power_w < 0:
            raise ValueError("tx_power_w must be non-negative")

    @property
    def step_rad(self) -> float:
        return 2.0 * self.half_range_rad / self.codebook_size

    def angle_of(self, index):
        """Beam direction for (possibly array-valued) codebook ``index``, mod 2pi."""
        theta = self.center_rad - self.half_range_rad + np.asarray(index) * self.step_rad
        return np.mod(theta, TWO_PI)


def beam_weight(uca: UcaDescriptor, theta) -> np.ndarray:
    """Unit-norm constant-modulus UCA beamformer steered toward ``theta``.

    ``theta`` may be an array; the antenna axis is appended last, giving
    shape ``theta.shape + (M,)``.
    """
    theta = np.asarray(theta, dtype=float)[..., None]
    phase = TWO_PI * (uca.x_coords * np.cos(theta) + uca.y_coords * np.sin(theta)) / uca.wavelength_m
    return np.exp(1j * phase) / np.sqrt(uca.num_antennas)


def array_response(uca: UcaDescriptor, theta) -> np.ndarray:
    """Unit-norm array response a(theta); identical to the matched beam weight."""
    return beam_weight(uca, theta)


def codebook_angles(config: ScanConfig) -> np.ndarray:
    """The ``C`` scan angles ``center - half_range + c * step``, reduced mod 2pi."""
    if config.codebook_size < 1:
        raise ValueError("empty codebook")
    return config.angle_of(np.arange(config.codebook_size))


@lru_cache(maxsize=128)
def codebook_matrix(uca: UcaDescriptor, config: ScanConfig) -> np.ndarray:
    """``(M, C)`` matrix whose columns are the codebook beam weights (read-only)."""
    w = beam_weight(uca, codebook_angles(config)).T.copy()
    w.setflags(write=False)
    return w


def stage1_config(power_w: float, c1: int) -> ScanConfig:
    """Full-circle coarse scan whose beam ``c`` points at ``2 pi c / c1``."""
    if c1 < 1:
        raise ValueError("c1 must be >= 1")
    return ScanConfig(center_rad=np.pi, half_range_rad=np.pi, codebook_size=c1, tx_power_w=power_w)


def beam_pattern(uca: UcaDescriptor, steer_rad: float, grid) -> np.ndarray:
    """Normalized power ``|a(theta)^H w(steer)|^2`` over the angles in ``grid``."""
    w = beam_weight(uca, steer_rad)
    a = array_response(uca, grid)
    return np.abs(a.conj() @ w) ** 2
