"""Saleh-Valenzuela mmWave channels with probabilistic LOS blockage.

Each (RRU, user) pair gets one LOS path, present with probability
``exp(-d / rho)``, plus ``L`` NLOS paths.  Path ``l`` contributes
``alpha_l * sqrt(M) * a(theta_l)`` where ``a`` is the unit-norm UCA
response, so a perfectly matched beam sees gain ``sqrt(M) |alpha_l|``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .beamforming import UcaDescriptor, array_response

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class PathLossParams:
    """Log-distance path loss ``intercept + 10 * exponent * log10(d)`` per LOS/NLOS.

    Defaults are the 28 GHz fits for LOS and NLOS links; shadowing is off
    unless a standard deviation (dB) is given.
    """

    los_intercept_db: float = 61.4
    los_exponent: float = 2.0
    nlos_intercept_db: float = 72.0
    nlos_exponent: float = 2.92
    carrier_ghz: float = 28.0
    blockage_scale_m: float = 200.0
    los_shadowing_db: float = 0.0
    nlos_shadowing_db: float = 0.0

    def __post_init__(self):
        if not (self.los_exponent > 0 and self.nlos_exponent > 0):
            raise ValueError("path-loss exponents must be positive")
        if not (np.isfinite(self.los_intercept_db) and np.isfinite(self.nlos_intercept_db)):
            raise ValueError("path-loss intercepts must be finite")
        if not self.blockage_scale_m > 0:
            raise ValueError("blockage_scale_m must be positive")
        if self.los_shadowing_db < 0 or self.nlos_shadowing_db < 0:
            raise ValueError("shadowing std must be non-negative")


@dataclass(frozen=True)
class ChannelRealization:
    """Channel paths and composite vectors for one pair or a batch of pairs.

    All fields share a leading batch shape ``S`` (empty for a single pair):
    ``blockage_flag`` and ``los_aod`` / ``los_gain`` are ``S``, the NLOS
    arrays are ``S + (L,)`` and ``channel_vector`` is ``S + (M,)``.
    """

    blockage_flag: np.ndarray
    los_aod: np.ndarray
    nlos_aods: np.ndarray
    los_gain: np.ndarray
    nlos_gains: np.ndarray
    channel_vector: np.ndarray
    los_path_loss_db: np.ndarray
    nlos_path_loss_db: np.ndarray

    @property
    def num_nlos(self) -> int:
        return self.nlos_aods.shape[-1]

    def reconstruct(self, uca: UcaDescriptor) -> np.ndarray:
        return compose_channel(uca, self.blockage_flag, self.los_aod, self.los_gain,
                               self.nlos_aods, self.nlos_gains)

    def pair(self, n: int, k: int) -> ChannelRealization:
        """Single-pair view of an ``(N, K)`` batch."""
        return ChannelRealization(**{name: np.asarray(getattr(self, name)[n, k])
                                     for name in self.__dataclass_fields__})

    def to_csv(self, path) -> None:
        """Debug dump of ``n, k, beta, PL_LOS_dB, PL_NLOS_dB, theta0`` for an (N, K) batch."""
        with Path(path).open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["n", "k", "beta", "pl_los_db", "pl_nlos_db", "theta0_rad"])
            for n, k in np.ndindex(*self.blockage_flag.shape):
                writer.writerow([n, k, int(self.blockage_flag[n, k]), self.los_path_loss_db[n, k],
                                 self.nlos_path_loss_db[n, k], self.los_aod[n, k]])


def los_probability(distance, rho: float):
    return np.exp(-np.asarray(distance, dtype=float) / rho)


def sample_blockage(distance, rho: float, rng: np.random.Generator):
    """Return 1 (LOS present) with probability ``exp(-d / rho)``, else 0.

    Works elementwise on arrays of distances.
    """
    distance = np.asarray(distance, dtype=float)
    if np.any(distance < 0):
        raise ValueError("distance must be non-negative")
    if not rho > 0:
        raise ValueError("rho must be positive")
    flags = (rng.random(distance.shape) < los_probability(distance, rho)).astype(np.int8)
    return flags if flags.ndim else int(flags)


def path_loss_db(distance, is_los, params: PathLossParams):
    distance = np.asarray(distance, dtype=float)
    if np.any(distance <= 0):
        raise ValueError("distance must be positive")
    is_los = np.asarray(is_los, dtype=bool)
    intercept = np.where(is_los, params.los_intercept_db, params.nlos_intercept_db)
    exponent = np.where(is_los, params.los_exponent, params.nlos_exponent)
    out = intercept + 10.0 * exponent * np.log10(distance)
    return float(out) if out.ndim == 0 else out


def compose_channel(uca: UcaDescriptor, blockage_flag, los_aod, los_gain, nlos_aods, nlos_gains):
    scale = np.sqrt(uca.num_antennas)
    los = (np.asarray(blockage_flag) * np.asarray(los_gain))[..., None] * (scale * array_response(uca, los_aod))
    nlos_paths = np.asarray(nlos_gains)[..., None] * (scale * array_response(uca, nlos_aods))
    return los + nlos_paths.sum(axis=-2)


def synthesize_channels(distance, bearing, uca: UcaDescriptor, params: PathLossParams,
                        num_nlos: int, rng: np.random.Generator, *,
                        independent_los_aod: bool = False, min_distance_m: float = 1.0,
                        force_blockage: int | None = None) -> ChannelRealization:
    """Draw channels for every pair in the (broadcast) ``distance``/``bearing`` arrays.

    Distances below ``min_distance_m`` are clamped before path loss; the
    blockage draw uses the raw distance. ``force_blockage`` overrides the
    drawn flag (the draw still happens so the random stream is unchanged).
    """
    if num_nlos < 0:
        raise ValueError("num_nlos must be >= 0")
    distance, bearing = np.broadcast_arrays(np.asarray(distance, float), np.asarray(bearing, float))
    shape = distance.shape
    flags = np.asarray(sample_blockage(distance, params.blockage_scale_m, rng), dtype=np.int8)
    if force_blockage is not None:
        flags = np.full(shape, int(force_blockage), dtype=np.int8)

    los_phase = TWO_PI * rng.random(shape)
    los_aod = TWO_PI * rng.random(shape) if independent_los_aod else bearing.copy()
    nlos_aods = TWO_PI * rng.random(shape + (num_nlos,))
    cn = (rng.standard_normal(shape + (num_nlos,)) + 1j * rng.standard_normal(shape + (num_nlos,))) / np.sqrt(2)

    d_eff = np.maximum(distance, min_distance_m)
    pl_los = np.asarray(path_loss_db(d_eff, True, params), dtype=float)
    pl_nlos = np.asarray(path_loss_db(d_eff, False, params), dtype=float)
    if params.los_shadowing_db > 0:
        pl_los = pl_los + params.los_shadowing_db * rng.standard_normal(shape)
    if params.nlos_shadowing_db > 0:
        pl_nlos = pl_nlos + params.nlos_shadowing_db * rng.standard_normal(shape)

    los_gain = np.sqrt(10.0 ** (-pl_los / 10.0)) * np.exp(1j * los_phase)
    if num_nlos:
        nlos_gains = cn * np.sqrt(10.0 ** (-pl_nlos / 10.0) / num_nlos)[..., None]
    else:
        nlos_gains = cn
    h = compose_channel(uca, flags, los_aod, los_gain, nlos_aods, nlos_gains)
    return ChannelRealization(flags, los_aod, nlos_aods, los_gain, nlos_gains, h, pl_los, pl_nlos)


def synthesize_channel(geom: tuple[float, float], uca: UcaDescriptor, params: PathLossParams,
                       num_nlos: int, rng: np.random.Generator, **kwargs) -> ChannelRealization:
    """Single-pair channel from ``(distance, bearing)``."""
    distance, bearing = geom
    return synthesize_channels(distance, bearing, uca, params, num_nlos, rng, **kwargs)
