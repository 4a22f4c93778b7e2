"""Cell layout: home BS at the origin, RRUs on a ring, users uniform in the disk."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class CellTopology:
    """Positions of the home BS, the N RRUs and the K users (meters).

    ``rru_positions`` and ``user_positions`` are ``(N, 2)`` and ``(K, 2)``
    arrays. The BS always sits at the origin.
    """

    cell_radius_m: float
    rru_ring_radius_m: float
    rru_positions: np.ndarray
    user_positions: np.ndarray
    bs_position: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self):
        rru = np.asarray(self.rru_positions, dtype=float).reshape(-1, 2)
        users = np.asarray(self.user_positions, dtype=float).reshape(-1, 2)
        object.__setattr__(self, "rru_positions", rru)
        object.__setattr__(self, "user_positions", users)
        if len(rru) != len(users):
            raise ValueError(f"need N == K, got {len(rru)} RRUs and {len(users)} users")
        if self.rru_ring_radius_m > 0:
            radii = np.hypot(rru[:, 0], rru[:, 1])
            if np.any(np.abs(radii - self.rru_ring_radius_m) > 1e-9 * self.rru_ring_radius_m):
                raise ValueError("RRU positions must lie on the ring of radius D0")
        if np.any(np.hypot(users[:, 0], users[:, 1]) > self.cell_radius_m * (1 + 1e-12)):
            raise ValueError("user outside the cell")

    @property
    def num_rrus(self) -> int:
        return len(self.rru_positions)

    @property
    def num_users(self) -> int:
        return len(self.user_positions)

    def distances(self) -> np.ndarray:
        """``(N, K)`` RRU-to-user distances."""
        diff = self.user_positions[None, :, :] - self.rru_positions[:, None, :]
        return np.hypot(diff[..., 0], diff[..., 1])

    def bearings(self) -> np.ndarray:
        """``(N, K)`` bearing of each user seen from each RRU, in [0, 2pi)."""
        diff = self.user_positions[None, :, :] - self.rru_positions[:, None, :]
        b = np.mod(np.arctan2(diff[..., 1], diff[..., 0]), TWO_PI)
        return np.where(b >= TWO_PI, 0.0, b)

    def colocated(self) -> CellTopology:
        """Same users, with all N subarrays stacked at the cell center."""
        return CellTopology(
            cell_radius_m=self.cell_radius_m,
            rru_ring_radius_m=0.0,
            rru_positions=np.zeros_like(self.rru_positions),
            user_positions=self.user_positions,
        )

    def to_csv(self, path) -> None:
        """Dump ``entity, index, x_m, y_m`` rows for debugging."""
        path = Path(path)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["entity", "index", "x_m", "y_m"])
            writer.writerow(["bs", 0, *self.bs_position])
            for i, (x, y) in enumerate(self.rru_positions):
                writer.writerow(["rru", i, x, y])
            for i, (x, y) in enumerate(self.user_positions):
                writer.writerow(["user", i, x, y])


def place_rrus(n: int, d0: float, rotation: float = 0.0) -> np.ndarray:
    """Place ``n`` RRUs at equal angular spacing on the circle of radius ``d0``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not d0 > 0:
        raise ValueError(f"d0 must be positive, got {d0}")
    angles = TWO_PI * np.arange(n) / n + rotation
    return d0 * np.column_stack([np.cos(angles), np.sin(angles)])


def place_users(k: int, d: float, rng: np.random.Generator) -> np.ndarray:
    """Draw ``k`` i.i.d. points uniform over the disk of radius ``d``."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not d > 0:
        raise ValueError(f"d must be positive, got {d}")
    radius = d * np.sqrt(rng.random(k))
    angle = TWO_PI * rng.random(k)
    return np.column_stack([radius * np.cos(angle), radius * np.sin(angle)])


def make_topology(n: int, d: float, d0: float, rng: np.random.Generator,
                  rotation: float = 0.0) -> CellTopology:
    return CellTopology(
        cell_radius_m=d,
        rru_ring_radius_m=d0,
        rru_positions=place_rrus(n, d0, rotation),
        user_positions=place_users(n, d, rng),
    )


def pair_geometry(topology: CellTopology, n: int, k: int) -> tuple[float, float]:
    """Distance and bearing (in [0, 2pi)) of user ``k`` as seen from RRU ``n``."""
    if not 0 <= n < topology.num_rrus:
        raise IndexError(f"RRU index {n} out of range")
    if not 0 <= k < topology.num_users:
        raise IndexError(f"user index {k} out of range")
    dx, dy = topology.user_positions[k] - topology.rru_positions[n]
    bearing = float(np.mod(np.arctan2(dy, dx), TWO_PI))
    # mod can round up to exactly 2pi for tiny negative angles
    if bearing >= TWO_PI:
        bearing = 0.0
    return float(np.hypot(dx, dy)), bearing
