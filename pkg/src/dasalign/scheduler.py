"""Home-BS decisions after the coarse scan: user-RRU pairing, power and scan windows.

Pairing maximizes the product of the fed-back confidences (PBRs), i.e. the
sum of their logs, over one-to-one RRU-user assignments.  That is a square
linear assignment problem on ``-ln(xi)`` and is solved exactly with the
Hungarian method.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .beamforming import ScanConfig


@dataclass(frozen=True)
class ConfidenceMatrix:
    """Stage-one feedback: ``values[n, k]`` is the PBR of RRU n seen by user k."""

    values: np.ndarray
    best_indices: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        _check_square_positive(values)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "best_indices", np.asarray(self.best_indices, dtype=int))
        if self.best_indices.shape != values.shape:
            raise ValueError("best_indices must match the confidence matrix shape")


@dataclass(frozen=True)
class ScheduleDecision:
    assignment: np.ndarray       # assignment[n] = user served by RRU n
    rru_confidence: np.ndarray   # xi_hat_n
    rru_power_w: np.ndarray
    stage2_configs: tuple[ScanConfig, ...]


def _check_square_positive(values: np.ndarray) -> None:
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise ValueError(f"confidence matrix must be square, got shape {values.shape}")
    if not np.all(values > 0):
        raise ValueError("confidences must be strictly positive")


def hungarian(cost) -> tuple[list[int], list[float], list[float]]:
    """Minimum-cost perfect assignment on a square cost matrix.

    Returns ``(assignment, u, v)`` with ``assignment[i]`` the column of row
    ``i`` and dual potentials satisfying ``cost[i][j] - u[i] - v[j] >= 0``,
    with equality on the assigned edges.
    """
    a = [list(map(float, row)) for row in np.asarray(cost, dtype=float)]
    n = len(a)
    inf = math.inf
    u = [0.0] * (n + 1)
    v = [0.0] * (n + 1)
    p = [0] * (n + 1)       # p[j] = row matched to column j (1-based, 0 = none)
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [inf] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = inf
            j1 = 0
            row = a[i0 - 1]
            for j in range(1, n + 1):
                if not used[j]:
                    cur = row[j - 1] - u[i0] - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    assignment = [0] * n
    for j in range(1, n + 1):
        assignment[p[j] - 1] = j - 1
    return assignment, u[1:], v[1:]


def _augment(row, tight, match_col, seen) -> bool:
    for col in tight[row]:
        if col in seen:
            continue
        seen.add(col)
        other = match_col.get(col)
        if other is None or _augment(other, tight, match_col, seen):
            match_col[col] = row
            return True
    return False


def _has_perfect_matching(rows, tight) -> bool:
    match_col: dict[int, int] = {}
    return all(_augment(r, tight, match_col, set()) for r in rows)


def schedule(conf) -> np.ndarray:
    """Permutation ``sigma`` (RRU n -> user sigma[n]) maximizing ``sum_n ln xi[n, sigma[n]]``.

    Among optimal permutations the lexicographically smallest is returned.
    """
    values = conf.values if isinstance(conf, ConfidenceMatrix) else np.asarray(conf, dtype=float)
    _check_square_positive(values)
    cost = -np.log(values)
    n = len(cost)
    assignment, u, v = hungarian(cost)

    # Any perfect matching on zero-reduced-cost edges is optimal.
    tol = 1e-10 * max(1.0, float(np.max(np.abs(cost))))
    reduced = cost - np.asarray(u)[:, None] - np.asarray(v)[None, :]
    tight = [[k for k in range(n) if reduced[i, k] <= tol] for i in range(n)]
    chosen: list[int] = []
    used: set[int] = set()
    for i in range(n):
        for k in tight[i]:
            if k in used:
                continue
            rest = {r: [c for c in tight[r] if c not in used and c != k] for r in range(i + 1, n)}
            if _has_perfect_matching(list(rest), rest):
                chosen.append(k)
                used.add(k)
                break
        else:  # numerical corner: fall back to the solver's own optimum
            return np.asarray(assignment)
    return np.asarray(chosen)


def assignment_objective(values, perm) -> float:
    values = np.asarray(values, dtype=float)
    return float(np.sum(np.log(values[np.arange(len(perm)), perm])))


def ftpa_power(rru_conf, nu: float, p_sum: float) -> np.ndarray:
    """Fractional transmit power allocation: ``p_n`` proportional to ``xi_n ** -nu``."""
    xi = np.asarray(rru_conf, dtype=float)
    if np.any(xi <= 0):
        raise ValueError("confidences must be strictly positive")
    if not 0 <= nu <= 1:
        raise ValueError("decay factor must lie in [0, 1]")
    weights = xi ** (-nu)
    return p_sum * weights / weights.sum()


def q_function(x: float) -> float:
    """Standard normal upper-tail probability."""
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def scan_range(conf: float, mu: float, sigma: float, theta_min: float = 0.0) -> float:
    """Half-width ``pi * Q((xi - mu) / sigma)`` of the refined scan, clamped to ``[theta_min, pi]``.

    ``sigma = 0`` gives the step function ``pi * [xi < mu]`` (``pi/2`` at ``xi == mu``).
    """
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if sigma == 0:
        if conf < mu:
            theta = math.pi
        elif conf == mu:
            theta = math.pi / 2
        else:
            theta = 0.0
    else:
        theta = math.pi * q_function((conf - mu) / sigma)
    return min(max(theta, theta_min), math.pi)


def build_stage2(conf: ConfidenceMatrix, perm, powers, c1: int, c2: int, mu: float, sigma: float,
                 theta_min: float | None = None) -> tuple[ScanConfig, ...]:
    """Refined scan configuration for every RRU, centered on its user's coarse beam."""
    if c2 < 2:
        raise ValueError("stage-two codebook needs at least 2 beams")
    if theta_min is None:
        theta_min = math.pi / c2
    configs = []
    for n, k in enumerate(perm):
        xi_hat = float(conf.values[n, k])
        configs.append(ScanConfig(
            center_rad=2.0 * math.pi / c1 * int(conf.best_indices[n, k]),
            half_range_rad=scan_range(xi_hat, mu, sigma, theta_min),
            codebook_size=c2,
            tx_power_w=float(powers[n]),
        ))
    return tuple(configs)


def decide(conf: ConfidenceMatrix, *, p_sum: float, nu: float, mu: float, sigma: float,
           c1: int, c2: int, theta_min: float | None = None) -> ScheduleDecision:
    perm = schedule(conf)
    xi_hat = conf.values[np.arange(len(perm)), perm]
    powers = ftpa_power(xi_hat, nu, p_sum)
    configs = build_stage2(conf, perm, powers, c1, c2, mu, sigma, theta_min)
    return ScheduleDecision(perm, xi_hat, powers, configs)
