"""Seeded Monte Carlo execution and aggregation.

Every trial draws its randomness from ``SeedSequence(seed, spawn_key=(trial,))``,
so results do not depend on how trials are spread over workers.  Within a
trial the topology and channels are drawn once and reused by every method
and every pilot length; each method's noise stream is also restarted at
every pilot length (common random numbers across the sweep).
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .. import evaluation, protocol
from ..geometry import make_topology
from .config import ExperimentConfig

log = logging.getLogger(__name__)

_METHOD_SLOT = {m: i for i, m in enumerate(protocol.METHODS)}


@dataclass(frozen=True)
class TrialRow:
    trial: int
    pilot_length: int
    method: str
    system_misaligned: bool
    user_misaligned: tuple[bool, ...]
    rates: tuple[float, ...]
    zf_regularized: bool

    @property
    def sort_key(self):
        return (self.pilot_length, _METHOD_SLOT[self.method], self.trial)


def trial_streams(seed: int, trial: int) -> dict[str, np.random.SeedSequence]:
    root = np.random.SeedSequence(seed, spawn_key=(trial,))
    children = root.spawn(3 + 2 * len(protocol.METHODS))
    streams = {"topology": children[0], "distributed": children[1], "centralized": children[2]}
    for i, method in enumerate(protocol.METHODS):
        streams[f"scan:{method}"] = children[3 + i]
        streams[f"uplink:{method}"] = children[3 + len(protocol.METHODS) + i]
    return streams


def build_scenes(config: ExperimentConfig, streams) -> dict[str, protocol.Scene]:
    uca, pl = config.uca(), config.path_loss()
    topo = make_topology(config.num_rrus, config.cell_radius_m, config.rru_ring_radius_m,
                         np.random.default_rng(streams["topology"]), config.rru_rotation_rad)
    kwargs = dict(independent_los_aod=config.independent_los_aod, min_distance_m=config.min_distance_m)
    scenes = {}
    if {protocol.TSSA, protocol.OSES_DISTRIBUTED} & set(config.methods):
        scenes["distributed"] = protocol.make_scene(
            topo, uca, pl, config.num_nlos_paths, np.random.default_rng(streams["distributed"]), **kwargs)
    if protocol.OSES_CENTRALIZED in config.methods:
        scenes["centralized"] = protocol.make_scene(
            topo, uca, pl, config.num_nlos_paths, np.random.default_rng(streams["centralized"]),
            layout="centralized", **kwargs)
    return scenes


def run_trial(config: ExperimentConfig, trial: int, trace: bool = False):
    """All methods at all pilot lengths for one trial; returns ``(rows, trace_rows)``."""
    streams = trial_streams(config.seed, trial)
    scenes = build_scenes(config, streams)
    uca = config.uca()
    rows, traces = [], []
    for t in config.pilot_lengths:
        params = config.protocol_params(t)
        t_ul = config.uplink_pilot_length or t
        for method in config.methods:
            scene = scenes["centralized" if method == protocol.OSES_CENTRALIZED else "distributed"]
            result = protocol.RUNNERS[method](scene, params, np.random.default_rng(streams[f"scan:{method}"]))
            metrics = evaluation.evaluate_alignment(
                scene.channel_matrix, uca, result, p_sum=config.p_sum_w, noise_var=config.noise_var_w,
                uplink_power_w=config.uplink_power_w, t_ul=t_ul,
                rng=np.random.default_rng(streams[f"uplink:{method}"]))
            rows.append(TrialRow(trial, t, method, metrics.system_misaligned,
                                 tuple(bool(x) for x in metrics.user_misaligned),
                                 tuple(float(x) for x in metrics.rates), metrics.zf_regularized))
            if trace:
                traces.extend(_trace_rows(trial, t, scene, uca, result))
    return rows, traces


def _trace_rows(trial, t, scene, uca, result):
    oracles = evaluation.oracle_indices(scene.channel_matrix, uca, result)
    out = []
    n_rru, n_user = oracles.indices.shape
    for n in range(n_rru):
        for k in range(n_user):
            row = {
                "trial": trial, "T": t, "method": result.method, "n": n, "k": k,
                "codebook": result.detected.codebooks[n, k],
                "detected": int(result.detected.indices[n, k]), "oracle": int(oracles.indices[n, k]),
                "scheduled_user": int(result.schedule[n]), "power_w": float(result.rru_power_w[n]),
                "xi": "", "c_hat": int(result.stage1_indices[n, k]), "half_range_rad": "",
            }
            if result.stage1_pbr is not None:
                row["xi"] = float(result.stage1_pbr[n, k])
                row["half_range_rad"] = result.stage2_configs[n].half_range_rad
            out.append(row)
    return out


def _run_chunk(args):
    config, trials, trace = args
    rows, traces = [], []
    for trial in trials:
        r, tr = run_trial(config, trial, trace)
        rows.extend(r)
        traces.extend(tr)
    return rows, traces


def run_trials(config: ExperimentConfig, trials: int | None = None, workers: int | None = None,
               trace: bool = False):
    """Run ``trials`` trials on ``workers`` processes; rows come back in canonical order."""
    trials = config.trials if trials is None else trials
    workers = config.workers if workers is None else workers
    indices = list(range(trials))
    if workers <= 1:
        rows, traces = _run_chunk((config, indices, trace))
    else:
        n_chunks = min(trials, workers * 8)
        chunks = [indices[i::n_chunks] for i in range(n_chunks)]
        rows, traces = [], []
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for r, tr in pool.map(_run_chunk, [(config, c, trace) for c in chunks]):
                rows.extend(r)
                traces.extend(tr)
    rows.sort(key=lambda row: row.sort_key)
    traces.sort(key=lambda row: (row["T"], _METHOD_SLOT[row["method"]], row["trial"], row["n"], row["k"]))
    log.info("ran %d trials (%d rows) on %d worker(s)", trials, len(rows), workers)
    return rows, traces


def binomial_half_width(p: float, n: int, z: float = 1.96) -> float:
    return z * math.sqrt(p * (1.0 - p) / n)


def summarize(rows) -> list[dict]:
    """Per (pilot length, method) misalignment and rate statistics."""
    rows = list(rows)
    if not rows:
        raise ValueError("no trial rows to summarize")
    groups: dict[tuple[int, str], list[TrialRow]] = {}
    for row in sorted(rows, key=lambda r: r.sort_key):
        groups.setdefault((row.pilot_length, row.method), []).append(row)
    out = []
    for (t, method), group in groups.items():
        n = len(group)
        sys_flags = np.array([r.system_misaligned for r in group], dtype=float)
        user_flags = np.array([r.user_misaligned for r in group], dtype=float)
        rates = np.concatenate([np.asarray(r.rates) for r in group])
        p_sys = float(sys_flags.sum() / n)
        p_user_k = user_flags.mean(axis=0)
        p_user = float(user_flags.mean())
        out.append({
            "T": t,
            "method": method,
            "trials": n,
            "p_mis_sys": p_sys,
            "p_mis_sys_ci": binomial_half_width(p_sys, n),
            "p_mis_user_mean": p_user,
            "p_mis_user_ci": binomial_half_width(p_user, user_flags.size),
            "p_mis_sys_indep": float(1.0 - np.prod(1.0 - p_user_k)),
            "rate_mean": float(rates.mean()),
            "rate_p10": float(np.percentile(rates, 10)),
            "rate_p50": float(np.percentile(rates, 50)),
            "rate_p90": float(np.percentile(rates, 90)),
            "zf_regularized": int(sum(r.zf_regularized for r in group)),
        })
    return out


def rate_samples(rows, pilot_length: int) -> dict[str, np.ndarray]:
    samples: dict[str, list[float]] = {}
    for row in sorted(rows, key=lambda r: r.sort_key):
        if row.pilot_length == pilot_length:
            samples.setdefault(row.method, []).extend(row.rates)
    return {m: np.asarray(v) for m, v in samples.items()}


def rate_cdf(samples: dict[str, np.ndarray], points: int = 200) -> list[dict]:
    """Empirical CDF of every method on a shared grid over ``[0, max rate]``."""
    top = max(float(v.max()) for v in samples.values())
    grid = np.linspace(0.0, top, points)
    out = []
    for method, values in samples.items():
        ordered = np.sort(values)
        cdf = np.searchsorted(ordered, grid, side="right") / len(ordered)
        out.extend({"method": method, "rate_bps_hz": float(x), "cdf": float(c)} for x, c in zip(grid, cdf))
    return out
