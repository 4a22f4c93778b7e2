"""Complete alignment procedures for one trial.

* TSSA: coarse full-circle scan by every RRU, PBR feedback, scheduling and
  reconfiguration at the home BS, refined scan toward the scheduled user.
* OSES (distributed or centralized): one full-circle scan at full codebook
  resolution, then random RRU-user pairing.

All methods spend the same number of beam steps (``C1 + C2 == C``) at the
same total power per step.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import airlink, scheduler
from .beamforming import ScanConfig, UcaDescriptor, beam_weight, codebook_matrix, stage1_config
from .channel import ChannelRealization, PathLossParams, synthesize_channels
from .evaluation import PairIndices
from .geometry import CellTopology

TSSA = "TSSA"
OSES_DISTRIBUTED = "OSES-distributed"
OSES_CENTRALIZED = "OSES-centralized"
METHODS = (TSSA, OSES_DISTRIBUTED, OSES_CENTRALIZED)


@dataclass(frozen=True)
class ProtocolParams:
    uca: UcaDescriptor
    p_sum_w: float
    noise_var_w: float
    pilot_length: int
    codebook_size: int = 32
    stage1_size: int = 16
    stage2_size: int = 16
    ftpa_decay: float = 0.5
    range_mu: float = 0.8
    range_sigma: float = 0.2
    theta_min_rad: float | None = None
    pbr_bits: int = 0
    pbr_range_db: tuple[float, float] = (-10.0, 30.0)

    def __post_init__(self):
        if self.stage1_size < 2 or self.stage2_size < 2 or self.codebook_size < 2:
            raise ValueError("every codebook needs at least 2 beams")
        if self.pilot_length < 1:
            raise ValueError("pilot length must be positive")
        if not (self.p_sum_w > 0 and self.noise_var_w > 0):
            raise ValueError("powers and noise variance must be positive")

    def with_pilot_length(self, t: int) -> ProtocolParams:
        return replace(self, pilot_length=t)

    def with_noise(self, noise_var_w: float) -> ProtocolParams:
        return replace(self, noise_var_w=noise_var_w)


@dataclass(frozen=True)
class Scene:
    """Topology plus one channel realization per (RRU, user) pair."""

    topology: CellTopology
    channels: ChannelRealization
    layout: str = "distributed"

    @property
    def channel_matrix(self) -> np.ndarray:
        """``(N, K, M)`` channel vectors."""
        return self.channels.channel_vector


def make_scene(topology: CellTopology, uca: UcaDescriptor, params: PathLossParams, num_nlos: int,
               rng: np.random.Generator, *, layout: str = "distributed", **channel_kwargs) -> Scene:
    """Draw channels for every pair; ``layout="centralized"`` stacks all subarrays at the origin."""
    if layout == "centralized":
        topology = topology.colocated()
    elif layout != "distributed":
        raise ValueError(f"unknown layout {layout!r}")
    channels = synthesize_channels(topology.distances(), topology.bearings(), uca, params,
                                   num_nlos, rng, **channel_kwargs)
    return Scene(topology, channels, layout)


@dataclass(frozen=True)
class AlignmentResult:
    method: str
    schedule: np.ndarray            # schedule[n] = user served by RRU n
    rru_power_w: np.ndarray
    stage1_indices: np.ndarray      # (N, K)
    estimated_aods: np.ndarray      # (N,) angle each RRU finally beams toward
    final_beam_weights: np.ndarray  # (N, M)
    detected: PairIndices
    codebook_configs: dict = field(default_factory=dict)
    stage1_pbr: np.ndarray | None = None
    stage2_indices: np.ndarray | None = None
    stage2_configs: tuple[ScanConfig, ...] | None = None
    beam_steps: int = 0
    training_energy_w: float = 0.0   # sum over RRUs and steps of transmit power


def run_tssa(scene: Scene, params: ProtocolParams, rng: np.random.Generator) -> AlignmentResult:
    h = scene.channel_matrix
    n_rru = h.shape[0]
    uca, t, noise = params.uca, params.pilot_length, params.noise_var_w

    # stage 1: every RRU sweeps the full circle, every user listens to all of them
    cfg1 = stage1_config(params.p_sum_w / n_rru, params.stage1_size)
    responses = h.conj() @ codebook_matrix(uca, cfg1)
    pas = np.abs(airlink.scan_statistics(responses, cfg1.tx_power_w, t, noise, rng)) ** 2
    best1, pbr = airlink.detect(pas)
    pbr = np.minimum(pbr, np.finfo(float).max)
    feedback = airlink.quantize_pbr(pbr, params.pbr_bits, params.pbr_range_db)

    decision = scheduler.decide(
        scheduler.ConfidenceMatrix(feedback, best1), p_sum=params.p_sum_w, nu=params.ftpa_decay,
        mu=params.range_mu, sigma=params.range_sigma, c1=params.stage1_size,
        c2=params.stage2_size, theta_min=params.theta_min_rad)
    perm = decision.assignment

    # stage 2: each RRU sweeps its reconfigured window; only its scheduled user listens
    c2 = params.stage2_size
    angles2 = np.stack([cfg.angle_of(np.arange(c2)) for cfg in decision.stage2_configs])
    w2 = beam_weight(uca, angles2)                       # (N, C2, M)
    h_sched = h[np.arange(n_rru), perm]                  # (N, M)
    responses2 = np.einsum("nm,ncm->nc", h_sched.conj(), w2)
    pas2 = np.abs(airlink.scan_statistics(responses2, decision.rru_power_w[:, None], t, noise, rng)) ** 2
    best2 = np.argmax(pas2, axis=-1)
    aods = np.array([cfg.angle_of(c) for cfg, c in zip(decision.stage2_configs, best2)], dtype=float)

    indices = best1.copy()
    labels = np.full(best1.shape, "stage1", dtype=object)
    indices[np.arange(n_rru), perm] = best2
    labels[np.arange(n_rru), perm] = "stage2"

    energy = cfg1.tx_power_w * n_rru * params.stage1_size + float(decision.rru_power_w.sum()) * c2
    return AlignmentResult(
        method=TSSA,
        schedule=perm,
        rru_power_w=decision.rru_power_w,
        stage1_indices=best1,
        estimated_aods=aods,
        final_beam_weights=beam_weight(uca, aods),
        detected=PairIndices(indices, labels),
        codebook_configs={"stage1": cfg1},
        stage1_pbr=feedback,
        stage2_indices=best2,
        stage2_configs=decision.stage2_configs,
        beam_steps=params.stage1_size + c2,
        training_energy_w=energy,
    )


def _run_oses(scene: Scene, params: ProtocolParams, rng: np.random.Generator, method: str) -> AlignmentResult:
    h = scene.channel_matrix
    n_rru = h.shape[0]
    perm = rng.permutation(n_rru)
    cfg = stage1_config(params.p_sum_w / n_rru, params.codebook_size)
    responses = h.conj() @ codebook_matrix(params.uca, cfg)
    pas = np.abs(airlink.scan_statistics(responses, cfg.tx_power_w, params.pilot_length,
                                         params.noise_var_w, rng)) ** 2
    best = np.argmax(pas, axis=-1)
    aods = cfg.angle_of(best[np.arange(n_rru), perm])
    return AlignmentResult(
        method=method,
        schedule=perm,
        rru_power_w=np.full(n_rru, cfg.tx_power_w),
        stage1_indices=best,
        estimated_aods=aods,
        final_beam_weights=beam_weight(params.uca, aods),
        detected=PairIndices(best.copy(), np.full(best.shape, "oses", dtype=object)),
        codebook_configs={"oses": cfg},
        beam_steps=params.codebook_size,
        training_energy_w=cfg.tx_power_w * n_rru * params.codebook_size,
    )


def run_oses_distributed(scene: Scene, params: ProtocolParams, rng: np.random.Generator) -> AlignmentResult:
    """Exhaustive full-codebook scan from the distributed RRUs, random pairing."""
    if scene.layout != "distributed":
        raise ValueError("distributed OSES needs a distributed scene")
    return _run_oses(scene, params, rng, OSES_DISTRIBUTED)


def run_oses_centralized(scene: Scene, params: ProtocolParams, rng: np.random.Generator) -> AlignmentResult:
    """Exhaustive scan from N subarrays colocated at the cell center, random pairing."""
    if scene.layout != "centralized":
        raise ValueError("centralized OSES needs a centralized scene")
    return _run_oses(scene, params, rng, OSES_CENTRALIZED)


RUNNERS = {
    TSSA: run_tssa,
    OSES_DISTRIBUTED: run_oses_distributed,
    OSES_CENTRALIZED: run_oses_centralized,
}
