"""Ground-truth beams, misalignment accounting and the downlink rate pipeline."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .airlink import cn_noise
from .beamforming import ScanConfig, UcaDescriptor, codebook_matrix


@dataclass(frozen=True)
class PairIndices:
    """Per-(RRU, user) beam indices together with the codebook each refers to.

    ``codebooks[n, k]`` is a label such as ``"stage1"``, ``"stage2"`` or
    ``"oses"``; a ``"stage2"`` label means RRU n's own refined codebook.
    """

    indices: np.ndarray
    codebooks: np.ndarray


@dataclass(frozen=True)
class TrialMetrics:
    pair_misaligned: np.ndarray   # (N, K) bool
    user_misaligned: np.ndarray   # (K,) bool
    system_misaligned: bool
    rates: np.ndarray | None = None
    zf_regularized: bool = False


def oracle_best_beam(h, uca: UcaDescriptor, config: ScanConfig) -> int:
    """Noiseless codebook argmax of ``|h^H w(theta_c)|^2`` (ties go to the lowest index)."""
    gains = np.abs(np.asarray(h).conj() @ codebook_matrix(uca, config)) ** 2
    return int(np.argmax(gains))


def oracle_indices(channels: np.ndarray, uca: UcaDescriptor, result) -> PairIndices:
    """Oracle index for every pair, using the codebook the pair was detected with.

    ``channels`` is the ``(N, K, M)`` channel array; ``result`` an
    :class:`~dasalign.protocol.AlignmentResult`.
    """
    labels = result.detected.codebooks
    n_rru, n_user = labels.shape
    out = np.zeros((n_rru, n_user), dtype=int)
    conj = channels.conj()
    for label, config in result.codebook_configs.items():
        if label == "stage2":
            continue
        mask = labels == label
        if mask.any():
            gains = np.abs(conj[mask] @ codebook_matrix(uca, config)) ** 2
            out[mask] = np.argmax(gains, axis=-1)
    if result.stage2_configs is not None:
        for n, config in enumerate(result.stage2_configs):
            for k in np.flatnonzero(labels[n] == "stage2"):
                out[n, k] = oracle_best_beam(channels[n, k], uca, config)
    return PairIndices(out, labels.copy())


def misalignment_metrics(detected: PairIndices, oracles: PairIndices) -> TrialMetrics:
    """A user is misaligned only if every RRU's beam is wrong; the system if any user is."""
    if detected.indices.shape != oracles.indices.shape or not np.array_equal(detected.codebooks, oracles.codebooks):
        raise ValueError("detected and oracle indices refer to different codebooks")
    pair = detected.indices != oracles.indices
    user = pair.all(axis=0)
    return TrialMetrics(pair, user, bool(user.any()))


def effective_channel(channels: np.ndarray, beams: np.ndarray) -> np.ndarray:
    """``(K, N)`` matrix of ``h_{n,k}^H w_n`` seen through the final analog beams."""
    return np.einsum("nkm,nm->kn", channels.conj(), beams)


def mmse_effective_channel(g_true, uplink_power_w: float, t_ul: int, noise_var: float,
                           rng: np.random.Generator, prior_var: float | None = None) -> np.ndarray:
    """Scalar MMSE estimate of each effective gain from one orthogonal uplink pilot.

    The correlator sees ``r = T sqrt(p) g + z`` with ``z ~ CN(0, T sigma^2)``.
    Without an explicit ``prior_var`` the mean ``|g|^2`` of ``g_true`` is used.
    """
    g_true = np.asarray(g_true, dtype=complex)
    if prior_var is None:
        prior_var = float(np.mean(np.abs(g_true) ** 2))
    obs = t_ul * np.sqrt(uplink_power_w) * g_true + cn_noise(rng, g_true.shape, t_ul * noise_var)
    if noise_var == 0:
        return obs / (t_ul * np.sqrt(uplink_power_w))
    gain = np.sqrt(uplink_power_w) * t_ul * prior_var / (uplink_power_w * t_ul**2 * prior_var + t_ul * noise_var)
    return gain * obs


def ls_effective_channel(obs, uplink_power_w: float, t_ul: int) -> np.ndarray:
    return np.asarray(obs) / (t_ul * np.sqrt(uplink_power_w))


class ZfResult(NamedTuple):
    rates: np.ndarray
    sinr: np.ndarray
    precoder: np.ndarray
    regularized: bool


def zf_precoder(g_est) -> tuple[np.ndarray, bool]:
    """Unit-norm-column ZF precoder ``G^H (G G^H)^-1`` and whether loading was needed."""
    g_est = np.asarray(g_est, dtype=complex)
    k, n = g_est.shape
    gram = g_est @ g_est.conj().T
    regularized = bool(np.linalg.cond(g_est) > 1e12)
    if regularized:
        loading = 1e-12 * np.real(np.trace(gram)) * np.eye(k)
        f = g_est.conj().T @ np.linalg.inv(gram + loading)
    elif k == n:
        # square and well conditioned: G^H (G G^H)^-1 == G^-1, solved directly
        f = np.linalg.solve(g_est, np.eye(k))
    else:
        f = g_est.conj().T @ np.linalg.solve(gram, np.eye(k))
    norms = np.linalg.norm(f, axis=0)
    return f / np.where(norms > 0, norms, 1.0), regularized


def zf_rates(g_true, g_est, p_sum: float, noise_var: float) -> ZfResult:
    """Per-user rates (bits/s/Hz) under ZF precoding with equal power ``p_sum / K``."""
    g_true = np.asarray(g_true, dtype=complex)
    f, regularized = zf_precoder(g_est)
    k = g_true.shape[0]
    p_user = p_sum / k
    coupling = np.abs(g_true @ f) ** 2
    signal = p_user * np.diag(coupling)
    # sum the off-diagonal terms directly so tiny leakage is not lost to cancellation
    interference = p_user * np.where(np.eye(k, dtype=bool), 0.0, coupling).sum(axis=1)
    sinr = signal / (interference + noise_var)
    return ZfResult(np.log2(1.0 + sinr), sinr, f, regularized)


def evaluate_alignment(channels: np.ndarray, uca: UcaDescriptor, result, *, p_sum: float,
                       noise_var: float, uplink_power_w: float, t_ul: int,
                       rng: np.random.Generator) -> TrialMetrics:
    """Misalignment flags plus downlink ZF rates for one method in one trial."""
    oracles = oracle_indices(channels, uca, result)
    metrics = misalignment_metrics(result.detected, oracles)
    g = effective_channel(channels, result.final_beam_weights)
    g_est = mmse_effective_channel(g, uplink_power_w, t_ul, noise_var, rng)
    zf = zf_rates(g, g_est, p_sum, noise_var)
    return TrialMetrics(metrics.pair_misaligned, metrics.user_misaligned, metrics.system_misaligned,
                        zf.rates, zf.regularized)
