"""Downlink pilot scanning at the users: correlator outputs, PAS, best beam, PBR.

With mutually orthogonal pilots, correlating the length-T received sequence
with RRU n's pilot removes every other RRU exactly, leaving
``T sqrt(p) h^H w + z~`` with ``z~ ~ CN(0, T sigma^2)``.  The simulator works
directly with that statistic; the full-sequence path is kept for validation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .beamforming import ScanConfig, UcaDescriptor, codebook_matrix


@dataclass(frozen=True)
class PilotSet:
    sequences: np.ndarray  # (N, T) complex

    @property
    def num_sequences(self) -> int:
        return self.sequences.shape[0]

    @property
    def length(self) -> int:
        return self.sequences.shape[1]

    def gram(self) -> np.ndarray:
        return self.sequences.conj() @ self.sequences.T


def _hadamard(t: int) -> np.ndarray:
    h = np.ones((1, 1))
    while h.shape[0] < t:
        h = np.block([[h, h], [h, -h]])
    return h


def make_pilots(n: int, t: int) -> PilotSet:
    """``n`` orthogonal length-``t`` pilots with ``|s|^2 = t``.

    Walsh-Hadamard rows (entries +-1) when ``t`` is a power of two, which keeps
    cross-correlations exactly zero in floating point; DFT rows otherwise.
    """
    if n < 1:
        raise ValueError("need at least one pilot")
    if t < n:
        raise ValueError(f"pilot length {t} shorter than the number of sequences {n}")
    if t & (t - 1) == 0:
        seqs = _hadamard(t)[:n].astype(complex)
    else:
        idx = np.arange(t)
        seqs = np.exp(-2j * np.pi * np.outer(np.arange(n), idx) / t)
    return PilotSet(seqs)


def cn_noise(rng: np.random.Generator, shape, variance) -> np.ndarray:
    """Circularly-symmetric complex Gaussian samples with the given variance."""
    scale = np.sqrt(np.asarray(variance, dtype=float) / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def scan_statistics(responses, power_w, t: int, noise_var: float, rng: np.random.Generator):
    """Correlator outputs for an array of noiseless beam responses ``h^H w``.

    One independent noise draw per entry; ``power_w`` broadcasts against
    ``responses``.
    """
    responses = np.asarray(responses)
    noise = cn_noise(rng, responses.shape, t * noise_var)
    return t * np.sqrt(power_w) * responses + noise


def _exact_products(x, y) -> list[tuple[Fraction, Fraction]]:
    out = []
    for a, b in zip(x, y):
        ar, ai, br, bi = (Fraction(float(v)) for v in (a.real, a.imag, b.real, b.imag))
        out.append((ar * br - ai * bi, ar * bi + ai * br))
    return out


def _round(parts) -> complex:
    re = sum((p[0] for p in parts), Fraction(0))
    im = sum((p[1] for p in parts), Fraction(0))
    return complex(float(re), float(im))


def scan_step_statistic(h, w, power_w: float, t: int, noise_var: float,
                        rng: np.random.Generator | None = None, *,
                        noise=None, pilot=None) -> complex:
    """Correlator output ``T sqrt(p) h^H w + z~`` for one beam step.

    Normally ``z~`` is drawn from ``rng``. Passing the per-symbol ``noise``
    vector together with the pilot instead sets ``z~ = noise . pilot`` and
    evaluates the sum exactly with a single final rounding.
    """
    amp = np.sqrt(power_w) * np.vdot(h, w)
    if noise is None:
        if rng is None:
            raise ValueError("need an rng or explicit noise samples")
        return complex(t * amp + cn_noise(rng, (), t * noise_var))
    parts = _exact_products(np.asarray(noise), np.asarray(pilot))
    parts.append((Fraction(float(amp.real)) * t, Fraction(float(amp.imag)) * t))
    return _round(parts)


def full_sequence_statistic(amplitudes, pilots: PilotSet, noise, n: int) -> complex:
    """Materialize ``y = sum_m b_m s_m^H + z`` and correlate it with pilot ``n``.

    ``amplitudes[m]`` is ``sqrt(p_m) h_m^H w_m``.  The sequence and the
    correlation are carried in exact rational arithmetic and rounded once,
    so the result equals the correlator-level statistic bit for bit exactly
    when the cross terms cancel.
    """
    seqs = pilots.sequences
    amps = [complex(a) for a in np.atleast_1d(amplitudes)]
    if len(amps) != pilots.num_sequences:
        raise ValueError("one amplitude per pilot sequence")
    y = []
    for t_idx in range(pilots.length):
        parts = _exact_products(amps, seqs[:, t_idx].conj())
        z = complex(noise[t_idx])
        re = sum((p[0] for p in parts), Fraction(float(z.real)))
        im = sum((p[1] for p in parts), Fraction(float(z.imag)))
        y.append((re, im))
    s = seqs[n]
    acc_re, acc_im = Fraction(0), Fraction(0)
    for (yr, yi), sv in zip(y, s):
        sr, si = Fraction(float(sv.real)), Fraction(float(sv.imag))
        acc_re += yr * sr - yi * si
        acc_im += yr * si + yi * sr
    return complex(float(acc_re), float(acc_im))


def received_sequence(amplitudes, pilots: PilotSet, noise) -> np.ndarray:
    """Floating-point received sequence, for inspection."""
    return np.asarray(amplitudes) @ pilots.sequences.conj() + np.asarray(noise)


@dataclass(frozen=True)
class PasRecord:
    values: np.ndarray
    best_index: int
    pbr: float


def detect(values):
    """Best index (ties to the lowest) and PBR along the last axis of ``values``."""
    values = np.asarray(values, dtype=float)
    if values.shape[-1] < 2:
        raise ValueError("PBR needs a codebook of at least 2 beams")
    best = np.argmax(values, axis=-1)
    peak = np.take_along_axis(values, best[..., None], axis=-1)[..., 0]
    background = values.sum(axis=-1) - peak
    with np.errstate(divide="ignore", invalid="ignore"):
        pbr = np.where(background > 0, peak / np.where(background > 0, background, 1.0), np.inf)
    return best, pbr


def pas_record(values) -> PasRecord:
    values = np.asarray(values, dtype=float)
    best, pbr = detect(values)
    return PasRecord(values, int(best), float(pbr))


def run_scan(h, uca: UcaDescriptor, config: ScanConfig, t: int, noise_var: float,
             rng: np.random.Generator) -> PasRecord:
    """Scan every beam of ``config`` toward one user and summarize the PAS."""
    if config.codebook_size < 2:
        raise ValueError("PBR needs a codebook of at least 2 beams")
    responses = np.asarray(h).conj() @ codebook_matrix(uca, config)
    stats = scan_statistics(responses, config.tx_power_w, t, noise_var, rng)
    return pas_record(np.abs(stats) ** 2)


def quantize_pbr(pbr, bits: int, range_db: tuple[float, float] = (-10.0, 30.0)):
    """Uniform log-domain PBR quantizer with ``2**bits`` levels spanning ``range_db``.

    Inputs outside the range saturate at its edges; ``bits=0`` passes the
    value through unchanged.
    """
    if bits == 0:
        return pbr
    if bits < 0:
        raise ValueError("bits must be >= 0")
    lo, hi = range_db
    levels = 2 ** bits
    step = (hi - lo) / (levels - 1)
    x_db = 10.0 * np.log10(np.asarray(pbr, dtype=float))
    q_db = lo + np.clip(np.round((x_db - lo) / step), 0, levels - 1) * step
    out = 10.0 ** (q_db / 10.0)
    return float(out) if np.ndim(out) == 0 else out
