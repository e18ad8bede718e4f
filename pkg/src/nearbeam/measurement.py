"""Pilot measurement model, achievable rate, and the exhaustive-sweep oracle.

A beam test receives y = sqrt(P) * w^H h * x + w^H n with n drawn fresh,
circularly-symmetric complex Gaussian with covariance sigma2 * I. Transmit
SNR in dB is P/sigma2 with sigma2 normalized to 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codebook import PolarCodebook, WideCodebook, index_to_pair


@dataclass(frozen=True)
class LinkConfig:
    """Transmit power, noise variance and pilot symbol (all linear units)."""

    transmit_power: float = 1.0
    noise_variance: float = 1.0
    pilot_symbol: complex = 1.0 + 0.0j

    def __post_init__(self):
        if self.transmit_power < 0:
            raise ValueError("transmit_power must be >= 0")
        if self.noise_variance < 0:
            raise ValueError("noise_variance must be >= 0")
        if abs(abs(self.pilot_symbol) ** 2 - 1.0) > 1e-12:
            raise ValueError("pilot symbol must have unit modulus")

    @property
    def snr_db(self) -> float:
        """Transmit SNR P/sigma2 in dB (inf when noiseless)."""
        if self.noise_variance == 0:
            return np.inf
        if self.transmit_power == 0:
            return -np.inf
        return 10.0 * np.log10(self.transmit_power / self.noise_variance)


def link_from_snr_db(snr_db: float, pilot_symbol: complex = 1.0 + 0.0j) -> LinkConfig:
    """LinkConfig at the given transmit SNR with unit noise variance."""
    return LinkConfig(
        transmit_power=10.0 ** (snr_db / 10.0),
        noise_variance=1.0,
        pilot_symbol=pilot_symbol,
    )


@dataclass(frozen=True)
class MeasurementVector:
    """Received pilot values for all M wide beams at one transmit SNR."""

    values: np.ndarray  # (M,) complex
    snr_db: float

    def __len__(self) -> int:
        return len(self.values)


def measure(
    w: np.ndarray, h: np.ndarray, link: LinkConfig, rng: np.random.Generator
) -> complex:
    """One beam test: y = sqrt(P) w^H h x + w^H n, fresh noise every call."""
    if w.shape != h.shape:
        raise ValueError(f"codeword/channel shape mismatch: {w.shape} vs {h.shape}")
    y = np.sqrt(link.transmit_power) * np.vdot(w, h) * link.pilot_symbol
    if link.noise_variance > 0:
        n = len(w)
        noise = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        y = y + np.vdot(w, noise) * np.sqrt(link.noise_variance / 2.0)
    return complex(y)


def measure_wide(
    wide: WideCodebook, h: np.ndarray, link: LinkConfig, rng: np.random.Generator
) -> MeasurementVector:
    """Test all M wide beams in sequence, independent noise per beam."""
    values = np.array(
        [measure(wide.codewords[m], h, link, rng) for m in range(wide.num_wide)],
        dtype=np.complex128,
    )
    return MeasurementVector(values=values, snr_db=link.snr_db)


def achievable_rate(w: np.ndarray, h: np.ndarray, link: LinkConfig) -> float:
    """Rate log2(1 + P |w^H h|^2 / sigma2) in bits/s/Hz."""
    if link.noise_variance == 0:
        raise ValueError("achievable rate undefined for zero noise variance")
    gain = abs(np.vdot(w, h)) ** 2
    return float(np.log2(1.0 + link.transmit_power * gain / link.noise_variance))


def sweep_oracle(book: PolarCodebook, h: np.ndarray) -> tuple[int, int, int]:
    """Noiseless exhaustive sweep: (i*, s*, n*) maximizing |w_i^H h|.

    Ties break toward the smallest index, which makes this the deterministic
    label generator for training data and the ground-truth baseline.
    """
    corr = np.abs(book.codewords.conj() @ h)
    i_star = int(np.argmax(corr)) + 1
    s_star, n_star = index_to_pair(i_star, book.num_angles, book.num_rings)
    return i_star, s_star, n_star
