"""Complex-baseband AWGN channel and reproducible random-number streams."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Stream roles. Every generator in the project is derived from
# (seed, role, *indices) through `substream`, so parallel restarts and
# Monte-Carlo shards can never consume overlapping noise.
ROLE_DATA = 0
ROLE_NOISE = 1
ROLE_INIT = 2
ROLE_EVAL = 3
ROLE_MISC = 4


def substream(seed: int, *indices: int) -> np.random.Generator:
    """Counter-based Philox generator for the stream keyed by (seed, *indices).

    Identical (seed, indices) always yields the identical sequence; distinct
    index tuples yield disjoint streams.
    """
    ss = np.random.SeedSequence(entropy=int(seed),
                                spawn_key=tuple(int(i) for i in indices))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, *indices: int) -> int:
    """Deterministic child seed for (seed, *indices), e.g. one per restart."""
    ss = np.random.SeedSequence(entropy=int(seed),
                                spawn_key=tuple(int(i) for i in indices))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class ChannelParams:
    """AWGN channel description: total complex-noise variance and linear SNR."""
    noise_variance: float
    snr: float


def snr_to_variance(p_a: float, snr: float) -> float:
    """Total noise variance sigma^2 = P_a / snr (snr is a linear power ratio)."""
    if p_a <= 0.0 or snr <= 0.0:
        raise ValueError(f"p_a and snr must be positive, got p_a={p_a}, snr={snr}")
    return p_a / snr


def make_channel(p_a: float, snr: float, noise_variance: float | None = None) -> ChannelParams:
    if noise_variance is not None:
        if noise_variance < 0.0:
            raise ValueError(f"noise_variance must be >= 0, got {noise_variance}")
        return ChannelParams(noise_variance=float(noise_variance), snr=float(snr))
    return ChannelParams(noise_variance=snr_to_variance(p_a, snr), snr=float(snr))


def sample_noise(num: int, sigma2: float, rng: np.random.Generator) -> np.ndarray:
    """(num, 2) array of real/imag noise components, variance sigma2/2 each."""
    if sigma2 == 0.0:
        return np.zeros((num, 2))
    return rng.normal(0.0, np.sqrt(sigma2 / 2.0), size=(num, 2))


def apply_awgn(symbols: np.ndarray, sigma2: float, rng: np.random.Generator) -> np.ndarray:
    """y = x + n with n circularly symmetric complex Gaussian of variance sigma2."""
    x = np.asarray(symbols, dtype=complex)
    if sigma2 == 0.0:
        return x.copy()
    n = sample_noise(x.shape[0], sigma2, rng)
    return x + n[:, 0] + 1j * n[:, 1]
