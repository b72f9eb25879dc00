"""Tests for the AWGN channel and the reproducible stream derivation."""

import numpy as np
import pytest

from swiptmod.channel import (ROLE_EVAL, ROLE_NOISE, ChannelParams, apply_awgn,
                              derive_seed, make_channel, sample_noise,
                              snr_to_variance, substream)


def test_snr_to_variance_values():
    assert snr_to_variance(0.001, 50.0) == pytest.approx(2e-5, rel=1e-12)
    assert snr_to_variance(0.002, 50.0) == pytest.approx(4e-5, rel=1e-12)


def test_snr_to_variance_noiseless_limit():
    assert snr_to_variance(0.001, 1e12) < 1e-14


@pytest.mark.parametrize("p_a,snr", [(0.0, 50.0), (-1.0, 50.0), (0.001, 0.0),
                                     (0.001, -3.0)])
def test_snr_to_variance_rejects_nonpositive(p_a, snr):
    with pytest.raises(ValueError):
        snr_to_variance(p_a, snr)


def test_make_channel_default_and_override():
    ch = make_channel(0.001, 50.0)
    assert ch == ChannelParams(noise_variance=2e-5, snr=50.0)
    ch = make_channel(0.001, 50.0, noise_variance=1e-3)
    assert ch.noise_variance == 1e-3
    with pytest.raises(ValueError):
        make_channel(0.001, 50.0, noise_variance=-1e-3)


def test_apply_awgn_zero_variance_is_identity():
    x = np.array([1 + 2j, -0.5j, 3.25])
    y = apply_awgn(x, 0.0, substream(0, ROLE_NOISE))
    assert np.array_equal(x, y)
    assert y is not x  # caller gets a copy, not a view


def test_apply_awgn_reproducible():
    x = np.zeros(16, dtype=complex)
    y1 = apply_awgn(x, 1e-4, substream(3, ROLE_NOISE))
    y2 = apply_awgn(x, 1e-4, substream(3, ROLE_NOISE))
    assert np.array_equal(y1, y2)


def test_noise_component_statistics():
    sigma2 = 4e-5
    n = sample_noise(1_000_000, sigma2, substream(1, ROLE_NOISE))
    assert n.shape == (1_000_000, 2)
    # each component is N(0, sigma2/2); 5 sigma bands on mean and variance
    for comp in (n[:, 0], n[:, 1]):
        assert abs(comp.mean()) < 5 * np.sqrt(sigma2 / 2 / comp.size)
        assert comp.var() == pytest.approx(sigma2 / 2, rel=0.02)
    # components uncorrelated (circular symmetry)
    rho = np.corrcoef(n[:, 0], n[:, 1])[0, 1]
    assert abs(rho) < 5 / np.sqrt(n.shape[0])


def test_substream_determinism_and_disjointness():
    a1 = substream(42, ROLE_EVAL, 7).standard_normal(8)
    a2 = substream(42, ROLE_EVAL, 7).standard_normal(8)
    b = substream(42, ROLE_EVAL, 8).standard_normal(8)
    c = substream(43, ROLE_EVAL, 7).standard_normal(8)
    assert np.array_equal(a1, a2)
    assert not np.array_equal(a1, b)
    assert not np.array_equal(a1, c)


def test_derive_seed_stable():
    s1 = derive_seed(0, 1, 2)
    s2 = derive_seed(0, 1, 2)
    s3 = derive_seed(0, 1, 3)
    assert s1 == s2
    assert s1 != s3
    assert 0 <= s1 < 2 ** 64
