"""Shared builders for channel/decoder tests."""

import numpy as np

from mafsim import channel, stbc


def encode_frames(symbols):
    """Both users' length-8 frames for a stacked 16-symbol vector."""
    phi = stbc.generator_map().phi
    m = (phi @ np.asarray(symbols, dtype=complex)).reshape(4, 4, order="F")
    return np.concatenate([m[0], m[1]]), np.concatenate([m[2], m[3]])


def two_user_system(rng, const, n_d, snr, noiseless=False):
    """Draw one frame through the channel; returns (system, true coords)."""
    re = channel.draw_channel(rng, n_d)
    p = channel.equal_power_profile(snr)
    idx = rng.integers(const.order, size=16)
    c1, c2 = encode_frames(const.points[idx])
    fr = channel.transmit_frame(c1, c2, re, p, None if noiseless else rng, noiseless)
    sys = channel.lattice_system(re, p, const, fr.y_tilde)
    x_true = np.concatenate([const.re_coords[idx], const.im_coords[idx]])
    return sys, x_true
