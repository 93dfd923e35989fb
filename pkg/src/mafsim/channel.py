"""Two-user single-relay channel: direct simulation and whitened equivalent model.

A cooperation frame spans eight channel uses in two slots of four.  Both
users transmit in both slots; the half-duplex relay listens during slot one
and forwards an amplified copy during slot two.  The receiver stacks slot
one on top of the whitened slot two, which turns the relay hop into a
virtual 2 n_d x 2 channel matrix per user.  Keeping both the direct and the
equivalent path lets each validate the other: noiselessly they must agree
to numerical precision.

Transmitted frames are scaled by ``FRAME_NORM`` so codeword entries have
unit average energy, matching the unit-variance signaling the power
fractions are defined against (the raw codeword carries twice the symbol
energy because every symbol is spread over both halves of the frame).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .constellation import Constellation
from .decoder import LatticeSystem
from .stbc import generator_map

FRAME_NORM = 1.0 / math.sqrt(2.0)
SLOT_LENGTH = 4
FRAME_LENGTH = 2 * SLOT_LENGTH


@dataclass(frozen=True)
class PowerProfile:
    """Per-link power fractions and the nominal received SNR.

    ``pi_kj`` is user k's fraction in slot j, ``pi_r`` the relay's.  The full
    cooperative profile satisfies pi_11+pi_12+pi_21+pi_22+pi_r = 2 (two slots
    of unit received SNR); baseline schemes zero individual entries and
    intentionally leave the rest untouched, so every active link keeps the
    same strength across compared schemes.
    """

    pi_11: float
    pi_12: float
    pi_21: float
    pi_22: float
    pi_r: float
    snr: float

    @property
    def p_11(self) -> float:
        return self.pi_11 * self.snr

    @property
    def p_12(self) -> float:
        return self.pi_12 * self.snr

    @property
    def p_21(self) -> float:
        return self.pi_21 * self.snr

    @property
    def p_22(self) -> float:
        return self.pi_22 * self.snr

    @property
    def p_r(self) -> float:
        return self.pi_r * self.snr

    def without_relay(self) -> "PowerProfile":
        return replace(self, pi_r=0.0)

    def single_user(self, k: int) -> "PowerProfile":
        """Silence the other user (time-sharing scenarios)."""
        if k == 1:
            return replace(self, pi_21=0.0, pi_22=0.0)
        if k == 2:
            return replace(self, pi_11=0.0, pi_12=0.0)
        raise ValueError(f"user index must be 1 or 2, got {k}")


def equal_power_profile(snr: float) -> PowerProfile:
    """Equal split of the two-slot budget over the five links."""
    if snr <= 0:
        raise ValueError(f"snr must be positive, got {snr}")
    return PowerProfile(0.4, 0.4, 0.4, 0.4, 0.4, snr)


@dataclass(frozen=True)
class ChannelRealization:
    """One frame's fading coefficients, all i.i.d. unit-variance complex Gaussian."""

    h_1d: np.ndarray
    h_2d: np.ndarray
    h_1r: complex
    h_2r: complex
    h_rd: np.ndarray

    @property
    def n_d(self) -> int:
        return self.h_1d.shape[0]


def _crandn(rng: np.random.Generator, shape) -> np.ndarray:
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return math.sqrt(0.5) * (re + 1j * im)


def draw_channel(rng: np.random.Generator, n_d: int) -> ChannelRealization:
    """Draw a block-fading realization; drawing order is part of the contract."""
    if n_d not in (1, 2):
        raise ValueError(f"n_d must be 1 or 2, got {n_d}")
    h_1d = _crandn(rng, n_d)
    h_2d = _crandn(rng, n_d)
    h_1r = complex(_crandn(rng, ()))
    h_2r = complex(_crandn(rng, ()))
    h_rd = _crandn(rng, n_d)
    return ChannelRealization(h_1d=h_1d, h_2d=h_2d, h_1r=h_1r, h_2r=h_2r, h_rd=h_rd)


def relay_gain(re: ChannelRealization, p: PowerProfile) -> float:
    """Relay amplification meeting its power budget with equality.

    The expected relay output energy over a slot is b^2 (P_11 |h_1r|^2 +
    P_21 |h_2r|^2 + 1) per channel use; equality with the unit budget pins b
    for the given realization (short-term constraint).
    """
    load = 1.0 + p.p_11 * abs(re.h_1r) ** 2 + p.p_21 * abs(re.h_2r) ** 2
    return 1.0 / math.sqrt(load)


def whitener(re: ChannelRealization, p: PowerProfile, b: float) -> np.ndarray:
    """Inverse symmetric square root of the slot-two noise covariance."""
    n_d = re.n_d
    v = b * re.h_rd
    cov = np.eye(n_d) + p.p_r * np.outer(v, v.conj())
    w, vecs = np.linalg.eigh(cov)
    assert w.min() > 0.5, "slot-two noise covariance must be positive definite"
    return (vecs * (1.0 / np.sqrt(w))[None, :]) @ vecs.conj().T


def equivalent_user_channel(
    re: ChannelRealization, p: PowerProfile, b: float, omega: np.ndarray, i: int
) -> np.ndarray:
    """Virtual 2 n_d x 2 matrix of user i in the whitened stacked model.

    Column one acts on the user's slot-one signal (direct plus whitened
    relay echo), column two on its slot-two signal (whitened direct path).
    """
    if i == 1:
        h_id, h_ir = re.h_1d, re.h_1r
        p_i1, p_i2 = p.p_11, p.p_12
    elif i == 2:
        h_id, h_ir = re.h_2d, re.h_2r
        p_i1, p_i2 = p.p_21, p.p_22
    else:
        raise ValueError(f"user index must be 1 or 2, got {i}")
    n_d = re.n_d
    h = np.zeros((2 * n_d, 2), dtype=complex)
    h[:n_d, 0] = math.sqrt(p_i1) * h_id
    h[n_d:, 0] = math.sqrt(p.p_r * p_i1) * b * h_ir * (omega @ re.h_rd)
    h[n_d:, 1] = math.sqrt(p_i2) * (omega @ h_id)
    return h


@dataclass(frozen=True)
class EquivalentChannel:
    b: float
    omega: np.ndarray
    h_tilde_1: np.ndarray
    h_tilde_2: np.ndarray


def equivalent_channel(re: ChannelRealization, p: PowerProfile) -> EquivalentChannel:
    b = relay_gain(re, p)
    omega = whitener(re, p, b)
    return EquivalentChannel(
        b=b,
        omega=omega,
        h_tilde_1=equivalent_user_channel(re, p, b, omega, 1),
        h_tilde_2=equivalent_user_channel(re, p, b, omega, 2),
    )


@dataclass(frozen=True)
class ReceivedFrame:
    """Slot-one and raw slot-two observations plus the whitened stack."""

    y1: np.ndarray
    y2: np.ndarray
    y_tilde: np.ndarray


def transmit_frame(
    c1,
    c2,
    re: ChannelRealization,
    p: PowerProfile,
    rng: np.random.Generator | None,
    noiseless: bool = False,
) -> ReceivedFrame:
    """Simulate one cooperation frame through the direct signal model.

    ``c1``/``c2`` are the users' length-8 frames; entries 1-4 transmit in
    slot one, 5-8 in slot two.  Noise draw order (slot-one, relay, slot-two)
    is fixed.  ``rng`` may be None only when ``noiseless``.
    """
    if rng is None and not noiseless:
        raise ValueError("a generator is required unless noiseless is set")
    c1 = FRAME_NORM * np.asarray(c1, dtype=complex)
    c2 = FRAME_NORM * np.asarray(c2, dtype=complex)
    x11, x12 = c1[:SLOT_LENGTH], c1[SLOT_LENGTH:]
    x21, x22 = c2[:SLOT_LENGTH], c2[SLOT_LENGTH:]
    n_d = re.n_d
    if noiseless:
        v1 = np.zeros((n_d, SLOT_LENGTH), dtype=complex)
        w = np.zeros(SLOT_LENGTH, dtype=complex)
        v2 = np.zeros((n_d, SLOT_LENGTH), dtype=complex)
    else:
        v1 = _crandn(rng, (n_d, SLOT_LENGTH))
        w = _crandn(rng, SLOT_LENGTH)
        v2 = _crandn(rng, (n_d, SLOT_LENGTH))

    b = relay_gain(re, p)
    y1 = (
        math.sqrt(p.p_11) * np.outer(re.h_1d, x11)
        + math.sqrt(p.p_21) * np.outer(re.h_2d, x21)
        + v1
    )
    y_relay = math.sqrt(p.p_11) * re.h_1r * x11 + math.sqrt(p.p_21) * re.h_2r * x21 + w
    y2 = (
        math.sqrt(p.p_r) * b * np.outer(re.h_rd, y_relay)
        + math.sqrt(p.p_12) * np.outer(re.h_1d, x12)
        + math.sqrt(p.p_22) * np.outer(re.h_2d, x22)
        + v2
    )
    omega = whitener(re, p, b)
    y_tilde = np.vstack([y1, omega @ y2])
    return ReceivedFrame(y1=y1, y2=y2, y_tilde=y_tilde)


def _realify_matrix(a: np.ndarray) -> np.ndarray:
    return np.block([[a.real, -a.imag], [a.imag, a.real]])


def realify_received(y_tilde: np.ndarray) -> np.ndarray:
    """Column-stack a received block and split it into real/imaginary parts."""
    v = np.asarray(y_tilde).flatten(order="F")
    return np.concatenate([v.real, v.imag])


def _complex_system_matrix(eq: EquivalentChannel) -> np.ndarray:
    """8 n_d x 16 map from the stacked symbol vector to the received stack."""
    h = np.hstack([eq.h_tilde_1, eq.h_tilde_2])
    phi = generator_map().phi
    blocks = phi.reshape(4, 4, 16, order="F")
    out = np.einsum("rk,kcj->rcj", h, blocks)
    return out.reshape(h.shape[0] * 4, 16, order="F")


def lattice_system(
    re: ChannelRealization,
    p: PowerProfile,
    constellation: Constellation,
    y_tilde: np.ndarray | None = None,
) -> LatticeSystem:
    """Real-valued decoding system for a two-user frame.

    The unknowns are the 32 integer coordinates (16 real parts then 16
    imaginary parts, user 1's symbols before user 2's); the matrix absorbs
    the constellation scale and the frame normalization so that noiselessly
    ``G x`` equals the realified received stack exactly.
    """
    a = _complex_system_matrix(equivalent_channel(re, p))
    a = (FRAME_NORM * constellation.scale) * a
    g = _realify_matrix(a)
    y = realify_received(y_tilde) if y_tilde is not None else np.zeros(g.shape[0])
    coord_sets = tuple([constellation.re_levels] * 16 + [constellation.im_levels] * 16)
    return LatticeSystem(g=g, y=y, coord_sets=coord_sets, scale=constellation.scale)


def user_coordinate_indices(k: int, n_symbols: int = 16) -> list[int]:
    """Positions of user k's coordinates inside a stacked coordinate vector."""
    if k not in (1, 2):
        raise ValueError(f"user index must be 1 or 2, got {k}")
    half = n_symbols // 2
    sym = range(half * (k - 1), half * k)
    return [*sym, *(n_symbols + j for j in sym)]


def ts_naf_system(
    re: ChannelRealization,
    p: PowerProfile,
    constellation: Constellation,
    k: int,
    y_tilde: np.ndarray | None = None,
) -> LatticeSystem:
    """Single-user system for time sharing: user k alone in the frame.

    The other user's power fractions are zeroed, so the relay gain meets its
    budget against the only active transmitter; the system is the two-user
    construction restricted to user k's 16 coordinates.
    """
    full = lattice_system(re, p.single_user(k), constellation, y_tilde)
    cols = user_coordinate_indices(k)
    sets = tuple(full.coord_sets[j] for j in cols)
    return LatticeSystem(g=full.g[:, cols], y=full.y, coord_sets=sets, scale=full.scale)
