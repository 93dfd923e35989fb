"""Distributed space-time code construction for the two-user relay channel.

Per user, eight information symbols enter a 2x2 full-rate block built on the
golden ratio; the block and its twisted copy (eighth root of unity negated)
form the 2x4 mother codeword.  The two users' mother codewords are stacked
into a 4x4 joint codeword, with user 2's first block multiplied by the fixed
unitary GAMMA so joint error events keep full rank.  Each user transmits the
two rows of its block back to back as a length-8 frame: entries 1-4 in the
first slot, entries 5-8 in the second.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .constellation import golden_constants
from .errors import ConfigurationError

N_USERS = 2
SYMBOLS_PER_USER = 8
FRAME_LENGTH = 8   # 4 * N_USERS * n_tx for the supported single-antenna code

GAMMA = np.array([[0.0, 1.0], [1j, 0.0]])


def assert_supported_code(n_users: int = 2, n_tx: int = 1) -> None:
    """Guard for the general (K, n_t) hook: only the 2-user, 1-antenna code exists."""
    if (n_users, n_tx) != (2, 1):
        raise ConfigurationError(
            f"only the (K=2, n_t=1) code is implemented, got (K={n_users}, n_t={n_tx})"
        )


def golden_block(s, conjugate_zeta: bool = False) -> np.ndarray:
    """2x2 encoding block of one user's eight symbols.

    With ``conjugate_zeta`` the eighth root of unity is negated everywhere it
    appears; the golden-ratio constants are untouched by that action.
    """
    s = np.asarray(s, dtype=complex)
    if s.shape != (SYMBOLS_PER_USER,):
        raise ValueError(f"expected {SYMBOLS_PER_USER} symbols, got shape {s.shape}")
    g = golden_constants()
    z = -g.zeta8 if conjugate_zeta else g.zeta8
    a = s[0] + s[1] * z + s[2] * g.theta + s[3] * z * g.theta
    b = s[4] + s[5] * z + s[6] * g.theta + s[7] * z * g.theta
    a_conj = s[0] + s[1] * z + s[2] * g.theta_bar + s[3] * z * g.theta_bar
    b_conj = s[4] + s[5] * z + s[6] * g.theta_bar + s[7] * z * g.theta_bar
    return g.norm * np.array(
        [
            [g.alpha * a, g.alpha * b],
            [z * g.alpha_bar * b_conj, g.alpha_bar * a_conj],
        ]
    )


def mother_codeword(s) -> np.ndarray:
    """2x4 per-user codeword: the encoding block next to its twisted copy."""
    return np.hstack([golden_block(s, False), golden_block(s, True)])


@dataclass(frozen=True)
class EquivalentCodeword:
    """Stacked 4x4 two-user codeword; rows 1-2 belong to user 1, rows 3-4 to user 2."""

    m: np.ndarray
    gamma: np.ndarray


def equivalent_codeword(s1, s2) -> EquivalentCodeword:
    """Joint codeword of both users, with the unitary twist on user 2's first block."""
    xi2 = golden_block(s2, False)
    top = mother_codeword(s1)
    bottom = np.hstack([GAMMA @ xi2, golden_block(s2, True)])
    m = np.vstack([top, bottom])
    m.setflags(write=False)
    return EquivalentCodeword(m=m, gamma=GAMMA)


def user_frame(codeword: EquivalentCodeword, k: int) -> np.ndarray:
    """Length-8 transmit frame of user k: its two codeword rows concatenated."""
    if k not in (1, 2):
        raise ValueError(f"user index must be 1 or 2, got {k}")
    block = codeword.m[2 * (k - 1) : 2 * k]
    return np.concatenate([block[0], block[1]])


def vec(m) -> np.ndarray:
    """Column stacking: columns of m concatenated top to bottom, left to right."""
    return np.asarray(m).flatten(order="F")


@dataclass(frozen=True)
class GeneratorMap:
    """16x16 linear map from the stacked symbol vector (user 1 then user 2)
    to the column-stacked joint codeword."""

    phi: np.ndarray


@lru_cache(maxsize=1)
def _generator_matrix() -> np.ndarray:
    phi = np.zeros((16, 16), dtype=complex)
    for j in range(16):
        s = np.zeros(16, dtype=complex)
        s[j] = 1.0
        phi[:, j] = vec(equivalent_codeword(s[:8], s[8:]).m)
    phi.setflags(write=False)
    return phi


def generator_map() -> GeneratorMap:
    """Linearization of the encoder, computed once from the 16 unit vectors."""
    return GeneratorMap(phi=_generator_matrix())
