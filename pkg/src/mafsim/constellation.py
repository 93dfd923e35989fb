"""QAM constellations with Gray labeling, plus the algebraic constants of the code.

All constellations are normalized to unit average energy so transmit power
enters the simulation only through the power-fraction/SNR factors of the
channel module.  Order 2 is a real BPSK set kept small enough that exhaustive
maximum-likelihood search over a whole frame stays tractable; it is used for
decoder validation, not as a production modulation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigurationError

SUPPORTED_ORDERS = (2, 4, 16, 256)


@dataclass(frozen=True)
class Constellation:
    """Unit-average-energy signal set with Gray bit labels.

    ``points[i]`` is the symbol whose label is the ``bits_per_symbol``-bit
    binary expansion of ``i`` (in-phase bits first, quadrature bits last).
    ``re_coords``/``im_coords`` give the integer grid coordinates of each
    point, so that ``points = scale * (re_coords + 1j * im_coords)``;
    ``re_levels``/``im_levels`` list the admissible values per axis.
    """

    order: int
    points: np.ndarray
    bits_per_symbol: int
    re_coords: np.ndarray
    im_coords: np.ndarray
    re_levels: tuple[int, ...]
    im_levels: tuple[int, ...]
    scale: float


@dataclass(frozen=True)
class GoldenConstants:
    """Number-field constants underlying the space-time code.

    theta is the golden ratio, theta_bar its algebraic conjugate; alpha and
    alpha_bar shape the two rows of the encoding block; zeta8 is the primitive
    eighth root of unity whose sign flip realizes the second Galois action.
    """

    theta: float
    theta_bar: float
    alpha: complex
    alpha_bar: complex
    zeta8: complex
    norm: float


def _gray(n: int) -> int:
    return n ^ (n >> 1)


def _pam_levels(count: int) -> list[int]:
    # count equally spaced odd integers centered on zero: -(count-1), ..., count-1
    return [2 * p - (count - 1) for p in range(count)]


@lru_cache(maxsize=None)
def make_constellation(order: int) -> Constellation:
    """Build the Gray-labeled unit-energy constellation of the given order."""
    if order not in SUPPORTED_ORDERS:
        raise ConfigurationError(
            f"unsupported constellation order {order}; supported: {SUPPORTED_ORDERS}"
        )
    bits = int(math.log2(order))
    if order == 2:
        re = np.array([-1, 1])
        im = np.array([0, 0])
        scale = 1.0
    else:
        side = int(math.isqrt(order))
        nb_axis = bits // 2
        levels = _pam_levels(side)
        re = np.empty(order, dtype=int)
        im = np.empty(order, dtype=int)
        for pi in range(side):
            for pq in range(side):
                label = (_gray(pi) << nb_axis) | _gray(pq)
                re[label] = levels[pi]
                im[label] = levels[pq]
        mean_axis = sum(v * v for v in levels) / side
        scale = 1.0 / math.sqrt(2.0 * mean_axis)
    points = scale * (re + 1j * im)
    points.setflags(write=False)
    re.setflags(write=False)
    im.setflags(write=False)
    return Constellation(
        order=order,
        points=points,
        bits_per_symbol=bits,
        re_coords=re,
        im_coords=im,
        re_levels=tuple(sorted(set(re.tolist()))),
        im_levels=tuple(sorted(set(im.tolist()))),
        scale=scale,
    )


def map_bits(bits, c: Constellation) -> np.ndarray:
    """Map a bit sequence to constellation symbols, Gray labeling."""
    bits = np.asarray(bits, dtype=int)
    if bits.ndim != 1 or bits.size % c.bits_per_symbol:
        raise ValueError(
            f"bit count {bits.size} is not a multiple of {c.bits_per_symbol}"
        )
    if bits.size == 0:
        return np.zeros(0, dtype=complex)
    groups = bits.reshape(-1, c.bits_per_symbol)
    weights = 1 << np.arange(c.bits_per_symbol - 1, -1, -1)
    labels = groups @ weights
    return c.points[labels]


def demap_symbols(symbols, c: Constellation) -> np.ndarray:
    """Hard-decide symbols to the nearest constellation point and return bits."""
    symbols = np.atleast_1d(np.asarray(symbols, dtype=complex))
    labels = np.argmin(np.abs(symbols[:, None] - c.points[None, :]), axis=1)
    out = np.zeros((symbols.size, c.bits_per_symbol), dtype=int)
    for j in range(c.bits_per_symbol):
        out[:, j] = (labels >> (c.bits_per_symbol - 1 - j)) & 1
    return out.reshape(-1)


@lru_cache(maxsize=1)
def golden_constants() -> GoldenConstants:
    """Constants of the quadratic extensions the encoder is built on."""
    sqrt5 = math.sqrt(5.0)
    theta = (1.0 + sqrt5) / 2.0
    theta_bar = (1.0 - sqrt5) / 2.0
    return GoldenConstants(
        theta=theta,
        theta_bar=theta_bar,
        alpha=1.0 + 1j - 1j * theta,
        alpha_bar=1.0 + 1j - 1j * theta_bar,
        zeta8=complex(math.sqrt(0.5), math.sqrt(0.5)),
        norm=1.0 / sqrt5,
    )
