import math

import numpy as np
import pytest

from mafsim import ConfigurationError
from mafsim.constellation import (
    SUPPORTED_ORDERS,
    demap_symbols,
    golden_constants,
    make_constellation,
    map_bits,
)


@pytest.mark.parametrize("order", SUPPORTED_ORDERS)
def test_unit_average_energy(order):
    c = make_constellation(order)
    assert len(c.points) == order
    assert abs(np.mean(np.abs(c.points) ** 2) - 1.0) <= 1e-12


@pytest.mark.parametrize("order", SUPPORTED_ORDERS)
def test_points_distinct_and_coords_consistent(order):
    c = make_constellation(order)
    assert len(set(c.points.tolist())) == order
    np.testing.assert_allclose(
        c.points, c.scale * (c.re_coords + 1j * c.im_coords), atol=1e-15
    )


def test_bpsk_is_real_pair():
    c = make_constellation(2)
    assert sorted(c.points.real.tolist()) == [-1.0, 1.0]
    assert np.abs(c.points.imag).max() == 0.0
    assert c.bits_per_symbol == 1
    assert c.im_levels == (0,)


def test_qpsk_points():
    c = make_constellation(4)
    expected = {(1 + 1j), (1 - 1j), (-1 + 1j), (-1 - 1j)}
    assert set(np.round(c.points * math.sqrt(2), 12).tolist()) == expected


def test_16qam_grid():
    c = make_constellation(16)
    assert c.re_levels == (-3, -1, 1, 3)
    assert abs(c.scale - 1 / math.sqrt(10)) <= 1e-15
    # derived: per-axis mean of {1, 9} is 5, two axes give 10


@pytest.mark.parametrize("order", (4, 16, 256))
def test_gray_neighbors_differ_in_one_bit(order):
    c = make_constellation(order)
    nb = c.bits_per_symbol
    labels = {(int(a), int(b)): i for i, (a, b) in enumerate(zip(c.re_coords, c.im_coords))}
    for (a, b), i in labels.items():
        for da, db in ((2, 0), (0, 2)):
            j = labels.get((a + da, b + db))
            if j is not None:
                assert bin(i ^ j).count("1") == 1, f"labels {i:0{nb}b} vs {j:0{nb}b}"


def test_unsupported_order_rejected():
    with pytest.raises(ConfigurationError):
        make_constellation(8)


def test_map_bits_empty_and_shape():
    c = make_constellation(4)
    assert map_bits([], c).size == 0
    assert map_bits([0, 1], c).shape == (1,)


def test_map_bits_length_mismatch():
    c = make_constellation(16)
    with pytest.raises(ValueError):
        map_bits([0, 1, 1], c)


@pytest.mark.parametrize("order", SUPPORTED_ORDERS)
def test_bit_mapping_round_trip(order):
    c = make_constellation(order)
    rng = np.random.default_rng(2024)
    bits = rng.integers(2, size=10_000 * c.bits_per_symbol // c.bits_per_symbol * c.bits_per_symbol)
    bits = bits[: (bits.size // c.bits_per_symbol) * c.bits_per_symbol]
    symbols = map_bits(bits, c)
    np.testing.assert_array_equal(demap_symbols(symbols, c), bits)


def test_symbol_round_trip():
    c = make_constellation(16)
    rng = np.random.default_rng(5)
    labels = rng.integers(16, size=1000)
    symbols = c.points[labels]
    bits = demap_symbols(symbols, c)
    np.testing.assert_allclose(map_bits(bits, c), symbols, atol=1e-15)


def test_golden_constants_values():
    g = golden_constants()
    assert abs(g.theta - 1.618033988749895) <= 1e-15
    assert abs(g.theta * g.theta_bar + 1.0) <= 1e-15
    assert abs(g.theta + g.theta_bar - 1.0) <= 1e-15
    assert abs(g.alpha - (1 - 1j * (math.sqrt(5) - 1) / 2)) <= 1e-15
    assert abs(abs(g.alpha) ** 2 + abs(g.alpha_bar) ** 2 - 5.0) <= 1e-12
    assert abs(g.zeta8 - complex(math.cos(math.pi / 4), math.sin(math.pi / 4))) <= 1e-15
    assert abs(g.norm - 1 / math.sqrt(5)) <= 1e-16
