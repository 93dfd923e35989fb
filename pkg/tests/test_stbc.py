import math
from itertools import product

import numpy as np
import pytest

from mafsim import ConfigurationError
from mafsim.constellation import golden_constants, make_constellation
from mafsim.stbc import (
    GAMMA,
    assert_supported_code,
    equivalent_codeword,
    generator_map,
    golden_block,
    mother_codeword,
    user_frame,
    vec,
)

# brute-force minimum |det| over nonzero BPSK difference blocks, frozen as a
# regression constant (6560 cases)
MIN_ABS_DET_BPSK_DIFF = 0.5671121607254326


def unit(j):
    s = np.zeros(8, dtype=complex)
    s[j] = 1.0
    return s


def test_golden_block_zero():
    np.testing.assert_array_equal(golden_block(np.zeros(8)), np.zeros((2, 2)))


def test_golden_block_first_symbol():
    g = golden_constants()
    got = golden_block(unit(0))
    want = g.norm * np.array([[g.alpha, 0], [0, g.alpha_bar]])
    np.testing.assert_allclose(got, want, atol=1e-15)


def test_golden_block_fifth_symbol():
    g = golden_constants()
    got = golden_block(unit(4))
    want = g.norm * np.array([[0, g.alpha], [g.zeta8 * g.alpha_bar, 0]])
    np.testing.assert_allclose(got, want, atol=1e-15)


def test_twist_flips_root_of_unity_only():
    g = golden_constants()
    rng = np.random.default_rng(8)
    s = rng.normal(size=8) + 1j * rng.normal(size=8)
    twisted = golden_block(s, conjugate_zeta=True)
    z = -g.zeta8
    a = s[0] + s[1] * z + s[2] * g.theta + s[3] * z * g.theta
    assert abs(twisted[0, 0] - g.norm * g.alpha * a) <= 1e-14
    # symbols hitting only the golden-ratio axis are fixed by the twist
    s13 = unit(0) + 2.0 * unit(2)
    np.testing.assert_allclose(golden_block(s13, True), golden_block(s13, False), atol=1e-15)


def test_mother_codeword_layout_and_energy():
    g = golden_constants()
    np.testing.assert_array_equal(mother_codeword(np.zeros(8)), np.zeros((2, 4)))
    m = mother_codeword(unit(0))
    want = g.norm * np.array(
        [[g.alpha, 0, g.alpha, 0], [0, g.alpha_bar, 0, g.alpha_bar]]
    )
    np.testing.assert_allclose(m, want, atol=1e-15)
    assert abs(np.sum(np.abs(m) ** 2) - 2.0) <= 1e-12


def test_mother_codeword_isometry_random():
    c = make_constellation(4)
    rng = np.random.default_rng(31)
    worst = 0.0
    for _ in range(10_000):
        s = c.points[rng.integers(4, size=8)]
        m = mother_codeword(s)
        target = 2.0 * np.sum(np.abs(s) ** 2)
        worst = max(worst, abs(np.sum(np.abs(m) ** 2) - target) / target)
    assert worst <= 1e-10


def test_equivalent_codeword_structure():
    s2 = unit(0)
    cw = equivalent_codeword(np.zeros(8), s2)
    g = golden_constants()
    want = g.norm * np.array([[0, g.alpha_bar], [1j * g.alpha, 0]])
    np.testing.assert_allclose(cw.m[2:4, 0:2], want, atol=1e-15)
    np.testing.assert_array_equal(cw.m[0:2], np.zeros((2, 4)))
    cw2 = equivalent_codeword(unit(1), np.zeros(8))
    np.testing.assert_allclose(cw2.m[0:2], mother_codeword(unit(1)), atol=1e-15)


def test_equivalent_codeword_isometry_random():
    c = make_constellation(4)
    rng = np.random.default_rng(32)
    worst = 0.0
    for _ in range(10_000):
        s1 = c.points[rng.integers(4, size=8)]
        s2 = c.points[rng.integers(4, size=8)]
        m = equivalent_codeword(s1, s2).m
        target = 2.0 * (np.sum(np.abs(s1) ** 2) + np.sum(np.abs(s2) ** 2))
        worst = max(worst, abs(np.sum(np.abs(m) ** 2) - target) / target)
    assert worst <= 1e-10


def test_gamma_exactly_unitary():
    assert np.array_equal(GAMMA.conj().T @ GAMMA, np.eye(2))


def test_user_frame_concatenates_rows():
    rng = np.random.default_rng(1)
    cw = equivalent_codeword(rng.normal(size=8), rng.normal(size=8))
    f1 = user_frame(cw, 1)
    assert f1.shape == (8,)
    np.testing.assert_array_equal(f1[:4], cw.m[0])
    np.testing.assert_array_equal(f1[4:], cw.m[1])
    f2 = user_frame(cw, 2)
    np.testing.assert_array_equal(f2[:4], cw.m[2])
    np.testing.assert_array_equal(f2[4:], cw.m[3])
    with pytest.raises(ValueError):
        user_frame(cw, 3)


def test_frame_length_matches_two_user_single_antenna_code():
    assert user_frame(equivalent_codeword(np.zeros(8), np.zeros(8)), 1).size == 8
    assert 4 * 2 * 1 == 8


def test_generator_map_linearity():
    phi = generator_map().phi
    assert phi.shape == (16, 16)
    np.testing.assert_array_equal(phi @ np.zeros(16), np.zeros(16))
    e1 = np.zeros(16)
    e1[0] = 1.0
    np.testing.assert_allclose(
        phi @ e1, vec(equivalent_codeword(unit(0), np.zeros(8)).m), atol=1e-15
    )
    rng = np.random.default_rng(77)
    for _ in range(1000):
        a = rng.normal(size=16) + 1j * rng.normal(size=16)
        b = rng.normal(size=16) + 1j * rng.normal(size=16)
        lhs = phi @ (a + b)
        rhs = phi @ a + phi @ b
        assert np.abs(lhs - rhs).max() <= 1e-12


def test_generator_map_reconstructs_codeword():
    rng = np.random.default_rng(78)
    s = rng.normal(size=16) + 1j * rng.normal(size=16)
    phi = generator_map().phi
    direct = vec(equivalent_codeword(s[:8], s[8:]).m)
    np.testing.assert_allclose(phi @ s, direct, atol=1e-12)


def test_difference_determinants_never_vanish():
    entries = np.zeros((4, 8), dtype=complex)
    for j in range(8):
        entries[:, j] = golden_block(unit(j)).flatten()
    cands = np.array(list(product((-2.0, 0.0, 2.0), repeat=8)))
    cands = cands[np.abs(cands).sum(axis=1) > 0]
    assert len(cands) == 3**8 - 1
    e = cands @ entries.T
    dets = np.abs(e[:, 0] * e[:, 3] - e[:, 1] * e[:, 2])
    assert dets.min() > 0
    assert math.isclose(dets.min(), MIN_ABS_DET_BPSK_DIFF, rel_tol=1e-9)


def test_general_code_hook_rejects_other_shapes():
    assert_supported_code(2, 1)
    with pytest.raises(ConfigurationError):
        assert_supported_code(3, 1)
    with pytest.raises(ConfigurationError):
        assert_supported_code(2, 2)
