"""Acceptance suite: one test per criterion, printing a pass/fail line each.

The Monte Carlo criteria (6-8) run minutes each; deselect with
``pytest -m "not slow"`` during development.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from helpers import two_user_system
from mafsim import analysis, channel, cli, decoder, stbc
from mafsim.constellation import make_constellation
from mafsim.harness import ExperimentConfig, derive_trial_seed, run_wer

F = Fraction
MASTER_SEED = 20240


def report_line(n, passed, detail):
    print(f"criterion {n}: {'PASS' if passed else 'FAIL'} - {detail}")
    assert passed, detail


def snr_at(points, target):
    """Log-linear interpolation of the SNR where a WER curve crosses target."""
    pts = sorted((p for p in points if p[1] > 0), key=lambda p: p[0])
    for (s0, w0), (s1, w1) in zip(pts, pts[1:]):
        if w0 >= target >= w1:
            if w0 == w1:
                return 0.5 * (s0 + s1)
            t = (math.log10(w0) - math.log10(target)) / (
                math.log10(w0) - math.log10(w1)
            )
            return s0 + t * (s1 - s0)
    raise AssertionError(f"target {target} not bracketed by {pts}")


def wer_curve(scheme, n_d, order, grid, min_errors, max_trials, seed, mode):
    cfg = ExperimentConfig(
        command="wer",
        scheme=scheme,
        n_d=n_d,
        constellation_order=order,
        snr_grid_db=grid,
        max_trials=max_trials,
        min_errors=min_errors,
        seed=seed,
        decoder_mode=mode,
        workers=2,
    )
    return [(r.snr_db, r.wer_system) for r in run_wer(cfg)]


# ---------------------------------------------------------------------------


def test_criterion_1_dmt_exactness():
    t0 = time.time()
    maf = analysis.dmt_maf()
    mar = analysis.dmt_mar_upper(1)
    mac = analysis.dmt_mac(2, 1, 1)
    ok = (
        maf.evaluate(F(0)) == 2
        and maf.evaluate(F(2, 3)) == 1
        and maf.evaluate(F(1)) == 0
        and mac.evaluate(F(1, 3)) == F(2, 3)
        and mar.evaluate(F(1, 2)) == F(3, 2)
    )
    for k in range(101):
        r = F(k, 100)
        want = 2 - r if r <= F(1, 2) else 3 * (1 - r)
        ok = ok and mar.evaluate(r) == want
    elapsed = time.time() - t0
    report_line(
        1,
        ok and elapsed < 1.0,
        f"exact breakpoint values verified in {elapsed * 1e3:.0f} ms",
    )


def test_criterion_2_min_cut_bound_collapse():
    t0 = time.time()
    mar = analysis.dmt_mar_upper(1)
    closed = analysis.DmtCurve(
        breakpoints=((F(0), F(2)), (F(1, 2), F(3, 2)), (F(1), F(0)))
    )
    agree = sum(
        mar.evaluate(F(k, 100)) == closed.evaluate(F(k, 100)) for k in range(101)
    )
    elapsed = time.time() - t0
    report_line(
        2,
        agree == 101 and elapsed < 1.0,
        f"{agree}/101 exact grid agreements in {elapsed * 1e3:.0f} ms",
    )


def test_criterion_3_model_consistency():
    c = make_constellation(4)
    worst = 0.0
    for n_d in (1, 2):
        rng = np.random.default_rng(derive_trial_seed(MASTER_SEED, n_d, 301))
        for _ in range(1000):
            re = channel.draw_channel(rng, n_d)
            p = channel.equal_power_profile(float(rng.uniform(1.0, 100.0)))
            s = c.points[rng.integers(4, size=16)]
            cw = stbc.equivalent_codeword(s[:8], s[8:])
            fr = channel.transmit_frame(
                stbc.user_frame(cw, 1), stbc.user_frame(cw, 2), re, p, None, True
            )
            eq = channel.equivalent_channel(re, p)
            recon = channel.FRAME_NORM * (
                eq.h_tilde_1 @ cw.m[0:2] + eq.h_tilde_2 @ cw.m[2:4]
            )
            worst = max(worst, float(np.abs(fr.y_tilde - recon).max()))
    report_line(
        3,
        worst <= 1e-10,
        f"direct vs equivalent max |diff| = {worst:.3e} over 2x10^3 realizations",
    )


def test_criterion_4_code_isometry():
    c = make_constellation(4)
    rng = np.random.default_rng(derive_trial_seed(MASTER_SEED, 0, 401))
    worst = 0.0
    for _ in range(10_000):
        s = c.points[rng.integers(4, size=16)]
        m = stbc.equivalent_codeword(s[:8], s[8:]).m
        target = 2.0 * float(np.sum(np.abs(s) ** 2))
        worst = max(worst, abs(float(np.sum(np.abs(m) ** 2)) - target) / target)
    report_line(4, worst <= 1e-10, f"max relative energy error {worst:.3e} over 10^4 draws")


@pytest.mark.slow
def test_criterion_5_decoder_oracle_equivalence():
    bpsk = make_constellation(2)
    rng = np.random.default_rng(derive_trial_seed(MASTER_SEED, 0, 501))
    agree = 0
    for _ in range(500):
        sys, _ = two_user_system(rng, bpsk, 2, 10.0)
        ml = decoder.exhaustive_ml(sys)
        sp = decoder.sphere_decode(sys)
        agree += int(
            np.array_equal(ml.x_hat, sp.x_hat)
            and math.isclose(ml.metric, sp.metric, rel_tol=1e-9, abs_tol=1e-12)
        )
    qam = make_constellation(4)
    rng2 = np.random.default_rng(derive_trial_seed(MASTER_SEED, 1, 501))
    recovered = 0
    for _ in range(1000):
        sys, x_true = two_user_system(rng2, qam, 2, 10.0, noiseless=True)
        recovered += int(np.array_equal(decoder.sphere_decode(sys).x_hat, x_true))
    report_line(
        5,
        agree == 500 and recovered == 1000,
        f"sphere=ML on {agree}/500 noisy BPSK systems; {recovered}/1000 noiseless recoveries",
    )


@pytest.mark.slow
def test_criterion_6_mmse_dfe_close_to_ml():
    bpsk = make_constellation(2)
    trials = 10_000
    ml_errors_14 = 0
    mmse_curve = []
    for snr_db in (12.0, 14.0, 16.0):
        snr = 10.0 ** (snr_db / 10.0)
        e_mm = 0
        for t in range(trials):
            rng = np.random.default_rng(
                derive_trial_seed(MASTER_SEED, t, 600 + int(snr_db))
            )
            sys, x_true = two_user_system(rng, bpsk, 1, snr)
            mm = decoder.decode(sys, snr=snr, mode="mmse_dfe_lattice")
            e_mm += int(not np.array_equal(mm.x_hat, x_true))
            if snr_db == 14.0:
                ml = decoder.exhaustive_ml(sys)
                ml_errors_14 += int(not np.array_equal(ml.x_hat, x_true))
        mmse_curve.append((snr_db, e_mm / trials))
    wer_ml = ml_errors_14 / trials
    crossing = snr_at(mmse_curve, wer_ml)
    gap = abs(crossing - 14.0)
    report_line(
        6,
        gap <= 0.5,
        f"ML WER {wer_ml:.4f} at 14 dB; lattice decoder reaches it at "
        f"{crossing:.2f} dB (gap {gap:.2f} dB, curve {mmse_curve})",
    )


@pytest.fixture(scope="module")
def maf4_nd1_curve():
    return wer_curve(
        "maf", 1, 4, (20.0, 30.0, 2.5), 100, 120_000, MASTER_SEED, "mmse_dfe_lattice"
    )


@pytest.mark.slow
def test_criterion_7_diversity_orders(maf4_nd1_curve):
    window = [(s, w) for s, w in maf4_nd1_curve if 1e-3 <= w <= 1e-1]
    assert len(window) >= 3, f"need 3+ points inside the WER window, got {window}"
    wer_slope = analysis.diversity_slope(window)

    outage_recs = []
    mac_recs = []
    for i, snr_db in enumerate(np.arange(25.0, 35.1, 2.5)):
        rng = np.random.default_rng(derive_trial_seed(MASTER_SEED, i, 701))
        outage_recs.append(
            analysis.outage_probability("maf", 1, 2.0, float(snr_db), 200_000, rng)
        )
        rng2 = np.random.default_rng(derive_trial_seed(MASTER_SEED, i, 702))
        mac_recs.append(
            analysis.outage_probability("mac", 1, 2.0, float(snr_db), 200_000, rng2)
        )
    maf_slope = analysis.diversity_slope(outage_recs)
    mac_slope = analysis.diversity_slope(mac_recs)
    ok = 1.5 <= wer_slope <= 2.5 and 1.6 <= maf_slope <= 2.4 and 0.7 <= mac_slope <= 1.3
    report_line(
        7,
        ok,
        f"WER slope {wer_slope:.2f} (target [1.5,2.5]) over {window}; "
        f"outage slopes maf {maf_slope:.2f} in [1.6,2.4], mac {mac_slope:.2f} in [0.7,1.3]",
    )


@pytest.mark.slow
def test_criterion_8_gain_over_time_sharing(maf4_nd1_curve):
    target = 1e-2
    snr_maf4 = snr_at(maf4_nd1_curve, target)
    ts16 = wer_curve(
        "ts-naf", 1, 4, (32.0, 38.0, 2.0), 150, 60_000, MASTER_SEED + 1, "mmse_dfe_lattice"
    )
    snr_ts16 = snr_at(ts16, target)
    gain_4qam = snr_ts16 - snr_maf4

    maf16 = wer_curve(
        "maf", 2, 16, (23.0, 29.0, 2.0), 150, 60_000, MASTER_SEED + 2, "mmse_dfe_lattice"
    )
    ts256 = wer_curve(
        "ts-naf", 2, 16, (33.0, 39.0, 2.0), 150, 60_000, MASTER_SEED + 3, "mmse_dfe_lattice"
    )
    gain_16qam = snr_at(ts256, target) - snr_at(maf16, target)
    ok = gain_4qam >= 4.0 and gain_16qam >= gain_4qam
    report_line(
        8,
        ok,
        f"4-QAM vs 16-QAM time sharing: {gain_4qam:.2f} dB at WER 1e-2 (need >= 4); "
        f"16-QAM vs 256-QAM time sharing: {gain_16qam:.2f} dB (need >= 4-QAM gain)",
    )


def test_criterion_9_byte_identical_outputs(tmp_path):
    argv = [
        "wer",
        "--scheme",
        "maf",
        "--nd",
        "2",
        "--constellation",
        "4",
        "--snr",
        "12:14:2",
        "--max-trials",
        "1024",
        "--min-errors",
        "30",
        "--seed",
        "77",
    ]
    paths = [tmp_path / f"{i}.csv" for i in range(3)]
    assert cli.main(argv + ["--out", str(paths[0])]) == 0
    assert cli.main(argv + ["--out", str(paths[1])]) == 0
    assert cli.main(argv + ["--workers", "2", "--out", str(paths[2])]) == 0
    rerun = paths[0].read_bytes() == paths[1].read_bytes()
    workers = paths[0].read_bytes() == paths[2].read_bytes()

    o_argv = ["outage", "--scheme", "maf", "--snr", "10:15:5", "--trials", "20000", "--seed", "5"]
    op = [tmp_path / f"o{i}.csv" for i in range(2)]
    assert cli.main(o_argv + ["--out", str(op[0])]) == 0
    assert cli.main(o_argv + ["--out", str(op[1])]) == 0
    outage_same = op[0].read_bytes() == op[1].read_bytes()
    report_line(
        9,
        rerun and workers and outage_same,
        f"wer rerun identical={rerun}, worker-count invariant={workers}, outage rerun identical={outage_same}",
    )


@pytest.mark.slow
def test_criterion_10_validate_command(capsys):
    rc = cli.main(["validate", "--seed", str(MASTER_SEED)])
    out = capsys.readouterr().out
    ok = rc == 0 and "all checks passed" in out
    report_line(10, ok, f"mafsim validate exit code {rc}")
