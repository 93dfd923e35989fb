"""Experiment orchestration: configuration, deterministic seeding, and the
dmt / outage / wer / validate commands.

Every Monte Carlo trial owns a generator seeded by a stateless mix of
(master seed, trial index, SNR index), so results are bit-identical no
matter how trials are scheduled across workers.  Word-error runs proceed in
fixed-size batches and stop after the first batch that reaches the error
target, which keeps early stopping independent of the worker count too.
"""

from __future__ import annotations

import math
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import islice
from pathlib import Path

import numpy as np

from . import analysis, channel, decoder, stbc
from .constellation import SUPPORTED_ORDERS, make_constellation
from .errors import ConfigurationError

COMMANDS = ("dmt", "outage", "wer", "validate")
SCHEMES = ("maf", "mac", "ts", "ts-naf")
RATE_CONVENTIONS = ("per-user", "sum")
WER_BATCH = 512

_M64 = (1 << 64) - 1


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _M64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return z ^ (z >> 31)


def derive_trial_seed(master_seed: int, trial_index: int, snr_index: int) -> int:
    """Stateless 64-bit seed mixer; identical inputs give identical seeds."""
    h = _splitmix64(master_seed & _M64)
    h = _splitmix64(h ^ _splitmix64((snr_index + 0x9E37) & _M64))
    h = _splitmix64(h ^ _splitmix64((trial_index + 0x79B9) & _M64))
    return h


# ---------------------------------------------------------------------------
# Configuration


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    scheme: str = "maf"
    n_d: int = 1
    constellation_order: int = 4
    rate_bpcu: float = 2.0
    snr_grid_db: tuple[float, float, float] = (0.0, 30.0, 5.0)
    trials: int = 100_000
    max_trials: int = 100_000
    min_errors: int = 100
    seed: int = 20240
    decoder_mode: str = "auto"
    out_path: str | None = None
    workers: int = 1
    noiseless: bool = False
    rate_convention: str = "per-user"

    def snr_points(self) -> list[float]:
        start, stop, step = self.snr_grid_db
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [start + i * step for i in range(count)]

    def per_user_rate(self) -> float:
        if self.rate_convention == "sum":
            return self.rate_bpcu / 2.0
        return self.rate_bpcu


_FILE_KEYS = (
    "scheme",
    "nd",
    "constellation",
    "rate",
    "snr",
    "trials",
    "max_trials",
    "min_errors",
    "seed",
    "decoder",
    "out",
    "workers",
    "noiseless",
    "rate_convention",
)

_BOOL_VALUES = {"true": True, "1": True, "yes": True, "false": False, "0": False, "no": False}


def _parse_snr(text: str) -> tuple[float, float, float]:
    parts = text.split(":")
    try:
        if len(parts) == 1:
            v = float(parts[0])
            return (v, v, 1.0)
        if len(parts) == 3:
            return (float(parts[0]), float(parts[1]), float(parts[2]))
    except ValueError:
        pass
    raise ConfigurationError(f"snr must be 'start:stop:step' or a single value, got {text!r}")


def _parse_bool(text: str) -> bool:
    try:
        return _BOOL_VALUES[text.strip().lower()]
    except KeyError:
        raise ConfigurationError(f"expected a boolean, got {text!r}") from None


_COERCERS = {
    "scheme": str,
    "nd": int,
    "constellation": int,
    "rate": float,
    "snr": _parse_snr,
    "trials": int,
    "max_trials": int,
    "min_errors": int,
    "seed": int,
    "decoder": str,
    "out": str,
    "workers": int,
    "noiseless": _parse_bool,
    "rate_convention": str,
}


def _read_config_file(path: str) -> dict:
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected 'key = value'")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in _FILE_KEYS:
            raise ConfigurationError(f"{path}:{lineno}: unknown config key {key!r}")
        try:
            values[key] = _COERCERS[key](val)
        except ConfigurationError:
            raise
        except ValueError as exc:
            raise ConfigurationError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return values


def _build_arg_parser():
    import argparse

    class _Parser(argparse.ArgumentParser):
        def error(self, message):  # argparse would exit(2); configuration errors are exit 1
            raise ConfigurationError(message)

    p = _Parser(prog="mafsim", description="Two-user amplify-and-forward relay simulator")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="key = value configuration file; flags override it")
    p.add_argument("--scheme")
    p.add_argument("--nd", type=int)
    p.add_argument("--constellation", type=int)
    p.add_argument("--rate", type=float)
    p.add_argument("--snr", help="start:stop:step in dB")
    p.add_argument("--trials", type=int)
    p.add_argument("--max-trials", dest="max_trials", type=int)
    p.add_argument("--min-errors", dest="min_errors", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--decoder")
    p.add_argument("--out")
    p.add_argument("--workers", type=int)
    p.add_argument("--noiseless", action="store_true", default=None)
    p.add_argument("--rate-convention", dest="rate_convention")
    return p


def parse_config(argv=None) -> ExperimentConfig:
    """Resolve command line plus optional config file into an ExperimentConfig.

    Precedence: built-in defaults, then file values, then explicit flags.
    """
    args = _build_arg_parser().parse_args(argv)
    merged = {}
    if args.config:
        merged.update(_read_config_file(args.config))
    flag_map = {
        "scheme": args.scheme,
        "nd": args.nd,
        "constellation": args.constellation,
        "rate": args.rate,
        "snr": _parse_snr(args.snr) if args.snr is not None else None,
        "trials": args.trials,
        "max_trials": args.max_trials,
        "min_errors": args.min_errors,
        "seed": args.seed,
        "decoder": args.decoder,
        "out": args.out,
        "workers": args.workers,
        "noiseless": args.noiseless,
        "rate_convention": args.rate_convention,
    }
    merged.update({k: v for k, v in flag_map.items() if v is not None})

    cfg = ExperimentConfig(
        command=args.command,
        scheme=merged.get("scheme", "maf"),
        n_d=merged.get("nd", 1),
        constellation_order=merged.get("constellation", 4),
        rate_bpcu=merged.get("rate", 2.0),
        snr_grid_db=merged.get("snr", (0.0, 30.0, 5.0)),
        trials=merged.get("trials", 100_000),
        max_trials=merged.get("max_trials", 100_000),
        min_errors=merged.get("min_errors", 100),
        seed=merged.get("seed", 20240) & _M64,
        decoder_mode=merged.get("decoder", "auto"),
        out_path=merged.get("out"),
        workers=merged.get("workers", 1),
        noiseless=merged.get("noiseless", False),
        rate_convention=merged.get("rate_convention", "per-user"),
    )
    _validate_config(cfg)
    return cfg


def _validate_config(cfg: ExperimentConfig) -> None:
    if cfg.scheme not in SCHEMES:
        raise ConfigurationError(f"scheme: unknown value {cfg.scheme!r}; choose from {SCHEMES}")
    if cfg.n_d not in (1, 2):
        raise ConfigurationError(f"nd: must be 1 or 2, got {cfg.n_d}")
    if cfg.constellation_order not in SUPPORTED_ORDERS:
        raise ConfigurationError(
            f"constellation: unsupported order {cfg.constellation_order}; supported: {SUPPORTED_ORDERS}"
        )
    if cfg.command == "wer" and cfg.scheme in ("ts", "ts-naf"):
        squared = cfg.constellation_order**2
        if squared not in SUPPORTED_ORDERS:
            raise ConfigurationError(
                f"constellation: time sharing squares the order and {squared} is unsupported"
            )
    start, stop, step = cfg.snr_grid_db
    if step <= 0:
        raise ConfigurationError(f"snr: step must be positive, got {step}")
    if stop < start:
        raise ConfigurationError(f"snr: stop {stop} is below start {start}")
    if cfg.rate_bpcu <= 0:
        raise ConfigurationError(f"rate: must be positive, got {cfg.rate_bpcu}")
    for name, val in (
        ("trials", cfg.trials),
        ("max_trials", cfg.max_trials),
        ("min_errors", cfg.min_errors),
        ("workers", cfg.workers),
    ):
        if val < 1:
            raise ConfigurationError(f"{name}: must be at least 1, got {val}")
    if cfg.decoder_mode not in decoder.DECODER_MODES:
        raise ConfigurationError(
            f"decoder: unknown mode {cfg.decoder_mode!r}; choose from {decoder.DECODER_MODES}"
        )
    if cfg.rate_convention not in RATE_CONVENTIONS:
        raise ConfigurationError(
            f"rate_convention: choose from {RATE_CONVENTIONS}, got {cfg.rate_convention!r}"
        )


def default_out_path(cfg: ExperimentConfig) -> str:
    return cfg.out_path or f"mafsim-{cfg.command}.csv"


# ---------------------------------------------------------------------------
# Word-error-rate runs


@dataclass(frozen=True)
class WerRecord:
    snr_db: float
    trials: int
    word_errors_system: int
    word_errors_user1: int
    word_errors_user2: int
    decoder_mode: str

    @property
    def wer_system(self) -> float:
        return self.word_errors_system / self.trials


def _wer_constellation_order(cfg: ExperimentConfig) -> int:
    order = cfg.constellation_order
    if cfg.scheme in ("ts", "ts-naf"):
        order = order * order  # time sharing doubles spectral efficiency per frame
        if order not in SUPPORTED_ORDERS:
            raise ConfigurationError(
                f"constellation: time sharing squares the order and {order} is unsupported"
            )
    return order


def _resolved_decoder_mode(cfg: ExperimentConfig) -> str:
    if cfg.decoder_mode != "auto":
        return cfg.decoder_mode
    n_cols = 32 if cfg.scheme in ("maf", "mac") else 16
    return "sphere" if 16 * cfg.n_d >= n_cols else "mmse_dfe_lattice"


def _wer_trial(scheme, n_d, const, mode, snr_db, noiseless, trial_index, seed):
    rng = np.random.default_rng(seed)
    snr = 10.0 ** (snr_db / 10.0)
    re = channel.draw_channel(rng, n_d)
    base = channel.equal_power_profile(snr)
    phi = stbc.generator_map().phi

    if scheme in ("maf", "mac"):
        p = base if scheme == "maf" else base.without_relay()
        idx = rng.integers(const.order, size=16)
        s = const.points[idx]
        m = (phi @ s).reshape(4, 4, order="F")
        fr = channel.transmit_frame(
            np.concatenate([m[0], m[1]]), np.concatenate([m[2], m[3]]), re, p, rng, noiseless
        )
        sys = channel.lattice_system(re, p, const, fr.y_tilde)
        res = decoder.decode(sys, snr=snr, mode=mode)
        x_true = np.concatenate([const.re_coords[idx], const.im_coords[idx]])
        wrong = res.x_hat != x_true
        e1 = bool(wrong[channel.user_coordinate_indices(1)].any())
        e2 = bool(wrong[channel.user_coordinate_indices(2)].any())
        return e1 or e2, e1, e2

    # time sharing: users alternate whole frames, active user at squared order
    k = 1 + trial_index % 2
    p = base if scheme == "ts-naf" else base.without_relay()
    idx = rng.integers(const.order, size=8)
    s = np.zeros(16, dtype=complex)
    s[8 * (k - 1) : 8 * k] = const.points[idx]
    m = (phi @ s).reshape(4, 4, order="F")
    fr = channel.transmit_frame(
        np.concatenate([m[0], m[1]]),
        np.concatenate([m[2], m[3]]),
        re,
        p.single_user(k),
        rng,
        noiseless,
    )
    sys = channel.ts_naf_system(re, p, const, k, fr.y_tilde)
    res = decoder.decode(sys, snr=snr, mode=mode)
    x_true = np.concatenate([const.re_coords[idx], const.im_coords[idx]])
    err = bool((res.x_hat != x_true).any())
    return err, err and k == 1, err and k == 2


def _wer_batch(args) -> tuple[int, int, int, int]:
    (scheme, n_d, order, mode, snr_db, snr_idx, start, count, noiseless, seed) = args
    const = make_constellation(order)
    errs = e1s = e2s = 0
    for i in range(count):
        trial = start + i
        err, e1, e2 = _wer_trial(
            scheme,
            n_d,
            const,
            mode,
            snr_db,
            noiseless,
            trial,
            derive_trial_seed(seed, trial, snr_idx),
        )
        errs += err
        e1s += e1
        e2s += e2
    return count, errs, e1s, e2s


def _run_wer_point(cfg, order, mode, snr_idx, snr_db) -> tuple[int, int, int, int]:
    arg_list = [
        (
            cfg.scheme,
            cfg.n_d,
            order,
            mode,
            snr_db,
            snr_idx,
            start,
            min(WER_BATCH, cfg.max_trials - start),
            cfg.noiseless,
            cfg.seed,
        )
        for start in range(0, cfg.max_trials, WER_BATCH)
    ]
    trials = errs = e1s = e2s = 0

    def consume(result) -> bool:
        nonlocal trials, errs, e1s, e2s
        n, a, b, c = result
        trials += n
        errs += a
        e1s += b
        e2s += c
        return errs >= cfg.min_errors

    if cfg.workers > 1:
        it = iter(arg_list)
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            pending = deque(pool.submit(_wer_batch, a) for a in islice(it, 2 * cfg.workers))
            while pending:
                done = consume(pending.popleft().result())
                if done:
                    for fut in pending:
                        fut.cancel()
                    break
                for a in islice(it, 1):
                    pending.append(pool.submit(_wer_batch, a))
    else:
        for a in arg_list:
            if consume(_wer_batch(a)):
                break
    return trials, errs, e1s, e2s


def run_wer(cfg: ExperimentConfig) -> list[WerRecord]:
    """Simulate coded frames and count word errors per SNR point.

    A user's word is in error if any of its eight symbols is decoded wrong;
    the system word error counts frames with at least one user in error.
    Each point stops after the batch that reaches ``min_errors`` system
    errors, or at ``max_trials``.
    """
    if cfg.scheme not in SCHEMES:
        raise ConfigurationError(f"scheme: unknown value {cfg.scheme!r}")
    order = _wer_constellation_order(cfg)
    mode = _resolved_decoder_mode(cfg)
    records = []
    for snr_idx, snr_db in enumerate(cfg.snr_points()):
        trials, errs, e1s, e2s = _run_wer_point(cfg, order, mode, snr_idx, snr_db)
        records.append(
            WerRecord(
                snr_db=snr_db,
                trials=trials,
                word_errors_system=errs,
                word_errors_user1=e1s,
                word_errors_user2=e2s,
                decoder_mode=mode,
            )
        )
    return records


# ---------------------------------------------------------------------------
# Outage and DMT runs


def run_outage(cfg: ExperimentConfig) -> list[analysis.OutageRecord]:
    records = []
    for snr_idx, snr_db in enumerate(cfg.snr_points()):
        rng = np.random.default_rng(derive_trial_seed(cfg.seed, 0, snr_idx))
        records.append(
            analysis.outage_probability(
                cfg.scheme, cfg.n_d, cfg.per_user_rate(), snr_db, cfg.trials, rng
            )
        )
    return records


@dataclass(frozen=True)
class DmtRow:
    curve: str
    r: Fraction
    d: Fraction


DMT_CURVES = ("maf", "mar_upper", "mac", "ts", "ts_naf")


def run_dmt(cfg: ExperimentConfig) -> list[DmtRow]:
    """Evaluate the single-destination-antenna tradeoff family on a rational
    grid (hundredths) plus every exact breakpoint."""
    curves = {
        "maf": analysis.dmt_maf(),
        "mar_upper": analysis.dmt_mar_upper(1),
        "mac": analysis.dmt_mac(2, 1, 1),
        "ts": analysis.dmt_time_sharing(False, 1),
        "ts_naf": analysis.dmt_time_sharing(True, 1),
    }
    rows = []
    for name in DMT_CURVES:
        curve = curves[name]
        grid = {Fraction(k, 100) for k in range(101)}
        grid.update(r for r, _ in curve.breakpoints)
        for r in sorted(grid):
            rows.append(DmtRow(curve=name, r=r, d=curve.evaluate(r)))
    return rows


# ---------------------------------------------------------------------------
# Validation bundle


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _reference_codeword(s1, s2) -> np.ndarray:
    """Entrywise rebuild of the joint codeword, independent of the stbc module."""
    r5 = math.sqrt(5.0)
    th = (1.0 + r5) / 2.0
    tb = (1.0 - r5) / 2.0
    al = 1.0 + 1j - 1j * th
    ab = 1.0 + 1j - 1j * tb

    def xi(s, z):
        return (
            np.array(
                [
                    [
                        al * (s[0] + s[1] * z + s[2] * th + s[3] * z * th),
                        al * (s[4] + s[5] * z + s[6] * th + s[7] * z * th),
                    ],
                    [
                        z * ab * (s[4] + s[5] * z + s[6] * tb + s[7] * z * tb),
                        ab * (s[0] + s[1] * z + s[2] * tb + s[3] * z * tb),
                    ],
                ]
            )
            / r5
        )

    z8 = complex(math.sqrt(0.5), math.sqrt(0.5))
    gamma = np.array([[0.0, 1.0], [1j, 0.0]])
    m = np.zeros((4, 4), dtype=complex)
    m[0:2, 0:2] = xi(s1, z8)
    m[0:2, 2:4] = xi(s1, -z8)
    m[2:4, 0:2] = gamma @ xi(s2, z8)
    m[2:4, 2:4] = xi(s2, -z8)
    return m


def _check_dmt_exactness() -> CheckResult:
    maf = analysis.dmt_maf()
    mar = analysis.dmt_mar_upper(1)
    mac = analysis.dmt_mac(2, 1, 1)
    ok = (
        maf.evaluate(Fraction(0)) == 2
        and maf.evaluate(Fraction(2, 3)) == 1
        and maf.evaluate(Fraction(1)) == 0
        and mac.evaluate(Fraction(1, 3)) == Fraction(2, 3)
    )
    for k in range(101):
        r = Fraction(k, 100)
        want = 2 - r if r <= Fraction(1, 2) else 3 * (1 - r)
        ok = ok and mar.evaluate(r) == want
    detail = (
        f"d_maf(0)={maf.evaluate(Fraction(0))}, d_maf(2/3)={maf.evaluate(Fraction(2, 3))}, "
        f"d_maf(1)={maf.evaluate(Fraction(1))}, d_mar(1/2)={mar.evaluate(Fraction(1, 2))}, "
        f"d_mac(1/3)={mac.evaluate(Fraction(1, 3))}"
    )
    return CheckResult("dmt-exactness", bool(ok), detail)


def _check_mar_bound_collapse() -> CheckResult:
    mar = analysis.dmt_mar_upper(1)
    closed = analysis.DmtCurve(
        breakpoints=(
            (Fraction(0), Fraction(2)),
            (Fraction(1, 2), Fraction(3, 2)),
            (Fraction(1), Fraction(0)),
        )
    )
    mismatches = sum(
        mar.evaluate(Fraction(k, 100)) != closed.evaluate(Fraction(k, 100))
        for k in range(101)
    )
    return CheckResult(
        "mar-bound-collapse",
        mismatches == 0,
        f"{101 - mismatches}/101 grid points agree exactly",
    )


def _check_model_consistency(seed: int) -> CheckResult:
    const = make_constellation(4)
    worst_model = 0.0
    worst_lattice = 0.0
    worst_encoder = 0.0
    for n_d in (1, 2):
        rng = np.random.default_rng(derive_trial_seed(seed, n_d, 901))
        for _ in range(1000):
            re = channel.draw_channel(rng, n_d)
            p = channel.equal_power_profile(float(rng.uniform(1.0, 100.0)))
            idx = rng.integers(4, size=16)
            s = const.points[idx]
            cw = stbc.equivalent_codeword(s[:8], s[8:])
            worst_encoder = max(
                worst_encoder, float(np.abs(cw.m - _reference_codeword(s[:8], s[8:])).max())
            )
            fr = channel.transmit_frame(
                stbc.user_frame(cw, 1), stbc.user_frame(cw, 2), re, p, None, noiseless=True
            )
            eq = channel.equivalent_channel(re, p)
            recon = channel.FRAME_NORM * (eq.h_tilde_1 @ cw.m[0:2] + eq.h_tilde_2 @ cw.m[2:4])
            worst_model = max(worst_model, float(np.abs(fr.y_tilde - recon).max()))
            sys = channel.lattice_system(re, p, const)
            x = np.concatenate([const.re_coords[idx], const.im_coords[idx]])
            worst_lattice = max(
                worst_lattice,
                float(np.abs(sys.g @ x - channel.realify_received(fr.y_tilde)).max()),
            )
    ok = worst_model <= 1e-10 and worst_lattice <= 1e-10 and worst_encoder <= 1e-12
    detail = (
        f"direct vs equivalent max |diff| = {worst_model:.3e}, "
        f"lattice reconstruction max |diff| = {worst_lattice:.3e}, "
        f"encoder vs reference max |diff| = {worst_encoder:.3e}"
    )
    return CheckResult("model-consistency", bool(ok), detail)


def _check_isometry(seed: int) -> CheckResult:
    const = make_constellation(4)
    rng = np.random.default_rng(derive_trial_seed(seed, 0, 902))
    gamma_ref = np.array([[0.0, 1.0], [1j, 0.0]])
    worst = 0.0
    structure_ok = True
    for _ in range(10_000):
        s = const.points[rng.integers(4, size=16)]
        cw = stbc.equivalent_codeword(s[:8], s[8:])
        energy = float(np.sum(np.abs(cw.m) ** 2))
        target = 2.0 * float(np.sum(np.abs(s) ** 2))
        worst = max(worst, abs(energy - target) / target)
        if structure_ok:
            left = cw.m[2:4, 0:2]
            structure_ok = bool(
                np.allclose(left, gamma_ref @ stbc.golden_block(s[8:]), atol=1e-12)
            )
    ok = worst <= 1e-10 and structure_ok
    return CheckResult(
        "code-isometry",
        bool(ok),
        f"max relative energy error {worst:.3e} over 10^4 draws, twist structure ok={structure_ok}",
    )


def _check_decoder_oracle(seed: int) -> CheckResult:
    bpsk = make_constellation(2)
    qam = make_constellation(4)
    rng = np.random.default_rng(derive_trial_seed(seed, 0, 903))
    snr = 10.0
    agree = 0
    for _ in range(500):
        re = channel.draw_channel(rng, 2)
        p = channel.equal_power_profile(snr)
        idx = rng.integers(2, size=16)
        s = bpsk.points[idx]
        phi = stbc.generator_map().phi
        m = (phi @ s).reshape(4, 4, order="F")
        fr = channel.transmit_frame(
            np.concatenate([m[0], m[1]]), np.concatenate([m[2], m[3]]), re, p, rng
        )
        sys = channel.lattice_system(re, p, bpsk, fr.y_tilde)
        ml = decoder.exhaustive_ml(sys)
        sp = decoder.sphere_decode(sys)
        if np.array_equal(ml.x_hat, sp.x_hat) and math.isclose(
            ml.metric, sp.metric, rel_tol=1e-9, abs_tol=1e-12
        ):
            agree += 1

    recovered = 0
    rng2 = np.random.default_rng(derive_trial_seed(seed, 1, 903))
    for _ in range(1000):
        re = channel.draw_channel(rng2, 2)
        p = channel.equal_power_profile(snr)
        idx = rng2.integers(4, size=16)
        s = qam.points[idx]
        phi = stbc.generator_map().phi
        m = (phi @ s).reshape(4, 4, order="F")
        fr = channel.transmit_frame(
            np.concatenate([m[0], m[1]]),
            np.concatenate([m[2], m[3]]),
            re,
            p,
            None,
            noiseless=True,
        )
        sys = channel.lattice_system(re, p, qam, fr.y_tilde)
        res = decoder.sphere_decode(sys)
        x_true = np.concatenate([qam.re_coords[idx], qam.im_coords[idx]])
        recovered += bool(np.array_equal(res.x_hat, x_true))
    ok = agree == 500 and recovered == 1000
    return CheckResult(
        "decoder-oracle",
        bool(ok),
        f"sphere vs exhaustive agreement {agree}/500, noiseless recovery {recovered}/1000",
    )


def _check_lll_conditions(seed: int) -> CheckResult:
    rng = np.random.default_rng(derive_trial_seed(seed, 0, 904))
    delta = 0.75
    worst_mu = 0.0
    lovasz_ok = True
    for _ in range(100):
        n = int(rng.integers(2, 7))
        basis = rng.normal(size=(n + int(rng.integers(0, 3)), n))
        red, t = decoder.lll_reduce(basis, delta)
        q, r = np.linalg.qr(red)
        norms = np.abs(np.diag(r)) ** 2
        mu = np.zeros((n, n))
        for k in range(n):
            for j in range(k):
                mu[k, j] = (red[:, k] @ red[:, j] - mu[k, :j] @ (mu[j, :j] * norms[:j])) / norms[j]
            worst_mu = max(worst_mu, float(np.abs(mu[k, :k]).max(initial=0.0)))
        for k in range(1, n):
            if norms[k] < (delta - mu[k, k - 1] ** 2) * norms[k - 1] - 1e-9:
                lovasz_ok = False
    ok = worst_mu <= 0.5 + 1e-9 and lovasz_ok
    return CheckResult(
        "lll-conditions",
        bool(ok),
        f"max |mu| = {worst_mu:.6f}, Lovasz condition ok={lovasz_ok} over 100 bases",
    )


def run_validate(cfg: ExperimentConfig) -> ValidationReport:
    """Run the cross-module oracle suite; all checks must pass on a fresh build."""
    checks = (
        _check_dmt_exactness(),
        _check_mar_bound_collapse(),
        _check_model_consistency(cfg.seed),
        _check_isometry(cfg.seed),
        _check_decoder_oracle(cfg.seed),
        _check_lll_conditions(cfg.seed),
    )
    return ValidationReport(checks=checks)
