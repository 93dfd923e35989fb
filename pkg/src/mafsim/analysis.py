"""Diversity-multiplexing tradeoff curves, mutual information, and outage Monte Carlo.

DMT curves are piecewise-linear with exact rational breakpoints; every
evaluation at a Fraction argument is exact, so formula identities (such as
the min-cut bound collapsing to its single-antenna form) can be checked
without tolerances.

Outage probabilities are estimated by vectorized Monte Carlo over channel
draws: a user is in outage when its individual mutual information falls
below the per-user rate, or when the sum information falls below the sum
rate.  Trials are processed in fixed-size batches with independently
spawned generators, so estimates do not depend on how batches are scheduled.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .channel import EquivalentChannel
from .errors import ConfigurationError

OUTAGE_SCHEMES = ("maf", "mac", "ts", "ts-naf")
_BATCH = 1 << 14


# ---------------------------------------------------------------------------
# DMT curves


@dataclass(frozen=True)
class DmtCurve:
    """Piecewise-linear diversity d(r) joining exact rational breakpoints."""

    breakpoints: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self):
        rs = [r for r, _ in self.breakpoints]
        ds = [d for _, d in self.breakpoints]
        if any(b <= a for a, b in zip(rs, rs[1:])):
            raise ValueError("breakpoint multiplexing gains must strictly increase")
        if any(b > a for a, b in zip(ds, ds[1:])):
            raise ValueError("diversity must be non-increasing")
        if ds and ds[-1] < 0:
            raise ValueError("diversity must stay nonnegative")

    def evaluate(self, r):
        """d(r); exact Fraction for Fraction input, float otherwise."""
        exact = isinstance(r, Fraction) or isinstance(r, int)
        rq = Fraction(r) if exact else Fraction(float(r))
        if rq < 0:
            raise ValueError(f"multiplexing gain must be nonnegative, got {r}")
        pts = self.breakpoints
        if rq >= pts[-1][0]:
            val = pts[-1][1] if rq == pts[-1][0] else Fraction(0)
        elif rq <= pts[0][0]:
            val = pts[0][1]
        else:
            i = bisect_right([p[0] for p in pts], rq) - 1
            (r0, d0), (r1, d1) = pts[i], pts[i + 1]
            val = d0 + (d1 - d0) * (rq - r0) / (r1 - r0)
        return val if exact else float(val)


def _simplify(points: list[tuple[Fraction, Fraction]]) -> DmtCurve:
    """Drop duplicate and collinear interior breakpoints."""
    pts: list[tuple[Fraction, Fraction]] = []
    for p in sorted(set(points)):
        if pts and p[0] == pts[-1][0]:
            if p[1] != pts[-1][1]:
                raise ValueError(f"conflicting breakpoint values at r={p[0]}")
            continue
        pts.append(p)
    out = [pts[0]]
    for i in range(1, len(pts) - 1):
        (r0, d0), (r1, d1), (r2, d2) = out[-1], pts[i], pts[i + 1]
        if (d1 - d0) * (r2 - r1) != (d2 - d1) * (r1 - r0):
            out.append(pts[i])
    if len(pts) > 1:
        out.append(pts[-1])
    return DmtCurve(breakpoints=tuple(out))


def dmt_point_to_point(n_t: int, n_r: int) -> DmtCurve:
    """Rayleigh point-to-point tradeoff: line segments through
    (k, (n_r-k)(n_t-k)) for integer k."""
    if n_t < 1 or n_r < 1:
        raise ValueError("antenna counts must be at least 1")
    pts = [
        (Fraction(k), Fraction((n_r - k) * (n_t - k)))
        for k in range(min(n_t, n_r) + 1)
    ]
    return _simplify(pts)


def _compressed(curve: DmtCurve, factor: Fraction) -> DmtCurve:
    """Curve evaluated at factor*r, i.e. breakpoints moved to r/factor."""
    return _simplify([(r / factor, d) for r, d in curve.breakpoints])


def _pointwise_min(curves: list[DmtCurve]) -> DmtCurve:
    """Exact pointwise minimum of piecewise-linear curves (domain up to the
    largest r where some curve is still positive; beyond that all are 0)."""
    grid = {r for c in curves for r, _ in c.breakpoints}
    r_max = max(grid)
    grid.add(Fraction(0))
    base = sorted(g for g in grid if g <= r_max)
    # add pairwise crossings inside each base interval
    refined = set(base)
    for lo, hi in zip(base, base[1:]):
        vals_lo = [c.evaluate(lo) for c in curves]
        vals_hi = [c.evaluate(hi) for c in curves]
        for i in range(len(curves)):
            for j in range(i + 1, len(curves)):
                a0, b0 = vals_lo[i], vals_lo[j]
                a1, b1 = vals_hi[i], vals_hi[j]
                denom = (a1 - a0) - (b1 - b0)
                if denom != 0:
                    t = (b0 - a0) / denom
                    if 0 < t < 1:
                        refined.add(lo + t * (hi - lo))
    pts = [(r, min(c.evaluate(r) for c in curves)) for r in sorted(refined)]
    # truncate once the minimum reaches zero
    out = []
    for r, d in pts:
        out.append((r, d))
        if d == 0:
            break
    return _simplify(out)


def dmt_mac(K: int, n_t: int, n_r: int) -> DmtCurve:
    """Symmetric multiple-access tradeoff: single-user behavior up to the
    threshold min(n_t, n_r/(K+1)), the K-fold antenna-pooled curve at K r
    beyond it."""
    if K < 1:
        raise ValueError("K must be at least 1")
    single = dmt_point_to_point(n_t, n_r)
    pooled = _compressed(dmt_point_to_point(K * n_t, n_r), Fraction(K))
    threshold = min(Fraction(n_t), Fraction(n_r, K + 1))
    v_lo = single.evaluate(threshold)
    v_hi = pooled.evaluate(threshold)
    if v_lo != v_hi:
        raise ValueError(
            f"branches disagree at the stitching point r={threshold}: {v_lo} vs {v_hi}"
        )
    pts = [(r, d) for r, d in single.breakpoints if r < threshold]
    pts.append((threshold, v_lo))
    pts.extend((r, d) for r, d in pooled.breakpoints if r > threshold)
    return _simplify(pts)


def dmt_mar_upper(n_r: int) -> DmtCurve:
    """Min-cut upper bound for the two-user single-relay network with n_r
    destination antennas: the minimum of the four cut curves."""
    curves = [
        dmt_point_to_point(3, n_r),
        dmt_point_to_point(2, n_r + 1),
        _compressed(dmt_point_to_point(2, n_r), Fraction(1, 2)),
        _compressed(dmt_point_to_point(1, n_r + 1), Fraction(1, 2)),
    ]
    return _pointwise_min(curves)


def dmt_maf() -> DmtCurve:
    """Tradeoff achieved by the two-user amplify-and-forward protocol."""
    return DmtCurve(
        breakpoints=(
            (Fraction(0), Fraction(2)),
            (Fraction(2, 3), Fraction(1)),
            (Fraction(1), Fraction(0)),
        )
    )


def dmt_time_sharing(cooperative: bool, n_d: int) -> DmtCurve:
    """Orthogonal-access baselines, each user active half the time (so the
    underlying curve is evaluated at 2r).

    Non-cooperative time sharing is a point-to-point link; the cooperative
    variant is the single-user non-orthogonal amplify-and-forward curve,
    only available here for a single destination antenna.
    """
    if n_d < 1:
        raise ValueError("n_d must be at least 1")
    if not cooperative:
        return _compressed(dmt_point_to_point(1, n_d), Fraction(2))
    if n_d != 1:
        raise ConfigurationError(
            "cooperative time-sharing tradeoff is only defined for n_d=1"
        )
    # (1-2r) + max(0, 1-4r) on [0, 1/2]
    return DmtCurve(
        breakpoints=(
            (Fraction(0), Fraction(2)),
            (Fraction(1, 4), Fraction(1, 2)),
            (Fraction(1, 2), Fraction(0)),
        )
    )


# ---------------------------------------------------------------------------
# Mutual information and outage


def mutual_information(eq: EquivalentChannel) -> tuple[float, float, float]:
    """Gaussian-input rates of the equivalent two-slot model, in bits per
    channel use of the physical channel (hence the factor 1/2: each virtual
    matrix spans two channel uses; power already sits inside the matrices)."""
    h1, h2 = eq.h_tilde_1, eq.h_tilde_2
    eye = np.eye(h1.shape[0])
    g1 = h1 @ h1.conj().T
    g2 = h2 @ h2.conj().T
    i1 = 0.5 * np.linalg.slogdet(eye + g1)[1] / math.log(2.0)
    i2 = 0.5 * np.linalg.slogdet(eye + g2)[1] / math.log(2.0)
    i_sum = 0.5 * np.linalg.slogdet(eye + g1 + g2)[1] / math.log(2.0)
    return float(i1), float(i2), float(i_sum)


@dataclass(frozen=True)
class OutageRecord:
    snr_db: float
    rate_bpcu: float
    trials: int
    outage_events: int
    breakdown: dict

    @property
    def p_out(self) -> float:
        return self.outage_events / self.trials

    @property
    def stderr(self) -> float:
        p = self.p_out
        return math.sqrt(p * (1.0 - p) / self.trials)


def assemble_user_matrices(h1d, h2d, h1r, h2r, hrd, p11, p12, p21, p22, pr):
    """Vectorized virtual-matrix assembly for stacked channel draws.

    Inputs are arrays over trials (vectors of per-trial coefficients);
    returns both users' matrices with shape (trials, 2 n_d, 2).  The
    whitener of ``I + c v v^H`` is applied in closed form:
    ``I + ((1 + c |v|^2)^(-1/2) - 1) v v^H / |v|^2``.
    """
    count, n_d = h1d.shape
    b = 1.0 / np.sqrt(1.0 + p11 * np.abs(h1r) ** 2 + p21 * np.abs(h2r) ** 2)
    c = pr * b**2
    v_norm2 = np.sum(np.abs(hrd) ** 2, axis=1)
    shrink = 1.0 / np.sqrt(1.0 + c * v_norm2)
    coef = np.where(v_norm2 > 0, (shrink - 1.0) / np.where(v_norm2 > 0, v_norm2, 1.0), 0.0)
    omega = np.tile(np.eye(n_d, dtype=complex), (count, 1, 1))
    omega += coef[:, None, None] * (hrd[:, :, None] * hrd.conj()[:, None, :])

    def assemble(hid, hir, pi1, pi2):
        h = np.zeros((count, 2 * n_d, 2), dtype=complex)
        h[:, :n_d, 0] = math.sqrt(pi1) * hid
        echo = (omega @ hrd[:, :, None])[:, :, 0]
        h[:, n_d:, 0] = math.sqrt(pr * pi1) * (b * hir)[:, None] * echo
        h[:, n_d:, 1] = math.sqrt(pi2) * (omega @ hid[:, :, None])[:, :, 0]
        return h

    return assemble(h1d, h1r, p11, p12), assemble(h2d, h2r, p21, p22)


def _batched_user_matrices(rng, count, n_d, p11, p12, p21, p22, pr):
    """Draw ``count`` channel realizations and assemble both users' virtual
    matrices, shape (count, 2 n_d, 2)."""
    def crandn(shape):
        return math.sqrt(0.5) * (
            rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        )

    h1d = crandn((count, n_d))
    h2d = crandn((count, n_d))
    h1r = crandn(count)
    h2r = crandn(count)
    hrd = crandn((count, n_d))
    return assemble_user_matrices(h1d, h2d, h1r, h2r, hrd, p11, p12, p21, p22, pr)


def _batch_rates(h: np.ndarray) -> np.ndarray:
    eye = np.eye(h.shape[1])
    gram = h @ np.conj(np.swapaxes(h, 1, 2))
    return 0.5 * np.linalg.slogdet(eye + gram)[1] / math.log(2.0)


def _sum_rates(h1: np.ndarray, h2: np.ndarray) -> np.ndarray:
    eye = np.eye(h1.shape[1])
    gram = h1 @ np.conj(np.swapaxes(h1, 1, 2)) + h2 @ np.conj(np.swapaxes(h2, 1, 2))
    return 0.5 * np.linalg.slogdet(eye + gram)[1] / math.log(2.0)


def outage_probability(
    scheme: str,
    n_d: int,
    rate_bpcu: float,
    snr_db: float,
    trials: int,
    rng: np.random.Generator | int,
) -> OutageRecord:
    """Monte Carlo outage estimate at one SNR point.

    For the multi-access schemes the outage event is the union of both
    individual-rate events and the sum-rate event; the time-sharing schemes
    run a single user at twice the per-user rate (it owns only half the
    frames).  ``mac`` and ``ts`` force the relay power to zero.
    """
    if scheme not in OUTAGE_SCHEMES:
        raise ConfigurationError(
            f"unknown scheme {scheme!r}; choose from {OUTAGE_SCHEMES}"
        )
    if trials < 1:
        raise ConfigurationError("trials must be at least 1")
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(int(rng))
    snr = 10.0 ** (snr_db / 10.0)
    pi = 0.4 * snr
    pr = 0.0 if scheme in ("mac", "ts") else pi
    single_user = scheme in ("ts", "ts-naf")

    n_batches = (trials + _BATCH - 1) // _BATCH
    streams = rng.spawn(n_batches)
    events = 0
    n_u1 = n_u2 = n_sum = 0
    done = 0
    for stream in streams:
        count = min(_BATCH, trials - done)
        done += count
        if single_user:
            h1, _ = _batched_user_matrices(stream, count, n_d, pi, pi, 0.0, 0.0, pr)
            out = _batch_rates(h1) < 2.0 * rate_bpcu
            events += int(np.count_nonzero(out))
            n_u1 += int(np.count_nonzero(out))
        else:
            h1, h2 = _batched_user_matrices(stream, count, n_d, pi, pi, pi, pi, pr)
            o1 = _batch_rates(h1) < rate_bpcu
            o2 = _batch_rates(h2) < rate_bpcu
            os = _sum_rates(h1, h2) < 2.0 * rate_bpcu
            events += int(np.count_nonzero(o1 | o2 | os))
            n_u1 += int(np.count_nonzero(o1))
            n_u2 += int(np.count_nonzero(o2))
            n_sum += int(np.count_nonzero(os))
    return OutageRecord(
        snr_db=float(snr_db),
        rate_bpcu=float(rate_bpcu),
        trials=trials,
        outage_events=events,
        breakdown={"user1": n_u1, "user2": n_u2, "sum": n_sum},
    )


def diversity_slope(points) -> float:
    """Least-squares diversity order from (snr_db, probability) samples.

    Accepts OutageRecord-like objects (``snr_db``/``p_out``), WER-record-like
    objects (``snr_db``/``wer_system``), or plain (snr_db, p) pairs.
    """
    xs, ps = [], []
    for item in points:
        if hasattr(item, "p_out"):
            xs.append(item.snr_db)
            ps.append(item.p_out)
        elif hasattr(item, "wer_system"):
            xs.append(item.snr_db)
            ps.append(item.wer_system)
        else:
            x, p = item
            xs.append(x)
            ps.append(p)
    if len(xs) < 2:
        raise ValueError("at least two points are required for a slope")
    if any(p <= 0 for p in ps):
        raise ValueError("all probability estimates must be positive")
    x = np.asarray(xs, dtype=float) / 10.0
    y = np.log10(np.asarray(ps, dtype=float))
    slope = np.polyfit(x, y, 1)[0]
    return float(-slope)
