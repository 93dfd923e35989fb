"""Integer least-squares decoders for real-valued lattice systems.

A :class:`LatticeSystem` is a real linear model ``y = G x + noise`` whose
unknowns are integer grid coordinates, one finite alphabet per coordinate.
Four decoding routes are provided:

* :func:`exhaustive_ml` enumerates every candidate; it is the oracle the
  other decoders are validated against and is guarded by a search-space cap.
* :func:`sphere_decode` is depth-first Schnorr-Euchner enumeration with a
  radius that starts at infinity and shrinks at every leaf; it returns the
  exact maximum-likelihood point whenever ``G`` has full column rank.
* :func:`mmse_dfe_preprocess` regularizes a (possibly rank-deficient) system
  by stacking ``G`` over a diagonal noise-to-signal matrix; minimizing the
  augmented residual is the MMSE metric and the augmented matrix always has
  full column rank.
* :func:`decode` dispatches: sphere on full-rank systems, otherwise
  MMSE-DFE preprocessing followed by lattice decoding (sorted QR, LLL right
  reduction with a Babai initial point, then radius-capped finite-alphabet
  enumeration, which is exhaustive whenever it fits the node budget).

Everything here is deterministic: ties are broken toward the
lexicographically smallest coordinate vector.
"""

from __future__ import annotations

import math
from functools import lru_cache
from bisect import bisect_left
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError, RankDeficiencyError, SearchSpaceError

EXHAUSTIVE_GUARD = 1 << 20
_CHUNK = 1 << 14


@dataclass(frozen=True)
class LatticeSystem:
    """Real system y ~ G x with per-coordinate integer alphabets.

    ``scale`` maps integer coordinates back to unit-energy constellation
    symbols (symbol = scale * (re + 1j im)); it is carried along so callers
    can reconstruct symbols from a decoded coordinate vector.
    """

    g: np.ndarray
    y: np.ndarray
    coord_sets: tuple[tuple[int, ...], ...]
    scale: float

    @property
    def n(self) -> int:
        return self.g.shape[1]

    @property
    def m(self) -> int:
        return self.g.shape[0]

    def with_y(self, y) -> "LatticeSystem":
        return replace(self, y=np.asarray(y, dtype=float))


@dataclass(frozen=True)
class DecodeResult:
    x_hat: np.ndarray
    metric: float
    nodes_visited: int
    method: str


def _check_system(sys: LatticeSystem) -> None:
    if sys.g.ndim != 2 or sys.y.shape != (sys.m,):
        raise ValueError("inconsistent system dimensions")
    if len(sys.coord_sets) != sys.n:
        raise ValueError("one alphabet per coordinate is required")
    if any(len(s) == 0 for s in sys.coord_sets):
        raise ValueError("empty coordinate alphabet")


def _candidate_block(coord_sets, start: int, stop: int) -> np.ndarray:
    """Candidates number ``start..stop-1`` in lexicographic order."""
    n = len(coord_sets)
    sizes = [len(s) for s in coord_sets]
    suffix = [1] * n
    for i in range(n - 2, -1, -1):
        suffix[i] = suffix[i + 1] * sizes[i + 1]
    idx = np.arange(start, stop)
    out = np.empty((stop - start, n), dtype=np.int64)
    for i, s in enumerate(coord_sets):
        out[:, i] = np.asarray(s, dtype=np.int64)[(idx // suffix[i]) % sizes[i]]
    return out


_CACHE_LIMIT = 1 << 17


@lru_cache(maxsize=4)
def _cached_candidates(coord_sets) -> np.ndarray:
    total = math.prod(len(s) for s in coord_sets)
    cand = _candidate_block(coord_sets, 0, total).astype(float)
    cand.setflags(write=False)
    return cand


def exhaustive_ml(sys: LatticeSystem) -> DecodeResult:
    """Globally minimal metric by full enumeration; ties go to the
    lexicographically smallest candidate."""
    _check_system(sys)
    total = math.prod(len(s) for s in sys.coord_sets)
    if total > EXHAUSTIVE_GUARD:
        raise SearchSpaceError(
            f"{total} candidates exceed the exhaustive guard of {EXHAUSTIVE_GUARD}"
        )
    # fixed coordinates contribute a constant: fold them and enumerate the rest
    active = [i for i, s in enumerate(sys.coord_sets) if len(s) > 1]
    base = np.array([s[0] for s in sys.coord_sets], dtype=np.int64)
    y_eff = sys.y - sys.g @ np.where(
        np.array([len(s) == 1 for s in sys.coord_sets]), base, 0
    )
    if not active:
        res = sys.y - sys.g @ base
        base.setflags(write=False)
        return DecodeResult(base, float(res @ res), 1, method="ml")
    sets_act = tuple(tuple(sorted(sys.coord_sets[i])) for i in active)
    gt = sys.g[:, active].T

    best_metric = math.inf
    best_x = None
    if total <= _CACHE_LIMIT:
        chunks = [_cached_candidates(sets_act)]
    else:
        chunks = (
            _candidate_block(sets_act, start, min(start + _CHUNK, total))
            for start in range(0, total, _CHUNK)
        )
    for cand in chunks:
        diff = y_eff[None, :] - cand @ gt
        metrics = np.einsum("ij,ij->i", diff, diff)
        k = int(np.argmin(metrics))
        if metrics[k] < best_metric:
            best_metric = float(metrics[k])
            best_x = cand[k]
    x = base.copy()
    x[active] = np.asarray(best_x, dtype=np.int64)
    res = sys.y - sys.g @ x
    x.setflags(write=False)
    return DecodeResult(
        x_hat=x, metric=float(res @ res), nodes_visited=total, method="ml"
    )


def _qr_positive(g: np.ndarray):
    """Reduced QR with a nonnegative diagonal on R."""
    q, r = np.linalg.qr(g)
    flip = np.sign(np.diag(r))
    flip[flip == 0] = 1.0
    return q * flip[None, :], r * flip[:, None]


def has_full_column_rank(g: np.ndarray, rtol: float = 1e-9) -> bool:
    m, n = g.shape
    if m < n:
        return False
    d = np.abs(np.diag(np.linalg.qr(g, mode="r")))
    return bool(d.min() > rtol * max(d.max(), 1e-300))


class _FiniteLevel:
    """Yields one level's alphabet in nondecreasing distance from a center,
    smaller value first on ties."""

    __slots__ = ("alpha", "size", "center", "lo", "hi")

    def __init__(self, alpha):
        self.alpha = alpha
        self.size = len(alpha)
        self.center = 0.0
        self.lo = 0
        self.hi = 0

    def reset(self, center: float) -> None:
        self.center = center
        pos = bisect_left(self.alpha, center)
        self.lo = pos - 1
        self.hi = pos

    def next(self):
        lo, hi, alpha = self.lo, self.hi, self.alpha
        if lo < 0:
            if hi >= self.size:
                return None
            self.hi = hi + 1
            return alpha[hi]
        if hi >= self.size:
            self.lo = lo - 1
            return alpha[lo]
        if self.center - alpha[lo] <= alpha[hi] - self.center:
            self.lo = lo - 1
            return alpha[lo]
        self.hi = hi + 1
        return alpha[hi]


def _enumerate_finite(r_mat, z, coord_sets, init_x=None, initial_radius=None, max_nodes=None):
    """Schnorr-Euchner search of ``min ||z - R x||^2`` over alphabet products.

    ``r_mat`` must be upper triangular with positive diagonal.  ``init_x``
    optionally seeds the search radius with a known feasible point;
    ``initial_radius`` caps the radius regardless (if no point lies inside,
    the result is ``None``).  When ``max_nodes`` is hit the best point so
    far is returned; otherwise the search is exhaustive within the radius.
    Returns (best x as list or None, best squared distance, nodes visited,
    completed flag).
    """
    n = len(coord_sets)
    rows = [[float(v) for v in row] for row in np.asarray(r_mat)]
    z = [float(v) for v in np.asarray(z)]
    levels = [_FiniteLevel(sorted(int(v) for v in s)) for s in coord_sets]

    best_x = None
    best = math.inf
    if init_x is not None:
        best_x = [int(v) for v in init_x]
        best = 0.0
        for i in range(n - 1, -1, -1):
            acc = z[i]
            ri = rows[i]
            for j in range(i, n):
                acc -= ri[j] * best_x[j]
            best += acc * acc
    if initial_radius is not None and best > initial_radius:
        best = float(initial_radius)
        best_x = None

    x = [0] * n
    pd = [0.0] * n            # distance accumulated above each level
    resid = [None] * n        # resid[k][j], j <= k: target minus levels above k
    nodes = 0

    k = n - 1
    resid[k] = z[:]
    levels[k].reset(resid[k][k] / rows[k][k])
    while True:
        v = levels[k].next()
        climb = v is None
        if not climb:
            nodes += 1
            e = resid[k][k] - rows[k][k] * v
            d = pd[k] + e * e
            if d > best:
                climb = True      # siblings are ordered, so the level is done
            elif k == 0:
                x[0] = v
                if d < best or (d == best and (best_x is None or x < best_x)):
                    best = d
                    best_x = x.copy()
            else:
                x[k] = v
                pd[k - 1] = d
                rk = resid[k]
                resid[k - 1] = [rk[j] - v * rows[j][k] for j in range(k)]
                k -= 1
                levels[k].reset(resid[k][k] / rows[k][k])
            if max_nodes is not None and nodes >= max_nodes:
                return best_x, best, nodes, False
        if climb:
            k += 1
            if k == n:
                return best_x, best, nodes, True


def _babai_nearest_plane(r_mat, z) -> list[int]:
    """Round level by level on an upper-triangular basis (no enumeration)."""
    n = len(z)
    r = np.asarray(r_mat, dtype=float)
    z = np.asarray(z, dtype=float)
    v = np.zeros(n)
    for k in range(n - 1, -1, -1):
        acc = z[k] - r[k, k + 1 :] @ v[k + 1 :]
        v[k] = round(acc / r[k, k])
    return [int(t) for t in v]


def _sorted_qr(g: np.ndarray):
    """QR with greedy column sorting, weakest residual first.

    Orders columns so the strongest ones sit at the bottom of the search
    tree (decided first), which sharpens sphere pruning.  Returns
    (q, r, perm) with ``g[:, perm] = q r``.
    """
    v = np.array(g, dtype=float)
    m, n = v.shape
    q = np.zeros((m, n))
    r = np.zeros((n, n))
    perm = np.arange(n)
    norms = np.einsum("ij,ij->j", v, v)
    for i in range(n):
        j = i + int(np.argmin(norms[i:]))
        if j != i:
            v[:, [i, j]] = v[:, [j, i]]
            r[:, [i, j]] = r[:, [j, i]]
            norms[[i, j]] = norms[[j, i]]
            perm[[i, j]] = perm[[j, i]]
        r[i, i] = math.sqrt(max(norms[i], 0.0))
        if r[i, i] == 0.0:
            raise RankDeficiencyError("sorted QR hit a dependent column")
        q[:, i] = v[:, i] / r[i, i]
        if i + 1 < n:
            r[i, i + 1 :] = q[:, i] @ v[:, i + 1 :]
            v[:, i + 1 :] -= np.outer(q[:, i], r[i, i + 1 :])
            # smallest-first pivoting cancels badly; recompute residual norms
            norms[i + 1 :] = np.einsum("ij,ij->j", v[:, i + 1 :], v[:, i + 1 :])
    return q, r, perm


def sphere_decode(sys: LatticeSystem) -> DecodeResult:
    """Exact ML by sphere decoding; requires full column rank."""
    _check_system(sys)
    if not has_full_column_rank(sys.g):
        raise RankDeficiencyError(
            "G does not have full column rank; run mmse_dfe_preprocess first "
            "or decode with mode='mmse_dfe_lattice'"
        )
    q, r = _qr_positive(sys.g)
    z = q.T @ sys.y
    x, _, nodes, _ = _enumerate_finite(r, z, sys.coord_sets)
    x = np.array(x, dtype=np.int64)
    res = sys.y - sys.g @ x
    x.setflags(write=False)
    return DecodeResult(
        x_hat=x, metric=float(res @ res), nodes_visited=nodes, method="sphere"
    )


def mmse_dfe_preprocess(sys: LatticeSystem, snr: float) -> LatticeSystem:
    """Augment the system so the residual is the MMSE-regularized metric.

    Stacks ``G`` over a diagonal regularizer and zero-pads ``y``, giving a
    full-column-rank system whose residual is ``||y - G x||^2 + sum_i
    lambda_i^2 x_i^2``.  Each ``lambda_i`` is the per-real-dimension
    noise-to-signal ratio of coordinate i: noise variance 1/2 (unit-variance
    complex noise) over the alphabet's mean square.  ``G`` already carries
    the link gains, so relative to the data term the regularization falls
    off as the SNR grows and the minimizer converges to maximum likelihood;
    for constant-modulus alphabets the penalty is the same for every
    candidate and the minimizer is exactly the ML point.
    """
    _check_system(sys)
    if snr <= 0:
        raise ConfigurationError(f"snr must be positive, got {snr}")
    n = sys.n
    sigma_sq = np.array(
        [np.mean(np.square(np.asarray(s, dtype=float))) for s in sys.coord_sets]
    )
    lam = np.sqrt(0.5 / np.where(sigma_sq > 0, sigma_sq, 1.0))
    g_aug = np.vstack([sys.g, np.diag(lam)])
    y_aug = np.concatenate([sys.y, np.zeros(n)])
    return LatticeSystem(g=g_aug, y=y_aug, coord_sets=sys.coord_sets, scale=sys.scale)


def lll_reduce(basis, delta: float = 0.75):
    """LLL reduction of the columns of ``basis``.

    Returns ``(reduced, t)`` with ``reduced = basis @ t`` and ``t`` integer
    unimodular.  Gram-Schmidt data is tracked incrementally, so only the
    initial orthogonalization costs O(n^2) vector work.
    """
    if not 0.25 < delta <= 1.0:
        raise ValueError(f"delta must lie in (1/4, 1], got {delta}")
    b = np.array(basis, dtype=float)
    if b.ndim != 2:
        raise ValueError("basis must be a matrix")
    m, n = b.shape
    if not has_full_column_rank(b):
        raise ValueError("rank-deficient basis cannot be LLL reduced")
    t = np.eye(n, dtype=np.int64)

    gram = b.T @ b
    mu = np.zeros((n, n))
    norms = np.zeros(n)
    for j in range(n):
        norms[j] = gram[j, j] - (mu[j, :j] ** 2) @ norms[:j]
        if j + 1 < n:
            mu[j + 1 :, j] = (
                gram[j + 1 :, j] - mu[j + 1 :, :j] @ (mu[j, :j] * norms[:j])
            ) / norms[j]

    def size_reduce(k, j):
        q = round(mu[k, j])
        if q:
            b[:, k] -= q * b[:, j]
            t[:, k] -= q * t[:, j]
            mu[k, :j] -= q * mu[j, :j]
            mu[k, j] -= q

    k = 1
    guard = 0
    while k < n:
        guard += 1
        if guard > 100000 * n:
            raise RuntimeError("LLL failed to converge")
        for j in range(k - 1, -1, -1):
            size_reduce(k, j)
        if norms[k] >= (delta - mu[k, k - 1] ** 2) * norms[k - 1]:
            k += 1
            continue
        # swap columns k-1 and k, patching the Gram-Schmidt data in place
        b[:, [k - 1, k]] = b[:, [k, k - 1]]
        t[:, [k - 1, k]] = t[:, [k, k - 1]]
        nu = mu[k, k - 1]
        big = norms[k] + nu * nu * norms[k - 1]
        mu_new = nu * norms[k - 1] / big
        norms[k] = norms[k - 1] * norms[k] / big
        norms[k - 1] = big
        mu[[k - 1, k], : k - 1] = mu[[k, k - 1], : k - 1]
        mu[k, k - 1] = mu_new
        if k + 1 < n:
            col_k = mu[k + 1 :, k].copy()
            mu[k + 1 :, k] = mu[k + 1 :, k - 1] - nu * col_k
            mu[k + 1 :, k - 1] = col_k + mu_new * mu[k + 1 :, k]
        k = max(k - 1, 1)
    return b, t


def _arithmetic_stride(alpha) -> int | None:
    """Common difference of a sorted alphabet, or None if not arithmetic."""
    if len(alpha) == 1:
        return 1
    d = alpha[1] - alpha[0]
    if d <= 0 or any(alpha[i + 1] - alpha[i] != d for i in range(len(alpha) - 1)):
        return None
    return d


DEFAULT_MMSE_NODE_BUDGET = 65_536
MMSE_RADIUS_FACTOR = 3.0


def _decode_mmse(sys: LatticeSystem, snr: float, max_nodes: int | None) -> DecodeResult:
    """MMSE-DFE preprocessing plus lattice decoding.

    Pipeline: augment (regularize), sorted QR so reliable coordinates are
    decided first, LLL right-reduce the triangular factor and take the Babai
    nearest-plane point (clamped to the alphabet) as the initial candidate,
    then refine by finite-alphabet Schnorr-Euchner enumeration.  The search
    radius starts at the tighter of the candidate's metric and a multiple
    of the expected metric (noise energy plus the regularizer mean), which
    keeps bad fades from dragging the search through high-metric regions.
    If nothing lies inside the capped radius the search reruns uncapped, so
    small systems always yield the exact minimizer of the regularized
    metric; ``max_nodes`` bounds each enumeration pass.
    """
    aug = mmse_dfe_preprocess(sys, snr)
    sets = [sorted(int(v) for v in s) for s in aug.coord_sets]
    active = [i for i, s in enumerate(sets) if len(s) > 1]
    fixed_x = np.array([s[0] for s in sets], dtype=np.int64)

    y_eff = aug.y - aug.g @ (fixed_x * np.array([len(s) == 1 for s in sets]))
    if not active:
        res = aug.y - aug.g @ fixed_x
        fixed_x.setflags(write=False)
        return DecodeResult(fixed_x, float(res @ res), 0, "mmse_dfe_lattice")
    g_act = aug.g[:, active]

    q0, r0, perm = _sorted_qr(g_act)
    z0 = q0.T @ y_eff
    sets_perm = [sets[active[j]] for j in perm]
    sizes = np.array([len(s) for s in sets_perm])
    nodes = 0

    init = None
    strides = [_arithmetic_stride(s) for s in sets_perm]
    if all(d is not None for d in strides):
        offs = np.array([s[0] for s in sets_perm], dtype=float)
        dvec = np.array(strides, dtype=float)
        r_red, t = lll_reduce(r0 * dvec[None, :])
        q2, r2 = _qr_positive(r_red)
        v = _babai_nearest_plane(r2, q2.T @ (z0 - r0 @ offs))
        u = np.clip(t @ np.array(v, dtype=np.int64), 0, sizes - 1)
        init = [s[int(ui)] for s, ui in zip(sets_perm, u)]

    # expected metric: physical noise energy (var 1/2 per real row) plus the
    # regularizer's mean contribution (1/2 per active coordinate, matched)
    m_phys = sys.m
    const_part = max(float(y_eff @ y_eff - z0 @ z0), 0.0)
    radius = MMSE_RADIUS_FACTOR * 0.5 * (m_phys + len(active)) - const_part

    x_perm = None
    need_uncapped = True
    if radius > 0:
        x_perm, _, used, complete = _enumerate_finite(
            r0, z0, sets_perm, init_x=init, initial_radius=radius, max_nodes=max_nodes
        )
        nodes += used
        # rerun uncapped only if the ball was exhausted and provably empty
        need_uncapped = complete and x_perm is None
    if need_uncapped:
        x_perm, _, used, _ = _enumerate_finite(
            r0, z0, sets_perm, init_x=init, max_nodes=max_nodes
        )
        nodes += used
    if x_perm is None:
        x_perm = init if init is not None else [s[0] for s in sets_perm]

    x_full = fixed_x.copy()
    for j, pos in enumerate(perm):
        x_full[active[pos]] = x_perm[j]
    res = aug.y - aug.g @ x_full
    x_full.setflags(write=False)
    return DecodeResult(
        x_hat=x_full,
        metric=float(res @ res),
        nodes_visited=nodes,
        method="mmse_dfe_lattice",
    )


DECODER_MODES = ("auto", "ml", "sphere", "mmse_dfe_lattice")


def decode(
    sys: LatticeSystem,
    snr: float | None = None,
    mode: str = "auto",
    max_nodes: int | None = DEFAULT_MMSE_NODE_BUDGET,
) -> DecodeResult:
    """Dispatch to a decoding route.

    ``auto`` picks sphere decoding when ``G`` has full column rank and the
    MMSE-DFE lattice route otherwise (which needs ``snr``).  ``max_nodes``
    bounds the refinement stage of the MMSE route; pass None for an
    unconditionally exhaustive search.
    """
    if mode not in DECODER_MODES:
        raise ConfigurationError(f"unknown decoder mode {mode!r}; choose from {DECODER_MODES}")
    if mode == "auto":
        mode = "sphere" if has_full_column_rank(sys.g) else "mmse_dfe_lattice"
    if mode == "ml":
        return exhaustive_ml(sys)
    if mode == "sphere":
        return sphere_decode(sys)
    if snr is None:
        raise ConfigurationError("mmse_dfe_lattice decoding requires an snr value")
    return _decode_mmse(sys, snr, max_nodes)
