"""Divergence-frontier score between two feature collections.

The standard quantize-then-frontier construction: feature vectors from both
sides are pooled and quantized with seeded k-means; the resulting pair of
histograms is mixed over a grid of weights; each mixture contributes the
point (exp(-c * KL(Q || R)), exp(-c * KL(P || R))); and the score is the
area under that curve, anchored at (1, 0) and (0, 1) and averaged over both
axis orientations so identical histograms score exactly 1.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import InputError

logger = logging.getLogger(__name__)

DEFAULT_SCALING = 5.0
DEFAULT_GRID_POINTS = 25
KMEANS_MAX_ITER = 100


def default_mixture_grid(points: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    """Endpoint weights 0 and 1 plus ``points`` evenly spaced interior weights."""
    if points < 1:
        raise InputError(f"grid needs at least 1 interior point, got {points}")
    return np.linspace(0.0, 1.0, points + 2)


def kmeans_quantize(
    points: np.ndarray, num_bins: int, seed: int, max_iter: int = KMEANS_MAX_ITER
) -> np.ndarray:
    """Seeded k-means cluster assignment for each row of ``points``.

    Deterministic by construction: initial centroids are ``num_bins``
    distinct rows drawn without replacement from a seeded generator,
    assignment ties break toward the lowest cluster id, and clusters that
    empty out keep their previous centroid. Requesting more bins than there
    are points clamps with a warning.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise InputError("points must be a non-empty 2-D array")
    if num_bins < 1:
        raise InputError(f"num_bins must be at least 1, got {num_bins}")
    if num_bins > pts.shape[0]:
        logger.warning(
            "requested %d bins for %d points; clamping", num_bins, pts.shape[0]
        )
        num_bins = pts.shape[0]
    rng = np.random.default_rng(seed)
    centroids = pts[rng.choice(pts.shape[0], size=num_bins, replace=False)]
    assign = np.zeros(pts.shape[0], dtype=np.intp)
    for iteration in range(max_iter):
        d2 = ((pts[:, np.newaxis, :] - centroids[np.newaxis, :, :]) ** 2).sum(axis=2)
        new_assign = np.argmin(d2, axis=1)  # argmin takes the first (lowest) id on ties
        if iteration > 0 and np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for b in range(num_bins):
            members = pts[assign == b]
            if len(members):
                centroids[b] = members.mean(axis=0)
    return assign


def kl_divergence(p: np.ndarray, q: np.ndarray) -> float:
    """KL(p || q) in nats; +inf when q lacks mass somewhere p has it."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    mask = p > 0.0
    if np.any(q[mask] == 0.0):
        return float("inf")
    return float(np.sum(p[mask] * np.log(p[mask] / q[mask])))


@dataclass(frozen=True)
class FrontierScore:
    """Frontier area plus everything needed to reproduce it.

    ``curve`` holds the raw (KL(Q || R), KL(P || R)) pairs for each mixture
    weight, endpoints included; ``value`` is always in (0, 1] and reaches 1
    (up to float rounding) exactly when the histograms coincide.
    """

    value: float
    num_bins: int
    scaling_constant: float
    mixture_grid: tuple[float, ...]
    curve: tuple[tuple[float, float], ...]

    @property
    def value_pct(self) -> float:
        return 100.0 * self.value


def _area(xs: np.ndarray, ys: np.ndarray) -> float:
    order = np.lexsort((-ys, xs))
    return float(np.trapezoid(ys[order], xs[order]))


def frontier_from_histograms(
    p, q, *, scaling_constant: float = DEFAULT_SCALING, mixture_grid=None
) -> FrontierScore:
    """Frontier score of two histograms over the same bins.

    Inputs may be counts; they are normalized to distributions. The grid
    must include at least one weight strictly inside (0, 1): with endpoints
    alone even disjoint histograms would sweep a degenerate area.
    """
    hp = np.asarray(p, dtype=np.float64)
    hq = np.asarray(q, dtype=np.float64)
    if hp.shape != hq.shape or hp.ndim != 1 or hp.size == 0:
        raise InputError("histograms must be non-empty 1-D arrays of equal length")
    if np.any(hp < 0.0) or np.any(hq < 0.0):
        raise InputError("histogram entries must be non-negative")
    if hp.sum() <= 0.0 or hq.sum() <= 0.0:
        raise InputError("histograms must have positive total mass")
    hp = hp / hp.sum()
    hq = hq / hq.sum()
    if not float(scaling_constant) > 0.0:
        raise InputError(f"scaling constant must be positive, got {scaling_constant}")
    c = float(scaling_constant)
    grid = default_mixture_grid() if mixture_grid is None else np.asarray(mixture_grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size == 0:
        raise InputError("mixture grid must be a non-empty 1-D array")
    if np.any(grid < 0.0) or np.any(grid > 1.0):
        raise InputError("mixture weights must lie in [0, 1]")
    grid = np.unique(grid)
    if not np.any((grid > 0.0) & (grid < 1.0)):
        raise InputError("mixture grid needs at least one interior weight")

    curve = []
    for lam in grid:
        mix = lam * hp + (1.0 - lam) * hq
        curve.append((kl_divergence(hq, mix), kl_divergence(hp, mix)))

    kl_q = np.asarray([pt[0] for pt in curve])
    kl_p = np.asarray([pt[1] for pt in curve])
    with np.errstate(over="ignore"):
        xs = np.exp(-c * kl_q)
        ys = np.exp(-c * kl_p)
    # Anchor both ends so the curve always spans x in [0, 1].
    xs = np.concatenate(([1.0], xs, [0.0]))
    ys = np.concatenate(([0.0], ys, [1.0]))
    value = 0.5 * (_area(xs, ys) + _area(ys, xs))
    return FrontierScore(
        value=value,
        num_bins=int(hp.size),
        scaling_constant=c,
        mixture_grid=tuple(float(g) for g in grid),
        curve=tuple((float(a), float(b)) for a, b in curve),
    )


def frontier_score(
    features_p: Sequence[np.ndarray],
    features_q: Sequence[np.ndarray],
    num_bins: int,
    *,
    scaling_constant: float = DEFAULT_SCALING,
    seed: int = 0,
    mixture_grid=None,
) -> FrontierScore:
    """Quantize two feature collections and score their frontier."""
    fp = [np.asarray(f, dtype=np.float64) for f in features_p]
    fq = [np.asarray(f, dtype=np.float64) for f in features_q]
    if not fp or not fq:
        raise InputError("both feature collections must be non-empty")
    dims = {f.shape for f in fp + fq}
    if len(dims) != 1 or any(len(s) != 1 for s in dims):
        raise InputError(f"features must share one 1-D shape, got {sorted(dims)}")
    pooled = np.vstack(fp + fq)
    assign = kmeans_quantize(pooled, num_bins, seed)
    k = int(assign.max()) + 1
    hist_p = np.bincount(assign[: len(fp)], minlength=k).astype(np.float64)
    hist_q = np.bincount(assign[len(fp) :], minlength=k).astype(np.float64)
    return frontier_from_histograms(
        hist_p, hist_q, scaling_constant=scaling_constant, mixture_grid=mixture_grid
    )
