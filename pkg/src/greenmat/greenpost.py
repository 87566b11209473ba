"""K-means color clustering, the green-screen quality (GSG) score, and the
GreenPost chroma refinement that lifts a coarse pixel mask to an alpha matte.

Clustering runs in 8-bit RGB space ([0, 255] coordinates) so GSG distances
land on the conventional 0..255-sqrt(3) scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import validate_image, validate_matte

PURE_GREEN = (0.0, 255.0, 0.0)
MAX_RGB_DISTANCE = math.sqrt(3.0)  # unit RGB cube diagonal


@dataclass(frozen=True)
class ColorClusters:
    centroids: np.ndarray  # (k, 3) in [0, 255]
    counts: np.ndarray  # (k,)
    assignment: np.ndarray  # (n_pixels,)
    inertia: float

    @property
    def k(self) -> int:
        return len(self.centroids)


@dataclass(frozen=True)
class RefineParams:
    """Knobs for green_post; saturation_distance is the fraction of the RGB
    cube diagonal at which the background difference saturates to alpha 1.
    None asks green_post to calibrate it from the foreground core."""

    kmeans_k: int = 3
    seed: int = 0
    saturation_distance: float | None = 100.0 / 255.0
    smooth_iters: int = 2
    fg_core_threshold: float = 0.9


def _pixels255(img: np.ndarray) -> np.ndarray:
    return np.asarray(img, dtype=np.float64).reshape(-1, 3) * 255.0


def _sq_dist_to(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    d2 = (
        (points**2).sum(axis=1)[:, None]
        - 2.0 * points @ centroids.T
        + (centroids**2).sum(axis=1)[None, :]
    )
    return np.maximum(d2, 0.0)


def _kmeanspp_seed(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(points)
    centroids = np.empty((k, 3))
    centroids[0] = points[rng.integers(n)]
    d2 = ((points - centroids[0]) ** 2).sum(axis=1)
    for i in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            idx = rng.integers(n)
        else:
            idx = rng.choice(n, p=d2 / total)
        centroids[i] = points[idx]
        d2 = np.minimum(d2, ((points - centroids[i]) ** 2).sum(axis=1))
    return centroids


def _lloyd(points, centroids, max_iter, tol):
    for _ in range(max_iter):
        d2 = _sq_dist_to(points, centroids)
        assign = d2.argmin(axis=1)
        new = centroids.copy()
        for i in range(len(centroids)):
            members = points[assign == i]
            if len(members):
                new[i] = members.mean(axis=0)
            else:
                # re-seed an empty cluster at the point farthest from its centroid
                far = d2[np.arange(len(points)), assign].argmax()
                new[i] = points[far]
        move = np.sqrt(((new - centroids) ** 2).sum(axis=1)).max()
        centroids = new
        if move < tol:
            break
    d2 = _sq_dist_to(points, centroids)
    assign = d2.argmin(axis=1)
    inertia = float(d2[np.arange(len(points)), assign].sum())
    return centroids, assign, inertia


def kmeans_colors(
    img: np.ndarray,
    k: int,
    rng: np.random.Generator,
    max_iter: int = 50,
    tol: float = 1e-4,
    n_init: int = 4,
) -> ColorClusters:
    """Lloyd's algorithm with k-means++ seeding, best of n_init restarts.

    Deterministic given the generator state.  Duplicate centroids are valid
    when the image has fewer distinct colors than k.
    """
    img = validate_image(img)
    if img.shape[2] != 3:
        raise ValueError("kmeans_colors needs a 3-channel image")
    points = _pixels255(img)
    if not 1 <= k <= len(points):
        raise ValueError(f"k={k} outside [1, {len(points)}]")
    # cluster on a canonically sorted copy so the result is invariant to
    # pixel permutation, then assign the original pixels at the end
    ordered = points[np.lexsort(points.T[::-1])]
    best = None
    for _ in range(max(1, n_init)):
        centroids = _kmeanspp_seed(ordered, k, rng)
        centroids, _, inertia = _lloyd(ordered, centroids, max_iter, tol)
        if best is None or inertia < best[2]:
            best = (centroids, None, inertia)
    centroids, _, inertia = best
    d2 = _sq_dist_to(points, centroids)
    assign = d2.argmin(axis=1)
    counts = np.bincount(assign, minlength=k)
    return ColorClusters(centroids=centroids, counts=counts, assignment=assign, inertia=inertia)


def dominant_color(clusters: ColorClusters) -> np.ndarray:
    """Centroid of the most populated cluster; ties go to the lower index."""
    if clusters.k < 1:
        raise ValueError("empty clustering")
    return clusters.centroids[int(np.argmax(clusters.counts))]


def gsg_score(
    img: np.ndarray,
    ref=PURE_GREEN,
    k: int = 5,
    rng: np.random.Generator | None = None,
) -> float:
    """Euclidean distance (8-bit RGB space) between the image's dominant
    K-means color and the reference green; lower is a purer canvas."""
    if rng is None:
        rng = np.random.Generator(np.random.PCG64(0))
    clusters = kmeans_colors(img, k, rng)
    dom = dominant_color(clusters)
    return float(np.sqrt(((dom - np.asarray(ref, dtype=np.float64)) ** 2).sum()))


def estimate_clean_background(
    img: np.ndarray,
    coarse: np.ndarray,
    k: int = 3,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Fill coarse-foreground pixels with the dominant color clustered from
    the coarse-background pixels; background pixels pass through unchanged."""
    img = validate_image(img)
    coarse = validate_matte(coarse)
    if img.shape[:2] != coarse.shape:
        raise ValueError(f"shape mismatch: {img.shape[:2]} vs {coarse.shape}")
    if rng is None:
        rng = np.random.Generator(np.random.PCG64(0))
    bg_mask = coarse < 0.5
    if not bg_mask.any():
        raise ValueError("no background prior")
    bg_pixels = img[bg_mask]
    k = min(k, len(bg_pixels))
    sub = bg_pixels[:, None, :]  # (n, 1, 3) pseudo-image for the clusterer
    clusters = kmeans_colors(sub, k, rng)
    fill = dominant_color(clusters) / 255.0
    out = np.array(img, dtype=np.float64, copy=True)
    out[~bg_mask] = fill
    return out.astype(img.dtype)


def _box3(field: np.ndarray) -> np.ndarray:
    p = np.pad(field, 1, mode="edge")
    h, w = field.shape
    acc = np.zeros((h, w), dtype=np.float64)
    for ky in range(3):
        for kx in range(3):
            acc += p[ky : ky + h, kx : kx + w]
    return acc / 9.0


def green_post(img: np.ndarray, coarse: np.ndarray, params: RefineParams | None = None) -> np.ndarray:
    """Refine a coarse mask to an alpha matte via the background difference.

    The compositing relation I = a F + (1 - a) B is solved against a clean
    background estimate: a_raw = clamp(|I - B| / d_max, 0, 1), where d_max
    is the saturation distance.  With saturation_distance=None, d_max is the
    median background difference over the coarse foreground core, which
    calibrates the scale to the footage.  The transition band (0 < a < 1)
    is then box-smoothed smooth_iters times.
    """
    if params is None:
        params = RefineParams()
    img = validate_image(img)
    coarse = validate_matte(coarse)
    if img.shape[:2] != coarse.shape:
        raise ValueError(f"shape mismatch: {img.shape[:2]} vs {coarse.shape}")
    rng = np.random.Generator(np.random.PCG64(params.seed))
    bg = estimate_clean_background(img, coarse, k=params.kmeans_k, rng=rng)
    dist = np.sqrt(
        ((np.asarray(img, dtype=np.float64) - np.asarray(bg, dtype=np.float64)) ** 2).sum(axis=2)
    )
    core = coarse >= params.fg_core_threshold
    if params.saturation_distance is None:
        if not core.any():
            raise ValueError("no foreground core to calibrate saturation distance")
        d_max = float(np.median(dist[core]))
        if d_max <= 0.0:
            d_max = MAX_RGB_DISTANCE
    else:
        d_max = params.saturation_distance * MAX_RGB_DISTANCE
    alpha = np.clip(dist / d_max, 0.0, 1.0)
    alpha[core & (dist > d_max)] = 1.0
    band = (alpha > 0.0) & (alpha < 1.0)
    for _ in range(params.smooth_iters):
        alpha[band] = _box3(alpha)[band]
    return np.clip(alpha, 0.0, 1.0)
