"""Standard matting metrics (SAD, MSE, Grad, Conn) and the central-difference
gradient checker used throughout the verification suite.

SAD, Grad, and Conn are reported divided by 1000, the usual matting-benchmark
convention; raw sums are available from MetricsReport.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

CONN_THETA = 0.15  # degradation knee of the standard connectivity penalty


def _check_pair(pred, gt):
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {gt.shape}")
    return pred, gt


def sad(pred: np.ndarray, gt: np.ndarray) -> float:
    """Sum of absolute differences / 1000."""
    pred, gt = _check_pair(pred, gt)
    return float(np.abs(pred - gt).sum() / 1000.0)


def mse(pred: np.ndarray, gt: np.ndarray) -> float:
    """Pixel-mean squared error."""
    pred, gt = _check_pair(pred, gt)
    d = pred - gt
    return float(np.mean(d * d))


def gaussian_derivative_kernel(sigma: float) -> np.ndarray:
    """2-D x-derivative-of-Gaussian kernel, L2-normalized; transpose for y."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    eps = 1e-2
    half = int(math.ceil(sigma * math.sqrt(-2.0 * math.log(math.sqrt(2.0 * math.pi) * sigma * eps))))
    x = np.arange(-half, half + 1, dtype=np.float64)
    g = np.exp(-(x**2) / (2.0 * sigma**2)) / (sigma * math.sqrt(2.0 * math.pi))
    dg = -x * g / sigma**2
    h = np.outer(g, dg)
    return h / np.sqrt((h**2).sum())


def _gauss_gradient_magnitude(m: np.ndarray, sigma: float) -> np.ndarray:
    hx = gaussian_derivative_kernel(sigma)
    gx = ndimage.correlate(m, hx, mode="nearest")
    gy = ndimage.correlate(m, hx.T, mode="nearest")
    return np.sqrt(gx**2 + gy**2)


def grad_metric(pred: np.ndarray, gt: np.ndarray, sigma: float = 1.4) -> float:
    """Squared difference of Gaussian-derivative gradient magnitudes, summed
    over pixels and divided by 1000."""
    pred, gt = _check_pair(pred, gt)
    pa = _gauss_gradient_magnitude(pred, sigma)
    ga = _gauss_gradient_magnitude(gt, sigma)
    return float(((pa - ga) ** 2).sum() / 1000.0)


def largest_component(mask: np.ndarray) -> np.ndarray:
    """Largest 4-connected component of a binary mask; size ties resolved by
    the smallest flattened pixel index so every implementation agrees."""
    labels, n = ndimage.label(mask)  # default structure = 4-connectivity
    if n == 0:
        return np.zeros_like(mask, dtype=bool)
    sizes = ndimage.sum_labels(np.ones_like(labels), labels, index=np.arange(1, n + 1))
    best_size = sizes.max()
    candidates = np.flatnonzero(sizes == best_size) + 1
    if len(candidates) == 1:
        return labels == candidates[0]
    # size tie: pick the component whose first pixel (row-major) comes earliest
    firsts = [(np.flatnonzero(labels.ravel() == c)[0], c) for c in candidates]
    return labels == min(firsts)[1]


def conn_metric(pred: np.ndarray, gt: np.ndarray, step: float = 0.1) -> float:
    """Threshold-sweep connectivity error / 1000.

    For each threshold the source region is the largest 4-connected component
    of (pred >= t) & (gt >= t); a pixel's connectedness level is the last
    threshold at which it belonged, and degradations beyond CONN_THETA are
    penalized.  Taking the source from the intersection makes this variant
    symmetric in (pred, gt).
    """
    pred, gt = _check_pair(pred, gt)
    if not 0.0 < step < 1.0:
        raise ValueError("step must be in (0, 1)")
    n_steps = int(round(1.0 / step))
    l_map = -np.ones_like(pred)
    for i in range(1, n_steps + 1):
        t = i * step
        omega = largest_component((pred >= t) & (gt >= t))
        fresh = (l_map == -1) & ~omega
        l_map[fresh] = (i - 1) * step
    l_map[l_map == -1] = 1.0
    pred_d = pred - l_map
    gt_d = gt - l_map
    pred_phi = 1.0 - pred_d * (pred_d >= CONN_THETA)
    gt_phi = 1.0 - gt_d * (gt_d >= CONN_THETA)
    return float(np.abs(pred_phi - gt_phi).sum() / 1000.0)


def grad_check(f, x: np.ndarray, analytic: np.ndarray, h: float = 1e-4) -> float:
    """Max relative error between central differences of f at x and the
    caller's analytic gradient; denominator max(|a|, |n|, 1e-8)."""
    if h <= 0:
        raise ValueError("h must be positive")
    x = np.asarray(x, dtype=np.float64)
    analytic = np.asarray(analytic, dtype=np.float64)
    if analytic.shape != x.shape:
        raise ValueError("analytic gradient shape must match x")
    numeric = np.empty_like(x)
    flat = x.ravel()
    num_flat = numeric.ravel()
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        fp = f(x)
        flat[i] = orig - h
        fm = f(x)
        flat[i] = orig
        if not (math.isfinite(fp) and math.isfinite(fm)):
            raise ValueError("objective returned a non-finite value")
        num_flat[i] = (fp - fm) / (2.0 * h)
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-8)
    return float((np.abs(analytic - numeric) / denom).max())


# ---------------------------------------------------------------------------
# batch reporting


@dataclass
class PairMetrics:
    name: str
    sad: float
    mse: float
    grad: float
    conn: float
    sad_raw: float
    grad_raw: float
    conn_raw: float


@dataclass
class MetricsReport:
    per_image: list[PairMetrics] = field(default_factory=list)

    @property
    def summary(self) -> dict:
        def mean(attr):
            return float(np.mean([getattr(p, attr) for p in self.per_image])) if self.per_image else 0.0

        return {k: mean(k) for k in ("sad", "mse", "grad", "conn")}

    def to_json_dict(self) -> dict:
        return {
            "summary": self.summary,
            "per_image": [
                {
                    "name": p.name,
                    "sad": p.sad,
                    "mse": p.mse,
                    "grad": p.grad,
                    "conn": p.conn,
                    "sad_raw": p.sad_raw,
                    "grad_raw": p.grad_raw,
                    "conn_raw": p.conn_raw,
                }
                for p in self.per_image
            ],
        }

    def to_table(self) -> str:
        rows = [("name", "sad", "mse", "grad", "conn")]
        for p in self.per_image:
            rows.append((p.name, f"{p.sad:.6f}", f"{p.mse:.6f}", f"{p.grad:.6f}", f"{p.conn:.6f}"))
        s = self.summary
        rows.append(("MEAN", f"{s['sad']:.6f}", f"{s['mse']:.6f}", f"{s['grad']:.6f}", f"{s['conn']:.6f}"))
        widths = [max(len(r[i]) for r in rows) for i in range(5)]
        return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in rows)


def evaluate_pair(name: str, pred: np.ndarray, gt: np.ndarray, sigma: float = 1.4, step: float = 0.1) -> PairMetrics:
    s = sad(pred, gt)
    g = grad_metric(pred, gt, sigma)
    c = conn_metric(pred, gt, step)
    return PairMetrics(
        name=name,
        sad=s,
        mse=mse(pred, gt),
        grad=g,
        conn=c,
        sad_raw=s * 1000.0,
        grad_raw=g * 1000.0,
        conn_raw=c * 1000.0,
    )
