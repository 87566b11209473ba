"""Self-contained verification suite behind `greenmat verify`.

Every oracle here is deliberately naive (python loops, exhaustive
enumeration) and shares no code path with the library functions it checks.
The pytest suite reuses the same oracles.
"""

from __future__ import annotations

import math
import time
from collections import deque
from dataclasses import dataclass

import numpy as np

from . import attention, composer, detail, diffusion, greenpost, matting_head, metrics
from .core import make_rng, resize_area

# ---------------------------------------------------------------------------
# naive oracles


def naive_sum_abs(a: np.ndarray, b: np.ndarray) -> float:
    total = 0.0
    for x, y in zip(np.asarray(a).ravel().tolist(), np.asarray(b).ravel().tolist()):
        total += abs(x - y)
    return total


def naive_sum_sq(a: np.ndarray, b: np.ndarray) -> float:
    total = 0.0
    for x, y in zip(np.asarray(a).ravel().tolist(), np.asarray(b).ravel().tolist()):
        total += (x - y) ** 2
    return total


def naive_gauss_kernel(sigma: float) -> np.ndarray:
    eps = 1e-2
    half = int(math.ceil(sigma * math.sqrt(-2.0 * math.log(math.sqrt(2.0 * math.pi) * sigma * eps))))
    size = 2 * half + 1
    h = np.zeros((size, size))
    for i in range(size):
        for j in range(size):
            y = i - half
            x = j - half
            g = math.exp(-(y * y) / (2 * sigma * sigma)) / (sigma * math.sqrt(2 * math.pi))
            dg = -x * math.exp(-(x * x) / (2 * sigma * sigma)) / (sigma * math.sqrt(2 * math.pi)) / (sigma * sigma)
            h[i, j] = g * dg
    norm = math.sqrt(sum(v * v for v in h.ravel().tolist()))
    return h / norm


def naive_correlate(m: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    hh, ww = m.shape
    kh, kw = kernel.shape
    ry, rx = kh // 2, kw // 2
    out = np.zeros_like(m, dtype=np.float64)
    for i in range(hh):
        for j in range(ww):
            acc = 0.0
            for a in range(kh):
                for b in range(kw):
                    ii = min(max(i + a - ry, 0), hh - 1)
                    jj = min(max(j + b - rx, 0), ww - 1)
                    acc += kernel[a, b] * m[ii, jj]
            out[i, j] = acc
    return out


def naive_grad_metric(pred: np.ndarray, gt: np.ndarray, sigma: float = 1.4) -> float:
    hx = naive_gauss_kernel(sigma)
    hy = hx.T
    total = 0.0
    amps = []
    for m in (pred, gt):
        gx = naive_correlate(np.asarray(m, dtype=np.float64), hx)
        gy = naive_correlate(np.asarray(m, dtype=np.float64), hy)
        amps.append(np.sqrt(gx * gx + gy * gy))
    for p, g in zip(amps[0].ravel().tolist(), amps[1].ravel().tolist()):
        total += (p - g) ** 2
    return total / 1000.0


def naive_largest_component(mask: np.ndarray) -> np.ndarray:
    """BFS over 4-neighbors; size ties broken by earliest row-major pixel."""
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    seen = np.zeros_like(mask)
    best = None  # (size, first_index, component set)
    for i in range(h):
        for j in range(w):
            if mask[i, j] and not seen[i, j]:
                comp = []
                q = deque([(i, j)])
                seen[i, j] = True
                while q:
                    y, x = q.popleft()
                    comp.append((y, x))
                    for dy, dx in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                        ny, nx = y + dy, x + dx
                        if 0 <= ny < h and 0 <= nx < w and mask[ny, nx] and not seen[ny, nx]:
                            seen[ny, nx] = True
                            q.append((ny, nx))
                key = (-len(comp), i * w + j)
                if best is None or key < best[0]:
                    best = (key, comp)
    out = np.zeros_like(mask)
    if best is not None:
        for y, x in best[1]:
            out[y, x] = True
    return out


def naive_conn_metric(pred: np.ndarray, gt: np.ndarray, step: float = 0.1) -> float:
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    n_steps = int(round(1.0 / step))
    l_map = -np.ones_like(pred)
    for i in range(1, n_steps + 1):
        t = i * step
        omega = naive_largest_component((pred >= t) & (gt >= t))
        for idx in zip(*np.nonzero((l_map == -1) & ~omega)):
            l_map[idx] = (i - 1) * step
    l_map[l_map == -1] = 1.0
    total = 0.0
    for p, g, l in zip(pred.ravel().tolist(), gt.ravel().tolist(), l_map.ravel().tolist()):
        pd = p - l
        gd = g - l
        p_phi = 1.0 - (pd if pd >= metrics.CONN_THETA else 0.0)
        g_phi = 1.0 - (gd if gd >= metrics.CONN_THETA else 0.0)
        total += abs(p_phi - g_phi)
    return total / 1000.0


def bruteforce_kmeans2(points: np.ndarray) -> float:
    """Optimal 2-partition inertia by exhaustive enumeration (n <= 8)."""
    n = len(points)
    best = math.inf
    for bits in range(1, 2 ** (n - 1)):
        groups = ([], [])
        for i in range(n):
            groups[(bits >> i) & 1].append(points[i])
        cost = 0.0
        for g in groups:
            if not g:
                continue
            g = np.asarray(g)
            mu = g.mean(axis=0)
            cost += float(((g - mu) ** 2).sum())
        best = min(best, cost)
    return best


# ---------------------------------------------------------------------------
# check registry


@dataclass
class CheckResult:
    name: str
    tolerance: float
    observed: float
    passed: bool

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<38} tol={self.tolerance:<10.3g} observed={self.observed:.3e}"


def _result(name, tol, observed):
    return CheckResult(name=name, tolerance=tol, observed=float(observed), passed=float(observed) <= tol)


def _check_z0_round_trip(rng, fault):
    s = diffusion.build_schedule()
    worst = 0.0
    start = time.perf_counter()
    for _ in range(100):
        z0 = rng.normal(size=(4, 4, 4))
        eps = rng.normal(size=(4, 4, 4))
        t = int(rng.integers(s.T))
        back = diffusion.estimate_z0(diffusion.add_noise(z0, eps, t, s), eps, t, s)
        denom = np.maximum(np.abs(z0), 1e-8)
        worst = max(worst, float((np.abs(back - z0) / denom).max()))
    elapsed = time.perf_counter() - start
    r = _result("z0_round_trip_rel_err", 1e-5, worst)
    r.passed = r.passed and elapsed < 1.0
    return [r]


def _check_gradients(rng, fault):
    out = []
    # noise loss
    eps = rng.normal(size=(8, 8))
    pred = eps + rng.uniform(0.2, 0.8, size=(8, 8)) * rng.choice([-1.0, 1.0], size=(8, 8))
    g = diffusion.noise_loss_grad(pred, eps)
    err = metrics.grad_check(lambda x: diffusion.noise_loss(x, eps), pred.copy(), g)
    out.append(_result("grad_noise_loss", 1e-3, err))

    # green-background control loss, two layers
    m = rng.uniform(0.0, 1.0, size=(8, 8))
    layers = []
    for hw in (8, 4):
        tgt = 1.0 - resize_area(m, hw, hw)
        off = rng.uniform(0.15, 0.45, size=(hw, hw)) * rng.choice([-1.0, 1.0], size=(hw, hw))
        layers.append(np.clip(tgt + off, 0.0, 1.0))
    # keep every entry at least 0.1 from the tie A == 1 - M
    layers = [
        np.where(np.abs(a - (1.0 - resize_area(m, *a.shape))) < 0.1, np.clip(a + 0.25, 0, 1), a)
        for a in layers
    ]
    sizes = [a.size for a in layers]

    def unpack(x):
        maps, pos = [], 0
        for a, n in zip(layers, sizes):
            maps.append(x[pos : pos + n].reshape(a.shape))
            pos += n
        return maps

    x0 = np.concatenate([a.ravel() for a in layers])
    grads = attention.green_control_loss_grad(layers, m)
    analytic = np.concatenate([g.ravel() for g in grads])
    err = metrics.grad_check(lambda x: attention.green_control_loss(unpack(x), m), x0, analytic)
    out.append(_result("grad_green_control_loss", 1e-3, err))

    # detail loss through the full high-frequency chain
    yy, xx = np.mgrid[0:8, 0:8] / 8.0
    gray = np.clip(0.35 + 0.25 * xx + 0.25 * yy + 0.04 * rng.normal(size=(8, 8)), 0.05, 0.95)
    mask = rng.uniform(0.5, 1.0, size=(8, 8))
    ref = np.zeros((8, 8))
    g = detail.detail_loss_grad_gray(gray, mask, ref)
    err = metrics.grad_check(
        lambda x: detail.detail_loss(detail.high_frequency(x, mask), ref), gray.copy(), g
    )
    out.append(_result("grad_detail_loss", 1e-3, err))

    # latent dice + L1 loss
    gt = rng.uniform(0.1, 0.9, size=(8, 8))
    shift = rng.uniform(0.15, 0.4, size=(8, 8)) * rng.choice([-1.0, 1.0], size=(8, 8))
    pred = np.clip(gt + shift, 0.05, 0.95)
    pred = np.where(np.abs(pred - gt) < 0.1, np.clip(gt + 0.2, 0.05, 0.95), pred)
    g = matting_head.latent_mask_loss_grad(pred, gt)
    if fault == "dice-grad":
        g = g * 1.5
    err = metrics.grad_check(lambda x: matting_head.latent_mask_loss(x, gt), pred.copy(), g)
    out.append(_result("grad_latent_mask_loss", 1e-3, err))
    return out


def _check_loss_identities(rng, fault):
    out = []
    eps = rng.normal(size=(6, 6))
    out.append(_result("noise_loss_zero_identity", 1e-6, diffusion.noise_loss(eps, eps)))

    m = rng.uniform(0.0, 1.0, size=(8, 8))
    layers = [1.0 - resize_area(m, 8, 8), 1.0 - resize_area(m, 4, 4)]
    out.append(_result("green_control_zero_identity", 1e-6, attention.green_control_loss(layers, m)))

    h = rng.uniform(0.0, 1.0, size=(8, 8))
    out.append(_result("detail_loss_zero_identity", 1e-6, detail.detail_loss(h, h)))

    gt = (rng.uniform(0.0, 1.0, size=(8, 8)) > 0.5).astype(np.float64)
    out.append(_result("latent_loss_zero_identity", 1e-6, matting_head.latent_mask_loss(gt, gt)))

    parts = rng.uniform(0.0, 2.0, size=4)
    total = diffusion.total_loss(*parts)
    out.append(_result("total_loss_sum_identity", 0.0, abs(total - float(parts.sum()))))
    return out


def _check_metric_oracles(rng, fault):
    worst_sad = worst_mse = worst_grad = worst_conn = 0.0
    for _ in range(5):
        pred = rng.uniform(0.0, 1.0, size=(16, 16))
        gt = rng.uniform(0.0, 1.0, size=(16, 16))
        worst_sad = max(worst_sad, abs(metrics.sad(pred, gt) - naive_sum_abs(pred, gt) / 1000.0))
        worst_mse = max(worst_mse, abs(metrics.mse(pred, gt) - naive_sum_sq(pred, gt) / pred.size))
        worst_grad = max(worst_grad, abs(metrics.grad_metric(pred, gt) - naive_grad_metric(pred, gt)))
        worst_conn = max(worst_conn, abs(metrics.conn_metric(pred, gt) - naive_conn_metric(pred, gt)))
    return [
        _result("sad_vs_reference_sum", 1e-12, worst_sad),
        _result("mse_vs_reference_sum", 1e-12, worst_mse),
        _result("grad_metric_vs_bruteforce", 1e-6, worst_grad),
        _result("conn_metric_vs_bruteforce", 1e-6, worst_conn),
    ]


def _check_kmeans_optimal(rng, fault):
    worst = 0.0
    for _ in range(10):
        n = int(rng.integers(4, 9))
        pts = rng.uniform(0.0, 1.0, size=(n, 1, 3))
        clusters = greenpost.kmeans_colors(pts, 2, rng, max_iter=100, tol=1e-12, n_init=8)
        best = bruteforce_kmeans2(pts.reshape(-1, 3) * 255.0)
        worst = max(worst, abs(clusters.inertia - best) / max(best, 1e-8))
    return [_result("kmeans_vs_exhaustive_optimum", 1e-9, worst)]


def _check_gsg(rng, fault):
    green = np.zeros((16, 16, 3))
    green[..., 1] = 1.0
    zero = greenpost.gsg_score(green, rng=make_rng(7))
    scores = []
    for delta in np.arange(0.1, 1.0, 0.1):
        img = green.copy()
        img[..., 0] = delta
        img[..., 1] = 1.0 - delta
        scores.append(greenpost.gsg_score(img, rng=make_rng(7)))
    increasing = all(b > a for a, b in zip(scores, scores[1:]))
    deltas = np.arange(0.1, 1.0, 0.1)
    lin_dev = float(np.max(np.abs(np.asarray(scores) / (deltas * 255.0 * math.sqrt(2.0)) - 1.0)))
    out = [_result("gsg_pure_green_zero", 1e-9, zero)]
    r = _result("gsg_contamination_linearity", 0.02, lin_dev)
    r.passed = r.passed and increasing
    return out + [r]


def _check_greenpost_round_trip(rng, fault):
    size = 256
    alpha = composer.make_soft_disc(size, 70.0, 6.0)
    fg = np.zeros((size, size, 3))
    fg[..., 0] = 0.85
    fg[..., 2] = 0.35
    img = composer.composite_on_green(fg, alpha)
    coarse = (alpha > 0.05).astype(np.float64)
    params = greenpost.RefineParams(saturation_distance=None, seed=3)
    refined = greenpost.green_post(img, coarse, params)
    err = metrics.mse(refined, alpha)
    return [_result("greenpost_round_trip_mse", 5e-3, err)]


def run_all(seed: int = 0, fault: str | None = None) -> list[CheckResult]:
    results = []
    for check in (
        _check_z0_round_trip,
        _check_gradients,
        _check_loss_identities,
        _check_metric_oracles,
        _check_kmeans_optimal,
        _check_gsg,
        _check_greenpost_round_trip,
    ):
        results.extend(check(make_rng(seed), fault))
    return results
