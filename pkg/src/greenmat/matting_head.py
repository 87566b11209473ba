"""Convolutional matting head over 128-channel decoder features, plus the
dice + L1 latent mask loss."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .core import load_tensor, save_tensor

IN_CHANNELS = 128
HIDDEN_CHANNELS = 64
DICE_EPS = 1e-6


@dataclass(frozen=True)
class MattingHeadWeights:
    """Two 3x3 conv layers, 128 -> 64 -> 1, weights in (out, in, 3, 3)."""

    conv1_w: np.ndarray
    conv1_b: np.ndarray
    conv2_w: np.ndarray
    conv2_b: np.ndarray

    def __post_init__(self):
        shapes = {
            "conv1_w": (HIDDEN_CHANNELS, IN_CHANNELS, 3, 3),
            "conv1_b": (HIDDEN_CHANNELS,),
            "conv2_w": (1, HIDDEN_CHANNELS, 3, 3),
            "conv2_b": (1,),
        }
        for name, want in shapes.items():
            arr = np.asarray(getattr(self, name))
            if arr.shape != want:
                raise ValueError(f"{name} must have shape {want}, got {arr.shape}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite values")


def random_weights(rng: np.random.Generator) -> MattingHeadWeights:
    """He-scaled random weights, for fixtures and demos."""
    s1 = np.sqrt(2.0 / (IN_CHANNELS * 9))
    s2 = np.sqrt(2.0 / (HIDDEN_CHANNELS * 9))
    return MattingHeadWeights(
        conv1_w=rng.normal(0.0, s1, (HIDDEN_CHANNELS, IN_CHANNELS, 3, 3)),
        conv1_b=np.zeros(HIDDEN_CHANNELS),
        conv2_w=rng.normal(0.0, s2, (1, HIDDEN_CHANNELS, 3, 3)),
        conv2_b=np.zeros(1),
    )


def save_weights(manifest_path, w: MattingHeadWeights) -> None:
    """JSON manifest naming four GMT1 tensors beside it."""
    manifest_path = os.fspath(manifest_path)
    base = os.path.dirname(manifest_path)
    stem = os.path.splitext(os.path.basename(manifest_path))[0]
    entries = {}
    for name in ("conv1_w", "conv1_b", "conv2_w", "conv2_b"):
        fname = f"{stem}_{name}.gmt"
        save_tensor(os.path.join(base, fname), getattr(w, name))
        entries[name] = fname
    with open(manifest_path, "w") as f:
        json.dump(entries, f, indent=2)


def load_weights(manifest_path) -> MattingHeadWeights:
    manifest_path = os.fspath(manifest_path)
    base = os.path.dirname(manifest_path)
    with open(manifest_path) as f:
        entries = json.load(f)
    kw = {name: load_tensor(os.path.join(base, entries[name])) for name in entries}
    return MattingHeadWeights(**kw)


def silu(x: np.ndarray) -> np.ndarray:
    return x / (1.0 + np.exp(-x))


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _conv3x3_same(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(H, W, Cin) -> (H, W, Cout), zero padding 1, stride 1."""
    h, wid, _ = x.shape
    p = np.pad(x, ((1, 1), (1, 1), (0, 0)))
    out = np.broadcast_to(b, (h, wid, w.shape[0])).astype(np.float64).copy()
    for ky in range(3):
        for kx in range(3):
            out += np.tensordot(p[ky : ky + h, kx : kx + wid, :], w[:, :, ky, kx], axes=([2], [1]))
    return out


def matting_forward(f: np.ndarray, w: MattingHeadWeights) -> np.ndarray:
    """conv3x3 -> SiLU -> conv3x3 -> SiLU -> sigmoid; returns an (H, W)
    matte strictly inside (0, 1)."""
    f = np.asarray(f, dtype=np.float64)
    if f.ndim != 3 or f.shape[2] != IN_CHANNELS:
        raise ValueError(f"latent features must be (H, W, {IN_CHANNELS}), got {f.shape}")
    if f.shape[0] < 3 or f.shape[1] < 3:
        raise ValueError("spatial dims must be at least 3x3")
    hid = silu(_conv3x3_same(f, np.asarray(w.conv1_w, dtype=np.float64), w.conv1_b))
    out = silu(_conv3x3_same(hid, np.asarray(w.conv2_w, dtype=np.float64), w.conv2_b))
    return sigmoid(out[..., 0])


def latent_mask_loss(pred: np.ndarray, gt: np.ndarray) -> float:
    """Mean L1 plus soft dice: 1 - (2 sum(pg) + eps) / (sum p + sum g + eps)."""
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {gt.shape}")
    l1 = np.mean(np.abs(pred - gt))
    inter = np.sum(pred * gt)
    denom = np.sum(pred) + np.sum(gt) + DICE_EPS
    dice = 1.0 - (2.0 * inter + DICE_EPS) / denom
    return float(l1 + dice)


def latent_mask_loss_grad(pred: np.ndarray, gt: np.ndarray) -> np.ndarray:
    """Gradient w.r.t. pred; the L1 part is a subgradient at pred == gt."""
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {gt.shape}")
    l1_grad = np.sign(pred - gt) / pred.size
    inter = np.sum(pred * gt)
    denom = np.sum(pred) + np.sum(gt) + DICE_EPS
    dice_grad = -2.0 * gt / denom + (2.0 * inter + DICE_EPS) / denom**2
    return l1_grad + dice_grad
