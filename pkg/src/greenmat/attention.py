"""Cross-attention maps and the green-background control loss.

An attention stack is a plain list of (H_l, W_l) arrays with values in
[0, 1], one map per cross-attention layer, all for a single text token.
"""

from __future__ import annotations

import json
import math
import os

import numpy as np

from .core import load_tensor, resize_area, save_tensor, validate_matte


def cross_attention(q_features: np.ndarray, keys: np.ndarray, d: int | None = None) -> np.ndarray:
    """Scaled dot-product token weights: softmax(Q K^T / sqrt(d)) per pixel.

    q_features is (HW, d) flattened spatial features, keys is (n_tokens, d).
    Each output row sums to 1; softmax uses max-subtraction so huge logits
    stay finite.
    """
    q = np.asarray(q_features, dtype=np.float64)
    k = np.asarray(keys, dtype=np.float64)
    if q.ndim != 2 or k.ndim != 2:
        raise ValueError("q_features and keys must be 2-D")
    if q.shape[1] != k.shape[1]:
        raise ValueError(f"dim mismatch: {q.shape[1]} vs {k.shape[1]}")
    if d is not None and d != q.shape[1]:
        raise ValueError(f"declared d={d} but features have dim {q.shape[1]}")
    logits = q @ k.T / math.sqrt(q.shape[1])
    logits -= logits.max(axis=1, keepdims=True)
    w = np.exp(logits)
    w /= w.sum(axis=1, keepdims=True)
    return w


def token_map(attn: np.ndarray, j: int, h: int, w: int) -> np.ndarray:
    """The j-th token's per-pixel weight column, reshaped to (h, w)."""
    attn = np.asarray(attn)
    if attn.ndim != 2:
        raise ValueError("attn must be (HW, n_tokens)")
    if not 0 <= j < attn.shape[1]:
        raise ValueError(f"token index {j} out of range for {attn.shape[1]} tokens")
    if h * w != attn.shape[0]:
        raise ValueError(f"grid {h}x{w} does not match {attn.shape[0]} pixels")
    return attn[:, j].reshape(h, w)


def _layer_targets(stack, m: np.ndarray):
    if len(stack) == 0:
        raise ValueError("empty attention stack")
    m = validate_matte(m)
    for a in stack:
        a = np.asarray(a)
        if a.ndim != 2:
            raise ValueError("each attention layer must be 2-D")
        yield a, 1.0 - resize_area(m, a.shape[0], a.shape[1]).astype(np.float64)


def green_control_loss(stack, m: np.ndarray) -> float:
    """Mean absolute gap between each layer's token map and the background
    mask 1 - m (resized per layer), averaged over layers."""
    per_layer = [
        float(np.mean(np.abs(a.astype(np.float64) - tgt))) for a, tgt in _layer_targets(stack, m)
    ]
    return float(np.mean(per_layer))


def green_control_loss_grad(stack, m: np.ndarray) -> list[np.ndarray]:
    """Subgradient w.r.t. each layer map: sign(a - (1-m)) / (u * H_l * W_l)."""
    stack = list(stack)
    u = len(stack)
    return [
        np.sign(a.astype(np.float64) - tgt) / (u * a.size) for a, tgt in _layer_targets(stack, m)
    ]


def save_attention_stack(manifest_path, stack) -> None:
    """Write layers as GMT1 tensors next to a JSON manifest
    {"layers": [{"h", "w", "file"}, ...]}."""
    manifest_path = os.fspath(manifest_path)
    base = os.path.dirname(manifest_path)
    stem = os.path.splitext(os.path.basename(manifest_path))[0]
    layers = []
    for i, a in enumerate(stack):
        a = np.asarray(a)
        fname = f"{stem}_layer{i:03d}.gmt"
        save_tensor(os.path.join(base, fname), a)
        layers.append({"h": int(a.shape[0]), "w": int(a.shape[1]), "file": fname})
    with open(manifest_path, "w") as f:
        json.dump({"layers": layers}, f, indent=2)


def load_attention_stack(manifest_path) -> list[np.ndarray]:
    manifest_path = os.fspath(manifest_path)
    base = os.path.dirname(manifest_path)
    with open(manifest_path) as f:
        manifest = json.load(f)
    stack = []
    for entry in manifest["layers"]:
        a = load_tensor(os.path.join(base, entry["file"]))
        if a.shape != (entry["h"], entry["w"]):
            raise ValueError(f"manifest/tensor shape mismatch for {entry['file']}")
        stack.append(a)
    return stack
