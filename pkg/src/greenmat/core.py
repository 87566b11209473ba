"""Shared grid types, I/O, deterministic RNG, and resampling.

Arrays are plain numpy: images are (H, W, C) float in [0, 1] with C in
{1, 3, 4}, alpha mattes are (H, W) float in [0, 1], latent grids are
(H, W, C) float with unrestricted range.  Storage is float32; reductions
accumulate in float64.  All functions are pure and thread-safe.
"""

from __future__ import annotations

import struct

import numpy as np
from PIL import Image as _PILImage

GRAY_WEIGHTS = (0.299, 0.587, 0.114)  # BT.601 luma

_GMT1_MAGIC = b"GMT1"


def make_rng(seed: int) -> np.random.Generator:
    """Deterministic generator (PCG64); identical seed gives an identical
    sequence on every platform."""
    return np.random.Generator(np.random.PCG64(int(seed)))


# ---------------------------------------------------------------------------
# validation


def validate_image(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] not in (1, 3, 4):
        raise ValueError(f"image must be (H, W, C) with C in {{1,3,4}}, got {img.shape}")
    if img.size == 0:
        raise ValueError("empty input")
    if img.min() < 0.0 or img.max() > 1.0:
        raise ValueError("image values must lie in [0, 1]")
    return img


def validate_matte(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2:
        raise ValueError(f"matte must be (H, W), got {m.shape}")
    if m.size == 0:
        raise ValueError("empty input")
    if m.min() < 0.0 or m.max() > 1.0:
        raise ValueError("matte values must lie in [0, 1]")
    return m


def validate_latent(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z)
    if z.size == 0:
        raise ValueError("empty input")
    if not np.all(np.isfinite(z)):
        raise ValueError("latent values must be finite")
    return z


# ---------------------------------------------------------------------------
# color


def to_gray(img: np.ndarray) -> np.ndarray:
    """BT.601 luma of a 3-channel image, returned as (H, W, 1)."""
    img = validate_image(img)
    if img.shape[2] != 3:
        raise ValueError(f"to_gray needs 3 channels, got {img.shape[2]}")
    w = np.asarray(GRAY_WEIGHTS, dtype=img.dtype)
    gray = img @ w
    return gray[..., None]


# ---------------------------------------------------------------------------
# resampling


def _resample_matrix(n_in: int, n_out: int, dtype=np.float64) -> np.ndarray:
    """1-D resampling weights: area average when shrinking, bilinear when
    growing.  Rows sum to 1, so constants (and evenly-tiled means) are
    preserved."""
    w = np.zeros((n_out, n_in), dtype=dtype)
    if n_out <= n_in:
        scale = n_in / n_out
        for i in range(n_out):
            lo, hi = i * scale, (i + 1) * scale
            j0, j1 = int(np.floor(lo)), int(np.ceil(hi))
            for j in range(j0, min(j1, n_in)):
                w[i, j] = min(hi, j + 1) - max(lo, j)
        w /= scale
    else:
        scale = n_in / n_out
        for i in range(n_out):
            pos = (i + 0.5) * scale - 0.5
            j0 = int(np.floor(pos))
            frac = pos - j0
            if j0 < 0:
                w[i, 0] = 1.0
            elif j0 >= n_in - 1:
                w[i, n_in - 1] = 1.0
            else:
                w[i, j0] = 1.0 - frac
                w[i, j0 + 1] = frac
    return w


def resize_area(src: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Resize a matte: area-weighted averaging on the shrinking axes,
    bilinear on the growing ones.  Values stay in [0, 1]."""
    src = validate_matte(src)
    if out_h < 1 or out_w < 1:
        raise ValueError("output size must be at least 1x1")
    wr = _resample_matrix(src.shape[0], out_h)
    wc = _resample_matrix(src.shape[1], out_w)
    out = wr @ src.astype(np.float64) @ wc.T
    return np.clip(out, 0.0, 1.0).astype(src.dtype)


def resize_bilinear(src: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resize for 2-D or (H, W, C) fields (used by paste scaling)."""
    src = np.asarray(src)
    if out_h < 1 or out_w < 1:
        raise ValueError("output size must be at least 1x1")
    sq = src.ndim == 2
    if sq:
        src = src[..., None]
    h, w, c = src.shape
    ys = np.clip((np.arange(out_h) + 0.5) * h / out_h - 0.5, 0, h - 1)
    xs = np.clip((np.arange(out_w) + 0.5) * w / out_w - 0.5, 0, w - 1)
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = (ys - y0)[:, None, None]
    fx = (xs - x0)[None, :, None]
    a = src[y0][:, x0] * (1 - fy) * (1 - fx)
    b = src[y0][:, x1] * (1 - fy) * fx
    cpart = src[y1][:, x0] * fy * (1 - fx)
    d = src[y1][:, x1] * fy * fx
    out = a + b + cpart + d
    return out[..., 0] if sq else out


# ---------------------------------------------------------------------------
# PNG I/O (8-bit, v/255 conversion)


def load_image(path) -> np.ndarray:
    """Load a PNG as (H, W, C) float32 in [0, 1]; C follows the file."""
    with _PILImage.open(path) as im:
        if im.mode not in ("L", "RGB", "RGBA"):
            im = im.convert("RGBA" if "A" in im.getbands() else "RGB")
        arr = np.asarray(im, dtype=np.float32) / 255.0
    if arr.ndim == 2:
        arr = arr[..., None]
    return arr


def save_image(path, img: np.ndarray) -> None:
    img = validate_image(img)
    data = np.rint(np.asarray(img, dtype=np.float64) * 255.0).astype(np.uint8)
    if img.shape[2] == 1:
        _PILImage.fromarray(data[..., 0], mode="L").save(path)
    elif img.shape[2] == 3:
        _PILImage.fromarray(data, mode="RGB").save(path)
    else:
        _PILImage.fromarray(data, mode="RGBA").save(path)


def load_matte(path) -> np.ndarray:
    with _PILImage.open(path) as im:
        arr = np.asarray(im.convert("L"), dtype=np.float32) / 255.0
    return arr


def save_matte(path, m: np.ndarray) -> None:
    m = validate_matte(m)
    data = np.rint(np.asarray(m, dtype=np.float64) * 255.0).astype(np.uint8)
    _PILImage.fromarray(data, mode="L").save(path)


# ---------------------------------------------------------------------------
# GMT1 float-tensor format: magic "GMT1", u32 rank, u32 dims, LE float32


def save_tensor(path, arr: np.ndarray) -> None:
    arr = np.ascontiguousarray(np.asarray(arr, dtype="<f4"))
    with open(path, "wb") as f:
        f.write(_GMT1_MAGIC)
        f.write(struct.pack("<I", arr.ndim))
        f.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
        f.write(arr.tobytes())


def load_tensor(path) -> np.ndarray:
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != _GMT1_MAGIC:
            raise ValueError(f"not a GMT1 tensor file: {path}")
        (rank,) = struct.unpack("<I", f.read(4))
        dims = struct.unpack(f"<{rank}I", f.read(4 * rank))
        n = int(np.prod(dims)) if rank else 1
        data = np.frombuffer(f.read(4 * n), dtype="<f4")
        if data.size != n:
            raise ValueError(f"truncated GMT1 tensor file: {path}")
    return data.reshape(dims).copy()
