"""Green-screen dataset synthesis and matting-aware copy-paste compositing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import resize_bilinear, validate_image, validate_matte

GREEN_CANVAS = (0.0, 1.0, 0.0)


@dataclass(frozen=True)
class CompositeSpec:
    """Placement for copy-paste: row/col offset in background pixels, scale
    factor for the pasted object, canvas color for plain synthesis."""

    offset: tuple[int, int] = (0, 0)
    scale: float = 1.0
    canvas_color: tuple[float, float, float] = GREEN_CANVAS

    def __post_init__(self):
        if not 0.0 < self.scale <= 16.0:
            raise ValueError("scale must be in (0, 16]")
        if any(not 0.0 <= c <= 1.0 for c in self.canvas_color):
            raise ValueError("canvas_color components must be in [0, 1]")


def composite_on_green(fg: np.ndarray, alpha: np.ndarray, canvas_color=GREEN_CANVAS) -> np.ndarray:
    """out = alpha * fg + (1 - alpha) * canvas, per channel."""
    fg = validate_image(fg)
    alpha = validate_matte(alpha)
    if fg.shape[2] != 3:
        raise ValueError("foreground must be 3-channel")
    if fg.shape[:2] != alpha.shape:
        raise ValueError(f"shape mismatch: {fg.shape[:2]} vs {alpha.shape}")
    canvas = np.asarray(canvas_color, dtype=np.float64)
    a = alpha[..., None].astype(np.float64)
    out = a * fg.astype(np.float64) + (1.0 - a) * canvas
    return np.clip(out, 0.0, 1.0).astype(fg.dtype)


def composite_paste(fg: np.ndarray, alpha: np.ndarray, bg: np.ndarray, spec: CompositeSpec) -> np.ndarray:
    """Scale fg/alpha bilinearly, place at spec.offset, alpha-blend over bg.

    Regions falling outside the background are clipped; a paste with no
    overlap returns the background unchanged.
    """
    fg = validate_image(fg)
    alpha = validate_matte(alpha)
    bg = validate_image(bg)
    if fg.shape[2] != 3 or bg.shape[2] != 3:
        raise ValueError("foreground and background must be 3-channel")
    if fg.shape[:2] != alpha.shape:
        raise ValueError(f"shape mismatch: {fg.shape[:2]} vs {alpha.shape}")
    sh = max(1, int(round(fg.shape[0] * spec.scale)))
    sw = max(1, int(round(fg.shape[1] * spec.scale)))
    if (sh, sw) != fg.shape[:2]:
        fg = resize_bilinear(fg, sh, sw)
        alpha = resize_bilinear(alpha, sh, sw)
    r0, c0 = spec.offset
    bh, bw = bg.shape[:2]
    br0, br1 = max(r0, 0), min(r0 + sh, bh)
    bc0, bc1 = max(c0, 0), min(c0 + sw, bw)
    out = np.array(bg, dtype=np.float64, copy=True)
    if br0 >= br1 or bc0 >= bc1:
        return out.astype(bg.dtype)
    fr0, fc0 = br0 - r0, bc0 - c0
    a = alpha[fr0 : fr0 + (br1 - br0), fc0 : fc0 + (bc1 - bc0), None].astype(np.float64)
    f = fg[fr0 : fr0 + (br1 - br0), fc0 : fc0 + (bc1 - bc0)].astype(np.float64)
    out[br0:br1, bc0:bc1] = a * f + (1.0 - a) * out[br0:br1, bc0:bc1]
    return np.clip(out, 0.0, 1.0).astype(bg.dtype)


def make_soft_disc(size: int, radius: float, ramp: float) -> np.ndarray:
    """Radially symmetric matte: 1 inside radius, linear falloff over ramp."""
    if radius < 0 or ramp < 0 or radius + ramp >= size / 2:
        raise ValueError("need radius + ramp < size / 2")
    c = (size - 1) / 2.0
    yy, xx = np.mgrid[0:size, 0:size]
    r = np.sqrt((yy - c) ** 2 + (xx - c) ** 2)
    if ramp == 0:
        return (r <= radius).astype(np.float64)
    return np.clip((radius + ramp - r) / ramp, 0.0, 1.0)
