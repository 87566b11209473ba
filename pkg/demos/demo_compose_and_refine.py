"""Composite a soft foreground onto green, then recover its matte.

Walks the full round trip: build a synthetic soft disc, put it on a pure
green canvas, hand GreenPost only a coarse binary mask, and compare the
refined matte against the alpha we started from.
"""

import numpy as np

from greenmat import composer, greenpost, metrics

SIZE = 256

# a magenta disc with a 6-pixel linear ramp at its edge
alpha = composer.make_soft_disc(SIZE, radius=70.0, ramp=6.0)
fg = np.zeros((SIZE, SIZE, 3))
fg[:] = (0.85, 0.15, 0.65)

img = composer.composite_on_green(fg, alpha)
print(f"composited {SIZE}x{SIZE} image; GSG of the canvas region:")
print(f"  gsg = {greenpost.gsg_score(img):.2f}  (0 would be a pure green frame)")

# the only hint GreenPost gets is a crude binarization of the alpha
coarse = (alpha > 0.05).astype(np.float64)
params = greenpost.RefineParams(saturation_distance=None)  # auto-calibrate
refined = greenpost.green_post(img, coarse, params)

print("round-trip quality of the refined matte vs the true alpha:")
print(f"  mse  = {np.mean((refined - alpha) ** 2):.2e}")
print(f"  sad  = {metrics.sad(refined, alpha):.4f}")
print(f"  grad = {metrics.grad_metric(refined, alpha):.4f}")
print(f"  conn = {metrics.conn_metric(refined, alpha):.4f}")

# paste the same foreground, half size, at an offset on a fresh green canvas
canvas = np.zeros((SIZE, SIZE, 3))
canvas[..., 1] = 1.0
spec = composer.CompositeSpec(offset=(40, 60), scale=0.5)
pasted = composer.composite_paste(fg, alpha, canvas, spec)
print(f"pasted at offset {spec.offset}, scale {spec.scale}: shape {pasted.shape}")
