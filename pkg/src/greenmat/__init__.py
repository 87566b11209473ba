"""greenmat: green-screen matting toolkit.

Deterministic, pure-numpy implementations of the green-screen generation
losses (noise, green-background control, boundary detail, latent mask), the
DDPM latent algebra, a convolutional matting head, chroma-key refinement
(GreenPost), the GSG canvas-quality score, standard matting metrics, and
green-screen compositing utilities.
"""

from .attention import (
    cross_attention,
    green_control_loss,
    green_control_loss_grad,
    load_attention_stack,
    save_attention_stack,
    token_map,
)
from .composer import CompositeSpec, composite_on_green, composite_paste, make_soft_disc
from .core import (
    load_image,
    load_matte,
    load_tensor,
    make_rng,
    resize_area,
    save_image,
    save_matte,
    save_tensor,
    to_gray,
)
from .detail import detail_loss, detail_loss_grad_gray, high_frequency, sobel_response
from .diffusion import (
    NoiseSchedule,
    add_noise,
    build_schedule,
    estimate_z0,
    noise_loss,
    noise_loss_grad,
    total_loss,
)
from .greenpost import (
    ColorClusters,
    RefineParams,
    dominant_color,
    estimate_clean_background,
    green_post,
    gsg_score,
    kmeans_colors,
)
from .matting_head import (
    MattingHeadWeights,
    latent_mask_loss,
    latent_mask_loss_grad,
    load_weights,
    matting_forward,
    random_weights,
    save_weights,
)
from .metrics import (
    MetricsReport,
    conn_metric,
    evaluate_pair,
    grad_check,
    grad_metric,
    mse,
    sad,
)

__version__ = "0.1.0"
