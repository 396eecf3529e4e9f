"""Adversarial patch toolkit for monocular depth estimation.

Thin Python wrapper over the C++ core. Images are float64 arrays of shape
(H, W, 3) in [0, 1]; depth maps are (H, W); masks are boolean (H, W).
"""

from ._core import (
    DepthModel,
    Error,
    affected_ratio,
    available_models,
    depth_error,
    gaussian_noise,
    jpeg_compress,
    load_patch,
    make_model,
    median_blur,
    parse_config,
    project,
    run_attack,
    run_eval,
    ssim,
    synthetic_scenes,
    tv_loss,
    tv_loss_gradient,
)

__all__ = [
    "DepthModel",
    "Error",
    "affected_ratio",
    "available_models",
    "depth_error",
    "gaussian_noise",
    "jpeg_compress",
    "load_patch",
    "make_model",
    "median_blur",
    "parse_config",
    "project",
    "run_attack",
    "run_eval",
    "ssim",
    "synthetic_scenes",
    "tv_loss",
    "tv_loss_gradient",
]
