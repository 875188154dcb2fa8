"""Joint domain-range (jKDE) baseline and the likelihood-ratio classifier.

The joint model is a single density over (position, color) for the whole
image. Its numerator matches the distribution-field model term for term, but
the normalizer is one global sum of sample weights, with no spatial kernel
factor. That global normalizer is what makes per-pixel decisions depend on
the rest of the image.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .core import ColorSpace, KernelConfig, ModelHistory, RGB, as_frame
from .likelihood import DENSITY_FLOOR, kernel_sums, spatial_weight_table

log = logging.getLogger(__name__)


@dataclass
class JointModel:
    history: ModelHistory
    cfg: KernelConfig = KernelConfig()

    @property
    def image_extent(self) -> tuple[int, int]:
        h, w = self.history.shape
        return w, h


def joint_normalizer(weights: np.ndarray) -> float:
    """Global normalizer: the total label weight over all samples."""
    return float(np.sum(weights))


def joint_likelihood(model: JointModel, frame, label: str = "bg", workers=None) -> np.ndarray:
    """Joint density ``P(c, x | label)`` at every pixel for its current color."""
    frame = as_frame(frame)
    if len(model.history) == 0:
        raise ValueError("joint likelihood needs a non-empty history")
    if model.history.shape != frame.shape[:2]:
        raise ValueError("frame size does not match history size")
    samples, bg = model.history.stacked()
    if label == "bg":
        weights, spatial_var, color_var = bg, model.cfg.bg_spatial_var, model.cfg.bg_color_var
    elif label == "fg":
        weights, spatial_var, color_var = 1.0 - bg, model.cfg.fg_spatial_var, model.cfg.fg_color_var
    else:
        raise ValueError(f"label must be 'bg' or 'fg', got {label!r}")
    K = joint_normalizer(weights)
    H, W = frame.shape[:2]
    if K <= 0:
        log.warning("joint %s model has zero total weight; likelihood is identically 0", label)
        return np.zeros((H, W))
    table = spatial_weight_table(spatial_var)
    num, _ = kernel_sums(samples, weights, frame, [table], [color_var], workers=workers)
    out = (num[0, 0] / K).reshape(H, W)
    out[out < DENSITY_FLOOR] = 0.0
    return out


def joint_unseen_likelihood(width: int, height: int, color_space: ColorSpace = RGB) -> float:
    """Uniform density over the five-dimensional (position, color) space."""
    return 1.0 / (width * height * color_space.volume)


def jkde_foreground_likelihood(model: JointModel, frame, mix: float = 0.5,
                               color_space: ColorSpace = RGB, workers=None) -> np.ndarray:
    """Seen joint foreground density mixed with the 5-D uniform density."""
    if not 0.0 <= mix <= 1.0:
        raise ValueError("mixing weight must lie in [0, 1]")
    w, h = model.image_extent
    seen = joint_likelihood(model, frame, "fg", workers=workers)
    return (1.0 - mix) * seen + mix * joint_unseen_likelihood(w, h, color_space)


def ratio_classify(bg_lik, fg_lik, threshold: float = 1.0) -> np.ndarray:
    """Foreground where ``fg_lik > threshold * bg_lik``; ties go to background."""
    if not threshold > 0:
        raise ValueError("ratio threshold must be positive")
    bg_lik = np.asarray(bg_lik, dtype=np.float64)
    fg_lik = np.asarray(fg_lik, dtype=np.float64)
    if bg_lik.shape != fg_lik.shape:
        raise ValueError("likelihood rasters must share a shape")
    return fg_lik > threshold * bg_lik
