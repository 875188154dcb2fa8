"""Spatially varying priors propagated from the previous frame's posterior."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .core import as_probability_map


@dataclass(frozen=True)
class PriorParams:
    """Label transition probabilities and the posterior smoothing kernel.

    A pixel that was background stays background with ``bg_stay`` and splits
    the rest over (seen, unseen) foreground as ``bg_to_fg_split``. A foreground
    pixel becomes background with ``fg_to_bg`` and splits the rest as
    ``fg_stay_split``.
    """

    bg_stay: float = 0.95
    bg_to_fg_split: tuple[float, float] = (0.025, 0.025)
    fg_to_bg: float = 0.50
    fg_stay_split: tuple[float, float] = (0.25, 0.25)
    smooth_width: int = 7
    smooth_sigma: float = 1.75
    # optional boost of the unseen-foreground prior near the image border
    fu_border_width: int = 0
    fu_border_boost: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "bg_to_fg_split", tuple(float(v) for v in self.bg_to_fg_split))
        object.__setattr__(self, "fg_stay_split", tuple(float(v) for v in self.fg_stay_split))
        for row in ((self.bg_stay, *self.bg_to_fg_split), (self.fg_to_bg, *self.fg_stay_split)):
            if any(v < 0 for v in row) or not math.isclose(sum(row), 1.0, abs_tol=1e-12):
                raise ValueError(f"transition row {row} must be non-negative and sum to 1")
        if self.smooth_width < 1 or self.smooth_width % 2 == 0:
            raise ValueError("smoothing width must be a positive odd number")
        if not self.smooth_sigma > 0:
            raise ValueError("smoothing sigma must be positive")
        if self.fu_border_width < 0 or not self.fu_border_boost > 0:
            raise ValueError("invalid unseen-foreground border settings")


@dataclass
class PriorTriple:
    bg: np.ndarray
    fg: np.ndarray
    fu: np.ndarray


def smoothing_kernel(width: int = 7, sigma: float = 1.75) -> np.ndarray:
    r = width // 2
    k = np.exp(-np.arange(-r, r + 1, dtype=np.float64) ** 2 / (2.0 * sigma * sigma))
    k2 = np.outer(k, k)
    return k2 / k2.sum()


def smooth_posterior(posterior, params: PriorParams = PriorParams()) -> np.ndarray:
    """Gaussian-smooth a posterior map, renormalizing over in-image taps at borders."""
    p = as_probability_map(posterior)
    kernel = smoothing_kernel(params.smooth_width, params.smooth_sigma)
    num = ndimage.correlate(p, kernel, mode="constant", cval=0.0)
    den = ndimage.correlate(np.ones_like(p), kernel, mode="constant", cval=0.0)
    return np.clip(num / den, 0.0, 1.0)


def build_priors(smoothed_bg, params: PriorParams = PriorParams()) -> PriorTriple:
    """Mix the two transition rows by the smoothed background probability."""
    p = as_probability_map(smoothed_bg)
    q = 1.0 - p
    bg = p * params.bg_stay + q * params.fg_to_bg
    fg = p * params.bg_to_fg_split[0] + q * params.fg_stay_split[0]
    fu = p * params.bg_to_fg_split[1] + q * params.fg_stay_split[1]
    if params.fu_border_width > 0 and params.fu_border_boost != 1.0:
        band = np.zeros(p.shape, dtype=bool)
        b = params.fu_border_width
        band[:b, :] = band[-b:, :] = True
        band[:, :b] = band[:, -b:] = True
        fu = np.where(band, fu * params.fu_border_boost, fu)
        total = bg + fg + fu
        bg, fg, fu = bg / total, fg / total, fu / total
    return PriorTriple(bg, fg, fu)


def initial_priors(width: int, height: int, params: PriorParams = PriorParams()) -> PriorTriple:
    """Priors for the first frame, which is treated as all background."""
    return build_priors(np.ones((height, width)), params)


def uniform_priors(width: int, height: int, fu: bool = True) -> PriorTriple:
    """Spatially constant equal priors (the implicit prior of a ratio test)."""
    n = 3 if fu else 2
    v = np.full((height, width), 1.0 / n)
    return PriorTriple(v, v.copy(), v.copy() if fu else np.zeros((height, width)))
