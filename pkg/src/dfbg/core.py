"""Shared types: frames, probability maps, kernel configs, the sample history.

Frames are ``(H, W, 3)`` float64 arrays and probability maps are ``(H, W)``
float64 arrays. Pixel ``(x, y)`` lives at ``frame[y, x]``, so the flattened
row-major index is ``y * width + x``.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np


@dataclass(frozen=True)
class ColorSpace:
    """A color space and the number of distinct values on each channel."""

    name: str
    cardinalities: tuple[int, int, int]

    @property
    def volume(self) -> float:
        return float(np.prod(np.asarray(self.cardinalities, dtype=np.float64)))


RGB = ColorSpace("rgb", (256, 256, 256))
# L in [0, 100], a and b in [-128, 127], integer-quantized as in 8-bit LAB encodings.
LAB = ColorSpace("lab", (101, 256, 256))

COLOR_SPACES = {"rgb": RGB, "lab": LAB}


def as_frame(data, name: str = "frame") -> np.ndarray:
    """Validate and convert ``data`` to an ``(H, W, 3)`` float64 frame."""
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 2:
        arr = np.repeat(arr[:, :, None], 3, axis=2)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"{name} must have shape (H, W, 3), got {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must be at least 1x1")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def as_probability_map(data, shape: tuple[int, int] | None = None,
                       name: str = "probability map") -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if shape is not None and arr.shape != tuple(shape):
        raise ValueError(f"{name} has shape {arr.shape}, expected {tuple(shape)}")
    if not np.all((arr >= 0.0) & (arr <= 1.0)):
        raise ValueError(f"{name} values must lie in [0, 1]")
    return arr


def _check_variances(values: Sequence[float], n: int, what: str) -> tuple[float, ...]:
    out = tuple(float(v) for v in values)
    if len(out) != n:
        raise ValueError(f"{what} needs {n} entries, got {len(out)}")
    for v in out:
        if not (math.isfinite(v) and v > 0.0):
            raise ValueError(f"{what} entries must be positive and finite, got {out}")
    return out


@dataclass(frozen=True)
class KernelConfig:
    """Diagonal kernel variances (sigma squared, not sigma) for both models.

    Defaults are the standard DFB settings: color variance 45/4 for both
    models and spatial variance 3/4 (background) and 12/4 (foreground).
    """

    bg_spatial_var: tuple[float, float] = (3 / 4, 3 / 4)
    bg_color_var: tuple[float, float, float] = (45 / 4, 45 / 4, 45 / 4)
    fg_spatial_var: tuple[float, float] = (12 / 4, 12 / 4)
    fg_color_var: tuple[float, float, float] = (45 / 4, 45 / 4, 45 / 4)

    def __post_init__(self):
        object.__setattr__(self, "bg_spatial_var", _check_variances(self.bg_spatial_var, 2, "bg_spatial_var"))
        object.__setattr__(self, "bg_color_var", _check_variances(self.bg_color_var, 3, "bg_color_var"))
        object.__setattr__(self, "fg_spatial_var", _check_variances(self.fg_spatial_var, 2, "fg_spatial_var"))
        object.__setattr__(self, "fg_color_var", _check_variances(self.fg_color_var, 3, "fg_color_var"))


@dataclass
class ModelHistory:
    """Ring buffer of the last ``capacity`` frames and their background posteriors.

    Entries are ordered oldest first; the newest frame is ``entries[-1]``.
    """

    capacity: int = 10
    entries: deque = field(default_factory=deque)

    def __post_init__(self):
        if self.capacity < 1:
            raise ValueError("history capacity must be >= 1")
        self.entries = deque(self.entries, maxlen=self.capacity)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[tuple[np.ndarray, np.ndarray]]:
        return iter(self.entries)

    @property
    def shape(self) -> tuple[int, int] | None:
        if not self.entries:
            return None
        return self.entries[0][1].shape

    def append(self, frame, bg_posterior) -> None:
        frame = as_frame(frame)
        post = as_probability_map(bg_posterior, frame.shape[:2], "background posterior")
        if self.entries and post.shape != self.shape:
            raise ValueError(f"frame size {post.shape} does not match history size {self.shape}")
        # copies keep stored entries immutable with respect to the caller
        self.entries.append((frame.copy(), post.copy()))

    def stacked(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(samples (T, H, W, 3), bg_weights (T, H, W))``."""
        if not self.entries:
            raise ValueError("history is empty")
        samples = np.stack([f for f, _ in self.entries])
        weights = np.stack([p for _, p in self.entries])
        return samples, weights

    def clear(self) -> None:
        self.entries.clear()


def gaussian_pdf(d, variances) -> float | np.ndarray:
    """Zero-mean diagonal Gaussian density at offset ``d``.

    ``d`` may carry leading batch dimensions; the last axis must match the
    number of variances.
    """
    var = np.asarray(variances, dtype=np.float64)
    if var.ndim != 1 or np.any(~np.isfinite(var)) or np.any(var <= 0):
        raise ValueError(f"variances must be positive and finite, got {variances}")
    d = np.asarray(d, dtype=np.float64)
    if d.shape[-1:] != var.shape:
        raise ValueError(f"offset dimension {d.shape[-1:]} does not match {var.shape[0]} variances")
    norm = float(np.prod((2.0 * np.pi * var) ** -0.5))
    out = norm * np.exp(-0.5 * np.sum(d * d / var, axis=-1))
    return float(out) if out.ndim == 0 else out


# sRGB (IEC 61966-2-1) primaries to CIE XYZ, D65.
_RGB_TO_XYZ = np.array([
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
])
# white point as the image of RGB white so that white lands on a = b = 0
_D65 = _RGB_TO_XYZ.sum(axis=1)


def rgb_to_lab(frame) -> np.ndarray:
    """Convert an RGB frame with channels in [0, 255] to CIE LAB (D65)."""
    rgb = as_frame(frame) / 255.0
    linear = np.where(rgb <= 0.04045, rgb / 12.92, ((rgb + 0.055) / 1.055) ** 2.4)
    xyz = linear @ _RGB_TO_XYZ.T / _D65
    eps = (6 / 29) ** 3
    f = np.where(xyz > eps, np.cbrt(xyz), xyz / (3 * (6 / 29) ** 2) + 4 / 29)
    lab = np.empty_like(f)
    lab[..., 0] = 116.0 * f[..., 1] - 16.0
    lab[..., 1] = 500.0 * (f[..., 0] - f[..., 1])
    lab[..., 2] = 200.0 * (f[..., 1] - f[..., 2])
    # f(0) = 4/29 exactly in theory; snap the rounding residue on black
    lab[..., 0] = np.where(np.abs(lab[..., 0]) < 1e-9, 0.0, lab[..., 0])
    return lab


def convert_frame(frame, color_space: ColorSpace | str) -> np.ndarray:
    name = color_space if isinstance(color_space, str) else color_space.name
    if name == "rgb":
        return as_frame(frame)
    if name == "lab":
        return rgb_to_lab(frame)
    raise ValueError(f"unknown color space {name!r}")
