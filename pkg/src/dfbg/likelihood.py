"""Spatially smoothed KDE likelihood fields.

The background likelihood at pixel ``x`` for its current color ``c`` is

    sum_i sum_D G(c - b[t-i, x+D]; Sc) * G(D; Ss) * w[t-i, x+D]
    -----------------------------------------------------------
              sum_i sum_D G(D; Ss) * w[t-i, x+D]

where ``w`` is the stored background posterior (foreground posterior for the
seen-foreground field). The neighborhood is truncated at image borders and
the normalizer only sums the surviving terms.

All fields go through :func:`kernel_sums`, which walks the spatial offsets of
the largest table in row-major order and accumulates numerators and masses
for every (spatial, color) candidate pair at once. Because a single pair and
a candidate grid perform the same floating point operations per pixel, the
adaptive and fixed-variance paths agree bit for bit.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import ColorSpace, KernelConfig, ModelHistory, RGB, as_frame

# densities below this are treated as exact zeros
DENSITY_FLOOR = 1e-300


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("DFBG_WORKERS", "1")))
    except ValueError:
        return 1


def neighborhood_radius(spatial_var) -> tuple[int, int]:
    """``(rx, ry)`` covering three standard deviations, at least one pixel."""
    vx, vy = (float(v) for v in spatial_var)
    if vx <= 0 or vy <= 0:
        raise ValueError("spatial variances must be positive")
    return max(1, math.ceil(3.0 * math.sqrt(vx))), max(1, math.ceil(3.0 * math.sqrt(vy)))


@dataclass(frozen=True)
class SpatialWeightTable:
    """Values of the spatial Gaussian ``G(D; 0, Ss)`` over a rectangular window.

    ``weights[dy + ry, dx + rx]`` is the weight of offset ``(dx, dy)``.
    """

    radius: tuple[int, int]
    weights: np.ndarray

    @property
    def rx(self) -> int:
        return self.radius[0]

    @property
    def ry(self) -> int:
        return self.radius[1]

    def weight(self, dx: int, dy: int) -> float:
        return float(self.weights[dy + self.ry, dx + self.rx])

    def covers(self, dx: int, dy: int) -> bool:
        return abs(dx) <= self.rx and abs(dy) <= self.ry


def spatial_weight_table(spatial_var, radius: tuple[int, int] | None = None) -> SpatialWeightTable:
    """Tabulate the spatial kernel. ``radius=(0, 0)`` gives a pixelwise model."""
    vx, vy = (float(v) for v in spatial_var)
    if vx <= 0 or vy <= 0:
        raise ValueError("spatial variances must be positive")
    rx, ry = neighborhood_radius((vx, vy)) if radius is None else (int(radius[0]), int(radius[1]))
    dy, dx = np.mgrid[-ry:ry + 1, -rx:rx + 1].astype(np.float64)
    norm = 1.0 / (2.0 * math.pi * math.sqrt(vx * vy))
    weights = norm * np.exp(-0.5 * (dx * dx / vx + dy * dy / vy))
    weights.setflags(write=False)
    return SpatialWeightTable((rx, ry), weights)


def _color_constants(color_var) -> tuple[np.ndarray, float]:
    var = np.asarray(color_var, dtype=np.float64)
    if var.shape != (3,) or np.any(var <= 0):
        raise ValueError(f"color variance must be three positive values, got {color_var}")
    return 0.5 / var, float(np.prod((2.0 * math.pi * var) ** -0.5))


class _Window:
    """Shifted access to the zero-padded history for a batch of pixels.

    Either a band of full rows (strided slices, no copies) or an arbitrary
    set of flat pixel indices (gathers). Both give every pixel the same
    arithmetic, so results do not depend on how pixels are batched.
    """

    def __init__(self, planes, weights, Rx, Ry, W, rows=None, pixels=None):
        self.planes = planes  # three (T, Hp, Wp) channel arrays
        self.weights = weights  # (T, Hp, Wp)
        self.Rx, self.Ry, self.W = Rx, Ry, W
        self.rows = rows
        if pixels is not None:
            ys, xs = np.divmod(pixels, W)
            pad_w = W + 2 * Rx
            self.base = (ys + Ry) * pad_w + (xs + Rx)
            self.pad_w = pad_w
            T = weights.shape[0]
            self.flat_planes = [p.reshape(T, -1) for p in planes]
            self.flat_weights = weights.reshape(T, -1)

    def take(self, dy, dx):
        if self.rows is not None:
            y0, y1 = self.rows
            ys = slice(self.Ry + dy + y0, self.Ry + dy + y1)
            xs = slice(self.Rx + dx, self.Rx + dx + self.W)
            T = self.weights.shape[0]
            return ([p[:, ys, xs].reshape(T, -1) for p in self.planes],
                    self.weights[:, ys, xs].reshape(T, -1))
        idx = self.base + (dy * self.pad_w + dx)
        return [p[:, idx] for p in self.flat_planes], self.flat_weights[:, idx]


def _accumulate(q, window, tables, color_consts, Rx, Ry):
    """Numerators ``(S, C, n)`` and masses ``(S, n)`` for one batch of pixels."""
    n = q[0].shape[0]
    num = np.zeros((len(tables), len(color_consts), n))
    mass = np.zeros((len(tables), n))
    for dy in range(-Ry, Ry + 1):
        for dx in range(-Rx, Rx + 1):
            active = [k for k, t in enumerate(tables) if t.covers(dx, dy)]
            if not active:
                continue
            planes, ps = window.take(dy, dx)
            m = ps.sum(axis=0)
            d2 = []
            for qc, sc in zip(q, planes):
                d = qc - sc
                d2.append(d * d)
            color_sums = []
            for inv2, norm in color_consts:
                e = d2[0] * inv2[0] + d2[1] * inv2[1] + d2[2] * inv2[2]
                g = norm * np.exp(-e)
                color_sums.append((g * ps).sum(axis=0))
            for k in active:
                w = tables[k].weight(dx, dy)
                mass[k] += w * m
                for c, cs in enumerate(color_sums):
                    num[k, c] += w * cs
    return num, mass


def kernel_sums(samples: np.ndarray, weights: np.ndarray, frame: np.ndarray,
                tables: Sequence[SpatialWeightTable], color_vars: Sequence,
                pixels: np.ndarray | None = None,
                workers: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Smoothed-KDE numerators and masses for every (table, color variance) pair.

    Parameters
    ----------
    samples : (T, H, W, 3) stored colors
    weights : (T, H, W) per-sample label probabilities
    frame : (H, W, 3) query colors
    tables, color_vars : candidate spatial tables and color variances
    pixels : optional flat row-major indices to evaluate; all pixels if None

    Returns
    -------
    num : (S, C, n) and mass : (S, n), with ``n`` the number of evaluated pixels.
    """
    samples = np.asarray(samples, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    T, H, W, _ = samples.shape
    if weights.shape != (T, H, W) or frame.shape != (H, W, 3):
        raise ValueError("history, weights and frame sizes disagree")
    Rx = max(t.rx for t in tables)
    Ry = max(t.ry for t in tables)
    # zero-weight padding contributes exact zeros, which equals truncation
    planes = [np.pad(samples[..., c], ((0, 0), (Ry, Ry), (Rx, Rx))) for c in range(3)]
    p_pad = np.pad(weights, ((0, 0), (Ry, Ry), (Rx, Rx)))
    consts = [_color_constants(cv) for cv in color_vars]
    qplanes = [np.ascontiguousarray(frame[..., c]).reshape(-1) for c in range(3)]
    workers = default_workers() if workers is None else max(1, int(workers))

    if pixels is None:
        bounds = np.linspace(0, H, min(workers, H) + 1).astype(int)
        jobs = []
        for y0, y1 in zip(bounds[:-1], bounds[1:]):
            if y1 > y0:
                win = _Window(planes, p_pad, Rx, Ry, W, rows=(y0, y1))
                jobs.append(([q[y0 * W:y1 * W] for q in qplanes], win))
    else:
        pixels = np.asarray(pixels, dtype=np.intp)
        bounds = np.linspace(0, pixels.shape[0], workers + 1).astype(int)
        jobs = []
        for a, b in zip(bounds[:-1], bounds[1:]):
            if b > a or pixels.shape[0] == 0:
                sel = pixels[a:b]
                jobs.append(([q[sel] for q in qplanes], _Window(planes, p_pad, Rx, Ry, W, pixels=sel)))
                if pixels.shape[0] == 0:
                    break

    def run(job):
        q, win = job
        return _accumulate(q, win, tables, consts, Rx, Ry)

    if len(jobs) == 1:
        return run(jobs[0])
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(run, jobs))
    return (np.concatenate([p[0] for p in parts], axis=-1),
            np.concatenate([p[1] for p in parts], axis=-1))


def normalize_density(num: np.ndarray, mass: np.ndarray) -> np.ndarray:
    """``num / mass`` with zero-mass pixels and underflowing values set to 0."""
    out = np.zeros(np.broadcast_shapes(num.shape, mass.shape))
    np.divide(num, mass, out=out, where=mass > 0)
    out[out < DENSITY_FLOOR] = 0.0
    return out


def smoothed_kde(samples, weights, frame, spatial_var, color_var, radius=None,
                 workers=None) -> tuple[np.ndarray, np.ndarray]:
    """Per-pixel smoothed KDE density and its normalizer, both ``(H, W)``.

    A normalizer of 0 flags a pixel with no label mass in its neighborhood
    history; its density is defined as 0.
    """
    frame = as_frame(frame)
    table = spatial_weight_table(spatial_var, radius)
    num, mass = kernel_sums(samples, weights, frame, [table], [color_var], workers=workers)
    H, W = frame.shape[:2]
    return normalize_density(num[0, 0], mass[0]).reshape(H, W), mass[0].reshape(H, W)


def _check_history(history: ModelHistory, frame: np.ndarray) -> None:
    if len(history) == 0:
        raise ValueError("likelihood needs a non-empty history")
    if history.shape != frame.shape[:2]:
        raise ValueError(f"frame size {frame.shape[:2]} does not match history size {history.shape}")


def background_likelihood(history: ModelHistory, frame, cfg: KernelConfig = KernelConfig(),
                          radius=None, workers=None) -> np.ndarray:
    """Smoothed KDE background likelihood of each pixel's current color."""
    frame = as_frame(frame)
    _check_history(history, frame)
    samples, bg = history.stacked()
    density, _ = smoothed_kde(samples, bg, frame, cfg.bg_spatial_var, cfg.bg_color_var,
                              radius, workers)
    return density


def foreground_likelihood(history: ModelHistory, frame, cfg: KernelConfig = KernelConfig(),
                          radius=None, workers=None) -> np.ndarray:
    """Seen-foreground likelihood; samples are weighted by ``1 - bg posterior``."""
    frame = as_frame(frame)
    _check_history(history, frame)
    samples, bg = history.stacked()
    density, _ = smoothed_kde(samples, 1.0 - bg, frame, cfg.fg_spatial_var, cfg.fg_color_var,
                              radius, workers)
    return density


def unseen_foreground_likelihood(color_space: ColorSpace = RGB) -> float:
    """Uniform density over the color space: ``1 / (R * G * B)``."""
    return 1.0 / color_space.volume


@dataclass
class LikelihoodField:
    bg: np.ndarray
    fg_seen: np.ndarray
    fg_unseen: np.ndarray

    def __post_init__(self):
        self.bg = np.asarray(self.bg, dtype=np.float64)
        shape = self.bg.shape
        self.fg_seen = np.asarray(self.fg_seen, dtype=np.float64)
        self.fg_unseen = np.broadcast_to(np.asarray(self.fg_unseen, dtype=np.float64), shape)
        if self.fg_seen.shape != shape:
            raise ValueError("likelihood rasters must share a shape")
        for arr in (self.bg, self.fg_seen, self.fg_unseen):
            if not np.all(np.isfinite(arr)) or np.any(arr < 0):
                raise ValueError("likelihoods must be finite and non-negative")
