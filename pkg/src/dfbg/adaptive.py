"""Per-pixel adaptive kernel variances for the background likelihood.

Every (spatial, color) candidate pair is evaluated at each pixel and the one
giving the highest likelihood wins; ties go to the lowest
``(spatial_idx, color_idx)``. :func:`cached_step` reuses last frame's choice
and only re-adapts pixels whose posterior under that choice is not confident.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .core import ModelHistory, as_frame
from .inference import posterior
from .likelihood import LikelihoodField, kernel_sums, normalize_density, spatial_weight_table
from .priors import PriorTriple


def _sorted_unique(values, n: int, what: str) -> tuple:
    out = sorted({tuple(float(v) for v in item) for item in values})
    if not out:
        raise ValueError(f"{what} candidate list is empty")
    for item in out:
        if len(item) != n or any(not v > 0 for v in item):
            raise ValueError(f"bad {what} candidate {item}")
    return tuple(out)


@dataclass(frozen=True)
class VarianceCandidates:
    spatial: tuple = ((1 / 4, 1 / 4), (3 / 4, 3 / 4), (12 / 4, 12 / 4), (48 / 4, 48 / 4))
    color: tuple = ((15 / 4,) * 3, (45 / 4,) * 3, (135 / 4,) * 3)

    def __post_init__(self):
        object.__setattr__(self, "spatial", _sorted_unique(self.spatial, 2, "spatial"))
        object.__setattr__(self, "color", _sorted_unique(self.color, 3, "color"))

    @property
    def size(self) -> int:
        return len(self.spatial) * len(self.color)


@dataclass
class VarianceField:
    spatial_idx: np.ndarray
    color_idx: np.ndarray
    valid: np.ndarray

    @classmethod
    def empty(cls, shape) -> "VarianceField":
        return cls(np.zeros(shape, dtype=np.int64), np.zeros(shape, dtype=np.int64),
                   np.zeros(shape, dtype=bool))

    def copy(self) -> "VarianceField":
        return VarianceField(self.spatial_idx.copy(), self.color_idx.copy(), self.valid.copy())


def _adapt_pixels(samples, weights, frame, candidates, pixels, global_norm, workers):
    tables = [spatial_weight_table(v) for v in candidates.spatial]
    num, mass = kernel_sums(samples, weights, frame, tables, candidates.color, pixels, workers)
    S, C, n = num.shape
    if global_norm is None:
        dens = normalize_density(num, mass[:, None, :])
    else:
        dens = normalize_density(num, np.full_like(mass[:, None, :], global_norm))
    flat = dens.reshape(S * C, n)
    best = np.argmax(flat, axis=0)
    return flat[best, np.arange(n)], best // C, best % C


def _history_arrays(history: ModelHistory, frame):
    if len(history) == 0:
        raise ValueError("adaptive likelihood needs a non-empty history")
    if history.shape != frame.shape[:2]:
        raise ValueError("frame size does not match history size")
    return history.stacked()


def adapt_background_likelihood(history: ModelHistory, frame,
                                candidates: VarianceCandidates = VarianceCandidates(),
                                joint: bool = False, workers=None):
    """Best background likelihood over the candidate grid, per pixel.

    With ``joint=True`` the densities use the joint model's global normalizer.

    Returns ``(likelihood (H, W), VarianceField)``.
    """
    frame = as_frame(frame)
    samples, bg = _history_arrays(history, frame)
    H, W = frame.shape[:2]
    norm = float(np.sum(bg)) if joint else None
    if joint and norm <= 0:
        return np.zeros((H, W)), VarianceField.empty((H, W))
    dens, s_idx, c_idx = _adapt_pixels(samples, bg, frame, candidates, None, norm, workers)
    field = VarianceField(s_idx.reshape(H, W), c_idx.reshape(H, W), np.ones((H, W), dtype=bool))
    return dens.reshape(H, W), field


def evaluate_choices(history: ModelHistory, frame, candidates: VarianceCandidates,
                     field: VarianceField, pixels=None, workers=None) -> np.ndarray:
    """Background likelihood using each pixel's recorded candidate pair.

    Returns a flat array over ``pixels`` (all pixels when None).
    """
    frame = as_frame(frame)
    samples, bg = _history_arrays(history, frame)
    H, W = frame.shape[:2]
    pixels = np.arange(H * W) if pixels is None else np.asarray(pixels, dtype=np.intp)
    s_flat = field.spatial_idx.reshape(-1)[pixels]
    c_flat = field.color_idx.reshape(-1)[pixels]
    out = np.zeros(pixels.shape[0])
    for s in np.unique(s_flat):
        table = spatial_weight_table(candidates.spatial[s])
        for c in np.unique(c_flat[s_flat == s]):
            sel = (s_flat == s) & (c_flat == c)
            num, mass = kernel_sums(samples, bg, frame, [table], [candidates.color[c]],
                                    pixels[sel], workers)
            out[sel] = normalize_density(num[0, 0], mass[0])
    return out


def cached_step(history: ModelHistory, frame, candidates: VarianceCandidates,
                cache: VarianceField, confidence_band=(0.2, 0.8), *,
                fg_likelihood, fu_likelihood, priors: PriorTriple, workers=None):
    """Classify with cached variances and re-adapt only the unconfident pixels.

    A pixel is unconfident when its background posterior under the cached
    choice lies in the closed band ``[lo, hi]``; a band with ``lo >= hi`` is
    disabled. Pixels with invalid cache entries are always re-adapted.

    Returns ``(likelihood (H, W), updated VarianceField, stats)``.
    """
    frame = as_frame(frame)
    H, W = frame.shape[:2]
    if cache.valid.shape != (H, W):
        raise ValueError("variance cache size does not match the frame")
    lo, hi = (float(v) for v in confidence_band)
    t0 = time.perf_counter()
    lik = np.zeros(H * W)
    valid = cache.valid.reshape(-1)
    cached_px = np.flatnonzero(valid)
    if cached_px.size:
        lik[cached_px] = evaluate_choices(history, frame, candidates, cache, cached_px, workers)
    redo = ~valid
    if lo < hi and cached_px.size:
        post = posterior(LikelihoodField(lik.reshape(H, W), fg_likelihood, fu_likelihood), priors)
        pb = post.bg_posterior.reshape(-1)
        redo |= valid & (pb >= lo) & (pb <= hi)
    t1 = time.perf_counter()

    new = cache.copy()
    redo_px = np.flatnonzero(redo)
    if redo_px.size:
        samples, bg = _history_arrays(history, frame)
        dens, s_idx, c_idx = _adapt_pixels(samples, bg, frame, candidates, redo_px, None, workers)
        lik[redo_px] = dens
        new.spatial_idx.reshape(-1)[redo_px] = s_idx
        new.color_idx.reshape(-1)[redo_px] = c_idx
        new.valid.reshape(-1)[redo_px] = True
    t2 = time.perf_counter()
    stats = {
        "readapted": int(redo_px.size),
        "readapt_fraction": redo_px.size / float(H * W),
        "cached_seconds": t1 - t0,
        "adapt_seconds": t2 - t1,
    }
    return lik.reshape(H, W), new, stats
