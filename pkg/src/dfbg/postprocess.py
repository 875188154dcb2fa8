"""Label cleanup: Ising-model ICM smoothing and small-blob removal."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .core import as_probability_map

_EPS = 1e-12


@dataclass(frozen=True)
class MrfParams:
    coupling: float = 1.5
    max_iters: int = 5

    def __post_init__(self):
        if not (math.isfinite(self.coupling) and self.coupling >= 0):
            raise ValueError("MRF coupling must be finite and >= 0")
        if self.max_iters < 1:
            raise ValueError("MRF needs at least one sweep")


def _unaries(bg_posterior: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Energies of labeling each pixel background and foreground."""
    p = np.clip(bg_posterior, _EPS, None)
    q = np.clip(1.0 - bg_posterior, _EPS, None)
    return -np.log(p), -np.log(q)


def ising_energy(mask, bg_posterior, coupling: float) -> float:
    mask = np.asarray(mask, dtype=bool)
    e_bg, e_fg = _unaries(np.asarray(bg_posterior, dtype=np.float64))
    unary = float(np.sum(np.where(mask, e_fg, e_bg)))
    pairs = int(np.sum(mask[1:, :] != mask[:-1, :]) + np.sum(mask[:, 1:] != mask[:, :-1]))
    return unary + coupling * pairs


def mrf_smooth(bg_posterior, params: MrfParams = MrfParams(), return_energies: bool = False):
    """ICM on a 4-connected two-label Ising model; returns a foreground mask.

    Starts from the thresholded posterior and sweeps in raster order, keeping
    the current label on ties, until a sweep changes nothing or ``max_iters``
    sweeps are done. Energy never increases between sweeps.
    """
    post = as_probability_map(bg_posterior)
    H, W = post.shape
    e_bg, e_fg = _unaries(post)
    eb = e_bg.tolist()
    ef = e_fg.tolist()
    lab = (post < 0.5).tolist()
    lam = float(params.coupling)
    energies = [ising_energy(np.array(lab, dtype=bool), post, lam)]
    for _ in range(params.max_iters):
        changed = False
        for y in range(H):
            row = lab[y]
            up = lab[y - 1] if y > 0 else None
            down = lab[y + 1] if y < H - 1 else None
            for x in range(W):
                n_fg = 0
                n = 0
                if up is not None:
                    n_fg += up[x]
                    n += 1
                if down is not None:
                    n_fg += down[x]
                    n += 1
                if x > 0:
                    n_fg += row[x - 1]
                    n += 1
                if x < W - 1:
                    n_fg += row[x + 1]
                    n += 1
                cost_fg = ef[y][x] + lam * (n - n_fg)
                cost_bg = eb[y][x] + lam * n_fg
                cur = row[x]
                if cur and cost_bg < cost_fg:
                    row[x] = False
                    changed = True
                elif not cur and cost_fg < cost_bg:
                    row[x] = True
                    changed = True
        mask = np.array(lab, dtype=bool)
        energies.append(ising_energy(mask, post, lam))
        # local moves only ever lower the energy; allow float rounding slack
        if energies[-1] > energies[-2] + 1e-9 * max(1.0, abs(energies[-2])):
            raise AssertionError(f"ICM energy increased: {energies[-2]} -> {energies[-1]}")
        if not changed:
            break
    mask = np.array(lab, dtype=bool)
    return (mask, energies) if return_energies else mask


_EIGHT = np.ones((3, 3), dtype=int)


def remove_small_components(mask, min_size: int = 15) -> np.ndarray:
    """Drop 8-connected foreground components with fewer than ``min_size`` pixels."""
    mask = np.asarray(mask, dtype=bool)
    if min_size <= 1 or not mask.any():
        return mask.copy()
    labels, n = ndimage.label(mask, structure=_EIGHT)
    sizes = np.bincount(labels.ravel(), minlength=n + 1)
    keep = sizes >= min_size
    keep[0] = False
    return keep[labels]
