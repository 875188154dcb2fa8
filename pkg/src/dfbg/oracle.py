"""Brute-force likelihood oracle.

Plain nested loops over (pixel, history frame, offset) with inline Gaussians.
Deliberately imports nothing from the production likelihood code so that it
stays an independent check. Only meant for small instances.
"""
from __future__ import annotations

import math

import numpy as np


def _radius(var: float) -> int:
    return max(1, math.ceil(3.0 * math.sqrt(var)))


def brute_force_likelihood(samples, bg_weights, frame, spatial_var, color_var,
                           label: str = "bg", model: str = "dfb") -> np.ndarray:
    """Evaluate the smoothed KDE (``dfb``) or joint (``jkde``) likelihood.

    ``samples`` is a sequence of T frames ``(H, W, 3)``, ``bg_weights`` the
    matching background posteriors. For ``label='fg'`` each sample is weighted
    by ``1 - bg``.
    """
    samples = [np.asarray(s, dtype=float).tolist() for s in samples]
    weights = [np.asarray(w, dtype=float).tolist() for w in bg_weights]
    query = np.asarray(frame, dtype=float).tolist()
    if label == "fg":
        weights = [[[1.0 - v for v in row] for row in w] for w in weights]
    elif label != "bg":
        raise ValueError(label)
    if model not in ("dfb", "jkde"):
        raise ValueError(model)

    H, W = len(query), len(query[0])
    sx, sy = float(spatial_var[0]), float(spatial_var[1])
    c0, c1, c2 = (float(v) for v in color_var)
    rx, ry = _radius(sx), _radius(sy)
    color_norm = 1.0 / math.sqrt((2 * math.pi) ** 3 * c0 * c1 * c2)
    spatial_norm = 1.0 / (2 * math.pi * math.sqrt(sx * sy))

    global_k = 0.0
    if model == "jkde":
        for w in weights:
            for row in w:
                for v in row:
                    global_k += v

    out = np.zeros((H, W))
    for y in range(H):
        for x in range(W):
            c = query[y][x]
            total = 0.0
            local_k = 0.0
            for i in range(len(samples)):
                for dy in range(-ry, ry + 1):
                    yy = y + dy
                    if yy < 0 or yy >= H:
                        continue
                    for dx in range(-rx, rx + 1):
                        xx = x + dx
                        if xx < 0 or xx >= W:
                            continue
                        b = samples[i][yy][xx]
                        wgt = weights[i][yy][xx]
                        gs = spatial_norm * math.exp(-(dx * dx / (2 * sx) + dy * dy / (2 * sy)))
                        e = ((c[0] - b[0]) ** 2 / (2 * c0) + (c[1] - b[1]) ** 2 / (2 * c1)
                             + (c[2] - b[2]) ** 2 / (2 * c2))
                        gc = color_norm * math.exp(-e)
                        total += gc * gs * wgt
                        local_k += gs * wgt
            k = local_k if model == "dfb" else global_k
            val = total / k if k > 0 else 0.0
            out[y, x] = val if val >= 1e-300 else 0.0
    return out


def relative_error(a, b) -> float:
    """Max elementwise ``|a - b| / |b|``; entries where both are 0 count as exact."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    diff = np.abs(a - b)
    scale = np.abs(b)
    both_zero = (diff == 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(both_zero, 0.0, diff / scale)
    return float(np.max(rel)) if rel.size else 0.0
