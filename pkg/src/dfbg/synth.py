"""Synthetic videos with exact ground truth.

* ``constant``: a static random texture, no foreground.
* ``spatialJitter``: pixels inside the region are shuffled each frame by at
  most ``magnitude`` pixels per axis (a permutation, so the region's color
  histogram is unchanged).
* ``colorNoise``: uniform integer noise in ``[-magnitude, magnitude]`` added
  to each channel inside the region, clamped to [0, 255].
* ``movingSquare``: a solid square sweeps left to right over the static
  texture at ``magnitude`` px/frame, re-entering on a new row each pass.

All frames hold integer values in [0, 255] so they survive 8-bit image files.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .oracle import brute_force_likelihood  # noqa: F401  (re-exported oracle)

KINDS = ("constant", "spatialJitter", "colorNoise", "movingSquare")
SQUARE_COLOR = (240.0, 30.0, 30.0)


@dataclass(frozen=True)
class SynthSpec:
    kind: str = "movingSquare"
    size: tuple[int, int] = (64, 64)  # (width, height)
    frames: int = 100
    region: tuple[int, int, int, int] | None = None  # (x0, y0, x1, y1), exclusive ends
    magnitude: float = 2
    seed: int = 0
    square_size: int = 10

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown synthetic kind {self.kind!r}; choose from {KINDS}")
        w, h = self.size
        if w < 1 or h < 1 or self.frames < 1:
            raise ValueError("size and frame count must be positive")
        x0, y0, x1, y1 = self.bounds
        if not (0 <= x0 < x1 <= w and 0 <= y0 < y1 <= h):
            raise ValueError(f"region {self.bounds} outside a {w}x{h} image")
        if self.kind == "movingSquare" and not (0 < self.square_size <= min(w, h)):
            raise ValueError("square must fit in the image")

    @property
    def bounds(self) -> tuple[int, int, int, int]:
        if self.region is not None:
            return tuple(int(v) for v in self.region)
        w, h = self.size
        return w // 3, h // 3, w - w // 3, h - h // 3


def texture(width: int, height: int, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, 256, size=(height, width, 3)).astype(np.float64)


def _jitter(patch: np.ndarray, radius: int, rng: np.random.Generator) -> np.ndarray:
    """Shuffle pixels inside random (radius+1)-sized blocks tiling the patch."""
    h, w = patch.shape[:2]
    b = radius + 1
    out = patch.copy()
    oy, ox = rng.integers(0, b, size=2)
    for y0 in range(-int(oy), h, b):
        for x0 in range(-int(ox), w, b):
            ys = slice(max(y0, 0), min(y0 + b, h))
            xs = slice(max(x0, 0), min(x0 + b, w))
            block = patch[ys, xs].reshape(-1, 3)
            if len(block) > 1:
                out[ys, xs] = block[rng.permutation(len(block))].reshape(out[ys, xs].shape)
    return out


def square_position(spec: SynthSpec, t: int, rows: np.ndarray) -> tuple[int, int]:
    w, _ = spec.size
    side = spec.square_size
    period = w + side
    travelled = int(round(t * spec.magnitude))
    k = travelled // period
    return travelled % period - side, int(rows[k % len(rows)])


def generate(spec: SynthSpec) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Return ``(frames, truth)``; frames ``(H, W, 3)`` floats, truth boolean masks."""
    w, h = spec.size
    rng = np.random.default_rng(spec.seed)
    base = texture(w, h, rng)
    x0, y0, x1, y1 = spec.bounds
    frames, truth = [], []
    rows = rng.integers(0, h - spec.square_size + 1, size=64) if spec.kind == "movingSquare" else None
    for t in range(spec.frames):
        frame = base.copy()
        mask = np.zeros((h, w), dtype=bool)
        if spec.kind == "spatialJitter":
            frame[y0:y1, x0:x1] = _jitter(base[y0:y1, x0:x1], int(spec.magnitude), rng)
        elif spec.kind == "colorNoise":
            m = int(spec.magnitude)
            noise = rng.integers(-m, m + 1, size=(y1 - y0, x1 - x0, 3))
            frame[y0:y1, x0:x1] = np.clip(base[y0:y1, x0:x1] + noise, 0, 255)
        elif spec.kind == "movingSquare":
            sx, sy = square_position(spec, t, rows)
            xs = slice(max(sx, 0), min(sx + spec.square_size, w))
            ys = slice(sy, sy + spec.square_size)
            frame[ys, xs] = SQUARE_COLOR
            mask[ys, xs] = True
        frames.append(frame)
        truth.append(mask)
    return frames, truth


def embed(frames, truth, canvas: tuple[int, int], seed: int = 1, origin=(0, 0)):
    """Place a video on a larger canvas of static random texture."""
    w, h = canvas
    fh, fw = frames[0].shape[:2]
    ox, oy = origin
    if ox + fw > w or oy + fh > h:
        raise ValueError("video does not fit on the canvas")
    pad = texture(w, h, np.random.default_rng(seed))
    out_f, out_t = [], []
    for f, m in zip(frames, truth):
        big = pad.copy()
        big[oy:oy + fh, ox:ox + fw] = f
        mask = np.zeros((h, w), dtype=bool)
        mask[oy:oy + fh, ox:ox + fw] = m
        out_f.append(big)
        out_t.append(mask)
    return out_f, out_t
