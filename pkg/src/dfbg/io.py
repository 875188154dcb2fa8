"""Image-sequence ingestion and result files.

A sequence is a directory of image files read in filename order. Frame ids
come from the last run of digits in each filename (falling back to the
position in the sorted listing), which lets sparse ground-truth directories
line up with their input frames.
"""
from __future__ import annotations

import json
import re
from pathlib import Path

import numpy as np
from PIL import Image

from .evaluation import truth_from_gray

IMAGE_SUFFIXES = {".png", ".ppm", ".pgm", ".pnm", ".bmp", ".jpg", ".jpeg", ".tif", ".tiff"}


class DataError(Exception):
    """Unreadable, missing or inconsistent input data."""


def _frame_id(path: Path, position: int) -> int:
    digits = re.findall(r"\d+", path.stem)
    return int(digits[-1]) if digits else position


def list_images(directory) -> list[Path]:
    d = Path(directory)
    if not d.is_dir():
        raise DataError(f"not a directory: {d}")
    return sorted(p for p in d.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)


def read_image(path) -> np.ndarray:
    """Read an 8-bit grayscale or color image as an ``(H, W, 3)`` float frame."""
    try:
        with Image.open(path) as im:
            if im.mode in ("L", "P", "1"):
                arr = np.asarray(im.convert("L"), dtype=np.float64)
                return np.repeat(arr[:, :, None], 3, axis=2)
            return np.asarray(im.convert("RGB"), dtype=np.float64)
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot read image {path}: {exc}") from None


def load_sequence(directory, with_ids: bool = False):
    """Load every image in ``directory`` in name order.

    Returns a list of frames, or of ``(frame_id, frame)`` pairs with
    ``with_ids=True``.
    """
    paths = list_images(directory)
    if not paths:
        raise DataError(f"no frames found in {directory}")
    out = []
    shape = None
    for i, p in enumerate(paths):
        frame = read_image(p)
        if shape is None:
            shape = frame.shape
        elif frame.shape != shape:
            raise DataError(f"{p} is {frame.shape[1]}x{frame.shape[0]}, expected "
                            f"{shape[1]}x{shape[0]}")
        out.append((_frame_id(p, i), frame) if with_ids else frame)
    return out


def load_truth(directory) -> dict[int, np.ndarray]:
    """Ground-truth masks keyed by frame id (0 background, 255 foreground)."""
    paths = list_images(directory)
    if not paths:
        raise DataError(f"no ground-truth masks found in {directory}")
    truth = {}
    for i, p in enumerate(paths):
        try:
            with Image.open(p) as im:
                gray = np.asarray(im.convert("L"))
        except OSError as exc:
            raise DataError(f"cannot read mask {p}: {exc}") from None
        try:
            truth[_frame_id(p, i)] = truth_from_gray(gray, str(p))
        except ValueError as exc:
            raise DataError(str(exc)) from None
    return truth


def load_masks(directory) -> dict[int, np.ndarray]:
    """Binary masks as written by :func:`write_mask` (nonzero is foreground)."""
    return {fid: f[..., 0] > 0 for fid, f in load_sequence(directory, with_ids=True)}


def write_frame(path, frame) -> None:
    arr = np.asarray(frame)
    if np.any(arr < 0) or np.any(arr > 255) or np.any(arr != np.round(arr)):
        raise ValueError("frames written as 8-bit images must hold integers in [0, 255]")
    Image.fromarray(arr.astype(np.uint8)).save(path)


def write_mask(path, mask) -> None:
    Image.fromarray(np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)).save(path)


def write_posterior(path, bg_posterior) -> None:
    """16-bit grayscale PNG: 0 is probability 0, 65535 is probability 1."""
    p = np.clip(np.asarray(bg_posterior, dtype=np.float64), 0.0, 1.0)
    Image.fromarray(np.round(p * 65535.0).astype(np.uint16)).save(path)


def read_posterior(path) -> np.ndarray:
    with Image.open(path) as im:
        return np.asarray(im, dtype=np.float64) / 65535.0


def write_sequence(directory, frames, truth=None, start: int = 0) -> None:
    """Write ``frames`` (and optional truth masks) in the dataset layout.

    ``directory/input/frame_NNNNNN.png`` and ``directory/truth/frame_NNNNNN.png``.
    """
    d = Path(directory)
    (d / "input").mkdir(parents=True, exist_ok=True)
    for i, f in enumerate(frames, start):
        write_frame(d / "input" / f"frame_{i:06d}.png", f)
    if truth is not None:
        (d / "truth").mkdir(parents=True, exist_ok=True)
        for i, m in enumerate(truth, start):
            write_mask(d / "truth" / f"frame_{i:06d}.png", m)


def write_manifest(directory, **fields) -> None:
    Path(directory, "manifest.json").write_text(json.dumps(fields, indent=2, sort_keys=True) + "\n")
