"""F-measure scoring of foreground masks against sparse ground truth."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Mapping, Sequence

import numpy as np


def f_measure(precision: float, recall: float) -> float:
    """Harmonic mean of precision and recall, 0 when both are 0."""
    if not (0.0 <= precision <= 1.0 and 0.0 <= recall <= 1.0):
        raise ValueError("precision and recall must lie in [0, 1]")
    s = precision + recall
    return 0.0 if s == 0 else 2.0 * precision * recall / s


def _rates(tp: int, fp: int, fn: int) -> tuple[float, float]:
    # an empty prediction on an empty truth frame counts as perfect
    precision = tp / (tp + fp) if tp + fp else (1.0 if fn == 0 else 0.0)
    recall = tp / (tp + fn) if tp + fn else (1.0 if fp == 0 else 0.0)
    return precision, recall


@dataclass
class FrameScore:
    frame_id: int
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f: float


@dataclass
class EvalReport:
    per_frame: list[FrameScore]
    pooled_precision: float
    pooled_recall: float
    pooled_f: float
    mean_f: float
    config_fingerprint: str = ""
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def table(self) -> str:
        lines = [f"{'frame':>7} {'tp':>7} {'fp':>7} {'fn':>7} {'prec':>7} {'rec':>7} {'F':>7}"]
        for s in self.per_frame:
            lines.append(f"{s.frame_id:>7d} {s.tp:>7d} {s.fp:>7d} {s.fn:>7d} "
                         f"{s.precision:>7.4f} {s.recall:>7.4f} {s.f:>7.4f}")
        lines.append(f"pooled: precision {self.pooled_precision:.4f} recall {self.pooled_recall:.4f} "
                     f"F {self.pooled_f:.4f}")
        lines.append(f"mean of frames: F {self.mean_f:.4f}")
        if self.config_fingerprint:
            lines.append(f"config: {self.config_fingerprint}")
        return "\n".join(lines)


def score_frame(mask, truth, frame_id: int = 0) -> FrameScore:
    mask = np.asarray(mask, dtype=bool)
    truth = np.asarray(truth, dtype=bool)
    if mask.shape != truth.shape:
        raise ValueError(f"frame {frame_id}: mask shape {mask.shape} != truth shape {truth.shape}")
    tp = int(np.count_nonzero(mask & truth))
    fp = int(np.count_nonzero(mask & ~truth))
    fn = int(np.count_nonzero(~mask & truth))
    p, r = _rates(tp, fp, fn)
    return FrameScore(frame_id, tp, fp, fn, p, r, f_measure(p, r))


def evaluate_video(masks: Mapping[int, np.ndarray] | Sequence[np.ndarray],
                   truth: Mapping[int, np.ndarray], fingerprint: str = "") -> EvalReport:
    """Score only the frames that have ground truth.

    ``masks`` is indexed by frame id (a sequence is indexed by position).
    Both pooled-count and mean-of-frames F-measures are reported.
    """
    scores = []
    for fid in sorted(truth):
        try:
            m = masks[fid]
        except (KeyError, IndexError):
            raise KeyError(f"no mask produced for ground-truth frame {fid}") from None
        scores.append(score_frame(m, truth[fid], fid))
    tp = sum(s.tp for s in scores)
    fp = sum(s.fp for s in scores)
    fn = sum(s.fn for s in scores)
    p, r = _rates(tp, fp, fn)
    mean_f = float(np.mean([s.f for s in scores])) if scores else 0.0
    return EvalReport(scores, p, r, f_measure(p, r), mean_f, fingerprint)


def truth_from_gray(gray, name: str = "ground truth") -> np.ndarray:
    """Decode an 8-bit mask: 0 background, 255 foreground, anything else rejected."""
    g = np.asarray(gray)
    if g.ndim == 3:
        if not np.all(g == g[..., :1]):
            raise ValueError(f"{name}: color ground truth is not supported")
        g = g[..., 0]
    bad = (g != 0) & (g != 255)
    if bad.any():
        raise ValueError(f"{name}: values other than 0 and 255 found")
    return g == 255
