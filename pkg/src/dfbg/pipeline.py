"""Frame-by-frame driver: priors -> likelihoods -> posterior -> history update."""
from __future__ import annotations

import time

import numpy as np

from .adaptive import VarianceField, adapt_background_likelihood, cached_step
from .config import PipelineConfig
from .core import COLOR_SPACES, ModelHistory, convert_frame
from .inference import FrameResult, posterior
from .joint import JointModel, joint_likelihood, joint_unseen_likelihood
from .likelihood import (
    LikelihoodField,
    background_likelihood,
    foreground_likelihood,
    unseen_foreground_likelihood,
)
from .postprocess import mrf_smooth, remove_small_components
from .priors import PriorTriple, build_priors, initial_priors, smooth_posterior


class Pipeline:
    """Owns the sample history, the previous posterior and the variance cache.

    Frames must be fed strictly in order; all state changes happen inside
    :meth:`step`.
    """

    def __init__(self, config: PipelineConfig = PipelineConfig()):
        self.config = config
        self.color_space = COLOR_SPACES[config.color_space]
        self.reset()

    def reset(self) -> None:
        self.history = ModelHistory(self.config.history)
        self.previous: FrameResult | None = None
        self.cache: VarianceField | None = None
        self.shape: tuple[int, int] | None = None
        self.frame_index = 0

    def _priors(self, width: int, height: int) -> PriorTriple:
        params = self.config.priors
        if self.previous is None:
            return initial_priors(width, height, params)
        return build_priors(smooth_posterior(self.previous.bg_posterior, params), params)

    def _likelihoods(self, frame: np.ndarray, priors: PriorTriple, stats: dict) -> LikelihoodField:
        cfg = self.config
        kc = cfg.kernel
        workers = cfg.workers
        H, W = frame.shape[:2]
        if cfg.model == "jkde":
            model = JointModel(self.history, kc)
            if cfg.adaptive:
                bg, _ = adapt_background_likelihood(self.history, frame, cfg.candidates,
                                                    joint=True, workers=workers)
            else:
                bg = joint_likelihood(model, frame, "bg", workers=workers)
            fg = joint_likelihood(model, frame, "fg", workers=workers)
            return LikelihoodField(bg, fg, joint_unseen_likelihood(W, H, self.color_space))

        radius = (0, 0) if cfg.model == "pixelwise-kde" else None
        fg = foreground_likelihood(self.history, frame, kc, radius=radius, workers=workers)
        fu = unseen_foreground_likelihood(self.color_space)
        if not cfg.adaptive:
            bg = background_likelihood(self.history, frame, kc, radius=radius, workers=workers)
        elif cfg.cache_variances:
            if self.cache is None:
                self.cache = VarianceField.empty((H, W))
            bg, self.cache, cstats = cached_step(
                self.history, frame, cfg.candidates, self.cache, cfg.confidence_band,
                fg_likelihood=fg, fu_likelihood=fu, priors=priors, workers=workers)
            stats.update(cstats)
        else:
            bg, self.cache = adapt_background_likelihood(self.history, frame, cfg.candidates,
                                                         workers=workers)
        return LikelihoodField(bg, fg, fu)

    def step(self, raw_frame) -> FrameResult:
        t0 = time.perf_counter()
        frame = convert_frame(raw_frame, self.color_space)
        H, W = frame.shape[:2]
        if self.shape is None:
            self.shape = (H, W)
        elif self.shape != (H, W):
            raise ValueError(f"frame {self.frame_index} is {W}x{H}, video is "
                             f"{self.shape[1]}x{self.shape[0]}")
        priors = self._priors(W, H)
        t1 = time.perf_counter()
        stats: dict = {}
        if len(self.history) == 0:
            pb = np.clip(priors.bg, 0.0, 1.0)
            result = FrameResult(pb, 1.0 - pb, (pb, priors.fg, priors.fu))
        else:
            lik = self._likelihoods(frame, priors, stats)
            t_lik = time.perf_counter()
            stats["likelihood_seconds"] = t_lik - t1
            result = posterior(lik, priors)
        t2 = time.perf_counter()

        cfg = self.config
        if cfg.raw_masks:
            mask = result.bg_posterior < 0.5
        else:
            mask = remove_small_components(mrf_smooth(result.bg_posterior, cfg.mrf), cfg.min_blob)
        t3 = time.perf_counter()

        stored = (1.0 - mask.astype(np.float64)) if cfg.history_uses_postprocessed else result.bg_posterior
        self.history.append(frame, stored)
        self.previous = result
        self.frame_index += 1
        result.mask = mask
        result.stats = stats
        result.timing = {"priors": t1 - t0, "inference": t2 - t1, "postprocess": t3 - t2,
                         "total": time.perf_counter() - t0}
        return result

    def run(self, frames):
        for f in frames:
            yield self.step(f)
