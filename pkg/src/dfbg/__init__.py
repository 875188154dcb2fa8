"""Bayesian background subtraction with distribution-field likelihoods."""
from .core import KernelConfig, ModelHistory, gaussian_pdf, rgb_to_lab
from .inference import FrameResult, posterior
from .likelihood import (
    LikelihoodField,
    background_likelihood,
    foreground_likelihood,
    unseen_foreground_likelihood,
)
from .pipeline import Pipeline
from .config import PipelineConfig

__all__ = [
    "FrameResult",
    "KernelConfig",
    "LikelihoodField",
    "ModelHistory",
    "Pipeline",
    "PipelineConfig",
    "background_likelihood",
    "foreground_likelihood",
    "gaussian_pdf",
    "posterior",
    "rgb_to_lab",
    "unseen_foreground_likelihood",
]
