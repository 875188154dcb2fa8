"""Bayes posterior over background, seen foreground and unseen foreground."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .likelihood import LikelihoodField
from .priors import PriorTriple


@dataclass
class FrameResult:
    bg_posterior: np.ndarray
    fg_posterior: np.ndarray
    label_posteriors: tuple[np.ndarray, np.ndarray, np.ndarray]
    timing: dict = field(default_factory=dict)
    mask: np.ndarray | None = None
    stats: dict = field(default_factory=dict)


def _numerators(lik: LikelihoodField, priors: PriorTriple):
    nb = lik.bg * priors.bg
    nf = lik.fg_seen * priors.fg
    nu = lik.fg_unseen * priors.fu
    return nb, nf, nu


def posterior(lik: LikelihoodField, priors: PriorTriple) -> FrameResult:
    """Per-pixel Bayes rule.

    Pixels where all three weighted likelihoods vanish carry no evidence and
    keep their prior. With the default priors this cannot happen, since the
    unseen-foreground term is a positive constant.
    """
    shape = lik.bg.shape
    for p in (priors.bg, priors.fg, priors.fu):
        if np.shape(p) != shape:
            raise ValueError("prior and likelihood rasters must share a shape")
    nb, nf, nu = _numerators(lik, priors)
    den = nb + nf + nu
    ok = den > 0
    safe = np.where(ok, den, 1.0)
    pb = np.where(ok, nb / safe, priors.bg)
    pf = np.where(ok, nf / safe, priors.fg)
    pu = np.where(ok, nu / safe, priors.fu)
    pb = np.clip(pb, 0.0, 1.0)
    return FrameResult(bg_posterior=pb, fg_posterior=1.0 - pb, label_posteriors=(pb, pf, pu))


def map_labels(lik: LikelihoodField, priors: PriorTriple) -> np.ndarray:
    """Bayes decision: foreground where the foreground numerators outweigh background.

    Ties go to background.
    """
    nb, nf, nu = _numerators(lik, priors)
    return (nf + nu) > nb
