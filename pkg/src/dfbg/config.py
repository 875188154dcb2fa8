"""Pipeline configuration and its flat ``key = value`` file format.

Every default is the standard DFB setting, so an empty config file runs
that configuration. Variances are sigma squared and accept fractions such as
``45/4``. Tuples are comma separated; candidate lists separate entries with
``;``. Lines starting with ``#`` are comments.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path

from .adaptive import VarianceCandidates
from .core import COLOR_SPACES, KernelConfig
from .postprocess import MrfParams
from .priors import PriorParams

MODELS = ("dfb", "jkde", "pixelwise-kde")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    model: str = "dfb"
    color_space: str = "rgb"
    kernel: KernelConfig = KernelConfig()
    history: int = 10
    priors: PriorParams = PriorParams()
    adaptive: bool = False
    candidates: VarianceCandidates = VarianceCandidates()
    confidence_band: tuple[float, float] = (0.2, 0.8)
    cache_variances: bool = True
    mrf: MrfParams = MrfParams()
    min_blob: int = 15
    raw_masks: bool = False
    history_uses_postprocessed: bool = False
    jkde_mix: float = 0.5
    input: str = ""
    truth: str = ""
    output: str = ""
    workers: int = 1

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.color_space not in COLOR_SPACES:
            raise ConfigError(f"color_space must be one of {tuple(COLOR_SPACES)}")
        if self.history < 1:
            raise ConfigError("history must be >= 1")
        if self.adaptive and self.model == "pixelwise-kde":
            raise ConfigError("adaptive variances need a spatial model (dfb or jkde)")
        lo, hi = self.confidence_band
        if not (0.0 <= lo <= 1.0 and 0.0 <= hi <= 1.0):
            raise ConfigError("confidence band limits must lie in [0, 1]")
        if self.min_blob < 0 or self.workers < 1:
            raise ConfigError("min_blob must be >= 0 and workers >= 1")

    def fingerprint(self) -> str:
        """Hash of every setting that can change the output (paths and workers excluded)."""
        flat = to_flat(self)
        for k in ("input", "truth", "output", "workers"):
            flat.pop(k, None)
        text = "\n".join(f"{k}={flat[k]}" for k in sorted(flat))
        return hashlib.sha256(text.encode()).hexdigest()[:16]


def _num(text: str) -> float:
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"not a number: {text!r}") from None


def _tuple(text: str) -> tuple[float, ...]:
    return tuple(_num(t) for t in text.split(",") if t.strip())


def _tuples(text: str) -> tuple[tuple[float, ...], ...]:
    return tuple(_tuple(t) for t in text.split(";") if t.strip())


def _bool(text: str) -> bool:
    v = text.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        if v and isinstance(v[0], tuple):
            return ";".join(_fmt(t) for t in v)
        return ",".join(_fmt(t) for t in v)
    return str(v)


# flat key -> (parser, section, attribute); section None means top level
_KEYS = {
    "model": (str, None, "model"),
    "color_space": (str, None, "color_space"),
    "bg_spatial_var": (_tuple, "kernel", "bg_spatial_var"),
    "bg_color_var": (_tuple, "kernel", "bg_color_var"),
    "fg_spatial_var": (_tuple, "kernel", "fg_spatial_var"),
    "fg_color_var": (_tuple, "kernel", "fg_color_var"),
    "history": (int, None, "history"),
    "bg_stay": (_num, "priors", "bg_stay"),
    "bg_to_fg_split": (_tuple, "priors", "bg_to_fg_split"),
    "fg_to_bg": (_num, "priors", "fg_to_bg"),
    "fg_stay_split": (_tuple, "priors", "fg_stay_split"),
    "smooth_width": (int, "priors", "smooth_width"),
    "smooth_sigma": (_num, "priors", "smooth_sigma"),
    "fu_border_width": (int, "priors", "fu_border_width"),
    "fu_border_boost": (_num, "priors", "fu_border_boost"),
    "adaptive": (_bool, None, "adaptive"),
    "spatial_candidates": (_tuples, "candidates", "spatial"),
    "color_candidates": (_tuples, "candidates", "color"),
    "confidence_band": (_tuple, None, "confidence_band"),
    "cache_variances": (_bool, None, "cache_variances"),
    "mrf_lambda": (_num, "mrf", "coupling"),
    "mrf_iters": (int, "mrf", "max_iters"),
    "min_blob": (int, None, "min_blob"),
    "raw_masks": (_bool, None, "raw_masks"),
    "history_uses_postprocessed": (_bool, None, "history_uses_postprocessed"),
    "jkde_mix": (_num, None, "jkde_mix"),
    "input": (str, None, "input"),
    "truth": (str, None, "truth"),
    "output": (str, None, "output"),
    "workers": (int, None, "workers"),
}


def to_flat(cfg: PipelineConfig) -> dict[str, str]:
    out = {}
    for key, (_, section, attr) in _KEYS.items():
        obj = cfg if section is None else getattr(cfg, section)
        out[key] = _fmt(getattr(obj, attr))
    return out


def from_flat(values: dict[str, str], base: PipelineConfig | None = None) -> PipelineConfig:
    base = base or PipelineConfig()
    top: dict = {}
    sections: dict[str, dict] = {}
    for key, raw in values.items():
        if key not in _KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        parser, section, attr = _KEYS[key]
        try:
            val = parser(str(raw).strip())
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}") from None
        if section is None:
            top[attr] = val
        else:
            sections.setdefault(section, {})[attr] = val
    try:
        for section, changes in sections.items():
            top[section] = replace(getattr(base, section), **changes)
        return replace(base, **top)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def parse_config_text(text: str) -> dict[str, str]:
    values = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected 'key = value'")
        key, val = line.split("=", 1)
        values[key.strip()] = val.strip()
    return values


def load_config(path: str | Path | None = None, overrides: dict[str, str] | None = None) -> PipelineConfig:
    values = {}
    if path:
        try:
            values.update(parse_config_text(Path(path).read_text()))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
    values.update(overrides or {})
    return from_flat(values)


def dump_config(cfg: PipelineConfig) -> str:
    return "\n".join(f"{k} = {v}" for k, v in to_flat(cfg).items()) + "\n"
