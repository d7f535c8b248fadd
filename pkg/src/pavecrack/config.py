"""Pipeline configuration and its flat key-value file format.

The config file is a typed ``key = value`` text format (one key per line,
``#`` comments allowed). Unknown keys are errors so parameter-name typos
cannot silently fall back to defaults; missing keys take the documented
defaults. ``format_config`` writes every key, and parse(format(cfg)) == cfg.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

from .filtering import Neighborhood
from .thresholding import SinghParams
from .voting import MultiScaleParams

__all__ = ["ConfigError", "PipelineConfig", "parse_config", "format_config", "load_config", "config_dict"]

_POLARITIES = ("dark", "bright")


class ConfigError(ValueError):
    """Unknown key, malformed value or invalid parameter combination."""


@dataclass(frozen=True)
class PipelineConfig:
    """Fully-resolved parameter set of the detection pipeline.

    polarity is the crack polarity of the *input* image: 'dark' (cracks
    darker than the road, the normal case) or 'bright' (inverted source data,
    which is gray-inverted before preprocessing).
    """

    median_shape: str = "square"
    median_size: int = 3
    bottomhat_radius: float = 15.0
    singh: SinghParams = field(default_factory=SinghParams)
    voting: MultiScaleParams = field(default_factory=MultiScaleParams)
    tau: float = 2.0
    polarity: str = "dark"
    dump_saliency: bool = False

    def __post_init__(self):
        if self.polarity not in _POLARITIES:
            raise ConfigError(f"polarity must be one of {_POLARITIES}, got {self.polarity!r}")
        if self.tau < 0:
            raise ConfigError(f"eval.tau must be >= 0, got {self.tau}")
        if self.bottomhat_radius <= 0:
            raise ConfigError(f"bottomhat.radius must be > 0, got {self.bottomhat_radius}")
        try:
            Neighborhood(self.median_shape, self.median_size)
        except ValueError as exc:
            raise ConfigError(f"bad median neighborhood: {exc}") from exc

    def median_neighborhood(self) -> Neighborhood:
        return Neighborhood(self.median_shape, self.median_size)


def _parse_bool(text: str) -> bool:
    if text.lower() in ("true", "yes", "1"):
        return True
    if text.lower() in ("false", "no", "0"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _parse_opt_float(text: str):
    return None if text.lower() == "none" else float(text)


def _fmt(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    return repr(value) if isinstance(value, float) else str(value)


# key -> (section, attribute, parser); sections address the nested dataclasses
_SCHEMA: dict[str, tuple[str, str, object]] = {
    "median.shape": ("", "median_shape", str),
    "median.size": ("", "median_size", int),
    "bottomhat.radius": ("", "bottomhat_radius", float),
    "singh.k": ("singh", "k", float),
    "singh.w": ("singh", "w", int),
    "voting.sigma_ball": ("voting", "sigma_ball", float),
    "voting.sigma_stick1": ("voting", "sigma_stick1", float),
    "voting.sigma_stick2": ("voting", "sigma_stick2", float),
    "voting.sigma_ball2": ("voting", "sigma_ball2", _parse_opt_float),
    "voting.t_stick1": ("voting", "t_stick1", float),
    "voting.t_ball": ("voting", "t_ball", float),
    "voting.t_stick2": ("voting", "t_stick2", float),
    "voting.t_stick3": ("voting", "t_stick3", float),
    "voting.n_angles": ("voting", "n_angles", int),
    "cleanup.min_area": ("voting", "min_area", int),
    "cleanup.spur_iterations": ("voting", "spur_iterations", int),
    "cleanup.connectivity": ("voting", "connectivity", int),
    "eval.tau": ("", "tau", float),
    "polarity": ("", "polarity", str),
    "dump_saliency": ("", "dump_saliency", _parse_bool),
}


def parse_config(text: str) -> PipelineConfig:
    """Parse the flat key-value format; unknown keys and bad values raise."""
    top: dict = {}
    singh: dict = {}
    voting: dict = {}
    sections = {"": top, "singh": singh, "voting": voting}
    seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _SCHEMA:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}")
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate config key {key!r}")
        seen.add(key)
        section, attr, parser = _SCHEMA[key]
        try:
            sections[section][attr] = parser(value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from exc
    try:
        if singh:
            top["singh"] = SinghParams(**singh)
        if voting:
            top["voting"] = MultiScaleParams(**voting)
        return PipelineConfig(**top)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def format_config(cfg: PipelineConfig) -> str:
    """Write every key; parse_config(format_config(cfg)) == cfg."""
    lines = []
    for key, (section, attr, _) in _SCHEMA.items():
        obj = cfg if section == "" else getattr(cfg, section)
        lines.append(f"{key} = {_fmt(getattr(obj, attr))}")
    return "\n".join(lines) + "\n"


def load_config(path: str | Path) -> PipelineConfig:
    return parse_config(Path(path).read_text())


def config_dict(cfg: PipelineConfig) -> dict:
    """Flat key -> value mapping of the fully-resolved configuration."""
    out = {}
    for key, (section, attr, _) in _SCHEMA.items():
        obj = cfg if section == "" else getattr(cfg, section)
        out[key] = getattr(obj, attr)
    return out


def config_with(cfg: PipelineConfig, **kwargs) -> PipelineConfig:
    return replace(cfg, **kwargs)
