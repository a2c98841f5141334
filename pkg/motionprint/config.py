"""
Configuration for motionprint

Engine configuration (weights, alignment parameters, periodicity, shortlist cap) loaded
from JSON or TOML, and runtime settings read from the environment.
Precedence is command-line flags, then the config file, then built-in defaults.
"""

import json
import logging
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Optional, Union

import tomli

from motionprint.align import AlignParams
from motionprint.engine import ScoreWeights
from motionprint.errors import ArtifactIOError, FormatError, InvalidInputError, as_number
from motionprint.index import PeriodicityConfig
from motionprint.parallel import resolve_threads

logger = logging.getLogger(__name__)

ENGINE_SECTIONS = ("weights", "align", "periodicity", "shortlist_cap", "exclude_self")

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


@dataclass(frozen=True)
class EngineConfig:
    weights: ScoreWeights = field(default_factory=ScoreWeights)
    align: AlignParams = field(default_factory=AlignParams)
    periodicity: PeriodicityConfig = field(default_factory=PeriodicityConfig)
    shortlist_cap: Optional[int] = None
    exclude_self: bool = False

    def __post_init__(self):
        if self.shortlist_cap is not None and self.shortlist_cap < 1:
            raise InvalidInputError("shortlist_cap must be at least 1 or null")

    @classmethod
    def from_dict(cls, data: Dict[str, Any], renormalise: bool = False) -> "EngineConfig":
        if not isinstance(data, dict):
            raise FormatError("engine config must be an object")
        unknown = set(data) - set(ENGINE_SECTIONS)
        if unknown:
            raise FormatError(f"unknown engine config sections: {sorted(unknown)}")
        periodicity = _periodicity_from_dict(data.get("periodicity", {}))
        cap = as_number("shortlist_cap", data.get("shortlist_cap"), integer=True, optional=True)
        exclude_self = data.get("exclude_self", False)
        if not isinstance(exclude_self, bool):
            raise FormatError(f"exclude_self must be true or false, got {exclude_self!r}")
        return cls(
            weights=ScoreWeights.from_dict(data.get("weights", {}), renormalise=renormalise),
            align=AlignParams.from_dict(data.get("align", {})),
            periodicity=periodicity,
            shortlist_cap=cap,
            exclude_self=exclude_self,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "weights": self.weights.as_dict(),
            "align": self.align.to_dict(),
            "periodicity": self.periodicity.to_dict(),
            "shortlist_cap": self.shortlist_cap,
            "exclude_self": self.exclude_self,
        }

    def with_overrides(
        self,
        weights: Optional[Dict[str, float]] = None,
        align: Optional[Dict[str, Any]] = None,
        renormalise: bool = False,
        **fields,
    ) -> "EngineConfig":
        """Layer command-line values over this config; None values are ignored"""
        changes = {k: v for k, v in fields.items() if v is not None}
        if weights:
            merged = {**self.weights.as_dict(), **weights}
            changes["weights"] = ScoreWeights.from_dict(merged, renormalise=renormalise)
        elif renormalise:
            changes["weights"] = self.weights.renormalised()
        if align:
            changes["align"] = AlignParams.from_dict({**self.align.to_dict(), **align})
        return replace(self, **changes)


def _periodicity_from_dict(data: Dict[str, Any]) -> PeriodicityConfig:
    if not isinstance(data, dict):
        raise FormatError("periodicity section must be a table")
    fields = {"theta": (False, False), "min_peaks": (True, False), "max_lag": (True, True)}
    unknown = set(data) - set(fields)
    if unknown:
        raise FormatError(f"unknown periodicity settings: {sorted(unknown)}")
    return PeriodicityConfig(**{
        k: as_number(k, v, integer=fields[k][0], optional=fields[k][1]) for k, v in data.items()
    })


def _parse_config_text(text: str, path: Path) -> Dict[str, Any]:
    if path.suffix.lower() == ".toml":
        try:
            data = tomli.loads(text)
        except tomli.TOMLDecodeError as e:
            raise FormatError(f"invalid TOML: {e}", path=str(path)) from None
        # TOML has no null; an absent or zero cap both mean no cap
        if data.get("shortlist_cap") == 0:
            data["shortlist_cap"] = None
        return data
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"invalid JSON: {e.msg}", line=e.lineno, path=str(path)) from None


def load_engine_config(path: Union[str, Path], renormalise: bool = False) -> EngineConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ArtifactIOError(f"cannot read engine config {path}: {e.strerror or e}") from e
    cfg = EngineConfig.from_dict(_parse_config_text(text, path), renormalise=renormalise)
    logger.info(f"📥 Loaded engine config from {path}")
    return cfg


@dataclass(frozen=True)
class RuntimeConfig:
    """Process-wide settings: worker threads, log level and the base seed"""

    threads: int = 1
    log_level: str = "INFO"
    seed: int = 0

    def __post_init__(self):
        if self.threads < 1:
            raise InvalidInputError("threads must be at least 1")
        if self.log_level not in LOG_LEVELS:
            raise InvalidInputError(f"log level must be one of {LOG_LEVELS}, got {self.log_level!r}")

    @classmethod
    def from_env(
        cls,
        threads: Optional[int] = None,
        log_level: Optional[str] = None,
        seed: Optional[int] = None,
    ) -> "RuntimeConfig":
        level = log_level or os.getenv("MOTIONPRINT_LOG_LEVEL", "INFO").upper()
        return cls(
            threads=resolve_threads(threads),
            log_level=level,
            seed=0 if seed is None else int(seed),
        )
