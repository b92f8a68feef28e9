"""Campaign configuration from a ``key = value`` text file.

Example::

    # every corpus program, ghost mode, offline fixtures
    programs = corpus
    mode = ghost
    budget = 60
    provider = fixture
    output = report.json

``programs`` is a comma separated list of corpus names or ``.minic`` paths
(``corpus`` means the whole bundled corpus).  ``mode`` may list several modes.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Tuple

from ..errors import ConfigError

MODES = ("baseline", "baseline-lazy", "ghost")


@dataclass
class CampaignConfig:
    programs: Tuple[str, ...] = ()
    modes: Tuple[str, ...] = ("ghost",)
    budget: float = 60.0              # seconds per program and mode
    provider: str = "fixture"         # fixture | http | none
    fixture_dir: Optional[str] = None
    model: str = ""
    seed: int = 0
    restarts: int = 8                 # random initial suffix models per cut
    lazy_bound: int = 8
    unroll: int = 8
    workers: int = 1
    smt_cmd: Optional[str] = None
    output: Optional[str] = None

    def __post_init__(self):
        bad = [m for m in self.modes if m not in MODES]
        if bad:
            raise ConfigError(f"unknown mode(s) {', '.join(bad)}; expected {', '.join(MODES)}")
        if self.budget <= 0:
            raise ConfigError("budget must be positive")
        if self.provider not in ("fixture", "http", "none"):
            raise ConfigError(f"unknown provider {self.provider!r}")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")


_INT = {"seed", "restarts", "lazy_bound", "unroll", "workers"}
_FLOAT = {"budget"}
_LIST = {"programs", "modes"}
_ALIASES = {"mode": "modes", "program": "programs", "gh_smt_cmd": "smt_cmd",
            "ghostsym_smt_cmd": "smt_cmd"}


def parse_config(text: str, base: Optional[Path] = None) -> CampaignConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = _ALIASES.get(key.lower().replace("-", "_"), key.lower().replace("-", "_"))
        if key not in CampaignConfig.__dataclass_fields__:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            if key in _INT:
                values[key] = int(value)
            elif key in _FLOAT:
                values[key] = float(value)
            elif key in _LIST:
                values[key] = tuple(v.strip() for v in value.split(",") if v.strip())
            else:
                values[key] = value
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {value!r}") from exc
    if base is not None and "programs" in values:
        values["programs"] = tuple(str(base / p) if p.endswith(".minic") and not os.path.isabs(p)
                                   else p for p in values["programs"])
    return CampaignConfig(**values)


def load_config(path) -> CampaignConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, path.parent)


__all__ = ["CampaignConfig", "MODES", "parse_config", "load_config"]
