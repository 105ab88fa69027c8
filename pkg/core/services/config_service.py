# Copyright (©) 2026, Alexander Suvorov. All rights reserved.
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

from core.exceptions import InvalidFlagsError, InvalidInputError
from core.models.configs import EmConfig, SoftImputeConfig

logger = logging.getLogger(__name__)

SECTIONS = ("em", "soft_impute", "bench")


class ConfigService:
    """Optional JSON config: {"em": {...}, "soft_impute": {...}, "bench": {...}}.

    Precedence is defaults < file < explicit overrides (command-line flags).
    """

    def __init__(self, config_path: Optional[Union[str, Path]] = None):
        self.config_path = Path(config_path) if config_path else None
        self._config = self._load()

    def _load(self) -> Dict[str, Dict[str, Any]]:
        if self.config_path is None:
            return {section: {} for section in SECTIONS}
        try:
            with open(self.config_path, "r", encoding="utf-8") as f:
                raw = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise InvalidFlagsError(f"Cannot load config file {self.config_path}: {e}") from e

        if not isinstance(raw, dict):
            raise InvalidFlagsError(f"Config file {self.config_path} must hold a JSON object")
        unknown = set(raw) - set(SECTIONS)
        if unknown:
            raise InvalidFlagsError(f"Unknown config sections: {', '.join(sorted(unknown))}")

        logger.debug("Loaded config from %s", self.config_path)
        return {section: dict(raw.get(section) or {}) for section in SECTIONS}

    def em_config(self, **overrides) -> EmConfig:
        return self._build(EmConfig, "em", overrides)

    def soft_impute_config(self, **overrides) -> SoftImputeConfig:
        return self._build(SoftImputeConfig, "soft_impute", overrides)

    def bench_settings(self, **overrides) -> Dict[str, Any]:
        settings = dict(self._config["bench"])
        settings.update({key: value for key, value in overrides.items() if value is not None})
        return settings

    def _build(self, config_cls, section: str, overrides: Dict[str, Any]):
        values = dict(self._config[section])
        values.update({key: value for key, value in overrides.items() if value is not None})
        try:
            return config_cls.from_dict(values)
        except (InvalidInputError, TypeError) as e:
            raise InvalidFlagsError(f"Invalid {section} settings: {e}") from e
