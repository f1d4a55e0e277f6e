"""Bundled scenario and search presets (JSON files in ``presets/``)."""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from typing import Any

from .scenario import ConfigError, StreetScenario, default_scenario, from_dict

_PACKAGE = "streetlink"


def _root():
    return resources.files(_PACKAGE) / "presets"


def list_presets() -> list[str]:
    files = _root().iterdir()
    return sorted(f.name[:-5] for f in files if f.name.endswith(".json"))


def read_preset(name_or_path: str) -> dict[str, Any]:
    """Raw preset document, from a bundled name or a file path."""
    path = Path(name_or_path)
    if path.suffix == ".json" and path.exists():
        text = path.read_text()
    else:
        resource = _root() / f"{name_or_path}.json"
        if not resource.is_file():
            raise ConfigError(f"unknown preset {name_or_path!r}; available: {', '.join(list_presets())}")
        text = resource.read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"preset {name_or_path!r}: invalid JSON ({exc})") from exc


def load_scenario_preset(name_or_path: str, base: StreetScenario | None = None) -> StreetScenario:
    doc = read_preset(name_or_path)
    if "scenario" not in doc:
        raise ConfigError(f"preset {name_or_path!r} does not describe a scenario")
    return from_dict(doc["scenario"], base or default_scenario())
