"""Coverage simulation for street-side VLC and THz links to vehicles."""

__version__ = "0.1.0"

from .scenario import ConfigError, StreetScenario, default_scenario  # noqa: E402

__all__ = ["ConfigError", "StreetScenario", "default_scenario", "__version__"]
