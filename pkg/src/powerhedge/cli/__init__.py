"""Config-driven command-line front end."""

from .config import ConfigError, RunConfig, load_config
from .main import main, run
from .tables import ResultTable

__all__ = ["ConfigError", "RunConfig", "load_config", "main", "run", "ResultTable"]
