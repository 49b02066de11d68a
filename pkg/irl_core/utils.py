"""
Utility functions for the IRL lab: logging setup, worker resolution,
config file loading and number formatting.
"""

import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from irl_core import THREADS_ENV_VAR

logger = logging.getLogger(__name__)


def setup_logging(verbose: bool = False):
    """Configure root logging for entry points (CLI, explorer)"""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def resolve_workers(requested: Optional[int] = None) -> int:
    """
    Worker count for the experiment pool.

    IRL_LAB_THREADS wins over the configured value; an unparsable or
    nonpositive override is ignored with a warning.
    """
    override = os.environ.get(THREADS_ENV_VAR)
    if override:
        try:
            value = int(override)
            if value >= 1:
                return value
        except ValueError:
            pass
        logger.warning(f"Ignoring {THREADS_ENV_VAR}={override!r}: expected a positive integer")

    if requested is not None:
        return requested
    return os.cpu_count() or 1


def load_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """Read a JSON or YAML mapping"""
    path = Path(path)
    text = path.read_text()

    if path.suffix.lower() in (".yaml", ".yml"):
        import yaml
        data = yaml.safe_load(text)
    else:
        data = json.loads(text)

    if not isinstance(data, dict):
        raise ValueError(f"{path} must contain a mapping, got {type(data).__name__}")
    return data


def parse_override(text: str) -> Any:
    """Value of a KEY=VALUE override, parsed as YAML scalar or list"""
    import yaml
    return yaml.safe_load(text)


class ConfigManager:
    """Dotted-key access over a nested configuration mapping"""

    def __init__(self, config_dict: Dict[str, Any] = None):
        self.config = dict(config_dict or {})

    def get(self, key: str, default: Any = None) -> Any:
        value = self.config
        for k in key.split("."):
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default
        return value

    def set(self, key: str, value: Any):
        keys = key.split(".")
        config = self.config
        for k in keys[:-1]:
            config = config.setdefault(k, {})
        config[keys[-1]] = value

    def apply_overrides(self, overrides: List[str]):
        """Apply KEY=VALUE strings, e.g. trials=20 or m_grid=[10,100]"""
        for item in overrides:
            if "=" not in item:
                raise ValueError(f"Override '{item}' is not of the form KEY=VALUE")
            key, raw = item.split("=", 1)
            self.set(key.strip(), parse_override(raw))

    def to_dict(self) -> Dict[str, Any]:
        return dict(self.config)


def format_number(number: Optional[float], precision: int = 4) -> str:
    """Compact numeric text; None and NaN become 'n/a'"""
    if number is None or (isinstance(number, float) and np.isnan(number)):
        return "n/a"
    if isinstance(number, (int, np.integer)):
        return str(int(number))
    if np.isinf(number):
        return "inf" if number > 0 else "-inf"
    return f"{number:.{precision}g}"


def log_spaced_ints(start: float, stop: float, count: int) -> List[int]:
    """Rounded log-spaced integers, duplicates removed, ascending"""
    if count < 1 or start <= 0 or stop < start:
        raise ValueError("Need count >= 1 and 0 < start <= stop")
    values = np.unique(np.rint(np.logspace(np.log10(start), np.log10(stop), count)).astype(int))
    return [int(v) for v in values]
