import math
import os
import re
from pathlib import Path
from typing import Any, cast

import numpy as np
import structlog
import yaml  # type: ignore[import-untyped]

_logger = structlog.get_logger()

_ENV_PATTERN = re.compile(r"\$\(([^)]+)\)")


def _resolve_env_vars(
    value: Any,
    required_vars: set[str] | None = None,
) -> Any:
    """Recursively resolve ``$(VAR)`` placeholders to environment variables.

    Variables listed in *required_vars* must be present; the others fall back
    to an empty string.
    """

    def _replace(match: re.Match[str]) -> str:
        var_name = match.group(1)
        env_value = os.getenv(var_name)
        if env_value is None and required_vars and var_name in required_vars:
            msg = f"Missing required environment variable: {var_name}"
            raise ValueError(msg)
        return env_value if env_value is not None else ""

    if isinstance(value, str):
        return _ENV_PATTERN.sub(_replace, value)
    if isinstance(value, dict):
        return {k: _resolve_env_vars(v, required_vars) for k, v in value.items()}
    if isinstance(value, list):
        return [_resolve_env_vars(item, required_vars) for item in value]
    return value


def load_yaml_config(
    config_path: Path,
    defaults: dict[str, Any] | None = None,
    required_vars: set[str] | None = None,
) -> dict[str, Any]:
    """Load an optional YAML config file and resolve ``$(VAR)`` placeholders.

    Args:
        config_path: Path to the YAML file.
        defaults: Fallback dict when the file does not exist.
        required_vars: Environment variable names that must be present.
    """
    if not config_path.exists():
        _logger.warning("config_not_found", path=str(config_path))
        return defaults or {}

    with open(config_path) as f:
        raw = yaml.safe_load(f) or {}

    resolved: dict[str, Any] = cast(dict[str, Any], _resolve_env_vars(raw, required_vars))
    return resolved


def load_yaml_document(path: Path) -> dict[str, Any]:
    """Load a YAML document that must exist and hold a mapping.

    Unlike :func:`load_yaml_config` nothing is defaulted: a missing file raises
    :class:`FileNotFoundError` and malformed YAML raises :class:`ValueError`.
    """
    with open(path) as f:
        try:
            raw = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ValueError(f"{path}: not valid YAML ({e})") from e

    if not isinstance(raw, dict):
        raise ValueError(f"{path}: top level must be a mapping")
    return cast(dict[str, Any], raw)


# -- Canonical dumping --------------------------------------------------------


def format_float(value: float) -> str:
    """Fixed 17-significant-digit text that YAML reads back as the same float."""
    if math.isnan(value):
        return ".nan"
    if math.isinf(value):
        return ".inf" if value > 0 else "-.inf"
    text = format(value, ".17g")
    mantissa, _, exponent = text.partition("e")
    if "." not in mantissa:
        mantissa += ".0"
    if exponent:
        sign = exponent[0] if exponent[0] in "+-" else "+"
        digits = exponent.lstrip("+-")
        return f"{mantissa}e{sign}{digits}"
    return mantissa


class _CanonicalDumper(yaml.SafeDumper):  # type: ignore[misc]
    pass


def _represent_float(dumper: yaml.SafeDumper, value: float) -> Any:
    return dumper.represent_scalar("tag:yaml.org,2002:float", format_float(value))


_CanonicalDumper.add_representer(float, _represent_float)
_CanonicalDumper.add_multi_representer(float, _represent_float)


def to_plain(value: Any) -> Any:
    """Convert numpy arrays and scalars nested in *value* to builtin types."""
    if isinstance(value, np.ndarray):
        return to_plain(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, list | tuple):
        return [to_plain(item) for item in value]
    return value


def dump_yaml(data: Any, path: Path | None = None) -> str:
    """Dump *data* with sorted keys and fixed float formatting.

    Identical content always produces identical bytes. The text is also written
    to *path* when given.
    """
    text: str = yaml.dump(
        to_plain(data),
        Dumper=_CanonicalDumper,
        sort_keys=True,
        default_flow_style=None,
        width=100,
        allow_unicode=False,
    )
    if path is not None:
        path.write_text(text)
    return text
