"""Service configuration: one JSON file plus environment overrides.

Precedence, lowest to highest: built-in defaults, the config file, then
the WSN_PORT / WSN_API_KEY / WSN_UPLINK_URL environment variables.  The
api_key guards the local ThingSpeak-style ingest endpoint and is what the
gateway uplink presents; uplink_url, when set, points the gateway at an
external endpoint instead of the in-process loopback.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

DEFAULT_PORT = 8000
DEFAULT_API_KEY = "WSNTWIN-DEMO-KEY"
DEFAULT_UPLINK_URL = ""  # empty = in-process loopback ingest

ENV_PORT = "WSN_PORT"
ENV_API_KEY = "WSN_API_KEY"
ENV_UPLINK_URL = "WSN_UPLINK_URL"


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class ServiceConfig:
    port: int = DEFAULT_PORT
    api_key: str = DEFAULT_API_KEY
    uplink_url: str = DEFAULT_UPLINK_URL


def load_config(path: Path | str | None = None, env: dict | None = None) -> ServiceConfig:
    """Resolve the effective configuration."""
    env = os.environ if env is None else env
    values = {"port": DEFAULT_PORT, "api_key": DEFAULT_API_KEY, "uplink_url": DEFAULT_UPLINK_URL}

    if path is not None:
        path = Path(path)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        unknown = set(raw) - set(values)
        if unknown:
            raise ConfigError(f"{path}: unknown config keys: {', '.join(sorted(unknown))}")
        values.update(raw)

    if ENV_PORT in env:
        try:
            values["port"] = int(env[ENV_PORT])
        except ValueError as exc:
            raise ConfigError(f"{ENV_PORT} must be an integer") from exc
    if ENV_API_KEY in env:
        values["api_key"] = env[ENV_API_KEY]
    if ENV_UPLINK_URL in env:
        values["uplink_url"] = env[ENV_UPLINK_URL]

    if not isinstance(values["port"], int) or not 1 <= values["port"] <= 65535:
        raise ConfigError(f"port must be 1..65535, got {values['port']!r}")
    return ServiceConfig(
        port=values["port"],
        api_key=str(values["api_key"]),
        uplink_url=str(values["uplink_url"]),
    )
