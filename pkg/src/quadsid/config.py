"""Flat ``key = value`` configuration format.

One entry per line, ``#`` starts a comment, blank lines are ignored.
Values are kept as strings here; typed containers convert their own keys.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .errors import ConfigError


def parse_kv(text: str, source: str = "<string>") -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key or not value:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        if key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def read_kv(path: str | Path) -> dict[str, str]:
    path = Path(path)
    return parse_kv(path.read_text(encoding="utf-8"), source=str(path))


def format_kv(values: dict[str, object]) -> str:
    lines = []
    for key, value in values.items():
        if isinstance(value, float):
            value = format(value, ".17g")
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def default_values() -> dict[str, str]:
    """The packaged defaults (``quadsid/data/default.cfg``)."""
    text = resources.files("quadsid").joinpath("data/default.cfg").read_text(encoding="utf-8")
    return parse_kv(text, source="default.cfg")


def take_floats(values: dict[str, str], keys) -> dict[str, float]:
    """Convert ``keys`` of ``values`` to floats, reporting the offending key."""
    out = {}
    for key in keys:
        if key not in values:
            raise ConfigError(f"missing key {key!r}")
        try:
            out[key] = float(values[key])
        except ValueError:
            raise ConfigError(f"key {key!r}: not a number: {values[key]!r}") from None
    return out


def check_known(values: dict[str, str], known) -> None:
    unknown = sorted(set(values) - set(known))
    if unknown:
        raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
