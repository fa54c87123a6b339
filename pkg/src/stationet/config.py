"""Flat ``key = value`` experiment configuration files.

Blank lines and ``#``/``;`` comments are ignored; keys are case-sensitive
and may contain dots (``prior.family``).
"""
import configparser

from .errors import ConfigError

_SECTION = "stationet"


def load_config(path):
    parser = configparser.ConfigParser(interpolation=None, delimiters=("=", ":"))
    parser.optionxform = str
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        parser.read_string(f"[{_SECTION}]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc.message}") from None
    return dict(parser[_SECTION])


def resolve(defaults, config, overrides):
    """Merge defaults < config file < explicit overrides (None means unset)."""
    out = dict(defaults)
    for source in (config or {}, overrides or {}):
        for key, value in source.items():
            if value is not None:
                out[key] = value
    return out


def get(cfg, key, conv=str):
    if key not in cfg or cfg[key] is None:
        raise ConfigError(f"missing required key {key!r}")
    try:
        return conv(cfg[key])
    except (TypeError, ValueError):
        raise ConfigError(f"bad value for {key!r}: {cfg[key]!r}") from None


def as_bool(value):
    if isinstance(value, bool):
        return value
    v = str(value).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(value)
