"""
key=value configuration files for the harness commands.

One setting per line, `#` starts a comment. Keys use the command-line
flag names with or without the leading dashes (`max-iter = 50`,
`--tfinal=10`); values are handed to the serializers as text.
"""
from pathlib import Path

FLAG_ALIASES = {
    'tfinal': 't_final',
}


class ConfigFileError(ValueError):
    """Unreadable or malformed key=value file."""


def normalize_key(key):
    key = key.strip().lstrip('-').replace('-', '_').lower()
    return FLAG_ALIASES.get(key, key)


def parse_config(text, source='<config>'):
    """Parse key=value lines into a dict of normalized keys."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition('=')
        key = normalize_key(key)
        if not sep or not key:
            raise ConfigFileError(
                f'{source}:{lineno}: expected key=value, got {raw.strip()!r}'
            )
        if key in values:
            raise ConfigFileError(f'{source}:{lineno}: duplicate key {key!r}')
        values[key] = value.strip()
    return values


def read_config(path):
    """Read and parse a key=value file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigFileError(
            f'Cannot read config file {path}: {exc}') from exc
    return parse_config(text, source=str(path))
