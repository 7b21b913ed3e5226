import configparser
import hashlib
import json
import os
import typing as T

from . import VERSION
from .error import CohortConfigError

# bounding boxes of the studied cities: min_lat, max_lat, min_lon, max_lon
DEFAULT_BOXES: T.Dict[str, T.Tuple[float, float, float, float]] = {
    "Berlin": (52.369276, 52.650018, 13.091432, 13.754525),
    "Nice": (43.646275, 43.758400, 7.178630, 7.338724),
    "Barcelona": (41.310933, 41.465339, 2.058793, 2.244023),
    "London": (51.325628, 51.672014, -0.472381, 0.268712),
    "Stockholm": (59.298186, 59.371545, 17.945337, 18.154841),
    "Copenhagen": (55.5531, 55.8175, 12.2607, 12.7043),
    "Paris": (48.7106, 48.9991, 2.0641, 2.6463),
}

# local wall-clock anchors, interpreted in the dataset's declared zone
DEFAULT_ANCHORS: T.Dict[str, T.Tuple[str, str]] = {
    "Paris": ("2015-11-14T00:58:00", "Paris"),
    "Nice": ("2016-07-14T22:30:00", "Nice"),
    "Berlin": ("2016-12-19T20:02:00", "Berlin"),
    "London1": ("2017-03-22T14:40:00", "London"),
    "Stockholm": ("2017-04-07T14:53:00", "Stockholm"),
    "London2": ("2017-06-03T22:06:00", "London"),
    "Barcelona": ("2017-08-17T16:54:00", "Barcelona"),
}

BOX_KEYS = ("min_lat", "max_lat", "min_lon", "max_lon")

# keys that never change results and stay out of the embedded config
VOLATILE_KEYS = frozenset(
    ["threads", "output", "verbose", "quiet", "config", "func", "disable_progress"]
)


def load_config(config_path: str) -> configparser.ConfigParser:
    if not os.path.isfile(config_path):
        raise CohortConfigError(f"config {config_path} does not exist")
    config = configparser.ConfigParser()
    config.optionxform = str  # type: ignore
    try:
        config.read(config_path)
    except configparser.Error as ex:
        raise CohortConfigError(f"Invalid config {config_path}: {ex}")
    return config


def save_config(config: configparser.ConfigParser, config_path: str) -> None:
    with open(config_path, "w") as cfg:
        config.write(cfg)


def load_boxes(
    config: T.Optional[configparser.ConfigParser] = None,
) -> T.Dict[str, T.Tuple[float, float, float, float]]:
    boxes = dict(DEFAULT_BOXES)
    if config is None:
        return boxes
    for section in config.sections():
        if not section.startswith("boxes."):
            continue
        city = section[len("boxes."):]
        try:
            boxes[city] = T.cast(
                T.Tuple[float, float, float, float],
                tuple(config.getfloat(section, key) for key in BOX_KEYS),
            )
        except (configparser.NoOptionError, ValueError) as ex:
            raise CohortConfigError(f"Invalid bounding box [{section}]: {ex}")
    return boxes


def load_anchors(
    config: T.Optional[configparser.ConfigParser] = None,
) -> T.Dict[str, T.Tuple[str, str]]:
    anchors = dict(DEFAULT_ANCHORS)
    if config is None:
        return anchors
    for section in config.sections():
        if not section.startswith("attacks."):
            continue
        name = section[len("attacks."):]
        if not config.has_option(section, "anchor"):
            raise CohortConfigError(f"[{section}] needs an anchor")
        anchors[name] = (
            config.get(section, "anchor"),
            config.get(section, "city", fallback=name),
        )
    return anchors


def _coerce(raw: str, default: T.Any) -> T.Any:
    if isinstance(default, bool):
        return raw.strip().lower() in ("1", "true", "yes", "on")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    if isinstance(default, (list, tuple)):
        return [item for item in raw.replace(",", " ").split() if item]
    return raw


def resolve_config(
    command: str,
    vars_args: T.Mapping[str, T.Any],
    defaults: T.Mapping[str, T.Any],
) -> T.Dict[str, T.Any]:
    """
    Merge built-in defaults, the [command] section of --config and explicit flags, in that order.

    Args:
        command: section name in the INI file
        vars_args: argparse namespace as a dict, None meaning "flag not given"
        defaults: built-in defaults of the command

    Returns:
        the resolved parameters
    """
    resolved: T.Dict[str, T.Any] = dict(defaults)
    config_path = vars_args.get("config")
    if config_path:
        parser = load_config(config_path)
        if parser.has_section(command):
            for key, raw in parser.items(command):
                try:
                    resolved[key] = _coerce(raw, defaults.get(key))
                except ValueError:
                    raise CohortConfigError(
                        f"Invalid value {raw!r} for {key} in [{command}] of {config_path}"
                    )
    for key, val in vars_args.items():
        if val is not None and key != "func":
            resolved[key] = val
    return resolved


def embedded_config(resolved: T.Mapping[str, T.Any]) -> T.Dict[str, T.Any]:
    return {k: v for k, v in sorted(resolved.items()) if k not in VOLATILE_KEYS}


def config_hash(embedded: T.Mapping[str, T.Any]) -> str:
    canonical = json.dumps(embedded, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def provenance(command: str, resolved: T.Mapping[str, T.Any]) -> T.Dict[str, T.Any]:
    embedded = embedded_config(resolved)
    return {
        "command": command,
        "version": VERSION,
        "config": embedded,
        "config_hash": config_hash(embedded),
    }
