"""Experiment configuration files (INI syntax).

Example::

    [plant]
    name = inverted_pendulum_2out
    h = 0.03

    [design]
    K = lqr_continuous
    lqr_Q = 100, 0, 300, 0
    lqr_R = 1
    L = kalman
    kalman_W = 1e-3
    kalman_W_channel = input
    kalman_V = 1e-5

    [protocol]
    protocol = full
    levels = 151, 301, 1601
    rho = auto

    [simulation]
    E_st = 0.15
    x0 = 0, 0, 0.1, 0
    k_max = 200
    substeps = 10

Weight and covariance lists are read as ``scalar * I`` (one entry), a
diagonal (``n`` entries) or a full row-major matrix (``n*n`` entries).
"""

import configparser
from dataclasses import dataclass, field, fields

import numpy as np

from .errors import ConfigError
from .plant import parse_number_list

PROTOCOLS = ("output_only_general", "output_only_deadbeat", "full")
K_SOURCES = ("lqr", "lqr_continuous", "matrix")
L_SOURCES = ("kalman", "deadbeat", "matrix")
NOISE_CHANNELS = ("state", "input")


@dataclass
class ExperimentConfig:
    plant_name: str = None
    plant_file: str = None
    h: float = None

    K_source: str = "lqr"
    lqr_Q: list = None
    lqr_R: list = field(default_factory=lambda: [1.0])
    K_matrix: list = None

    L_source: str = "kalman"
    kalman_W: list = field(default_factory=lambda: [1e-3])
    kalman_W_channel: str = "state"
    kalman_V: list = field(default_factory=lambda: [1e-5])
    L_matrix: list = None

    protocol: str = "output_only_general"
    levels: object = "auto"
    rho: object = "auto"
    rhobar: object = "auto"

    E_st: float = None
    x0: list = None
    k_max: int = 200
    substeps: int = 10

    trace_file: str = "trace.csv"
    schedule_file: str = "schedule.csv"
    plot_file: str = "response.svg"
    symbols_file: str = "symbols.bin"
    plot_signals: list = field(default_factory=lambda: ["x0", "x2", "u0"])

    def __post_init__(self):
        self.validate()

    def validate(self):
        if (self.plant_name is None) == (self.plant_file is None):
            raise ConfigError("give exactly one of plant.name or plant.file")
        if self.h is None or not self.h > 0:
            raise ConfigError("plant.h must be a positive sampling period")
        if self.K_source not in K_SOURCES:
            raise ConfigError(f"design.K must be one of {K_SOURCES}")
        if self.L_source not in L_SOURCES:
            raise ConfigError(f"design.L must be one of {L_SOURCES}")
        if (self.K_source == "matrix") != (self.K_matrix is not None):
            raise ConfigError("K_matrix is required with K = matrix and forbidden otherwise")
        if (self.L_source == "matrix") != (self.L_matrix is not None):
            raise ConfigError("L_matrix is required with L = matrix and forbidden otherwise")
        if self.K_source in ("lqr", "lqr_continuous") and self.lqr_Q is None:
            raise ConfigError("lqr_Q is required for an LQR feedback gain")
        if self.kalman_W_channel not in NOISE_CHANNELS:
            raise ConfigError(f"kalman_W_channel must be one of {NOISE_CHANNELS}")
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"protocol must be one of {PROTOCOLS}")
        if self.protocol == "output_only_deadbeat" and self.L_source != "deadbeat":
            raise ConfigError("output_only_deadbeat needs L = deadbeat")
        if self.levels != "auto":
            want = 3 if self.protocol == "full" else 1
            if len(self.levels) != want or any(v < 2 for v in self.levels):
                raise ConfigError(f"levels must be 'auto' or {want} integer(s) >= 2")
        for name in ("rho", "rhobar"):
            value = getattr(self, name)
            if isinstance(value, str) and value not in ("auto", "midpoint"):
                raise ConfigError(f"{name} must be 'auto', 'midpoint' or a number")
        if self.k_max < 0 or self.substeps < 1:
            raise ConfigError("k_max must be >= 0 and substeps >= 1")


def _numbers(text, key):
    vals = parse_number_list(text)
    if not vals:
        raise ConfigError(f"{key} is empty")
    return vals


def _levels(text):
    text = text.strip()
    if text == "auto":
        return "auto"
    try:
        return tuple(int(v) for v in text.replace(",", " ").split())
    except ValueError:
        raise ConfigError(f"levels must be 'auto' or integers, got {text!r}") from None


def _rate(text):
    text = text.strip()
    if text in ("auto", "midpoint"):
        return text
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"bad rate {text!r}") from None


_LAYOUT = {
    "plant": {"name": "plant_name", "file": "plant_file", "h": "h"},
    "design": {
        "K": "K_source",
        "lqr_Q": "lqr_Q",
        "lqr_R": "lqr_R",
        "K_matrix": "K_matrix",
        "L": "L_source",
        "kalman_W": "kalman_W",
        "kalman_W_channel": "kalman_W_channel",
        "kalman_V": "kalman_V",
        "L_matrix": "L_matrix",
    },
    "protocol": {
        "protocol": "protocol",
        "levels": "levels",
        "rho": "rho",
        "rhobar": "rhobar",
    },
    "simulation": {
        "E_st": "E_st",
        "x0": "x0",
        "k_max": "k_max",
        "substeps": "substeps",
    },
    "output": {
        "trace": "trace_file",
        "schedule": "schedule_file",
        "plot": "plot_file",
        "symbols": "symbols_file",
        "plot_signals": "plot_signals",
    },
}

_LISTS = {"lqr_Q", "lqr_R", "K_matrix", "kalman_W", "kalman_V", "L_matrix", "x0"}


def _convert(attr, text):
    if attr in _LISTS:
        return _numbers(text, attr)
    if attr in ("h", "E_st"):
        try:
            return float(text)
        except ValueError:
            raise ConfigError(f"{attr} must be a number, got {text!r}") from None
    if attr in ("k_max", "substeps"):
        try:
            return int(text)
        except ValueError:
            raise ConfigError(f"{attr} must be an integer, got {text!r}") from None
    if attr == "levels":
        return _levels(text)
    if attr in ("rho", "rhobar"):
        return _rate(text)
    if attr == "plot_signals":
        return [s.strip() for s in text.split(",") if s.strip()]
    return text.strip()


def parse_config_text(text):
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"unreadable config: {exc}") from None
    kwargs = {}
    for section in parser.sections():
        if section not in _LAYOUT:
            raise ConfigError(f"unknown section [{section}]")
        for key, raw in parser[section].items():
            if key not in _LAYOUT[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            attr = _LAYOUT[section][key]
            kwargs[attr] = _convert(attr, raw)
    return ExperimentConfig(**kwargs)


def load_config(path):
    try:
        with open(path) as fh:
            return parse_config_text(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None


def _format(value):
    if isinstance(value, (list, tuple)):
        return ", ".join(_format(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_config(cfg):
    """Normalized INI text; :func:`parse_config_text` maps it back to ``cfg``."""
    lines = []
    for section, keys in _LAYOUT.items():
        body = []
        for key, attr in keys.items():
            value = getattr(cfg, attr)
            if value is None:
                continue
            body.append(f"{key} = {_format(value)}")
        if body:
            lines.append(f"[{section}]")
            lines.extend(body)
            lines.append("")
    return "\n".join(lines)


def config_dict(cfg):
    return {f.name: getattr(cfg, f.name) for f in fields(cfg)}


def square_matrix(values, n, name):
    """Read ``values`` as ``s*I``, ``diag(values)`` or a row-major ``n x n``."""
    vals = np.asarray(values, dtype=float)
    if vals.size == 1:
        return float(vals[0]) * np.eye(n)
    if vals.size == n:
        return np.diag(vals)
    if vals.size == n * n:
        return vals.reshape(n, n)
    raise ConfigError(f"{name} needs 1, {n} or {n * n} entries, got {vals.size}")
