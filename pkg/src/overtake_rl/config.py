"""Experiment configuration: one INI section per module, values written as JSON literals.

    [td3]
    gamma = 0.95
    hidden_sizes = [256, 256]

Unknown sections or keys are rejected so typos fail loudly.
"""
from __future__ import annotations

import configparser
import hashlib
import io
import json
from dataclasses import asdict, dataclass, field, fields, replace

from .env import EpisodeConfig
from .errors import ConfigError
from .ftg import FtgConfig
from .lidar import LidarConfig
from .reward import RewardConfig
from .td3.agent import Td3Config
from .vehicle import VehicleParams

CODE_VERSION = "0.1.0"


def code_version():
    return CODE_VERSION


@dataclass(frozen=True)
class TrainSettings:
    checkpoint_every: int = 10_000
    smoothing_window: int = 25  # episodes in the moving average of the reward curve

    def __post_init__(self):
        if self.checkpoint_every < 1 or self.smoothing_window < 1:
            raise ValueError("checkpoint_every and smoothing_window must be >= 1")


@dataclass(frozen=True)
class EvalSettings:
    episodes: int = 100  # per matchup
    timetrial_attempts: int = 10
    slowed_episodes: int = 100

    def __post_init__(self):
        if min(self.episodes, self.timetrial_attempts, self.slowed_episodes) < 1:
            raise ValueError("episode counts must be >= 1")


SECTIONS = {
    "vehicle": VehicleParams,
    "lidar": LidarConfig,
    "ftg": FtgConfig,
    "reward": RewardConfig,
    "episode": EpisodeConfig,
    "td3": Td3Config,
    "train": TrainSettings,
    "eval": EvalSettings,
}


@dataclass(frozen=True)
class Config:
    vehicle: VehicleParams = field(default_factory=VehicleParams)
    lidar: LidarConfig = field(default_factory=LidarConfig)
    ftg: FtgConfig = field(default_factory=FtgConfig)
    reward: RewardConfig = field(default_factory=RewardConfig)
    episode: EpisodeConfig = field(default_factory=EpisodeConfig)
    td3: Td3Config = field(default_factory=Td3Config)
    train: TrainSettings = field(default_factory=TrainSettings)
    eval: EvalSettings = field(default_factory=EvalSettings)

    def to_dict(self):
        out = {}
        for name in SECTIONS:
            d = asdict(getattr(self, name))
            out[name] = {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}
        return out

    def hash(self):
        """Short stable digest of every setting."""
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def with_overrides(self, **sections):
        """``cfg.with_overrides(td3={"batch_size": 64})`` replaces individual keys."""
        kw = {}
        for name, values in sections.items():
            if name not in SECTIONS:
                raise ConfigError(f"unknown section [{name}]")
            kw[name] = _build(name, {**asdict(getattr(self, name)), **values})
        return replace(self, **kw)


def _build(section, values):
    cls = SECTIONS[section]
    known = {f.name for f in fields(cls)}
    extra = set(values) - known
    if extra:
        raise ConfigError(f"unknown key(s) in [{section}]: {', '.join(sorted(extra))}")
    try:
        return cls(**values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{section}]: {exc}") from exc


def from_dict(d):
    kw = {}
    for name, values in d.items():
        if name not in SECTIONS:
            raise ConfigError(f"unknown section [{name}]")
        kw[name] = _build(name, dict(values))
    return Config(**kw)


def dumps(cfg):
    parser = configparser.ConfigParser(interpolation=None)
    for name, values in cfg.to_dict().items():
        parser[name] = {k: json.dumps(v) for k, v in values.items()}
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def loads(text):
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    d = {}
    for name in parser.sections():
        d[name] = {}
        for key, raw in parser[name].items():
            try:
                d[name][key] = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"[{name}] {key}: value {raw!r} is not a JSON literal") from exc
    return from_dict(d)


def load(path):
    with open(path) as fh:
        return loads(fh.read())


def dump(cfg, path):
    with open(path, "w") as fh:
        fh.write(dumps(cfg))
