"""Run configuration: a flat ``key = value`` text file.

Blank lines and ``#`` comments are ignored. Unknown keys and malformed values
raise :class:`ConfigError`. Relative paths are resolved against the directory
holding the config file.

Keys (defaults in brackets):

    raw_dir          directory of raw variable files <variable>.csv  [raw]
    work_dir         ingest/preprocess output directory              [work]
    model_dir        trained bundles, logs and metrics               [models]
    registry         station CSV (station,latitude,longitude[,district]) [shipped]
    thresholds       monthly threshold CSV                           [shipped]
    hazards          district hazard CSV                             [shipped]
    crops            crop table JSON                                 [shipped]
    stations         comma-separated station ids, or "all"           [all]
    mode             per_station | combined                          [per_station]
    features         comma-separated model features    [rainfall,sunshine,humidity,temperature]
    impute           mean | ffill_bfill | linear | seasonal          [linear]
    input_width      [365]      label_width [365]      shift [1]
    batch_size       [64]       learning_rate [0.001]  epochs [100]
    patience         [10]       l1 [1e-5]              l2 [1e-5]
    loss             mae | mse  [mae]
    shuffle          true | false [false]
    seed             [0]
    units            [32]       n_layers [3]           bidirectional [true]
    td_units         comma-separated widths, may be empty [16]
"""

from dataclasses import dataclass, fields, replace
from pathlib import Path

from .errors import ConfigError
from .nn.model import ModelConfig
from .pipeline import WEATHER_FEATURES
from .preprocess import IMPUTATION_METHODS
from .training import TrainConfig
from .windowing import WindowSpec


def _bool(text):
    t = text.strip().lower()
    if t in ("true", "yes", "1", "on"):
        return True
    if t in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _names(text):
    return tuple(x.strip() for x in text.split(",") if x.strip())


def _ints(text):
    return tuple(int(x) for x in _names(text))


@dataclass(frozen=True)
class RunConfig:
    raw_dir: Path = Path("raw")
    work_dir: Path = Path("work")
    model_dir: Path = Path("models")
    registry: Path = None
    thresholds: Path = None
    hazards: Path = None
    crops: Path = None
    stations: tuple = ()  # empty = all
    mode: str = "per_station"
    features: tuple = WEATHER_FEATURES
    impute: str = "linear"
    input_width: int = 365
    label_width: int = 365
    shift: int = 1
    batch_size: int = 64
    learning_rate: float = 1e-3
    epochs: int = 100
    patience: int = 10
    l1: float = 1e-5
    l2: float = 1e-5
    loss: str = "mae"
    shuffle: bool = False
    seed: int = 0
    units: int = 32
    n_layers: int = 3
    bidirectional: bool = True
    td_units: tuple = (16,)

    def __post_init__(self):
        if self.mode not in ("per_station", "combined"):
            raise ConfigError(f"mode must be per_station or combined, got {self.mode!r}")
        if self.impute not in IMPUTATION_METHODS:
            raise ConfigError(f"impute must be one of {IMPUTATION_METHODS}")
        if not self.features:
            raise ConfigError("features must not be empty")
        if self.units < 1 or self.n_layers < 0:
            raise ConfigError("units must be >= 1 and n_layers >= 0")
        try:
            self.window_spec()
            self.train_config()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def window_spec(self):
        return WindowSpec(self.input_width, self.label_width, self.shift)

    def train_config(self):
        return TrainConfig(self.learning_rate, self.epochs, self.patience, self.batch_size,
                           self.l1, self.l2, self.loss, self.seed, self.shuffle)

    def model_config(self, n_features, n_targets):
        return ModelConfig(n_features, n_targets, self.units, self.n_layers,
                           self.bidirectional, tuple(self.td_units), self.seed)


_PARSERS = {
    "raw_dir": Path, "work_dir": Path, "model_dir": Path, "registry": Path,
    "thresholds": Path, "hazards": Path, "crops": Path,
    "stations": lambda t: () if t.strip().lower() == "all" else _names(t),
    "mode": str.strip, "features": _names, "impute": str.strip,
    "input_width": int, "label_width": int, "shift": int, "batch_size": int,
    "learning_rate": float, "epochs": int, "patience": int, "l1": float, "l2": float,
    "loss": str.strip, "shuffle": _bool, "seed": int, "units": int, "n_layers": int,
    "bidirectional": _bool, "td_units": _ints,
}
assert set(_PARSERS) == {f.name for f in fields(RunConfig)}


def parse_config(text, base_dir=None):
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, _, value = (p.strip() for p in line.partition("="))
        if key not in _PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            parsed = _PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None
        if isinstance(parsed, Path) and base_dir is not None and not parsed.is_absolute():
            parsed = Path(base_dir) / parsed
        values[key] = parsed
    cfg = RunConfig(**values)
    if base_dir is not None:
        # defaults are relative to the config file too
        for key in ("raw_dir", "work_dir", "model_dir"):
            if key not in values:
                cfg = replace(cfg, **{key: Path(base_dir) / getattr(cfg, key)})
    return cfg


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, path.parent)
