"""
EVENT DETECTOR - Model Configuration
================================
All hyper-parameters, ablation switches and paths in one dataclass.

WHERE DO VALUES COME FROM?
Same idea as settings.py: python-decouple reads them, highest first:
1. --set key=value overrides from the command line
2. Process environment (decouple checks os.environ before the file)
3. The key=value config file
4. The defaults below (the published hyper-parameters)

A key nobody knows about stops everything before work starts.
"""

import dataclasses
from dataclasses import dataclass, field, fields

from decouple import Choices, Config, Csv, RepositoryEmpty, RepositoryEnv, Undefined, undefined

from .exceptions import ConfigError


ARCHITECTURES = ("eegcn", "gcn", "rgcn")
CLASSIFIER_INPUTS = ("last", "concat_layers")
LOSS_NORMALIZATIONS = ("tokens", "none")


@dataclass(frozen=True)
class ModelConfig:
    """
    Hyper-parameters and switches

    The first block holds the published values; do not change the
    defaults without a reason.
    """

    # Embeddings and layer sizes
    word_dim: int = 100
    entity_dim: int = 25
    edge_dim: int = 50
    lstm_hidden: int = 100
    gcn_hidden: int = 150
    num_layers: int = 2

    # Optimization
    dropout: float = 0.6
    alpha: float = 5.0
    lr: float = 0.1
    batch_size: int = 30
    l2: float = 1e-5
    max_len: int = 50
    max_epochs: int = 100
    patience: int = 15
    clip_norm: float = 0.0
    loss_normalization: str = "tokens"
    seed: int = 1

    # Architecture and ablation switches
    architecture: str = "eegcn"
    use_typed_labels: bool = True
    use_naeu: bool = True
    use_bilstm: bool = True
    naeu_masked: bool = False
    classifier_input: str = "last"
    add_all_self_loops: bool = False
    allow_unk_label: bool = False
    typed_label_subset: tuple = ()

    # Paths
    train_path: str = ""
    dev_path: str = ""
    test_path: str = ""
    embeddings_path: str = ""
    runs_dir: str = ""  # empty: settings.EEGCN_RUNS_DIR

    # Synthetic corpus
    synthetic_event_types: int = 5
    synthetic_sentences: int = 2600
    synthetic_dev_ratio: float = 0.1153846154
    synthetic_test_ratio: float = 0.1153846154
    synthetic_min_len: int = 9
    synthetic_max_len: int = 20
    synthetic_verbs: int = 40
    synthetic_nouns: int = 60
    synthetic_fillers: int = 30
    synthetic_event_rate: float = 0.8
    synthetic_label_blind: bool = False

    # Experiment runners
    ablation_seeds: int = 5
    sweep_seeds: int = 5
    bench_repetitions: int = 20
    bench_warmup: int = 2
    workers: int = 1

    def __post_init__(self):
        self.validate()

    def validate(self):
        """Raise ConfigError when a value is out of range"""
        problems = []
        if not 0.0 <= self.dropout < 1.0:
            problems.append(f"dropout must be in [0, 1), got {self.dropout}")
        if self.alpha < 1.0:
            problems.append(f"alpha must be >= 1, got {self.alpha}")
        for name in ("num_layers", "edge_dim", "batch_size", "gcn_hidden", "max_len"):
            if getattr(self, name) < 1:
                problems.append(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.lr < 0 or self.l2 < 0:
            problems.append("lr and l2 must be non-negative")
        if self.architecture not in ARCHITECTURES:
            problems.append(f"architecture must be one of {ARCHITECTURES}")
        if self.classifier_input not in CLASSIFIER_INPUTS:
            problems.append(f"classifier_input must be one of {CLASSIFIER_INPUTS}")
        if self.loss_normalization not in LOSS_NORMALIZATIONS:
            problems.append(f"loss_normalization must be one of {LOSS_NORMALIZATIONS}")
        if problems:
            raise ConfigError("; ".join(problems))

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_dict(self):
        data = dataclasses.asdict(self)
        data["typed_label_subset"] = list(self.typed_label_subset)
        return data

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        data = dict(data)
        if "typed_label_subset" in data:
            data["typed_label_subset"] = tuple(data["typed_label_subset"])
        return cls(**data)

    def to_text(self):
        """Serialize as key=value lines that load_config reads back"""
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = ",".join(value)
            elif isinstance(value, bool):
                value = "true" if value else "false"
            lines.append(f"{f.name}={value}")
        return "\n".join(lines) + "\n"


# ============================================
# LOADING
# ============================================

class OverrideRepository(RepositoryEmpty):
    """
    decouple repository: a config file's keys with --set overrides on top

    Args:
        path: key=value file (optional)
        overrides: dict of raw string values
    """

    def __init__(self, path=None, overrides=None):
        self.data = {}
        if path:
            self.data.update(RepositoryEnv(str(path)).data)
        self.data.update(overrides or {})

    def __contains__(self, key):
        return key in self.data

    def __getitem__(self, key):
        return self.data[key]


class OverrideConfig(Config):
    """
    decouple Config that checks --set overrides before the process environment

    Keys without an override resolve the usual decouple way: environment,
    then the repository, then the default.
    """

    def __init__(self, repository, overrides=None):
        super().__init__(repository)
        self.overrides = dict(overrides or {})

    def get(self, option, default=undefined, cast=undefined):
        if option not in self.overrides:
            return super().get(option, default=default, cast=cast)
        if isinstance(cast, Undefined):
            cast = self._cast_do_nothing
        elif cast is bool:
            cast = self._cast_boolean
        return cast(self.overrides[option])


def _cast_for(f):
    if f.name == "typed_label_subset":
        return Csv(post_process=tuple)
    if f.name == "architecture":
        return Choices(ARCHITECTURES)
    if f.name == "classifier_input":
        return Choices(CLASSIFIER_INPUTS)
    if f.name == "loss_normalization":
        return Choices(LOSS_NORMALIZATIONS)
    return {bool: bool, int: int, float: float, str: str}[type(f.default)]


def parse_overrides(pairs):
    """
    Turn ["alpha=5", "lr=0.05"] into {"alpha": "5", "lr": "0.05"}

    Raises:
        ConfigError for an item without '='
    """
    overrides = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ConfigError(f"override {pair!r} is not key=value")
        key, value = pair.split("=", 1)
        overrides[key.strip()] = value.strip()
    return overrides


def load_config(path=None, overrides=None):
    """
    Resolve a ModelConfig

    Args:
        path: optional key=value config file
        overrides: dict of raw values (from --set)

    Returns:
        ModelConfig

    Raises:
        ConfigError on unknown keys or bad values
    """
    try:
        repository = OverrideRepository(path, overrides)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc

    known = {f.name for f in fields(ModelConfig)}
    unknown = sorted(set(repository.data) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")

    reader = OverrideConfig(repository, overrides)
    values = {}
    for f in fields(ModelConfig):
        default = f.default
        if isinstance(default, tuple):
            default = ",".join(default)
        try:
            values[f.name] = reader(f.name, default=default, cast=_cast_for(f))
        except ValueError as exc:
            raise ConfigError(f"bad value for {f.name}: {exc}") from exc
    return ModelConfig(**values)
