"""One flat configuration object shared by the CLI, harness, and estimators."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path


class ConfigError(ValueError):
    """Bad configuration file or key; mapped to CLI exit code 2."""


@dataclass(frozen=True)
class PipelineConfig:
    # featurization
    max_features: int = 5000
    ngram_mode: str = "unigram"
    # graph construction
    sim_threshold: float = 0.35
    # graph attention model
    hidden_width: int = 64
    heads: int = 4
    leaky_slope: float = 0.2
    activation: str = "elu"
    dropout_keep: float = 0.5
    # training
    learning_rate: float = 5e-3
    epochs: int = 100
    early_stop_patience: int = 10
    class_weighting: str = "inverse_frequency"
    l2: float = 5e-4
    val_fraction: float = 0.1
    # classical baselines
    mnb_alpha: float = 1.0
    logreg_learning_rate: float = 1.0
    logreg_epochs: int = 300
    logreg_l2: float = 1e-4
    smote_k: int = 5

    def __post_init__(self) -> None:
        if self.ngram_mode not in ("unigram", "unigram+bigram"):
            raise ConfigError(f"unknown ngram_mode: {self.ngram_mode!r}")
        if self.activation not in ("elu", "identity"):
            raise ConfigError(f"unknown activation: {self.activation!r}")
        if self.class_weighting not in ("inverse_frequency", "none"):
            raise ConfigError(f"unknown class_weighting: {self.class_weighting!r}")
        if not 0.0 <= self.sim_threshold <= 1.0:
            raise ConfigError(f"sim_threshold must be in [0, 1], got {self.sim_threshold}")
        if not 0.0 < self.dropout_keep <= 1.0:
            raise ConfigError(f"dropout_keep must be in (0, 1], got {self.dropout_keep}")
        if not 0.0 < self.val_fraction < 1.0:
            raise ConfigError(f"val_fraction must be in (0, 1), got {self.val_fraction}")
        if self.learning_rate <= 0 or self.logreg_learning_rate <= 0:
            raise ConfigError("learning rates must be positive")
        if self.epochs < 1 or self.logreg_epochs < 1:
            raise ConfigError("epoch counts must be >= 1")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_FIELDS = {f.name: f.type for f in dataclasses.fields(PipelineConfig)}
_INT_KEYS = {
    "max_features", "hidden_width", "heads", "epochs",
    "early_stop_patience", "logreg_epochs", "smote_k",
}
_STR_KEYS = {"ngram_mode", "activation", "class_weighting"}


def parse_config_text(text: str, source: str = "<config>") -> PipelineConfig:
    """Parse flat ``key = value`` lines; unknown keys are rejected."""
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _FIELDS:
            raise ConfigError(f"{source}:{lineno}: unknown config key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate config key {key!r}")
        try:
            if key in _INT_KEYS:
                values[key] = int(value)
            elif key in _STR_KEYS:
                values[key] = value
            else:
                values[key] = float(value)
        except ValueError:
            raise ConfigError(f"{source}:{lineno}: bad value for {key!r}: {value!r}") from None
    try:
        return PipelineConfig(**values)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def load_config(path: str | Path | None) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    return parse_config_text(path.read_text("utf-8"), source=str(path))
