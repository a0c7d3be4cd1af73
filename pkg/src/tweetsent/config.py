"""
Run configuration read from a flat ``key=value`` text file.

Blank lines and lines starting with ``#`` are ignored. Keys are exactly the
``RunConfig`` field names; relative paths are resolved against the config
file's directory.
"""
import os
from dataclasses import asdict, dataclass, fields

from .exceptions import ConfigError

PATH_FIELDS = ("train_file", "dev_file", "lex_es", "lex_en", "bilingual")


@dataclass
class RunConfig:
    seq_len: int = 50
    d_emb: int = 128
    h1: int = 128
    h2: int = 64
    dropout: float = 0.4
    recurrent_dropout: float = 0.4
    l2_attn_W: float = 1e-4
    l2_attn_b: float = 1e-4
    lr: float = 0.0005
    batch_size: int = 32
    max_epochs: int = 100
    ratio: float = 0.7
    seed: int = 0
    class_weight: str = "balanced"
    segment_hashtags: bool = True
    use_features: bool = True
    min_freq: int = 1
    max_size: int = 20000
    train_file: str = ""
    dev_file: str = ""
    lex_es: str = ""
    lex_en: str = ""
    bilingual: str = ""
    out_dir: str = "run"
    record_timing: bool = False

    def to_dict(self):
        return asdict(self)

    def check_paths(self):
        if not self.train_file:
            raise ConfigError("train_file is required")
        for name in PATH_FIELDS:
            value = getattr(self, name)
            if value and not os.path.isfile(value):
                raise ConfigError(f"{name}: no such file {value!r}")

    def estimator_params(self):
        return dict(
            seq_len=self.seq_len, d_emb=self.d_emb, h1=self.h1, h2=self.h2,
            dropout=self.dropout, recurrent_dropout=self.recurrent_dropout,
            l2_attn_W=self.l2_attn_W, l2_attn_b=self.l2_attn_b, lr=self.lr,
            batch_size=self.batch_size, max_epochs=self.max_epochs, train_ratio=self.ratio,
            class_weight=None if self.class_weight == "none" else self.class_weight,
            segment_hashtags=self.segment_hashtags, use_features=self.use_features,
            min_freq=self.min_freq, max_size=self.max_size, random_state=self.seed,
        )


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _coerce(name, kind, raw):
    try:
        if kind is bool:
            low = raw.lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError(raw)
        return kind(raw)
    except ValueError:
        raise ConfigError(f"{name}: cannot parse {raw!r} as {kind.__name__}") from None


_TYPES = {"int": int, "float": float, "bool": bool, "str": str}


def parse_config(text, base_dir="."):
    types = {f.name: _TYPES[f.type] if isinstance(f.type, str) else f.type for f in fields(RunConfig)}
    values = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, raw = line.partition("=")
        key, raw = key.strip(), raw.strip()
        if not sep:
            raise ConfigError(f"line {line_no}: expected key=value")
        if key not in types:
            raise ConfigError(f"line {line_no}: unknown key {key!r}")
        values[key] = _coerce(key, types[key], raw)
    for name in PATH_FIELDS + ("out_dir",):
        if values.get(name) and not os.path.isabs(values[name]):
            values[name] = os.path.normpath(os.path.join(base_dir, values[name]))
    return RunConfig(**values)


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), os.path.dirname(os.path.abspath(path)))


def dump_config(config):
    return "".join(f"{k}={v}\n" for k, v in config.to_dict().items())
