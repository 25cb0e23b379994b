"""Experiment configuration and the flat ``key = value`` config format.

A config file holds one ``key = value`` per line; ``#`` starts a comment.
A value with commas (``W = 10, 100, 1000``) makes that key a grid axis for
``sweep``; the grid is the cartesian product of all axes.
"""

from __future__ import annotations

import dataclasses
import itertools
from dataclasses import dataclass, fields

from .similarity import CLUSTER_METHODS, ModelParams


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    N: int = 10
    M: int = 2
    W: int = 100
    eta: float = 1.0
    xi: float = 2.0
    zeta: float = 35.0
    zeta_hat: float = 35.0
    C: int = 3
    cluster_method: str = "optimal"
    norm: str = "L1"
    epoch_points: int = 10
    # -1 runs exactly W epochs, so the decision epoch is t = W
    epochs: int = -1
    k: int = 3
    seed: int = 0
    # Z = (S -/+ 1) / var; false divides by sqrt(var) instead
    mkm_literal: bool = True
    synopsis: str = "dominant_mean"
    sample_size: int = 100
    absorb_factor: float = 0.1
    warmup_points: int = 50
    branching_factor: int = 50
    drop_prob: float = 0.0
    ma_window: int = 4
    # 0 builds maps only at the final epoch, 1 at every epoch, n every n-th epoch
    map_interval: int = 1
    trace: str = "stationary"
    synth_sigma: float = 4.0
    synth_spread: float = 20.0
    synth_slope: float = 0.05
    synth_shift: float = 10.0
    synth_shift_epoch: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.N < 2:
            raise ConfigError("N must be >= 2")
        if self.M < 1:
            raise ConfigError("M must be >= 1")
        if not 0 < self.eta <= 1:
            raise ConfigError("eta must be in (0, 1]")
        if self.W < 4:
            raise ConfigError("W must be >= 4")
        if not 1 <= self.k <= self.N - 1:
            raise ConfigError("k must be in [1, N-1]")
        if self.xi <= 0 or self.zeta <= 0 or self.zeta_hat <= 0:
            raise ConfigError("xi, zeta and zeta_hat must be > 0")
        if self.C < 1:
            raise ConfigError("C must be >= 1")
        if self.cluster_method not in CLUSTER_METHODS:
            raise ConfigError(f"cluster_method must be one of {', '.join(CLUSTER_METHODS)}")
        if self.norm not in ("L1", "L2"):
            raise ConfigError("norm must be L1 or L2")
        if self.synopsis not in ("dominant_mean", "sample_stats"):
            raise ConfigError("synopsis must be dominant_mean or sample_stats")
        if self.epoch_points < 1 or self.epochs < -1 or self.map_interval < 0:
            raise ConfigError("epoch_points >= 1, epochs >= -1, map_interval >= 0 required")
        if not 0 <= self.drop_prob < 1:
            raise ConfigError("drop_prob must be in [0, 1)")
        if self.ma_window < 1:
            raise ConfigError("ma_window must be >= 1")

    @property
    def n_epochs(self) -> int:
        return self.W if self.epochs == -1 else self.epochs

    @property
    def synopsis_dim(self) -> int:
        return self.M if self.synopsis == "dominant_mean" else 2 * self.M

    def model_params(self) -> ModelParams:
        return ModelParams(self.W, self.eta, self.xi, self.zeta, self.zeta_hat, self.C, self.mkm_literal, self.cluster_method)

    def replace(self, **changes) -> "SimConfig":
        try:
            return dataclasses.replace(self, **changes)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    def to_text(self) -> str:
        return "".join(f"{f.name} = {_fmt(getattr(self, f.name))}\n" for f in fields(self))


_TYPES = {f.name: f.type for f in fields(SimConfig)}


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return repr(v) if isinstance(v, float) else str(v)


def parse_value(key: str, raw: str):
    if key not in _TYPES:
        raise ConfigError(f"unknown config key {key!r}")
    kind = _TYPES[key]
    raw = raw.strip()
    try:
        if kind == "bool":
            low = raw.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return low in ("true", "1", "yes")
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None


def parse_text(text: str) -> dict[str, list]:
    """Parse config text into ``key -> list of values`` (one value unless a grid axis)."""
    out: dict[str, list] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (part.strip() for part in line.split("=", 1))
        items = [p for p in (s.strip() for s in raw.split(",")) if p]
        out[key] = [parse_value(key, p) for p in items]
    return out


def parse_overrides(pairs) -> dict[str, list]:
    return parse_text("\n".join(pairs or []))


def load(path=None, overrides=None) -> dict[str, list]:
    values = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                values = parse_text(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
    values.update(parse_overrides(overrides))
    return values


def single(values: dict[str, list]) -> SimConfig:
    """Build one config; every key must carry exactly one value."""
    kw = {}
    for key, vals in values.items():
        if len(vals) != 1:
            raise ConfigError(f"{key} must have exactly one value here, got {len(vals)}")
        kw[key] = vals[0]
    return SimConfig(**kw)


def grid(values: dict[str, list]) -> list[SimConfig]:
    keys = list(values)
    return [SimConfig(**dict(zip(keys, combo))) for combo in itertools.product(*(values[k] for k in keys))]
