"""TOML experiment configuration with strict (fail-closed) parsing.

Example::

    seed = 1
    scheme = "fdf"
    n_list = [64, 128, 256]
    trials = 2000
    rates = ["0.3", "0.3"]

    [channel]
    L = 2
    field = { char = 2, deg = 1 }
    uplink_gains = [1, 1]
    downlink_gains = [1, 1]
    noise = [{ rho = "0.1" }, { rho = "0.1" }, { rho = "0.1" }]

    [decoder]
    method = "auto"

Parsing then serialising gives back an equal configuration; unknown keys
are rejected.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

import numpy as np
import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .code import DEFAULT_BUDGET
from .field import FieldSpec, make_field
from .prob import NoisePmf, bsc
from .sim import DecoderOptions, MwrcConfig, RateAllocation

__all__ = ["ConfigError", "FieldConfig", "NoiseConfig", "ChannelConfig", "DecoderConfig",
           "ExperimentConfig", "parse_config", "load_config", "dump_config"]

Scalar = Union[int, float, str]


class ConfigError(ValueError):
    pass


def _check_keys(table: dict, allowed: set, where: str, required: set = frozenset()):
    if not isinstance(table, dict):
        raise ConfigError(f"{where}: expected a table")
    unknown = sorted(set(table) - allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(unknown)}")
    missing = sorted(required - set(table))
    if missing:
        raise ConfigError(f"{where}: missing key(s) {', '.join(missing)}")


def _int(v, where: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{where}: expected an integer, got {v!r}")
    return v


def _int_list(v, where: str) -> tuple:
    if not isinstance(v, list):
        raise ConfigError(f"{where}: expected a list")
    return tuple(_int(x, where) for x in v)


def _rational(v, where: str) -> Fraction:
    if isinstance(v, bool) or not isinstance(v, (int, float, str)):
        raise ConfigError(f"{where}: expected a number or decimal string, got {v!r}")
    try:
        return Fraction(repr(float(v))) if isinstance(v, float) else Fraction(v)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"{where}: {v!r} is not a rational number") from exc


@dataclass(frozen=True)
class FieldConfig:
    char: int = 2
    deg: int = 1
    modulus: Optional[tuple] = None

    @classmethod
    def from_dict(cls, d: dict) -> "FieldConfig":
        _check_keys(d, {"char", "deg", "modulus"}, "channel.field", {"char"})
        mod = d.get("modulus")
        return cls(_int(d["char"], "field.char"), _int(d.get("deg", 1), "field.deg"),
                   None if mod is None else _int_list(mod, "field.modulus"))

    def to_dict(self) -> dict:
        d: dict = {"char": self.char, "deg": self.deg}
        if self.modulus is not None:
            d["modulus"] = list(self.modulus)
        return d

    def build(self) -> FieldSpec:
        return make_field(self.char, self.deg, self.modulus)


@dataclass(frozen=True)
class NoiseConfig:
    """Either a binary crossover ``rho`` or a full ``pmf``."""

    rho: Optional[Scalar] = None
    pmf: Optional[tuple] = None

    @classmethod
    def from_dict(cls, d: dict, where: str) -> "NoiseConfig":
        _check_keys(d, {"rho", "pmf"}, where)
        if ("rho" in d) == ("pmf" in d):
            raise ConfigError(f"{where}: give exactly one of rho or pmf")
        if "rho" in d:
            _rational(d["rho"], where + ".rho")
            return cls(rho=d["rho"])
        pmf = d["pmf"]
        if not isinstance(pmf, list) or any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in pmf):
            raise ConfigError(f"{where}.pmf: expected a list of numbers")
        return cls(pmf=tuple(pmf))

    def to_dict(self) -> dict:
        return {"rho": self.rho} if self.rho is not None else {"pmf": list(self.pmf)}

    def build(self, F: FieldSpec) -> NoisePmf:
        if self.rho is not None:
            return bsc(float(_rational(self.rho, "rho")), F)
        return NoisePmf(F, np.array(self.pmf, dtype=float))


@dataclass(frozen=True)
class ChannelConfig:
    L: int
    field: FieldConfig
    uplink_gains: tuple
    downlink_gains: tuple
    noise: tuple

    @classmethod
    def from_dict(cls, d: dict) -> "ChannelConfig":
        keys = {"L", "field", "uplink_gains", "downlink_gains", "noise"}
        _check_keys(d, keys, "channel", {"L", "noise"})
        L = _int(d["L"], "channel.L")
        fc = FieldConfig.from_dict(d.get("field", {"char": 2}))
        up = _int_list(d.get("uplink_gains", [1] * L), "channel.uplink_gains")
        down = _int_list(d.get("downlink_gains", [1] * L), "channel.downlink_gains")
        if not isinstance(d["noise"], list):
            raise ConfigError("channel.noise: expected a list of tables")
        noise = tuple(NoiseConfig.from_dict(x, f"channel.noise[{i}]") for i, x in enumerate(d["noise"]))
        return cls(L, fc, up, down, noise)

    def to_dict(self) -> dict:
        return {"L": self.L, "field": self.field.to_dict(), "uplink_gains": list(self.uplink_gains),
                "downlink_gains": list(self.downlink_gains), "noise": [x.to_dict() for x in self.noise]}

    def build(self) -> MwrcConfig:
        F = self.field.build()
        return MwrcConfig(self.L, F, self.uplink_gains, self.downlink_gains,
                          tuple(x.build(F) for x in self.noise))


@dataclass(frozen=True)
class DecoderConfig:
    method: str = "auto"
    budget: int = DEFAULT_BUDGET
    delta: float = 1e-3
    max_iterations: int = 100_000

    @classmethod
    def from_dict(cls, d: dict) -> "DecoderConfig":
        _check_keys(d, {"method", "budget", "delta", "max_iterations"}, "decoder")
        out = cls(**d)
        if out.method not in ("auto", "ml", "isd"):
            raise ConfigError(f"decoder.method must be auto, ml or isd, got {out.method!r}")
        _int(out.budget, "decoder.budget")
        _int(out.max_iterations, "decoder.max_iterations")
        if isinstance(out.delta, bool) or not isinstance(out.delta, (int, float)) or not 0 < out.delta < 1:
            raise ConfigError("decoder.delta must be a number in (0, 1)")
        return out

    def to_dict(self) -> dict:
        return {"method": self.method, "budget": self.budget, "delta": self.delta,
                "max_iterations": self.max_iterations}

    def options(self) -> DecoderOptions:
        return DecoderOptions(self.method, self.budget, float(self.delta), self.max_iterations)


@dataclass(frozen=True)
class ExperimentConfig:
    channel: ChannelConfig
    rates: tuple
    n_list: tuple
    trials: int
    seed: int = 0
    scheme: str = "fdf"
    output: Optional[str] = None
    decoder: DecoderConfig = field(default_factory=DecoderConfig)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        keys = {"channel", "rates", "n_list", "trials", "seed", "scheme", "output", "decoder"}
        _check_keys(d, keys, "config", {"channel", "rates", "n_list", "trials"})
        if not isinstance(d["rates"], list):
            raise ConfigError("rates: expected a list")
        for i, r in enumerate(d["rates"]):
            _rational(r, f"rates[{i}]")
        seed = _int(d.get("seed", 0), "seed")
        if not 0 <= seed < 1 << 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        scheme = d.get("scheme", "fdf")
        if scheme not in ("fdf", "cdf"):
            raise ConfigError(f"scheme must be fdf or cdf, got {scheme!r}")
        output = d.get("output")
        if output is not None and not isinstance(output, str):
            raise ConfigError("output must be a string path")
        trials = _int(d["trials"], "trials")
        n_list = _int_list(d["n_list"], "n_list")
        if trials < 0 or any(n < 1 for n in n_list):
            raise ConfigError("trials must be >= 0 and blocklengths >= 1")
        return cls(ChannelConfig.from_dict(d["channel"]), tuple(d["rates"]), n_list, trials, seed,
                   scheme, output, DecoderConfig.from_dict(d.get("decoder", {})))

    def to_dict(self) -> dict:
        d: dict = {"seed": self.seed, "scheme": self.scheme, "n_list": list(self.n_list),
                   "trials": self.trials, "rates": list(self.rates)}
        if self.output is not None:
            d["output"] = self.output
        d["channel"] = self.channel.to_dict()
        d["decoder"] = self.decoder.to_dict()
        return d

    def rate_allocation(self) -> RateAllocation:
        return RateAllocation(tuple(_rational(r, "rates") for r in self.rates))

    def validate(self) -> None:
        """Build every derived object so errors surface before any trial."""
        cfg = self.channel.build()
        rates = self.rate_allocation()
        if rates.L != cfg.L:
            raise ConfigError(f"{rates.L} rates given for L = {cfg.L} users")


def parse_config(text: str) -> ExperimentConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML: {exc}") from exc
    return ExperimentConfig.from_dict(data)


def load_config(path) -> ExperimentConfig:
    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: invalid TOML: {exc}") from exc
    return ExperimentConfig.from_dict(data)


def dump_config(cfg: ExperimentConfig) -> str:
    return tomli_w.dumps(cfg.to_dict())
