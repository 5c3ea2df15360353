"""Noise distributions over a finite field, entropies and seeded sampling."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

import numpy as np

from .field import FieldSpec, make_field

__all__ = [
    "InvalidPmf",
    "OutOfRange",
    "NoisePmf",
    "entropy",
    "binary_entropy",
    "bsc",
    "point_mass",
    "uniform",
    "sample",
    "sample_many",
    "stream",
]

Number = Union[float, Fraction, str]


class InvalidPmf(ValueError):
    pass


class OutOfRange(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class NoisePmf:
    """A probability mass function over the elements of ``field``.

    ``probs[a]`` is the probability of the element with integer encoding
    ``a``.  Vectors that sum to within 1e-9 of one are renormalised.
    """

    field: FieldSpec
    probs: np.ndarray = field(repr=False)

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64).copy()
        if p.shape != (self.field.order,):
            raise InvalidPmf(f"need {self.field.order} probabilities, got shape {p.shape}")
        if not np.all(np.isfinite(p)) or p.min() < 0 or p.max() > 1:
            raise InvalidPmf("probabilities must lie in [0, 1]")
        total = p.sum()
        if abs(total - 1.0) > 1e-9:
            raise InvalidPmf(f"probabilities sum to {total!r}, not 1")
        p /= total
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)
        with np.errstate(divide="ignore"):
            logp = np.log(p)
        logp.setflags(write=False)
        object.__setattr__(self, "_logp", logp)
        cdf = np.cumsum(p)
        cdf[-1] = 1.0
        object.__setattr__(self, "_cdf", cdf)
        vals, cls = np.unique(p, return_inverse=True)
        with np.errstate(divide="ignore"):
            clogp = np.zeros(self.field.order)
            clogp[:vals.size] = np.log(vals)
        cls = cls.astype(np.int64).reshape(-1)
        cls.setflags(write=False)
        clogp.setflags(write=False)
        object.__setattr__(self, "_classes", cls)
        object.__setattr__(self, "_class_logp", clogp)

    @property
    def logp(self) -> np.ndarray:
        """Natural-log probabilities, ``-inf`` where the mass is zero."""
        return self._logp

    @property
    def cdf(self) -> np.ndarray:
        return self._cdf

    @property
    def classes(self) -> np.ndarray:
        """Index of each element's probability among the distinct values.

        Scoring a histogram over classes instead of elements makes equal
        likelihoods produce bit-identical floating-point sums.
        """
        return self._classes

    @property
    def class_logp(self) -> np.ndarray:
        """Log-probability of each class, zero-padded to length |F|."""
        return self._class_logp

    @property
    def entropy(self) -> float:
        return entropy(self)

    @property
    def is_noiseless(self) -> bool:
        return self.probs[0] == 1.0

    def scaled(self, c: int) -> "NoisePmf":
        """Distribution of ``c * N``; a permutation of ``probs`` for c != 0."""
        out = np.zeros_like(self.probs)
        np.add.at(out, self.field.mul_table[c, np.arange(self.field.order)], self.probs)
        return NoisePmf(self.field, out)

    def __eq__(self, other):
        if not isinstance(other, NoisePmf):
            return NotImplemented
        return self.field == other.field and np.array_equal(self.probs, other.probs)

    def __hash__(self):
        return hash((self.field, self.probs.tobytes()))


def entropy(pmf: NoisePmf) -> float:
    """Shannon entropy in bits, with 0 log 0 = 0."""
    p = pmf.probs[pmf.probs > 0]
    return float(-(p * np.log2(p)).sum()) + 0.0


def binary_entropy(rho: Number) -> float:
    """H(rho) = -rho log2 rho - (1-rho) log2(1-rho)."""
    r = float(Fraction(rho)) if isinstance(rho, str) else float(rho)
    if not 0.0 <= r <= 1.0:
        raise OutOfRange(f"crossover probability {rho!r} outside [0, 1]")
    if r == 0.0 or r == 1.0:
        return 0.0
    return float(-r * np.log2(r) - (1 - r) * np.log2(1 - r))


_GF2 = None


def bsc(rho: Number, field: FieldSpec | None = None) -> NoisePmf:
    """Binary noise with Pr{N = 1} = rho over GF(2)."""
    global _GF2
    r = float(Fraction(rho)) if isinstance(rho, str) else float(rho)
    if not 0.0 <= r <= 1.0:
        raise OutOfRange(f"crossover probability {rho!r} outside [0, 1]")
    if field is None:
        if _GF2 is None:
            _GF2 = make_field(2, 1)
        field = _GF2
    if field.order != 2:
        raise InvalidPmf("a crossover probability only describes noise over GF(2)")
    return NoisePmf(field, np.array([1.0 - r, r]))


def point_mass(field: FieldSpec, at: int = 0) -> NoisePmf:
    p = np.zeros(field.order)
    p[at] = 1.0
    return NoisePmf(field, p)


def uniform(field: FieldSpec) -> NoisePmf:
    return NoisePmf(field, np.full(field.order, 1.0 / field.order))


def sample(pmf: NoisePmf, rng: np.random.Generator) -> int:
    """One draw by inverse CDF over the element encoding order."""
    u = rng.random()
    return int(min(np.searchsorted(pmf.cdf, u, side="right"), pmf.field.order - 1))


def sample_many(pmf: NoisePmf, rng: np.random.Generator, size) -> np.ndarray:
    """``size`` i.i.d. draws; same stream as repeated :func:`sample` calls."""
    u = rng.random(size)
    out = np.searchsorted(pmf.cdf, u, side="right")
    return np.minimum(out, pmf.field.order - 1).astype(np.int64)


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for ``(seed, key...)``.

    Uses the counter-based Philox bit generator keyed through a
    ``SeedSequence`` spawn key, so any (trial, node, sub-block, ...) tuple
    maps to its own stream without shared state.
    """
    ss = np.random.SeedSequence(entropy=int(seed) & ((1 << 64) - 1), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))
