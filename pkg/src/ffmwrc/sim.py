"""Multi-way relay channel simulation: the FDF scheme, the CDF baseline and
the Monte-Carlo harness.

Conventions
-----------
Users are indexed 0..L-1 here (node 0 of the channel model is "the relay").
All per-trial randomness comes from :func:`ffmwrc.prob.stream` keyed by
``(trial, tag, node, sub-block)``, so a trial is a pure function of
``(config, rates, n, seed, trial)`` and batches parallelise without changing
results.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import code as lc
from .field import FieldSpec, make_field
from .prob import bsc, sample_many, stream

__all__ = [
    "SimError",
    "ConfigError",
    "IndivisibleBlocklength",
    "MwrcConfig",
    "binary_config",
    "RateAllocation",
    "SubBlock",
    "SubblockSchedule",
    "build_schedule",
    "message_count",
    "DecoderOptions",
    "TrialReport",
    "BatchResult",
    "uplink",
    "downlink",
    "chain_decode",
    "FdfCodes",
    "sample_fdf_codes",
    "fdf_uplink_round",
    "fdf_downlink_round",
    "check_budget",
    "run_fdf_trial",
    "run_fdf_batch",
    "run_cdf_trial",
    "run_cdf_batch",
    "preflight",
    "wilson_interval",
]

# stream tags
_CODES, _MSGS, _UP, _DOWN, _DEC = range(5)

WILSON_Z = 1.959963984540054


class SimError(ValueError):
    pass


class ConfigError(SimError):
    pass


class IndivisibleBlocklength(SimError):
    """``n`` does not give integral sub-block lengths."""

    def __init__(self, n: int, multiple: int):
        super().__init__(f"blocklength {n} gives fractional sub-block lengths; "
                         f"n must be a multiple of {multiple}")
        self.n = n
        self.multiple = multiple


# --------------------------------------------------------------------------
# channel
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MwrcConfig:
    """Channel parameters: L users, gains and one noise pmf per node (relay first)."""

    L: int
    field: FieldSpec
    uplink_gains: tuple
    downlink_gains: tuple
    noise: tuple

    def __post_init__(self):
        if self.L < 2:
            raise ConfigError(f"need at least two users, got L={self.L}")
        up = tuple(int(h) for h in self.uplink_gains)
        down = tuple(int(h) for h in self.downlink_gains)
        for name, gains in (("uplink", up), ("downlink", down)):
            if len(gains) != self.L:
                raise ConfigError(f"{name} gains: expected {self.L}, got {len(gains)}")
            if any(not 0 < h < self.field.order for h in gains):
                raise ConfigError(f"{name} gains must be nonzero elements of {self.field.name}")
        noise = tuple(self.noise)
        if len(noise) != self.L + 1:
            raise ConfigError(f"need {self.L + 1} noise distributions (relay then users)")
        if any(pmf.field != self.field for pmf in noise):
            raise ConfigError("noise distributions must be over the channel field")
        object.__setattr__(self, "uplink_gains", up)
        object.__setattr__(self, "downlink_gains", down)
        object.__setattr__(self, "noise", noise)

    @property
    def entropies(self) -> tuple:
        return tuple(p.entropy for p in self.noise)

    @property
    def is_noiseless(self) -> bool:
        return all(p.is_noiseless for p in self.noise)


def binary_config(L: int, rho0, rhos: Sequence) -> MwrcConfig:
    """GF(2) channel with unit gains and crossover probabilities."""
    F = make_field(2)
    if len(rhos) != L:
        raise ConfigError(f"need {L} user crossover probabilities")
    noise = (bsc(rho0, F),) + tuple(bsc(r, F) for r in rhos)
    return MwrcConfig(L, F, (1,) * L, (1,) * L, noise)


def uplink(config: MwrcConfig, xs, rng: np.random.Generator) -> np.ndarray:
    """Relay output for one block: y0 = sum_i h_i x_i + N0.

    ``xs`` has one row per user (or a single symbol per user).
    """
    F = config.field
    xs = np.asarray(xs, dtype=np.int64)
    acc = np.zeros(xs.shape[1:], dtype=np.int64)
    for h, x in zip(config.uplink_gains, xs):
        acc = F.add_table[acc, F.mul_table[h, x]]
    return F.add_table[acc, sample_many(config.noise[0], rng, acc.shape)]


def downlink(config: MwrcConfig, x0, rng: np.random.Generator) -> np.ndarray:
    """User outputs y_i = h_{0,i} x0 + N_i, one row per user."""
    F = config.field
    x0 = np.asarray(x0, dtype=np.int64)
    rows = [F.add_table[F.mul_table[h, x0], sample_many(pmf, rng, x0.shape)]
            for h, pmf in zip(config.downlink_gains, config.noise[1:])]
    return np.stack(rows)


# --------------------------------------------------------------------------
# rates and schedule
# --------------------------------------------------------------------------

def _to_fraction(r) -> Fraction:
    if isinstance(r, float):
        return Fraction(repr(float(r)))
    return Fraction(r)


@dataclass(frozen=True)
class RateAllocation:
    """Exact rational rates with the rate-splitting quantities.

    Every user's message is split into a common part A_i at rate ``r_min``
    and an excess part B_i at rate ``r_prime[i]``.
    """

    rates: tuple

    def __post_init__(self):
        rates = tuple(_to_fraction(r) for r in self.rates)
        if len(rates) < 2:
            raise ConfigError("need a rate for each of at least two users")
        if any(r < 0 for r in rates):
            raise ConfigError("rates must be non-negative")
        if all(r == 0 for r in rates):
            raise ConfigError("at least one rate must be positive")
        object.__setattr__(self, "rates", rates)

    @property
    def L(self) -> int:
        return len(self.rates)

    @property
    def r_min(self) -> Fraction:
        return min(self.rates)

    @property
    def r_prime(self) -> tuple:
        return tuple(r - self.r_min for r in self.rates)

    @property
    def active(self) -> tuple:
        """Users with an excess part, in increasing index order."""
        return tuple(i for i, r in enumerate(self.r_prime) if r > 0)

    @property
    def D(self) -> int:
        return len(self.active)

    @property
    def r_min_c(self) -> Fraction:
        return sum(self.rates) - self.r_min

    def r_c(self, i: int) -> Fraction:
        return sum(self.rates) - self.rates[i]

    @property
    def is_common(self) -> bool:
        return self.D == 0


@dataclass(frozen=True)
class SubBlock:
    kind: str  # "pair" or "solo"
    length: int
    users: tuple


@dataclass(frozen=True)
class SubblockSchedule:
    blocks: tuple
    n: int

    @property
    def pairs(self) -> tuple:
        return tuple(b for b in self.blocks if b.kind == "pair")

    @property
    def solos(self) -> tuple:
        return tuple(b for b in self.blocks if b.kind == "solo")


def build_schedule(rates: RateAllocation, n: int) -> SubblockSchedule:
    """(L-1) PAIR blocks of length n R_min / R_min^c, then one SOLO block of
    length n R'_d / R_min^c per active user d.

    PAIR blocks have length zero when R_min = 0.
    """
    if n < 1:
        raise ConfigError(f"blocklength must be positive, got {n}")
    fracs = [rates.r_min / rates.r_min_c] + [rates.r_prime[d] / rates.r_min_c for d in rates.active]
    multiple = math.lcm(*(f.denominator for f in fracs))
    if n % multiple:
        raise IndivisibleBlocklength(n, multiple)
    pair_len = int(n * fracs[0])
    blocks = [SubBlock("pair", pair_len, (l, l + 1)) for l in range(rates.L - 1)]
    blocks += [SubBlock("solo", int(n * f), (d,)) for d, f in zip(rates.active, fracs[1:])]
    return SubblockSchedule(tuple(blocks), n)


def _iroot(x: int, k: int) -> int:
    """floor(x ** (1/k)) for non-negative integers."""
    if x < 2:
        return x
    r = 1 << -(-x.bit_length() // k)
    while True:
        s = ((k - 1) * r + x // r ** (k - 1)) // k
        if s >= r:
            return r
        r = s


def message_count(n: int, rate) -> int:
    """floor(2^(n R)), the size of a rate-R message set over n channel uses."""
    e = n * _to_fraction(rate)
    return _iroot(1 << e.numerator, e.denominator)


def _uniform_below(m: int, rng: np.random.Generator) -> int:
    if m <= 1:
        return 0
    if m <= 1 << 62:
        return int(rng.integers(0, m))
    nbits = (m - 1).bit_length()
    nbytes = (nbits + 7) // 8
    while True:
        v = int.from_bytes(rng.bytes(nbytes), "little") & ((1 << nbits) - 1)
        if v < m:
            return v


# --------------------------------------------------------------------------
# reports
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DecoderOptions:
    """How every decoder in a trial runs; see :func:`ffmwrc.code.decode`."""

    method: str = "auto"
    budget: int = lc.DEFAULT_BUDGET
    delta: float = 1e-3
    max_iterations: int = 100_000


@dataclass(frozen=True)
class TrialReport:
    """Outcome of one trial.

    ``relay_ok`` has one flag per decoded sub-block; ``downlink_ok[i]`` says
    whether user i recovered the relay's function tuple; ``peer_ok[i][j]``
    whether user i got user j's message.  ``certified`` marks errors that
    exact ML decoding would also have made (some decoder output was at
    least as likely as the truth).
    """

    relay_ok: tuple
    downlink_ok: tuple
    peer_ok: tuple
    certified: bool = False

    @property
    def error(self) -> bool:
        return not all(all(row) for row in self.peer_ok)

    @property
    def relay_error(self) -> bool:
        return not all(self.relay_ok)

    @property
    def user_error(self) -> bool:
        """A downlink failure with a clean relay."""
        return not self.relay_error and not all(self.downlink_ok)


def wilson_interval(errors: int, trials: int, z: float = WILSON_Z) -> tuple:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        return 0.0, 1.0
    p = errors / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    lo = 0.0 if errors == 0 else max(0.0, centre - half)
    hi = 1.0 if errors == trials else min(1.0, centre + half)
    return lo, hi


@dataclass(frozen=True)
class BatchResult:
    scheme: str
    n: int
    trials: int
    errors: int
    relay_errors: int
    user_errors: int
    certified_errors: int
    seed: int

    @property
    def p_e(self) -> float:
        return self.errors / self.trials if self.trials else 0.0

    @property
    def ci(self) -> tuple:
        return wilson_interval(self.errors, self.trials)

    @property
    def relay_rate(self) -> float:
        return self.relay_errors / self.trials if self.trials else 0.0

    @property
    def user_rate(self) -> float:
        return self.user_errors / self.trials if self.trials else 0.0


def _aggregate(scheme: str, n: int, seed: int, reports) -> BatchResult:
    reports = list(reports)
    return BatchResult(
        scheme=scheme, n=n, trials=len(reports),
        errors=sum(r.error for r in reports),
        relay_errors=sum(r.relay_error for r in reports),
        user_errors=sum(r.user_error for r in reports),
        certified_errors=sum(r.error and r.certified for r in reports),
        seed=seed,
    )


# --------------------------------------------------------------------------
# FDF
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FdfCodes:
    """Codes for one FDF block.

    ``pair`` shares one generator across users with per-user dithers
    (``pair_dithers[i]``); ``solo[d]`` is user d's own code; ``down`` is the
    relay's broadcast code for the concatenated function tuple.
    """

    k_a: int
    k_b: dict
    pair_G: Optional[np.ndarray]
    pair_dithers: tuple
    solo: dict
    down: lc.LinearCode

    def pair_code(self, i: int) -> lc.LinearCode:
        return lc.LinearCode(self.down.field, self.pair_G, self.pair_dithers[i])


@dataclass(frozen=True)
class _Layout:
    schedule: SubblockSchedule
    m_a: int
    m_b: dict
    k_a: int
    k_b: dict

    @property
    def u_len(self) -> int:
        return (len(self.schedule.pairs)) * self.k_a + sum(self.k_b.values())

    def u_slices(self):
        """Slice of U for each PAIR block, then each SOLO user."""
        out, pos = [], 0
        for _ in self.schedule.pairs:
            out.append(slice(pos, pos + self.k_a))
            pos += self.k_a
        for d in sorted(self.k_b):
            out.append(slice(pos, pos + self.k_b[d]))
            pos += self.k_b[d]
        return out


def _layout(config: MwrcConfig, rates: RateAllocation, n: int) -> _Layout:
    if rates.L != config.L:
        raise ConfigError(f"{rates.L} rates given for {config.L} users")
    F = config.field
    sched = build_schedule(rates, n)
    m_a = message_count(n, rates.r_min)
    k_a = lc.message_length(m_a, F) if m_a > 1 else 0
    m_b, k_b = {}, {}
    for d in rates.active:
        m_b[d] = message_count(n, rates.r_prime[d])
        k_b[d] = lc.message_length(m_b[d], F) if m_b[d] > 1 else 0
    lay = _Layout(sched, m_a, m_b, k_a, k_b)
    pair_len = sched.pairs[0].length
    if k_a > pair_len:
        raise ConfigError(f"k_A = {k_a} exceeds the PAIR sub-block length {pair_len}")
    for blk in sched.solos:
        d = blk.users[0]
        if k_b[d] > blk.length:
            raise ConfigError(f"k_B = {k_b[d]} for user {d} exceeds its SOLO length {blk.length}")
    if lay.u_len > n:
        raise ConfigError(f"function tuple of {lay.u_len} symbols does not fit the downlink block n={n}")
    return lay


def _code_or_none(F, k, length, rng):
    if k == 0 or length == 0:
        return None
    return lc.sample_code(F, k, length, rng, full_rank=True)


def sample_fdf_codes(config: MwrcConfig, lay: _Layout, rng: np.random.Generator) -> FdfCodes:
    F = config.field
    pair_len = lay.schedule.pairs[0].length
    pair = _code_or_none(F, lay.k_a, pair_len, rng)
    dithers = tuple(rng.integers(0, F.order, size=pair_len, dtype=np.int64) for _ in range(config.L))
    solo = {}
    for blk in lay.schedule.solos:
        d = blk.users[0]
        solo[d] = _code_or_none(F, lay.k_b[d], blk.length, rng)
    down = lc.sample_code(F, max(lay.u_len, 1), lay.schedule.n, rng, full_rank=True)
    return FdfCodes(lay.k_a, dict(lay.k_b), None if pair is None else pair.G, dithers, solo, down)


def _stage_seed(seed: int, trial: int, *key: int) -> int:
    return int(stream(seed, trial, _DEC, *key).integers(0, 1 << 63))


def _decode(code, y, noise, known, opts: DecoderOptions, dseed: int):
    return lc.decode(code, y, noise, known, method=opts.method, budget=opts.budget,
                     seed=dseed, delta=opts.delta, max_iterations=opts.max_iterations)


def _encode_users(config, lay, codes, s_a, s_b):
    """Each user's transmitted block; depends on its own message parts only."""
    n = lay.schedule.n
    X = np.zeros((config.L, n), dtype=np.int64)
    pos = 0
    for blk in lay.schedule.blocks:
        seg = slice(pos, pos + blk.length)
        pos += blk.length
        if blk.length == 0:
            continue
        for i in blk.users:
            if blk.kind == "pair":
                code = codes.pair_code(i) if codes.pair_G is not None else None
                X[i, seg] = code.encode(s_a[i]) if code is not None else codes.pair_dithers[i]
            else:
                code = codes.solo[i]
                X[i, seg] = code.encode(s_b[i]) if code is not None else 0
    return X


def fdf_uplink_round(config: MwrcConfig, lay: _Layout, codes: FdfCodes, y0: np.ndarray,
                     opts: DecoderOptions, seed: int, trial: int):
    """Relay decoding of every sub-block.

    Returns ``(U_hat, parts)`` where ``parts`` holds per-block
    ``(code, scaled_y, noise, estimate)`` for error certification.
    """
    F = config.field
    h = config.uplink_gains
    parts = []
    pos = 0
    for b, blk in enumerate(lay.schedule.blocks):
        seg = y0[pos:pos + blk.length]
        pos += blk.length
        if blk.kind == "pair":
            l, r = blk.users
            if lay.k_a == 0:
                parts.append((None, None, None, np.zeros(0, dtype=np.int64)))
                continue
            q = F.vec_add(F.scale(h[l], codes.pair_dithers[l]), F.scale(h[r], codes.pair_dithers[r]))
            code = lc.LinearCode(F, codes.pair_G, q)
            noise = config.noise[0]
            y = seg
        else:
            d = blk.users[0]
            code = codes.solo[d]
            if code is None:
                parts.append((None, None, None, np.zeros(0, dtype=np.int64)))
                continue
            hinv = F.inv(h[d])
            y = F.scale(hinv, seg)
            noise = config.noise[0].scaled(hinv)
        est = _decode(code, y, noise, None, opts, _stage_seed(seed, trial, 0, b))
        parts.append((code, y, noise, est))
    U = np.concatenate([p[3] for p in parts]) if parts else np.zeros(0, dtype=np.int64)
    return U, parts


def fdf_downlink_round(config: MwrcConfig, lay: _Layout, codes: FdfCodes, Y: np.ndarray,
                       s_b: dict, opts: DecoderOptions, seed: int, trial: int):
    """Each user's estimate of U, decoding only over candidates that agree
    with its own S(B_i).  Returns a list of ``(scaled_y, noise, known, U_i)``."""
    F = config.field
    slices = lay.u_slices()
    n_pair = len(lay.schedule.pairs)
    solo_pos = {d: slices[n_pair + m] for m, d in enumerate(sorted(lay.k_b))}
    out = []
    for i in range(config.L):
        hinv = F.inv(config.downlink_gains[i])
        y = F.scale(hinv, Y[i])
        noise = config.noise[i + 1].scaled(hinv)
        known = {}
        if i in solo_pos:
            sl = solo_pos[i]
            known = {sl.start + t: int(v) for t, v in enumerate(s_b[i])}
        if lay.u_len == 0:
            out.append((y, noise, known, np.zeros(0, dtype=np.int64)))
            continue
        U_i = _decode(codes.down, y, noise, known, opts, _stage_seed(seed, trial, 1, i))
        out.append((y, noise, known, U_i))
    return out


def chain_decode(field: FieldSpec, gains: Sequence[int], pair_sums: Sequence, i: int, own):
    """Recover every S(A_j) from the pair sums S(A_{l,l+1}) and S(A_i).

    Forward sweep j = i+1..L-1 then backward sweep j = i-1..0, with
    S(A_{l,l+1}) = h_l S(A_l) + h_{l+1} S(A_{l+1}).
    """
    F = field
    L = len(gains)
    A = [None] * L
    A[i] = np.asarray(own, dtype=np.int64)
    for j in range(i, L - 1):
        t = F.vec_sub(pair_sums[j], F.scale(gains[j], A[j]))
        A[j + 1] = F.scale(F.inv(gains[j + 1]), t)
    for j in range(i - 1, -1, -1):
        t = F.vec_sub(pair_sums[j], F.scale(gains[j + 1], A[j + 1]))
        A[j] = F.scale(F.inv(gains[j]), t)
    return A


def check_budget(config: MwrcConfig, rates: RateAllocation, n: int,
                 opts: DecoderOptions = DecoderOptions()) -> None:
    """Raise :class:`ffmwrc.code.BudgetExceeded` before any trial if a strict
    ML run would exceed the enumeration budget."""
    lay = _layout(config, rates, n)
    if opts.method != "ml":
        return
    q = config.field.order
    checks = [("relay PAIR decoding, k_A", lay.k_a)]
    checks += [(f"relay SOLO decoding of user {d + 1}, k_B", k) for d, k in lay.k_b.items()]
    for i in range(config.L):
        checks.append((f"downlink decoding at user {i + 1}, free symbols", lay.u_len - lay.k_b.get(i, 0)))
    for what, k in checks:
        if q ** k > opts.budget:
            raise lc.BudgetExceeded(f"{what} = {k}: {q}^{k} candidates exceeds the budget of {opts.budget}",
                                    candidates=q ** k, budget=opts.budget)


def run_fdf_trial(config: MwrcConfig, rates: RateAllocation, n: int, seed: int,
                  trial: int = 0, opts: DecoderOptions = DecoderOptions()) -> TrialReport:
    """One FDF block: uplink functional decoding, downlink broadcast, chain decoding."""
    return _fdf_trial(config, _layout(config, rates, n), seed, trial, opts)


def _fdf_trial(config, lay, seed, trial, opts) -> TrialReport:
    F = config.field
    L = config.L
    codes = sample_fdf_codes(config, lay, stream(seed, trial, _CODES))
    mrng = stream(seed, trial, _MSGS)
    w_a = [_uniform_below(lay.m_a, mrng) for _ in range(L)]
    w_b = {d: _uniform_below(lay.m_b[d], mrng) for d in sorted(lay.k_b)}
    s_a = [lc.map_message_to_vector(w, lay.k_a, F) for w in w_a]
    s_b = {d: lc.map_message_to_vector(w, lay.k_b[d], F) for d, w in w_b.items()}

    X = _encode_users(config, lay, codes, s_a, s_b)
    y0 = uplink(config, X, stream(seed, trial, _UP))
    U_hat, parts = fdf_uplink_round(config, lay, codes, y0, opts, seed, trial)

    h = config.uplink_gains
    truth = [F.vec_add(F.scale(h[l], s_a[l]), F.scale(h[l + 1], s_a[l + 1])) for l in range(L - 1)]
    truth += [s_b[d] for d in sorted(lay.k_b)]
    relay_ok = tuple(bool(np.array_equal(p[3], t)) for p, t in zip(parts, truth))
    certified = any(not ok and lc.ml_prefers(p[0], p[1], p[2], p[3], t)
                    for ok, p, t in zip(relay_ok, parts, truth))

    x0 = codes.down.encode(U_hat if lay.u_len else np.zeros(1, dtype=np.int64))
    Y = downlink(config, x0, stream(seed, trial, _DOWN))
    down = fdf_downlink_round(config, lay, codes, Y, s_b, opts, seed, trial)
    downlink_ok = tuple(bool(np.array_equal(d[3], U_hat)) for d in down)
    for ok, (y, noise, known, U_i) in zip(downlink_ok, down):
        if not ok and not certified and all(relay_ok):
            free = [t for t in range(lay.u_len) if t not in known]
            kn = sorted(known)
            shift = F.vecmat(np.array([known[t] for t in kn], dtype=np.int64), codes.down.G[kn])
            sub = lc.LinearCode(F, codes.down.G[free], F.vec_add(shift, codes.down.q))
            certified = lc.ml_prefers(sub, y, noise, U_i[free], U_hat[free])

    slices = lay.u_slices()
    n_pair = len(lay.schedule.pairs)
    peer_ok = []
    for i, (_, _, _, U_i) in enumerate(down):
        sums = [U_i[slices[l]] for l in range(n_pair)]
        A = chain_decode(F, h, sums, i, s_a[i]) if lay.k_a else [np.zeros(0, dtype=np.int64)] * L
        B = {d: U_i[slices[n_pair + m]] for m, d in enumerate(sorted(lay.k_b))}
        row = []
        for j in range(L):
            ok = bool(np.array_equal(A[j], s_a[j]))
            if j in B:
                ok = ok and bool(np.array_equal(B[j], s_b[j]))
            row.append(ok)
        peer_ok.append(tuple(row))
    return TrialReport(relay_ok, downlink_ok, tuple(peer_ok), certified)


def _run_batch(fn, trials: int, threads: int):
    if threads <= 1 or trials <= 1:
        return [fn(t) for t in range(trials)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(trials)))


def run_fdf_batch(config: MwrcConfig, rates: RateAllocation, n: int, trials: int, seed: int,
                  opts: DecoderOptions = DecoderOptions(), threads: int = 1) -> BatchResult:
    """Independent FDF trials 0..trials-1; the result does not depend on ``threads``."""
    lay = _layout(config, rates, n)
    check_budget(config, rates, n, opts)
    reports = _run_batch(lambda t: _fdf_trial(config, lay, seed, t, opts), trials, threads)
    return _aggregate("fdf", n, seed, reports)


# --------------------------------------------------------------------------
# CDF baseline (two users)
# --------------------------------------------------------------------------

def _cdf_layout(config: MwrcConfig, rates: RateAllocation, n: int):
    if config.L != 2 or rates.L != 2:
        raise ConfigError("the CDF baseline is defined for two users")
    F = config.field
    m = [message_count(n, r) for r in rates.rates]
    k = [lc.message_length(mi, F) if mi > 1 else 0 for mi in m]
    if sum(k) > n:
        raise ConfigError(f"joint message of {sum(k)} symbols does not fit n={n}")
    if sum(k) == 0:
        raise ConfigError("both messages are empty")
    return m, k


def _stacked_code(F, k, n, rng):
    """Two generators drawn until their stack has full rank."""
    while True:
        G = rng.integers(0, F.order, size=(sum(k), n), dtype=np.int64)
        if F.rank(G) == sum(k):
            q = [rng.integers(0, F.order, size=n, dtype=np.int64) for _ in range(2)]
            return G, q


def run_cdf_trial(config: MwrcConfig, rates: RateAllocation, n: int, seed: int,
                  trial: int = 0, opts: DecoderOptions = DecoderOptions()) -> TrialReport:
    """Relay decodes both messages jointly, then broadcasts the pair; each
    user decodes the other message with its own as side information."""
    m, k = _cdf_layout(config, rates, n)
    return _cdf_trial(config, m, k, n, seed, trial, opts)


def _cdf_trial(config, m, k, n, seed, trial, opts) -> TrialReport:
    F = config.field
    h = config.uplink_gains
    crng = stream(seed, trial, _CODES)
    G, q = _stacked_code(F, k, n, crng)
    down = lc.sample_code(F, sum(k), n, crng, full_rank=True)
    mrng = stream(seed, trial, _MSGS)
    s = [lc.map_message_to_vector(_uniform_below(m[i], mrng), k[i], F) for i in range(2)]
    G1, G2 = G[:k[0]], G[k[0]:]
    X = np.stack([F.vec_add(F.vecmat(s[0], G1), q[0]), F.vec_add(F.vecmat(s[1], G2), q[1])])
    y0 = uplink(config, X, stream(seed, trial, _UP))

    # the relay sees one code with generator [h1 G1; h2 G2]
    joint = lc.LinearCode(F, np.vstack([F.scale(h[0], G1), F.scale(h[1], G2)]),
                          F.vec_add(F.scale(h[0], q[0]), F.scale(h[1], q[1])))
    truth = np.concatenate(s)
    est = _decode(joint, y0, config.noise[0], None, opts, _stage_seed(seed, trial, 0, 0))
    relay_ok = (bool(np.array_equal(est, truth)),)
    certified = not relay_ok[0] and lc.ml_prefers(joint, y0, config.noise[0], est, truth)

    Y = downlink(config, down.encode(est), stream(seed, trial, _DOWN))
    downlink_ok, peer_ok = [], []
    for i in range(2):
        hinv = F.inv(config.downlink_gains[i])
        y = F.scale(hinv, Y[i])
        noise = config.noise[i + 1].scaled(hinv)
        own = range(0, k[0]) if i == 0 else range(k[0], k[0] + k[1])
        known = {t: int(truth[t]) for t in own}
        got = _decode(down, y, noise, known, opts, _stage_seed(seed, trial, 1, i))
        downlink_ok.append(bool(np.array_equal(got, est)))
        other = slice(k[0], k[0] + k[1]) if i == 0 else slice(0, k[0])
        ok = bool(np.array_equal(got[other], truth[other]))
        peer_ok.append((True, ok) if i == 0 else (ok, True))
        if not downlink_ok[-1] and not certified and relay_ok[0]:
            free = [t for t in range(sum(k)) if t not in known]
            kn = sorted(known)
            sub = lc.LinearCode(F, down.G[free], F.vec_add(F.vecmat(truth[kn], down.G[kn]), down.q))
            certified = lc.ml_prefers(sub, y, noise, got[free], est[free])
    return TrialReport(relay_ok, tuple(downlink_ok), tuple(peer_ok), certified)


def _check_cdf_budget(config, k, opts):
    if opts.method == "ml" and config.field.order ** sum(k) > opts.budget:
        raise lc.BudgetExceeded(
            f"relay joint decoding, k1 + k2 = {sum(k)}: exceeds the budget of {opts.budget}",
            candidates=config.field.order ** sum(k), budget=opts.budget)


def run_cdf_batch(config: MwrcConfig, rates: RateAllocation, n: int, trials: int, seed: int,
                  opts: DecoderOptions = DecoderOptions(), threads: int = 1) -> BatchResult:
    m, k = _cdf_layout(config, rates, n)
    _check_cdf_budget(config, k, opts)
    reports = _run_batch(lambda t: _cdf_trial(config, m, k, n, seed, t, opts), trials, threads)
    return _aggregate("cdf", n, seed, reports)


def preflight(scheme: str, config: MwrcConfig, rates: RateAllocation, n: int,
              opts: DecoderOptions = DecoderOptions()) -> None:
    """Raise every layout or budget error a batch at blocklength ``n`` would hit."""
    if scheme == "fdf":
        check_budget(config, rates, n, opts)
    elif scheme == "cdf":
        _check_cdf_budget(config, _cdf_layout(config, rates, n)[1], opts)
    else:
        raise ConfigError(f"unknown scheme {scheme!r}")
