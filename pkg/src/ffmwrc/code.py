"""Random linear codes x = (s G) + q over a finite field, and their decoders.

Two decoders are provided:

* :func:`ml_decode` - exact maximum likelihood by enumerating every
  candidate message.  Guarded by an enumeration budget.
* :func:`isd_decode` - an information-set search for the most likely
  codeword, for message spaces too large to enumerate.  Over GF(2) it runs
  Stern's algorithm with a stopping rule that bounds, per decode, the
  probability of missing a codeword at least as likely as the one returned.

:func:`decode` picks between them and handles known message coordinates
(side information).
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

import numpy as np

from . import kernels
from .field import FieldSpec
from .prob import NoisePmf

__all__ = [
    "CodeError",
    "BadDimensions",
    "LengthMismatch",
    "MessageTooLarge",
    "BudgetExceeded",
    "EmptyCandidates",
    "DEFAULT_BUDGET",
    "LinearCode",
    "sample_code",
    "message_length",
    "map_message_to_vector",
    "vector_to_message",
    "ml_decode",
    "ml_prefers",
    "isd_decode",
    "decode",
    "pack_bits",
    "ensemble_marginal_counts",
    "ensemble_joint_counts",
    "check_ensemble",
]

DEFAULT_BUDGET = 1 << 20


class CodeError(ValueError):
    pass


class BadDimensions(CodeError):
    pass


class LengthMismatch(CodeError):
    pass


class MessageTooLarge(CodeError):
    pass


class BudgetExceeded(CodeError):
    """The candidate set is larger than the enumeration budget."""

    def __init__(self, message: str, candidates: int = 0, budget: int = 0):
        super().__init__(message)
        self.candidates = candidates
        self.budget = budget


class EmptyCandidates(CodeError):
    pass


@dataclass(frozen=True, eq=False)
class LinearCode:
    """Affine code over ``field`` with k-by-n generator ``G`` and dither ``q``."""

    field: FieldSpec
    G: np.ndarray = field(repr=False)
    q: np.ndarray = field(repr=False)

    def __post_init__(self):
        G = np.asarray(self.G, dtype=np.int64)
        q = np.asarray(self.q, dtype=np.int64)
        if G.ndim != 2 or q.ndim != 1 or G.shape[1] != q.shape[0]:
            raise BadDimensions(f"generator {G.shape} and dither {q.shape} do not match")
        for arr in (G, q):
            if arr.size and (arr.min() < 0 or arr.max() >= self.field.order):
                raise BadDimensions("code entries must be field elements")
        G.setflags(write=False)
        q.setflags(write=False)
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "q", q)

    @property
    def k(self) -> int:
        return self.G.shape[0]

    @property
    def n(self) -> int:
        return self.G.shape[1]

    @property
    def rate(self) -> float:
        """Bits per channel use carried by a full message vector."""
        return self.k * self.field.bits / self.n

    def encode(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=np.int64)
        if s.shape != (self.k,):
            raise LengthMismatch(f"message has shape {s.shape}, expected ({self.k},)")
        return self.field.vec_add(self.field.vecmat(s, self.G), self.q)

    def encode_many(self, S) -> np.ndarray:
        S = np.asarray(S, dtype=np.int64)
        return self.field.add_table[self.field.matmul(S, self.G), self.q[None, :]]

    def is_full_rank(self) -> bool:
        return self.field.rank(self.G) == self.k


def sample_code(field: FieldSpec, k: int, n: int, rng: np.random.Generator,
                full_rank: bool = False) -> LinearCode:
    """Draw G and q with i.i.d. uniform entries.

    With ``full_rank=True`` draws are repeated until G has rank k, i.e. the
    ensemble is conditioned on every message getting a distinct codeword.
    """
    if not (1 <= k <= n):
        raise BadDimensions(f"need 1 <= k <= n, got k={k}, n={n}")
    while True:
        G = rng.integers(0, field.order, size=(k, n), dtype=np.int64)
        q = rng.integers(0, field.order, size=n, dtype=np.int64)
        code = LinearCode(field, G, q)
        if not full_rank or code.is_full_rank():
            return code


def message_length(num_messages: int, field: FieldSpec) -> int:
    """Smallest k with ``num_messages <= |F|^k``."""
    if num_messages < 1:
        raise CodeError("need at least one message")
    k, cap = 0, 1
    while cap < num_messages:
        cap *= field.order
        k += 1
    return k


def map_message_to_vector(w: int, k: int, field: FieldSpec) -> np.ndarray:
    """Base-|F| digits of ``w``, least significant first."""
    w = int(w)
    if w < 0 or w >= field.order ** k:
        raise MessageTooLarge(f"message {w} does not fit in {k} symbols of {field.name}")
    out = np.zeros(k, dtype=np.int64)
    for i in range(k):
        w, out[i] = divmod(w, field.order)
    return out


def vector_to_message(s, field: FieldSpec) -> int:
    w = 0
    for d in reversed(np.asarray(s, dtype=np.int64).tolist()):
        w = w * field.order + int(d)
    return w


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack 0/1 values along the last axis into little-endian uint64 words."""
    bits = np.asarray(bits, dtype=np.uint8)
    n = bits.shape[-1]
    W = max(1, (n + 63) // 64)
    pad = np.zeros(bits.shape[:-1] + (W * 64 - n,), dtype=np.uint8)
    packed = np.packbits(np.concatenate([bits, pad], axis=-1), axis=-1, bitorder="little")
    return np.ascontiguousarray(packed).view(np.uint64).reshape(bits.shape[:-1] + (W,))


def _unpack_words(words: np.ndarray, k: int) -> np.ndarray:
    raw = np.asarray(words, dtype=np.uint64).view(np.uint8)
    return np.unpackbits(raw, bitorder="little")[:k].astype(np.int64)


# --------------------------------------------------------------------------
# decoding
# --------------------------------------------------------------------------

def _binary_orientation(noise: NoisePmf) -> Optional[bool]:
    """For GF(2): True if ML = minimum distance, False if maximum, None if all tie."""
    r = noise.probs[1]
    if r < 0.5:
        return True
    if r > 0.5:
        return False
    return None


def _ml_all(code: LinearCode, ybar: np.ndarray, noise: NoisePmf) -> int:
    """Index of the ML message for ``ybar = y - q`` over all of F^k."""
    F = code.field
    if code.k == 0:
        return 0
    if F.order == 2:
        orient = _binary_orientation(noise)
        if orient is None:
            return 0
        target = ybar if orient else 1 - ybar
        idx, w = kernels.ml_binary(pack_bits(code.G), pack_bits(target)[...])
        if w > 0 and noise.logp[1 if orient else 0] == -np.inf:
            return 0  # every candidate has likelihood zero
        return idx
    nxt = np.roll(np.arange(F.order), -1)
    rowmul = F.mul_table[np.arange(F.order)[None, :, None], code.G[:, None, :]]
    delta = F.sub_table[rowmul[:, nxt, :], rowmul]
    cls_table = np.ascontiguousarray(noise.classes[F.sub_table])
    return kernels.ml_general(np.ascontiguousarray(delta), np.ascontiguousarray(ybar),
                              F.add_table, cls_table, noise.class_logp)


def ml_decode(code: LinearCode, y, noise: NoisePmf,
              candidates: Optional[Iterable] = None,
              budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """Exact maximum-likelihood message for the received word ``y``.

    Maximises prod_t p_N(y_t - x_t(s)) over ``candidates`` (all of F^k when
    omitted).  Ties go to the smallest message under
    :func:`vector_to_message`.

    Raises
    ------
    BudgetExceeded
        If there are more than ``budget`` candidates.
    EmptyCandidates
        If an explicit candidate collection is empty.
    """
    F = code.field
    y = np.asarray(y, dtype=np.int64)
    if y.shape != (code.n,):
        raise LengthMismatch(f"received word has shape {y.shape}, expected ({code.n},)")
    if noise.field != F:
        raise CodeError("noise distribution is over a different field")

    if candidates is None:
        total = F.order ** code.k
        if total > budget:
            raise BudgetExceeded(
                f"{F.name}^{code.k} = {total} candidates exceeds the budget of {budget}",
                candidates=total, budget=budget)
        ybar = F.vec_sub(y, code.q)
        return map_message_to_vector(_ml_all(code, ybar, noise), code.k, F)

    cands = [np.asarray(c, dtype=np.int64) for c in candidates]
    if not cands:
        raise EmptyCandidates("no candidate messages")
    if len(cands) > budget:
        raise BudgetExceeded(f"{len(cands)} candidates exceeds the budget of {budget}",
                             candidates=len(cands), budget=budget)
    S = np.stack(cands)
    if S.shape[1] != code.k:
        raise LengthMismatch(f"candidates have length {S.shape[1]}, expected {code.k}")
    scores = _scores(F, y, code.encode_many(S), noise)
    keys = [vector_to_message(s, F) for s in S]
    best = max(range(len(cands)), key=lambda i: (scores[i], -keys[i]))
    return S[best].copy()


def _scores(F: FieldSpec, y: np.ndarray, X: np.ndarray, noise: NoisePmf) -> np.ndarray:
    """Log-likelihood of each row of ``X`` from the class histogram of ``y - x``."""
    diff = noise.classes[F.sub_table[y[None, :], X]]
    score = np.zeros(X.shape[0])
    for c, lp in enumerate(noise.class_logp):
        cnt = (diff == c).sum(axis=1)
        if np.isfinite(lp):
            score += cnt * lp
        else:
            score = np.where(cnt > 0, -np.inf, score)
    return score


def ml_prefers(code: LinearCode, y, noise: NoisePmf, a, b) -> bool:
    """True if exact ML over any candidate set holding ``a`` would not return ``b``.

    That is, ``a`` is strictly more likely than ``b`` given ``y``, or equally
    likely with a smaller message index.
    """
    F = code.field
    S = np.stack([np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)])
    sa, sb = _scores(F, np.asarray(y, dtype=np.int64), code.encode_many(S), noise)
    if sa != sb:
        return bool(sa > sb)
    return vector_to_message(S[0], F) < vector_to_message(S[1], F)


# -- information-set decoding ----------------------------------------------

def _subsets(lo: int, hi: int, p: int) -> np.ndarray:
    rows = []
    for size in range(p + 1):
        for comb in itertools.combinations(range(lo, hi), size):
            rows.append(list(comb) + [-1] * (3 - size))
    return np.array(rows, dtype=np.int32).reshape(-1, 3)


@functools.lru_cache(maxsize=64)
def _stern_params(k: int, n: int, p: Optional[int], ell: Optional[int]):
    k1 = (k + 1) // 2
    if p is None:
        p = 2  # measured fastest per success at n = 128..256
    p = max(0, min(3, p, k1))
    sub1, sub2 = _subsets(0, k1, p), _subsets(k1, k, p)
    sub1.setflags(write=False)
    sub2.setflags(write=False)
    if ell is None:
        ell = max(0, min(16, round(math.log2(max(len(sub2), 1))) - 2))
    ell = min(ell, n - k, 16)
    return p, ell, k1, sub1, sub2


def _stern_success(n: int, k: int, k1: int, p: int, ell: int, w: int) -> float:
    """Probability that one iteration exposes a fixed error pattern of weight w."""
    k2 = k - k1
    total = 0
    for a in range(min(p, w) + 1):
        for b in range(min(p, w - a) + 1):
            total += math.comb(k1, a) * math.comb(k2, b) * math.comb(n - k - ell, w - a - b)
    return total / math.comb(n, w)


@functools.lru_cache(maxsize=64)
def _stop_table(n, k, k1, p, ell, delta, max_iterations) -> np.ndarray:
    stop = np.empty(n + 1, dtype=np.int64)
    for w in range(n + 1):
        pi = _stern_success(n, k, k1, p, ell, w)
        if pi >= 1.0:
            stop[w] = 1
        elif pi <= 0.0:
            stop[w] = max_iterations
        else:
            stop[w] = min(max_iterations, max(1, math.ceil(math.log(delta) / math.log1p(-pi))))
    stop.setflags(write=False)
    return stop


def isd_decode(code: LinearCode, y, noise: NoisePmf, seed: int = 0, *,
               delta: float = 1e-4, max_iterations: int = 20000,
               p: Optional[int] = None, ell: Optional[int] = None) -> np.ndarray:
    """Approximate ML by information-set search; ``G`` must have full rank.

    Over GF(2) this is Stern's algorithm.  Iteration stops once, for the
    best codeword found so far (distance w), any codeword at distance <= w
    would have been exposed with probability >= 1 - ``delta``, or after
    ``max_iterations``.  Over larger fields a Lee-Brickell search (one
    information-set error) scores candidates by exact likelihood.
    """
    F = code.field
    y = np.asarray(y, dtype=np.int64)
    if y.shape != (code.n,):
        raise LengthMismatch(f"received word has shape {y.shape}, expected ({code.n},)")
    if code.k == 0:
        return np.zeros(0, dtype=np.int64)
    ybar = F.vec_sub(y, code.q)
    if F.order != 2:
        return _isd_general(code, ybar, noise, seed, delta, max_iterations)

    orient = _binary_orientation(noise)
    if orient is None:
        return np.zeros(code.k, dtype=np.int64)
    target = ybar if orient else 1 - ybar
    n, k = code.n, code.k
    p, ell, k1, sub1, sub2 = _stern_params(k, n, p, ell)
    stop = _stop_table(n, k, k1, p, ell, delta, max_iterations)
    words, w, _ = kernels.isd_binary(pack_bits(code.G), pack_bits(target), n, max_iterations,
                                     sub1, sub2, ell, int(seed) & ((1 << 64) - 1), stop)
    if w > 0 and noise.logp[1 if orient else 0] == -np.inf:
        return np.zeros(k, dtype=np.int64)
    return _unpack_words(words, k)


def _isd_general(code: LinearCode, ybar, noise, seed, delta, max_iterations):
    F = code.field
    k, n = code.k, code.n
    rng = np.random.default_rng(seed)
    best_key = None
    best_s = np.zeros(k, dtype=np.int64)
    for it in range(max_iterations):
        perm = rng.permutation(n)
        G = code.G.copy()
        M = np.eye(k, dtype=np.int64)
        piv = []
        r = 0
        for col in perm:
            if r == k:
                break
            rows = np.flatnonzero(G[r:, col]) + r
            if rows.size == 0:
                continue
            i = rows[0]
            G[[r, i]], M[[r, i]] = G[[i, r]], M[[i, r]]
            scale = int(F.inv_table[G[r, col]])
            G[r], M[r] = F.mul_table[scale, G[r]], F.mul_table[scale, M[r]]
            for j in range(k):
                if j != r and G[j, col]:
                    c = int(G[j, col])
                    G[j] = F.sub_table[G[j], F.mul_table[c, G[r]]]
                    M[j] = F.sub_table[M[j], F.mul_table[c, M[r]]]
            piv.append(col)
            r += 1
        if r < k:
            raise CodeError("generator matrix is rank deficient")
        base = ybar[piv]
        cands = [base]
        for j in range(k):
            for e in range(1, F.order):
                c = base.copy()
                c[j] = F.sub_table[c[j], e]
                cands.append(c)
        Sp = np.stack(cands)
        X = F.matmul(Sp, G)
        scores = _scores(F, ybar, X, noise)
        msgs = F.matmul(Sp, M)
        for i in range(len(Sp)):
            key = (scores[i], -vector_to_message(msgs[i], F))
            if best_key is None or key > best_key:
                best_key, best_s = key, msgs[i].copy()
        w = int(np.count_nonzero(F.sub_table[ybar, F.vecmat(best_s, code.G)]))
        pi = _stern_success(n, k, k, 1, 0, w)
        if pi >= 1.0 or (pi > 0 and (it + 1) >= math.log(delta) / math.log1p(-pi)):
            break
    return best_s


def decode(code: LinearCode, y, noise: NoisePmf, known: Optional[Mapping[int, int]] = None,
           *, method: str = "auto", budget: int = DEFAULT_BUDGET, seed: int = 0,
           delta: float = 1e-4, max_iterations: int = 20000) -> np.ndarray:
    """Decode ``y`` given the message coordinates in ``known``.

    The candidate set is every message agreeing with ``known``.  ``method``
    is ``"ml"`` (exact, raises :class:`BudgetExceeded` past ``budget``),
    ``"isd"``, or ``"auto"`` (exact when within budget, else ISD).
    """
    F = code.field
    y = np.asarray(y, dtype=np.int64)
    if y.shape != (code.n,):
        raise LengthMismatch(f"received word has shape {y.shape}, expected ({code.n},)")
    known = dict(known or {})
    free = [i for i in range(code.k) if i not in known]
    s = np.zeros(code.k, dtype=np.int64)
    shift = code.q
    if known:
        kidx = np.fromiter(known.keys(), dtype=np.int64)
        kval = np.fromiter(known.values(), dtype=np.int64)
        s[kidx] = kval
        shift = F.vec_add(F.vecmat(kval, code.G[kidx]), code.q)
    if not free:
        return s
    sub = LinearCode(F, code.G[free], shift)
    total = F.order ** len(free)
    if method == "ml" or (method == "auto" and total <= budget):
        s[free] = ml_decode(sub, y, noise, budget=budget)
    elif method in ("isd", "auto"):
        s[free] = isd_decode(sub, y, noise, seed, delta=delta, max_iterations=max_iterations)
    else:
        raise ValueError(f"unknown decoding method {method!r}")
    return s


# --------------------------------------------------------------------------
# ensemble enumeration
# --------------------------------------------------------------------------

def _all_codewords(F: FieldSpec, k: int, n: int, s: np.ndarray) -> np.ndarray:
    """Codeword of message ``s`` under every (G, q), as base-|F| integers.

    Row order enumerates (G, q) with G entries first (row-major) then q.
    """
    Q = F.order
    entries = n * (k + 1)
    idx = np.arange(Q ** entries, dtype=np.int64)
    digits = (idx[:, None] // (Q ** np.arange(entries, dtype=np.int64))[None, :]) % Q
    G = digits[:, :n * k].reshape(-1, k, n)
    q = digits[:, n * k:]
    x = q.copy()
    for j in range(k):
        x = F.add_table[x, F.mul_table[int(s[j]), G[:, j, :]]]
    return (x * (Q ** np.arange(n, dtype=np.int64))[None, :]).sum(axis=1)


def ensemble_marginal_counts(F: FieldSpec, k: int, n: int, s) -> np.ndarray:
    """For each codeword (base-|F| integer), how many (G, q) map ``s`` to it."""
    return np.bincount(_all_codewords(F, k, n, np.asarray(s)), minlength=F.order ** n)


def ensemble_joint_counts(F: FieldSpec, k: int, n: int, s1, s2) -> np.ndarray:
    """``counts[x1, x2]`` = number of (G, q) sending s1 to x1 and s2 to x2."""
    X1 = _all_codewords(F, k, n, np.asarray(s1))
    X2 = _all_codewords(F, k, n, np.asarray(s2))
    m = F.order ** n
    return np.bincount(X1 * m + X2, minlength=m * m).reshape(m, m)


def check_ensemble(F: FieldSpec, k: int, n: int):
    """Verify codeword uniformity and pairwise independence by enumeration.

    Returns ``(ok, counterexample)``.  The counterexample, when present, is a
    dict naming the messages, codewords and the offending count.
    """
    Q = F.order
    want1 = Q ** (n * k)
    want2 = Q ** (n * (k - 1))
    msgs = [map_message_to_vector(w, k, F) for w in range(Q ** k)]
    for s in msgs:
        counts = ensemble_marginal_counts(F, k, n, s)
        bad = np.flatnonzero(counts != want1)
        if bad.size:
            return False, {"s": s.tolist(), "x": int(bad[0]), "count": int(counts[bad[0]]),
                           "expected": want1}
    for a, b in itertools.combinations(range(len(msgs)), 2):
        counts = ensemble_joint_counts(F, k, n, msgs[a], msgs[b])
        bad = np.argwhere(counts != want2)
        if bad.size:
            x1, x2 = bad[0]
            return False, {"s1": msgs[a].tolist(), "s2": msgs[b].tolist(), "x1": int(x1),
                           "x2": int(x2), "count": int(counts[x1, x2]), "expected": want2}
    return True, None
