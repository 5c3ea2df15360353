"""Arithmetic in GF(l^z) backed by precomputed operation tables.

Elements are plain integers in ``[0, order)``.  The base-``l`` digits of an
element (least significant first) are the coefficients of its residue
polynomial, so ``0`` is the additive identity and ``1`` the multiplicative one.

All tables are numpy arrays, which means every operation also works
elementwise on integer arrays::

    >>> F = make_field(2, 2)
    >>> F.mul(2, 2)        # alpha * alpha = alpha + 1
    3
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np

__all__ = [
    "FieldError",
    "NotPrime",
    "NotIrreducible",
    "DegreeMismatch",
    "ZeroInverse",
    "FieldSpec",
    "make_field",
    "is_prime",
    "find_factor",
    "add",
    "neg",
    "sub",
    "mul",
    "inv",
    "power",
]

MAX_ORDER = 1 << 16


class FieldError(ValueError):
    """Base class for invalid field construction or use."""


class NotPrime(FieldError):
    pass


class NotIrreducible(FieldError):
    """Raised for a reducible modulus; ``factor`` holds a witness divisor."""

    def __init__(self, message: str, factor: Optional[tuple[int, ...]] = None):
        super().__init__(message)
        self.factor = factor


class DegreeMismatch(FieldError):
    pass


class ZeroInverse(ZeroDivisionError):
    pass


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


# Polynomials over Z_p are coefficient tuples, lowest degree first, no
# trailing zeros except for the zero polynomial ``()``.

def _trim(c: Sequence[int]) -> tuple[int, ...]:
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def _polymod(a: Sequence[int], m: Sequence[int], p: int) -> tuple[int, ...]:
    a = list(_trim(a))
    m = _trim(m)
    lead_inv = pow(m[-1], p - 2, p)
    dm = len(m) - 1
    while len(a) - 1 >= dm and a:
        coef = a[-1] * lead_inv % p
        shift = len(a) - 1 - dm
        for i, mi in enumerate(m):
            a[shift + i] = (a[shift + i] - coef * mi) % p
        a = list(_trim(a))
    return tuple(a)


def _monic_polys(p: int, deg: int) -> Iterator[tuple[int, ...]]:
    """Monic polynomials of exact degree ``deg`` in lexicographic order.

    The order compares coefficient vectors from the highest non-leading
    coefficient down, so for p=2, deg=2 it yields x^2, x^2+1, x^2+x, x^2+x+1.
    """
    for tail in itertools.product(range(p), repeat=deg):
        yield tuple(reversed(tail)) + (1,)


def find_factor(modulus: Sequence[int], p: int) -> Optional[tuple[int, ...]]:
    """Return a monic proper divisor of ``modulus`` over Z_p, or None.

    Trial division by every monic polynomial of degree 1..deg/2.
    """
    m = _trim(modulus)
    deg = len(m) - 1
    for d in range(1, deg // 2 + 1):
        for cand in _monic_polys(p, d):
            if not _polymod(m, cand, p):
                return cand
    return None


def _smallest_irreducible(p: int, deg: int) -> tuple[int, ...]:
    for cand in _monic_polys(p, deg):
        if find_factor(cand, p) is None:
            return cand
    raise AssertionError("an irreducible polynomial exists for every degree")


@dataclass(frozen=True, eq=False)
class FieldSpec:
    """The finite field GF(characteristic^extension_degree).

    Build instances with :func:`make_field`; the constructor does not
    validate its arguments.
    """

    characteristic: int
    extension_degree: int
    modulus: tuple[int, ...]
    add_table: np.ndarray = field(repr=False)
    mul_table: np.ndarray = field(repr=False)
    neg_table: np.ndarray = field(repr=False)
    inv_table: np.ndarray = field(repr=False)

    @property
    def order(self) -> int:
        return self.characteristic ** self.extension_degree

    @property
    def bits(self) -> float:
        """log2 of the field order."""
        return float(np.log2(self.order))

    @property
    def name(self) -> str:
        return f"GF({self.order})"

    @property
    def sub_table(self) -> np.ndarray:
        # sub_table[a, b] = a - b
        return self.add_table[:, self.neg_table]

    def __repr__(self) -> str:
        return f"FieldSpec({self.name}, modulus={list(self.modulus)})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FieldSpec):
            return NotImplemented
        return (self.characteristic, self.extension_degree, self.modulus) == (
            other.characteristic, other.extension_degree, other.modulus)

    def __hash__(self) -> int:
        return hash((self.characteristic, self.extension_degree, self.modulus))

    def elements(self) -> range:
        return range(self.order)

    def nonzero(self) -> range:
        return range(1, self.order)

    def _check(self, a):
        arr = np.asarray(a)
        if arr.size and (arr.min() < 0 or arr.max() >= self.order):
            raise FieldError(f"element out of range for {self.name}: {a!r}")

    def _out(self, r):
        return int(r) if np.ndim(r) == 0 else r

    def add(self, a, b):
        self._check(a), self._check(b)
        return self._out(self.add_table[a, b])

    def neg(self, a):
        self._check(a)
        return self._out(self.neg_table[a])

    def sub(self, a, b):
        self._check(a), self._check(b)
        return self._out(self.add_table[a, self.neg_table[b]])

    def mul(self, a, b):
        self._check(a), self._check(b)
        return self._out(self.mul_table[a, b])

    def inv(self, a):
        self._check(a)
        if np.any(np.asarray(a) == 0):
            raise ZeroInverse(f"zero has no multiplicative inverse in {self.name}")
        return self._out(self.inv_table[a])

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            a, e = self.inv(a), -e
        result, base = 1, int(a)
        while e:
            if e & 1:
                result = int(self.mul_table[result, base])
            base = int(self.mul_table[base, base])
            e >>= 1
        return result

    # vector / matrix helpers -------------------------------------------

    def scale(self, c: int, v: np.ndarray) -> np.ndarray:
        return self.mul_table[c, np.asarray(v)]

    def vec_add(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        return self.add_table[np.asarray(u), np.asarray(v)]

    def vec_sub(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        return self.add_table[np.asarray(u), self.neg_table[np.asarray(v)]]

    def vecmat(self, s: np.ndarray, G: np.ndarray) -> np.ndarray:
        """Row vector ``s`` (length k) times the k-by-n matrix ``G``."""
        s = np.asarray(s)
        G = np.asarray(G)
        out = np.zeros(G.shape[1], dtype=np.int64)
        for j in np.flatnonzero(s):
            out = self.add_table[out, self.mul_table[s[j], G[j]]]
        return out

    def matmul(self, S: np.ndarray, G: np.ndarray) -> np.ndarray:
        """Each row of ``S`` (m-by-k) times ``G`` (k-by-n)."""
        S = np.asarray(S)
        G = np.asarray(G)
        out = np.zeros((S.shape[0], G.shape[1]), dtype=np.int64)
        for j in range(S.shape[1]):
            out = self.add_table[out, self.mul_table[S[:, j][:, None], G[j][None, :]]]
        return out

    def rank(self, M: np.ndarray) -> int:
        M = np.array(M, dtype=np.int64)
        rows, cols = M.shape
        r = 0
        for c in range(cols):
            piv = next((i for i in range(r, rows) if M[i, c]), None)
            if piv is None:
                continue
            M[[r, piv]] = M[[piv, r]]
            M[r] = self.mul_table[int(self.inv_table[M[r, c]]), M[r]]
            for i in range(rows):
                if i != r and M[i, c]:
                    M[i] = self.add_table[M[i], self.neg_table[self.mul_table[M[i, c], M[r]]]]
            r += 1
            if r == rows:
                break
        return r


def _poly_tables(p: int, z: int, modulus: tuple[int, ...]):
    q = p ** z
    digits = np.array([[(a // p ** i) % p for i in range(z)] for a in range(q)], dtype=np.int64)
    weights = p ** np.arange(z, dtype=np.int64)

    add = (digits[:, None, :] + digits[None, :, :]) % p
    add_table = (add * weights).sum(axis=2)
    neg_table = ((-digits) % p * weights).sum(axis=1)

    mul_table = np.zeros((q, q), dtype=np.int64)
    for a in range(q):
        for b in range(a, q):
            prod = np.convolve(digits[a], digits[b]) % p
            r = _polymod(prod, modulus, p)
            val = sum(c * p ** i for i, c in enumerate(r))
            mul_table[a, b] = mul_table[b, a] = val

    inv_table = np.zeros(q, dtype=np.int64)
    for a in range(1, q):
        inv_table[a] = int(np.flatnonzero(mul_table[a] == 1)[0])
    for t in (add_table, mul_table, neg_table, inv_table):
        t.setflags(write=False)
    return add_table, mul_table, neg_table, inv_table


def make_field(char: int, deg: int = 1, modulus: Optional[Sequence[int]] = None) -> FieldSpec:
    """Construct and validate GF(char^deg).

    Parameters
    ----------
    char : int
        The characteristic; must be prime.
    deg : int
        Extension degree, at least 1.
    modulus : sequence of int, optional
        Coefficients ``[c0, c1, ..., c_deg]`` of a monic irreducible
        polynomial, lowest degree first.  Defaults to the lexicographically
        smallest one.

    Raises
    ------
    NotPrime, DegreeMismatch, NotIrreducible
    """
    if not isinstance(char, (int, np.integer)) or not is_prime(int(char)):
        raise NotPrime(f"characteristic {char!r} is not prime")
    if deg < 1:
        raise DegreeMismatch(f"extension degree must be >= 1, got {deg}")
    if char ** deg > MAX_ORDER:
        raise FieldError(f"field order {char}^{deg} exceeds {MAX_ORDER}")
    char, deg = int(char), int(deg)

    if modulus is None:
        mod = _smallest_irreducible(char, deg)
    else:
        mod = tuple(int(c) for c in modulus)
        if any(c < 0 or c >= char for c in mod):
            raise FieldError(f"modulus coefficients must lie in [0, {char})")
        if len(mod) != deg + 1:
            raise DegreeMismatch(
                f"modulus {list(mod)} has {len(mod)} coefficients, expected {deg + 1}")
        if mod[-1] != 1:
            raise DegreeMismatch(f"modulus {list(mod)} is not monic of degree {deg}")
        factor = find_factor(mod, char) if deg > 1 else None
        if factor is not None:
            raise NotIrreducible(
                f"modulus {list(mod)} is reducible over Z_{char}: divisible by {list(factor)}",
                factor=factor)

    tables = _poly_tables(char, deg, mod)
    return FieldSpec(char, deg, mod, *tables)


# functional aliases

def add(F: FieldSpec, a, b):
    return F.add(a, b)


def neg(F: FieldSpec, a):
    return F.neg(a)


def sub(F: FieldSpec, a, b):
    return F.sub(a, b)


def mul(F: FieldSpec, a, b):
    return F.mul(a, b)


def inv(F: FieldSpec, a):
    return F.inv(a)


def power(F: FieldSpec, a: int, e: int) -> int:
    return F.pow(a, e)
