"""Exhaustive self-check suites run by ``ffmwrc selfcheck``.

Each suite returns a :class:`SuiteResult` with the number of checks that
passed and, on failure, a small counterexample.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .code import check_ensemble
from .field import FieldSpec, make_field

__all__ = ["SuiteResult", "field_axioms", "field_solutions", "code_ensemble", "ENSEMBLE_CASES"]

ENSEMBLE_CASES = ((2, 1, 2), (2, 2, 2), (3, 1, 2))
EXHAUSTIVE_MAX = 16


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: int
    failure: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.failure is None


def _triples(F: FieldSpec, rng: np.random.Generator, count: int = 20000):
    q = F.order
    if q <= EXHAUSTIVE_MAX:
        g = np.arange(q)
        a, b, c = np.meshgrid(g, g, g, indexing="ij")
        return a.ravel(), b.ravel(), c.ravel()
    return tuple(rng.integers(0, q, count) for _ in range(3))


def field_axioms(F: FieldSpec, seed: int = 0) -> SuiteResult:
    """Associativity, commutativity, distributivity, identities, inverses.

    Exhaustive on every triple for |F| <= 16, randomised above that.
    """
    name = f"field axioms {F.name}"
    A, M, N, I = F.add_table, F.mul_table, F.neg_table, F.inv_table
    a, b, c = _triples(F, np.random.default_rng(seed))
    checks = [
        ("a+b = b+a", A[a, b], A[b, a]),
        ("ab = ba", M[a, b], M[b, a]),
        ("(a+b)+c = a+(b+c)", A[A[a, b], c], A[a, A[b, c]]),
        ("(ab)c = a(bc)", M[M[a, b], c], M[a, M[b, c]]),
        ("a(b+c) = ab+ac", M[a, A[b, c]], A[M[a, b], M[a, c]]),
        ("a+0 = a", A[a, 0], a),
        ("1a = a", M[1, a], a),
        ("a+(-a) = 0", A[a, N[a]], np.zeros_like(a)),
    ]
    nz = a != 0
    checks.append(("a inv(a) = 1", M[a[nz], I[a[nz]]], np.ones(nz.sum(), dtype=np.int64)))
    passed = 0
    for label, lhs, rhs in checks:
        bad = np.flatnonzero(lhs != rhs)
        if bad.size:
            i = bad[0]
            return SuiteResult(name, passed, f"{label} fails at a={a[i]}, b={b[i]}, c={c[i]}")
        passed += 1
    return SuiteResult(name, passed)


def field_solutions(F: FieldSpec) -> SuiteResult:
    """a + x = b has exactly one solution; a + F = F; c * F = F for c != 0."""
    name = f"field solution counts {F.name}"
    q = F.order
    passed = 0
    for a in range(q):
        row = F.add_table[a]
        if len(set(row.tolist())) != q:
            return SuiteResult(name, passed, f"{{{a} + x}} is not all of {F.name}")
        for b in range(q):
            sols = np.flatnonzero(row == b)
            if sols.size != 1:
                return SuiteResult(name, passed, f"{a} + x = {b} has {sols.size} solutions")
        passed += 1
    for c in range(1, q):
        if len(set(F.mul_table[c].tolist())) != q:
            return SuiteResult(name, passed, f"{{{c} * y}} is not all of {F.name}")
        passed += 1
    return SuiteResult(name, passed)


def code_ensemble(cases=ENSEMBLE_CASES) -> SuiteResult:
    """Codeword uniformity and pairwise independence over every (G, q)."""
    passed = 0
    for char, k, n in cases:
        ok, cex = check_ensemble(make_field(char), k, n)
        if not ok:
            return SuiteResult("code ensemble", passed, f"(|F|, k, n) = ({char}, {k}, {n}): {cex}")
        passed += 1
    return SuiteResult("code ensemble", passed)
