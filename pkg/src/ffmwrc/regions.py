"""Rate regions of the multi-way relay channel.

Polyhedral regions (cut-set bound, capacity region, CDF region) are stored
as half-spaces ``A r <= b`` on the non-negative orthant.  The FDF region
with separate decoding is a convex hull of beta-parameterised rectangles; it
is stored both as hull vertices and as the half-spaces of the hull edges.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .prob import binary_entropy
from .sim import MwrcConfig

__all__ = [
    "MEMBERSHIP_TOL",
    "PREDICATE_TOL",
    "GridTooCoarse",
    "RateRegion",
    "PhaseCell",
    "cut_set_bound",
    "capacity_region",
    "common_rate_capacity",
    "binary_capacity_region",
    "fdf_separate_corners",
    "fdf_separate_region",
    "cdf_region",
    "lemma_fdf_separate_optimal",
    "lemma_cdf_optimal",
    "phase_diagram",
    "region_convexity_check",
    "convex_hull_2d",
    "find_witness",
]

MEMBERSHIP_TOL = 1e-9
PREDICATE_TOL = 1e-12


class GridTooCoarse(UserWarning):
    """Doubling the beta grid moved the hull by more than the tolerance."""


@dataclass(frozen=True, eq=False)
class RateRegion:
    """Non-negative rate tuples with ``A @ r <= b``.

    ``hull`` optionally holds boundary vertices (counter-clockwise, 2-D) of
    a region built from a parameter sweep; ``meta`` records its origin.
    """

    name: str
    A: np.ndarray
    b: np.ndarray
    hull: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if A.shape[0] != b.shape[0]:
            raise ValueError("constraint matrix and bounds disagree")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    def contains(self, r, tol: float = MEMBERSHIP_TOL):
        """Membership of one tuple (returns bool) or of rows of an array."""
        r = np.asarray(r, dtype=float)
        flat = np.atleast_2d(r)
        ok = np.all(flat >= -tol, axis=1) & np.all(flat @ self.A.T <= self.b + tol, axis=1)
        return bool(ok[0]) if r.ndim == 1 else ok

    def slack(self, r) -> float:
        """Smallest constraint slack of ``r`` (negative when outside)."""
        r = np.asarray(r, dtype=float)
        return float(min(np.min(r), np.min(self.b - self.A @ r)))

    def vertices(self) -> np.ndarray:
        """Vertices of the polytope, sorted lexicographically."""
        L = self.dim
        A = np.vstack([self.A, -np.eye(L)])
        b = np.concatenate([self.b, np.zeros(L)])
        pts = []
        for rows in itertools.combinations(range(A.shape[0]), L):
            M = A[list(rows)]
            if abs(np.linalg.det(M)) < 1e-12:
                continue
            v = np.linalg.solve(M, b[list(rows)])
            if np.all(v >= -1e-9) and np.all(self.A @ v <= self.b + 1e-9):
                pts.append(np.where(np.abs(v) < 1e-12, 0.0, v))
        if not pts:
            return np.zeros((0, L))
        pts = np.unique(np.round(np.array(pts), 12), axis=0)
        return pts

    def boundary(self) -> np.ndarray:
        """Boundary polyline: hull vertices if present, else polytope vertices
        (counter-clockwise in 2-D)."""
        if self.hull is not None:
            return self.hull
        v = self.vertices()
        if self.dim == 2 and len(v) > 2:
            return convex_hull_2d(v)
        return v

    def upper_bounds(self) -> np.ndarray:
        v = self.boundary()
        return v.max(axis=0) if len(v) else np.zeros(self.dim)


# --------------------------------------------------------------------------
# general-L regions
# --------------------------------------------------------------------------

def _complement_rows(L: int) -> np.ndarray:
    """Row i selects every rate except R_i."""
    return np.ones((L, L)) - np.eye(L)


def cut_set_bound(config: MwrcConfig) -> RateRegion:
    """R_min^c <= log|F| - H(N0) and R_i^c <= log|F| - H(N_i) for every user.

    The first constraint is written as one half-space per user (the largest
    of the R_i^c equals R_min^c).
    """
    H = config.entropies
    cap = config.field.bits
    rows = _complement_rows(config.L)
    A = np.vstack([rows, rows])
    b = np.concatenate([np.full(config.L, cap - H[0]), cap - np.array(H[1:])])
    return RateRegion("cut-set", A, b, meta={"L": config.L})


def capacity_region(config: MwrcConfig) -> RateRegion:
    """R_i^c <= log|F| - max(H(N0), H(N_i)) for every user i."""
    H = np.array(config.entropies)
    b = config.field.bits - np.maximum(H[0], H[1:])
    return RateRegion("capacity", _complement_rows(config.L), b, meta={"L": config.L})


def common_rate_capacity(config: MwrcConfig) -> float:
    """(log|F| - max_i H(N_i)) / (L - 1), the maximum over all nodes."""
    return (config.field.bits - max(config.entropies)) / (config.L - 1)


# --------------------------------------------------------------------------
# binary two-user regions
# --------------------------------------------------------------------------

def _rho(x) -> Fraction:
    if isinstance(x, Fraction):
        r = x
    elif isinstance(x, float):
        r = Fraction(repr(float(x)))
    else:
        r = Fraction(x)
    if not 0 <= r <= 1:
        raise ValueError(f"crossover probability {x!r} outside [0, 1]")
    return r


def _h(x) -> float:
    return binary_entropy(float(x))


def binary_capacity_region(rho0, rho1, rho2) -> RateRegion:
    """Two-user binary capacity region: R1 <= 1 - max(H0, H2), R2 <= 1 - max(H0, H1)."""
    h0, h1, h2 = (_h(_rho(r)) for r in (rho0, rho1, rho2))
    return RateRegion("capacity", np.eye(2), [1 - max(h0, h2), 1 - max(h0, h1)],
                      meta={"rho": (rho0, rho1, rho2)})


def cdf_region(rho0, rho1, rho2) -> RateRegion:
    """R1 <= 1 - H(rho2), R2 <= 1 - H(rho1), R1 + R2 <= 1 - H(rho0)."""
    h0, h1, h2 = (_h(_rho(r)) for r in (rho0, rho1, rho2))
    A = [[1, 0], [0, 1], [1, 1]]
    return RateRegion("cdf", A, [1 - h2, 1 - h1, 1 - h0], meta={"rho": (rho0, rho1, rho2)})


def _star(beta: np.ndarray, rho: float) -> np.ndarray:
    return beta * (1 - rho) + (1 - beta) * rho


def _hvec(p: np.ndarray) -> np.ndarray:
    p = np.clip(p, 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -p * np.log2(p) - (1 - p) * np.log2(1 - p)
    return np.nan_to_num(h, nan=0.0)


def fdf_separate_corners(rho0, rho1, rho2, beta_steps: int = 2049) -> np.ndarray:
    """Upper-right corners of every beta (R1 family) and alpha (R2 family)
    rectangle, shape ``(2 * beta_steps, 2)``.

    For the first family user 2 carries the excess part:
    R1 <= a, R2' <= b, R1 + R2' <= c with a = 1 - H(beta*rho2),
    b = H(beta*rho1) - H(rho1), c = 1 - max(H0, H1); its downward closure is
    the box up to (min(a, c), min(a + b, c)).  The second family swaps the
    users.
    """
    if beta_steps < 2:
        raise ValueError("beta_steps must be at least 2")
    r0, r1, r2 = (float(_rho(r)) for r in (rho0, rho1, rho2))
    h0, h1, h2 = _h(r0), _h(r1), _h(r2)
    beta = np.linspace(0.0, 0.5, beta_steps)

    a = 1 - _hvec(_star(beta, r2))
    b = _hvec(_star(beta, r1)) - h1
    c = 1 - max(h0, h1)
    fam1 = np.column_stack([np.minimum(a, c), np.minimum(a + b, c)])

    a2 = 1 - _hvec(_star(beta, r1))
    b2 = _hvec(_star(beta, r2)) - h2
    c2 = 1 - max(h0, h2)
    fam2 = np.column_stack([np.minimum(a2 + b2, c2), np.minimum(a2, c2)])
    return np.maximum(np.vstack([fam1, fam2]), 0.0)


def convex_hull_2d(points) -> np.ndarray:
    """Counter-clockwise convex hull (Andrew's monotone chain), collinear
    points dropped."""
    pts = np.unique(np.asarray(points, dtype=float), axis=0)
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 1e-15:
            lower.pop()
        lower.append(p)
    for p in pts[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 1e-15:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1])


def _hull_halfspaces(hull: np.ndarray):
    """Half-spaces of a downward-closed hull in the non-negative quadrant."""
    if len(hull) < 3:
        top = hull.max(axis=0) if len(hull) else np.zeros(2)
        return np.eye(2), top
    A, b = [], []
    for p, q in zip(hull, np.roll(hull, -1, axis=0)):
        nrm = np.array([q[1] - p[1], p[0] - q[0]])
        if nrm[0] <= 1e-15 and nrm[1] <= 1e-15:
            continue  # an axis edge, already implied by r >= 0
        scale = np.abs(nrm).max()
        A.append(nrm / scale)
        b.append(float(nrm @ p) / scale)
    return np.array(A), np.array(b)


def _downward_hull(corners: np.ndarray) -> np.ndarray:
    pts = [np.zeros(2)]
    for x, y in corners:
        pts += [(x, y), (x, 0.0), (0.0, y)]
    return convex_hull_2d(np.array(pts))


def fdf_separate_region(rho0, rho1, rho2, beta_steps: int = 2049,
                        check_grid: bool = True) -> RateRegion:
    """Convex hull of the two rectangle families on a uniform beta grid.

    Warns :class:`GridTooCoarse` when the hull for ``2 * beta_steps`` grid
    points reaches more than 1e-4 outside the returned one.
    """
    hull = _downward_hull(fdf_separate_corners(rho0, rho1, rho2, beta_steps))
    A, b = _hull_halfspaces(hull)
    region = RateRegion("fdf-separate", A, b, hull=hull,
                        meta={"rho": (rho0, rho1, rho2), "beta_steps": beta_steps})
    if check_grid:
        fine = _downward_hull(fdf_separate_corners(rho0, rho1, rho2, 2 * beta_steps))
        gap = max(-region.slack(v) for v in fine)
        if gap > 1e-4:
            warnings.warn(f"beta grid of {beta_steps} points is {gap:.2e} off the refined hull",
                          GridTooCoarse, stacklevel=2)
    return region


# --------------------------------------------------------------------------
# optimality conditions
# --------------------------------------------------------------------------

def lemma_fdf_separate_optimal(rho0, rho1, rho2, tol: float = PREDICATE_TOL) -> bool:
    """rho0 >= max(rho1, rho2) or rho1 = rho2."""
    r0, r1, r2 = (_rho(r) for r in (rho0, rho1, rho2))
    return bool(r0 >= max(r1, r2) - Fraction(tol) or abs(r1 - r2) <= Fraction(tol))


def lemma_cdf_optimal(rho0, rho1, rho2, tol: float = PREDICATE_TOL) -> bool:
    """H(rho0) <= H(rho1) + H(rho2) - 1."""
    h0, h1, h2 = (_h(_rho(r)) for r in (rho0, rho1, rho2))
    return bool(h0 <= h1 + h2 - 1 + tol)


@dataclass(frozen=True)
class PhaseCell:
    rho1: Fraction
    rho2: Fraction
    fdf_separate_optimal: bool
    cdf_optimal: bool


def phase_diagram(rho0, grid: int = 256) -> list:
    """Both optimality predicates on the grid rho_i = j / (2 (grid - 1)), j = 0..grid-1.

    Cells come row by row (rho1 outer, rho2 inner).  Grid values are exact
    rationals so the rho1 = rho2 test is exact.
    """
    if grid < 2:
        raise ValueError("grid must have at least 2 points per axis")
    r0 = _rho(rho0)
    vals = [Fraction(j, 2 * (grid - 1)) for j in range(grid)]
    hv = _hvec(np.array([float(v) for v in vals]))
    h0 = _h(r0)
    cdf = h0 <= hv[:, None] + hv[None, :] - 1 + PREDICATE_TOL
    cells = []
    for i, r1 in enumerate(vals):
        for j, r2 in enumerate(vals):
            fdf = i == j or r0 >= max(r1, r2)
            cells.append(PhaseCell(r1, r2, bool(fdf), bool(cdf[i, j])))
    return cells


# --------------------------------------------------------------------------
# property checks
# --------------------------------------------------------------------------

def _sample_members(region, count: int, rng: np.random.Generator, hi: np.ndarray) -> np.ndarray:
    out = []
    while sum(len(o) for o in out) < count:
        pts = rng.random((4 * count, len(hi))) * hi
        out.append(pts[region.contains(pts)])
    return np.vstack(out)[:count]


def region_convexity_check(region, samples: int = 10_000, rng: Optional[np.random.Generator] = None,
                           return_witness: bool = False):
    """Test ``samples`` random convex combinations of member pairs.

    ``region`` needs ``contains`` (vectorised) and ``upper_bounds``.  Returns
    a bool, or ``(bool, witness)`` where the witness is ``(r, s, lam)``.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    hi = np.asarray(region.upper_bounds(), dtype=float)
    R = _sample_members(region, samples, rng, hi)
    S = _sample_members(region, samples, rng, hi)
    lam = rng.random(samples)[:, None]
    mix = lam * R + (1 - lam) * S
    bad = np.flatnonzero(~np.asarray(region.contains(mix)))
    ok = bad.size == 0
    if not return_witness:
        return ok
    witness = None if ok else (R[bad[0]], S[bad[0]], float(lam[bad[0], 0]))
    return ok, witness


def find_witness(inside: RateRegion, outside: RateRegion, steps: int = 400,
                 margin: float = 1e-6) -> Optional[np.ndarray]:
    """A grid point of ``inside`` that violates ``outside`` by more than ``margin``.

    Scans a ``steps`` x ``steps`` grid over the bounding box of ``inside``
    plus its boundary vertices; returns the point with the largest violation.
    """
    hi = inside.upper_bounds()
    axes = [np.linspace(0, h, steps) for h in hi]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(hi))
    cand = np.vstack([grid, inside.boundary()])
    cand = cand[inside.contains(cand, tol=0.0)]
    if not len(cand):
        return None
    viol = np.max(np.concatenate([-cand, cand @ outside.A.T - outside.b], axis=1), axis=1)
    best = int(np.argmax(viol))
    return cand[best] if viol[best] > margin else None
