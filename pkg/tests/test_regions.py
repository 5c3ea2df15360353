import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ffmwrc import regions as rg
from ffmwrc.field import make_field
from ffmwrc.prob import NoisePmf, binary_entropy, point_mass, uniform
from ffmwrc.sim import MwrcConfig, binary_config

REF_RHO = (0.1, 0.05, 0.2)


def H(r):
    return binary_entropy(r)


# -- general-L regions -----------------------------------------------------

def _random_config(rng):
    pz = [(2, 1), (3, 1), (2, 2), (5, 1)][rng.integers(4)]
    F = make_field(*pz)
    L = int(rng.integers(2, 5))
    noise = []
    for _ in range(L + 1):
        p = rng.random(F.order) ** 3
        p[0] += 2.0
        noise.append(NoisePmf(F, p / p.sum()))
    gains = tuple(int(g) for g in rng.integers(1, F.order, L))
    return MwrcConfig(L, F, gains, gains, tuple(noise))


def test_capacity_equals_cut_set():
    rng = np.random.default_rng(0)
    for _ in range(10):
        cfg = _random_config(rng)
        cap, cut = rg.capacity_region(cfg), rg.cut_set_bound(cfg)
        R = rng.random((10_000, cfg.L)) * cfg.field.bits / (cfg.L - 1) * 1.2
        np.testing.assert_array_equal(cap.contains(R), cut.contains(R))


def test_capacity_reference_membership():
    cap = rg.capacity_region(binary_config(2, *REF_RHO[:1], REF_RHO[1:]))
    assert cap.contains([0.27, 0.52])
    assert not cap.contains([0.29, 0.10])
    np.testing.assert_allclose(cap.upper_bounds(), [0.278, 0.531], atol=1e-3)


def test_capacity_noiseless_binary():
    cap = rg.capacity_region(binary_config(2, 0, [0, 0]))
    np.testing.assert_allclose(cap.vertices(), [[0, 0], [0, 1], [1, 0], [1, 1]])


@pytest.mark.parametrize("cfg, want", [
    (MwrcConfig(3, make_field(2, 2), (1, 1, 1), (1, 1, 1), (point_mass(make_field(2, 2)),) * 4), 1.0),
    (binary_config(2, 0.1, [0.1, 0.1]), 1 - H(0.1)),
    (binary_config(2, 0.5, [0.1, 0.1]), 0.0),
])
def test_common_rate_capacity(cfg, want):
    assert rg.common_rate_capacity(cfg) == pytest.approx(want, abs=1e-12)


def test_common_rate_uniform_relay():
    F = make_field(3)
    cfg = MwrcConfig(2, F, (1, 1), (1, 1), (uniform(F), point_mass(F), point_mass(F)))
    assert rg.common_rate_capacity(cfg) == pytest.approx(0.0, abs=1e-12)


def test_common_rate_on_boundary():
    rng = np.random.default_rng(4)
    for _ in range(20):
        cfg = _random_config(rng)
        c = rg.common_rate_capacity(cfg)
        cap = rg.capacity_region(cfg)
        assert cap.contains([c] * cfg.L)
        assert not cap.contains([c + 1e-6] * cfg.L)


def test_monotone_in_noise():
    rng = np.random.default_rng(5)
    for _ in range(30):
        rho = rng.random(3) * 0.5
        worse = np.minimum(rho + rng.random(3) * 0.1, 0.5)
        small = rg.capacity_region(binary_config(2, worse[0], worse[1:]))
        big = rg.capacity_region(binary_config(2, rho[0], rho[1:]))
        R = rng.random((2000, 2))
        inside = small.contains(R)
        assert np.all(big.contains(R[inside]))


# -- binary two-user regions ----------------------------------------------

def test_cdf_reference_vertices():
    cdf = rg.cdf_region(*REF_RHO)
    want = [[0, 0], [0, 1 - H(0.1)], [1 - H(0.2), 0], [1 - H(0.2), H(0.2) - H(0.1)]]
    np.testing.assert_allclose(cdf.vertices(), sorted(want), atol=1e-12)
    np.testing.assert_allclose(cdf.vertices()[-1], [0.278, 0.253], atol=1e-3)


def test_cdf_noiseless_square():
    cdf = rg.cdf_region(0, 0, 0)
    assert cdf.contains([1, 0]) and cdf.contains([0, 1]) and not cdf.contains([0.6, 0.6])
    cdf = rg.cdf_region(0.5, 0, 0)
    np.testing.assert_allclose(cdf.vertices(), [[0, 0]])


def test_region_boundary_ccw():
    b = rg.cdf_region(*REF_RHO).boundary()
    area = 0.5 * np.sum(b[:, 0] * np.roll(b[:, 1], -1) - np.roll(b[:, 0], -1) * b[:, 1])
    assert area > 0


def _grid(hi, steps=100):
    ax = [np.linspace(0, h, steps) for h in hi]
    return np.stack(np.meshgrid(*ax, indexing="ij"), axis=-1).reshape(-1, 2)


def test_cdf_optimal_case_equals_capacity():
    rho = (0.25, 0.4, 0.4)
    assert rg.lemma_cdf_optimal(*rho)
    cap, cdf = rg.binary_capacity_region(*rho), rg.cdf_region(*rho)
    G = _grid(cap.upper_bounds() * 1.05, 120)
    np.testing.assert_array_equal(cap.contains(G), cdf.contains(G))


def test_fdf_square_when_rho1_equals_rho2():
    for r0, r in [(0.1, 0.2), (0.3, 0.1), (0.2, 0.2)]:
        reg = rg.fdf_separate_region(r0, r, r)
        m = min(1 - H(r0), 1 - H(r))
        assert reg.contains([m - 1e-9, m - 1e-9])


@pytest.mark.parametrize("rho", [(0.3, 0.1, 0.2), (0.25, 0.25, 0.05), (0.4, 0.1, 0.1), (0.2, 0.1, 0.15)])
def test_fdf_equals_capacity_when_lemma_holds(rho):
    assert rg.lemma_fdf_separate_optimal(*rho)
    cap, fdf = rg.binary_capacity_region(*rho), rg.fdf_separate_region(*rho)
    np.testing.assert_allclose(fdf.upper_bounds(), cap.upper_bounds(), atol=1e-6)
    G = _grid(cap.upper_bounds() - 1e-6, 100)
    assert np.all(fdf.contains(G))


def test_reference_strict_nesting():
    cap = rg.binary_capacity_region(*REF_RHO)
    fdf = rg.fdf_separate_region(*REF_RHO)
    cdf = rg.cdf_region(*REF_RHO)
    w1 = rg.find_witness(fdf, cdf)
    w2 = rg.find_witness(cap, fdf)
    assert w1 is not None and fdf.contains(w1) and not cdf.contains(w1)
    assert w2 is not None and cap.contains(w2) and not fdf.contains(w2)
    assert rg.find_witness(cdf, fdf) is None
    assert rg.find_witness(fdf, cap) is None


def test_grid_warning():
    with pytest.warns(rg.GridTooCoarse):
        rg.fdf_separate_region(*REF_RHO, beta_steps=3)
    with warnings.catch_warnings():
        warnings.simplefilter("error", rg.GridTooCoarse)
        rg.fdf_separate_region(*REF_RHO)


def test_bad_inputs():
    with pytest.raises(ValueError):
        rg.cdf_region(1.2, 0, 0)
    with pytest.raises(ValueError):
        rg.fdf_separate_corners(*REF_RHO, beta_steps=1)
    with pytest.raises(ValueError):
        rg.phase_diagram(0.25, grid=1)


def test_r2_family_inside_r1_when_rho1_le_rho2():
    rng = np.random.default_rng(7)
    for r0 in np.linspace(0.02, 0.48, 5):
        for r1 in np.linspace(0.01, 0.49, 10):
            r2 = min(0.5, r1 + rng.random() * (0.5 - r1))
            corners = rg.fdf_separate_corners(r0, r1, r2, 513)
            fam1, fam2 = corners[:513], corners[513:]
            hull1 = rg._downward_hull(fam1)
            A, b = rg._hull_halfspaces(hull1)
            r1_region = rg.RateRegion("R1", A, b, hull=hull1)
            pts = fam2[rng.integers(0, 513, 50)] * rng.random((50, 1))
            assert np.all(r1_region.contains(pts, tol=1e-6))


@settings(max_examples=25, deadline=None)
@given(st.tuples(*[st.floats(0.0, 0.5)] * 3))
def test_nesting_property(rho):
    cap = rg.binary_capacity_region(*rho)
    fdf = rg.fdf_separate_region(*rho, beta_steps=257, check_grid=False)
    cdf = rg.cdf_region(*rho)
    G = _grid(np.array([1.0, 1.0]), 60)
    assert not np.any(cdf.contains(G) & ~cap.contains(G))
    assert not np.any(fdf.contains(G) & ~cap.contains(G))


# -- optimality predicates and phase diagram ---------------------------------------------

def test_lemma_examples():
    assert rg.lemma_fdf_separate_optimal(0.25, 0.05, 0.05)
    assert rg.lemma_cdf_optimal(0.25, 0.4, 0.4)
    assert not rg.lemma_fdf_separate_optimal(*REF_RHO)
    assert not rg.lemma_cdf_optimal(*REF_RHO)
    assert not rg.lemma_cdf_optimal(0.25, 0.3, 0.26)
    assert not rg.lemma_fdf_separate_optimal(0.25, 0.3, 0.26)
    assert rg.lemma_fdf_separate_optimal(0.25, 0.3, 0.3)
    assert rg.lemma_fdf_separate_optimal(0.25, 0.1, 0.2)


def test_lemma_exact_equality():
    assert rg.lemma_fdf_separate_optimal("0.25", "0.3", "3/10")
    assert not rg.lemma_fdf_separate_optimal("0.25", "0.3", "0.3000001")


def test_phase_diagram_structure():
    grid = 33
    cells = rg.phase_diagram(Fraction(1, 4), grid)
    assert len(cells) == grid * grid
    assert cells[1].rho1 == 0 and cells[1].rho2 == Fraction(1, 64)
    for c in cells:
        assert c.fdf_separate_optimal == rg.lemma_fdf_separate_optimal(Fraction(1, 4), c.rho1, c.rho2)
        assert c.cdf_optimal == rg.lemma_cdf_optimal(Fraction(1, 4), c.rho1, c.rho2)
        if c.rho1 == c.rho2 or max(c.rho1, c.rho2) <= Fraction(1, 4):
            assert c.fdf_separate_optimal


def test_phase_corner_flags():
    cells = {(c.rho1, c.rho2): c for c in rg.phase_diagram(0.25, 11)}
    assert cells[(Fraction(2, 5), Fraction(2, 5))].cdf_optimal
    assert cells[(Fraction(1, 2), Fraction(1, 2))].cdf_optimal
    assert not cells[(Fraction(0), Fraction(1, 2))].cdf_optimal


# -- convexity ---------------------------------------------------------------

class TwoBoxes:
    """Union of two boxes: a deliberately non-convex region."""

    def contains(self, r, tol=1e-9):
        r = np.atleast_2d(r)
        a = (r[:, 0] <= 1 + tol) & (r[:, 1] <= 0.1 + tol)
        b = (r[:, 0] <= 0.1 + tol) & (r[:, 1] <= 1 + tol)
        return (a | b) & np.all(r >= -tol, axis=1)

    def upper_bounds(self):
        return np.array([1.0, 1.0])


def test_convexity_capacity():
    rng = np.random.default_rng(1)
    for _ in range(5):
        cfg = _random_config(rng)
        assert rg.region_convexity_check(rg.capacity_region(cfg), 10_000, rng)


def test_convexity_detects_nonconvex():
    ok, (r, s, lam) = rg.region_convexity_check(TwoBoxes(), 2000, return_witness=True)
    assert not ok
    box = TwoBoxes()
    assert box.contains(r)[0] and box.contains(s)[0]
    assert not box.contains(lam * r + (1 - lam) * s)[0]


def test_convexity_single_point():
    reg = rg.binary_capacity_region(0.5, 0.5, 0.5)
    assert rg.region_convexity_check(reg, 1000)


def test_fdf_and_cdf_convex():
    assert rg.region_convexity_check(rg.fdf_separate_region(*REF_RHO), 5000)
    assert rg.region_convexity_check(rg.cdf_region(*REF_RHO), 5000)
