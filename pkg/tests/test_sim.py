import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ffmwrc import code as lc
from ffmwrc.field import make_field
from ffmwrc.prob import bsc, point_mass, stream
from ffmwrc.sim import (BatchResult, ConfigError, DecoderOptions, IndivisibleBlocklength, MwrcConfig,
                        RateAllocation, TrialReport, binary_config, build_schedule, chain_decode,
                        check_budget, downlink, message_count, run_cdf_batch, run_cdf_trial,
                        run_fdf_batch, run_fdf_trial, uplink, wilson_interval)


def noiseless(F, L, up=None, down=None):
    up = up or (1,) * L
    down = down or (1,) * L
    return MwrcConfig(L, F, up, down, (point_mass(F),) * (L + 1))


# -- channel ---------------------------------------------------------------

def test_uplink_gf4_example():
    F = make_field(2, 2)
    cfg = noiseless(F, 2, up=(2, 3))
    y = uplink(cfg, np.array([[1, 1, 0], [1, 0, 1]]), stream(0))
    # 2*1 + 3*1 = 2 + 3 = 1 in GF(4)
    np.testing.assert_array_equal(y, [1, 2, 3])


def test_downlink_gf5_example():
    F = make_field(5)
    cfg = noiseless(F, 2, down=(2, 3))
    Y = downlink(cfg, np.array([3, 2]), stream(0))
    np.testing.assert_array_equal(Y, [[1, 4], [4, 1]])


def test_uplink_noise_statistics():
    cfg = binary_config(2, 0.1, [0.2, 0.3])
    x = np.zeros((2, 100_000), dtype=np.int64)
    assert abs(uplink(cfg, x, stream(1)).mean() - 0.1) < 5e-3
    Y = downlink(cfg, np.zeros(100_000, dtype=np.int64), stream(2))
    np.testing.assert_allclose(Y.mean(axis=1), [0.2, 0.3], atol=5e-3)


def test_config_validation():
    F = make_field(3)
    with pytest.raises(ConfigError):
        noiseless(F, 1)
    with pytest.raises(ConfigError):
        noiseless(F, 2, up=(0, 1))
    with pytest.raises(ConfigError):
        MwrcConfig(2, F, (1, 1), (1, 1), (point_mass(F),) * 2)
    with pytest.raises(ConfigError):
        MwrcConfig(2, F, (1, 1), (1, 1), (bsc(0.1),) * 3)


# -- rates and schedule ----------------------------------------------------

def test_rate_allocation():
    r = RateAllocation((Fraction(1, 4), "1/4", 0.5))
    assert r.r_min == Fraction(1, 4)
    assert r.r_prime == (0, 0, Fraction(1, 4))
    assert r.active == (2,)
    assert r.r_min_c == Fraction(3, 4)
    assert r.r_c(0) == Fraction(3, 4)
    assert not r.is_common
    assert RateAllocation((0.3, 0.3)).is_common
    with pytest.raises(ConfigError):
        RateAllocation((-0.1, 0.2))
    with pytest.raises(ConfigError):
        RateAllocation((0, 0))


def test_schedule_l3_example():
    s = build_schedule(RateAllocation(("1/4", "1/4", "1/2")), 12)
    assert [(b.kind, b.length, b.users) for b in s.blocks] == [
        ("pair", 4, (0, 1)), ("pair", 4, (1, 2)), ("solo", 4, (2,))]


def test_schedule_l2_common_example():
    s = build_schedule(RateAllocation(("1/2", "1/2")), 4)
    assert [(b.kind, b.length) for b in s.blocks] == [("pair", 4)]
    assert s.solos == ()


def test_schedule_indivisible():
    with pytest.raises(IndivisibleBlocklength) as info:
        build_schedule(RateAllocation(("1/4", "1/4", "1/2")), 10)
    assert info.value.multiple == 3


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 6), min_size=2, max_size=5).filter(lambda v: sum(v) > max(v)),
       st.integers(1, 4))
def test_schedule_covers_block(nums, scale):
    rates = RateAllocation(tuple(Fraction(v, 8) for v in nums))
    fracs = [rates.r_min / rates.r_min_c] + [rates.r_prime[d] / rates.r_min_c for d in rates.active]
    n = math.lcm(*(f.denominator for f in fracs)) * scale
    s = build_schedule(rates, n)
    assert sum(b.length for b in s.blocks) == n
    assert len(s.pairs) == rates.L - 1
    assert [b.users[0] for b in s.solos] == list(rates.active)


def test_message_count_audit():
    # floor(2^(nR)) against an exact integer search
    for n in (8, 12, 20, 64, 128, 256):
        for R in (Fraction(3, 10), Fraction(1, 4), Fraction(1, 3), Fraction(3, 5), Fraction(1)):
            e = n * R
            m = message_count(n, R)
            assert m ** e.denominator <= 2 ** e.numerator < (m + 1) ** e.denominator
    assert message_count(64, "0.3") == 602248
    assert message_count(10, 0) == 1


def test_wilson_interval():
    lo, hi = wilson_interval(0, 100)
    assert lo == 0.0 and hi == pytest.approx(0.03699, abs=1e-5)
    lo, hi = wilson_interval(100, 100)
    assert hi == 1.0 and lo == pytest.approx(1 - 0.03699, abs=1e-5)
    lo, hi = wilson_interval(50, 100)
    assert lo == pytest.approx(0.40383, abs=1e-5) and hi == pytest.approx(0.59617, abs=1e-5)
    assert wilson_interval(0, 0) == (0.0, 1.0)


# -- chain decoding --------------------------------------------------------

def _pair_sums(F, gains, A):
    return [F.vec_add(F.scale(gains[l], A[l]), F.scale(gains[l + 1], A[l + 1]))
            for l in range(len(A) - 1)]


@pytest.mark.parametrize("L, gains", [(3, (2, 3, 4)), (4, (1, 4, 2, 3))])
def test_chain_decode_gf5(L, gains):
    F = make_field(5)
    rng = stream(L)
    A = [rng.integers(0, 5, 6) for _ in range(L)]
    sums = _pair_sums(F, gains, A)
    for i in range(L):
        got = chain_decode(F, gains, sums, i, A[i])
        for j in range(L):
            np.testing.assert_array_equal(got[j], A[j])


def test_chain_decode_error_propagates():
    F = make_field(5)
    gains = (1, 4, 2, 3)
    rng = stream(9)
    A = [rng.integers(0, 5, 3) for _ in range(4)]
    sums = _pair_sums(F, gains, A)
    sums[2] = F.vec_add(sums[2], np.array([1, 0, 0]))
    got = chain_decode(F, gains, sums, 1, A[1])
    np.testing.assert_array_equal(got[0], A[0])
    np.testing.assert_array_equal(got[2], A[2])
    assert not np.array_equal(got[3], A[3])


# -- end-to-end trials -----------------------------------------------------

@pytest.mark.parametrize("pz, L, up, down, rates, n", [
    ((2, 1), 2, (1, 1), (1, 1), ("1/2", "1/2"), 16),
    ((5, 1), 3, (2, 3, 1), (4, 1, 2), ("1/4", "1/4", "1/2"), 12),
    ((2, 2), 4, (1, 2, 3, 1), (3, 3, 2, 1), ("1/3", "1/2", "1/3", "1/3"), 14),
    ((3, 1), 2, (2, 1), (1, 2), ("1/3", "2/3"), 12),
])
def test_noiseless_fdf_exact(pz, L, up, down, rates, n):
    cfg = noiseless(make_field(*pz), L, up, down)
    res = run_fdf_batch(cfg, RateAllocation(rates), n, 20, seed=3)
    assert res.errors == 0 and res.relay_errors == 0 and res.user_errors == 0


def test_noiseless_cdf_exact():
    cfg = noiseless(make_field(3), 2, (1, 2), (2, 1))
    res = run_cdf_batch(cfg, RateAllocation(("1/3", "1/3")), 12, 20, seed=3)
    assert res.errors == 0


def test_trial_report_shape():
    cfg = noiseless(make_field(5), 3, (2, 3, 1), (4, 1, 2))
    rep = run_fdf_trial(cfg, RateAllocation(("1/4", "1/4", "1/2")), 12, seed=1)
    assert len(rep.relay_ok) == 3
    assert len(rep.downlink_ok) == 3
    assert all(len(row) == 3 for row in rep.peer_ok)
    assert not rep.error and not rep.certified


def test_error_decomposition():
    rep = TrialReport((True, False), (True, True), ((True, False), (True, True)))
    assert rep.error and rep.relay_error and not rep.user_error
    rep = TrialReport((True,), (True, False), ((True, True), (False, True)))
    assert rep.error and not rep.relay_error and rep.user_error
    rep = TrialReport((True,), (True, True), ((True, True), (True, True)))
    assert not rep.error


def test_batch_counts_consistent():
    cfg = binary_config(2, 0.1, [0.1, 0.1])
    res = run_fdf_batch(cfg, RateAllocation((0.3, 0.3)), 32, 200, seed=5)
    assert res.trials == 200
    assert res.relay_errors + res.user_errors <= res.trials
    assert res.certified_errors <= res.errors
    assert 0 < res.errors
    lo, hi = res.ci
    assert lo <= res.p_e <= hi


def test_thread_determinism():
    cfg = binary_config(2, 0.1, [0.05, 0.2])
    rates = RateAllocation((0.3, 0.3))
    a = run_fdf_batch(cfg, rates, 32, 60, seed=11, threads=1)
    b = run_fdf_batch(cfg, rates, 32, 60, seed=11, threads=4)
    assert a == b
    c = run_fdf_batch(cfg, rates, 32, 60, seed=12)
    assert isinstance(c, BatchResult)


def test_seed_changes_outcome():
    cfg = binary_config(2, 0.15, [0.15, 0.15])
    rates = RateAllocation((0.3, 0.3))
    runs = {run_fdf_batch(cfg, rates, 20, 100, seed=s).errors for s in range(4)}
    assert len(runs) > 1


def test_rate_too_high_for_field():
    cfg = binary_config(3, 0.1, [0.1, 0.1, 0.1])
    with pytest.raises(ConfigError):
        run_fdf_trial(cfg, RateAllocation((1, 1, 1)), 8, seed=0)


def test_budget_check():
    cfg = binary_config(2, 0.1, [0.1, 0.1])
    rates = RateAllocation((0.3, 0.3))
    check_budget(cfg, rates, 64, DecoderOptions(method="ml"))
    with pytest.raises(lc.BudgetExceeded):
        check_budget(cfg, rates, 128, DecoderOptions(method="ml"))
    with pytest.raises(lc.BudgetExceeded):
        run_fdf_batch(cfg, rates, 128, 1, seed=0, opts=DecoderOptions(method="ml"))
    check_budget(cfg, rates, 128, DecoderOptions(method="auto"))
    with pytest.raises(lc.BudgetExceeded):
        run_cdf_batch(cfg, rates, 128, 1, seed=0, opts=DecoderOptions(method="ml"))


def test_cdf_requires_two_users():
    cfg = binary_config(3, 0.1, [0.1, 0.1, 0.1])
    with pytest.raises(ConfigError):
        run_cdf_trial(cfg, RateAllocation((0.25, 0.25, 0.25)), 8, seed=0)


def test_certified_errors_are_ml_errors():
    # with exact ML everywhere, every error is certified
    cfg = binary_config(2, 0.2, [0.2, 0.2])
    res = run_fdf_batch(cfg, RateAllocation((0.5, 0.5)), 16, 100, seed=2,
                        opts=DecoderOptions(method="ml"))
    assert res.errors > 0
    assert res.certified_errors == res.errors
