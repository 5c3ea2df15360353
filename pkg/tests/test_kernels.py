"""The compiled kernels and the numpy fallback must agree exactly."""

import numpy as np
import pytest

from ffmwrc import code as lc
from ffmwrc import kernels
from ffmwrc.field import make_field
from ffmwrc.prob import NoisePmf, bsc, stream

py = kernels.fallback
needs_compiled = pytest.mark.skipif(not kernels.COMPILED, reason="compiled extension not built")


def _binary_case(k, n, seed):
    rng = stream(seed)
    G = rng.integers(0, 2, (k, n))
    y = rng.integers(0, 2, n)
    return lc.pack_bits(G), lc.pack_bits(y)


@needs_compiled
@pytest.mark.parametrize("k, n", [(1, 5), (4, 9), (8, 70), (13, 40), (16, 130)])
def test_ml_binary_agrees(k, n):
    for seed in range(5):
        rows, y = _binary_case(k, n, seed)
        assert tuple(kernels.ml_binary(rows, y)) == tuple(py.ml_binary(rows, y))


def _brute_binary(rows, y, k):
    best = None
    for m in range(1 << k):
        x = np.zeros_like(y)
        for j in range(k):
            if (m >> j) & 1:
                x ^= rows[j]
        w = int(np.bitwise_count(x ^ y).sum())
        if best is None or w < best[1]:
            best = (m, w)
    return best


@pytest.mark.parametrize("impl", ["fallback", "selected"])
def test_ml_binary_brute_force(impl):
    fn = py.ml_binary if impl == "fallback" else kernels.ml_binary
    for seed in range(20):
        rows, y = _binary_case(6, 11, seed)
        assert tuple(fn(rows, y)) == _brute_binary(rows, y, 6)


def _general_args(F, k, n, seed, logp):
    rng = stream(seed)
    G = rng.integers(0, F.order, (k, n))
    y = rng.integers(0, F.order, n)
    nxt = np.roll(np.arange(F.order), -1)
    rowmul = F.mul_table[np.arange(F.order)[None, :, None], G[:, None, :]]
    delta = np.ascontiguousarray(F.sub_table[rowmul[:, nxt, :], rowmul])
    return delta, y, F.add_table, np.ascontiguousarray(F.sub_table), logp


@needs_compiled
@pytest.mark.parametrize("pz, k, n", [((3, 1), 3, 6), ((2, 2), 4, 8), ((5, 1), 5, 9), ((2, 3), 3, 12)])
def test_ml_general_agrees(pz, k, n):
    F = make_field(*pz)
    probs = np.linspace(2.0, 1.0, F.order)
    probs[-1] = 0.0
    pmf = NoisePmf(F, probs / probs.sum())
    for seed in range(5):
        args = _general_args(F, k, n, seed, pmf.logp)
        assert kernels.ml_general(*args) == py.ml_general(*args)


@needs_compiled
@pytest.mark.parametrize("k, n", [(10, 30), (40, 100), (77, 256)])
def test_isd_binary_agrees(k, n):
    for seed in range(3):
        rng = stream(seed, 1)
        code = lc.sample_code(make_field(2), k, n, rng, full_rank=True)
        s = rng.integers(0, 2, k)
        e = (rng.random(n) < 0.08).astype(np.int64)
        target = code.field.vec_add(code.field.vecmat(s, code.G), e)
        p, ell, k1, sub1, sub2 = lc._stern_params(k, n, None, None)
        stop = lc._stop_table(n, k, k1, p, ell, 1e-3, 500)
        args = (lc.pack_bits(code.G), lc.pack_bits(target), n, 500, sub1, sub2, ell, 99 + seed, stop)
        wc, ww, wi = kernels.isd_binary(*args)
        wp, pw, pi = py.isd_binary(*args)
        np.testing.assert_array_equal(np.asarray(wc), np.asarray(wp))
        assert (ww, wi) == (pw, pi)


def test_isd_finds_planted_codeword():
    F = make_field(2)
    rng = stream(5)
    code = lc.sample_code(F, 30, 90, rng, full_rank=True)
    s = rng.integers(0, 2, 30)
    y = code.encode(s).copy()
    y[[3, 40, 77]] ^= 1
    for impl in (kernels.isd_binary, py.isd_binary):
        p, ell, k1, sub1, sub2 = lc._stern_params(30, 90, None, None)
        stop = lc._stop_table(90, 30, k1, p, ell, 1e-4, 2000)
        target = F.vec_sub(y, code.q)
        words, w, _ = impl(lc.pack_bits(code.G), lc.pack_bits(target), 90, 2000, sub1, sub2, ell, 1, stop)
        np.testing.assert_array_equal(lc._unpack_words(words, 30), s)
        assert w == 3


def test_selected_backend_reports_flag():
    assert isinstance(kernels.COMPILED, bool)
    if not kernels.COMPILED:
        assert kernels.ml_binary is py.ml_binary


def test_isd_decode_matches_ml_on_small_codes():
    F = make_field(2)
    noise = bsc(0.1)
    for seed in range(10):
        rng = stream(seed, 2)
        code = lc.sample_code(F, 12, 40, rng, full_rank=True)
        y = rng.integers(0, 2, 40)
        ml = lc.ml_decode(code, y, noise)
        isd = lc.isd_decode(code, y, noise, seed=seed, delta=1e-6, max_iterations=20000)
        d_ml = int((code.encode(ml) != y).sum())
        d_isd = int((code.encode(isd) != y).sum())
        assert d_isd == d_ml
