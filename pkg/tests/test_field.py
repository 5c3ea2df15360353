import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ffmwrc import field as fld
from ffmwrc.field import (DegreeMismatch, FieldError, NotIrreducible, NotPrime, ZeroInverse,
                          find_factor, is_prime, make_field)


def test_is_prime():
    primes = [p for p in range(60) if is_prime(p)]
    assert primes == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]


def test_gf4_tables():
    # modulus x^2 + x + 1, element a0 + a1 x encoded as a0 + 2 a1
    F = make_field(2, 2)
    assert F.order == 4 and F.name == "GF(4)"
    assert F.mul(2, 2) == 3
    assert F.mul(2, 3) == 1
    assert F.add(2, 3) == 1
    assert F.inv(3) == 2


def test_gf5_arithmetic():
    F = make_field(5)
    assert F.mul(2, 3) == 1
    assert F.inv(2) == 3
    assert F.neg(2) == 3
    assert F.sub(1, 3) == 3
    assert F.pow(2, 4) == 1


def test_axioms_exhaustive(small_field):
    F = small_field
    g = range(F.order)
    for a, b, c in itertools.product(g, g, g):
        assert F.add(a, b) == F.add(b, a)
        assert F.mul(a, b) == F.mul(b, a)
        assert F.add(F.add(a, b), c) == F.add(a, F.add(b, c))
        assert F.mul(F.mul(a, b), c) == F.mul(a, F.mul(b, c))
        assert F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c))
    for a in g:
        assert F.add(a, 0) == a and F.mul(a, 1) == a
        assert F.add(a, F.neg(a)) == 0
        if a:
            assert F.mul(a, F.inv(a)) == 1


def test_unique_solutions(small_field):
    F = small_field
    for a in range(F.order):
        assert sorted(F.add_table[a]) == list(range(F.order))
        if a:
            assert sorted(F.mul_table[a]) == list(range(F.order))


def test_multiplicative_group_cyclic(small_field):
    F = small_field
    orders = []
    for a in F.nonzero():
        e, x = 1, a
        while x != 1:
            x, e = F.mul(x, a), e + 1
        orders.append(e)
    assert max(orders) == F.order - 1


def test_zero_inverse():
    F = make_field(3)
    with pytest.raises(ZeroInverse):
        F.inv(0)
    with pytest.raises(ZeroDivisionError):
        F.div(1, 0)


def test_bad_construction():
    with pytest.raises(NotPrime):
        make_field(4)
    with pytest.raises(NotIrreducible) as info:
        make_field(2, 2, [1, 0, 1])  # (x + 1)^2
    assert info.value.factor is not None
    with pytest.raises(DegreeMismatch):
        make_field(2, 3, [1, 1, 1])
    with pytest.raises(FieldError):
        make_field(2, 0)


def test_find_factor():
    assert find_factor([1, 1, 1], 2) is None
    f = find_factor([1, 0, 1], 2)
    assert f is not None and len(f) == 2


def test_explicit_modulus_matches_default():
    assert make_field(2, 3, [1, 1, 0, 1]) == make_field(2, 3)


def test_out_of_range_element():
    F = make_field(3)
    with pytest.raises(ValueError):
        F.add(3, 0)


def test_vector_ops():
    F = make_field(5)
    u, v = np.array([1, 2, 3]), np.array([4, 4, 4])
    np.testing.assert_array_equal(F.vec_add(u, v), [0, 1, 2])
    np.testing.assert_array_equal(F.vec_sub(u, v), [2, 3, 4])
    np.testing.assert_array_equal(F.scale(2, u), [2, 4, 1])
    G = np.array([[1, 0, 2], [0, 1, 3]])
    np.testing.assert_array_equal(F.vecmat(np.array([2, 1]), G), [2, 1, 2])
    assert F.rank(G) == 2
    assert F.rank(np.array([[1, 2], [2, 4]])) == 1


def test_module_functions():
    F = make_field(7)
    assert fld.add(F, 3, 5) == 1
    assert fld.mul(F, 3, 5) == 1
    assert fld.inv(F, 3) == 5
    assert fld.neg(F, 3) == 4
    assert fld.sub(F, 3, 5) == 5
    assert fld.power(F, 3, 6) == 1


@settings(max_examples=50, deadline=None)
@given(st.sampled_from([(2, 5), (3, 3), (5, 2), (13, 1)]), st.data())
def test_matmul_linear(pz, data):
    F = make_field(*pz)
    elem = st.integers(0, F.order - 1)
    k, n = data.draw(st.integers(1, 4)), data.draw(st.integers(1, 6))
    G = np.array(data.draw(st.lists(elem, min_size=k * n, max_size=k * n))).reshape(k, n)
    s = np.array(data.draw(st.lists(elem, min_size=k, max_size=k)))
    t = np.array(data.draw(st.lists(elem, min_size=k, max_size=k)))
    c = data.draw(elem)
    lhs = F.vecmat(F.vec_add(F.scale(c, s), t), G)
    rhs = F.vec_add(F.scale(c, F.vecmat(s, G)), F.vecmat(t, G))
    np.testing.assert_array_equal(lhs, rhs)
    np.testing.assert_array_equal(F.matmul(np.stack([s, t]), G)[1], F.vecmat(t, G))
