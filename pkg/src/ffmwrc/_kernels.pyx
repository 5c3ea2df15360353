# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled decoding kernels.

Must stay result-identical to ``_kernels_py``; ``tests/test_kernels.py``
cross-checks the two.
"""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t, int32_t, uint32_t
from libc.math cimport INFINITY

cnp.import_array()

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil
    int __builtin_ctzll(unsigned long long) nogil


cdef inline uint64_t splitmix64(uint64_t *state) noexcept nogil:
    state[0] += <uint64_t>0x9E3779B97F4A7C15
    cdef uint64_t z = state[0]
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EB
    return z ^ (z >> 31)


def ml_binary(const uint64_t[:, ::1] rows, const uint64_t[::1] y):
    """Minimum-distance search over all 2^k binary messages.

    Returns ``(index, weight)`` of the closest codeword ``s @ rows``;
    ties go to the smallest message index.
    """
    cdef Py_ssize_t k = rows.shape[0], W = rows.shape[1]
    cdef Py_ssize_t j, bit
    cdef uint64_t i, g, total, best_idx = 0
    cdef int w, best_w = 0
    cdef uint64_t[::1] x = np.zeros(W, dtype=np.uint64)
    if k > 62:
        raise ValueError("ml_binary supports k <= 62")
    total = (<uint64_t>1) << k
    with nogil:
        for j in range(W):
            best_w += __builtin_popcountll(y[j])
        for i in range(1, total):
            bit = __builtin_ctzll(i)
            w = 0
            for j in range(W):
                x[j] ^= rows[bit, j]
                w += __builtin_popcountll(x[j] ^ y[j])
            g = i ^ (i >> 1)
            if w < best_w or (w == best_w and g < best_idx):
                best_w = w
                best_idx = g
    return int(best_idx), int(best_w)


def ml_general(const int64_t[:, :, ::1] delta, const int64_t[::1] y,
               const int64_t[:, ::1] add_table, const int64_t[:, ::1] sub_table,
               const double[::1] logp):
    """Exact ML over all q^k messages in increasing integer order.

    ``delta[d, v]`` is the codeword change when digit ``d`` steps from
    ``v`` to ``v + 1`` (mod q).  ``sub_table[b, a]`` is the likelihood
    class of ``b - a`` and the score of a candidate is
    ``sum_c count_c * logp[c]`` over the class histogram, summed in class
    order so equal likelihoods tie exactly.
    """
    cdef Py_ssize_t k = delta.shape[0], q = delta.shape[1], n = delta.shape[2]
    cdef Py_ssize_t t, a, d
    cdef int64_t idx = 0, best_idx = 0, total = 1
    cdef int64_t v
    cdef double score, best = -INFINITY
    cdef bint first = True
    cdef int64_t[::1] x = np.zeros(n, dtype=np.int64)
    cdef int64_t[::1] digits = np.zeros(max(k, 1), dtype=np.int64)
    cdef int64_t[::1] counts = np.zeros(q, dtype=np.int64)
    for d in range(k):
        total *= q
    with nogil:
        while True:
            for a in range(q):
                counts[a] = 0
            for t in range(n):
                counts[sub_table[y[t], x[t]]] += 1
            score = 0.0
            for a in range(q):
                if counts[a]:
                    score += counts[a] * logp[a]
            if first or score > best:
                best = score
                best_idx = idx
                first = False
            idx += 1
            if idx >= total:
                break
            d = 0
            while True:
                v = digits[d]
                for t in range(n):
                    x[t] = add_table[x[t], delta[d, v, t]]
                if v + 1 < q:
                    digits[d] = v + 1
                    break
                digits[d] = 0
                d += 1
    return int(best_idx)


cdef inline bint _less(uint64_t *a, uint64_t *b, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t j
    for j in range(n - 1, -1, -1):
        if a[j] != b[j]:
            return a[j] < b[j]
    return False


def isd_binary(const uint64_t[:, ::1] rows, const uint64_t[::1] y, Py_ssize_t n,
               Py_ssize_t max_iterations, const int32_t[:, ::1] sub1,
               const int32_t[:, ::1] sub2, int ell, uint64_t seed,
               const int64_t[::1] stop):
    """Stern information-set search for the codeword closest to ``y``.

    Per iteration: shuffle the column order, reduce ``rows`` to systematic
    form on the first independent columns, pick ``ell`` further window
    columns, and match error patterns ``sub1`` (first half of the
    information set) against ``sub2`` (second half) on the window.
    Iteration stops once the count reaches ``stop[best_weight]``.

    Returns ``(message_words, weight, iterations)``; ties go to the
    smaller message.  ``rows`` must have full row rank.
    """
    cdef Py_ssize_t k = rows.shape[0], W = rows.shape[1]
    cdef Py_ssize_t Wk = (k + 63) // 64
    cdef Py_ssize_t L1 = sub1.shape[0], L2 = sub2.shape[0], nb = (<Py_ssize_t>1) << ell
    cdef Py_ssize_t it, i, j, r, c, col, piv, rank, a, e, f, nwin, done = 0
    cdef uint64_t tmp, rs = seed
    cdef int64_t t64
    cdef int w, best_w = 1 << 30
    cdef uint32_t key, bz
    cdef bint deficient = False

    cdef uint64_t[:, ::1] Gs = np.empty((k, W), dtype=np.uint64)
    cdef uint64_t[:, ::1] Ms = np.empty((k, Wk), dtype=np.uint64)
    cdef int64_t[::1] perm = np.arange(n, dtype=np.int64)
    cdef int64_t[::1] stamp = np.zeros(n, dtype=np.int64)
    cdef int64_t[::1] pivcol = np.empty(max(k, 1), dtype=np.int64)
    cdef int64_t[::1] win = np.empty(max(ell, 1), dtype=np.int64)
    cdef uint32_t[::1] rz = np.empty(max(k, 1), dtype=np.uint32)
    cdef uint64_t[::1] res = np.empty(W, dtype=np.uint64)
    cdef uint64_t[::1] msg = np.empty(Wk, dtype=np.uint64)
    cdef uint64_t[::1] cand = np.empty(Wk, dtype=np.uint64)
    cdef uint64_t[::1] best_msg = np.zeros(Wk, dtype=np.uint64)
    cdef uint64_t[::1] s1 = np.empty(W, dtype=np.uint64)
    cdef uint64_t[:, ::1] S2 = np.empty((max(L2, 1), W), dtype=np.uint64)
    cdef uint32_t[::1] key2 = np.empty(max(L2, 1), dtype=np.uint32)
    cdef int64_t[::1] bstart = np.empty(nb + 1, dtype=np.int64)
    cdef int64_t[::1] border = np.empty(max(L2, 1), dtype=np.int64)

    with nogil:
        for it in range(max_iterations):
            for i in range(k):
                for j in range(W):
                    Gs[i, j] = rows[i, j]
                for j in range(Wk):
                    Ms[i, j] = 0
                Ms[i, i >> 6] = (<uint64_t>1) << (i & 63)
            for i in range(n - 1, 0, -1):
                j = <Py_ssize_t>(splitmix64(&rs) % <uint64_t>(i + 1))
                t64 = perm[i]; perm[i] = perm[j]; perm[j] = t64

            rank = 0
            for c in range(n):
                if rank == k:
                    break
                col = perm[c]
                piv = -1
                for r in range(rank, k):
                    if (Gs[r, col >> 6] >> (col & 63)) & 1:
                        piv = r
                        break
                if piv < 0:
                    continue
                if piv != rank:
                    for j in range(W):
                        tmp = Gs[piv, j]; Gs[piv, j] = Gs[rank, j]; Gs[rank, j] = tmp
                    for j in range(Wk):
                        tmp = Ms[piv, j]; Ms[piv, j] = Ms[rank, j]; Ms[rank, j] = tmp
                for r in range(k):
                    if r != rank and (Gs[r, col >> 6] >> (col & 63)) & 1:
                        for j in range(W):
                            Gs[r, j] ^= Gs[rank, j]
                        for j in range(Wk):
                            Ms[r, j] ^= Ms[rank, j]
                pivcol[rank] = col
                stamp[col] = it + 1
                rank += 1
            if rank < k:
                deficient = True
                break

            nwin = 0
            for c in range(n):
                if nwin == ell:
                    break
                if stamp[perm[c]] != it + 1:
                    win[nwin] = perm[c]
                    nwin += 1

            # base candidate: information symbols read straight from y
            for j in range(W):
                res[j] = y[j]
            for j in range(Wk):
                msg[j] = 0
            for r in range(k):
                col = pivcol[r]
                if (y[col >> 6] >> (col & 63)) & 1:
                    for j in range(W):
                        res[j] ^= Gs[r, j]
                    for j in range(Wk):
                        msg[j] ^= Ms[r, j]
            bz = 0
            for i in range(nwin):
                col = win[i]
                bz |= <uint32_t>((res[col >> 6] >> (col & 63)) & 1) << i
            for r in range(k):
                key = 0
                for i in range(nwin):
                    col = win[i]
                    key |= <uint32_t>((Gs[r, col >> 6] >> (col & 63)) & 1) << i
                rz[r] = key

            # second half: bucket error patterns by window syndrome
            for e in range(nb + 1):
                bstart[e] = 0
            for e in range(L2):
                key = 0
                for j in range(W):
                    S2[e, j] = 0
                for i in range(3):
                    a = sub2[e, i]
                    if a < 0:
                        break
                    key ^= rz[a]
                    for j in range(W):
                        S2[e, j] ^= Gs[a, j]
                key2[e] = key
                bstart[key + 1] += 1
            for e in range(nb):
                bstart[e + 1] += bstart[e]
            for e in range(L2):
                key = key2[e]
                border[bstart[key]] = e
                bstart[key] += 1
            for e in range(nb, 0, -1):
                bstart[e] = bstart[e - 1]
            bstart[0] = 0

            for e in range(L1):
                key = bz
                for j in range(W):
                    s1[j] = res[j]
                for i in range(3):
                    a = sub1[e, i]
                    if a < 0:
                        break
                    key ^= rz[a]
                    for j in range(W):
                        s1[j] ^= Gs[a, j]
                for f in range(bstart[key], bstart[key + 1]):
                    c = border[f]
                    w = 0
                    for j in range(W):
                        w += __builtin_popcountll(s1[j] ^ S2[c, j])
                    if w > best_w:
                        continue
                    for j in range(Wk):
                        cand[j] = msg[j]
                    for i in range(3):
                        a = sub1[e, i]
                        if a < 0:
                            break
                        for j in range(Wk):
                            cand[j] ^= Ms[a, j]
                    for i in range(3):
                        a = sub2[c, i]
                        if a < 0:
                            break
                        for j in range(Wk):
                            cand[j] ^= Ms[a, j]
                    if w < best_w or _less(&cand[0], &best_msg[0], Wk):
                        best_w = w
                        for j in range(Wk):
                            best_msg[j] = cand[j]
            done = it + 1
            if best_w < stop.shape[0] and done >= stop[best_w]:
                break
    if deficient:
        raise ValueError("generator matrix is rank deficient")
    return np.asarray(best_msg).copy(), int(best_w), int(done)
