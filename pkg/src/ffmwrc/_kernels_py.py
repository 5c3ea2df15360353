"""Pure-Python/numpy versions of the decoding kernels.

Same signatures and results as the compiled ``_kernels`` module, used when
the extension is not built.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_CHUNK = 1 << 14


def _splitmix64(state: list) -> int:
    state[0] = (state[0] + 0x9E3779B97F4A7C15) & _MASK
    z = state[0]
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def ml_binary(rows: np.ndarray, y: np.ndarray):
    k, W = rows.shape
    if k > 62:
        raise ValueError("ml_binary supports k <= 62")
    kl = min(k, 12)
    low = np.zeros((1 << kl, W), dtype=np.uint64)
    for j in range(kl):
        span = 1 << j
        low[span:2 * span] = low[:span] ^ rows[j]
    best_idx, best_w = 0, int(np.bitwise_count(y).sum())
    for h in range(1 << (k - kl)):
        hi = np.zeros(W, dtype=np.uint64)
        for j in range(k - kl):
            if (h >> j) & 1:
                hi ^= rows[kl + j]
        w = np.bitwise_count(low ^ hi ^ y).sum(axis=1)
        i = int(np.argmin(w))
        if w[i] < best_w:
            best_w, best_idx = int(w[i]), (h << kl) + i
    return best_idx, best_w


def ml_general(delta, y, add_table, sub_table, logp):
    k, q, n = delta.shape
    rowmul = np.zeros((k, q, n), dtype=np.int64)
    for d in range(k):
        for v in range(q - 1):
            rowmul[d, v + 1] = add_table[rowmul[d, v], delta[d, v]]
    total = q ** k
    powers = q ** np.arange(k, dtype=np.int64)
    best, best_idx = None, 0
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        x = np.zeros((idx.size, n), dtype=np.int64)
        for d in range(k):
            x = add_table[x, rowmul[d, (idx // powers[d]) % q]]
        diff = sub_table[y[None, :], x]
        score = np.zeros(idx.size)
        for a in range(q):
            cnt = (diff == a).sum(axis=1)
            score += np.where(cnt > 0, cnt * logp[a] if np.isfinite(logp[a]) else -np.inf, 0.0)
        i = int(np.argmax(score))
        if best is None or score[i] > best:
            best, best_idx = score[i], int(idx[i])
    return best_idx


def _words_to_int(words) -> int:
    return sum(int(w) << (64 * j) for j, w in enumerate(words))


def _int_to_words(v: int, nwords: int) -> np.ndarray:
    return np.array([(v >> (64 * j)) & _MASK for j in range(nwords)], dtype=np.uint64)


def isd_binary(rows, y, n, max_iterations, sub1, sub2, ell, seed, stop):
    k, W = rows.shape
    Wk = (k + 63) // 64
    base = [_words_to_int(r) for r in rows]
    yi = _words_to_int(y)
    sub1 = [tuple(int(a) for a in s if a >= 0) for s in sub1]
    sub2 = [tuple(int(a) for a in s if a >= 0) for s in sub2]
    rs = [int(seed) & _MASK]
    perm = list(range(n))
    best_w, best_msg, done = 1 << 30, 0, 0
    for it in range(max_iterations):
        G = list(base)
        M = [1 << i for i in range(k)]
        for i in range(n - 1, 0, -1):
            j = _splitmix64(rs) % (i + 1)
            perm[i], perm[j] = perm[j], perm[i]
        rank = 0
        pivcol = []
        for col in perm:
            if rank == k:
                break
            piv = next((r for r in range(rank, k) if (G[r] >> col) & 1), None)
            if piv is None:
                continue
            G[piv], G[rank] = G[rank], G[piv]
            M[piv], M[rank] = M[rank], M[piv]
            for r in range(k):
                if r != rank and (G[r] >> col) & 1:
                    G[r] ^= G[rank]
                    M[r] ^= M[rank]
            pivcol.append(col)
            rank += 1
        if rank < k:
            raise ValueError("generator matrix is rank deficient")
        pivots = set(pivcol)
        win = [c for c in perm if c not in pivots][:ell]

        res, msg = yi, 0
        for r, col in enumerate(pivcol):
            if (yi >> col) & 1:
                res ^= G[r]
                msg ^= M[r]

        def window(v):
            return sum(((v >> col) & 1) << i for i, col in enumerate(win))

        rz = [window(g) for g in G]
        buckets = {}
        for e in sub2:
            key, s = 0, 0
            for a in e:
                key ^= rz[a]
                s ^= G[a]
            buckets.setdefault(key, []).append((e, s))
        bz = window(res)
        for e1 in sub1:
            key, s1 = bz, res
            for a in e1:
                key ^= rz[a]
                s1 ^= G[a]
            for e2, s2 in buckets.get(key, ()):
                w = (s1 ^ s2).bit_count()
                if w > best_w:
                    continue
                cand = msg
                for a in e1 + e2:
                    cand ^= M[a]
                if w < best_w or cand < best_msg:
                    best_w, best_msg = w, cand
        done = it + 1
        if best_w < len(stop) and done >= stop[best_w]:
            break
    return _int_to_words(best_msg, Wk), best_w, done
