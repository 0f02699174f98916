# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: fixed-point logistic map, Sub_HCIE tracing, tuple
bucketing, and the brute-force key scan.

Same signatures as :mod:`hcie._fallback`.  The logistic map here is limited
to ``precision <= 32`` (64-bit products); callers route wider keys to the
fallback.
"""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport int8_t, int64_t, uint8_t, uint64_t
from cython.operator cimport dereference as deref
from libcpp.unordered_map cimport unordered_map

from ._tables import line_table

cnp.import_array()

NAME = "compiled"
MAX_PRECISION = 32


cdef inline uint64_t _logistic(uint64_t x, uint64_t mu, int L) noexcept nogil:
    cdef uint64_t one = (<uint64_t>1) << L
    cdef uint64_t t = (x * (one - x)) >> L
    cdef uint64_t r = (mu * t) >> (L - 2)
    if r >= one:
        r = one - 1
    return r


cdef void _fill_bits(uint64_t x, uint64_t mu, int L, int64_t nbits, uint8_t* out) noexcept nogil:
    cdef int64_t n = 0
    cdef int k
    cdef unsigned int byte
    while n < nbits:
        x = _logistic(x, mu, L)
        if L >= 8:
            byte = <unsigned int>((x >> (L - 8)) & 0xFF)
        else:
            byte = <unsigned int>((x << (8 - L)) & 0xFF)
        k = 7
        while k >= 0 and n < nbits:
            out[n] = (byte >> k) & 1
            n += 1
            k -= 1


def logistic_bytes(uint64_t x0, uint64_t mu, int precision, Py_ssize_t count):
    if precision > MAX_PRECISION or precision < 2:
        raise ValueError(f"compiled logistic map supports 2..{MAX_PRECISION} bits")
    cdef cnp.ndarray[uint8_t, ndim=1] out = np.empty(count, dtype=np.uint8)
    cdef uint8_t[::1] o = out
    cdef uint64_t x = x0
    cdef int L = precision
    cdef Py_ssize_t n
    with nogil:
        for n in range(count):
            x = _logistic(x, mu, L)
            if L >= 8:
                o[n] = <uint8_t>((x >> (L - 8)) & 0xFF)
            else:
                o[n] = <uint8_t>((x << (8 - L)) & 0xFF)
    return out


cdef void _sub_hcie(int64_t* a, int64_t* tmp, const int64_t* pos, const int64_t* start,
                    const int8_t* sign, int nlines, const uint8_t* bits,
                    int alpha, int beta, int gamma, int no) noexcept nogil:
    cdef int ite, g
    cdef int64_t q, p, s, n, t, lo, src
    for ite in range(no):
        q = <int64_t>nlines * ite
        p = alpha + beta * bits[q] + gamma * bits[q + 1]
        for g in range(nlines):
            lo = start[g]
            n = start[g + 1] - lo
            s = sign[g] * p
            if bits[q + g]:
                s = -s
            s %= n
            if s < 0:
                s += n
            if s == 0:
                continue
            for t in range(n):
                src = t + s
                if src >= n:
                    src -= n
                tmp[t] = a[pos[lo + src]]
            for t in range(n):
                a[pos[lo + t]] = tmp[t]


def sub_hcie_gather(int sm, int sn, bits, int alpha, int beta, int gamma, int no):
    table = line_table(sm, sn)
    cdef const int64_t[::1] pos = table.pos
    cdef const int64_t[::1] start = table.start
    cdef const int8_t[::1] sign = table.sign
    cdef int nlines = 3 * sm + 3 * sn - 2
    cdef const uint8_t[::1] b = np.ascontiguousarray(bits, dtype=np.uint8)
    if b.shape[0] < nlines * no:
        raise ValueError("not enough bits for Sub_HCIE")
    cdef cnp.ndarray[int64_t, ndim=1] out = np.arange(sm * sn, dtype=np.int64)
    cdef int64_t[::1] a = out
    cdef int64_t[::1] tmp = np.empty(max(sm, sn), dtype=np.int64)
    with nogil:
        _sub_hcie(&a[0], &tmp[0], &pos[0], &start[0], &sign[0], nlines, &b[0],
                  alpha, beta, gamma, no)
    return out


def densify(codes):
    cdef const int64_t[::1] c = np.ascontiguousarray(codes, dtype=np.int64)
    cdef Py_ssize_t n = c.shape[0], i
    cdef cnp.ndarray[int64_t, ndim=1] out = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] o = out
    cdef unordered_map[int64_t, int64_t] seen
    cdef unordered_map[int64_t, int64_t].iterator it
    cdef int64_t nxt = 0
    seen.reserve(n)
    with nogil:
        for i in range(n):
            it = seen.find(c[i])
            if it == seen.end():
                seen[c[i]] = nxt
                o[i] = nxt
                nxt += 1
            else:
                o[i] = deref(it).second
    return out, int(nxt)


def bucket_order(ids, Py_ssize_t nb):
    """Counting sort: positions grouped by id, raster order within an id."""
    cdef const int64_t[::1] d = np.ascontiguousarray(ids, dtype=np.int64)
    cdef Py_ssize_t n = d.shape[0], i
    cdef int64_t[::1] head = np.zeros(nb + 1, dtype=np.int64)
    cdef cnp.ndarray[int64_t, ndim=1] out = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] o = out
    with nogil:
        for i in range(n):
            head[d[i] + 1] += 1
        for i in range(nb):
            head[i + 1] += head[i]
        for i in range(n):
            o[head[d[i]]] = i
            head[d[i]] += 1
    return out


def brute_force_scan(plain, cipher, int M, int N, int sm, int sn, int alpha, int beta,
                     int gamma, int no, int precision, x0_values, mu_values):
    if precision > MAX_PRECISION or precision < 2:
        raise ValueError(f"compiled scan supports 2..{MAX_PRECISION} bits")
    cdef int rows = M // sm, cols = N // sn
    cdef int K = rows * cols, ss = sm * sn
    cdef int nlines = 3 * sm + 3 * sn - 2
    cdef int64_t seg = <int64_t>nlines * no
    cdef int64_t nbits = (1 + K) * seg

    def blocks(img):
        a = np.asarray(img, dtype=np.int64).reshape(rows, sm, cols, sn)
        return np.ascontiguousarray(a.swapaxes(1, 2).reshape(K, ss))

    cdef const int64_t[:, ::1] pb = blocks(plain)
    cdef const int64_t[:, ::1] cb = blocks(cipher)
    cdef const uint64_t[::1] xs = np.ascontiguousarray(x0_values, dtype=np.uint64)
    cdef const uint64_t[::1] mus = np.ascontiguousarray(mu_values, dtype=np.uint64)
    table = line_table(sm, sn)
    cdef const int64_t[::1] pos = table.pos
    cdef const int64_t[::1] start = table.start
    cdef const int8_t[::1] sign = table.sign

    cdef uint8_t[::1] bits = np.empty(nbits, dtype=np.uint8)
    cdef int64_t[::1] a = np.empty(ss, dtype=np.int64)
    cdef int64_t[::1] tmp = np.empty(max(sm, sn), dtype=np.int64)
    cdef int64_t[::1] order = np.empty(K, dtype=np.int64)
    cdef int64_t[::1] hits = np.empty(xs.shape[0], dtype=np.int64)
    cdef Py_ssize_t ix, u, t, nhit, k
    cdef uint64_t mu
    cdef bint ok
    cdef int L = precision
    matches = []

    for mu in mus:
        nhit = 0
        with nogil:
            for ix in range(xs.shape[0]):
                _fill_bits(xs[ix], mu, L, nbits, &bits[0])
                for u in range(ss):
                    a[u] = u
                _sub_hcie(&a[0], &tmp[0], &pos[0], &start[0], &sign[0], nlines, &bits[0],
                          alpha, beta, gamma, no)
                k = 0
                for u in range(ss):
                    if a[u] < K:
                        order[k] = a[u]
                        k += 1
                ok = True
                for t in range(K):
                    for u in range(ss):
                        a[u] = u
                    _sub_hcie(&a[0], &tmp[0], &pos[0], &start[0], &sign[0], nlines,
                              &bits[(1 + t) * seg], alpha, beta, gamma, no)
                    for u in range(ss):
                        if pb[order[t], a[u]] != cb[t, u]:
                            ok = False
                            break
                    if not ok:
                        break
                if ok:
                    hits[nhit] = ix
                    nhit += 1
        matches.extend((int(xs[hits[i]]), int(mu)) for i in range(nhit))
    return matches
