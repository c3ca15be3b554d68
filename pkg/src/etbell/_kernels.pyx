# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled trial kernels; bit-identical to ``_kernels_py``."""
import numpy as np

from libc.stdint cimport uint64_t, int64_t

IMPLEMENTATION = "cython"

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double TWO_M53 = 1.0 / 9007199254740992.0


cdef inline uint64_t _draw(uint64_t seed, uint64_t trial, uint64_t k) noexcept nogil:
    cdef uint64_t z = seed + (trial * 4 + k + 1) * GOLDEN
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double _uniform(uint64_t x) noexcept nogil:
    return <double>(x >> 11) * TWO_M53


cdef inline Py_ssize_t _first_above(const double[::1] cum, double u) noexcept nogil:
    # first k with u < cum[k]; binary search, same result as searchsorted(side="right")
    cdef Py_ssize_t lo = 0, hi = cum.shape[0], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if cum[mid] <= u:
            lo = mid + 1
        else:
            hi = mid
    return lo


def tally_quantum(uint64_t seed, uint64_t start, uint64_t stop,
                  setting_cum, joint_cum):
    cdef const double[::1] scum = np.ascontiguousarray(setting_cum, dtype=np.float64)
    cdef const double[:, ::1] jcum = np.ascontiguousarray(joint_cum, dtype=np.float64)
    kept_arr = np.zeros(16, dtype=np.int64)
    total_arr = np.zeros(16, dtype=np.int64)
    pat_arr = np.zeros(16, dtype=np.int64)
    cdef int64_t[::1] kept = kept_arr
    cdef int64_t[::1] total = total_arr
    cdef int64_t[::1] patterns = pat_arr
    cdef uint64_t t
    cdef Py_ssize_t pair, pattern, outcome, idx
    with nogil:
        for t in range(start, stop):
            pair = _first_above(scum, _uniform(_draw(seed, t, 0)))
            pattern = <Py_ssize_t>(_draw(seed, t, 1) >> 62)
            if pattern == 0 or pattern == 3:
                outcome = _first_above(jcum[pair], _uniform(_draw(seed, t, 2)))
                idx = 4 * pair + outcome
                kept[idx] += 1
            else:
                outcome = <Py_ssize_t>(_draw(seed, t, 3) >> 62)
                idx = 4 * pair + outcome
            total[idx] += 1
            patterns[4 * pair + pattern] += 1
    return kept_arr, total_arr, pat_arr


def tally_lhv(uint64_t seed, uint64_t start, uint64_t stop,
              setting_cum, set_cum, alice_code, bob_code):
    cdef const double[::1] scum = np.ascontiguousarray(setting_cum, dtype=np.float64)
    cdef const double[::1] wcum = np.ascontiguousarray(set_cum, dtype=np.float64)
    cdef const int64_t[:, ::1] acode = np.ascontiguousarray(alice_code, dtype=np.int64)
    cdef const int64_t[:, ::1] bcode = np.ascontiguousarray(bob_code, dtype=np.int64)
    kept_arr = np.zeros(16, dtype=np.int64)
    total_arr = np.zeros(16, dtype=np.int64)
    pat_arr = np.zeros(16, dtype=np.int64)
    cdef int64_t[::1] kept = kept_arr
    cdef int64_t[::1] total = total_arr
    cdef int64_t[::1] patterns = pat_arr
    cdef uint64_t t
    cdef Py_ssize_t pair, s, idx
    cdef int64_t x, y
    with nogil:
        for t in range(start, stop):
            pair = _first_above(scum, _uniform(_draw(seed, t, 0)))
            s = _first_above(wcum, _uniform(_draw(seed, t, 1)))
            x = acode[s, pair >> 1]
            y = bcode[s, pair & 1]
            idx = 4 * pair + 2 * (x & 1) + (y & 1)
            total[idx] += 1
            if (x >> 1) == (y >> 1):
                kept[idx] += 1
            patterns[4 * pair + 2 * (x >> 1) + (y >> 1)] += 1
    return kept_arr, total_arr, pat_arr
