# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled contest-resolution kernel. Semantics twin of pyref.py."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

DEF MAX_N = 512
DEF WEIGHT_TIE_EPS = 1e-9


def resolve_rows(
    cnp.int64_t[:, ::1] answers,
    cnp.float64_t[:, ::1] weights,
    cnp.float64_t[:, ::1] latencies,
    cnp.int64_t[:, ::1] order,
    cnp.float64_t[::1] budgets,
    int quorum,
    long long trivial_max,
    bint early_stop,
    cnp.int64_t[::1] final,
    cnp.float64_t[::1] elapsed,
    cnp.uint8_t[::1] early,
    cnp.int32_t[::1] n_completed,
):
    cdef Py_ssize_t rows = answers.shape[0]
    cdef Py_ssize_t n = answers.shape[1]
    cdef Py_ssize_t r, j, k, m, i, best
    cdef long long a
    cdef double w, lat, budget, stop_time, last_lat
    cdef bint stopped, timed_out, found
    cdef int completed
    cdef long long uniq[MAX_N]
    cdef long long cnt[MAX_N]
    cdef double wsum[MAX_N]

    if n > MAX_N:
        raise ValueError("row width exceeds kernel limit")

    with nogil:
        for r in range(rows):
            budget = budgets[r]
            m = 0
            completed = 0
            stopped = False
            timed_out = False
            stop_time = 0.0
            last_lat = 0.0

            for j in range(n):
                i = order[r, j]
                lat = latencies[r, i]
                if lat > budget:
                    timed_out = True
                    break
                a = answers[r, i]
                w = weights[r, i]
                found = False
                for k in range(m):
                    if uniq[k] == a:
                        found = True
                        break
                if not found:
                    k = m
                    uniq[k] = a
                    cnt[k] = 0
                    wsum[k] = 0.0
                    m += 1
                cnt[k] += 1
                wsum[k] += w
                completed += 1
                last_lat = lat
                if early_stop and a > trivial_max and cnt[k] >= quorum:
                    stopped = True
                    stop_time = lat
                    break

            if stopped:
                elapsed[r] = stop_time
            elif timed_out or completed < n:
                elapsed[r] = budget
            else:
                elapsed[r] = last_lat

            if completed == 0:
                final[r] = 0
            else:
                best = 0
                for k in range(1, m):
                    if wsum[k] > wsum[best] + WEIGHT_TIE_EPS:
                        best = k
                    elif wsum[k] >= wsum[best] - WEIGHT_TIE_EPS:
                        if cnt[k] > cnt[best] or (
                            cnt[k] == cnt[best] and uniq[k] < uniq[best]
                        ):
                            best = k
                final[r] = uniq[best]
            early[r] = 1 if stopped else 0
            n_completed[r] = completed
