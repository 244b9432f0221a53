"""Pure-Python reference kernel.

Semantics twin of the Cython kernel in ``_core.pyx``; any divergence
between the two is a bug (see tests/test_kernels.py). Kept dependency-free
inside the row loop for speed: rows are materialized as Python lists once
per call.
"""

from __future__ import annotations

WEIGHT_TIE_EPS = 1e-9


def resolve_rows(
    answers, weights, latencies, order, budgets,
    quorum, trivial_max, early_stop,
    final, elapsed, early, n_completed,
):
    answers_l = answers.tolist()
    weights_l = weights.tolist()
    latencies_l = latencies.tolist()
    order_l = order.tolist()
    budgets_l = budgets.tolist()
    n = len(answers_l[0]) if answers_l else 0

    for r in range(len(answers_l)):
        row_ans = answers_l[r]
        row_w = weights_l[r]
        row_lat = latencies_l[r]
        row_order = order_l[r]
        budget = budgets_l[r]

        uniq: list[int] = []
        cnt: list[int] = []
        wsum: list[float] = []
        completed = 0
        stopped = False
        timed_out = False
        stop_time = 0.0
        last_lat = 0.0

        for j in range(n):
            i = row_order[j]
            lat = row_lat[i]
            if lat > budget:
                timed_out = True
                break
            a = row_ans[i]
            w = row_w[i]
            try:
                k = uniq.index(a)
            except ValueError:
                k = len(uniq)
                uniq.append(a)
                cnt.append(0)
                wsum.append(0.0)
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
            for k in range(1, len(uniq)):
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
