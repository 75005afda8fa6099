"""Pure-Python implementations of the edit-distance kernels."""

import numpy as np


def levenshtein(a, b):
    n, m = len(a), len(b)
    if n == 0:
        return m
    if m == 0:
        return n
    bl = b.tolist()
    prev = list(range(m + 1))
    cur = [0] * (m + 1)
    for i, ai in enumerate(a.tolist(), start=1):
        cur[0] = i
        for j in range(1, m + 1):
            cost = 0 if ai == bl[j - 1] else 1
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
        prev, cur = cur, prev
    return prev[m]


def normalized_distance_matrix(bag_a, bag_b):
    out = np.empty((len(bag_a), len(bag_b)), dtype=np.float64)
    for i, a in enumerate(bag_a):
        for j, b in enumerate(bag_b):
            denom = max(len(a), len(b))
            out[i, j] = levenshtein(a, b) / denom if denom else 0.0
    return out
