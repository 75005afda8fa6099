"""Minimum-cost assignment shared by the CFLS and cycle-time metrics."""

import numpy as np
from scipy.optimize import linear_sum_assignment


def min_cost_assignment(cost):
    """Optimal row-to-column pairing of a square cost matrix.

    Returns (row_indices, col_indices, total_cost).  Backed by scipy's
    O(n^3) solver; the brute-force permutation check lives in the tests.
    """
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
        raise ValueError(f"cost matrix must be square, got {cost.shape}")
    rows, cols = linear_sum_assignment(cost)
    return rows, cols, float(cost[rows, cols].sum())
