"""Numba kernels for the backward finite-difference recursions.

The single-system and multi-system kernels share the same inner expression
(revenue minus expected marginal deterioration loss) and the same
first-maximum tie-break over ascending actions, so an N=1 multi-system
solve reproduces the single-system solve bit for bit.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def backward_single(boundary, r_vals, f_vals, lam, dt, n_steps):
    """Backward recursion for one system.

    boundary[x] = value at zero remaining time (minus maintenance cost),
    r_vals/f_vals = revenue and deterioration evaluated on the action grid.
    Returns values (xi+1, n_steps+1) and argmax action indices of the same
    shape. The failed level keeps a constant value and action index 0,
    which callers must map to production rate 0.
    """
    n_states = boundary.shape[0]
    m = r_vals.shape[0]
    values = np.empty((n_states, n_steps + 1))
    policy = np.zeros((n_states, n_steps + 1), dtype=np.int64)
    for x in range(n_states):
        values[x, 0] = boundary[x]
    for n in range(n_steps):
        for x in range(n_states - 1):
            delta = values[x, n] - values[x + 1, n]
            best = r_vals[0] - lam * f_vals[0] * delta
            best_a = 0
            for a in range(1, m):
                gain = r_vals[a] - lam * f_vals[a] * delta
                if gain > best:
                    best = gain
                    best_a = a
            values[x, n + 1] = values[x, n] + dt * best
            policy[x, n + 1] = best_a
        values[n_states - 1, n + 1] = values[n_states - 1, n]
    # Boundary column: the maximizer the recursion would apply as t -> 0,
    # reported for completeness (it never controls the system).
    for x in range(n_states - 1):
        delta = values[x, 0] - values[x + 1, 0]
        best = r_vals[0] - lam * f_vals[0] * delta
        best_a = 0
        for a in range(1, m):
            gain = r_vals[a] - lam * f_vals[a] * delta
            if gain > best:
                best = gain
                best_a = a
        policy[x, 0] = best_a
    return values, policy


@njit(cache=True)
def _multi_best(
    values_col, r_tot, f_combo, sq_norm, digits, lams, state_digits, xi, strides
):
    """Best gain and combo index at one state given the current value column.

    Gain ties resolve to the smallest squared rate norm (the balanced
    split), then to the lexicographically smallest combo; for one system
    this reduces to the smallest-action rule.
    """
    n_combos = r_tot.shape[0]
    n_sys = lams.shape[0]
    best = -np.inf
    best_sq = np.inf
    best_c = 0
    for c in range(n_combos):
        admissible = True
        for i in range(n_sys):
            if state_digits[i] == xi and digits[c, i] > 0:
                admissible = False
                break
        if not admissible:
            continue
        acc = 0.0
        for i in range(n_sys):
            if state_digits[i] == xi:
                continue
            delta = values_col[0] - values_col[strides[i]]
            acc += lams[i] * f_combo[c, i] * delta
        gain = r_tot[c] - acc
        if gain > best or (gain == best and sq_norm[c] < best_sq):
            best = gain
            best_sq = sq_norm[c]
            best_c = c
    return best, best_c


@njit(cache=True)
def backward_multi(boundary, r_tot, f_combo, sq_norm, digits, lams, dt, n_steps, xi):
    """Backward recursion for a fleet sharing one demand-penalty revenue.

    States are flattened with system 1 as the most significant digit in
    base xi+1. digits[c, i] is the per-system action index of combo c and
    f_combo[c, i] the matching deterioration value. The all-failed state
    keeps a constant value, mirroring the single-system failed level.
    """
    n_sys = lams.shape[0]
    n_states = boundary.shape[0]
    values = np.empty((n_states, n_steps + 1))
    policy = np.zeros((n_states, n_steps + 1), dtype=np.int64)
    for z in range(n_states):
        values[z, 0] = boundary[z]

    strides = np.empty(n_sys, dtype=np.int64)
    stride = 1
    for i in range(n_sys - 1, -1, -1):
        strides[i] = stride
        stride *= xi + 1
    state_digits = np.empty(n_sys, dtype=np.int64)

    for n in range(n_steps):
        for z in range(n_states):
            rem = z
            all_failed = True
            for i in range(n_sys):
                state_digits[i] = rem // strides[i]
                rem -= state_digits[i] * strides[i]
                if state_digits[i] != xi:
                    all_failed = False
            if all_failed:
                values[z, n + 1] = values[z, n]
                continue
            best, best_c = _multi_best(
                values[z:, n], r_tot, f_combo, sq_norm, digits, lams, state_digits,
                xi, strides,
            )
            values[z, n + 1] = values[z, n] + dt * best
            policy[z, n + 1] = best_c
    for z in range(n_states):
        rem = z
        all_failed = True
        for i in range(n_sys):
            state_digits[i] = rem // strides[i]
            rem -= state_digits[i] * strides[i]
            if state_digits[i] != xi:
                all_failed = False
        if all_failed:
            continue
        _, best_c = _multi_best(
            values[z:, 0], r_tot, f_combo, sq_norm, digits, lams, state_digits,
            xi, strides,
        )
        policy[z, 0] = best_c
    return values, policy
