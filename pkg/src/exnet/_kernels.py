"""Hot numeric kernels for session sampling.

Budgets arrive here pre-scaled to int64 (exact: quantities are rationals
multiplied by the common denominator), so the inner loops are pure integer
arithmetic and safe to JIT.

The same source is used for both backends: with numba available (and
EXNET_NO_NUMBA unset) the functions are compiled with @njit, otherwise the
plain Python definitions run as-is over numpy arrays. Both paths share one
xorshift64 generator, so sampled results are bit-identical across backends.
"""
from __future__ import annotations

import os

import numpy as np


def _use_numba() -> bool:
    if os.environ.get("EXNET_NO_NUMBA"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def _next_u64(state):
    # xorshift64; state is a 1-element uint64 array so wraparound is silent
    # and identical under numpy and numba.
    x = state[0]
    x ^= x << np.uint64(13)
    x ^= x >> np.uint64(7)
    x ^= x << np.uint64(17)
    state[0] = x
    return x


def _run_session_kernel(demand0, supply0, link_b, link_s, order, d_out, s_out):
    """Execute one full session along `order`; writes terminal budgets in place."""
    d_out[:] = demand0
    s_out[:] = supply0
    for k in range(order.shape[0]):
        e = order[k]
        b = link_b[e]
        s = link_s[e]
        amt = d_out[b]
        if s_out[s] < amt:
            amt = s_out[s]
        d_out[b] -= amt
        s_out[s] -= amt


def _sample_sessions_kernel(demand0, supply0, link_b, link_s, n, seed):
    """Run n sessions with uniformly random link orderings.

    Returns (infeasible_count, max_total_unmet, max_buyer_unmet), all in the
    scaled integer units of the inputs.
    """
    n_links = link_b.shape[0]
    n_buyers = demand0.shape[0]
    state = np.zeros(1, dtype=np.uint64)
    state[0] = np.uint64(2 * seed + 1)  # odd, hence nonzero: xorshift must not start at 0
    for _ in range(8):
        _next_u64(state)

    order = np.arange(n_links, dtype=np.int64)
    d = np.empty_like(demand0)
    s = np.empty_like(supply0)
    infeasible = 0
    max_total = np.int64(0)
    max_buyer = np.int64(0)
    for _ in range(n):
        for i in range(n_links - 1, 0, -1):
            j = np.int64(_next_u64(state) % np.uint64(i + 1))
            tmp = order[i]
            order[i] = order[j]
            order[j] = tmp
        _run_session_kernel(demand0, supply0, link_b, link_s, order, d, s)
        total = np.int64(0)
        worst = np.int64(0)
        for b in range(n_buyers):
            total += d[b]
            if d[b] > worst:
                worst = d[b]
        if total > 0:
            infeasible += 1
        if total > max_total:
            max_total = total
        if worst > max_buyer:
            max_buyer = worst
    return infeasible, max_total, max_buyer


if _use_numba():
    from numba import njit

    _next_u64 = njit(cache=True)(_next_u64)
    _run_session_kernel = njit(cache=True)(_run_session_kernel)
    _sample_sessions_kernel = njit(cache=True)(_sample_sessions_kernel)
    KERNEL_BACKEND = "numba"
else:
    KERNEL_BACKEND = "python"


def sample_sessions_scaled(demand0, supply0, link_b, link_s, n: int, seed: int):
    """Backend-dispatching wrapper; all array arguments must be int64."""
    return _sample_sessions_kernel(
        np.ascontiguousarray(demand0, dtype=np.int64),
        np.ascontiguousarray(supply0, dtype=np.int64),
        np.ascontiguousarray(link_b, dtype=np.int64),
        np.ascontiguousarray(link_s, dtype=np.int64),
        n,
        int(seed) & 0xFFFFFFFF,
    )
