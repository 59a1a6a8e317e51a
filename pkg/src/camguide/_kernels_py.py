"""Pure-NumPy implementations of the hot kernels.

These are the reference semantics for the compiled extension in
``_kernels.pyx``; the two backends must produce identical removal orders
and pair counts on the same input (up to floating-point tie cases that
the test suite avoids by construction).
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def markov_removal_order(weights, damping, tol, max_iters):
    """Repeated stationary-distribution extraction over a shrinking chain.

    ``weights[i, j]`` is the accumulated vote that state ``i`` precedes
    state ``j``.  Each round builds the row-stochastic transition matrix
    over the still-active states (rows normalized over active columns,
    sink rows replaced by a self-loop, then blended with a uniform
    teleport of mass ``damping``), runs power iteration from the uniform
    vector until the L1 change drops below ``tol``, and removes the
    state with the highest probability (ties broken toward the larger
    state index).

    Returns ``(removal, converged)``: state indices in removal order
    (first removed = ranked last) and a per-round convergence flag.
    """
    W = np.ascontiguousarray(weights, dtype=np.float64)
    n = W.shape[0]
    removal = np.empty(n, dtype=np.int64)
    converged = np.ones(n, dtype=bool)
    active = np.arange(n)

    for step in range(n):
        m = active.size
        if m == 1:
            removal[step] = active[0]
            break
        Wa = W[np.ix_(active, active)]
        s = Wa.sum(axis=1)
        nonsink = s > 0.0
        inv_s = np.zeros(m)
        inv_s[nonsink] = 1.0 / s[nonsink]
        sink = ~nonsink

        y = np.full(m, 1.0 / m)
        ok = False
        for _ in range(max_iters):
            y_next = (1.0 - damping) * (Wa.T @ (y * inv_s)) + damping * (y.sum() / m)
            y_next[sink] += (1.0 - damping) * y[sink]
            delta = float(np.abs(y_next - y).sum())
            y = y_next
            if delta < tol:
                ok = True
                break
        converged[step] = ok

        # ties resolved toward the larger index (states sorted by bin id)
        best = int(np.flatnonzero(y == y.max()).max())
        removal[step] = active[best]
        active = np.delete(active, best)

    return removal, converged


def kendall_pairs(ranks):
    """Count inverted pairs: ``t < u`` with ``ranks[t] > ranks[u]``.

    ``ranks[t]`` is the full-order rank of the element at partial-order
    position ``t``.
    """
    r = np.asarray(ranks, dtype=np.int64)
    if r.size < 2:
        return 0
    disagree = r[:, None] > r[None, :]
    return int(np.triu(disagree, k=1).sum())
