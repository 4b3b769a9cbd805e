"""Hot loops for tree construction, compiled with numba.

The split search walks every feature's presorted sample order once per tree
level and maintains running sums per node, so one call covers all nodes of
the level in O(n_features * n_samples). Accumulation order is fixed, which
keeps results bit-reproducible.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def best_splits_level(
    order,      # (F, n) int32: sample indices ascending by feature value
    xsorted,    # (F, n) float64: feature values in that order
    node_of,    # (n,) int32: node slot per sample, -1 if settled
    grad,       # (n,) float64: regression targets (negative gradients)
    tot_g,      # (n_nodes,) float64: per-slot target sums
    tot_c,      # (n_nodes,) int64: per-slot sample counts
    allowed,    # (F,) bool: feature mask
    min_leaf,   # int
):
    n_features, n = order.shape
    n_nodes = tot_g.shape[0]

    best_gain = np.full(n_nodes, -1.0)
    best_feat = np.full(n_nodes, -1, dtype=np.int32)
    best_thr = np.zeros(n_nodes)

    run_g = np.zeros(n_nodes)
    run_c = np.zeros(n_nodes, dtype=np.int64)
    last_x = np.zeros(n_nodes)

    for f in range(n_features):
        if not allowed[f]:
            continue
        for nd in range(n_nodes):
            run_g[nd] = 0.0
            run_c[nd] = 0
        for pos in range(n):
            i = order[f, pos]
            nd = node_of[i]
            if nd < 0:
                continue
            x = xsorted[f, pos]
            c = run_c[nd]
            if c > 0 and x > last_x[nd]:
                cr = tot_c[nd] - c
                if c >= min_leaf and cr >= min_leaf:
                    gl = run_g[nd]
                    gr = tot_g[nd] - gl
                    gain = gl * gl / c + gr * gr / cr - tot_g[nd] * tot_g[nd] / tot_c[nd]
                    # strict > keeps the lowest feature index / threshold on ties
                    if gain > best_gain[nd]:
                        best_gain[nd] = gain
                        best_feat[nd] = f
                        best_thr[nd] = 0.5 * (last_x[nd] + x)
            run_g[nd] += grad[i]
            run_c[nd] = c + 1
            last_x[nd] = x

    return best_gain, best_feat, best_thr
