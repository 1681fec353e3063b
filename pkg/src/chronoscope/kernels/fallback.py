"""Pure-numpy statevector kernel, used when the compiled extension is absent."""

import numpy as np


def apply_terms(vec, out, flips, pmasks, weights):
    """out += sum_t w_t (-1)^popcount((j^f_t)&pm_t) vec[j^f_t], in place."""
    dim = vec.shape[0]
    idx = np.arange(dim, dtype=np.int64)
    for f, pm, w in zip(flips, pmasks, weights):
        src = idx ^ f
        gathered = vec[src]
        if pm:
            signs = 1.0 - 2.0 * (np.bitwise_count(src & pm) & 1)
            out += (w * signs) * gathered
        else:
            out += w * gathered
    return None
