# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled statevector kernel: apply a sum of Pauli strings to a state.

Each term is encoded as (flip mask, phase mask, complex weight): the string
maps basis state |b> to weight * (-1)^popcount(b & pmask) |b ^ flip>, with the
i^{#Y} factor folded into the weight.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()

cdef extern from *:
    """
    #if defined(__GNUC__) || defined(__clang__)
    #define CHRONO_POPCOUNT(x) __builtin_popcountll(x)
    #else
    static int CHRONO_POPCOUNT(unsigned long long x) {
        int c = 0;
        while (x) { x &= x - 1; c++; }
        return c;
    }
    #endif
    """
    int CHRONO_POPCOUNT(unsigned long long x) nogil


def apply_terms(const double complex[::1] vec,
                double complex[::1] out,
                const long long[::1] flips,
                const long long[::1] pmasks,
                const double complex[::1] weights):
    """out += sum_t w_t (-1)^popcount((j^f_t)&pm_t) vec[j^f_t], in place."""
    cdef Py_ssize_t dim = vec.shape[0]
    cdef Py_ssize_t nterms = flips.shape[0]
    cdef Py_ssize_t t, j
    cdef unsigned long long f, pm, src
    cdef double complex w
    with nogil:
        for t in range(nterms):
            f = <unsigned long long> flips[t]
            pm = <unsigned long long> pmasks[t]
            w = weights[t]
            if pm == 0 and f == 0:
                for j in range(dim):
                    out[j] = out[j] + w * vec[j]
            elif pm == 0:
                for j in range(dim):
                    out[j] = out[j] + w * vec[j ^ f]
            else:
                for j in range(dim):
                    src = j ^ f
                    if CHRONO_POPCOUNT(src & pm) & 1:
                        out[j] = out[j] - w * vec[src]
                    else:
                        out[j] = out[j] + w * vec[src]
    return None
