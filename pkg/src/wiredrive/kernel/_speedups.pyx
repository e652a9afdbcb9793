# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel implementations.

Operation-for-operation mirror of ``_fallback.py``; the build disables
floating-point contraction so both backends produce bit-identical
results.  Keep the arithmetic order in sync with the fallback.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def pd_batch(double[::1] l, double[::1] l_ref, double[::1] l_rate,
             double[::1] ff, double[::1] f_max,
             double kp, double kd,
             double pulley_radius, double torque_denom):
    cdef Py_ssize_t k = l.shape[0]
    cdef Py_ssize_t j
    cdef double raw, ceiling, clamped

    f_arr = np.empty(k)
    i_arr = np.empty(k)
    s_arr = np.empty(k, dtype=np.uint8)
    cdef double[::1] f_out = f_arr
    cdef double[::1] i_out = i_arr
    cdef cnp.uint8_t[::1] sat = s_arr

    for j in range(k):
        raw = kp * (l[j] - l_ref[j]) + kd * l_rate[j] + ff[j]
        ceiling = f_max[j]
        clamped = raw
        if 0.0 > clamped:
            clamped = 0.0
        if ceiling < clamped:
            clamped = ceiling
        f_out[j] = clamped
        i_out[j] = clamped * pulley_radius / torque_denom
        sat[j] = 1 if (raw < 0.0 or raw > ceiling) else 0
    return f_arr, i_arr, s_arr
