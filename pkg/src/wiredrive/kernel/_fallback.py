"""Pure-Python kernel implementations.

Scalar arithmetic, written to be reproduced operation for operation by
the compiled twin in ``_speedups.pyx``.  Any change here must be made
there as well, in the same order, or the two backends stop being
bit-identical.
"""

from __future__ import annotations

import numpy as np


def pd_batch(l: np.ndarray, l_ref: np.ndarray, l_rate: np.ndarray,
             ff: np.ndarray, f_max: np.ndarray,
             kp: float, kd: float,
             pulley_radius: float, torque_denom: float):
    """PD-plus-feedforward tension commands for a batch of wires.

    Returns (forces, currents, saturated) where saturated marks commands
    that hit either end of [0, f_max] before clamping.
    """
    k = l.shape[0]
    f_out = np.empty(k)
    i_out = np.empty(k)
    sat = np.empty(k, dtype=np.uint8)
    for j in range(k):
        raw = kp * (float(l[j]) - float(l_ref[j])) + kd * float(l_rate[j]) \
            + float(ff[j])
        ceiling = float(f_max[j])
        clamped = raw
        if 0.0 > clamped:
            clamped = 0.0
        if ceiling < clamped:
            clamped = ceiling
        f_out[j] = clamped
        i_out[j] = clamped * pulley_radius / torque_denom
        sat[j] = 1 if (raw < 0.0 or raw > ceiling) else 0
    return f_out, i_out, sat
