"""Independent brute-force reference for the weight-distribution contract.

This module re-derives the documented tension-distribution semantics by a
different numerical route than the production solver, so the two can
cross-check each other:

* the equality-constrained damped lateral problem is solved through a
  bordered KKT system with an explicit Lagrange multiplier (the solver
  reduces to the constraint's null space with a Householder basis);
* every bound/free pattern is enumerated with no reachability pruning.

The contract being checked, for directions ``d`` (3 x m), demand
``w = (0, 0, weight)`` and box ``0 <= f <= f_max``:

1. the vertical row ``d[2] @ f = w[2]`` is met exactly (to rounding);
2. lateral rows are satisfied in the damped least-squares sense with
   Tikhonov weight 1e-6 on the tension correction;
3. the unconstrained-pattern solution wins when it sits inside the box;
4. otherwise, over all bound/free patterns, the smallest lateral residual
   wins, and within a 1e-6-scaled band of it the smallest sum of squared
   tensions wins;
5. when no pattern can carry the weight inside the box, the problem is
   infeasible (the reference returns None).

Tolerances are part of the contract and appear here literally.
"""
from __future__ import annotations

import itertools

import numpy as np

BOUND_TOL = 1e-9
VERTICAL_TOL = 1e-9
LATERAL_TOL = 1e-6
DAMPING = 1e-6

FREE, AT_ZERO, AT_MAX = 0, 1, 2


def reference_manifold_solve(d: np.ndarray, target: np.ndarray,
                             z_tol: float):
    """Damped lateral least squares on the exact-weight manifold.

    Returns the unique minimizer of ``|d[:2] f - target[:2]|^2 +
    DAMPING * |f - f0|^2`` subject to ``d[2] @ f = target[2]``, where
    ``f0`` is the minimum-norm point of that constraint; None when the
    columns have no vertical authority but weight is demanded.
    """
    m = d.shape[1]
    dz = d[2]
    nz2 = float(dz @ dz)
    tz = float(target[2])
    lateral = d[:2]
    if nz2 < 1e-16:
        if abs(tz) > z_tol:
            return None
        gram = lateral.T @ lateral + DAMPING * np.eye(m)
        return np.linalg.solve(gram, lateral.T @ target[:2])
    f0 = dz * (tz / nz2)
    if m == 1:
        return f0
    kkt = np.zeros((m + 1, m + 1))
    kkt[:m, :m] = lateral.T @ lateral + DAMPING * np.eye(m)
    kkt[:m, m] = dz
    kkt[m, :m] = dz
    rhs = np.empty(m + 1)
    rhs[:m] = lateral.T @ target[:2] + DAMPING * f0
    rhs[m] = tz
    return np.linalg.solve(kkt, rhs)[:m]


def _inside_box(f: np.ndarray, f_max: np.ndarray) -> bool:
    return bool(np.all(f >= -BOUND_TOL) and np.all(f <= f_max + BOUND_TOL))


def reference_distribution(d: np.ndarray, w: np.ndarray, f_max: np.ndarray):
    """Full reference solve; returns tensions or None when infeasible."""
    d = np.asarray(d, dtype=float)
    w = np.asarray(w, dtype=float)
    f_max = np.asarray(f_max, dtype=float)
    k = d.shape[1]
    scale = max(1.0, float(np.max(np.abs(w))))
    z_tol = VERTICAL_TOL * scale
    xy_tol = LATERAL_TOL * scale

    free = reference_manifold_solve(d, w, z_tol)
    if free is not None and _inside_box(free, f_max):
        return np.clip(free, 0.0, f_max)

    candidates = []
    for pattern in itertools.product((FREE, AT_ZERO, AT_MAX), repeat=k):
        f_try = np.zeros(k)
        target = w.copy()
        free_cols = []
        for j, state in enumerate(pattern):
            if state == AT_MAX:
                f_try[j] = f_max[j]
                target = target - f_max[j] * d[:, j]
            elif state == FREE:
                free_cols.append(j)
        if free_cols:
            sub = d[:, free_cols]
            x = reference_manifold_solve(sub, target, z_tol)
            if x is None:
                continue
            if not _inside_box(x, f_max[free_cols]):
                continue
            f_try[free_cols] = np.clip(x, 0.0, f_max[free_cols])
        res = d @ f_try - w
        if abs(float(res[2])) > z_tol:
            continue
        lat = float(np.hypot(res[0], res[1]))
        candidates.append((lat, float(f_try @ f_try), f_try))
    if not candidates:
        return None
    floor = min(c[0] for c in candidates)
    best = min((c for c in candidates if c[0] <= floor + xy_tol),
               key=lambda c: c[1])
    return best[2]


def random_problems(count: int, seed: int = 20260816):
    """Reproducible corpus of small weight-distribution problems.

    Yields (d, w, f_max) triples over four geometry archetypes: overhead
    suspensions, same-side leaning lines that cannot cancel laterally,
    mixed up/down lines, and near-degenerate bundles with repeated or
    nearly horizontal directions.
    """
    rng = np.random.default_rng(seed)
    problems = []
    for _ in range(count):
        k = int(rng.integers(1, 5))
        archetype = rng.random()
        if archetype < 0.5:                      # overhead suspension
            xy = rng.uniform(-0.6, 0.6, size=(2, k))
            z = rng.uniform(0.4, 1.0, size=(1, k))
            d = np.vstack([xy, z])
        elif archetype < 0.7:                    # all leaning the same way
            x = rng.uniform(0.1, 0.7, size=(1, k))
            y = rng.uniform(-0.3, 0.3, size=(1, k))
            z = rng.uniform(0.4, 1.0, size=(1, k))
            d = np.vstack([x, y, z])
        elif archetype < 0.85:                   # mixed, some pulling down
            d = rng.uniform(-1.0, 1.0, size=(3, k))
        else:                                    # degenerate bundles
            base = rng.uniform(-1.0, 1.0, size=3)
            d = np.column_stack([
                base if rng.random() < 0.5
                else np.array([rng.uniform(-1, 1), rng.uniform(-1, 1),
                               rng.uniform(-0.05, 0.05)])
                for _ in range(k)
            ])
        norms = np.linalg.norm(d, axis=0)
        norms[norms < 1e-12] = 1.0
        d = d / norms
        # via-point wires can have net direction norms above one
        d = d * rng.uniform(0.5, 1.6)
        f_max = rng.uniform(40.0, 260.0, size=k)
        # demand between well inside and slightly beyond what the lines
        # can lift, so the corpus mixes feasible and infeasible problems
        capacity = float(np.maximum(d[2], 0.0) @ f_max)
        if capacity > 20.0:
            weight = float(rng.uniform(0.05, 1.25)) * capacity
        else:
            weight = float(rng.uniform(20.0, 900.0))
        problems.append((d, np.array([0.0, 0.0, weight]), f_max))
    return problems
