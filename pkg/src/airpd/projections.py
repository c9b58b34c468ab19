"""Euclidean projections used by the feasible sets of both use cases.

All routines operate on float64 numpy arrays and return new arrays.
"""

import numpy as np


def project_capacity_cap(v, cap):
    """Project v onto {u >= 0, sum(u) <= cap} by iterative clip-and-shift.

    Starts from the nonnegative clip. While the total exceeds the cap,
    the excess is spread uniformly over the currently positive entries
    and negatives are re-clipped. Each pass either terminates with the
    total exactly at the cap or removes at least one entry from the
    active set, so at most len(v) passes run (O(n^2) worst case).

    The uniform shift never exceeds the exact projection threshold
    (entries it zeroes are zero in the true projection too), hence the
    fixed point is the exact Euclidean projection.
    """
    if cap < 0:
        raise ValueError(f"capacity cap must be nonnegative, got {cap}")
    u = np.maximum(np.asarray(v, dtype=float), 0.0)
    if cap == 0.0:
        return np.zeros_like(u)
    total = u.sum()
    if total <= cap:
        return u
    for _ in range(u.size + 1):
        active = u > 0
        n_active = int(active.sum())
        if n_active == 0:
            break
        excess = u[active].sum() - cap
        if excess <= 0:
            break
        shift = excess / n_active
        u[active] -= shift
        if (u >= 0).all():
            break
        u = np.maximum(u, 0.0)
    return np.maximum(u, 0.0)


def project_simplex(v, total=1.0):
    """Exact projection of v onto {x >= 0, sum(x) = total} (sort method)."""
    v = np.asarray(v, dtype=float)
    if total <= 0:
        raise ValueError(f"simplex total must be positive, got {total}")
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - total
    ind = np.arange(1, v.size + 1)
    cond = u - css / ind > 0
    rho = ind[cond][-1]
    tau = css[cond][-1] / rho
    return np.maximum(v - tau, 0.0)


def project_simplex_rows(v, total=1.0):
    """Row-wise equality-simplex projection for a 2-d array.

    Each row of v is projected onto {x >= 0, sum(x) = total}. Vectorized
    version of project_simplex; used for the per-band bandwidth shares
    where every band's user fractions must stay on a simplex.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 2:
        raise ValueError("project_simplex_rows expects a 2-d array")
    n = v.shape[1]
    u = -np.sort(-v, axis=1)
    css = np.cumsum(u, axis=1) - total
    ind = np.arange(1, n + 1)
    cond = u - css / ind > 0
    # rho is the last index where cond holds; cond is monotone per row
    rho = n - 1 - np.argmax(cond[:, ::-1], axis=1)
    tau = css[np.arange(v.shape[0]), rho] / (rho + 1)
    return np.maximum(v - tau[:, None], 0.0)
