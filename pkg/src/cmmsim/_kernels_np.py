"""Pure-numpy implementations of the hot numeric kernels.

Reference semantics for the numba versions in _kernels_nb.py; selected at
import time by kernels.py (CMM_NUMBA=0 forces this backend).

Segment arrays are (S, 5) float64 rows ``x1 y1 x2 y2 half_width`` with
positive length and half_width (validated at RoadMap construction).
"""

import numpy as np


def corridor_margins(points, segments):
    """Signed margin to the nearest road corridor for each point.

    margin = min over segments of (distance to clamped centerline - half_width);
    <= 0 means the point lies inside at least one corridor.

    points: (P, 2); segments: (S, 5). Returns (P,) float64.
    """
    px = points[:, 0:1]
    py = points[:, 1:2]
    x1, y1, x2, y2, hw = (segments[:, k][None, :] for k in range(5))
    dx = x2 - x1
    dy = y2 - y1
    seg_len_sq = dx * dx + dy * dy
    t = ((px - x1) * dx + (py - y1) * dy) / seg_len_sq
    t = np.clip(t, 0.0, 1.0)
    ex = px - (x1 + t * dx)
    ey = py - (y1 + t * dy)
    margin = np.sqrt(ex * ex + ey * ey) - hw
    return margin.min(axis=1)


def gnss_log_weights(offsets, measured, segments, softness):
    """Summed map-matching log-likelihood per offset hypothesis.

    For hypothesis m, sums over measurements k the log-likelihood of the
    corrected position measured[k] - offsets[m] against the corridor map:
    0 inside a corridor, -d^2/(2*softness^2) at boundary distance d outside.
    softness == 0 gives the hard constraint (0 or -inf).

    offsets: (M, 2); measured: (K, 2). Returns (M,) float64.
    """
    m = offsets.shape[0]
    k = measured.shape[0]
    corrected = (measured[None, :, :] - offsets[:, None, :]).reshape(m * k, 2)
    d = np.maximum(corridor_margins(corrected, segments), 0.0).reshape(m, k)
    if softness == 0.0:
        logw = np.where(d > 0.0, -np.inf, 0.0)
    else:
        logw = -(d * d) / (2.0 * softness * softness)
    return logw.sum(axis=1)


def systematic_indices(weights, count, u0):
    """Systematic-resampling source indices.

    One uniform draw u0 in [0,1) places `count` evenly spaced pointers on the
    cumulative weight axis; particle j is copied once per pointer landing in
    its weight span, so copy counts differ from count*w_j by less than 1.

    weights: (n,) nonnegative, sum > 0. Returns (count,) int64.
    """
    cum = np.cumsum(weights)
    positions = (u0 + np.arange(count)) / count * cum[-1]
    idx = np.searchsorted(cum, positions, side="right")
    return np.minimum(idx, len(weights) - 1).astype(np.int64)


def _project_capped_simplex(v, total):
    """Euclidean projection of v onto {w >= 0, sum w = total}."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - total
    j = np.arange(1, len(v) + 1)
    rho = np.nonzero(u - css / j > 0.0)[0][-1]
    tau = css[rho] / (rho + 1.0)
    return np.maximum(v - tau, 0.0)


def project_rows_to_weights(a, support, floor):
    """Project each row of `a` onto its feasible fusion-weight set.

    Feasible row i: zero outside support[i], entries in [0,1], sum 1, and
    self-weight a[i,i] >= floor. Solved as a shifted simplex projection
    (the diagonal coordinate is re-based at `floor`); the [0,1] box is then
    automatic because nonnegative entries summing to <= 1 cannot exceed 1.
    """
    n = a.shape[0]
    out = np.zeros_like(a)
    for i in range(n):
        cols = np.nonzero(support[i])[0]
        v = a[i, cols].copy()
        self_pos = int(np.nonzero(cols == i)[0][0])
        if len(cols) == 1:
            out[i, i] = 1.0
            continue
        v[self_pos] -= floor
        w = _project_capped_simplex(v, 1.0 - floor)
        w[self_pos] += floor
        out[i, cols] = w
    return out


def minimize_output_spread(x, support, floor, a0, max_iter, tol):
    """Projected-gradient minimizer of the fused-output spread.

    Minimizes (1/N) * sum_axes ||A x - mean(A x)||^2 over row-feasible A
    (see project_rows_to_weights). Fixed step 1/L with L the quadratic's
    Lipschitz constant, so descent is monotone; stops when the objective
    improves by less than `tol` or after `max_iter` steps.

    x: (N, A) current estimates; a0: (N, N) feasible start.
    Returns (A, objective, iterations).
    """
    n = x.shape[0]
    gram = x.T @ x
    lam = float(np.linalg.eigvalsh(gram)[-1])
    if lam <= 0.0:
        return a0.copy(), 0.0, 0
    step = n / (2.0 * lam)
    a = a0.copy()
    y = a @ x
    yc = y - y.mean(axis=0)
    obj = float((yc * yc).sum()) / n
    it = 0
    for it in range(1, max_iter + 1):
        grad = (2.0 / n) * (yc @ x.T)
        a = project_rows_to_weights(a - step * grad, support, floor)
        y = a @ x
        yc = y - y.mean(axis=0)
        new_obj = float((yc * yc).sum()) / n
        if obj - new_obj < tol:
            obj = min(obj, new_obj)
            break
        obj = new_obj
    return a, obj, it
