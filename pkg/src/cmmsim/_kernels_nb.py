"""Numba-compiled implementations of the hot numeric kernels.

Same contracts as _kernels_np.py. The likelihood loop short-circuits as soon
as a corrected position is found inside a corridor, which the vectorized
backend cannot do; results agree to float round-off.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _point_margin(px, py, segments, lazy):
    # lazy mode may return any nonpositive value once the point is known
    # to be inside a corridor; exact mode scans for the true minimum.
    best = np.inf
    for s in range(segments.shape[0]):
        x1 = segments[s, 0]
        y1 = segments[s, 1]
        dx = segments[s, 2] - x1
        dy = segments[s, 3] - y1
        t = ((px - x1) * dx + (py - y1) * dy) / (dx * dx + dy * dy)
        if t < 0.0:
            t = 0.0
        elif t > 1.0:
            t = 1.0
        ex = px - (x1 + t * dx)
        ey = py - (y1 + t * dy)
        m = np.sqrt(ex * ex + ey * ey) - segments[s, 4]
        if m < best:
            best = m
            if lazy and best <= 0.0:
                break
    return best


@njit(cache=True)
def corridor_margins(points, segments):
    out = np.empty(points.shape[0])
    for p in range(points.shape[0]):
        out[p] = _point_margin(points[p, 0], points[p, 1], segments, False)
    return out


@njit(cache=True)
def gnss_log_weights(offsets, measured, segments, softness):
    m = offsets.shape[0]
    k = measured.shape[0]
    out = np.zeros(m)
    hard = softness == 0.0
    inv_two_sq = 0.0 if hard else 1.0 / (2.0 * softness * softness)
    for i in range(m):
        acc = 0.0
        for j in range(k):
            margin = _point_margin(
                measured[j, 0] - offsets[i, 0],
                measured[j, 1] - offsets[i, 1],
                segments,
                True,
            )
            if margin > 0.0:
                if hard:
                    acc = -np.inf
                    break
                acc -= margin * margin * inv_two_sq
        out[i] = acc
    return out


@njit(cache=True)
def systematic_indices(weights, count, u0):
    n = weights.shape[0]
    total = 0.0
    for j in range(n):
        total += weights[j]
    out = np.empty(count, dtype=np.int64)
    j = 0
    cum = weights[0]
    for i in range(count):
        pos = (u0 + i) / count * total
        while pos >= cum and j < n - 1:
            j += 1
            cum += weights[j]
        out[i] = j
    return out


@njit(cache=True)
def _project_row(v, total):
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - total
    rho = 0
    for j in range(u.shape[0]):
        if u[j] - css[j] / (j + 1.0) > 0.0:
            rho = j
    tau = css[rho] / (rho + 1.0)
    return np.maximum(v - tau, 0.0)


@njit(cache=True)
def project_rows_to_weights(a, support, floor):
    n = a.shape[0]
    out = np.zeros_like(a)
    for i in range(n):
        cols = np.nonzero(support[i])[0]
        if cols.shape[0] == 1:
            out[i, i] = 1.0
            continue
        v = np.empty(cols.shape[0])
        self_pos = 0
        for c in range(cols.shape[0]):
            v[c] = a[i, cols[c]]
            if cols[c] == i:
                self_pos = c
        v[self_pos] -= floor
        w = _project_row(v, 1.0 - floor)
        w[self_pos] += floor
        for c in range(cols.shape[0]):
            out[i, cols[c]] = w[c]
    return out


@njit(cache=True)
def minimize_output_spread(x, support, floor, a0, max_iter, tol):
    n = x.shape[0]
    gram = x.T @ x
    lam = float(np.linalg.eigvalsh(gram)[-1])
    if lam <= 0.0:
        return a0.copy(), 0.0, 0
    step = n / (2.0 * lam)
    a = a0.copy()
    y = a @ x
    ym = np.sum(y, axis=0) / n
    yc = y - ym
    obj = float(np.sum(yc * yc)) / n
    it = 0
    for it in range(1, max_iter + 1):
        grad = (2.0 / n) * (yc @ x.T)
        a = project_rows_to_weights(a - step * grad, support, floor)
        y = a @ x
        ym = np.sum(y, axis=0) / n
        yc = y - ym
        new_obj = float(np.sum(yc * yc)) / n
        if obj - new_obj < tol:
            obj = min(obj, new_obj)
            break
        obj = new_obj
    return a, obj, it
