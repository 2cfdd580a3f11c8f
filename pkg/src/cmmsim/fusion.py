"""Neighbor particle exchange.

One fusion round for node i: turn its fusion weight row into particle
counts, systematically subsample that many particles from each source's
snapshot, stack them, reweight the stack by map matching against the local
measurement group, and resample back to capacity. The linear surrogate of
this round (estimates evolving as a weighted average plus noise) is what
the weight optimizer reasons about.
"""

from typing import Mapping, NamedTuple

import numpy as np

from . import kernels
from .particle_filter import ParticleSet, resample, update


class FusionShortfall(NamedTuple):
    """A fusion round missing some source snapshots (packet loss)."""

    node: int
    missing: tuple


def counts_from_weights(row, capacity: int) -> np.ndarray:
    """Particle budget per source by largest-remainder rounding.

    row: (N,) nonnegative weights (normalized internally); returns (N,)
    int64 counts summing exactly to capacity. Remainder ties go to the
    smaller node id.
    """
    row = np.asarray(row, dtype=float)
    if capacity < 1:
        raise ValueError("capacity must be >= 1")
    if (row < 0).any() or row.sum() <= 0:
        raise ValueError("row must be nonnegative with positive sum")
    target = row / row.sum() * capacity
    counts = np.floor(target).astype(np.int64)
    leftover = capacity - int(counts.sum())
    if leftover:
        order = np.lexsort((np.arange(len(row)), -(target - counts)))
        counts[order[:leftover]] += 1
    return counts


def fuse(
    own: ParticleSet,
    neighbor_sets: Mapping[int, ParticleSet],
    row,
    node: int,
    rm,
    measured,
    softness: float,
    seed,
    events: list | None = None,
) -> ParticleSet:
    """One fusion round for `node`; returns its replacement particle set.

    neighbor_sets maps source id to that node's post-update snapshot
    (resampled, so uniform weights). Sources weighted in `row` but absent
    from neighbor_sets are dropped and the row renormalized over what
    arrived; the shortfall is appended to `events` when a list is given.
    An empty `measured` skips the reweighting step (no constraints).
    """
    row = np.asarray(row, dtype=float).copy()
    available = {node: own, **dict(neighbor_sets)}
    missing = tuple(int(j) for j in np.nonzero(row)[0] if int(j) not in available)
    if missing:
        row[list(missing)] = 0.0
        if row.sum() <= 0.0:
            row[node] = 1.0
        if events is not None:
            events.append(FusionShortfall(node, missing))

    counts = counts_from_weights(row, own.capacity)
    rng = np.random.default_rng(seed)
    parts = []
    for j in np.nonzero(counts)[0]:
        src = available[j]
        idx = kernels.systematic_indices(src.weights, int(counts[j]), rng.random())
        parts.append(src.offsets[idx])
    stacked = ParticleSet(
        np.concatenate(parts),
        np.full(own.capacity, 1.0 / own.capacity),
        own.capacity,
    )
    measured = np.atleast_2d(np.asarray(measured, dtype=float))
    if measured.size:
        stacked = update(stacked, measured, rm, softness)
    return resample(stacked, rng)


def linear_surrogate_step(estimates, a, noise_sigma: float, seed) -> np.ndarray:
    """Reduced model of one fusion round: x(t+1) = A x(t) + w, per axis.

    estimates: (N, 2); a: (N, N) row-stochastic fusion weights; w is
    i.i.d. Gaussian(0, noise_sigma) per entry.
    """
    estimates = np.asarray(estimates, dtype=float)
    out = np.asarray(a, dtype=float) @ estimates
    if noise_sigma > 0.0:
        rng = np.random.default_rng(seed)
        out = out + rng.normal(0.0, noise_sigma, size=out.shape)
    return out
