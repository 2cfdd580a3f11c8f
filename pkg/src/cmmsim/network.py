"""Vehicle placements and communication graphs.

Poses are parallel arrays (positions (N,2), road angles (N,)). Graphs are
boolean adjacency matrices, symmetric with a False diagonal; degree counts
neighbors excluding self. The connection matrix used for fusion adds the
diagonal back (every node hears itself) and may be directed when supplied
explicitly by a scenario.
"""

import math

import numpy as np


class VehicleNetwork:
    """Static vehicle poses plus an undirected communication graph."""

    def __init__(self, positions, angles, adjacency):
        positions = np.asarray(positions, dtype=float).reshape(-1, 2)
        angles = np.asarray(angles, dtype=float).reshape(-1)
        adjacency = np.asarray(adjacency, dtype=bool)
        n = positions.shape[0]
        if angles.shape[0] != n:
            raise ValueError("positions and angles disagree on vehicle count")
        if adjacency.shape != (n, n):
            raise ValueError("adjacency must be N x N")
        if adjacency.diagonal().any():
            raise ValueError("adjacency must not contain self-loops")
        if not np.array_equal(adjacency, adjacency.T):
            raise ValueError("adjacency must be symmetric")
        self.positions = positions
        self.angles = angles
        self.adjacency = adjacency
        for a in (self.positions, self.angles, self.adjacency):
            a.setflags(write=False)

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    def degrees(self) -> np.ndarray:
        return self.adjacency.sum(axis=1).astype(np.int64)

    def connection_matrix(self) -> np.ndarray:
        """Boolean receive-from matrix: adjacency plus the self diagonal."""
        return self.adjacency | np.eye(self.n, dtype=bool)

    def _bfs_hops(self, start: int) -> np.ndarray:
        hops = np.full(self.n, -1, dtype=np.int64)
        hops[start] = 0
        frontier = np.zeros(self.n, dtype=bool)
        frontier[start] = True
        level = 0
        while frontier.any():
            level += 1
            reached = self.adjacency[frontier].any(axis=0) & (hops < 0)
            hops[reached] = level
            frontier = reached
        return hops

    def is_connected(self) -> bool:
        if self.n == 0:
            raise ValueError("empty network")
        return bool((self._bfs_hops(0) >= 0).all())

    def diameter(self) -> float:
        """Largest shortest-path hop count; inf when disconnected."""
        worst = 0
        for start in range(self.n):
            hops = self._bfs_hops(start)
            if (hops < 0).any():
                return math.inf
            worst = max(worst, int(hops.max()))
        return worst

    def trim_by_degree(self, max_degree: int) -> "VehicleNetwork":
        """Drop every node whose degree here exceeds max_degree.

        Degrees are measured once on this network, not recomputed as nodes
        fall away; surviving ids are reindexed densely.
        """
        keep = self.degrees() <= max_degree
        return VehicleNetwork(
            self.positions[keep],
            self.angles[keep],
            self.adjacency[np.ix_(keep, keep)],
        )


def radius_graph(positions, angles, radius: float) -> VehicleNetwork:
    """Connect every pair of vehicles within `radius` (boundary inclusive)."""
    if not radius > 0:
        raise ValueError("radius must be positive")
    positions = np.asarray(positions, dtype=float).reshape(-1, 2)
    delta = positions[:, None, :] - positions[None, :, :]
    dist = np.sqrt((delta * delta).sum(axis=2))
    adjacency = dist <= radius
    np.fill_diagonal(adjacency, False)
    return VehicleNetwork(positions, angles, adjacency)


def sample_poses(roadmap, n: int, seed: int, spread: float):
    """Draw n vehicle poses on the map, deterministically per seed.

    A segment is chosen with probability proportional to its length, the
    position uniformly along it, then jittered laterally by at most
    min(spread, half_width) so every pose stays on the road. The road angle
    is the segment heading. Returns (positions (n,2), angles (n,)).
    """
    if n < 1:
        raise ValueError("need at least one pose")
    rng = np.random.default_rng(seed)
    lengths = np.array([s.length for s in roadmap.segments])
    seg_idx = rng.choice(len(lengths), size=n, p=lengths / lengths.sum())
    along = rng.random(n)
    lateral = rng.uniform(-1.0, 1.0, size=n)
    positions = np.empty((n, 2))
    angles = np.empty(n)
    for k, s in enumerate(seg_idx):
        seg = roadmap.segments[s]
        sx, sy = seg.start
        ex, ey = seg.end
        ux, uy = (ex - sx) / seg.length, (ey - sy) / seg.length
        off = lateral[k] * min(spread, seg.half_width)
        positions[k, 0] = sx + along[k] * (ex - sx) - uy * off
        positions[k, 1] = sy + along[k] * (ey - sy) + ux * off
        angles[k] = seg.heading
    return positions, angles
