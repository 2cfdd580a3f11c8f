"""Synthetic road maps built from straight corridor segments.

A corridor is a centerline segment plus a half width. Map matching reduces
to a signed margin: distance from a point to the nearest centerline
(clamped to the segment extent) minus that segment's half width. A point is
on the road iff its margin is nonpositive for some segment.
"""

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels


@dataclass(frozen=True)
class RoadSegment:
    """Straight corridor: centerline start to end, half_width to each side."""

    start: tuple
    end: tuple
    half_width: float

    def __post_init__(self):
        if tuple(self.start) == tuple(self.end):
            raise ValueError("segment needs positive length")
        if not self.half_width > 0:
            raise ValueError("half_width must be positive")

    @property
    def length(self) -> float:
        return math.dist(self.start, self.end)

    @property
    def heading(self) -> float:
        """Undirected centerline heading in [0, pi)."""
        dx = self.end[0] - self.start[0]
        dy = self.end[1] - self.start[1]
        return math.atan2(dy, dx) % math.pi


class RoadMap:
    """Immutable collection of corridor segments."""

    def __init__(self, segments: Sequence[RoadSegment]):
        segments = tuple(segments)
        if not segments:
            raise ValueError("road map needs at least one segment")
        self.segments = segments
        self.array = np.array(
            [[*s.start, *s.end, s.half_width] for s in segments], dtype=float
        )
        self.array.setflags(write=False)

    def __len__(self):
        return len(self.segments)

    def margins(self, points) -> np.ndarray:
        """Signed corridor margin per point; <= 0 means on some road."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return kernels.corridor_margins(points, self.array)

    def point_on_road(self, p) -> bool:
        return bool(self.margins(p)[0] <= 0.0)

    def points_on_road(self, points) -> np.ndarray:
        return self.margins(points) <= 0.0

    def constraint_likelihood(self, p, softness: float) -> float:
        """Map-matching weight: 1 inside a corridor, Gaussian falloff
        with scale `softness` outside, hard 0/1 when softness is 0."""
        margin = float(self.margins(p)[0])
        if margin <= 0.0:
            return 1.0
        if softness == 0.0:
            return 0.0
        return math.exp(-margin * margin / (2.0 * softness * softness))

    def gnss_log_weights(self, offsets, measured, softness: float) -> np.ndarray:
        """Summed log constraint likelihoods of measured positions corrected
        by each hypothesized offset. offsets (M,2), measured (K,2) -> (M,)."""
        offsets = np.atleast_2d(np.asarray(offsets, dtype=float))
        measured = np.atleast_2d(np.asarray(measured, dtype=float))
        return kernels.gnss_log_weights(offsets, measured, self.array, softness)

    def road_angle_histogram(self, bins: int):
        """Length-weighted histogram of undirected headings over [0, pi)."""
        if bins < 1:
            raise ValueError("bins must be >= 1")
        headings = [s.heading for s in self.segments]
        lengths = [s.length for s in self.segments]
        return np.histogram(headings, bins=bins, range=(0.0, math.pi), weights=lengths)

    @classmethod
    def from_file(cls, path) -> "RoadMap":
        """Load segments from text rows `x1 y1 x2 y2 half_width`.

        Blank lines skipped; anything after '#' ignored.
        """
        segments = []
        with open(path) as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                fields = line.split()
                if len(fields) != 5:
                    raise ValueError(f"{path}:{lineno}: expected 5 fields, got {len(fields)}")
                x1, y1, x2, y2, hw = map(float, fields)
                segments.append(RoadSegment((x1, y1), (x2, y2), hw))
        return cls(segments)


def single_road(length: float = 1000.0, half_width: float = 2.0) -> RoadMap:
    """One horizontal corridor centered on the origin."""
    half = length / 2.0
    return RoadMap([RoadSegment((-half, 0.0), (half, 0.0), half_width)])


def cross_road(arm: float = 200.0, half_width: float = 2.0) -> RoadMap:
    """Two orthogonal corridors crossing at the origin."""
    return RoadMap(
        [
            RoadSegment((-arm, 0.0), (arm, 0.0), half_width),
            RoadSegment((0.0, -arm), (0.0, arm), half_width),
        ]
    )


def grid_map(
    streets: int = 8,
    spacing: float = 1000.0,
    half_width: float = 2.0,
    cross_streets: int | None = None,
) -> RoadMap:
    """Manhattan grid over a square extent: `streets` horizontal corridors
    and `cross_streets` vertical ones (same count when omitted).  An
    unbalanced count models an arterial-heavy district where one heading
    dominates the road stock."""
    if cross_streets is None:
        cross_streets = streets
    if streets < 2 or cross_streets < 2:
        raise ValueError("grid needs at least 2 streets per direction")
    extent = (streets - 1) * spacing
    segments = []
    for k in range(streets):
        c = k * spacing
        segments.append(RoadSegment((0.0, c), (extent, c), half_width))
    for k in range(cross_streets):
        c = k * extent / (cross_streets - 1)
        segments.append(RoadSegment((c, 0.0), (c, extent), half_width))
    return RoadMap(segments)
