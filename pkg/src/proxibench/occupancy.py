"""Bird's-eye-view occupancy grids and navigation paths.

The scene's 3D boxes are flattened onto the ground plane. Cells whose center
falls inside any box footprint are obstacles; the interior of the convex hull
of all footprint corners is the navigable area; everything else is out of
bounds. Paths run on cell centers with 8-connected moves, a per-turn cost,
and the no-corner-cutting rule for diagonals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .errors import (
    DegenerateHull,
    EmptyScene,
    GoalOutOfBounds,
    NoPath,
    StartOutOfBounds,
)
from .geometry import (
    Box3D,
    Direction8,
    ForwardAxis,
    RigidTransform,
    Vec3,
    bev_signed_angle_of_vector,
    discretize_direction,
)

FREE = kernels.FREE
OBSTACLE = kernels.OBSTACLE
OUT_OF_BOUNDS = kernels.OUT_OF_BOUNDS

_LABEL_CHARS = {FREE: ".", OBSTACLE: "#", OUT_OF_BOUNDS: "~"}
_CHAR_LABELS = {v: k for k, v in _LABEL_CHARS.items()}


def convex_hull_ccw(points: Sequence[tuple[float, float]]) -> list[tuple[float, float]]:
    """Convex hull (monotone chain), counterclockwise, collinear points dropped."""
    pts = sorted(set((float(x), float(y)) for x, y in points))
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list[tuple[float, float]] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[tuple[float, float]] = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


class OccupancyGrid:
    """Labeled grid over the ground plane.

    ``labels[r, c]`` covers the square whose center is
    ``(origin_x + (c + 0.5) * resolution, origin_y + (r + 0.5) * resolution)``;
    row 0 is the smallest-y row.
    """

    __slots__ = ("origin_x", "origin_y", "resolution", "labels", "hull")

    def __init__(self, origin_x, origin_y, resolution, labels, hull=()):
        self.origin_x = float(origin_x)
        self.origin_y = float(origin_y)
        self.resolution = float(resolution)
        self.labels = np.ascontiguousarray(labels, dtype=np.uint8)
        self.hull = tuple(hull)

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape  # type: ignore[return-value]

    def cell_center(self, row: int, col: int) -> tuple[float, float]:
        return (
            self.origin_x + (col + 0.5) * self.resolution,
            self.origin_y + (row + 0.5) * self.resolution,
        )

    def try_world_to_cell(self, x: float, y: float) -> Optional[tuple[int, int]]:
        """Cell containing a world point, or None outside the grid extent."""
        col = int(math.floor((x - self.origin_x) / self.resolution))
        row = int(math.floor((y - self.origin_y) / self.resolution))
        h, w = self.labels.shape
        if 0 <= row < h and 0 <= col < w:
            return row, col
        return None

    def free_cells(self) -> np.ndarray:
        """(N, 2) row/col indices of free cells, row-major order."""
        return np.argwhere(self.labels == FREE)

    def to_text(self) -> str:
        """Round-trippable debug rendering ('.' free, '#' obstacle, '~' out)."""
        header = "origin {!r} {!r} resolution {!r}".format(
            self.origin_x, self.origin_y, self.resolution
        )
        rows = [
            "".join(_LABEL_CHARS[int(v)] for v in row) for row in self.labels
        ]
        return "\n".join([header] + rows) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "OccupancyGrid":
        lines = [ln for ln in text.splitlines() if ln]
        parts = lines[0].split()
        if parts[0] != "origin" or parts[3] != "resolution":
            raise ValueError("bad occupancy header: {!r}".format(lines[0]))
        labels = np.array(
            [[_CHAR_LABELS[ch] for ch in ln] for ln in lines[1:]], dtype=np.uint8
        )
        return cls(float(parts[1]), float(parts[2]), float(parts[4]), labels)


def build_occupancy(
    boxes: Sequence[Box3D], resolution: float, margin_cells: int = 1
) -> OccupancyGrid:
    """Rasterize box footprints into an occupancy grid.

    Raises EmptyScene when no boxes are given and DegenerateHull when the
    footprint corners do not span a 2D region.
    """
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    if not boxes:
        raise EmptyScene("occupancy grid needs at least one box")

    corners: list[tuple[float, float]] = []
    for b in boxes:
        corners.extend(
            [
                (b.min_corner.x, b.min_corner.y),
                (b.max_corner.x, b.min_corner.y),
                (b.max_corner.x, b.max_corner.y),
                (b.min_corner.x, b.max_corner.y),
            ]
        )
    hull = convex_hull_ccw(corners)
    if len(hull) < 3:
        raise DegenerateHull("footprint corners are collinear")
    area2 = sum(
        hull[i][0] * hull[(i + 1) % len(hull)][1]
        - hull[(i + 1) % len(hull)][0] * hull[i][1]
        for i in range(len(hull))
    )
    if area2 <= 0:
        raise DegenerateHull("footprint hull has no area")

    min_x = min(p[0] for p in hull)
    max_x = max(p[0] for p in hull)
    min_y = min(p[1] for p in hull)
    max_y = max(p[1] for p in hull)
    w = int(math.ceil((max_x - min_x) / resolution)) + 2 * margin_cells
    h = int(math.ceil((max_y - min_y) / resolution)) + 2 * margin_cells
    origin_x = min_x - margin_cells * resolution
    origin_y = min_y - margin_cells * resolution

    xs = origin_x + (np.arange(w) + 0.5) * resolution
    ys = origin_y + (np.arange(h) + 0.5) * resolution
    inside = kernels.convex_polygon_mask(xs, ys, np.asarray(hull, dtype=np.float64))

    labels = np.full((h, w), OUT_OF_BOUNDS, dtype=np.uint8)
    labels[inside.astype(bool)] = FREE
    for b in boxes:
        col_in = (xs >= b.min_corner.x) & (xs <= b.max_corner.x)
        row_in = (ys >= b.min_corner.y) & (ys <= b.max_corner.y)
        labels[np.ix_(row_in, col_in)] = OBSTACLE

    return OccupancyGrid(origin_x, origin_y, resolution, labels, hull)


@dataclass(frozen=True)
class PathStep:
    """One merged leg of a path: a heading and how far to walk along it."""

    direction: Direction8
    distance: float


@dataclass(frozen=True)
class NavPath:
    """A* result on an occupancy grid.

    Costs are in cell units; ``distance_m`` converts the walked length (turn
    cost excluded) to meters using the grid resolution.
    """

    cells: np.ndarray
    waypoints: tuple[tuple[float, float], ...]
    ncard: int
    ndiag: int
    nturns: int
    turn_penalty: float
    resolution: float
    snapped_start: bool
    snapped_goal: bool

    @property
    def cost(self) -> float:
        return self.ncard + self.ndiag * kernels.SQRT2 + self.nturns * self.turn_penalty

    @property
    def distance_m(self) -> float:
        return (self.ncard + self.ndiag * kernels.SQRT2) * self.resolution


def _snap_to_free(grid: OccupancyGrid, row: int, col: int) -> tuple[int, int, bool]:
    if grid.labels[row, col] == FREE:
        return row, col, False
    free = grid.free_cells()
    if free.size == 0:
        raise NoPath("grid has no free cells")
    d2 = (free[:, 0] - row) ** 2 + (free[:, 1] - col) ** 2
    best = int(np.argmin(d2))  # first minimum = row-major tie-break
    return int(free[best, 0]), int(free[best, 1]), True


def find_path(
    grid: OccupancyGrid,
    start_xy: tuple[float, float],
    goal_xy: tuple[float, float],
    turn_penalty: float = 0.1,
) -> NavPath:
    """Cheapest 8-connected path between two world points.

    Points landing on obstacle or out-of-bounds cells are snapped to the
    nearest free cell (Euclidean on cell indices, row-major on ties); points
    outside the grid extent raise StartOutOfBounds / GoalOutOfBounds.
    """
    start = grid.try_world_to_cell(*start_xy)
    if start is None:
        raise StartOutOfBounds("start {} outside grid extent".format(start_xy))
    goal = grid.try_world_to_cell(*goal_xy)
    if goal is None:
        raise GoalOutOfBounds("goal {} outside grid extent".format(goal_xy))

    sr, sc, snapped_s = _snap_to_free(grid, *start)
    gr, gc, snapped_g = _snap_to_free(grid, *goal)
    result = kernels.astar_search(grid.labels, sr, sc, gr, gc, float(turn_penalty))
    if result is None:
        raise NoPath(
            "no path from cell ({}, {}) to ({}, {})".format(sr, sc, gr, gc)
        )
    cells, ncard, ndiag, nturns = result
    waypoints = tuple(grid.cell_center(int(r), int(c)) for r, c in cells)
    return NavPath(
        cells=cells,
        waypoints=waypoints,
        ncard=ncard,
        ndiag=ndiag,
        nturns=nturns,
        turn_penalty=float(turn_penalty),
        resolution=grid.resolution,
        snapped_start=snapped_s,
        snapped_goal=snapped_g,
    )


def path_to_steps(
    path: NavPath,
    pose: RigidTransform,
    forward: ForwardAxis = ForwardAxis.PLUS_Z,
) -> list[PathStep]:
    """Turn waypoints into walking instructions relative to a wearer pose.

    Each move is labeled with the wearer-relative compass direction of its
    displacement; consecutive moves with the same label merge into one step
    with their distances summed.
    """
    steps: list[PathStep] = []
    for (x0, y0), (x1, y1) in zip(path.waypoints, path.waypoints[1:]):
        disp = Vec3(x1 - x0, y1 - y0, 0.0)
        angle = bev_signed_angle_of_vector(pose, disp, forward)
        direction = discretize_direction(angle)
        dist = math.hypot(x1 - x0, y1 - y0)
        if steps and steps[-1].direction is direction:
            steps[-1] = PathStep(direction, steps[-1].distance + dist)
        else:
            steps.append(PathStep(direction, dist))
    return steps
