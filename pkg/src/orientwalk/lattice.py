"""Simple random walk on a dynamically oriented lattice.

From ``(x, y)`` the walk moves with probability 1/3 each to ``(x, y+1)``,
``(x, y-1)`` or ``(x + eps_y, y)``.  Moves are encoded as

* ``0`` -- up, ``1`` -- down, ``2`` -- horizontal along ``eps_y``.

The vertical coordinate never depends on the orientations, so a path is
simulated chunk-wise: draw the move codes, cumulate the vertical
increments, look up ``eps`` on the visited levels and cumulate the
horizontal increments.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import NamedTuple

import numpy as np

from .dynsys import OrientationField

__all__ = [
    "Vertex",
    "WalkPath",
    "neighbors",
    "step",
    "run_walk",
    "validate_path",
    "horizontal_run_lengths",
    "vertical_increments",
    "FULL_PATH_LIMIT",
]

UP, DOWN, HORIZONTAL = 0, 1, 2
FULL_PATH_LIMIT = 100_000
_CHUNK = 1 << 18


class Vertex(NamedTuple):
    x: int
    y: int


@dataclass
class WalkPath:
    """Trajectory of ``M`` started at the origin.

    ``positions`` (shape ``(n+1, 2)``) is kept only for walks of at most
    :data:`FULL_PATH_LIMIT` steps unless requested; ``checkpoints`` maps a
    step index to ``M_k``.
    """

    seed: int | None
    n: int
    returns_to_origin: int
    max_abs_y: int
    final_position: Vertex
    checkpoints: dict[int, Vertex] = dc_field(default_factory=dict)
    returns_at: dict[int, int] = dc_field(default_factory=dict)
    max_abs_y_at: dict[int, int] = dc_field(default_factory=dict)
    positions: np.ndarray | None = None
    moves: np.ndarray | None = None

    def summary(self) -> dict:
        return {
            "n": self.n,
            "returns": self.returns_to_origin,
            "final_x": int(self.final_position.x),
            "final_y": int(self.final_position.y),
            "max_abs_y": self.max_abs_y,
        }


def neighbors(v, field: OrientationField) -> tuple[Vertex, Vertex, Vertex]:
    x, y = int(v[0]), int(v[1])
    return Vertex(x, y + 1), Vertex(x, y - 1), Vertex(x + field[y], y)


def step(v, field: OrientationField, rng: np.random.Generator) -> Vertex:
    """One transition of ``M``: a uniform choice among the three out-edges."""
    return neighbors(v, field)[int(rng.integers(0, 3))]


def _simulate_chunk(codes: np.ndarray, x0: int, y0: int, field: OrientationField):
    dy = (codes == UP).astype(np.int64) - (codes == DOWN)
    ys = y0 + np.cumsum(dy)
    prev = np.empty_like(ys)
    prev[0] = y0
    prev[1:] = ys[:-1]
    lo, hi = int(prev.min()), int(prev.max())
    eps = field.window(lo, hi)[prev - lo]
    xs = x0 + np.cumsum((codes == HORIZONTAL) * eps.astype(np.int64))
    return xs, ys


def run_walk(n: int, field: OrientationField, rng: np.random.Generator,
             checkpoints=(), keep_path: bool | None = None,
             seed: int | None = None) -> WalkPath:
    """Simulate ``n`` steps of ``M`` from ``(0, 0)``.

    Returns to the origin are counted at every step ``k >= 1``; the running
    count is also recorded at each checkpoint in ``returns_at``.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    if keep_path is None:
        keep_path = n <= FULL_PATH_LIMIT
    cps = sorted({int(c) for c in checkpoints if 0 <= int(c) <= n})
    cp_pos: dict[int, Vertex] = {}
    cp_ret: dict[int, int] = {}
    cp_max: dict[int, int] = {}
    if cps and cps[0] == 0:
        cp_pos[0], cp_ret[0], cp_max[0] = Vertex(0, 0), 0, 0
    path_x, path_y, path_c = [], [], []
    x = y = 0
    returns = 0
    max_abs_y = 0
    done = 0
    while done < n:
        m = min(_CHUNK, n - done)
        codes = rng.integers(0, 3, size=m, dtype=np.int8)
        xs, ys = _simulate_chunk(codes, x, y, field)
        at_origin = (xs == 0) & (ys == 0)
        running = returns + np.cumsum(at_origin)
        running_max = np.maximum(max_abs_y, np.maximum.accumulate(np.abs(ys)))
        for c in cps:
            if done < c <= done + m:
                k = c - done - 1
                cp_pos[c] = Vertex(int(xs[k]), int(ys[k]))
                cp_ret[c] = int(running[k])
                cp_max[c] = int(running_max[k])
        returns = int(running[-1])
        max_abs_y = int(running_max[-1])
        if keep_path:
            path_x.append(xs)
            path_y.append(ys)
            path_c.append(codes)
        x, y = int(xs[-1]), int(ys[-1])
        done += m
    positions = moves = None
    if keep_path:
        positions = np.zeros((n + 1, 2), dtype=np.int64)
        positions[1:, 0] = np.concatenate(path_x)
        positions[1:, 1] = np.concatenate(path_y)
        moves = np.concatenate(path_c)
    return WalkPath(seed, n, returns, max_abs_y, Vertex(x, y), cp_pos, cp_ret, cp_max,
                    positions, moves)


def validate_path(positions: np.ndarray, field: OrientationField) -> bool:
    """Check every transition is an out-edge of the oriented lattice."""
    positions = np.asarray(positions)
    d = np.diff(positions, axis=0)
    prev_y = positions[:-1, 1]
    vertical = (d[:, 0] == 0) & (np.abs(d[:, 1]) == 1)
    if prev_y.size == 0:
        return True
    lo = int(prev_y.min())
    eps = field.window(lo, int(prev_y.max()))[prev_y - lo]
    horizontal = (d[:, 1] == 0) & (d[:, 0] == eps)
    return bool(np.all(vertical | horizontal))


def horizontal_run_lengths(moves: np.ndarray) -> np.ndarray:
    """Number of horizontal moves preceding each vertical move."""
    vert = np.flatnonzero(np.asarray(moves) != HORIZONTAL)
    return np.diff(np.concatenate(([-1], vert))) - 1


def vertical_increments(moves: np.ndarray) -> np.ndarray:
    """The +/-1 increments of the vertical projection at its vertical moves."""
    moves = np.asarray(moves)
    v = moves[moves != HORIZONTAL]
    return np.where(v == UP, 1, -1)
