"""Vertical/horizontal decomposition of the lattice walk.

The lattice walk is rebuilt from a simple random walk ``Y`` on ``Z``
(its vertical moves) and, at the ``i``-th visit of level ``y``, a
geometric number ``xi_i^(y)`` (mean 1/2) of horizontal moves in the
direction ``eps_y``.  With local times ``eta_n(y) = #{k <= n: Y_k = y}``:

    X_n = sum_y eps_y sum_{i <= eta_{n-1}(y)} xi_i^(y)
    T_n = n + sum_y sum_{i <= eta_{n-1}(y)} xi_i^(y)

and the full walk satisfies ``M_{T_n} = (X_n, Y_n)``.

Jumps are counter-based in ``(jump_seed, y, i)`` so that :func:`embed`
and :func:`reconstruct_full_walk` agree without storing a jump table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import rng as crng
from .dynsys import OrientationField
from .lattice import HORIZONTAL, UP, DOWN, WalkPath, Vertex

__all__ = [
    "MEAN_JUMP",
    "JUMP_RATIO",
    "IntegrityError",
    "VerticalPath",
    "LocalTimeProfile",
    "EmbeddedDecomposition",
    "vertical_walk",
    "local_times",
    "visit_indices",
    "geometric_jump",
    "jumps_from_uniform",
    "counter_jumps",
    "constant_jumps",
    "table_jumps",
    "embed",
    "reconstruct_full_walk",
    "level_jump_sums",
]

MEAN_JUMP = 0.5
# P(xi = k) = (1 - q) q^k with q / (1 - q) = MEAN_JUMP
JUMP_RATIO = MEAN_JUMP / (1.0 + MEAN_JUMP)
_XI = crng.tag("xi")
_LOG_Q = math.log(JUMP_RATIO)

JumpFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


class IntegrityError(RuntimeError):
    """The orientation field disagrees with the one used for a decomposition."""


@dataclass
class VerticalPath:
    positions: np.ndarray  # Y_0 .. Y_n

    @property
    def n(self) -> int:
        return self.positions.size - 1

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.positions)


@dataclass
class LocalTimeProfile:
    """Visit counts ``eta(y)`` over the contiguous range ``lo..lo+len-1``."""

    lo: int
    counts: np.ndarray

    def __getitem__(self, y: int) -> int:
        i = int(y) - self.lo
        return int(self.counts[i]) if 0 <= i < self.counts.size else 0

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def levels(self) -> np.ndarray:
        return np.arange(self.lo, self.lo + self.counts.size)

    def max(self) -> int:
        return int(self.counts.max())


def vertical_walk(n: int, rng: np.random.Generator) -> VerticalPath:
    """Simple symmetric random walk ``Y_0 = 0, ..., Y_n``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    pos = np.zeros(n + 1, dtype=np.int64)
    if n:
        steps = 2 * rng.integers(0, 2, size=n, dtype=np.int8).astype(np.int64) - 1
        np.cumsum(steps, out=pos[1:])
    return VerticalPath(pos)


def local_times(path: VerticalPath | np.ndarray) -> LocalTimeProfile:
    ys = path.positions if isinstance(path, VerticalPath) else np.asarray(path)
    lo = int(ys.min())
    return LocalTimeProfile(lo, np.bincount(ys - lo))


def visit_indices(ys: np.ndarray) -> np.ndarray:
    """``i_k = #{j <= k: Y_j = Y_k}``: which visit of its level step ``k`` is."""
    ys = np.asarray(ys)
    order = np.argsort(ys, kind="stable")
    sorted_y = ys[order]
    starts = np.flatnonzero(np.r_[True, sorted_y[1:] != sorted_y[:-1]])
    group_start = np.repeat(starts, np.diff(np.r_[starts, ys.size]))
    idx = np.empty(ys.size, dtype=np.int64)
    idx[order] = np.arange(ys.size) - group_start + 1
    return idx


def jumps_from_uniform(u) -> np.ndarray:
    """Inverse-CDF map from uniforms on [0, 1) to the mean-1/2 geometric law."""
    u = np.asarray(u, dtype=np.float64)
    # P(xi >= k) = q^k; use 1 - u in (0, 1] to avoid log(0)
    return np.floor(np.log1p(-u) / _LOG_Q).astype(np.int64)


def geometric_jump(rng: np.random.Generator, size=None):
    """Draw ``xi`` with ``P(xi = k) = (2/3)(1/3)^k``, ``k >= 0``."""
    out = rng.geometric(1.0 - JUMP_RATIO, size=size) - 1
    return int(out) if size is None else out.astype(np.int64)


def counter_jumps(jump_seed: int) -> JumpFn:
    """Jump table ``(y, i) -> xi_i^(y)`` realised from a counter-based hash."""
    def jumps(levels, visits):
        return jumps_from_uniform(crng.uniform(jump_seed, _XI, levels, visits))
    return jumps


def constant_jumps(value: int = 0) -> JumpFn:
    """Test hook: every jump equals ``value``."""
    return lambda levels, visits: np.full(np.shape(levels), int(value), dtype=np.int64)


def table_jumps(table: dict[tuple[int, int], int]) -> JumpFn:
    """Test hook: jumps from an explicit ``{(y, i): xi}`` table (missing -> 0)."""
    def jumps(levels, visits):
        return np.array([table.get((int(y), int(i)), 0) for y, i in zip(levels, visits)],
                        dtype=np.int64)
    return jumps


@dataclass
class EmbeddedDecomposition:
    vertical: VerticalPath
    local_times: LocalTimeProfile
    eps_lo: int
    eps: np.ndarray          # eps on levels eps_lo .. ; as seen when embedding
    step_jumps: np.ndarray   # xi used before the k-th vertical move, k = 1..n
    X: np.ndarray            # X_0 .. X_n
    T: np.ndarray            # T_0 .. T_n
    jumps: JumpFn
    mean_jump: float = MEAN_JUMP

    @property
    def n(self) -> int:
        return self.vertical.n

    def eps_at(self, ys) -> np.ndarray:
        return self.eps[np.asarray(ys) - self.eps_lo]


def embed(path: VerticalPath, field: OrientationField, rng: np.random.Generator | None = None,
          jumps: JumpFn | None = None) -> EmbeddedDecomposition:
    """Realise jumps along ``path`` and compute ``X`` and ``T``.

    The ``k``-th vertical move leaves level ``Y_{k-1}`` on its ``i``-th visit
    and is preceded by ``xi_i^(Y_{k-1})`` horizontal moves.  ``jumps``
    overrides the counter-based jump table (test hook); otherwise its seed
    is drawn from ``rng``.
    """
    if jumps is None:
        if rng is None:
            raise ValueError("need rng or jumps")
        jumps = counter_jumps(crng.seed_from_rng(rng))
    ys = path.positions
    n = path.n
    lo, hi = int(ys.min()), int(ys.max())
    eps = field.window(lo, hi).copy()
    prev = ys[:-1]
    visits = visit_indices(prev)
    xi = np.asarray(jumps(prev, visits), dtype=np.int64).reshape(prev.shape)
    X = np.zeros(n + 1, dtype=np.int64)
    T = np.zeros(n + 1, dtype=np.int64)
    if n:
        np.cumsum(eps[prev - lo].astype(np.int64) * xi, out=X[1:])
        np.cumsum(xi + 1, out=T[1:])
    return EmbeddedDecomposition(path, local_times(path), lo, eps, xi, X, T, jumps)


def level_jump_sums(path: VerticalPath, upto: int, jumps: JumpFn) -> tuple[np.ndarray, np.ndarray]:
    """Per-level sums ``S(y) = sum_{i <= eta_{upto-1}(y)} xi_i^(y)``.

    Returns ``(levels, sums)``.  Follows the level/visit bookkeeping of the
    displayed formulas directly, without time ordering.
    """
    prof = local_times(path.positions[:upto]) if upto > 0 else LocalTimeProfile(0, np.zeros(0, np.int64))
    counts = prof.counts
    levels = np.repeat(prof.levels, counts)
    starts = np.repeat(np.cumsum(counts) - counts, counts)
    visits = np.arange(levels.size) - starts + 1
    sums = np.bincount(levels - prof.lo, weights=jumps(levels, visits), minlength=counts.size)
    return prof.levels, sums.astype(np.int64)


def reconstruct_full_walk(dec: EmbeddedDecomposition, field: OrientationField,
                          seed: int | None = None) -> WalkPath:
    """Rebuild the lattice trajectory from a decomposition.

    Before the ``k``-th vertical move, ``xi`` horizontal moves in direction
    ``eps_{Y_{k-1}}`` are inserted.  Raises :class:`IntegrityError` when
    ``field`` disagrees with the orientations used by ``dec``.
    """
    ys = dec.vertical.positions
    lo = dec.eps_lo
    live = field.window(lo, lo + dec.eps.size - 1)
    if not np.array_equal(live, dec.eps):
        bad = int(np.flatnonzero(live != dec.eps)[0]) + lo
        raise IntegrityError(f"orientation at level {bad} differs from the decomposition")
    incr = np.diff(ys)
    counts = dec.step_jumps
    # move codes: counts[k] horizontal moves, then the vertical move
    block = counts + 1
    total = int(block.sum())
    codes = np.full(total, HORIZONTAL, dtype=np.int8)
    vert_at = np.cumsum(block) - 1
    codes[vert_at] = np.where(incr > 0, UP, DOWN)
    level = np.repeat(ys[:-1], block)
    dx = (codes == HORIZONTAL) * live[level - lo].astype(np.int64)
    dy = np.where(codes == UP, 1, np.where(codes == DOWN, -1, 0))
    positions = np.zeros((total + 1, 2), dtype=np.int64)
    np.cumsum(dx, out=positions[1:, 0])
    np.cumsum(dy, out=positions[1:, 1])
    at_origin = (positions[1:, 0] == 0) & (positions[1:, 1] == 0)
    final = Vertex(int(positions[-1, 0]), int(positions[-1, 1]))
    return WalkPath(seed, total, int(at_origin.sum()), int(np.abs(positions[:, 1]).max()),
                    final, positions=positions, moves=codes)
