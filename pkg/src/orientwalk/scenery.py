"""Random walk in random scenery and the Kesten-Spitzer limit process.

``Z_n = sum_{k=0}^{n} eps_{Y_k}`` for the vertical walk ``Y``.  Its
scaling limit ``n^{-3/4} Z_[nt]`` is

    Delta_t = int_0^inf L_t(x) dZ_+(x) + int_0^inf L_t(-x) dZ_-(x)

with ``L_t`` the local time of a Brownian motion ``B`` and ``Z_+, Z_-``
independent Brownian motions.  :func:`simulate_delta` discretises this
directly (Euler path for ``B``, occupation histogram for ``L_t``, Gaussian
white-noise cells for ``dZ_+-``) and shares no code with the lattice
simulation, so the two can be compared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng as crng
from .dynsys import OrientationField, make_system
from .embedding import MEAN_JUMP, VerticalPath, vertical_walk
from .lattice import run_walk

__all__ = [
    "FLT_CONSTANT",
    "DELTA_VAR_1",
    "SceneryPath",
    "DeltaSample",
    "scenery_walk",
    "simulate_delta",
    "delta_samples",
    "delta_conditional_variance",
    "local_time_grid",
    "normalized_endpoint",
]

FLT_CONSTANT = MEAN_JUMP / (1.0 + MEAN_JUMP) ** 0.75
# Var(Delta_1) = E int L_1(x)^2 dx
DELTA_VAR_1 = 8.0 / (3.0 * math.sqrt(2.0 * math.pi))

DEFAULT_DT = 1e-5
DEFAULT_H = 0.01


@dataclass
class SceneryPath:
    Z: np.ndarray  # Z_0 .. Z_n

    @property
    def n(self) -> int:
        return self.Z.size - 1


@dataclass(frozen=True)
class DeltaSample:
    t: float
    value: float
    h: float
    dt: float


def scenery_walk(field: OrientationField, path: VerticalPath | np.ndarray,
                 n: int | None = None) -> SceneryPath:
    """Partial sums of the scenery along ``path`` up to step ``n``."""
    ys = path.positions if isinstance(path, VerticalPath) else np.asarray(path)
    if n is not None:
        ys = ys[: n + 1]
    lo = int(ys.min())
    eps = field.window(lo, int(ys.max()))
    return SceneryPath(np.cumsum(eps[ys - lo].astype(np.int64)))


def _check_delta_config(t: float, dt: float, h: float, x_max: float | None) -> float:
    if t < 0:
        raise ValueError("t must be >= 0")
    if x_max is None:
        x_max = 5.0 * math.sqrt(t)
    if t > 0:
        if dt > 1e-4 * t:
            raise ValueError(f"time step too coarse: dt={dt} > 1e-4*t")
        if h > 0.05:
            raise ValueError(f"space step too coarse: h={h} > 0.05")
        if x_max < 4.0 * math.sqrt(t):
            raise ValueError(f"grid too narrow: x_max={x_max} < 4*sqrt(t)")
    return x_max


def local_time_grid(increments: np.ndarray, dt: float, h: float) -> tuple[int, np.ndarray]:
    """Occupation-density estimate of ``L_t`` on cells ``[j h, (j+1) h)``.

    ``increments`` has shape ``(..., N)``; the path starts at 0 and each of
    the left endpoints ``B_0 .. B_{N-1}`` carries ``dt`` of occupation (the
    last increment only fixes ``B_N``).  Returns ``(j_lo, L)`` with
    ``L[..., j]`` the estimate on cell ``j_lo + j``.  The grid always covers
    the path, so ``sum(L) * h == N * dt``.
    """
    increments = np.asarray(increments, dtype=np.float64)
    lead = increments.shape[:-1]
    rows = int(np.prod(lead, dtype=np.int64))
    steps = increments.shape[-1]
    b = np.zeros((rows, steps))
    np.cumsum(increments.reshape(rows, steps)[:, :-1], axis=1, out=b[:, 1:])
    cells = np.floor(b * (1.0 / h)).astype(np.int64)
    j_lo = int(cells.min())
    width = int(cells.max()) - j_lo + 1
    cells -= j_lo
    cells += np.arange(rows)[:, None] * width
    counts = np.bincount(cells.ravel(), minlength=rows * width).reshape(*lead, width)
    return j_lo, counts * (dt / h)


def _check_steps(t: float, dt: float | None) -> tuple[float, int]:
    if dt is None:
        dt = DEFAULT_DT * t
    return dt, max(1, int(round(t / dt)))


def delta_samples(t: float, size: int, rng: np.random.Generator, dt: float | None = None,
                  h: float = DEFAULT_H, x_max: float | None = None,
                  batch: int | None = None) -> np.ndarray:
    """``size`` independent draws of the discretised ``Delta_t``.

    ``dt`` defaults to ``1e-5 * t``.  Each draw simulates ``B`` on ``[0, t]``,
    estimates ``L_t`` on the ``h``-grid and integrates it against
    independent ``N(0, h)`` cell increments of ``Z_+`` / ``Z_-``.
    """
    if t == 0:
        _check_delta_config(t, 0.0, h, x_max)
        return np.zeros(size)
    dt, steps = _check_steps(t, dt)
    _check_delta_config(t, dt, h, x_max)
    if batch is None:
        batch = max(1, min(size, (1 << 22) // steps))
    out = np.empty(size)
    sd = math.sqrt(dt)
    done = 0
    while done < size:
        m = min(batch, size - done)
        incr = rng.standard_normal((m, steps)) * sd
        _, L = local_time_grid(incr, dt, h)
        noise = rng.standard_normal(L.shape) * math.sqrt(h)
        out[done:done + m] = (L * noise).sum(axis=1)
        done += m
    return out


def delta_conditional_variance(t: float, size: int, rng: np.random.Generator,
                               resolutions=((None, DEFAULT_H),), batch: int | None = None) -> np.ndarray:
    """``Var(Delta_t | B) = sum_j L_t(x_j)^2 h`` at several resolutions on common paths.

    ``resolutions`` lists ``(dt, h)`` pairs; all ``dt`` must divide the
    finest one's path (the finest ``dt`` is simulated and coarser paths are
    obtained by summing consecutive increments).  Returns shape
    ``(len(resolutions), size)``; the mean over samples estimates
    ``Var(Delta_t)``.
    """
    res = [(_check_steps(t, dt)[0], h) for dt, h in resolutions]
    for dt, h in res:
        _check_delta_config(t, dt, h, None)
    fine = min(dt for dt, _ in res)
    _, steps = _check_steps(t, fine)
    factors = []
    for dt, _ in res:
        k = int(round(dt / fine))
        if abs(k * fine - dt) > 1e-12 * dt or steps % k:
            raise ValueError("time steps must be integer multiples of the finest one")
        factors.append(k)
    if batch is None:
        batch = max(1, min(size, (1 << 22) // steps))
    out = np.empty((len(res), size))
    done = 0
    while done < size:
        m = min(batch, size - done)
        incr = rng.standard_normal((m, steps)) * math.sqrt(fine)
        for r, ((dt, h), k) in enumerate(zip(res, factors)):
            coarse = incr.reshape(m, steps // k, k).sum(axis=2) if k > 1 else incr
            _, L = local_time_grid(coarse, dt, h)
            out[r, done:done + m] = (L * L).sum(axis=1) * h
        done += m
    return out


def simulate_delta(t: float, dt: float | None = None, h: float = DEFAULT_H,
                   x_max: float | None = None,
                   rng: np.random.Generator | None = None) -> DeltaSample:
    """One draw of the discretised Kesten-Spitzer process at time ``t``."""
    if rng is None:
        rng = np.random.default_rng()
    value = float(delta_samples(t, 1, rng, dt, h, x_max)[0])
    return DeltaSample(t, value, h, DEFAULT_DT * t if dt is None else dt)


def normalized_endpoint(n: int, mode: str, seed: int, system: str = "bernoulli",
                        f: str | None = None) -> float:
    """One replica of the normalised endpoint at step ``n``.

    ``mode`` selects

    * ``"scenery"``: ``Z_n / n^{3/4}`` (limit ``Delta_1``);
    * ``"horizontal"``: ``M^{(1)}_n / n^{3/4}``, the lattice walk's first
      coordinate after ``n`` steps (limit ``FLT_CONSTANT * Delta_1``);
    * ``"embedded"``: ``X_n / n^{3/4}`` after ``n`` vertical moves
      (limit ``MEAN_JUMP * Delta_1``).

    The orientations are an annealed field of ``system`` keyed by ``seed``.
    """
    from .embedding import counter_jumps, level_jump_sums

    if n < 2**14:
        raise ValueError("n must be >= 2**14")
    spec = make_system(system, f)
    field = OrientationField(spec, crng.derive_seed(seed, "field"))
    rng = crng.make_rng(seed, "walk")
    scale = float(n) ** 0.75
    if mode == "scenery":
        path = vertical_walk(n, rng)
        return float(scenery_walk(field, path).Z[-1]) / scale
    if mode == "horizontal":
        return run_walk(n, field, rng, keep_path=False).final_position.x / scale
    if mode == "embedded":
        path = vertical_walk(n, rng)
        levels, sums = level_jump_sums(path, n, counter_jumps(crng.derive_seed(seed, "xi")))
        eps = field.window(int(levels[0]), int(levels[-1])).astype(np.int64)
        return float((eps * sums).sum()) / scale
    raise ValueError(f"unknown mode {mode!r}")
