"""Dynamical systems, generating functions and orientation fields.

A system preset bundles a measure-preserving map ``T`` on a state space
with a sampler for its invariant measure and a generating function
``f: E -> [0, 1]``.  Orientations are the random signs with
``P(eps_y = +1) = f(T^y x)``; for the non-invertible Manneville-Pomeau
map the index is ``|y|``.

States are represented so that the whole orbit ``(T^y x)_y`` can be
evaluated vectorised:

* interval systems (rotation, Manneville-Pomeau, identity) use a float in
  ``[0, 1)``;
* shift systems use a :class:`ShiftPoint`, a lazily realised coordinate
  stream ``(x_y)_{y in Z}``.  Generating functions see the zero coordinate,
  so ``f(T^y x)`` is evaluated on ``x_y``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

from . import rng as crng

__all__ = [
    "PresetError",
    "InvalidGeneratingFunction",
    "ShiftPoint",
    "GeneratingFunction",
    "SystemSpec",
    "parse_system",
    "parse_function",
    "make_system",
    "iterate",
    "sample_point",
    "orbit_states",
    "OrientationField",
    "CorrelationEstimate",
    "correlation_estimate",
    "CovarianceCheck",
    "covariance_identity_check",
    "AdmissibilityResult",
    "admissibility",
    "char_modulus_squared",
    "char_modulus_squared_mc",
]

_COORD = crng.tag("coord")
_RENEW = crng.tag("renew")
_EPS = crng.tag("eps")

SHIFT_KINDS = ("bernoulli", "markov")
INTERVAL_KINDS = ("rotation", "mp", "identity")


class PresetError(ValueError):
    """Unknown or malformed system / generating-function preset string."""


class InvalidGeneratingFunction(ValueError):
    """A generating function produced values outside [0, 1]."""


@dataclass(frozen=True)
class ShiftPoint:
    """Point of ``[0,1]^Z`` whose coordinates are produced on demand.

    Coordinates follow the hold-or-redraw chain: ``x_{y+1} = x_y`` with
    probability ``hold``, otherwise a fresh uniform.  ``hold = 0`` is the
    Bernoulli shift.  ``offset`` implements the shift map.
    """

    seed: int
    hold: float = 0.0
    offset: int = 0

    def coordinates(self, ys) -> np.ndarray:
        ys = np.asarray(ys, dtype=np.int64) + self.offset
        return shift_coordinates(self.seed, ys, self.hold)


def shift_coordinates(seeds, ys, hold: float) -> np.ndarray:
    """Coordinates ``x_y`` of one or many coordinate streams.

    ``seeds`` and ``ys`` broadcast against each other.  Each site renews
    (draws a fresh uniform) with probability ``1 - hold`` independently;
    ``x_y`` is the uniform attached to the last renewal at or before ``y``.
    """
    seeds, ys = np.broadcast_arrays(np.asarray(seeds), np.asarray(ys, dtype=np.int64))
    seeds = seeds.ravel()
    site = ys.ravel().copy()
    if hold > 0.0:
        todo = np.flatnonzero(crng.uniform(seeds, _RENEW, site) < hold)
        while todo.size:
            site[todo] -= 1
            still = crng.uniform(seeds[todo], _RENEW, site[todo]) < hold
            todo = todo[still]
    return crng.uniform(seeds, _COORD, site).reshape(ys.shape)


@dataclass(frozen=True)
class GeneratingFunction:
    name: str
    fn: Callable[[np.ndarray], np.ndarray] = dc_field(repr=False, compare=False)

    def __call__(self, states) -> np.ndarray:
        return self.fn(np.asarray(states, dtype=np.float64))


@dataclass(frozen=True)
class SystemSpec:
    """A dynamical system preset with its generating function.

    ``params`` holds ``alpha`` (rotation angle or MP exponent), ``rho``
    (Markov hold probability) and ``burnin`` (MP SRB burn-in) as relevant.
    """

    kind: str
    f: GeneratingFunction
    params: tuple[tuple[str, float], ...] = ()

    def param(self, key: str, default: float | None = None) -> float:
        for k, v in self.params:
            if k == key:
                return v
        if default is None:
            raise KeyError(key)
        return default

    @property
    def invertible(self) -> bool:
        return self.kind != "mp"

    @property
    def is_shift(self) -> bool:
        return self.kind in SHIFT_KINDS

    @property
    def hold(self) -> float:
        return self.param("rho", 0.0) if self.kind == "markov" else 0.0

    @property
    def name(self) -> str:
        if not self.params:
            return self.kind
        args = ",".join(f"{k}={_fmt(v)}" for k, v in self.params)
        return f"{self.kind}:{args}"

    def step(self, x: np.ndarray) -> np.ndarray:
        """One application of T to interval states."""
        x = np.asarray(x, dtype=np.float64)
        if self.kind == "rotation":
            return np.mod(x + self.param("alpha"), 1.0)
        if self.kind == "mp":
            return mp_map(x, self.param("alpha"))
        if self.kind == "identity":
            return x
        raise TypeError(f"{self.kind} does not act on interval states")


def _fmt(v: float) -> str:
    return str(int(v)) if float(v).is_integer() and abs(v) >= 1 else repr(float(v))


def mp_map(x, alpha: float) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return np.mod(x + x ** (1.0 + alpha), 1.0)


# --------------------------------------------------------------- presets

def _parse_kv(text: str) -> tuple[str, dict[str, float]]:
    name, _, rest = text.strip().partition(":")
    params: dict[str, float] = {}
    if rest:
        for item in rest.split(","):
            k, sep, v = item.partition("=")
            if not sep:
                raise PresetError(f"malformed parameter {item!r} in {text!r}")
            try:
                params[k.strip()] = float(v)
            except ValueError:
                raise PresetError(f"non-numeric parameter {item!r} in {text!r}") from None
    return name.strip().lower(), params


def parse_system(text: str) -> tuple[str, tuple[tuple[str, float], ...]]:
    """Parse ``"markov:rho=0.5"``-style strings into ``(kind, params)``."""
    kind, params = _parse_kv(text)
    allowed = {
        "bernoulli": set(),
        "markov": {"rho"},
        "rotation": {"alpha"},
        "mp": {"alpha", "burnin"},
        "identity": set(),
    }
    if kind not in allowed:
        raise PresetError(f"unknown system {text!r}")
    extra = set(params) - allowed[kind]
    if extra:
        raise PresetError(f"unknown parameter(s) {sorted(extra)} for system {kind!r}")
    if kind == "markov":
        rho = params.setdefault("rho", 0.5)
        if not 0.0 <= rho < 1.0:
            raise PresetError(f"markov hold probability must lie in [0, 1), got {rho}")
    if kind == "rotation":
        params["alpha"] = params.get("alpha", 0.0) % 1.0
    if kind == "mp":
        if params.setdefault("alpha", 0.25) <= 0:
            raise PresetError("mp exponent must be positive")
        burnin = params.setdefault("burnin", 10_000.0)
        if burnin < 0 or not float(burnin).is_integer():
            raise PresetError("mp burnin must be a non-negative integer")
    order = {"rho": 0, "alpha": 0, "burnin": 1}
    return kind, tuple(sorted(params.items(), key=lambda kv: order[kv[0]]))


def _indicator_half(x):
    return ((x >= 0.0) & (x < 0.5)).astype(np.float64)


def parse_function(text: str, kind: str = "", params=()) -> GeneratingFunction:
    """Resolve a generating-function preset name.

    ``fmp`` depends on the Manneville-Pomeau exponent and therefore needs
    the system it is paired with.
    """
    head, _, raw = text.strip().partition(":")
    if head.strip().lower() == "const":
        # ``const:0.5`` carries a bare value rather than key=value pairs
        try:
            c = float(raw)
        except ValueError:
            raise PresetError(f"malformed constant function {text!r}") from None
        if not 0.0 <= c <= 1.0:
            raise PresetError(f"constant generating function must lie in [0, 1], got {c}")
        return GeneratingFunction(f"const:{_fmt(c)}", lambda x: np.full(np.shape(x), c))
    name, fparams = _parse_kv(text)
    if fparams:
        raise PresetError(f"generating function {name!r} takes no parameters")
    if name in ("proj", "f1"):
        return GeneratingFunction(name, lambda x: x)
    if name == "f2":
        return GeneratingFunction(name, lambda x: np.cos(2.0 * np.pi * x) ** 2)
    if name == "f3":
        return GeneratingFunction(name, _indicator_half)
    if name == "fmp":
        alpha = dict(params).get("alpha")
        if kind != "mp" or alpha is None:
            raise PresetError("fmp is only defined together with an mp system")
        return GeneratingFunction(name, lambda x: 0.5 * (1.0 + x - mp_map(x, alpha)))
    raise PresetError(f"unknown generating function {text!r}")


def make_system(system: str, f: str | None = None) -> SystemSpec:
    """Build a :class:`SystemSpec` from preset strings.

    The default generating function is ``proj`` for shifts, ``fmp`` for the
    Manneville-Pomeau map and ``f3`` otherwise.
    """
    kind, params = parse_system(system)
    if f is None:
        f = {"bernoulli": "proj", "markov": "proj", "mp": "fmp"}.get(kind, "f3")
    if f.partition(":")[0].strip().lower() == "const":
        return SystemSpec(kind, parse_function(f), params)
    return SystemSpec(kind, parse_function(f, kind, params), params)


# ------------------------------------------------------------- dynamics

def iterate(spec: SystemSpec, x, y: int):
    """Return ``T^y x`` (``T^{|y|} x`` for non-invertible maps)."""
    if spec.is_shift:
        return ShiftPoint(x.seed, x.hold, x.offset + int(y))
    if spec.kind == "rotation":
        return float((x + y * spec.param("alpha")) % 1.0)
    if spec.kind == "identity":
        return float(x)
    state = np.float64(x)
    for _ in range(abs(int(y))):
        state = spec.step(state)
    return float(state)


def _sample_interval(spec: SystemSpec, rng: np.random.Generator, size) -> np.ndarray:
    x = rng.random(size)
    if spec.kind == "mp":
        for _ in range(int(spec.param("burnin"))):
            x = spec.step(x)
    return x


def sample_point(spec: SystemSpec, rng: np.random.Generator, size: int | None = None):
    """Draw ``x ~ mu`` (approximately, for the SRB measure of the MP map).

    With ``size`` given, interval systems return an array of states and
    shift systems a uint64 array of stream seeds.
    """
    if spec.is_shift:
        if size is None:
            return ShiftPoint(crng.seed_from_rng(rng), spec.hold)
        return rng.integers(0, 2**64, size=size, dtype=np.uint64)
    x = _sample_interval(spec, rng, 1 if size is None else size)
    return float(x[0]) if size is None else x


def orbit_states(spec: SystemSpec, x, ys) -> np.ndarray:
    """States seen by the generating function along the orbit: ``T^y x``.

    For shifts this is the coordinate ``x_y``; for the MP map the index is
    ``|y|``.
    """
    ys = np.asarray(ys, dtype=np.int64)
    if spec.is_shift:
        return x.coordinates(ys)
    if spec.kind == "rotation":
        return np.mod(x + ys * spec.param("alpha"), 1.0)
    if spec.kind == "identity":
        return np.full(ys.shape, float(x))
    orbit = _mp_orbit(spec, float(x), int(np.abs(ys).max(initial=0)))
    return orbit[np.abs(ys)]


def _mp_orbit(spec: SystemSpec, x: float, length: int, prefix: np.ndarray | None = None) -> np.ndarray:
    orbit = np.empty(length + 1)
    start = 0
    if prefix is not None and prefix.size:
        start = min(prefix.size, length + 1)
        orbit[:start] = prefix[:start]
    else:
        orbit[0] = x
        start = 1
    a = spec.param("alpha")
    for k in range(start, length + 1):
        v = orbit[k - 1]
        v = v + v ** (1.0 + a)
        orbit[k] = v - 1.0 if v >= 1.0 else v
    return orbit


# ------------------------------------------------------- orientations

class OrientationField:
    """Random orientations ``eps_y`` on the levels of the lattice.

    Quenched fields are built from a given point ``x``; annealed fields
    draw ``x ~ mu`` once from ``seed``.  The sign at level ``y`` is
    ``+1`` iff ``U(seed, y) < f(T^y x)`` with ``U`` counter-based, so the
    field does not depend on the order in which levels are queried.

    Each replica should own its field; ``freeze()`` makes the cache
    read-only for sharing between readers.
    """

    def __init__(self, spec: SystemSpec, seed: int, x=None):
        self.spec = spec
        self.seed = int(seed)
        if x is None:
            self.mode = "annealed"
            x = sample_point(spec, crng.make_rng(self.seed, "point"))
        else:
            self.mode = "quenched"
            if spec.is_shift and not isinstance(x, ShiftPoint):
                x = ShiftPoint(int(x), spec.hold)
        self.x = x
        self._lo = 0
        self._cache = np.empty(0, dtype=np.int8)
        self._orbit: np.ndarray | None = None
        self._frozen = False

    def __repr__(self) -> str:
        return f"OrientationField({self.spec.name}, f={self.spec.f.name}, {self.mode}, seed={self.seed})"

    def probabilities(self, ys) -> np.ndarray:
        """``f(T^y x)`` for each level in ``ys``."""
        ys = np.asarray(ys, dtype=np.int64)
        if self.spec.kind == "mp":
            need = int(np.abs(ys).max(initial=0))
            if self._orbit is None or self._orbit.size <= need:
                self._orbit = _mp_orbit(self.spec, float(self.x), max(need, 2 * (0 if self._orbit is None else self._orbit.size)), self._orbit)
            states = self._orbit[np.abs(ys)]
        else:
            states = orbit_states(self.spec, self.x, ys)
        p = self.spec.f(states)
        if p.size and (np.nanmin(p) < 0.0 or np.nanmax(p) > 1.0 or np.isnan(p).any()):
            raise InvalidGeneratingFunction(f"{self.spec.f.name} left [0, 1]")
        return p

    def values(self, ys) -> np.ndarray:
        """Signs ``eps_y`` in {-1, +1} (int8), vectorised, uncached."""
        ys = np.asarray(ys, dtype=np.int64)
        u = crng.uniform(self.seed, _EPS, ys).reshape(ys.shape)
        return np.where(u < self.probabilities(ys), 1, -1).astype(np.int8)

    def window(self, lo: int, hi: int) -> np.ndarray:
        """Cached signs for levels ``lo..hi`` inclusive; index 0 is level ``lo``."""
        lo, hi = int(lo), int(hi)
        clo, chi = self._lo, self._lo + self._cache.size - 1
        if self._cache.size == 0 or lo < clo or hi > chi:
            if self._frozen:
                return self.values(np.arange(lo, hi + 1))
            nlo = lo if self._cache.size == 0 else min(lo, clo)
            nhi = hi if self._cache.size == 0 else max(hi, chi)
            cache = np.empty(nhi - nlo + 1, dtype=np.int8)
            known = np.zeros(cache.size, dtype=bool)
            if self._cache.size:
                cache[clo - nlo: chi - nlo + 1] = self._cache
                known[clo - nlo: chi - nlo + 1] = True
            fresh = np.flatnonzero(~known)
            cache[fresh] = self.values(fresh + nlo)
            self._lo, self._cache = nlo, cache
        return self._cache[lo - self._lo: hi - self._lo + 1]

    def __getitem__(self, y: int) -> int:
        return int(self.window(y, y)[0])

    def freeze(self) -> "OrientationField":
        self._frozen = True
        self._cache.setflags(write=False)
        return self


# ---------------------------------------------------------- correlations

def _pair_states(spec: SystemSpec, y: int, size: int, rng: np.random.Generator):
    """States ``(x, T^y x)`` for ``size`` independent ``x ~ mu``."""
    if spec.is_shift:
        seeds = sample_point(spec, rng, size)
        return (shift_coordinates(seeds, 0, spec.hold),
                shift_coordinates(seeds, y, spec.hold))
    x = sample_point(spec, rng, size)
    if spec.kind == "rotation":
        return x, np.mod(x + y * spec.param("alpha"), 1.0)
    if spec.kind == "identity":
        return x, x
    xy = x
    for _ in range(abs(int(y))):
        xy = spec.step(xy)
    return x, xy


@dataclass(frozen=True)
class CorrelationEstimate:
    lag: int
    estimate: float
    standard_error: float
    sample_count: int


def correlation_estimate(spec: SystemSpec, y: int, sample_count: int,
                         rng: np.random.Generator) -> CorrelationEstimate:
    """Monte Carlo estimate of ``int f(x) f(T^y x) dmu - 1/4``."""
    if sample_count < 1000:
        raise ValueError(f"sample_count must be >= 1000, got {sample_count}")
    x0, xy = _pair_states(spec, y, sample_count, rng)
    prod = spec.f(x0) * spec.f(xy)
    return CorrelationEstimate(int(y), float(prod.mean() - 0.25),
                               float(prod.std(ddof=1) / math.sqrt(sample_count)),
                               int(sample_count))


@dataclass(frozen=True)
class CovarianceCheck:
    lag: int
    cov_hat: float
    cov_stderr: float
    four_c_hat: float
    four_c_stderr: float
    z_score: float


def covariance_identity_check(spec: SystemSpec, y: int, sample_count: int,
                              rng: np.random.Generator) -> CovarianceCheck:
    """Compare ``Cov(eps_0, eps_y)`` under the annealed law with ``4 C(y)``.

    The covariance is estimated from annealed orientation samples (fresh
    ``x`` and fresh Bernoulli draws per sample); ``C(y)`` comes from an
    independent run of :func:`correlation_estimate`.
    """
    if sample_count < 10_000:
        raise ValueError(f"sample_count must be >= 10_000, got {sample_count}")
    x0, xy = _pair_states(spec, y, sample_count, rng)
    u0 = rng.random(sample_count)
    e0 = np.where(u0 < spec.f(x0), 1.0, -1.0)
    if y == 0:
        ey = e0
    else:
        ey = np.where(rng.random(sample_count) < spec.f(xy), 1.0, -1.0)
    d = (e0 - e0.mean()) * (ey - ey.mean())
    cov = float(d.sum() / (sample_count - 1))
    cov_se = float(d.std(ddof=1) / math.sqrt(sample_count))
    c = correlation_estimate(spec, y, sample_count, rng)
    four_c, four_c_se = 4.0 * c.estimate, 4.0 * c.standard_error
    se = math.hypot(cov_se, four_c_se)
    z = (cov - four_c) / se if se > 0 else (0.0 if cov == four_c else math.inf)
    return CovarianceCheck(int(y), cov, cov_se, four_c, four_c_se, float(z))


# ----------------------------------------------------------- condition (C)

@dataclass
class AdmissibilityResult:
    verdict: str  # "admissible", "diverging" or "inconclusive"
    estimate: float
    stderr: float
    caps: list[float]
    sample_counts: list[int]
    table: list[dict] = dc_field(default_factory=list)

    @property
    def admissible(self) -> bool:
        return self.verdict == "admissible"


def admissibility(spec: SystemSpec,
                  sample_schedule=(10_000, 100_000, 1_000_000),
                  clip_schedule=(1e2, 1e3, 1e4),
                  rng: np.random.Generator | None = None,
                  admissible_tol: float = 0.02,
                  diverging_tol: float = 0.10,
                  samples=None) -> AdmissibilityResult:
    """Monte Carlo diagnostic for ``int 1/sqrt(f(1-f)) dmu < inf``.

    The integrand is clipped at each cap; with the largest sample the
    verdict is ``admissible`` when the last cap increase changes the
    estimate by less than ``admissible_tol`` (relative), ``diverging``
    when the estimate grows monotonically and by more than
    ``diverging_tol`` between every pair of successive caps, and
    ``inconclusive`` otherwise.

    ``samples`` may supply precomputed states ``x ~ mu`` instead of ``rng``.
    """
    sample_schedule = [int(s) for s in sample_schedule]
    clip_schedule = [float(c) for c in clip_schedule]
    for sched in (sample_schedule, clip_schedule):
        if len(sched) < 3 or any(b <= a for a, b in zip(sched, sched[1:])):
            raise ValueError("schedules need >= 3 strictly increasing entries")
    n_max = sample_schedule[-1]
    if samples is None:
        if rng is None:
            raise ValueError("need rng or samples")
        if spec.is_shift:
            samples = shift_coordinates(sample_point(spec, rng, n_max), 0, spec.hold)
        else:
            samples = sample_point(spec, rng, n_max)
    samples = np.asarray(samples, dtype=np.float64)[:n_max]
    p = spec.f(samples)
    if np.isnan(p).any() or p.min() < 0.0 or p.max() > 1.0:
        raise InvalidGeneratingFunction(f"{spec.f.name} left [0, 1]")
    with np.errstate(divide="ignore"):
        g = 1.0 / np.sqrt(p * (1.0 - p))
    table = []
    final = None
    for n in sample_schedule:
        gn = g[:n]
        for cap in clip_schedule:
            clipped = np.minimum(gn, cap)
            est = float(clipped.mean())
            se = float(clipped.std(ddof=1) / math.sqrt(n))
            table.append({"samples": n, "cap": cap, "estimate": est, "stderr": se})
        if n == n_max:
            final = table[-len(clip_schedule):]
    ests = [row["estimate"] for row in final]
    rel = [(b - a) / a for a, b in zip(ests, ests[1:])]
    if abs(rel[-1]) < admissible_tol:
        verdict = "admissible"
    elif all(r > diverging_tol for r in rel):
        verdict = "diverging"
    else:
        verdict = "inconclusive"
    return AdmissibilityResult(verdict, final[-1]["estimate"], final[-1]["stderr"],
                               clip_schedule, sample_schedule, table)


# ------------------------------------------------- characteristic function

def char_modulus_squared(p, u):
    """``|E exp(i u eps)|^2 = 1 - 4 p (1-p) sin^2 u`` for a sign with ``P(+1) = p``."""
    p_arr = np.asarray(p, dtype=np.float64)
    if np.any((p_arr < 0.0) | (p_arr > 1.0)) or np.isnan(p_arr).any():
        raise ValueError(f"probability outside [0, 1]: {p}")
    out = 1.0 - 4.0 * p_arr * (1.0 - p_arr) * np.sin(u) ** 2
    return float(out) if np.ndim(out) == 0 else out


def char_modulus_squared_mc(p: float, u: float, sample_count: int,
                            rng: np.random.Generator) -> tuple[float, float]:
    """Unbiased Monte Carlo estimate of ``|E exp(i u eps)|^2`` and its stderr.

    Uses the U-statistic ``(|sum X|^2 - sum |X|^2) / (N (N-1))`` over
    ``X_k = exp(i u eps_k)``.
    """
    char_modulus_squared(p, u)
    n = int(sample_count)
    eps = np.where(rng.random(n) < p, 1.0, -1.0)
    xs = np.exp(1j * u * eps)
    s = xs.sum()
    est = float((abs(s) ** 2 - n) / (n * (n - 1)))
    phi = s / n
    # first-order term of the U-statistic variance plus the degenerate term
    h1 = (xs * np.conj(phi)).real
    e_h2 = 0.5 * (1.0 + abs((xs**2).mean()) ** 2)
    var = 4.0 * h1.var() / n + 2.0 * max(e_h2 - est**2, 0.0) / (n * (n - 1))
    return est, math.sqrt(var)
