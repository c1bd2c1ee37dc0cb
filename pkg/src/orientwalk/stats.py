"""Estimators shared by the experiments, and the report container."""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field as dc_field
from typing import Any, Iterable, Sequence

import numpy as np
from scipy import stats as sps

__all__ = [
    "ExponentFit",
    "exponent_fit",
    "KsResult",
    "ks_two_sample",
    "rms",
    "speed_check",
    "ExperimentReport",
]


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    intercept: float
    stderr_slope: float
    r2: float
    points: tuple[tuple[float, float], ...]


def exponent_fit(points: Iterable[tuple[float, float]]) -> ExponentFit:
    """Least-squares fit of ``log value = intercept + slope * log n``."""
    pts = [(float(n), float(v)) for n, v in points]
    if len(pts) < 4:
        raise ValueError("exponent_fit needs at least 4 points")
    ns = np.array([p[0] for p in pts])
    vs = np.array([p[1] for p in pts])
    if np.any(vs <= 0) or np.any(ns <= 0):
        raise ValueError("exponent_fit needs positive n and values")
    if np.any(np.diff(ns) <= 0):
        raise ValueError("n must be strictly increasing")
    res = sps.linregress(np.log(ns), np.log(vs))
    return ExponentFit(float(res.slope), float(res.intercept), float(res.stderr),
                       float(res.rvalue**2), tuple(pts))


@dataclass(frozen=True)
class KsResult:
    statistic: float
    sample_sizes: tuple[int, int]


def ks_two_sample(a, b) -> KsResult:
    """Sup-distance between the empirical CDFs of ``a`` and ``b``."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.size == 0 or b.size == 0:
        raise ValueError("ks_two_sample needs two non-empty samples")
    with warnings.catch_warnings():
        # only the statistic is used; the asymptotic p-value warns on tiny samples
        warnings.simplefilter("ignore", RuntimeWarning)
        res = sps.ks_2samp(a, b, method="asymp")
    return KsResult(float(res.statistic), (a.size, b.size))


def rms(values) -> float:
    v = np.asarray(values, dtype=np.float64)
    return float(math.sqrt(np.mean(v * v)))


def speed_check(walks: Sequence, n_grid: Sequence[int]) -> list[dict]:
    """RMS of ``|M_n| / n`` over an ensemble of walks with checkpoints at ``n_grid``."""
    if len(walks) < 100:
        raise ValueError("speed_check needs an ensemble of at least 100 walks")
    rows = []
    for n in n_grid:
        pos = np.array([w.checkpoints[n] for w in walks], dtype=np.float64)
        sq = (pos[:, 0] ** 2 + pos[:, 1] ** 2) / float(n) ** 2
        r = math.sqrt(sq.mean())
        # delta method on sqrt(mean)
        se = float(sq.std(ddof=1) / math.sqrt(sq.size) / (2 * r)) if r > 0 else 0.0
        rows.append({"n": int(n), "rms_speed": r, "stderr": se})
    return rows


def _clean(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


@dataclass
class ExperimentReport:
    """Configuration echo, metrics and per-criterion verdicts of one run."""

    experiment: str
    master_seed: int
    config: dict[str, Any]
    metrics: dict[str, Any] = dc_field(default_factory=dict)
    criteria: dict[str, bool] = dc_field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.criteria.values())

    def to_dict(self) -> dict:
        return _clean({
            "experiment": self.experiment,
            "master_seed": self.master_seed,
            "config": self.config,
            "metrics": self.metrics,
            "criteria": self.criteria,
            "passed": self.passed,
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentReport":
        return cls(d["experiment"], int(d["master_seed"]), dict(d["config"]),
                   dict(d.get("metrics", {})), dict(d.get("criteria", {})))

    def to_text(self) -> str:
        lines = [f"experiment: {self.experiment}", f"master seed: {self.master_seed}", "config:"]
        lines += [f"  {k} = {v}" for k, v in sorted(self.config.items())]
        lines.append("metrics:")
        for k, v in sorted(self.metrics.items()):
            if isinstance(v, (dict, list)):
                lines.append(f"  {k}: {json.dumps(_clean(v), sort_keys=True)}")
            else:
                lines.append(f"  {k}: {v}")
        lines.append("criteria:")
        lines += [f"  [{'PASS' if ok else 'FAIL'}] {k}" for k, ok in sorted(self.criteria.items())]
        lines.append("overall: " + ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines) + "\n"
