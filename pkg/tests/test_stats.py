import json
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from orientwalk.stats import ExperimentReport, exponent_fit, ks_two_sample, rms, speed_check


def brute_force_ks(a, b):
    """Max |F_a - F_b| over every sample point, by direct counting."""
    pts = sorted(set(a) | set(b))
    return max(abs(sum(x <= p for x in a) / len(a) - sum(x <= p for x in b) / len(b)) for p in pts)


def test_exact_power_law():
    ns = [2**k for k in range(10, 18)]
    fit = exponent_fit([(n, 3 * n**0.75) for n in ns])
    assert fit.slope == pytest.approx(0.75, abs=1e-12)
    assert fit.intercept == pytest.approx(np.log(3), abs=1e-10)
    assert fit.r2 == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("points", [
    [(1, 1), (2, 2), (3, 3)],
    [(1, 1), (2, 0), (3, 3), (4, 4)],
    [(1, 1), (2, -1), (3, 3), (4, 4)],
    [(1, 1), (3, 2), (2, 3), (4, 4)],
])
def test_exponent_fit_rejects(points):
    with pytest.raises(ValueError):
        exponent_fit(points)


@settings(max_examples=50, deadline=None)
@given(slope=st.floats(-2, 2), scale=st.floats(1e-3, 1e3))
def test_exponent_fit_exact_on_synthetic(slope, scale):
    ns = np.geomspace(10, 1e6, 7)
    fit = exponent_fit([(n, scale * n**slope) for n in ns])
    assert fit.slope == pytest.approx(slope, abs=1e-9)


def test_ks_examples():
    a = np.array([0.3, -1.0, 2.5])
    assert ks_two_sample(a, a).statistic == 0.0
    assert ks_two_sample(-np.arange(1, 10), np.arange(1, 5)).statistic == 1.0
    assert brute_force_ks([1, 2, 3], [2, 3, 4]) == pytest.approx(1 / 3)
    assert ks_two_sample([1, 2, 3], [2, 3, 4]).statistic == pytest.approx(1 / 3)
    assert ks_two_sample([1, 2, 3], [2, 3, 4]).sample_sizes == (3, 3)


def test_ks_rejects_empty():
    with pytest.raises(ValueError):
        ks_two_sample([], [1.0])


samples = st.lists(st.integers(-20, 20), min_size=1, max_size=30)


@settings(max_examples=100, deadline=None)
@given(a=samples, b=samples)
def test_ks_matches_brute_force_and_is_symmetric(a, b):
    s = ks_two_sample(a, b).statistic
    assert s == pytest.approx(brute_force_ks(a, b), abs=1e-12)
    assert s == ks_two_sample(b, a).statistic
    assert 0.0 <= s <= 1.0


@settings(max_examples=100, deadline=None)
@given(a=samples, b=samples)
def test_ks_invariant_under_increasing_maps(a, b):
    a, b = np.array(a, float), np.array(b, float)
    s = ks_two_sample(a, b).statistic
    assert ks_two_sample(np.exp(a / 5), np.exp(b / 5)).statistic == pytest.approx(s, abs=1e-12)
    assert ks_two_sample(a**3 + a, b**3 + b).statistic == pytest.approx(s, abs=1e-12)


def test_rms():
    assert rms([3, -4]) == pytest.approx(np.sqrt(12.5))


def _walks(positions):
    return [SimpleNamespace(checkpoints=p) for p in positions]


def test_speed_check_table():
    r = np.random.default_rng(0)
    grid = [100, 1000]
    walks = _walks([{n: tuple(r.integers(-n // 10, n // 10, size=2)) for n in grid} for _ in range(200)])
    table = speed_check(walks, grid)
    assert [row["n"] for row in table] == grid
    assert table == speed_check(walks, grid)
    for row in table:
        pos = np.array([w.checkpoints[row["n"]] for w in walks], float)
        assert row["rms_speed"] == pytest.approx(np.sqrt(np.mean((pos**2).sum(axis=1))) / row["n"])
        assert row["stderr"] > 0


def test_speed_check_needs_ensemble():
    with pytest.raises(ValueError):
        speed_check(_walks([{10: (0, 0)}] * 99), [10])


def test_report_round_trip():
    rep = ExperimentReport("delta", 7, {"t": [1.0, 4.0], "h": 0.01},
                           {"var": {"value": 1.06, "stderr": np.float64(0.02)}, "bad": float("inf")},
                           {"b criterion": True, "a criterion": False})
    d = json.loads(rep.to_json())
    assert d["passed"] is False and d["metrics"]["bad"] == "inf"
    back = ExperimentReport.from_dict(d)
    assert back.to_text() == ExperimentReport.from_dict(json.loads(back.to_json())).to_text()
    text = rep.to_text()
    assert "[FAIL] a criterion" in text and text.index("a criterion") < text.index("b criterion")
    assert text.rstrip().endswith("overall: FAIL")
