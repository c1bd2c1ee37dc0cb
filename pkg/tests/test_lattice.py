import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from orientwalk import rng as crng
from orientwalk.dynsys import OrientationField, make_system
from orientwalk.experiments import return_count_curve
from orientwalk.lattice import (
    DOWN,
    HORIZONTAL,
    UP,
    Vertex,
    horizontal_run_lengths,
    neighbors,
    run_walk,
    step,
    validate_path,
    vertical_increments,
)


class FixedField:
    """Minimal field stand-in with explicitly chosen levels."""

    def __init__(self, values: dict[int, int], default: int = 1):
        self.values_ = values
        self.default = default

    def __getitem__(self, y):
        return self.values_.get(int(y), self.default)

    def window(self, lo, hi):
        return np.array([self[y] for y in range(lo, hi + 1)], dtype=np.int8)


def bernoulli_field(seed=0):
    return OrientationField(make_system("bernoulli"), seed)


def test_neighbors_right_and_left():
    assert set(neighbors((0, 0), FixedField({0: 1}))) == {(0, 1), (0, -1), (1, 0)}
    assert set(neighbors((0, 0), FixedField({0: -1}))) == {(0, 1), (0, -1), (-1, 0)}
    assert set(neighbors(Vertex(3, -2), FixedField({-2: 1}))) == {(3, -1), (3, -3), (4, -2)}


def test_step_frequencies():
    field = FixedField({}, default=1)
    r = crng.make_rng(1, "steps")
    m = 1_000_000
    # step() draws one integer per call; the walk engine draws the same codes in bulk
    codes = r.integers(0, 3, size=m, dtype=np.int8)
    counts = np.bincount(codes, minlength=3)
    sigma = math.sqrt(m * (1 / 3) * (2 / 3))
    assert np.all(np.abs(counts - m / 3) < 4 * sigma)
    vertical = counts[UP] + counts[DOWN]
    assert abs(vertical / m - 2 / 3) < 4 * math.sqrt((2 / 9) / m)
    # and step() itself
    r = crng.make_rng(1, "step-calls")
    moves = [step((0, 0), field, r) for _ in range(30_000)]
    right = sum(v == (1, 0) for v in moves)
    assert abs(right / 30_000 - 1 / 3) < 4 * math.sqrt((2 / 9) / 30_000)


def test_walk_engine_move_frequencies():
    w = run_walk(1_000_000, bernoulli_field(2), crng.make_rng(2, "walk"), keep_path=True)
    counts = np.bincount(w.moves, minlength=3)
    sigma = math.sqrt(w.n * (2 / 9))
    assert np.all(np.abs(counts - w.n / 3) < 4 * sigma)


def test_replay_is_identical():
    a = run_walk(5000, bernoulli_field(5), crng.make_rng(9, "walk"))
    b = run_walk(5000, bernoulli_field(5), crng.make_rng(9, "walk"))
    assert np.array_equal(a.positions, b.positions)
    assert a.summary() == b.summary()


def test_single_step_never_returns():
    for s in range(50):
        assert run_walk(1, bernoulli_field(s), crng.make_rng(s, "walk")).returns_to_origin == 0


def test_rejects_zero_steps():
    with pytest.raises(ValueError):
        run_walk(0, bernoulli_field(), crng.make_rng(0, "walk"))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32), n=st.integers(1, 3000),
       system=st.sampled_from(["bernoulli", "markov:rho=0.8", "rotation:alpha=0.5"]))
def test_path_validity_and_summaries(seed, n, system):
    spec = make_system(system)
    field = OrientationField(spec, seed, x=0.25 if not spec.is_shift else None)
    w = run_walk(n, field, crng.make_rng(seed, "walk"), checkpoints=(0, n // 2, n))
    assert validate_path(w.positions, field)
    assert w.returns_to_origin <= n
    assert w.returns_to_origin == int(np.sum(np.all(w.positions[1:] == 0, axis=1)))
    assert w.max_abs_y == int(np.abs(w.positions[:, 1]).max())
    assert tuple(w.final_position) == tuple(w.positions[-1])
    for c in (0, n // 2, n):
        assert tuple(w.checkpoints[c]) == tuple(w.positions[c])


def test_checkpoints_without_stored_path():
    field = bernoulli_field(7)
    full = run_walk(300_000, field, crng.make_rng(7, "walk"), keep_path=True)
    thin = run_walk(300_000, field, crng.make_rng(7, "walk"), checkpoints=(1, 262_144, 262_145, 300_000))
    assert thin.positions is None
    for c in (1, 262_144, 262_145, 300_000):
        assert tuple(thin.checkpoints[c]) == tuple(full.positions[c])
    assert thin.returns_to_origin == full.returns_to_origin


def test_validate_path_catches_wrong_direction():
    field = FixedField({0: 1})
    assert validate_path(np.array([[0, 0], [1, 0]]), field)
    assert not validate_path(np.array([[0, 0], [-1, 0]]), field)
    assert not validate_path(np.array([[0, 0], [1, 1]]), field)


def test_vertical_marginal_is_symmetric():
    w = run_walk(600_000, bernoulli_field(3), crng.make_rng(3, "walk"), keep_path=True)
    inc = vertical_increments(w.moves)
    up = np.mean(inc == 1)
    assert abs(up - 0.5) < 4 * math.sqrt(0.25 / inc.size)


def test_no_move_against_orientation():
    for seed in range(5):
        field = bernoulli_field(seed)
        w = run_walk(100_000, field, crng.make_rng(seed, "walk"))
        d = np.diff(w.positions, axis=0)
        ys = w.positions[:-1, 1]
        horiz = d[:, 1] == 0
        eps = field.window(ys.min(), ys.max())[ys - ys.min()]
        assert np.all(d[horiz, 0] == eps[horiz])


def test_run_lengths_helper():
    moves = np.array([HORIZONTAL, HORIZONTAL, UP, DOWN, HORIZONTAL, UP])
    assert horizontal_run_lengths(moves).tolist() == [2, 0, 1]
    assert vertical_increments(moves).tolist() == [1, -1, 1]


def test_return_curves_contrast():
    alt, _ = return_count_curve("rotation:alpha=0.5", "f3", [10**3, 10**4], 100, 1,
                                mode="quenched", x=0.25)
    right, _ = return_count_curve("rotation:alpha=0", "f3", [10**3, 10**4], 100, 1,
                                  mode="quenched", x=0.25)
    assert alt[1]["mean_returns"] > alt[0]["mean_returns"]
    # on the all-right lattice the walk leaves for good: the curve is flat
    assert right[1]["mean_returns"] - right[0]["mean_returns"] < 0.1
    assert right[1]["mean_returns"] < alt[1]["mean_returns"]


def test_return_curve_grid_must_increase():
    with pytest.raises(ValueError):
        return_count_curve("bernoulli", None, [100, 100], 2, 0)
