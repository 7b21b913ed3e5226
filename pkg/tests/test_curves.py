import numpy as np
import pytest

from cohort_kit.curves import (
    CumulativeCurve,
    activity_ratio,
    delta_area,
    diurnal_profile,
    normalize_to_background,
    population_curve,
)
from cohort_kit.error import CohortDegenerateError
from cohort_kit.types_fmt import DAY, HOUR

RIEMANN_STEP = 1e-4 * HOUR


def _curve(hours, counts=None, t_max=DAY):
    hours = np.asarray(hours, dtype=np.float64) * HOUR
    if counts is None:
        counts = np.ones(hours.size, dtype=np.int64)
    return CumulativeCurve(hours, counts, t_max)


def _random_curve(gen, t_max=DAY):
    n = int(gen.integers(1, 40))
    times = np.unique(gen.uniform(0, t_max, size=n))
    counts = gen.integers(1, 5, size=times.size)
    return CumulativeCurve(times, counts, t_max)


def _riemann(x, y):
    grid = (np.arange(int(round(x.t_max / RIEMANN_STEP))) + 0.5) * RIEMANN_STEP
    return float(np.abs(x.value_at(grid) - y.value_at(grid)).sum()) * RIEMANN_STEP / HOUR


def test_population_curve_jumps(make_log):
    curve = population_curve([make_log("u1", "A", [6, 12, 18])])
    assert list(curve.jump_times) == [6 * HOUR, 12 * HOUR, 18 * HOUR]
    assert list(curve.jump_sizes) == pytest.approx([1 / 3] * 3)
    assert curve.value_at(0.0) == 0.0
    assert curve.value_at(DAY - 1) == 1.0


def test_population_curve_merges_coincident_offsets(make_log):
    curve = population_curve([make_log("u1", "A", [6]), make_log("u2", "A", [6])])
    assert list(curve.jump_times) == [6 * HOUR]
    assert list(curve.jump_sizes) == [1.0]
    assert curve.total_events == 2


def test_population_curve_needs_events(make_log):
    with pytest.raises(CohortDegenerateError, match="empty population activity"):
        population_curve([make_log("u1", "A", [])])
    with pytest.raises(CohortDegenerateError):
        population_curve([])


def test_population_curve_ignores_partition(make_log):
    together = population_curve([make_log("u1", "A", [1, 3, 3, 7])])
    split = population_curve([make_log("u1", "A", [3, 7]), make_log("u2", "A", [1, 3])])
    assert np.array_equal(together.jump_times, split.jump_times)
    assert np.array_equal(together.jump_counts, split.jump_counts)


def test_delta_area_step_example():
    x = _curve([6, 12, 18])
    y = _curve([12])
    assert delta_area(x, y) == pytest.approx(4.0, abs=1e-12)
    assert delta_area(x, x) == 0.0


def test_delta_area_extremes():
    x = CumulativeCurve([0.0], [1], DAY)
    y = CumulativeCurve([DAY - 1.0], [1], DAY)
    assert delta_area(x, y) == pytest.approx(24.0 - 1.0 / HOUR)
    assert delta_area(x, y) <= DAY / HOUR


def test_delta_area_needs_same_window():
    with pytest.raises(ValueError):
        delta_area(_curve([1]), _curve([1], t_max=12 * HOUR))


def test_delta_area_ignores_duplicated_events():
    x = _curve([2, 5, 9], [1, 2, 1])
    doubled = _curve([2, 5, 9], [2, 4, 2])
    y = _curve([4, 11])
    assert delta_area(x, y) == pytest.approx(delta_area(doubled, y), abs=1e-12)


def _assert_riemann_agreement(pairs, seed):
    gen = np.random.default_rng(seed)
    for _ in range(pairs):
        x, y = _random_curve(gen), _random_curve(gen)
        assert abs(delta_area(x, y) - _riemann(x, y)) <= 1e-3


def test_delta_area_matches_riemann_sum():
    _assert_riemann_agreement(100, 2017)


@pytest.mark.slow
def test_delta_area_matches_riemann_sum_on_1000_pairs():
    _assert_riemann_agreement(1000, 2018)


def test_delta_area_is_a_metric():
    gen = np.random.default_rng(4)
    for _ in range(1000):
        x, y, z = _random_curve(gen), _random_curve(gen), _random_curve(gen)
        assert delta_area(x, x) == 0.0
        assert delta_area(x, y) == delta_area(y, x)
        assert delta_area(x, z) <= delta_area(x, y) + delta_area(y, z) + 1e-9
        assert 0.0 <= delta_area(x, y) <= 24.0


def test_diurnal_profile_counts(make_log):
    profile = diurnal_profile([make_log("u1", "A", [0.5, 1.5, 1.6])])
    assert profile.n_bins == 24
    assert list(profile.counts[:3]) == [1, 2, 0]
    assert profile.counts.sum() == 3

    single = diurnal_profile([make_log("u1", "A", [0.5, 1.5, 23.9])], bin_width=DAY)
    assert list(single.counts) == [3]

    empty = diurnal_profile([make_log("u1", "A", [])])
    assert not empty.counts.any()

    ragged = diurnal_profile([make_log("u1", "A", [23.5])], bin_width=5 * HOUR)
    assert ragged.n_bins == 5
    assert ragged.counts[-1] == 1

    with pytest.raises(ValueError):
        diurnal_profile([make_log("u1", "A", [1])], bin_width=0)


def test_normalize_to_background(make_log):
    def profile(hours):
        return diurnal_profile([make_log("u1", "A", hours)], bin_width=6 * HOUR)

    day = profile([1] * 40 + [7])
    background = [profile([1] * 20 + [7]), profile([1] * 20 + [7])]
    normalized = normalize_to_background(day, background)
    assert normalized.as_list() == [2.0, 1.0, None, None]
    assert list(normalized.undefined) == [False, False, True, True]

    same = normalize_to_background(background[0], background)
    assert same.as_list()[:2] == [1.0, 1.0]

    global_mean = normalize_to_background(day, background, mode="global")
    assert global_mean.as_list() == pytest.approx([40 / 5.25, 1 / 5.25, 0.0, 0.0])

    with pytest.raises(ValueError):
        normalize_to_background(day, [diurnal_profile([make_log("u1", "A", [1])])])
    with pytest.raises(ValueError):
        normalize_to_background(day, [])


def test_activity_ratio(make_log):
    a = [make_log("a1", "A", [1] * 118), make_log("a2", "A", [2] * 118)]
    b = [make_log("b1", "B", [1] * 100), make_log("b2", "B", [2] * 100)]
    assert activity_ratio(a, b) == pytest.approx(1.18)
    assert activity_ratio(a, a) == 1.0
    assert activity_ratio([make_log("a1", "A", [])], [make_log("b1", "B", [1] * 10)]) == 0.0
    with pytest.raises(CohortDegenerateError):
        activity_ratio([], b)
