import numpy as np
import pytest
from scipy import stats

from cohort_kit.combine import fisher_combine
from cohort_kit.curves import activity_ratio, diurnal_profile
from cohort_kit.geo import GeoBoundingBox, home_locations, select_cohort
from cohort_kit.resampling import empirical_p, shuffle_null, spike_null
from cohort_kit.synthgen import (
    ResponseKernel,
    SyntheticSpec,
    generate,
    null_battery,
    synthetic_gps,
)
from cohort_kit.types_fmt import DAY, HOUR

FLAT = (1.0,) * 24
# 2017-04-07T00:00:00Z
MIDNIGHT = 1491523200.0
BERLIN = GeoBoundingBox(52.369276, 52.650018, 13.091432, 13.754525)


def _attack_response(amplitude_a, amplitude_b, decay=2 * HOUR, shape="exponential_decay"):
    return ResponseKernel(0.0, (amplitude_a, amplitude_b), (decay, decay), shape)


def test_flat_rate_mean():
    spec = SyntheticSpec(5000, 5000, base_rate=20.0, activity_ratio=1.0, diurnal_shape=FLAT, seed=1)
    study = generate(spec, windows=1, disable_progress=True)
    counts = [log.n_events for log in study.window_logs(0)]
    assert abs(np.mean(counts) - 20.0) <= 4 * np.sqrt(20.0 / len(counts))


def test_thinning_follows_diurnal_shape():
    spec = SyntheticSpec(1000, 1000, activity_ratio=1.0, anchor=MIDNIGHT, seed=2)
    study = generate(spec, windows=1, disable_progress=True)
    counts = diurnal_profile(study.window_logs(0)).counts
    expected = spec.n_total * spec.base_rate / 24 * np.asarray(spec.diurnal_shape)
    assert np.all(np.abs(counts - expected) <= 5 * np.sqrt(expected))


def test_boxcar_zero_amplitude_silences_the_attack_window():
    spec = SyntheticSpec(20, 20, response=_attack_response(0.0, 0.0, DAY, "boxcar"), seed=3)
    study = generate(spec, windows=2, disable_progress=True)
    assert study.events_per_window()[0] == 0
    assert all(count > 0 for count in study.events_per_window()[1:])


def test_kernel_factor():
    kernel = ResponseKernel(HOUR, (3.0, 1.0), (2 * HOUR, 2 * HOUR))
    t = np.array([0.0, HOUR, 3 * HOUR])
    assert list(kernel.factor(t, 0)) == pytest.approx([1.0, 3.0, 1.0 + 2.0 * np.exp(-1.0)])
    assert list(kernel.factor(t, 1)) == [1.0, 1.0, 1.0]
    assert not kernel.symmetric
    assert kernel.envelope(0) == 3.0
    with pytest.raises(ValueError):
        ResponseKernel(0.0, (1.0, 1.0), (0.0, 1.0))
    with pytest.raises(ValueError):
        ResponseKernel(0.0, (1.0, 1.0), (1.0, 1.0), "ramp")


def test_spec_validation():
    with pytest.raises(ValueError):
        SyntheticSpec(0, 10)
    with pytest.raises(ValueError):
        SyntheticSpec(10, 10, diurnal_shape=(1.0,) * 12)
    with pytest.raises(ValueError):
        SyntheticSpec(10, 10, seed=-1)
    assert np.mean(SyntheticSpec(1, 1, diurnal_shape=(2.0,) * 24).diurnal_shape) == 1.0


def test_generation_is_deterministic():
    spec = SyntheticSpec(30, 25, dispersion=0.5, seed=9)
    single = generate(spec, windows=2, disable_progress=True)
    pooled = generate(spec, windows=2, threads=4, disable_progress=True)
    assert single.cohort_sizes == {"A": 30, "B": 25}
    assert all(single.logs[key].same_as(pooled.logs[key]) for key in single.logs)

    other = generate(SyntheticSpec(30, 25, dispersion=0.5, seed=10), windows=2, disable_progress=True)
    assert any(not single.logs[key].same_as(other.logs[key]) for key in single.logs)


def test_activity_ratio_calibration():
    spec = SyntheticSpec(2000, 2000, activity_ratio=1.18, seed=4)
    study = generate(spec, windows=8, disable_progress=True)
    measured = activity_ratio(study.background_pool("A"), study.background_pool("B"))
    assert measured == pytest.approx(1.18, abs=0.03)


@pytest.mark.slow
def test_activity_ratio_calibration_at_scale():
    spec = SyntheticSpec(10_000, 10_000, activity_ratio=1.18, seed=5)
    study = generate(spec, windows=8, threads=4, disable_progress=True)
    measured = activity_ratio(study.background_pool("A"), study.background_pool("B"))
    assert measured == pytest.approx(1.18, abs=0.02)


def test_synthetic_homes_inside_the_box():
    spec = SyntheticSpec(40, 40, seed=6)
    inside = select_cohort(home_locations(synthetic_gps(spec, BERLIN)), BERLIN)
    assert inside == {spec.individual_id(i) for i in range(spec.n_total)}

    outside = select_cohort(home_locations(synthetic_gps(spec, BERLIN, 1.0)), BERLIN)
    assert outside == set()
    with pytest.raises(ValueError):
        synthetic_gps(spec, BERLIN, 1.5)


def test_injected_response_is_detected():
    spec = SyntheticSpec(300, 300, response=_attack_response(3.0, 1.0), seed=7)
    study = generate(spec, windows=1, disable_progress=True)
    null = shuffle_null(study.window_logs(0), replicates=500, seed=7, disable_progress=True)
    assert empirical_p(null).p < 0.01


@pytest.mark.slow
def test_injected_response_power():
    detected = 0
    for seed in range(100):
        spec = SyntheticSpec(500, 500, response=_attack_response(3.0, 1.0), seed=seed)
        study = generate(spec, windows=1, disable_progress=True)
        null = shuffle_null(study.window_logs(0), replicates=10_000, seed=seed, disable_progress=True)
        detected += empirical_p(null).p < 0.01
    assert detected >= 90


def test_spike_detects_shared_response():
    spec = SyntheticSpec(300, 300, response=_attack_response(3.0, 3.0), seed=8)
    study = generate(spec, windows=4, disable_progress=True)
    pvalues = [
        empirical_p(
            spike_null(study, "A", week, replicates=300, seed=week, disable_progress=True),
            smoothed=True,
        ).p
        for week in range(1, 5)
    ]
    assert fisher_combine(pvalues, transform="direct", tail="upper").p_combined < 1e-3


def test_null_battery_without_response():
    spec = SyntheticSpec(30, 30, seed=11)
    pvalues = null_battery(spec, 20, replicates=200, windows=1, disable_progress=True)
    assert pvalues.shape == (20,)
    assert np.median(pvalues) > 0.05
    with pytest.raises(ValueError):
        null_battery(
            SyntheticSpec(5, 5, response=_attack_response(3.0, 1.0)), 2, disable_progress=True
        )


@pytest.mark.slow
def test_null_battery_is_uniform():
    spec = SyntheticSpec(200, 200, seed=12)
    pvalues = null_battery(spec, 200, replicates=2000, windows=1, threads=4, disable_progress=True)
    assert stats.kstest(pvalues, "uniform").pvalue > 0.01


def _spike_pvalues_without_response(datasets, n, weeks, replicates):
    pvalues = []
    for k in range(datasets):
        study = generate(SyntheticSpec(n, 20, seed=100 + k), windows=weeks, disable_progress=True)
        week = 1 + k % weeks
        null = spike_null(study, "A", week, replicates=replicates, seed=k, disable_progress=True)
        pvalues.append(empirical_p(null).p)
    return pvalues


def test_spike_without_response_is_uniform():
    pvalues = _spike_pvalues_without_response(30, 60, 4, 200)
    assert stats.kstest(pvalues, "uniform").pvalue > 0.001


@pytest.mark.slow
def test_spike_without_response_is_uniform_at_scale():
    pvalues = _spike_pvalues_without_response(200, 200, 8, 1000)
    assert stats.kstest(pvalues, "uniform").pvalue > 0.01


def test_null_battery_with_shared_response():
    spec = SyntheticSpec(30, 30, response=_attack_response(3.0, 3.0), seed=13)
    pvalues = null_battery(spec, 30, replicates=200, windows=1, disable_progress=True)
    assert stats.kstest(pvalues, "uniform").pvalue > 0.001


@pytest.mark.slow
def test_null_battery_with_shared_response_is_uniform():
    spec = SyntheticSpec(200, 200, response=_attack_response(3.0, 3.0), seed=14)
    pvalues = null_battery(spec, 200, replicates=2000, windows=1, threads=4, disable_progress=True)
    assert stats.kstest(pvalues, "uniform").pvalue > 0.01
