import numpy as np
import pytest

from cohort_kit import rng


def test_streams_depend_only_on_seed_and_key():
    assert np.array_equal(rng.stream(5, 3).random(4), rng.stream(5, 3).random(4))
    assert not np.array_equal(rng.stream(5, 3).random(4), rng.stream(5, 4).random(4))
    assert not np.array_equal(rng.stream(5, 3).random(4), rng.stream(6, 3).random(4))
    assert not np.array_equal(rng.stream(5, 3).random(4), rng.stream(5, 3, 1).random(4))


def test_seed_range():
    assert rng.check_seed(rng.MAX_SEED) == 2 ** 64 - 1
    with pytest.raises(ValueError):
        rng.check_seed(-1)
    with pytest.raises(ValueError):
        rng.check_seed(2 ** 64)
    derived = rng.derived_seed(0, 1, 2)
    assert 0 <= derived <= rng.MAX_SEED
    assert derived == rng.derived_seed(0, 1, 2)
    assert derived != rng.derived_seed(0, 2, 1)


def _replicate(gen):
    value = gen.random()
    return value, int(value < 0.1)


def test_run_replicates_is_independent_of_threads():
    replicates = 3 * rng.CHUNK_SIZE + 17
    single, redraws = rng.run_replicates(_replicate, replicates, 42, threads=1, disable_progress=True)
    pooled, pooled_redraws = rng.run_replicates(
        _replicate, replicates, 42, threads=8, disable_progress=True
    )
    assert np.array_equal(single, pooled)
    assert redraws == pooled_redraws == int(np.count_nonzero(single < 0.1))
    assert single[10] == rng.stream(42, 10).random()


def test_run_replicates_arguments():
    with pytest.raises(ValueError):
        rng.run_replicates(_replicate, 0, 1, disable_progress=True)
    with pytest.raises(ValueError):
        rng.run_replicates(_replicate, 10, 1, threads=0, disable_progress=True)
