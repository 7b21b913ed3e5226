"""
Counter-based random streams and the ordered parallel replicate loop.

Stream (seed, key...) is numpy's default generator (PCG64) seeded by
SeedSequence(entropy=seed, spawn_key=key). Replicate k of a Monte Carlo run uses
key (k,), so its draws depend on nothing but the run seed and k.
"""
import logging
import typing as T
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from tqdm import tqdm

LOG = logging.getLogger(__name__)

MAX_SEED = 2 ** 64 - 1
CHUNK_SIZE = 256


def check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(entropy=check_seed(seed), spawn_key=tuple(int(k) for k in key))
    )


def derived_seed(seed: int, *key: int) -> int:
    """A 64-bit seed for a nested run, e.g. dataset k of a battery."""
    state = np.random.SeedSequence(
        entropy=check_seed(seed), spawn_key=tuple(int(k) for k in key)
    ).generate_state(1, dtype=np.uint64)
    return int(state[0])


ReplicateFn = T.Callable[[np.random.Generator], T.Tuple[float, int]]


def run_replicates(
    replicate: ReplicateFn,
    replicates: int,
    seed: int,
    threads: int = 1,
    desc: str = "Resampling",
    disable_progress: bool = False,
) -> T.Tuple[np.ndarray, int]:
    """
    Evaluate replicate(stream(seed, k)) for k in range(replicates).

    Args:
        replicate: returns the statistic and the number of redraws it needed
        replicates: R
        seed: run seed
        threads: worker count; results do not depend on it

    Returns:
        samples in replicate order and the total redraw count
    """
    if replicates < 1:
        raise ValueError(f"replicates must be at least 1, got {replicates}")
    if threads < 1:
        raise ValueError(f"threads must be at least 1, got {threads}")
    seed = check_seed(seed)
    samples = np.empty(replicates, dtype=np.float64)
    redraws = np.zeros(replicates, dtype=np.int64)

    def run_chunk(start: int, stop: int) -> int:
        for k in range(start, stop):
            samples[k], redraws[k] = replicate(stream(seed, k))
        return stop - start

    chunks = [(s, min(s + CHUNK_SIZE, replicates)) for s in range(0, replicates, CHUNK_SIZE)]
    with tqdm(total=replicates, unit="replicates", desc=desc, disable=disable_progress) as pbar:
        if threads == 1:
            for start, stop in chunks:
                pbar.update(run_chunk(start, stop))
        else:
            with ThreadPoolExecutor(max_workers=threads) as executor:
                for done in executor.map(lambda c: run_chunk(*c), chunks):
                    pbar.update(done)

    total_redraws = int(redraws.sum())
    if total_redraws:
        LOG.warning(f"{total_redraws} degenerate draws were redrawn")
    return samples, total_redraws
