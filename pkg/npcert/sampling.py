"""
Seeded Monte Carlo
Chunked trial runner with stride-derived generators and Wilson score intervals
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Dict, Tuple

import numpy as np
from loguru import logger
from scipy.stats import norm

from core.errors import InstanceError

CHUNK_TRIALS = 10_000
SEED_STRIDE = 1_000_003


def wilson_interval(successes: int, trials: int, confidence: float = 0.99) -> Tuple[float, float]:
    """Wilson score interval for a binomial proportion"""
    if trials <= 0 or not 0 <= successes <= trials:
        raise InstanceError(f"invalid binomial counts {successes}/{trials}")
    if not 0 < confidence < 1:
        raise InstanceError(f"confidence {confidence} outside (0, 1)")
    z = float(norm.ppf(0.5 + confidence / 2))
    phat = successes / trials
    denom = 1 + z * z / trials
    centre = (phat + z * z / (2 * trials)) / denom
    half = z * np.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass
class Estimate:
    """Success rate with its Wilson interval; exact estimates carry a zero-width interval"""
    value: float
    ci_low: float
    ci_high: float
    trials: int
    exact: bool = False
    exact_value: Any = None

    def to_dict(self) -> Dict[str, Any]:
        data = {"value": self.value, "ci_low": self.ci_low, "ci_high": self.ci_high,
                "trials": self.trials, "exact": self.exact}
        if self.exact_value is not None:
            data["exact_value"] = str(self.exact_value)
        return data


def chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.default_rng(seed + SEED_STRIDE * chunk)


def run_trials(batch: Callable[[np.random.Generator, int], int], trials: int, seed: int, workers: int = 1,
               confidence: float = 0.99) -> Estimate:
    """
    Count successes over `trials` runs split into fixed chunks

    Chunk c draws from seed + stride * c, so the estimate depends on the
    seed alone and not on the worker count.

    Args:
        batch: batch(rng, count) returns the successes among count fresh trials
        trials: Total trials
        seed: Master seed
        workers: Thread count
        confidence: Wilson interval level
    """
    if trials < 1:
        raise InstanceError(f"need at least one trial, got {trials}")
    sizes = [min(CHUNK_TRIALS, trials - start) for start in range(0, trials, CHUNK_TRIALS)]

    def run(chunk: int) -> int:
        return int(batch(chunk_rng(seed, chunk), sizes[chunk]))

    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            successes = sum(pool.map(run, range(len(sizes))))
    else:
        successes = sum(run(c) for c in range(len(sizes)))
    low, high = wilson_interval(successes, trials, confidence)
    logger.debug(f"[MC] {successes}/{trials} successes over {len(sizes)} chunks (seed={seed})")
    return Estimate(successes / trials, low, high, trials)
