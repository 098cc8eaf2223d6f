"""
Generalized Birthday Paradox
Exact and Monte Carlo probabilities that K samples contain a bad pair
"""

from fractions import Fraction
from typing import Any, Iterable, Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp
from loguru import logger

from core.errors import InstanceError, PreconditionError
from core.states import Distribution
from npcert.sampling import Estimate, run_trials


def birthday_exact(n: int, k: int) -> Fraction:
    """1 - prod_{i<K} (1 - i/n) for K uniform samples over n outcomes"""
    if n < 1 or k < 0:
        raise InstanceError(f"birthday needs n >= 1 and K >= 0, got n={n}, K={k}")
    survive = Fraction(1)
    for i in range(k):
        survive *= Fraction(n - i, n)
        if survive == 0:
            break
    return 1 - survive


def _probabilities(space: int, mu: Union[Distribution, Sequence[float]]) -> np.ndarray:
    if isinstance(mu, Distribution):
        probs = np.zeros(space)
        for outcome, weight in mu.items():
            if not 0 <= int(outcome) < space:
                raise InstanceError(f"outcome {outcome} outside a space of {space}")
            probs[int(outcome)] = float(weight)
    else:
        probs = np.asarray(mu, dtype=float)
        if probs.shape != (space,):
            raise InstanceError(f"distribution of shape {probs.shape} for a space of {space}")
    if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-9:
        raise InstanceError("mu is not a probability vector")
    return probs / probs.sum()


def _bad_matrix(space: int, bad_pairs: Optional[Any]) -> sp.csr_matrix:
    matrix = sp.identity(space, format="csr") if bad_pairs is None else sp.csr_matrix(bad_pairs)
    if matrix.shape != (space, space):
        raise InstanceError(f"bad-pair matrix of shape {matrix.shape} for a space of {space}")
    if (matrix != matrix.T).nnz:
        raise PreconditionError("bad-pair relation must be symmetric")
    return matrix


def bad_pair_weight(mu: Sequence[float], bad_pairs: Optional[Any] = None, omega0: Optional[Iterable[int]] = None) -> float:
    """lambda = sum over bad (x, y) in Omega0 of mu(x) mu(y)"""
    probs = np.asarray(mu, dtype=float)
    space = probs.size
    matrix = _bad_matrix(space, bad_pairs)
    inside = np.zeros(space) if omega0 is not None else np.ones(space)
    if omega0 is not None:
        inside[list(omega0)] = 1.0
    weights = probs * inside
    return float(weights @ (matrix @ weights))


def birthday_mc(space: int, mu: Union[Distribution, Sequence[float]], bad_pairs: Optional[Any] = None,
                omega0: Optional[Iterable[int]] = None, k: int = 2, trials: int = 10_000, seed: int = 0,
                workers: int = 1) -> Estimate:
    """
    Fraction of trials whose K i.i.d. samples hold a bad pair inside Omega0

    Args:
        space: Outcomes 0..space-1
        mu: Sampling distribution
        bad_pairs: Symmetric sparse relation; None means equality
        omega0: Outcomes the bad pair must lie in; None means everything
        k: Samples per trial
        trials: Trial count
        seed: Master seed
        workers: Thread count
    """
    probs = _probabilities(space, mu)
    matrix = _bad_matrix(space, bad_pairs)
    inside = np.zeros(space, dtype=bool) if omega0 is not None else np.ones(space, dtype=bool)
    if omega0 is not None:
        inside[list(omega0)] = True
    offdiag = matrix - sp.diags(matrix.diagonal())
    offdiag.eliminate_zeros()
    diagonal_bad = (matrix.diagonal() != 0) & inside

    def batch(rng: np.random.Generator, count: int) -> int:
        if k < 2:
            return 0
        draws = rng.choice(space, size=(count, k), p=probs)
        if offdiag.nnz == 0:
            keyed = np.where(diagonal_bad[draws], draws, -1 - np.arange(k)[None, :])
            keyed.sort(axis=1)
            return int(np.any(keyed[:, 1:] == keyed[:, :-1], axis=1).sum())
        hits = 0
        for row in draws:
            kept = row[inside[row]]
            if kept.size < 2:
                continue
            sub = matrix[kept][:, kept].tocoo()
            if np.any(sub.row != sub.col):
                hits += 1
        return hits

    estimate = run_trials(batch, trials, seed, workers)
    logger.info(f"[Birthday] K={k} over {space} outcomes: {estimate.value:.4f} "
                f"[{estimate.ci_low:.4f}, {estimate.ci_high:.4f}] ({trials} trials)")
    return estimate
