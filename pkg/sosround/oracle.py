"""
Moment Oracles
Pseudoexpectations realized as finite mixtures of unit vectors
"""

from dataclasses import dataclass
from typing import Any, Dict, Sequence

import numpy as np
from loguru import logger

from core.errors import InstanceError, PreconditionError
from core.sepval import PartitionedMatrix

UNIT_TOLERANCE = 1e-12


@dataclass
class MomentOracle:
    """
    E~[p] = sum_m w_m p(v_m) for unit vectors v_m in R^d

    Mixtures satisfy every pseudoexpectation axiom at every degree. The
    tensor order t is carried along for the rounding routines.
    """
    d: int
    t: int
    weights: np.ndarray
    vectors: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float).reshape(-1)
        self.vectors = np.asarray(self.vectors, dtype=float).reshape(len(self.weights), -1)
        if self.d < 1 or self.t < 1:
            raise InstanceError(f"oracle needs d >= 1 and t >= 1, got d={self.d}, t={self.t}")
        if len(self.weights) == 0:
            raise InstanceError("oracle without components")
        if self.vectors.shape[1] != self.d:
            raise InstanceError(f"component vectors of length {self.vectors.shape[1]} != d={self.d}")
        if np.any(self.weights <= 0):
            raise InstanceError("component weights must be positive")
        norms = np.linalg.norm(self.vectors, axis=1)
        if np.any(np.abs(norms - 1.0) > UNIT_TOLERANCE):
            raise InstanceError(f"component vectors must be unit (max deviation {np.abs(norms - 1).max():.3e})")
        self.weights = self.weights / self.weights.sum()

    @classmethod
    def single(cls, vector: Sequence[float], t: int) -> "MomentOracle":
        v = np.asarray(vector, dtype=float)
        return cls(len(v), t, np.ones(1), v.reshape(1, -1))

    @property
    def components(self) -> int:
        return len(self.weights)

    def squares(self) -> np.ndarray:
        return self.vectors ** 2

    def to_dict(self) -> Dict[str, Any]:
        return {"d": self.d, "t": self.t,
                "components": [{"w": float(w), "v": v.tolist()} for w, v in zip(self.weights, self.vectors)]}


def load_oracle(data: Dict[str, Any]) -> MomentOracle:
    """Oracle JSON: {"d": .., "t": .., "components": [{"w": .., "v": [..]}]}"""
    try:
        d, t = int(data["d"]), int(data["t"])
        weights = [float(c["w"]) for c in data["components"]]
        vectors = [[float(x) for x in c["v"]] for c in data["components"]]
    except (KeyError, TypeError, ValueError) as e:
        raise InstanceError(f"bad oracle JSON: {e}")
    if any(len(v) != d for v in vectors):
        raise InstanceError(f"every component vector needs length d={d}")
    return MomentOracle(d, t, np.array(weights), np.array(vectors).reshape(len(weights), d))


def random_oracle(d: int, t: int, components: int, rng: np.random.Generator, nonnegative: bool = False) -> MomentOracle:
    vectors = rng.normal(size=(components, d))
    if nonnegative:
        vectors = np.abs(vectors)
    vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
    return MomentOracle(d, t, rng.dirichlet(np.ones(components)), vectors)


def basis_mixture(d: int, t: int, indices: Sequence[int], weights: Sequence[float]) -> MomentOracle:
    """Mixture of standard basis vectors e_i (0-based)"""
    vectors = np.zeros((len(indices), d))
    vectors[np.arange(len(indices)), list(indices)] = 1.0
    return MomentOracle(d, t, np.asarray(weights, dtype=float), vectors)


def pseudo_expectation(oracle: MomentOracle, monomial: Sequence[int]) -> float:
    """
    E~[x_{i_1} ... x_{i_n}] for a multiset of 0-based indices

    The empty monomial has expectation 1.
    """
    idx = list(monomial)
    if any(not 0 <= i < oracle.d for i in idx):
        raise InstanceError(f"monomial index outside [0, {oracle.d})")
    values = np.prod(oracle.vectors[:, idx], axis=1) if idx else np.ones(oracle.components)
    return float(oracle.weights @ values)


def sphere_residual(oracle: MomentOracle, monomial: Sequence[int]) -> float:
    """E~[(||x||^2 - 1) q] for a monomial q; zero for any valid oracle"""
    idx = list(monomial)
    q = np.prod(oracle.vectors[:, idx], axis=1) if idx else np.ones(oracle.components)
    return float(oracle.weights @ ((oracle.squares().sum(axis=1) - 1.0) * q))


def tensor_value(m: PartitionedMatrix, x: Sequence[float]) -> float:
    """Tr M (x x^T)^{(x) t} for M on (R^d)^{(x) t}"""
    x = np.asarray(x, dtype=float)
    if len(set(m.dims)) != 1 or m.dims[0] != len(x):
        raise InstanceError(f"tensor value needs equal dims matching len(x)={len(x)}, got {m.dims}")
    return m.value([x] * m.k)


def expected_value(m: PartitionedMatrix, oracle: MomentOracle) -> float:
    """E~[M(x)] over the oracle's mixture"""
    if m.k != oracle.t:
        raise PreconditionError(f"matrix has {m.k} factors but the oracle has order t={oracle.t}")
    values = np.array([tensor_value(m, v) for v in oracle.vectors])
    logger.debug(f"[SOS] expected value over {oracle.components} components")
    return float(oracle.weights @ values)


def condition(oracle: MomentOracle, indices: Sequence[int]) -> MomentOracle:
    """
    Reweight by the square monomial prod_j x_{i_j}^2

    Component vectors are unchanged; only the weights move.
    """
    idx = list(indices)
    if any(not 0 <= i < oracle.d for i in idx):
        raise InstanceError(f"pinned index outside [0, {oracle.d})")
    factor = np.prod(oracle.squares()[:, idx], axis=1) if idx else np.ones(oracle.components)
    mass = float(oracle.weights @ factor)
    if mass <= 0:
        raise PreconditionError(f"conditioning on {tuple(idx)} has zero mass")
    weights = oracle.weights * factor
    keep = weights > 0
    return MomentOracle(oracle.d, oracle.t, weights[keep] / mass, oracle.vectors[keep])
