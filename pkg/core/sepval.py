"""
Stoquastic Separable Values
Brute-force and alternating hsep oracles, shift identity, multiplicativity, Perron route
"""

import itertools
import math
import string
from dataclasses import dataclass, field
from functools import reduce
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from loguru import logger
from scipy import linalg

from core.errors import CapExceededError, InstanceError, PreconditionError

BRUTE_DIMENSION_CAP = 256
BRUTE_CANDIDATE_CAP = 200_000
EIGEN_TOLERANCE = 1e-9


@dataclass
class PartitionedMatrix:
    """
    Real symmetric matrix on C^{d1} (x) ... (x) C^{dk}; factor 0 is the most
    significant index, matching np.kron ordering.
    """
    dims: List[int]
    entries: np.ndarray
    factors: Optional[List[np.ndarray]] = None
    nonnegative: bool = field(init=False)
    psd: bool = field(init=False)
    product_form: bool = field(init=False)

    def __post_init__(self):
        self.dims = [int(d) for d in self.dims]
        self.entries = np.asarray(self.entries, dtype=float)
        size = int(np.prod(self.dims))
        if self.entries.shape != (size, size):
            raise InstanceError(f"matrix shape {self.entries.shape} does not match dims {self.dims}")
        if not np.allclose(self.entries, self.entries.T, atol=1e-12):
            raise InstanceError("partitioned matrix must be symmetric")
        self.nonnegative = bool(np.all(self.entries >= 0))
        self.psd = bool(np.linalg.eigvalsh(self.entries).min() >= -EIGEN_TOLERANCE) if size else True
        self.product_form = False
        if self.factors is not None:
            self.factors = [np.asarray(f, dtype=float) for f in self.factors]
            if [f.shape[0] for f in self.factors] != self.dims:
                raise InstanceError("factor shapes do not match dims")
            self.product_form = bool(np.allclose(reduce(np.kron, self.factors), self.entries, atol=1e-12))

    @property
    def k(self) -> int:
        return len(self.dims)

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def norm(self) -> float:
        return float(np.abs(np.linalg.eigvalsh(self.entries)).max())

    def value(self, factors: Sequence[np.ndarray]) -> float:
        vec = reduce(np.kron, factors)
        return float(vec @ self.entries @ vec)

    def to_dict(self) -> Dict[str, Any]:
        data = {"dims": self.dims, "entries": self.entries.tolist(),
                "flags": {"nonnegative": self.nonnegative, "psd": self.psd, "product_form": self.product_form}}
        if self.factors is not None:
            data["factors"] = [f.tolist() for f in self.factors]
        return data


def load_matrix(data: Dict[str, Any]) -> PartitionedMatrix:
    """Matrix JSON: {"dims": [...], "entries": row-major rows or flat list, "factors": optional}"""
    try:
        dims = [int(d) for d in data["dims"]]
        entries = np.asarray(data["entries"], dtype=float)
    except (KeyError, TypeError, ValueError) as e:
        raise InstanceError(f"bad matrix JSON: {e}")
    size = int(np.prod(dims))
    if entries.ndim == 1:
        if entries.size != size * size:
            raise InstanceError(f"flat entries of length {entries.size} do not fit dims {dims}")
        entries = entries.reshape(size, size)
    factors = data.get("factors")
    matrix = PartitionedMatrix(dims, entries, [np.asarray(f, dtype=float) for f in factors] if factors else None)
    flags = data.get("flags", {})
    for name, claimed in flags.items():
        actual = getattr(matrix, name, None)
        if actual is not None and bool(claimed) != actual:
            raise InstanceError(f"matrix flag {name}={claimed} does not hold")
    return matrix


@dataclass
class HsepResult:
    """Lower bound on hsep with the witness achieving it"""
    value: float
    factors: List[np.ndarray]
    error_bound: float = 0.0
    method: str = "alternating"

    def to_dict(self) -> Dict[str, Any]:
        return {"value": self.value, "error_bound": self.error_bound, "method": self.method,
                "witness": [f.tolist() for f in self.factors]}


@dataclass
class PerronResult:
    value: float
    vector: np.ndarray
    residual: float
    iterations: int
    converged: bool


def lambda_max_nonneg(matrix: np.ndarray, tolerance: float = 1e-10, max_iter: int = 100_000) -> PerronResult:
    """
    Largest eigenvalue of an entrywise non-negative matrix by power iteration

    The iteration starts from the all-ones vector and runs on A + alpha*I so
    the Perron root strictly dominates. Symmetric inputs fall back to a dense
    eigensolver when the iteration cap is hit; the result is then flagged as
    not converged.
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InstanceError(f"square matrix required, got shape {a.shape}")
    if np.any(a < 0):
        raise PreconditionError("lambda_max_nonneg needs an entrywise non-negative matrix")
    n = a.shape[0]
    alpha = 0.5 * max(1e-3, float(a.sum(axis=1).max()))
    x = np.ones(n) / math.sqrt(n)
    value, residual = 0.0, math.inf
    for iteration in range(1, max_iter + 1):
        ax = a @ x
        value = float(x @ ax)
        residual = float(np.linalg.norm(ax - value * x))
        if residual <= tolerance:
            return PerronResult(value, x, residual, iteration, True)
        y = ax + alpha * x
        norm = np.linalg.norm(y)
        if norm == 0:
            return PerronResult(0.0, x, 0.0, iteration, True)
        x = y / norm

    logger.warning(f"[Perron] power iteration stopped after {max_iter} steps, residual {residual:.3e}")
    if np.allclose(a, a.T):
        w, v = linalg.eigh(a)
        x = np.abs(v[:, -1])
        value = float(w[-1])
        residual = float(np.linalg.norm(a @ x - value * x))
    return PerronResult(value, x, residual, max_iter, False)


def _top_eigen(a: np.ndarray, nonneg: bool):
    w, v = np.linalg.eigh(a)
    vec = v[:, -1]
    if nonneg:
        vec = np.abs(vec)
    return float(w[-1]), vec


def _einsum_effective(m: PartitionedMatrix, factors: Sequence[np.ndarray], i: int) -> np.ndarray:
    """Matrix on factor i with every other factor contracted on both sides"""
    k = m.k
    rows = string.ascii_lowercase[:k]
    cols = string.ascii_uppercase[:k]
    tensor = m.entries.reshape(m.dims + m.dims)
    operands = [tensor]
    specs = [rows + cols]
    for j in range(k):
        if j != i:
            operands += [factors[j], factors[j]]
            specs += [rows[j], cols[j]]
    return np.einsum(",".join(specs) + "->" + rows[i] + cols[i], *operands)


def _ascend(m: PartitionedMatrix, factors: List[np.ndarray], iters: int, nonneg: bool,
            tolerance: float = 1e-13) -> float:
    value = m.value(factors)
    for _ in range(iters):
        for i in range(m.k):
            _, factors[i] = _top_eigen(_einsum_effective(m, factors, i), nonneg)
        new_value = m.value(factors)
        if new_value <= value + tolerance:
            value = max(value, new_value)
            break
        value = new_value
    return value


def _angle_grid(points: int, signed: bool) -> np.ndarray:
    span = math.pi if signed else math.pi / 2
    thetas = np.linspace(0.0, span, points, endpoint=not signed)
    return np.stack([np.cos(thetas), np.sin(thetas)], axis=1)


def _simplex_grid(d: int, resolution: int) -> np.ndarray:
    points = []
    for bars in itertools.combinations(range(resolution + d - 1), d - 1):
        prev, counts = -1, []
        for bar in bars:
            counts.append(bar - prev - 1)
            prev = bar
        counts.append(resolution + d - 2 - prev)
        points.append(counts)
    return np.sqrt(np.asarray(points, dtype=float) / resolution)


def _factor_grid(d: int, grid: int, lattice: int, budget: int, signed: bool):
    """Candidate unit vectors for one factor and the covering radius of the set"""
    if d == 1:
        return np.ones((1, 1)), 0.0
    if d == 2:
        points = max(2, min(grid, budget))
        step = (math.pi if signed else math.pi / 2) / (points - 1)
        return _angle_grid(points, signed), step / 2
    resolution = lattice
    while resolution > 1 and math.comb(resolution + d - 1, d - 1) > budget:
        resolution -= 1
    cands = _simplex_grid(d, resolution)
    if signed:
        signs = np.array(list(itertools.product([1.0, -1.0], repeat=d)))
        if len(cands) * len(signs) <= budget:
            cands = (cands[:, None, :] * signs[None, :, :]).reshape(-1, d)
    return cands, math.sqrt(d / resolution)


def hsep_bruteforce(m: PartitionedMatrix, grid: int = 64, lattice: int = 40, signed: bool = False,
                    polish: int = 5, ascent_iters: int = 200) -> HsepResult:
    """
    Grid search over product unit vectors, polished by alternating ascent

    Every factor but the last is drawn from a grid; the last is optimised
    exactly through the top eigenvector of the induced matrix.

    Args:
        m: Matrix with prod(dims) <= 256 and k <= 3
        grid: Angles per 2-dimensional factor
        lattice: Simplex lattice resolution for larger factors
        signed: Search signed vectors instead of non-negative ones
        polish: Number of best grid cells refined by ascent

    Returns:
        HsepResult whose value is attained by the returned witness
    """
    if m.size > BRUTE_DIMENSION_CAP or m.k > 3:
        raise CapExceededError(f"brute force needs prod(dims) <= {BRUTE_DIMENSION_CAP} and k <= 3, got {m.dims}")
    nonneg = m.nonnegative and not signed
    if m.k == 1:
        value, vec = _top_eigen(m.entries, nonneg)
        return HsepResult(value, [vec], 0.0, "eigen")

    head = m.dims[:-1]
    budget = int(BRUTE_CANDIDATE_CAP ** (1.0 / len(head)))
    grids, steps = zip(*[_factor_grid(d, grid, lattice, budget, signed) for d in head])
    last = m.dims[-1]
    rest = int(np.prod(head))
    m4 = m.entries.reshape(rest, last, rest, last)

    combos = list(itertools.product(*[range(len(g)) for g in grids]))
    best = []
    for start in range(0, len(combos), 4096):
        chunk = combos[start:start + 4096]
        u = np.stack([reduce(np.kron, [grids[f][idx] for f, idx in enumerate(c)]) for c in chunk])
        eff = np.einsum("gi,iajb,gj->gab", u, m4, u, optimize=True)
        eff = 0.5 * (eff + eff.transpose(0, 2, 1))
        vals = np.linalg.eigvalsh(eff)[:, -1]
        order = np.argsort(-vals)[:polish]
        best.extend((float(vals[o]), chunk[o]) for o in order)
    best.sort(key=lambda item: -item[0])

    result = None
    for _, combo in best[:polish]:
        factors = [grids[f][idx].copy() for f, idx in enumerate(combo)]
        factors.append(np.ones(last) / math.sqrt(last))
        _, factors[-1] = _top_eigen(_einsum_effective(m, factors, m.k - 1), nonneg)
        value = _ascend(m, factors, ascent_iters, nonneg)
        if result is None or value > result.value:
            result = HsepResult(value, factors, 0.0, "bruteforce")

    result.error_bound = 2.0 * m.norm() * float(sum(steps))
    logger.debug(f"[hsep] brute force dims={m.dims} value={result.value:.10f} err<={result.error_bound:.3e}")
    return result


def hsep_alternating(m: PartitionedMatrix, restarts: int = 20, iters: int = 500, seed: int = 0,
                     signed: bool = False) -> HsepResult:
    """Best of several alternating Perron ascents from uniform and random starts"""
    if not m.nonnegative and not signed:
        raise PreconditionError("hsep_alternating needs an entrywise non-negative matrix")
    rng = np.random.default_rng(seed)
    nonneg = not signed
    best: Optional[HsepResult] = None
    for restart in range(max(1, restarts)):
        if restart == 0:
            factors = [np.ones(d) / math.sqrt(d) for d in m.dims]
        else:
            raw = [rng.random(d) if nonneg else rng.standard_normal(d) for d in m.dims]
            factors = [r / np.linalg.norm(r) for r in raw]
        value = _ascend(m, factors, iters, nonneg)
        if best is None or value > best.value:
            best = HsepResult(value, [f.copy() for f in factors], 0.0, "alternating")
    return best


def hsep(m: PartitionedMatrix, seed: int = 0, grid: int = 64, lattice: int = 40, restarts: int = 20) -> HsepResult:
    """Best available lower bound: brute force when in range, else alternating ascent"""
    candidates = []
    if m.nonnegative:
        candidates.append(hsep_alternating(m, restarts=restarts, seed=seed))
    if m.size <= BRUTE_DIMENSION_CAP and m.k <= 3:
        candidates.append(hsep_bruteforce(m, grid=grid, lattice=lattice))
    if not candidates:
        raise CapExceededError(f"no hsep oracle for dims {m.dims} with negative entries")
    return max(candidates, key=lambda r: r.value)


def hsep_shift_check(m: PartitionedMatrix, a: float, b: float, tolerance: float = 1e-6, seed: int = 0) -> Dict[str, Any]:
    """Checks hsep(aM + bI) = a hsep(M) + b for a, b >= 0"""
    if a < 0 or b < 0:
        raise PreconditionError("shift check needs a >= 0 and b >= 0")
    shifted = PartitionedMatrix(m.dims, a * m.entries + b * np.eye(m.size))
    lhs = hsep(shifted, seed=seed).value
    rhs = a * hsep(m, seed=seed).value + b
    passed = abs(lhs - rhs) <= tolerance
    return {"a": a, "b": b, "lhs": lhs, "rhs": rhs, "difference": lhs - rhs, "tolerance": tolerance, "passed": passed}


def tensor_partitioned(m1: PartitionedMatrix, m2: PartitionedMatrix) -> PartitionedMatrix:
    """M (x) M' regrouped so party i holds C^{d_i} (x) C^{d'_i}"""
    if m1.k != m2.k:
        raise InstanceError(f"party counts differ: {m1.k} vs {m2.k}")
    k = m1.k
    big = np.kron(m1.entries, m2.entries).reshape(m1.dims + m2.dims + m1.dims + m2.dims)
    row_axes = [ax for i in range(k) for ax in (i, k + i)]
    col_axes = [2 * k + ax for ax in row_axes]
    dims = [d1 * d2 for d1, d2 in zip(m1.dims, m2.dims)]
    size = int(np.prod(dims))
    entries = big.transpose(row_axes + col_axes).reshape(size, size)
    factors = None
    if m1.product_form and m2.product_form:
        factors = [np.kron(f1, f2) for f1, f2 in zip(m1.factors, m2.factors)]
    return PartitionedMatrix(dims, entries, factors)


@dataclass
class MultiplicativityReport:
    lhs: float
    rhs: float
    tolerance: float
    verdict: str
    qualifies: bool

    def to_dict(self) -> Dict[str, Any]:
        return {"lhs": self.lhs, "rhs": self.rhs, "tolerance": self.tolerance,
                "verdict": self.verdict, "qualifies": self.qualifies}


def check_multiplicativity(m1: PartitionedMatrix, m2: PartitionedMatrix, tolerance: float = 1e-4,
                           seed: int = 0) -> MultiplicativityReport:
    """
    Compare hsep(M (x) M') with hsep(M) hsep(M')

    Pairs that are both PSD or both product-form must come out EQUAL; a
    qualifying pair that does not is a VIOLATION. Other pairs report EXCESS
    when the tensor value strictly exceeds the product.
    """
    if not (m1.nonnegative and m2.nonnegative):
        raise PreconditionError("multiplicativity check needs entrywise non-negative matrices")
    joint = tensor_partitioned(m1, m2)
    lhs = hsep(joint, seed=seed).value
    rhs = hsep(m1, seed=seed).value * hsep(m2, seed=seed).value
    qualifies = (m1.psd and m2.psd) or (m1.product_form and m2.product_form)
    if abs(lhs - rhs) <= tolerance:
        verdict = "EQUAL"
    elif qualifies:
        verdict = "VIOLATION"
        logger.error(f"[Multiplicativity] qualifying pair differs: lhs={lhs:.8f} rhs={rhs:.8f}")
    elif lhs > rhs:
        verdict = "EXCESS"
    else:
        verdict = "DEFICIT"
    return MultiplicativityReport(lhs, rhs, tolerance, verdict, qualifies)


def product_form_value(m: PartitionedMatrix) -> float:
    """prod_i lambda_max(M_i) for a product-form matrix"""
    if not m.product_form:
        raise PreconditionError("matrix has no verified product form")
    return float(np.prod([lambda_max_nonneg(f).value for f in m.factors]))


def remark_matrix() -> PartitionedMatrix:
    """|00><11| + |11><00| on two qubits"""
    entries = np.zeros((4, 4))
    entries[0, 3] = entries[3, 0] = 1.0
    return PartitionedMatrix([2, 2], entries)
