"""
CleanCC Instances
Padded neighbor tables, marking bits, return indices and the Gamma involution
"""

import itertools
from dataclasses import dataclass
from typing import Any, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from loguru import logger

from core.arith import ArithmeticMode, Scalar, parse_mode, sqrt, to_scalar, total
from core.errors import CapExceededError, InstanceError, PreconditionError
from core.states import NonNegativeState
from protocols.common import ceil_log2

LABELED_VERTEX_CAP = 4


@dataclass(frozen=True)
class CleanCcInstance:
    """
    Graph on 2^n vertices given by padded neighbor lists and marking bits

    Slot j of vertex v holds its j-th neighbor; every true neighbor appears
    exactly once and the remaining slots hold v itself.
    """
    n: int
    dG: int
    neighbors: Tuple[Tuple[int, ...], ...]
    marked: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "neighbors", tuple(tuple(int(u) for u in row) for row in self.neighbors))
        object.__setattr__(self, "marked", tuple(int(m) for m in self.marked))
        if self.n < 1 or self.dG < 0:
            raise InstanceError(f"CleanCC needs n >= 1 and dG >= 0, got n={self.n}, dG={self.dG}")
        size = self.size
        if len(self.neighbors) != size or len(self.marked) != size:
            raise InstanceError(f"CleanCC tables must cover all {size} vertices")
        if any(m not in (0, 1) for m in self.marked):
            raise InstanceError("marking bits must be 0 or 1")
        adjacency = {}
        for v, row in enumerate(self.neighbors):
            if len(row) != self.dG:
                raise InstanceError(f"vertex {v} has {len(row)} slots, expected dG={self.dG}")
            if any(not 0 <= u < size for u in row):
                raise InstanceError(f"vertex {v} lists a neighbor outside [0, {size})")
            true = [u for u in row if u != v]
            if len(true) != len(set(true)):
                raise InstanceError(f"vertex {v} lists a neighbor more than once")
            adjacency[v] = set(true)
        for v, nbrs in adjacency.items():
            for u in nbrs:
                if v not in adjacency[u]:
                    raise InstanceError(f"neighbor relation not symmetric on ({v}, {u})")

    @property
    def size(self) -> int:
        return 1 << self.n

    @property
    def q(self) -> int:
        """Branch-register width ceil(log2(dG + 1))"""
        return ceil_log2(self.dG + 1)

    @property
    def J(self) -> int:
        return 1 << self.q

    def neighbor(self, v: int, j: int) -> int:
        return self.neighbors[v][j]

    def edges(self) -> List[Tuple[int, int]]:
        return sorted({(min(v, u), max(v, u)) for v, row in enumerate(self.neighbors) for u in row if u != v})

    def degree(self, v: int) -> int:
        return sum(1 for u in self.neighbors[v] if u != v)

    def graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.size))
        g.add_edges_from(self.edges())
        return g

    def components(self) -> List[List[int]]:
        return sorted(sorted(c) for c in nx.connected_components(self.graph()))

    def clean_component(self) -> Optional[List[int]]:
        """First connected component without a marked vertex, if any"""
        for component in self.components():
            if not any(self.marked[v] for v in component):
                return component
        return None

    @property
    def is_yes(self) -> bool:
        return self.clean_component() is not None

    def to_dict(self) -> Dict[str, Any]:
        return {"n": self.n, "dG": self.dG, "neighbors": [list(r) for r in self.neighbors],
                "marked": list(self.marked)}


def load_cleancc(data: Dict[str, Any]) -> CleanCcInstance:
    """CleanCC JSON: {"n": .., "dG": .., "neighbors": [[...]], "marked": [...]}"""
    try:
        return CleanCcInstance(int(data["n"]), int(data["dG"]), tuple(tuple(r) for r in data["neighbors"]),
                               tuple(data["marked"]))
    except (KeyError, TypeError, ValueError) as e:
        raise InstanceError(f"bad CleanCC JSON: {e}")


def from_edges(n: int, dG: int, edges: Iterable[Tuple[int, int]], marked: Iterable[int] = ()) -> CleanCcInstance:
    """Neighbor lists in increasing order, self-loop padded, from an edge list and marked vertices"""
    size = 1 << n
    adjacency: Dict[int, set] = {v: set() for v in range(size)}
    for u, v in edges:
        if u == v:
            raise InstanceError(f"edge list contains the self-loop ({u}, {v})")
        if not (0 <= u < size and 0 <= v < size):
            raise InstanceError(f"edge ({u}, {v}) outside [0, {size})")
        adjacency[u].add(v)
        adjacency[v].add(u)
    rows = []
    for v in range(size):
        nbrs = sorted(adjacency[v])
        if len(nbrs) > dG:
            raise InstanceError(f"vertex {v} has degree {len(nbrs)} > dG={dG}")
        rows.append(tuple(nbrs) + (v,) * (dG - len(nbrs)))
    marks = set(marked)
    return CleanCcInstance(n, dG, tuple(rows), tuple(int(v in marks) for v in range(size)))


def return_index(instance: CleanCcInstance, v: int, j: int) -> int:
    """The unique j' with neighbor(neighbor(v, j), j') = v; j itself on padded self-loops"""
    if not 0 <= j < instance.dG:
        raise PreconditionError(f"slot {j} outside [0, {instance.dG})")
    u = instance.neighbor(v, j)
    if u == v:
        return j
    hits = [jj for jj, w in enumerate(instance.neighbors[u]) if w == v]
    if len(hits) != 1:
        raise InstanceError(f"vertex {u} lists {v} {len(hits)} times")
    return hits[0]


def step(instance: CleanCcInstance, j: int, v: int) -> Tuple[int, int]:
    """(j, v) -> (return index, neighbor) on edge slots, identity elsewhere"""
    if j < instance.dG:
        return return_index(instance, v, j), instance.neighbor(v, j)
    return j, v


def encode(instance: CleanCcInstance, j: int, v: int, c: int) -> int:
    return j | (v << instance.q) | (c << (instance.q + instance.n))


def build_gamma(instance: CleanCcInstance) -> np.ndarray:
    """
    Gamma on (j, v, c) as a permutation table

    Index bits: j in [0, q), v in [q, q+n), c at q+n. Edge branches move
    (j, v), the branch j = dG flips c on marked vertices and the rest are
    identities. Raises InstanceError unless the table is an involution.
    """
    table = np.empty(instance.J * instance.size * 2, dtype=np.int64)
    for j in range(instance.J):
        for v in range(instance.size):
            for c in (0, 1):
                if j < instance.dG:
                    j2, v2 = step(instance, j, v)
                    c2 = c
                elif j == instance.dG:
                    j2, v2, c2 = j, v, c ^ instance.marked[v]
                else:
                    j2, v2, c2 = j, v, c
                table[encode(instance, j, v, c)] = encode(instance, j2, v2, c2)
    if len(np.unique(table)) != len(table) or not np.array_equal(table[table], np.arange(len(table))):
        raise InstanceError("Gamma is not an involution; the neighbor table is malformed")
    return table


@dataclass(frozen=True)
class CleanCcWitness:
    """Non-negative amplitudes alpha over the 2^n vertices"""
    alpha: Tuple[Scalar, ...]
    mode: ArithmeticMode = ArithmeticMode.FLOAT

    def __post_init__(self):
        alpha = tuple(to_scalar(a, self.mode) for a in self.alpha)
        if any(float(a) < 0 for a in alpha):
            raise InstanceError("witness amplitudes must be non-negative")
        norm = sum(float(a) ** 2 for a in alpha)
        if abs(norm - 1.0) > 1e-9:
            raise InstanceError(f"witness has squared norm {norm:.12g}")
        object.__setattr__(self, "alpha", alpha)

    @classmethod
    def subset(cls, size: int, support: Sequence[int], mode: Any = None) -> "CleanCcWitness":
        mode = parse_mode(mode)
        amp = to_scalar(1, mode) / sqrt(to_scalar(len(support), mode), mode)
        members = set(support)
        return cls(tuple(amp if v in members else to_scalar(0, mode) for v in range(size)), mode)

    @classmethod
    def from_vector(cls, vector: Sequence[float]) -> "CleanCcWitness":
        vec = np.abs(np.asarray(vector, dtype=float))
        return cls(tuple(vec / np.linalg.norm(vec)), ArithmeticMode.FLOAT)

    def state(self, n: int) -> NonNegativeState:
        return NonNegativeState(n, {v: a for v, a in enumerate(self.alpha) if a != 0}, self.mode)

    def norm_squared(self) -> Scalar:
        return total((a * a for a in self.alpha), self.mode)


def connected_catalog(max_vertices: int, dG: int) -> List[nx.Graph]:
    """
    Connected graphs of max degree <= dG on 1..max_vertices vertices, one per isomorphism class

    Each graph on m vertices arises from one on m-1 vertices by attaching a
    new vertex to a non-empty set of vertices with spare degree.
    """
    levels = [[nx.empty_graph(1)]]
    for m in range(2, max_vertices + 1):
        found: Dict[str, List[nx.Graph]] = {}
        for g in levels[-1]:
            spare = [v for v in g if g.degree(v) < dG]
            for size in range(1, min(dG, len(spare)) + 1):
                for attach in itertools.combinations(spare, size):
                    h = g.copy()
                    h.add_edges_from((m - 1, v) for v in attach)
                    key = nx.weisfeiler_lehman_graph_hash(h)
                    bucket = found.setdefault(key, [])
                    if not any(nx.is_isomorphic(h, other) for other in bucket):
                        bucket.append(h)
        levels.append([g for bucket in found.values() for g in bucket])
        logger.debug(f"[CleanCC] {len(levels[-1])} connected classes on {m} vertices (dG={dG})")
    return [g for level in levels for g in level]


def labeled_instances(n: int, dG: int) -> Iterator[CleanCcInstance]:
    """Every instance on 2^n vertices: all edge sets of max degree <= dG with all markings"""
    size = 1 << n
    if size > LABELED_VERTEX_CAP:
        raise CapExceededError(f"labeled enumeration runs at 2^n <= {LABELED_VERTEX_CAP}")
    pairs = list(itertools.combinations(range(size), 2))
    for mask in range(1 << len(pairs)):
        edges = [p for b, p in enumerate(pairs) if mask >> b & 1]
        degrees = [0] * size
        for u, v in edges:
            degrees[u] += 1
            degrees[v] += 1
        if max(degrees) > dG:
            continue
        for marks in range(1 << size):
            yield from_edges(n, dG, edges, [v for v in range(size) if marks >> v & 1])
