"""
Constraint-Graph Instances
GapCG instances, labelings and the branch distribution a witness induces over vertex-label pairs
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

from loguru import logger

from core.arith import ArithmeticMode, Scalar, parse_mode, sqrt, to_scalar
from core.errors import InstanceError, PreconditionError
from core.states import Distribution, NonNegativeState

Pair = Tuple[int, int]


@dataclass(frozen=True)
class GapCGInstance:
    """
    Constraint graph on vertices 0..n-1 over the alphabet 0..Q-1

    relations[(u, v)] holds the allowed (a, b) label pairs for u < v; the
    reverse orientation is the transpose.
    """
    vertices: int
    degree: int
    alphabet: int
    relations: Dict[Pair, FrozenSet[Pair]]
    eta: Fraction = Fraction(0)
    name: str = "instance"

    def __post_init__(self):
        if self.vertices < 1 or self.alphabet < 1 or self.degree < 0:
            raise InstanceError(f"invalid instance shape n={self.vertices}, d={self.degree}, Q={self.alphabet}")
        object.__setattr__(self, "eta", Fraction(self.eta).limit_denominator(1 << 40))
        normalized: Dict[Pair, FrozenSet[Pair]] = {}
        for (u, v), relation in self.relations.items():
            if not (0 <= u < self.vertices and 0 <= v < self.vertices):
                raise InstanceError(f"edge ({u}, {v}) outside {self.vertices} vertices")
            if u == v:
                raise InstanceError(f"self-loop on {u}; padding loops are implicit")
            pairs = frozenset((int(a), int(b)) for a, b in relation)
            if any(not (0 <= a < self.alphabet and 0 <= b < self.alphabet) for a, b in pairs):
                raise InstanceError(f"relation on ({u}, {v}) uses labels outside alphabet {self.alphabet}")
            key, pairs = ((u, v), pairs) if u < v else ((v, u), frozenset((b, a) for a, b in pairs))
            if key in normalized and normalized[key] != pairs:
                raise InstanceError(f"edge {key} listed twice with different relations")
            normalized[key] = pairs
        object.__setattr__(self, "relations", normalized)
        degrees = [0] * self.vertices
        for u, v in normalized:
            degrees[u] += 1
            degrees[v] += 1
        if max(degrees) > self.degree:
            raise InstanceError(f"vertex degree {max(degrees)} exceeds the declared degree {self.degree}")

    @property
    def n(self) -> int:
        return self.vertices

    @property
    def edges(self) -> List[Pair]:
        return sorted(self.relations)

    def is_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.relations

    def allows(self, u: int, a: int, v: int, b: int) -> bool:
        """(a, b) in R_uv in the orientation given; non-edges allow everything"""
        if u < v:
            rel = self.relations.get((u, v))
            return rel is None or (a, b) in rel
        rel = self.relations.get((v, u))
        return rel is None or (b, a) in rel

    def violated_edge(self, labeling: Sequence[int]) -> Optional[Pair]:
        if len(labeling) != self.vertices:
            raise InstanceError(f"labeling covers {len(labeling)} of {self.vertices} vertices")
        for u, v in self.edges:
            if (labeling[u], labeling[v]) not in self.relations[(u, v)]:
                return (u, v)
        return None

    def pairs(self) -> List[Pair]:
        """All (vertex, label) pairs in index order"""
        return [(v, a) for v in range(self.vertices) for a in range(self.alphabet)]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "vertices": self.vertices, "degree": self.degree, "alphabet": self.alphabet, "eta": str(self.eta),
            "edges": [{"u": u, "v": v, "relation": sorted(list(p) for p in self.relations[(u, v)])}
                      for u, v in self.edges],
        }


def load_instance(data: Mapping[str, Any], name: str = "instance") -> GapCGInstance:
    """Parse GapCG JSON"""
    try:
        relations: Dict[Pair, List[Pair]] = {}
        for edge in data.get("edges", []):
            relations[(int(edge["u"]), int(edge["v"]))] = [tuple(p) for p in edge["relation"]]
        return GapCGInstance(int(data["vertices"]), int(data["degree"]), int(data["alphabet"]),
                             relations, Fraction(str(data.get("eta", 0))), name)
    except (KeyError, TypeError, ValueError) as e:
        raise InstanceError(f"malformed GapCG instance: {e}")


def _all_pairs(q: int, keep) -> FrozenSet[Pair]:
    return frozenset((a, b) for a in range(q) for b in range(q) if keep(a, b))


def equality_instance(edges: Iterable[Pair], n: int, q: int, eta: Any = 0, name: str = "equality") -> GapCGInstance:
    edges = list(edges)
    degree = max([sum(1 for e in edges if v in e) for v in range(n)] + [0])
    return GapCGInstance(n, degree, q, {e: _all_pairs(q, lambda a, b: a == b) for e in edges}, Fraction(eta), name)


def disequality_instance(edges: Iterable[Pair], n: int, q: int, eta: Any = 0,
                         name: str = "disequality") -> GapCGInstance:
    edges = list(edges)
    degree = max([sum(1 for e in edges if v in e) for v in range(n)] + [0])
    return GapCGInstance(n, degree, q, {e: _all_pairs(q, lambda a, b: a != b) for e in edges}, Fraction(eta), name)


def triangle(q: int = 2, equal: bool = True, eta: Any = 0) -> GapCGInstance:
    edges = [(0, 1), (1, 2), (0, 2)]
    if equal:
        return equality_instance(edges, 3, q, eta, "triangle-eq")
    return disequality_instance(edges, 3, q, eta, "triangle-neq")


def path(n: int, q: int = 2) -> GapCGInstance:
    return equality_instance([(i, i + 1) for i in range(n - 1)], n, q, 0, f"path-{n}")


@dataclass(frozen=True)
class BranchDistribution:
    """
    Distribution p over (vertex, label) pairs read off a one-copy witness

    Derived quantities follow the soundness analysis: vertex marginal q,
    conditional label law r_v, plurality label and its ambiguity b_v.
    """
    instance: GapCGInstance
    p: Dict[Pair, Scalar]
    mode: ArithmeticMode = ArithmeticMode.RATIONAL

    def __post_init__(self):
        cleaned = {}
        for (v, a), weight in self.p.items():
            if not (0 <= v < self.instance.vertices and 0 <= a < self.instance.alphabet):
                raise InstanceError(f"pair ({v}, {a}) outside the instance")
            weight = to_scalar(weight, self.mode)
            if float(weight) < 0:
                raise InstanceError(f"negative weight on ({v}, {a})")
            if weight != 0:
                cleaned[(int(v), int(a))] = weight
        total = sum(cleaned.values())
        if abs(float(total) - 1.0) > 1e-9:
            raise InstanceError(f"branch distribution sums to {total}")
        object.__setattr__(self, "p", dict(sorted(cleaned.items())))

    @property
    def delta(self) -> Fraction:
        return self.instance.eta / 48

    @property
    def kappa(self) -> Fraction:
        return self.instance.eta / 64

    def weight(self, v: int, a: int) -> Scalar:
        return self.p.get((v, a), to_scalar(0, self.mode))

    def marginal(self) -> Dict[int, Scalar]:
        q: Dict[int, Scalar] = {}
        for (v, _), weight in self.p.items():
            q[v] = q.get(v, to_scalar(0, self.mode)) + weight
        return q

    def conditional(self, v: int) -> Dict[int, Scalar]:
        mass = self.marginal().get(v)
        if mass is None:
            raise PreconditionError(f"vertex {v} has zero marginal mass")
        return {a: w / mass for (u, a), w in self.p.items() if u == v}

    def plurality(self, v: int) -> int:
        r = self.conditional(v)
        return min(r, key=lambda a: (-float(r[a]), a))

    def ambiguity(self, v: int) -> Scalar:
        r = self.conditional(v)
        return 1 - r[self.plurality(v)]

    def vector(self) -> List[float]:
        return [float(self.weight(v, a)) for v, a in self.instance.pairs()]

    def as_distribution(self) -> Distribution:
        return Distribution(dict(self.p))

    def to_dict(self) -> Dict[str, Any]:
        return {f"{v},{a}": str(w) for (v, a), w in self.p.items()}

    @classmethod
    def honest(cls, instance: GapCGInstance, labeling: Sequence[int]) -> "BranchDistribution":
        weight = Fraction(1, instance.vertices)
        return cls(instance, {(v, labeling[v]): weight for v in range(instance.vertices)})

    @classmethod
    def uniform(cls, instance: GapCGInstance) -> "BranchDistribution":
        weight = Fraction(1, instance.vertices * instance.alphabet)
        return cls(instance, {pair: weight for pair in instance.pairs()})

    @classmethod
    def point(cls, instance: GapCGInstance, v: int, a: int) -> "BranchDistribution":
        return cls(instance, {(v, a): 1})

    @classmethod
    def from_vector(cls, instance: GapCGInstance, vector: Sequence[float]) -> "BranchDistribution":
        pairs = instance.pairs()
        if len(vector) != len(pairs):
            raise InstanceError(f"vector of length {len(vector)} for {len(pairs)} pairs")
        total = float(sum(vector))
        return cls(instance, {pair: float(w) / total for pair, w in zip(pairs, vector) if w > 0},
                   ArithmeticMode.FLOAT)


def register_widths(instance: GapCGInstance) -> Tuple[int, int]:
    """Qubits for the vertex and the label fields of one (v, a) register"""
    return max(0, (instance.vertices - 1).bit_length()), max(0, (instance.alphabet - 1).bit_length())


def encode(instance: GapCGInstance, v: int, a: int) -> int:
    vertex_bits, _ = register_widths(instance)
    return v | (a << vertex_bits)


def decode(instance: GapCGInstance, code: int) -> Optional[Pair]:
    """(v, a) for a valid register value, None for codes outside V x Sigma"""
    vertex_bits, _ = register_widths(instance)
    v, a = code & ((1 << vertex_bits) - 1), code >> vertex_bits
    if v >= instance.vertices or a >= instance.alphabet:
        return None
    return v, a


def branch_state(dist: BranchDistribution, mode: Optional[ArithmeticMode] = None) -> NonNegativeState:
    """sum sqrt(p(v, a)) |v, a> on one prover register"""
    mode = dist.mode if mode is None else parse_mode(mode)
    vertex_bits, label_bits = register_widths(dist.instance)
    amps = {encode(dist.instance, v, a): sqrt(to_scalar(w, mode), mode) for (v, a), w in dist.p.items()}
    return NonNegativeState(vertex_bits + label_bits, amps, mode)


def honest_witness(instance: GapCGInstance, labeling: Sequence[int],
                   mode: ArithmeticMode = ArithmeticMode.RATIONAL) -> NonNegativeState:
    """
    Subset state uniform over {(v, labeling[v])}

    Raises:
        PreconditionError: the labeling violates an edge, which is named
    """
    edge = instance.violated_edge(labeling)
    if edge is not None:
        u, v = edge
        raise PreconditionError(f"labeling violates edge ({u}, {v}) with labels "
                                f"({labeling[u]}, {labeling[v]})")
    witness = branch_state(BranchDistribution.honest(instance, labeling), mode)
    logger.debug(f"[NP] honest witness for {instance.name}: support {len(witness.amplitudes)}")
    return witness
