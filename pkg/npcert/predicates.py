"""
Branch Predicates
Collision-based uniformity test and pairwise consistency checks on sampled (vertex, label) branches
"""

from collections import Counter
from fractions import Fraction
from typing import Any, Dict, Iterable, Optional, Sequence, Tuple

from npcert.instance import GapCGInstance, Pair

DEFAULT_UNIFORMITY_DELTA = Fraction(1, 2)


def collision_count(samples: Iterable[Any]) -> int:
    """Number of unordered index pairs i < j with equal samples"""
    return sum(c * (c - 1) // 2 for c in Counter(samples).values())


def paninski_threshold(k: int, n: int, delta: Any = DEFAULT_UNIFORMITY_DELTA) -> Fraction:
    """Colliding-pair budget (K(K-1) / 2n)(1 + delta^2 / 2)"""
    delta = Fraction(delta).limit_denominator(1 << 30)
    return Fraction(k * (k - 1), 2 * n) * (1 + delta * delta / 2)


def paninski_predicate(samples: Sequence[Any], n: int, delta: Any = DEFAULT_UNIFORMITY_DELTA) -> bool:
    """Accept iff the colliding pairs among K vertex samples stay within the threshold"""
    return collision_count(samples) <= paninski_threshold(len(samples), n, delta)


def pair_violation(instance: GapCGInstance, first: Pair, second: Pair) -> bool:
    """Same vertex with different labels, or an edge whose relation excludes the labels"""
    (u, a), (v, b) = first, second
    if u == v:
        return a != b
    return instance.is_edge(u, v) and not instance.allows(u, a, v, b)


def consistency_violation(branch: Sequence[Pair], instance: GapCGInstance) -> Optional[Tuple[Pair, Pair]]:
    """A conflicting pair of samples, or None"""
    labels: Dict[int, int] = {}
    for v, a in branch:
        if labels.setdefault(v, a) != a:
            return (v, labels[v]), (v, a)
    for u, v in instance.edges:
        if u in labels and v in labels and not instance.allows(u, labels[u], v, labels[v]):
            return (u, labels[u]), (v, labels[v])
    return None


def consistency_predicate(branch: Sequence[Pair], instance: GapCGInstance) -> bool:
    """Accept iff no two samples conflict"""
    return consistency_violation(branch, instance) is None


def branch_predicate(branch: Sequence[Pair], instance: GapCGInstance, delta: Any = DEFAULT_UNIFORMITY_DELTA) -> bool:
    """Uniformity on the vertices and consistency on the labels"""
    return paninski_predicate([v for v, _ in branch], instance.vertices, delta) and \
        consistency_predicate(branch, instance)
