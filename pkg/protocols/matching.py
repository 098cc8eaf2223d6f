"""
Bipartite Matching
Perfect matchings with Hall violators, lexicographic routing matchings and matching probabilities
"""

import itertools
import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

import networkx as nx
import numpy as np
from loguru import logger
from networkx.algorithms.bipartite import hopcroft_karp_matching

from core.errors import CapExceededError, InstanceError

MATCHING_PROBABILITY_CAP = 1 << 20


@dataclass
class MatchingResult:
    """A matching covering every left vertex, or a Hall violator when none exists"""
    matching: Optional[Dict[Hashable, Hashable]]
    violator: Optional[Set[Hashable]] = None

    @property
    def perfect(self) -> bool:
        return self.matching is not None

    def to_dict(self) -> Dict[str, Any]:
        if self.matching is None:
            return {"perfect": False, "violator": sorted(map(str, self.violator or ()))}
        return {"perfect": True, "matching": {str(k): str(v) for k, v in self.matching.items()}}


def _graph(adjacency: Mapping[Hashable, Iterable[Hashable]]) -> Tuple[nx.Graph, List[Tuple[str, Hashable]]]:
    graph = nx.Graph()
    left = [("L", u) for u in adjacency]
    graph.add_nodes_from(left, bipartite=0)
    for u, neighbours in adjacency.items():
        for v in neighbours:
            graph.add_node(("R", v), bipartite=1)
            graph.add_edge(("L", u), ("R", v))
    return graph, left


def _hall_violator(adjacency: Mapping[Hashable, Iterable[Hashable]], matched: Dict[Hashable, Hashable],
                   start: Hashable) -> Set[Hashable]:
    """Left vertices reachable from an unmatched vertex by alternating paths"""
    owner = {v: u for u, v in matched.items()}
    reached, queue, seen_right = {start}, deque([start]), set()
    while queue:
        u = queue.popleft()
        for v in adjacency[u]:
            if v in seen_right:
                continue
            seen_right.add(v)
            w = owner.get(v)
            if w is not None and w not in reached:
                reached.add(w)
                queue.append(w)
    return reached


def perfect_matching(adjacency: Mapping[Hashable, Iterable[Hashable]]) -> MatchingResult:
    """
    Matching of size |L| via Hopcroft-Karp

    Args:
        adjacency: Left vertex -> iterable of right vertices

    Returns:
        MatchingResult with the left-to-right matching, or with a set S of
        left vertices whose neighbourhood is smaller than S
    """
    adjacency = {u: list(vs) for u, vs in adjacency.items()}
    graph, left = _graph(adjacency)
    raw = hopcroft_karp_matching(graph, top_nodes=left) if left else {}
    matched = {u: raw[("L", u)][1] for u in adjacency if ("L", u) in raw}
    if len(matched) == len(adjacency):
        return MatchingResult(matched)
    start = next(u for u in adjacency if u not in matched)
    violator = _hall_violator(adjacency, matched, start)
    logger.debug(f"[Matching] no perfect matching; Hall violator of size {len(violator)}")
    return MatchingResult(None, violator)


def first_matching(edges: Sequence[Set[int]], n: int) -> Optional[Tuple[int, ...]]:
    """
    Lexicographically first sigma with role a -> copy sigma[a] and every edge present

    Args:
        edges: edges[i] holds the roles copy i can serve
        n: Number of copies and roles
    """
    if not perfect_matching({i: edges[i] for i in range(n)}).perfect:
        return None
    for sigma in itertools.permutations(range(n)):
        if all(a in edges[copy] for a, copy in enumerate(sigma)):
            return sigma
    return None


def surjections(r: int, m: int) -> int:
    """Number of maps from r slots onto m labels"""
    return sum((-1) ** i * math.comb(m, i) * (m - i) ** r for i in range(m + 1))


def matching_probability(k: int, r: int) -> Fraction:
    """
    Exact probability that k copies of r uniform labels in [k] admit a perfect matching

    Copy i is adjacent to role a when some slot of copy i carries label a.
    """
    if k < 1 or r < 1:
        raise InstanceError(f"matching probability needs k >= 1 and r >= 1, got k={k}, r={r}")
    if (1 << k) ** k > MATCHING_PROBABILITY_CAP:
        raise CapExceededError(f"label-set enumeration over k={k} exceeds {MATCHING_PROBABILITY_CAP}")
    subsets = [frozenset(s) for size in range(1, k + 1) for s in itertools.combinations(range(k), size)]
    weights = {s: Fraction(surjections(r, len(s)), k ** r) for s in subsets}
    total = Fraction(0)
    for choice in itertools.product(subsets, repeat=k):
        if perfect_matching(dict(enumerate(choice))).perfect:
            weight = Fraction(1)
            for s in choice:
                weight *= weights[s]
            total += weight
    return total


def matching_success_rate(n: int, d: int, trials: int, seed: int) -> Dict[str, Any]:
    """
    Monte Carlo rate of perfect matchings when each of n left vertices picks d uniform right vertices

    Args:
        n: Vertices per side
        d: Independent choices per left vertex (with replacement)
        trials: Number of sampled graphs
        seed: RNG seed
    """
    if n < 1 or d < 1 or trials < 1:
        raise InstanceError(f"need n, d, trials >= 1, got n={n}, d={d}, trials={trials}")
    rng = np.random.default_rng(seed)
    successes = 0
    for _ in range(trials):
        picks = rng.integers(0, n, size=(n, d))
        if perfect_matching({u: set(picks[u].tolist()) for u in range(n)}).perfect:
            successes += 1
    rate = successes / trials
    logger.info(f"[Matching] n={n}, d={d}: {successes}/{trials} perfect ({rate:.3f})")
    return {"n": n, "d": d, "trials": trials, "seed": seed, "successes": successes, "rate": rate}
