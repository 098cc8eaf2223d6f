"""
Rectangular Closure Testing
Explicit-table and recursive implementations of the seed-by-seed closure test
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from loguru import logger

from core.errors import CapExceededError
from core.revsim import PERMUTATION_WIDTH_CAP
from rectclosure.instance import SepRcdInstance, sweep
from rectclosure.params import RectClosureParams

MAX_ELL = 10
MAX_R = 10
RECURSIVE_ELL_CAP = 3
RECURSIVE_ROUND_CAP = 4


@dataclass
class RoundOutcome:
    """BAD, or the augmented sides of a good round"""
    bad: bool
    s: Optional[np.ndarray] = None
    t: Optional[np.ndarray] = None


@dataclass
class SeedRun:
    seed: Tuple[int, int]
    survived: bool
    bad_round: Optional[int]
    sizes: List[Tuple[int, int]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {"seed": list(self.seed), "survived": self.survived, "bad_round": self.bad_round,
                "sizes": [list(s) for s in self.sizes]}


@dataclass
class ClosureVerdict:
    accept: bool
    params: RectClosureParams
    seed: Optional[Tuple[int, int]] = None
    rounds_log: List[Tuple[int, int]] = field(default_factory=list)
    bad_rounds: Dict[Tuple[int, int], int] = field(default_factory=dict)
    implementation: str = "table"

    @property
    def verdict(self) -> str:
        return "ACCEPT" if self.accept else "REJECT"

    def to_dict(self) -> Dict[str, Any]:
        data = {"verdict": self.verdict, "implementation": self.implementation, "params": self.params.to_dict()}
        if self.accept:
            data["seed"] = list(self.seed)
            data["rounds_log"] = [list(s) for s in self.rounds_log]
        else:
            data["bad_rounds"] = {f"{a},{b}": t for (a, b), t in sorted(self.bad_rounds.items())}
        return data


def _check_caps(instance: SepRcdInstance, max_ell: int, max_r: int) -> None:
    if instance.ell > max_ell or instance.r > max_r:
        raise CapExceededError(f"ell={instance.ell}, r={instance.r} exceed the caps ell <= {max_ell}, r <= {max_r}")


def closure_round(instance: SepRcdInstance, s: np.ndarray, t: np.ndarray) -> RoundOutcome:
    """
    One round from S_t x T_t over bit tables

    Returns BAD on any transition leaving the zero sector, otherwise the
    sides augmented with every image a' and b'.
    """
    s_next, t_next = s.copy(), t.copy()
    for bad, a2, b2 in sweep(instance, s, t):
        if bad.any():
            return RoundOutcome(True)
        s_next[a2] = True
        t_next[b2] = True
    return RoundOutcome(False, s_next, t_next)


def run_seed(instance: SepRcdInstance, a0: int, b0: int, rounds: int) -> SeedRun:
    s = np.zeros(instance.side, dtype=bool)
    t = np.zeros(instance.side, dtype=bool)
    s[a0], t[b0] = True, True
    sizes = [(1, 1)]
    for r in range(rounds):
        outcome = closure_round(instance, s, t)
        if outcome.bad:
            return SeedRun((a0, b0), False, r, sizes)
        closed = np.array_equal(outcome.s, s) and np.array_equal(outcome.t, t)
        s, t = outcome.s, outcome.t
        sizes.append((int(s.sum()), int(t.sum())))
        if closed:
            # a closed rectangle stays good in every later round
            sizes.extend([sizes[-1]] * (rounds - r - 1))
            break
    return SeedRun((a0, b0), True, None, sizes)


def _scan(instance: SepRcdInstance, params: RectClosureParams, runner: Callable[[int, int], SeedRun],
          parallel: int, implementation: str) -> ClosureVerdict:
    seeds = [(a, b) for a in range(instance.side) for b in range(instance.side)]
    verdict = ClosureVerdict(False, params, implementation=implementation)
    if parallel > 1:
        with ThreadPoolExecutor(max_workers=parallel) as pool:
            runs = list(pool.map(lambda seed: runner(*seed), seeds))
    else:
        runs = []
        for seed in seeds:
            runs.append(runner(*seed))
            if runs[-1].survived:
                break
    for run in runs:
        if run.survived:
            verdict.accept, verdict.seed, verdict.rounds_log = True, run.seed, run.sizes
            break
        verdict.bad_rounds[run.seed] = run.bad_round
    if verdict.accept:
        verdict.bad_rounds = {}
    logger.info(f"[RectClosure] {implementation}: {verdict.verdict} after {len(runs)} seeds "
                f"(L={params.rounds}, ell={instance.ell}, r={instance.r})")
    return verdict


def rect_closure_test(instance: SepRcdInstance, gamma: float, rounds: Optional[int] = None, parallel: int = 1,
                      max_ell: int = MAX_ELL, max_r: int = MAX_R) -> ClosureVerdict:
    """
    Explicit-table closure test: ACCEPT iff some seed survives L rounds

    Seeds are scanned in lexicographic order; a parallel scan reports the
    least surviving seed so both agree.

    Args:
        instance: SepRCD instance
        gamma: Soundness parameter in (0, 1)
        rounds: Optional override of L
        parallel: Threads scanning seeds
    """
    _check_caps(instance, max_ell, max_r)
    params = RectClosureParams.create(instance.ell, instance.r, gamma, rounds)
    return _scan(instance, params, lambda a, b: run_seed(instance, a, b, params.rounds), parallel, "table")


class _RecursiveTester:
    """Membership in S_t and T_t decided by depth-first recursion, without stored tables"""

    def __init__(self, instance: SepRcdInstance, a0: int, b0: int):
        self.instance = instance
        self.a0, self.b0 = a0, b0
        self.side = instance.side
        self.n_u = 1 << instance.r
        width = instance.gamma_circuit.width
        self._table = instance.gamma_circuit.permutation() if width <= PERMUTATION_WIDTH_CAP else None

    def step(self, a: int, b: int, u: int) -> Tuple[bool, int, int]:
        x = int(self.instance.inputs(np.int64(a), np.int64(b), np.int64(u)))
        y = int(self._table[x]) if self._table is not None else self.instance.gamma_circuit.apply(x)
        mask = self.side - 1
        z = (y >> (2 * self.instance.ell)) & ((1 << self.instance.m0) - 1)
        return z != 0, y & mask, (y >> self.instance.ell) & mask

    def in_s(self, x: int, t: int) -> bool:
        return self._member(x, t, 0)

    def in_t(self, x: int, t: int) -> bool:
        return self._member(x, t, 1)

    def _member(self, x: int, t: int, side: int) -> bool:
        if t == 0:
            return x == (self.a0 if side == 0 else self.b0)
        if self._member(x, t - 1, side):
            return True
        for a in range(self.side):
            if not self.in_s(a, t - 1):
                continue
            for b in range(self.side):
                if not self.in_t(b, t - 1):
                    continue
                for u in range(self.n_u):
                    bad, a2, b2 = self.step(a, b, u)
                    if not bad and (a2 if side == 0 else b2) == x:
                        return True
        return False

    def round_bad(self, t: int) -> bool:
        for a in range(self.side):
            if not self.in_s(a, t):
                continue
            for b in range(self.side):
                if not self.in_t(b, t):
                    continue
                if any(self.step(a, b, u)[0] for u in range(self.n_u)):
                    return True
        return False

    def run(self, rounds: int) -> SeedRun:
        sizes = []
        for t in range(rounds):
            sizes.append((sum(self.in_s(x, t) for x in range(self.side)),
                          sum(self.in_t(x, t) for x in range(self.side))))
            if self.round_bad(t):
                return SeedRun((self.a0, self.b0), False, t, sizes)
        return SeedRun((self.a0, self.b0), True, None, sizes)


def rect_closure_test_recursive(instance: SepRcdInstance, gamma: float, rounds: Optional[int] = None) -> ClosureVerdict:
    """Same verdict as rect_closure_test, recomputing set membership on demand"""
    params = RectClosureParams.create(instance.ell, instance.r, gamma, rounds)
    if instance.ell > RECURSIVE_ELL_CAP or params.rounds > RECURSIVE_ROUND_CAP:
        raise CapExceededError(f"recursive closure runs at ell <= {RECURSIVE_ELL_CAP} and "
                               f"L <= {RECURSIVE_ROUND_CAP}, got ell={instance.ell}, L={params.rounds}")
    return _scan(instance, params, lambda a, b: _RecursiveTester(instance, a, b).run(params.rounds), 1, "recursive")
