"""
Closure Parameters
Round bound, tau schedule and completeness threshold, all kept as exact log2 values
"""

import math
from dataclasses import dataclass
from typing import Any, Dict, List

from core.errors import PreconditionError


def round_bound(ell: int, gamma: float) -> int:
    """L = ceil((2 ell ln 2 + 1) / ln(1 + gamma))"""
    if not 0 < gamma < 1:
        raise PreconditionError(f"gamma {gamma} outside (0, 1)")
    if ell < 0:
        raise PreconditionError(f"negative witness length {ell}")
    return math.ceil((2 * ell * math.log(2) + 1) / math.log1p(gamma))


def log2_tau(ell: int, t: int) -> int:
    """log2 tau_t = -(ell + 4) 2^t + 4"""
    return -(ell + 4) * (1 << t) + 4


def tau_schedule(ell: int, rounds: int) -> List[int]:
    """log2 tau_t for t = 0..rounds by the recurrence tau_0 = 2^-ell, tau_{t+1} = tau_t^2 / 16"""
    schedule = [-ell]
    for _ in range(rounds):
        schedule.append(2 * schedule[-1] - 4)
    return schedule


def completeness_log_eps(ell: int, r: int, rounds: int) -> int:
    """log2 eps_bound = 5 - r - 2^(L+1) (ell + 4)"""
    return 5 - r - (1 << (rounds + 1)) * (ell + 4)


@dataclass(frozen=True)
class RectClosureParams:
    gamma: float
    ell: int
    r: int
    rounds: int

    @classmethod
    def create(cls, ell: int, r: int, gamma: float, rounds: Any = None) -> "RectClosureParams":
        bound = round_bound(ell, gamma)
        if rounds is not None and int(rounds) < 1:
            raise PreconditionError(f"round override {rounds} must be positive")
        return cls(gamma, ell, r, bound if rounds is None else int(rounds))

    @property
    def log2_eps(self) -> int:
        return completeness_log_eps(self.ell, self.r, self.rounds)

    def schedule_consistent(self) -> bool:
        """Closed form against the recurrence, and eps against tau_L^2 / 2^(r+3)"""
        recurrence = tau_schedule(self.ell, self.rounds)
        closed = all(recurrence[t] == log2_tau(self.ell, t) for t in range(self.rounds + 1))
        return closed and self.log2_eps == 2 * recurrence[-1] - (self.r + 3)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "gamma": self.gamma, "ell": self.ell, "r": self.r, "rounds": self.rounds,
            "round_bound": round_bound(self.ell, self.gamma),
            "log2_eps": str(self.log2_eps), "log2_tau_final": str(log2_tau(self.ell, self.rounds)),
        }
