"""
SepRCD Instances
The Gamma circuit of a (Gamma, I) pair, its transitions and rectangle certificates
"""

import itertools
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from core.builder import CircuitBuilder, joint_cubes
from core.errors import CapExceededError, ConvergenceError, InstanceError, PreconditionError
from core.revsim import CNOT, X, ReversibleCircuit, compose, load_circuit, random_circuit, relabel
from core.sepval import hsep
from core.verifier import VerifierLayout, overlap_matrix

CHUNK = 1 << 20
RECTANGLE_ELL_CAP = 3
SOUNDNESS_TOLERANCE = 1e-9


@dataclass(frozen=True)
class SepRcdInstance:
    """
    Gamma over a (ell, ell) witness, m0 zero ancillas and r plus ancillas

    Qubit order: a in [0, ell), b in [ell, 2 ell), zeros, then pluses.
    """
    gamma_circuit: ReversibleCircuit
    ell: int
    m0: int
    r: int

    def __post_init__(self):
        if min(self.ell, self.m0, self.r) < 0:
            raise InstanceError(f"invalid SepRCD shape ell={self.ell}, m0={self.m0}, r={self.r}")
        if self.gamma_circuit.width != 2 * self.ell + self.m0 + self.r:
            raise InstanceError(f"circuit width {self.gamma_circuit.width} != 2*ell + m0 + r = "
                                f"{2 * self.ell + self.m0 + self.r}")

    @property
    def layout(self) -> VerifierLayout:
        return VerifierLayout(2, self.ell, self.m0, self.r, 0)

    @property
    def side(self) -> int:
        return 1 << self.ell

    def inputs(self, a: np.ndarray, b: np.ndarray, u: np.ndarray) -> np.ndarray:
        return a | (b << self.ell) | (u << (2 * self.ell + self.m0))

    def split(self, ys: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(a', b', z', u') fields of output strings"""
        mask = self.side - 1
        a = ys & mask
        b = (ys >> self.ell) & mask
        z = (ys >> (2 * self.ell)) & ((1 << self.m0) - 1)
        u = ys >> (2 * self.ell + self.m0)
        return a, b, z, u

    def to_dict(self) -> Dict[str, Any]:
        data = self.gamma_circuit.to_dict()
        data.update({"ell": self.ell, "m0": self.m0, "r": self.r})
        return data


def load_seprcd(data: Dict[str, Any]) -> SepRcdInstance:
    """Circuit JSON extended with ell, m0 and r"""
    try:
        ell, m0, r = int(data["ell"]), int(data["m0"]), int(data["r"])
    except (KeyError, TypeError, ValueError) as e:
        raise InstanceError(f"SepRCD instance needs integer ell, m0 and r: {e}")
    return SepRcdInstance(load_circuit(data), ell, m0, r)


class Transition(NamedTuple):
    """GOOD with the image (a', b', u'), or BAD with the nonzero ancilla value"""
    good: bool
    a: int
    b: int
    u: int
    z: int

    def __str__(self) -> str:
        return f"GOOD({self.a},{self.b},{self.u})" if self.good else f"BAD({self.z})"


def transition(instance: SepRcdInstance, a: int, b: int, u: int) -> Transition:
    """Gamma(a, b, 0^m0, u) classified by its zero-ancilla field"""
    side = instance.side
    if not (0 <= a < side and 0 <= b < side and 0 <= u < (1 << instance.r)):
        raise InstanceError(f"transition input ({a}, {b}, {u}) outside ell={instance.ell}, r={instance.r}")
    y = instance.gamma_circuit.apply(int(instance.inputs(np.int64(a), np.int64(b), np.int64(u))))
    mask = side - 1
    a2, b2 = y & mask, (y >> instance.ell) & mask
    z = (y >> (2 * instance.ell)) & ((1 << instance.m0) - 1)
    u2 = y >> (2 * instance.ell + instance.m0)
    return Transition(z == 0, a2, b2, u2, z)


def sweep(instance: SepRcdInstance, s: np.ndarray, t: np.ndarray):
    """
    Transitions from every (a, b, u) in S x T x U, in chunks

    Yields (bad, a', b') arrays per chunk.
    """
    a_idx, b_idx = np.nonzero(s)[0].astype(np.int64), np.nonzero(t)[0].astype(np.int64)
    n_u = 1 << instance.r
    pairs = len(a_idx) * len(b_idx)
    per_chunk = max(1, CHUNK // n_u)
    aa, bb = np.meshgrid(a_idx, b_idx, indexing="ij")
    aa, bb = aa.ravel(), bb.ravel()
    for start in range(0, pairs, per_chunk):
        ca, cb = aa[start:start + per_chunk], bb[start:start + per_chunk]
        us = np.arange(n_u, dtype=np.int64)
        xs = instance.inputs(np.repeat(ca, n_u), np.repeat(cb, n_u), np.tile(us, len(ca)))
        a2, b2, z, _ = instance.split(instance.gamma_circuit.apply_array(xs))
        yield z != 0, a2, b2


def _mask(side: int, members: Iterable[int]) -> np.ndarray:
    mask = np.zeros(side, dtype=bool)
    members = list(members)
    if not members:
        raise PreconditionError("rectangle sides must be non-empty")
    if any(not 0 <= m < side for m in members):
        raise InstanceError(f"rectangle member outside [0, {side})")
    mask[members] = True
    return mask


def is_closed_rectangle(instance: SepRcdInstance, s: Iterable[int], t: Iterable[int]) -> bool:
    """Every transition from K(S, T) is good and lands in S x T"""
    s_mask, t_mask = _mask(instance.side, s), _mask(instance.side, t)
    for bad, a2, b2 in sweep(instance, s_mask, t_mask):
        if bad.any() or not (s_mask[a2].all() and t_mask[b2].all()):
            return False
    return True


def perfectly_agreeing_instance(ell: int, m0: int, r: int, s: Sequence[int], t: Sequence[int]) -> SepRcdInstance:
    """
    Gamma fixing K(S, T) pointwise and flagging a zero ancilla off the rectangle

    Extra clean ancillas used by the predicate oracle are added to m0.
    """
    if m0 < 1:
        raise PreconditionError("a perfectly agreeing instance needs at least one zero ancilla")
    side = 1 << ell
    s_mask, t_mask = _mask(side, s), _mask(side, t)
    builder = CircuitBuilder(2, ell)
    zeros = builder.zeros(m0)
    builder.pluses(r)
    outside = [(a, b) for a in range(side) for b in range(side) if not (s_mask[a] and t_mask[b])]
    builder.mark(joint_cubes([builder.witness_block(0), builder.witness_block(1)], outside), zeros[0])
    circuit, layout = builder.finish()
    logger.debug(f"[RectClosure] agreeing instance ell={ell}: |S|={s_mask.sum()}, |T|={t_mask.sum()}, "
                 f"m0={layout.n0}")
    return SepRcdInstance(circuit, ell, layout.n0, r)


def random_instance(ell: int, m0: int, r: int, gates: int, rng: np.random.Generator) -> SepRcdInstance:
    return SepRcdInstance(random_circuit(2 * ell + m0 + r, gates, rng), ell, m0, r)


@dataclass(frozen=True)
class SoundnessCertificate:
    """hsep of Gamma's acceptance matrix bracketed by a witness value and an upper bound"""
    value: float
    upper: float
    gamma: float
    method: str

    @property
    def certified(self) -> bool:
        return self.upper <= 1 - self.gamma + SOUNDNESS_TOLERANCE

    def to_dict(self) -> Dict[str, Any]:
        return {"value": self.value, "upper": self.upper, "threshold": 1 - self.gamma, "method": self.method,
                "certified": self.certified}


def certify_soundness(instance: SepRcdInstance, gamma: float, seed: int = 0) -> SoundnessCertificate:
    """
    Bound max <psi|Gamma|psi> over non-negative product witnesses

    The upper bound is the smaller of the search value plus its grid error
    and the top eigenvalue of the acceptance matrix.
    """
    m = overlap_matrix(instance.gamma_circuit, instance.layout)
    result = hsep(m, seed=seed)
    spectral = float(np.linalg.eigvalsh(m.entries)[-1])
    upper = min(result.value + result.error_bound, spectral)
    return SoundnessCertificate(result.value, max(upper, result.value), gamma, result.method)


def escaping_instance(ell: int, rng: np.random.Generator, scramble_gates: int = 6) -> SepRcdInstance:
    """
    Flag the zero ancilla when a_0 = 1, else flip a_0; conjugated by random side permutations

    Every rectangle keeps at most half of its transitions, and the side
    permutations map rectangles onto rectangles.
    """
    width = 2 * ell + 1
    gadget = ReversibleCircuit(width, (CNOT(0, 2 * ell), X(0)))
    sigma = relabel(random_circuit(ell, scramble_gates, rng), list(range(ell)), width)
    tau = relabel(random_circuit(ell, scramble_gates, rng), list(range(ell, 2 * ell)), width)
    scramble = compose(sigma, tau)
    return SepRcdInstance(compose(compose(scramble, gadget), scramble.inverse()), ell, 1, 0)


def sample_no_instance(ell: int, gamma: float, rng: np.random.Generator, attempts: int = 32,
                       seed: int = 0) -> Tuple[SepRcdInstance, SoundnessCertificate, int]:
    """
    Rejection sampling of a no instance against the hsep certificate

    Odd attempts draw a random circuit over one zero ancilla, even attempts a
    scrambled escaping gadget. Returns the instance, its certificate and the
    number of attempts used.

    Raises:
        ConvergenceError: no candidate certified within the attempt budget
    """
    for attempt in range(1, attempts + 1):
        if attempt % 2:
            candidate = random_instance(ell, 1, 0, int(rng.integers(2, 12)), rng)
        else:
            candidate = escaping_instance(ell, rng)
        certificate = certify_soundness(candidate, gamma, seed)
        if certificate.certified:
            logger.debug(f"[RectClosure] no instance after {attempt} attempts: hsep <= {certificate.upper:.6f}")
            return candidate, certificate, attempt
    raise ConvergenceError(f"no candidate with hsep <= {1 - gamma} in {attempts} attempts")


def rectangle_value_max(instance: SepRcdInstance) -> Tuple[float, Optional[Tuple[List[int], List[int]]]]:
    """
    max over rectangles of <K(S,T)|Gamma|K(S,T)> with its maximizing (S, T)

    The value is the fraction of S x T x U whose transition is good and lands in S x T.
    """
    if instance.ell > RECTANGLE_ELL_CAP:
        raise CapExceededError(f"rectangle enumeration needs ell <= {RECTANGLE_ELL_CAP}")
    side = instance.side
    n_u = 1 << instance.r
    a = np.repeat(np.arange(side, dtype=np.int64), side * n_u)
    b = np.tile(np.repeat(np.arange(side, dtype=np.int64), n_u), side)
    u = np.tile(np.arange(n_u, dtype=np.int64), side * side)
    a2, b2, z, _ = instance.split(instance.gamma_circuit.apply_array(instance.inputs(a, b, u)))
    good = z == 0
    subsets = [np.array(bits, dtype=bool) for bits in itertools.product([False, True], repeat=side) if any(bits)]
    best, arg = -1.0, None
    for s in subsets:
        for t in subsets:
            start = s[a] & t[b]
            stays = start & good & s[a2] & t[b2]
            value = stays.sum() / start.sum()
            if value > best:
                best, arg = float(value), (np.nonzero(s)[0].tolist(), np.nonzero(t)[0].tolist())
    return best, arg
