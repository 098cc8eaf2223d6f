"""
Prover Compression
Two provers simulate k by mixing V on one register with the product test across both
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, Optional

from loguru import logger

from core.arith import ArithmeticMode, Scalar, parse_mode, to_scalar
from core.builder import CircuitBuilder
from core.errors import PreconditionError
from core.states import NonNegativeState
from core.verifier import StoqVerifier, Thresholds, acceptance_probability
from protocols.common import Construction, DyadicWeight, block_split, dyadic_weight, finish_construction, mix
from protocols.product_test import emit_product_test, product_test_acceptance

DEFAULT_C_PROD = Fraction(1, 3)


@dataclass(frozen=True)
class CompressionParams:
    """gamma = c_prod / 4 and lambda = gamma * delta, rounded down to a dyadic"""
    delta: Fraction
    c_prod: Fraction
    weight: DyadicWeight

    @classmethod
    def create(cls, thresholds: Thresholds, c_prod: Any = DEFAULT_C_PROD, lambda_bits: int = 8,
               lambda_override: Optional[Any] = None) -> "CompressionParams":
        c_prod = Fraction(c_prod)
        target = Fraction(lambda_override) if lambda_override is not None else c_prod / 4 * thresholds.delta
        if not 0 < target <= Fraction(1, 2):
            raise PreconditionError(f"lambda {target} outside (0, 1/2]")
        return cls(thresholds.delta, c_prod, dyadic_weight(target, lambda_bits))

    @property
    def gamma(self) -> Fraction:
        return self.c_prod / 4

    @property
    def lam(self) -> Fraction:
        return self.weight.value

    def completeness(self, c: Fraction) -> Fraction:
        return 1 - self.lam * (1 - c)

    def soundness_bound(self, c: Fraction) -> Fraction:
        return self.completeness(c) - self.gamma * self.delta * self.delta / 2

    def to_dict(self) -> Dict[str, Any]:
        return {"gamma": str(self.gamma), "c_prod": str(self.c_prod), "delta": str(self.delta),
                "lambda": self.weight.to_dict()}


def compression_construction(v: StoqVerifier, thresholds: Thresholds, c_prod: Any = DEFAULT_C_PROD,
                             lambda_bits: int = 8, lambda_override: Optional[Any] = None) -> Construction:
    """
    Two-prover verifier on registers A and B of k*ell qubits each

    With probability lambda V runs on A; otherwise the product test runs on (A, B).
    """
    if v.k <= 2:
        raise PreconditionError(f"prover compression needs k > 2, got k={v.k}")
    params = CompressionParams.create(thresholds, c_prod, lambda_bits, lambda_override)
    ell = v.ell
    builder = CircuitBuilder(2, v.k * ell)
    a_blocks = block_split(builder.witness_block(0), ell)
    b_blocks = block_split(builder.witness_block(1), ell)

    def run_v():
        builder.append_gamma(v, a_blocks, builder.zeros(v.layout.n0), builder.pluses(v.layout.nplus))

    mix(builder, params.weight, run_v, lambda: emit_product_test(builder, a_blocks, b_blocks))
    report = dict(params.to_dict(), k=v.k, ell=ell,
                  completeness=str(params.completeness(thresholds.c)),
                  soundness_bound=str(params.soundness_bound(thresholds.c)))
    construction = finish_construction(builder, report)
    logger.info(f"[Compress] k={v.k} -> 2, lambda={params.lam}: c'={report['completeness']}, "
                f"s'<={report['soundness_bound']}, width={construction.params['width']}")
    return construction


def build_prover_compression(v: StoqVerifier, thresholds: Thresholds, c_prod: Any = DEFAULT_C_PROD,
                             lambda_bits: int = 8, lambda_override: Optional[Any] = None) -> StoqVerifier:
    return compression_construction(v, thresholds, c_prod, lambda_bits, lambda_override).verifier


def compression_acceptance(v: StoqVerifier, rho: NonNegativeState, sigma: NonNegativeState, lam: Any,
                           mode: Optional[ArithmeticMode] = None) -> Scalar:
    """lambda * A_V(rho) + (1 - lambda) * (1/2 + 1/2 P_prod(rho, sigma))"""
    mode = rho.mode if mode is None else parse_mode(mode)
    weight = to_scalar(Fraction(lam), mode)
    product = product_test_acceptance(rho, sigma, v.k, v.ell, mode)
    return weight * acceptance_probability(v, rho, mode) + (1 - weight) * product
