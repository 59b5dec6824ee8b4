"""Per-flow traffic descriptors and compound-Poisson arrival envelopes.

A flow is a Poisson packet stream with a discrete packet-size PMF. Its
cumulative arrivals over an interval form a compound Poisson process whose
MGF yields an affine envelope with rate ``rho_a(theta)`` and zero burst
offset. All functions here are pure and safe for concurrent use.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass

from .errors import MgfOverflowError

# Largest exponent math.exp accepts before overflowing to inf.
_EXP_MAX = math.log(sys.float_info.max)

# Optimisers stay below this exponent for headroom (see theta_cap).
_THETA_EXPONENT_BUDGET = 700.0

_PMF_SUM_TOL = 1e-9


@dataclass(frozen=True)
class PacketSizePmf:
    """Discrete packet-size distribution: ((size_bits, probability), ...)."""

    entries: tuple[tuple[int, float], ...]

    def __post_init__(self):
        if not self.entries:
            raise ValueError("packet PMF needs at least one entry")
        sizes = [s for s, _ in self.entries]
        probs = [p for _, p in self.entries]
        if any(s <= 0 or int(s) != s for s in sizes):
            raise ValueError("packet sizes must be positive integers (bits)")
        if len(set(sizes)) != len(sizes):
            raise ValueError("packet sizes must be pairwise distinct")
        if any(not 0.0 < p <= 1.0 for p in probs):
            raise ValueError("packet probabilities must lie in (0, 1]")
        if abs(math.fsum(probs) - 1.0) > _PMF_SUM_TOL:
            raise ValueError(
                f"packet probabilities sum to {math.fsum(probs)!r}, expected 1"
            )

    @property
    def mean_bits(self) -> float:
        return math.fsum(p * s for s, p in self.entries)

    @property
    def max_bits(self) -> int:
        return max(s for s, _ in self.entries)


@dataclass(frozen=True)
class FlowSpec:
    """One industrial traffic flow and its QoS contract.

    lambda_pps:       Poisson packet arrival rate (packets/s)
    sizes:            packet-size PMF
    delay_target_s:   delay objective the planner must meet
    violation_budget: acceptable probability of exceeding the target
    """

    id: str
    ue_id: str
    lambda_pps: float
    sizes: PacketSizePmf
    delay_target_s: float
    violation_budget: float

    def __post_init__(self):
        if self.lambda_pps <= 0:
            raise ValueError(f"flow {self.id}: lambda must be > 0")
        if self.delay_target_s <= 0:
            raise ValueError(f"flow {self.id}: delay target must be > 0")
        if not 0.0 < self.violation_budget < 1.0:
            raise ValueError(f"flow {self.id}: violation budget must be in (0,1)")

    @property
    def theta_cap(self) -> float:
        """Largest theta the envelope optimiser may sample for this flow.

        Keeps theta * max_size within a safe exponent budget so packet_mgf
        cannot overflow during the search.
        """
        return _THETA_EXPONENT_BUDGET / self.sizes.max_bits


def mean_bit_rate(flow: FlowSpec) -> float:
    """Long-run average arrival rate in bits/s (lambda times mean size)."""
    return flow.lambda_pps * flow.sizes.mean_bits


def packet_mgf(flow: FlowSpec, theta: float) -> float:
    """MGF of one packet's size, sum_i p_i * exp(theta * d_i).

    Raises MgfOverflowError when theta * max_size exceeds the float64
    exponent range instead of silently returning inf.
    """
    if theta <= 0:
        raise ValueError("theta must be > 0")
    if theta * flow.sizes.max_bits > _EXP_MAX:
        raise MgfOverflowError(
            f"flow {flow.id}: theta*max_size = {theta * flow.sizes.max_bits:.1f} "
            f"exceeds exp range"
        )
    return math.fsum(p * math.exp(theta * s) for s, p in flow.sizes.entries)


def arrival_rho(flow: FlowSpec, theta: float) -> float:
    """Arrival-envelope rate lambda * (M_L(theta) - 1) / theta in bits/s.

    The matching burst offset is identically zero for compound Poisson
    arrivals. Uses expm1 so the theta -> 0 limit stays accurate down to
    theta ~ 1e-12 (the limit is mean_bit_rate).
    """
    if theta <= 0:
        raise ValueError("theta must be > 0")
    if theta * flow.sizes.max_bits > _EXP_MAX:
        raise MgfOverflowError(
            f"flow {flow.id}: theta*max_size = {theta * flow.sizes.max_bits:.1f} "
            f"exceeds exp range"
        )
    acc = math.fsum(p * math.expm1(theta * s) for s, p in flow.sizes.entries)
    return flow.lambda_pps * acc / theta
