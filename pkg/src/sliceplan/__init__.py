"""Delay-bound driven RB planning for industrial RAN slices."""

from .bounds import DelayBoundResult, delay_bound_at, optimize_delay_bound
from .planner import (
    Allocation,
    EvaluatedAllocation,
    PlanResult,
    PlannerTrace,
    evaluate_allocation,
    phase_a,
    phase_b,
    plan,
)
from .radio import (
    LinkProfile,
    McsPmf,
    McsTable,
    Numerology,
    PathLossParams,
    avg_snr,
    default_mcs_table,
    load_mcs_table,
    mcs_pmf,
    mean_service_rate,
    path_loss_linear,
    per_rb_bits,
    service_rho,
)
from .topology import (
    DEPLOYMENT_OPTIONS,
    Scenario,
    SliceLayout,
    build_layout,
    per_flow_rbs,
)
from .traffic import (
    FlowSpec,
    PacketSizePmf,
    arrival_rho,
    mean_bit_rate,
    packet_mgf,
)

__version__ = "0.1.0"
