"""Slice-level RB allocation: delay balancing then resource tightening.

The planner looks for an integer RB budget per slice such that every flow's
delay bound stays within its target (normalised bound <= 1) using as few
RBs as possible. Phase A starts from an equal split and repeatedly moves
one RB from the slice holding the most relaxed flow to the slice holding
the most stressed flow, accepting a move only if the worst normalised
bound strictly decreases. If the balanced allocation meets all targets,
phase B tentatively removes one RB from each slice and keeps applying the
removal that stays feasible with the largest worst-case bound, until no
single removal is feasible.

Every candidate allocation is evaluated by a full recomputation of all
per-flow bounds (cost O(|F|) per evaluation, O(N_cell * |S| * |F|) for a
whole run). Evaluations are pure, so repeated runs are bit-identical.

Allocations containing a flow that cannot be stabilised at all order
strictly worse than any finite worst-case bound; among two such
allocations, fewer unstable flows wins, then the lower worst finite
normalised bound. Ties between flows resolve by scenario order, ties
between slices by layout order.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

from .bounds import DelayBoundResult, optimize_delay_bound
from .errors import CellTooSmallError, PreconditionInfeasibleError
from .topology import Scenario, SliceLayout, per_flow_rbs

# A tentative move must beat the incumbent by this relative margin, which
# rules out oscillation on plateaus.
_ACCEPT_RELTOL = 1e-12

FEASIBLE = "FEASIBLE"
INFEASIBLE = "INFEASIBLE"


@dataclass(frozen=True)
class Allocation:
    """Integer RBs per slice; every slice holds at least one."""

    per_slice: dict[str, int]

    def __post_init__(self):
        for sid, n in self.per_slice.items():
            if n < 1 or int(n) != n:
                raise ValueError(f"slice {sid}: RB count must be an integer >= 1")

    @property
    def total(self) -> int:
        return sum(self.per_slice.values())

    def moved(self, donor: str, receiver: str) -> "Allocation":
        per = dict(self.per_slice)
        per[donor] -= 1
        per[receiver] += 1
        return Allocation(per)

    def removed(self, sid: str) -> "Allocation":
        per = dict(self.per_slice)
        per[sid] -= 1
        return Allocation(per)


@dataclass(frozen=True)
class EvaluatedAllocation:
    """An allocation together with every flow's optimised delay bound."""

    allocation: Allocation
    per_flow_w: dict[str, DelayBoundResult]
    per_flow_w_norm: dict[str, float | None]
    zeta: float | None
    n_infeasible: int
    worst_finite: float

    @property
    def zeta_key(self) -> tuple[int, float]:
        """Lexicographic ordering key; smaller is better."""
        if self.n_infeasible == 0:
            return (0, self.zeta)
        return (self.n_infeasible, self.worst_finite)

    @property
    def meets_targets(self) -> bool:
        return self.zeta is not None and self.zeta <= 1.0


@dataclass(frozen=True)
class PlannerTrace:
    """Iteration record: counts, worst-bound trajectory and applied moves.

    phase_a_iterations counts loop passes including the terminating one
    (a pass with no admissible donor, a donor at 1 RB, or a rejected
    move); phase_b_iterations counts applied removals. zeta_history holds
    one zeta_key per accepted state, phase A first.
    """

    phase_a_iterations: int
    phase_b_iterations: int
    zeta_history: tuple[tuple[int, float], ...]
    moves: tuple[tuple[str, str, str | None], ...]


@dataclass(frozen=True)
class PlanResult:
    status: str
    evaluated: EvaluatedAllocation
    trace: PlannerTrace
    wall_time_s: float


def evaluate_allocation(
    scenario: Scenario, layout: SliceLayout, allocation: Allocation
) -> EvaluatedAllocation:
    """Recompute every flow's bound under the round-robin split."""
    shares = per_flow_rbs(layout, allocation.per_slice)
    per_w: dict[str, DelayBoundResult] = {}
    per_norm: dict[str, float | None] = {}
    n_inf = 0
    worst_finite = 0.0
    for flow in scenario.flows:
        res = optimize_delay_bound(
            flow,
            scenario.mcs_pmfs[flow.ue_id],
            scenario.mcs_table,
            shares[flow.id],
            scenario.numerology,
        )
        per_w[flow.id] = res
        if res.feasible:
            norm = res.w_seconds / flow.delay_target_s
            per_norm[flow.id] = norm
            worst_finite = max(worst_finite, norm)
        else:
            per_norm[flow.id] = None
            n_inf += 1
    zeta = worst_finite if n_inf == 0 else None
    return EvaluatedAllocation(
        allocation=allocation,
        per_flow_w=per_w,
        per_flow_w_norm=per_norm,
        zeta=zeta,
        n_infeasible=n_inf,
        worst_finite=worst_finite,
    )


def _improves(candidate: EvaluatedAllocation, incumbent: EvaluatedAllocation) -> bool:
    """Strict improvement under the ordering documented in the module."""
    ci, cv = candidate.zeta_key
    ii, iv = incumbent.zeta_key
    if ci != ii:
        return ci < ii
    return cv < iv * (1.0 - _ACCEPT_RELTOL)


def equal_split(n_cell_rb: int, slice_ids: tuple[str, ...]) -> Allocation:
    """Floor split with the remainder handed to earlier slices."""
    k = len(slice_ids)
    base, rem = divmod(n_cell_rb, k)
    return Allocation(
        {sid: base + (1 if i < rem else 0) for i, sid in enumerate(slice_ids)}
    )


def _flow_order(scenario: Scenario) -> dict[str, int]:
    return {f.id: i for i, f in enumerate(scenario.flows)}


def _select_move(
    scenario: Scenario, layout: SliceLayout, ev: EvaluatedAllocation
) -> tuple[str, str] | None:
    """Donor/receiver pair: best flow's slice gives to worst flow's slice.

    Returns None when every flow lives in the worst flow's slice. Unstable
    flows rank as +inf for both extremes; ties go to the earlier flow.
    """
    order = _flow_order(scenario)

    def norm_of(fid: str) -> float:
        v = ev.per_flow_w_norm[fid]
        return math.inf if v is None else v

    worst_fid = max(ev.per_flow_w_norm, key=lambda f: (norm_of(f), -order[f]))
    worst_slice = layout.slice_of(worst_fid)
    outside = [f for f in ev.per_flow_w_norm if layout.slice_of(f) != worst_slice]
    if not outside:
        return None
    best_fid = min(outside, key=lambda f: (norm_of(f), order[f]))
    return layout.slice_of(best_fid), worst_slice


def phase_a(
    scenario: Scenario, layout: SliceLayout
) -> tuple[EvaluatedAllocation, PlannerTrace]:
    """Delay balancing from an equal split; see the module docstring."""
    sids = layout.slice_ids
    if scenario.n_cell_rb < len(sids):
        raise CellTooSmallError(
            f"{scenario.n_cell_rb} RBs cannot cover {len(sids)} slices"
        )
    ev = evaluate_allocation(scenario, layout, equal_split(scenario.n_cell_rb, sids))
    history = [ev.zeta_key]
    moves: list[tuple[str, str, str | None]] = []
    iters = 0
    while iters < scenario.n_cell_rb:
        iters += 1
        move = _select_move(scenario, layout, ev)
        if move is None:
            break
        donor, receiver = move
        if ev.allocation.per_slice[donor] <= 1:
            break
        candidate = evaluate_allocation(
            scenario, layout, ev.allocation.moved(donor, receiver)
        )
        if not _improves(candidate, ev):
            break
        ev = candidate
        moves.append(("A", donor, receiver))
        history.append(ev.zeta_key)
    trace = PlannerTrace(
        phase_a_iterations=iters,
        phase_b_iterations=0,
        zeta_history=tuple(history),
        moves=tuple(moves),
    )
    return ev, trace


def phase_b(
    scenario: Scenario, layout: SliceLayout, ev: EvaluatedAllocation
) -> tuple[EvaluatedAllocation, PlannerTrace]:
    """Resource tightening: drop RBs while every flow stays within target."""
    if not ev.meets_targets:
        raise PreconditionInfeasibleError(
            "phase B requires an allocation meeting all delay targets"
        )
    sids = layout.slice_ids
    history: list[tuple[int, float]] = []
    moves: list[tuple[str, str, str | None]] = []
    removals = 0
    while removals < scenario.n_cell_rb:
        best: tuple[float, int, str, EvaluatedAllocation] | None = None
        for idx, sid in enumerate(sids):
            if ev.allocation.per_slice[sid] <= 1:
                continue
            cand = evaluate_allocation(scenario, layout, ev.allocation.removed(sid))
            if not cand.meets_targets:
                continue
            # Largest zeta wins; ties resolve to the earlier slice.
            if best is None or (cand.zeta, -idx) > (best[0], -best[1]):
                best = (cand.zeta, idx, sid, cand)
        if best is None:
            break
        _, _, sid, ev = best
        removals += 1
        moves.append(("B", sid, None))
        history.append(ev.zeta_key)
    trace = PlannerTrace(
        phase_a_iterations=0,
        phase_b_iterations=removals,
        zeta_history=tuple(history),
        moves=tuple(moves),
    )
    return ev, trace


def plan(scenario: Scenario, layout: SliceLayout) -> PlanResult:
    """Run phase A, then phase B when all targets are met.

    An infeasible outcome still carries the balanced allocation and its
    per-flow normalised bounds so reports can show how far each flow is
    from its target.
    """
    t0 = time.perf_counter()
    ev, trace_a = phase_a(scenario, layout)
    if ev.meets_targets:
        ev, trace_b = phase_b(scenario, layout, ev)
        status = FEASIBLE
    else:
        trace_b = PlannerTrace(0, 0, (), ())
        status = INFEASIBLE
    wall = time.perf_counter() - t0
    trace = PlannerTrace(
        phase_a_iterations=trace_a.phase_a_iterations,
        phase_b_iterations=trace_b.phase_b_iterations,
        zeta_history=trace_a.zeta_history + trace_b.zeta_history,
        moves=trace_a.moves + trace_b.moves,
    )
    return PlanResult(status=status, evaluated=ev, trace=trace, wall_time_s=wall)
