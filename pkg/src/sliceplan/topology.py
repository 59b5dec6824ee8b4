"""Scenarios, deployment options and the intra-slice round-robin split.

A scenario bundles UEs (one per production line), their flows, the cell RB
budget and the radio configuration. A deployment option turns the flow set
into a slice layout:

  DO0  no slicing: every flow in one shared slice
  DO1  one slice per production line (per UE)
  DO2  one dedicated slice per flow
  DO3  lines with the strictest delay target get dedicated slices, the
       remaining lines share one slice
  DO4  flows of the strictest line(s) get per-flow slices, the remaining
       flows are grouped by equal delay target
  CUSTOM  explicit slice -> flow lists taken from the scenario file

DO3/DO4 generalise the groupings used in the reference evaluation setup to
arbitrary scenarios; for other inputs they are extrapolations (documented
rules, not the only possible reading).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .errors import (
    EmptyScenarioError,
    MissingSliceError,
    ScenarioValidationError,
    UnknownOptionError,
)
from .radio import LinkProfile, McsPmf, McsTable, Numerology, mcs_pmf
from .traffic import FlowSpec

DEPLOYMENT_OPTIONS = ("DO0", "DO1", "DO2", "DO3", "DO4")


@dataclass(frozen=True)
class Scenario:
    """Immutable description of one cell, its UEs, flows and radio config."""

    ues: tuple[LinkProfile, ...]
    flows: tuple[FlowSpec, ...]
    n_cell_rb: int
    numerology: Numerology
    mcs_table: McsTable
    mcs_pmfs: Mapping[str, McsPmf]
    custom_slices: tuple[tuple[str, tuple[str, ...]], ...] | None = None

    def __post_init__(self):
        if not self.flows:
            raise EmptyScenarioError("scenario has no flows")
        if not self.ues:
            raise ScenarioValidationError("scenario has no UEs")
        if self.n_cell_rb < 1:
            raise ScenarioValidationError("n_cell_rb must be >= 1")
        ue_ids = [u.ue_id for u in self.ues]
        if len(set(ue_ids)) != len(ue_ids):
            raise ScenarioValidationError("duplicate UE ids")
        flow_ids = [f.id for f in self.flows]
        if len(set(flow_ids)) != len(flow_ids):
            raise ScenarioValidationError("duplicate flow ids")
        known = set(ue_ids)
        for f in self.flows:
            if f.ue_id not in known:
                raise ScenarioValidationError(
                    f"flow {f.id} references unknown UE {f.ue_id}"
                )
        used = {f.ue_id for f in self.flows}
        for uid in ue_ids:
            if uid not in used:
                raise ScenarioValidationError(f"UE {uid} has no flows")
        for uid in ue_ids:
            if uid not in self.mcs_pmfs:
                raise ScenarioValidationError(f"missing MCS PMF for UE {uid}")

    @classmethod
    def build(
        cls,
        ues: tuple[LinkProfile, ...],
        flows: tuple[FlowSpec, ...],
        n_cell_rb: int,
        numerology: Numerology,
        mcs_table: McsTable,
        custom_slices=None,
    ) -> "Scenario":
        """Assemble a scenario, deriving each UE's MCS PMF from its SNR."""
        pmfs = {u.ue_id: mcs_pmf(u.avg_snr_linear, mcs_table) for u in ues}
        return cls(
            ues=tuple(ues),
            flows=tuple(flows),
            n_cell_rb=n_cell_rb,
            numerology=numerology,
            mcs_table=mcs_table,
            mcs_pmfs=pmfs,
            custom_slices=custom_slices,
        )

    def flow(self, flow_id: str) -> FlowSpec:
        for f in self.flows:
            if f.id == flow_id:
                return f
        raise KeyError(flow_id)

    def flows_of(self, ue_id: str) -> tuple[FlowSpec, ...]:
        return tuple(f for f in self.flows if f.ue_id == ue_id)


@dataclass(frozen=True)
class SliceLayout:
    """Ordered partition of the flow set into named slices."""

    option_id: str
    slices: tuple[tuple[str, tuple[str, ...]], ...]

    def __post_init__(self):
        if not self.slices:
            raise ScenarioValidationError("layout has no slices")
        sids = [sid for sid, _ in self.slices]
        if len(set(sids)) != len(sids):
            raise ScenarioValidationError("duplicate slice ids")
        seen: set[str] = set()
        for sid, fids in self.slices:
            if not fids:
                raise ScenarioValidationError(f"slice {sid} is empty")
            for fid in fids:
                if fid in seen:
                    raise ScenarioValidationError(
                        f"flow {fid} appears in more than one slice"
                    )
                seen.add(fid)

    @property
    def slice_ids(self) -> tuple[str, ...]:
        return tuple(sid for sid, _ in self.slices)

    def flows_in(self, slice_id: str) -> tuple[str, ...]:
        for sid, fids in self.slices:
            if sid == slice_id:
                return fids
        raise MissingSliceError(slice_id)

    def slice_of(self, flow_id: str) -> str:
        for sid, fids in self.slices:
            if flow_id in fids:
                return sid
        raise KeyError(flow_id)

    def flow_ids(self) -> tuple[str, ...]:
        return tuple(fid for _, fids in self.slices for fid in fids)


def _normalize_option(option) -> str:
    if isinstance(option, int):
        option = f"DO{option}"
    name = str(option).upper()
    if name in {"0", "1", "2", "3", "4"}:
        name = f"DO{name}"
    if name not in DEPLOYMENT_OPTIONS and name != "CUSTOM":
        raise UnknownOptionError(f"unknown deployment option {option!r}")
    return name


def _strictest_ues(scenario: Scenario) -> list[str]:
    """UEs whose tightest flow target equals the scenario-wide minimum."""
    per_ue = {
        u.ue_id: min(f.delay_target_s for f in scenario.flows_of(u.ue_id))
        for u in scenario.ues
    }
    strictest = min(per_ue.values())
    return [u.ue_id for u in scenario.ues if per_ue[u.ue_id] == strictest]


def _named(groups: list[tuple[str, ...]], option: str) -> SliceLayout:
    slices = tuple((f"S{i + 1}", fids) for i, fids in enumerate(groups))
    return SliceLayout(option_id=option, slices=slices)


def build_layout(scenario: Scenario, option) -> SliceLayout:
    """Expand a deployment option into a slice layout for this scenario."""
    name = _normalize_option(option)
    flows = scenario.flows

    if name == "DO0":
        return _named([tuple(f.id for f in flows)], name)

    if name == "DO1":
        groups = [
            tuple(f.id for f in scenario.flows_of(u.ue_id)) for u in scenario.ues
        ]
        return _named(groups, name)

    if name == "DO2":
        return _named([(f.id,) for f in flows], name)

    if name == "DO3":
        dedicated = _strictest_ues(scenario)
        shared = tuple(f.id for f in flows if f.ue_id not in dedicated)
        groups: list[tuple[str, ...]] = []
        if shared:
            groups.append(shared)
        for uid in dedicated:
            groups.append(tuple(f.id for f in scenario.flows_of(uid)))
        return _named(groups, name)

    if name == "DO4":
        dedicated = _strictest_ues(scenario)
        rest = [f for f in flows if f.ue_id not in dedicated]
        groups = []
        # Shared slices: one per distinct target among the remaining flows,
        # most relaxed first.
        for target in sorted({f.delay_target_s for f in rest}, reverse=True):
            groups.append(tuple(f.id for f in rest if f.delay_target_s == target))
        # The strictest line(s) get one slice per flow.
        for f in flows:
            if f.ue_id in dedicated:
                groups.append((f.id,))
        return _named(groups, name)

    # CUSTOM
    if scenario.custom_slices is None:
        raise ScenarioValidationError(
            "option CUSTOM requires custom_slices in the scenario file"
        )
    layout = SliceLayout(option_id="CUSTOM", slices=scenario.custom_slices)
    declared = set(layout.flow_ids())
    expected = {f.id for f in flows}
    if declared != expected:
        missing = sorted(expected - declared)
        extra = sorted(declared - expected)
        raise ScenarioValidationError(
            f"custom_slices must partition the flow set exactly "
            f"(missing={missing}, unknown={extra})"
        )
    return layout


def per_flow_rbs(
    layout: SliceLayout, alloc: Mapping[str, float]
) -> dict[str, float]:
    """Round-robin split: every flow of slice s receives N_s / |F_s| RBs."""
    out: dict[str, float] = {}
    for sid, fids in layout.slices:
        if sid not in alloc:
            raise MissingSliceError(f"allocation missing slice {sid}")
        n = alloc[sid]
        if n < 1:
            raise ValueError(f"slice {sid} must hold at least 1 RB, got {n}")
        share = n / len(fids)
        for fid in fids:
            out[fid] = share
    return out
