"""Worst-case inaccessibility durations for beacon-enabled MAC parameters,
and trace-side accounting of the per-window inaccessibility budget.

The three modeled blackout scenarios are simplified closed forms, not
standard-mandated values: losing the beacon train, losing synchronization
and rejoining through a scan, and the coordinated channel-switch blackout.
Each has a mitigated variant that must be strictly cheaper: beacon loss is
inferred early after two losses, the rejoin scan is skipped by hopping in
the agreed channel order, and the switch rides the announcement frames
instead of the silence timer.
"""

import enum
from dataclasses import dataclass

from .channels import SwitchConfig
from .codec import encoded_length
from .engine import airtime_bytes
from .model import WnSParams
from .trace import TraceRecord, TraceError
from . import kernels

BASE_SUPERFRAME_SYMBOLS = 960
SWITCH_FRAME_PAYLOAD = 2


class InaScenario(enum.Enum):
    BEACON_LOSS = "BeaconLoss"
    SYNC_LOSS_REJOIN = "SyncLossRejoin"
    CHANNEL_SWITCH_BLACKOUT = "ChannelSwitchBlackout"


@dataclass(frozen=True)
class MacParams:
    """Beacon-enabled MAC timing inputs.

    ``scan_channels`` is the number of channels a full rejoin scan visits
    (16 for the usual 2.4 GHz band plan); the agreed-order mitigation only
    pays for one of them, so at least 2 are required.
    """

    beacon_order: int
    superframe_order: int = 0
    base_superframe: int = BASE_SUPERFRAME_SYMBOLS
    max_lost_beacons: int = 4
    scan_duration_per_channel: int = 1920
    scan_channels: int = 16

    def __post_init__(self):
        if not 0 <= self.superframe_order <= self.beacon_order <= 14:
            raise ValueError("require 0 <= superframe_order <= beacon_order <= 14")
        if self.max_lost_beacons < 1:
            raise ValueError("max_lost_beacons must be >= 1")
        if self.scan_channels < 2:
            raise ValueError("scan_channels must be >= 2")


def beacon_interval(p: MacParams) -> int:
    """Symbols between beacons: base superframe scaled by 2^beacon_order."""
    return p.base_superframe * (2 ** p.beacon_order)


@dataclass(frozen=True)
class SwitchModel:
    """Channel-switch inputs for the blackout scenario."""

    config: SwitchConfig
    failed_channels: int
    omission_bound: int


DEFAULT_SWITCH_MODEL = SwitchModel(
    config=SwitchConfig(silence_timeout=2000, beacon_wait=2000,
                        beacon_cadence=1000, announce_repeats=4),
    failed_channels=2,
    omission_bound=3,
)


def worst_case(scenario: InaScenario, p: MacParams, mitigated: bool,
               switch: SwitchModel = DEFAULT_SWITCH_MODEL) -> int:
    bi = beacon_interval(p)
    if scenario is InaScenario.BEACON_LOSS:
        if mitigated:
            return (p.max_lost_beacons * bi) // 2
        return p.max_lost_beacons * bi
    if scenario is InaScenario.SYNC_LOSS_REJOIN:
        detect = p.max_lost_beacons * bi
        if mitigated:
            return detect + p.scan_duration_per_channel + bi
        return detect + p.scan_channels * p.scan_duration_per_channel + bi
    if scenario is InaScenario.CHANNEL_SWITCH_BLACKOUT:
        if mitigated:
            switch_airtime = airtime_bytes(encoded_length(SWITCH_FRAME_PAYLOAD))
            return switch.config.assisted_switch(switch.omission_bound, switch_airtime)
        return switch.config.worst_case_switch(switch.failed_channels)
    raise ValueError(f"unknown scenario {scenario!r}")


@dataclass(frozen=True)
class InaPeriod:
    start: int
    end: int
    cause: str

    def __post_init__(self):
        if not self.start < self.end:
            raise ValueError("period must have start < end")

    @property
    def duration(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class AccountVerdict:
    ok: bool
    periods: tuple[InaPeriod, ...]
    worst_window_start: int
    worst_count: int
    worst_duration: int
    violations: tuple[str, ...]


def extract_periods(records: list[TraceRecord]) -> list[InaPeriod]:
    """Pair InaccessStart/InaccessEnd records in order; switch blackouts are
    stamped with the same record pair and are included."""
    periods = []
    open_rec: TraceRecord | None = None
    for rec in records:
        if rec.event == "InaccessStart":
            if open_rec is not None:
                raise TraceError(f"nested InaccessStart at index {rec.index}")
            open_rec = rec
        elif rec.event == "InaccessEnd":
            if open_rec is None:
                raise TraceError(f"InaccessEnd without start at index {rec.index}")
            if rec.time > open_rec.time:
                periods.append(InaPeriod(
                    start=open_rec.time, end=rec.time,
                    cause=open_rec.fields.get("cause", "injected")))
            open_rec = None
    if open_rec is not None:
        raise TraceError(f"unclosed InaccessStart at index {open_rec.index}")
    return periods


def account(records: list[TraceRecord], params: WnSParams) -> AccountVerdict:
    """Check every observation window against the inaccessibility budget.

    A period is charged to the windows containing its start, with its full
    duration. The verdict holds iff no window of length observation_window
    sees more than max_inaccess periods or more than inaccess_budget total
    symbols.
    """
    periods = extract_periods(records)
    if not periods:
        return AccountVerdict(True, (), 0, 0, 0, ())
    starts = [p.start for p in periods]
    durations = [float(p.duration) for p in periods]
    count, weight, count_at, weight_at = kernels.window_max(
        starts, durations, params.observation_window)
    violations = []
    if count > params.max_inaccess:
        violations.append(
            f"window at {count_at}: {count} periods exceed budget {params.max_inaccess}")
    if weight > params.inaccess_budget:
        violations.append(
            f"window at {weight_at}: {int(weight)} symbols exceed budget {params.inaccess_budget}")
    return AccountVerdict(
        ok=not violations,
        periods=tuple(periods),
        worst_window_start=count_at if count > params.max_inaccess else weight_at,
        worst_count=count,
        worst_duration=int(weight),
        violations=tuple(violations),
    )
