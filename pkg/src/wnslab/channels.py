"""Channel monitoring and switch coordination state.

Per channel each node keeps an omission counter: a consecutive-run counter
(reset by every successful observation) plus the timestamps of all omissions
inside the trailing observation window. A channel is declared failed when
the consecutive run exceeds the segment's omission bound; failure is
permanent for the rest of the run. Recovery is a coordinated hop to the
next channel in the agreed order.
"""

from dataclasses import dataclass, field, replace

from .model import WnSParams


@dataclass(frozen=True)
class OmissionCounter:
    channel: int
    consecutive: int = 0
    window_events: tuple[int, ...] = ()
    last_time: int = -1


def observe(counter: OmissionCounter, outcome: str, t: int, window: int) -> OmissionCounter:
    """Fold one transmission observation (``ok`` or ``omission``) at time t.

    Omission timestamps older than ``t - window`` are evicted; the
    consecutive run resets on ok and grows on omission.
    """
    if t < counter.last_time:
        raise ValueError(f"observation at {t} precedes last at {counter.last_time}")
    if outcome not in ("ok", "omission"):
        raise ValueError(f"unknown outcome {outcome!r}")
    events = tuple(ts for ts in counter.window_events if ts >= t - window)
    if outcome == "ok":
        return replace(counter, consecutive=0, window_events=events, last_time=t)
    return replace(counter, consecutive=counter.consecutive + 1,
                   window_events=events + (t,), last_time=t)


def channel_failed(counter: OmissionCounter, params: WnSParams) -> bool:
    """The bound is exceeded strictly: a run of exactly k omissions is
    still within budget."""
    return counter.consecutive > params.omission_bound


def next_channel(current: int, channels) -> int:
    """Deterministic successor in the agreed channel order, wrapping."""
    order = list(channels)
    idx = order.index(current)
    return order[(idx + 1) % len(order)]


@dataclass(frozen=True)
class ChannelStatus:
    state: str = "active"  # active | failed
    failed_at: int | None = None


@dataclass(frozen=True)
class SwitchConfig:
    """Switch procedure constants, all scenario-configurable.

    Members presume a switch after hearing nothing for ``silence_timeout``;
    the coordinator repeats the switch announcement ``announce_repeats``
    times before hopping, then beacons every ``beacon_cadence`` symbols.
    A member that reaches a channel waits ``beacon_wait`` for a beacon
    before hopping onward. ``hop_time`` models radio retune latency.
    """

    silence_timeout: int
    beacon_wait: int
    beacon_cadence: int
    announce_repeats: int
    hop_time: int = 12
    slot_guard: int = 2
    enabled: bool = True  # ablation switch: no monitoring actions when off

    def worst_case_switch(self, failed_channels: int) -> int:
        """Declared worst-case blackout: a silent detection plus one wrong
        dwell per tolerated channel failure."""
        return self.silence_timeout + failed_channels * (self.hop_time + self.beacon_wait)

    def assisted_switch(self, omission_bound: int, switch_airtime: int) -> int:
        """Announcement-assisted bound: the member reacts to a switch frame
        instead of timing out."""
        return (omission_bound + 1) * switch_airtime + self.hop_time + self.beacon_wait


@dataclass
class SwitchState:
    """Per-node switch progress; mutated only by the owning node's stack."""

    mode: str = "tuned"  # tuned | hopping | awaiting_beacon
    target: int | None = None
    deadline: int | None = None
    last_reception: int = 0
