"""Reliable real-time broadcast: message types, per-message round state,
and the worst-case completion bound.

A message is sent in fixed-length rounds of 2 * tx_delay symbols: the data
frame goes out in the first half, every other member confirms in an
id-ordered slot during the second half. Members missing from the confirm
set stay pending and the data frame is retransmitted next round, up to
omission_bound + max_inaccess + 1 rounds in total.
"""

from dataclasses import dataclass, field

from .codec import MAX_PAYLOAD
from .model import WnSParams


@dataclass(frozen=True)
class Message:
    src: int
    seq: int
    payload: bytes
    deadline: int

    def __post_init__(self):
        if len(self.payload) > MAX_PAYLOAD:
            raise ValueError(f"payload exceeds {MAX_PAYLOAD} bytes (single frame messages only)")

    @property
    def id(self) -> tuple[int, int]:
        return (self.src, self.seq)


@dataclass
class XmitState:
    """Round machine for one in-flight message at its sender."""

    message: Message
    round_limit: int
    requested: int
    round: int = 0
    started: int | None = None
    pending: set[int] = field(default_factory=set)
    confirmed: set[int] = field(default_factory=set)
    outcome: str = "in_progress"  # in_progress | success | failure
    completed: int | None = None
    paused: bool = False

    def rounds_left(self) -> int:
        return self.round_limit - self.round


@dataclass(frozen=True)
class DeliveryRecord:
    """First successful reception of a message at one node; duplicates are
    suppressed upstream."""

    receiver: int
    message_id: tuple[int, int]
    time: int
    round_received: int


def round_limit(params: WnSParams) -> int:
    return params.omission_bound + params.max_inaccess + 1


def wc_bound(params: WnSParams) -> int:
    """Worst-case completion of one message: every permitted round at full
    length plus the inaccessibility allowance."""
    return round_limit(params) * (2 * params.tx_delay) + params.inaccess_budget
