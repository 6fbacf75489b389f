"""Declarative fault injection plan for a simulation run."""

from dataclasses import dataclass, field


@dataclass(frozen=True)
class OmissionDirective:
    """Destroy or corrupt the frames matching (seq, round, sender).

    ``victims`` is None for every receiver (a consistent omission) or a set
    of node ids for an inconsistent one. ``mode`` is ``destroy`` (no bytes
    arrive) or ``corrupt`` (bytes arrive with a flipped bit and fail the
    checksum).
    """

    seq: int
    round: int
    sender: int
    victims: frozenset[int] | None = None
    mode: str = "destroy"

    def __post_init__(self):
        if self.mode not in ("destroy", "corrupt"):
            raise ValueError(f"unknown omission mode {self.mode!r}")


@dataclass(frozen=True)
class Interval:
    start: int
    end: int

    def __post_init__(self):
        if not self.start < self.end:
            raise ValueError(f"interval [{self.start}, {self.end}) is not well-formed")

    def overlaps(self, start: int, end: int) -> bool:
        return self.start < end and start < self.end


@dataclass(frozen=True)
class ChannelFailure:
    channel: int
    interval: Interval


@dataclass(frozen=True)
class Move:
    node: int
    time: int
    position: tuple[float, float]


@dataclass(frozen=True)
class FaultScript:
    omissions: tuple[OmissionDirective, ...] = ()
    channel_failures: tuple[ChannelFailure, ...] = ()
    inaccessibility: tuple[Interval, ...] = ()
    moves: tuple[Move, ...] = ()
