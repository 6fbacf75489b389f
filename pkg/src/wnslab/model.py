"""Wireless network segment model: members, channels, ranges, parameters.

A segment is a one-hop broadcast unit: a member set with a coordinator, an
ordered channel list (one spare per tolerated channel failure), and the
timing/fault parameter block every protocol layer reads. Geometry is planar;
per-node communication ranges are ellipses, and the broadcast domain on a
channel is the intersection of every member's range on that channel.

Everything here is a pure value type; mutation happens by constructing
updated copies.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .kernels import ellipse_contains

Point = tuple[float, float]


@dataclass(frozen=True)
class WnSParams:
    """Per-segment fault and timing budget.

    omission_bound (k): omissions tolerated per observation window;
    max_inaccess (i): inaccessibility periods tolerated per window;
    failed_channels (f): channel failures tolerated, so the segment carries
    f+1 channels; consecutive_bound (f_o): consecutive omissions before a
    component is declared failed. Times are in symbol units (16 us each):
    observation_window (tau_rd), tx_delay (tau_td, the error-free worst-case
    frame transmission delay) and inaccess_budget (tau_ina, the worst-case
    total inaccessibility per window).
    """

    omission_bound: int
    max_inaccess: int
    failed_channels: int
    consecutive_bound: int
    observation_window: int
    tx_delay: int
    inaccess_budget: int

    def violations(self) -> list[str]:
        out = []
        if min(self.omission_bound, self.max_inaccess, self.failed_channels,
               self.consecutive_bound, self.observation_window,
               self.tx_delay, self.inaccess_budget) < 0:
            out.append("all parameters must be >= 0")
        if self.tx_delay <= 0:
            out.append("tx_delay must be > 0")
        if self.observation_window < 2 * self.tx_delay:
            out.append("observation_window must be >= 2 * tx_delay")
        if self.omission_bound < self.consecutive_bound:
            out.append("omission_bound must be >= consecutive_bound")
        if self.max_inaccess >= 0 and self.inaccess_budget < 0:
            out.append("inaccess_budget must be >= 0")
        return out


@dataclass(frozen=True)
class CommRange:
    """Elliptic communication range; irregular radiation patterns motivate
    ellipses over circles."""

    center: Point
    semi_major: float
    semi_minor: float
    rotation: float = 0.0

    def __post_init__(self):
        if not self.semi_major >= self.semi_minor > 0:
            raise ValueError("require semi_major >= semi_minor > 0")

    def translated(self, dx: float, dy: float) -> "CommRange":
        return replace(self, center=(self.center[0] + dx, self.center[1] + dy))


@dataclass(frozen=True)
class Node:
    id: int
    position: Point
    ranges: dict[int, CommRange] = field(default_factory=dict)
    coordinator: bool = False
    loopback: bool = False

    def __post_init__(self):
        if not 0 <= self.id <= 0xFFFF:
            raise ValueError("node id must fit in 16 bits")

    def moved_to(self, position: Point) -> "Node":
        """New node at ``position`` with ranges translated rigidly along."""
        dx = position[0] - self.position[0]
        dy = position[1] - self.position[1]
        ranges = {c: r.translated(dx, dy) for c, r in self.ranges.items()}
        return replace(self, position=position, ranges=ranges)


@dataclass(frozen=True)
class WnS:
    """Segment descriptor: member set, coordinator, agreed channel order,
    protocol registry names, and the parameter block."""

    wns_id: int
    members: tuple[Node, ...]
    coordinator_id: int
    channels: tuple[int, ...]
    params: WnSParams
    protocols: frozenset[str] = frozenset()

    def member(self, node_id: int) -> Node:
        for node in self.members:
            if node.id == node_id:
                return node
        raise KeyError(f"node {node_id} is not in the segment")

    def member_ids(self) -> list[int]:
        return sorted(n.id for n in self.members)

    def has_member(self, node_id: int) -> bool:
        return any(n.id == node_id for n in self.members)


def point_in_range(p: Point, r: CommRange) -> bool:
    """Closed containment: boundary points count as inside."""
    pts = np.array([p], dtype=np.float64)
    return bool(
        ellipse_contains(pts, r.center[0], r.center[1], r.semi_major, r.semi_minor, r.rotation)[0]
    )


def broadcast_domain_contains(p: Point, channel: int, w: WnS) -> bool:
    """True iff ``p`` lies in every member's range on ``channel``."""
    if channel not in w.channels:
        raise KeyError(f"channel {channel} is not part of the segment")
    return all(point_in_range(p, m.ranges[channel]) for m in w.members)


def is_member(node: Node, w: WnS) -> bool:
    """A node belongs to the segment iff its position sits inside the
    broadcast domain on at least one channel."""
    return any(broadcast_domain_contains(node.position, c, w) for c in w.channels)


@dataclass(frozen=True)
class Join:
    node: Node


@dataclass(frozen=True)
class Leave:
    node_id: int


def commit_membership(w: WnS, event) -> WnS:
    """Apply a committed join or leave; the only mutator of the member set."""
    if isinstance(event, Join):
        if w.has_member(event.node.id):
            raise ValueError(f"duplicate join of node {event.node.id}")
        return replace(w, members=w.members + (event.node,))
    if isinstance(event, Leave):
        if not w.has_member(event.node_id):
            raise ValueError(f"leave of unknown node {event.node_id}")
        if event.node_id == w.coordinator_id:
            raise ValueError("the coordinator cannot leave the segment")
        return replace(w, members=tuple(n for n in w.members if n.id != event.node_id))
    raise TypeError(f"unknown membership event {event!r}")


def validate(w: WnS) -> list[str]:
    """All invariant violations, by name; empty means the segment is valid."""
    out = list(w.params.violations())
    if not w.members:
        out.append("member set must be nonempty")
    if not w.has_member(w.coordinator_id):
        out.append("coordinator must be a member")
    if len(set(w.channels)) != len(w.channels):
        out.append("channel ids must be pairwise distinct")
    if len(w.channels) != w.params.failed_channels + 1:
        out.append(
            f"channel count must equal failed_channels + 1 "
            f"(got {len(w.channels)}, expected {w.params.failed_channels + 1})"
        )
    ids = [n.id for n in w.members]
    if len(set(ids)) != len(ids):
        out.append("member ids must be pairwise distinct")
    for node in w.members:
        missing = [c for c in w.channels if c not in node.ranges]
        if missing:
            out.append(f"node {node.id} lacks a range for channels {missing}")
    return out
