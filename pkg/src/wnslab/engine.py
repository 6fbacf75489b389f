"""Deterministic discrete-event engine for the shared wireless medium.

Time is counted in symbols (16 us each). Per channel at most one frame is
on the air at a time; competing requests queue FIFO by request time, node
id, then request order. Frame copies reach every member tuned to the
channel whose position lies inside the broadcast domain, except where a
fault directive, a channel-failure interval, or an inaccessibility window
destroys them. Propagation delay is zero: a one-hop segment is dominated
by airtime. Given the same scenario and seed, the produced trace is
byte-identical across runs.
"""

import heapq
import itertools
import random

from .codec import Frame, encode, encoded_length
from .faults import FaultScript
from .model import WnS, point_in_range, validate
from .trace import TraceRecord

SYNC_OVERHEAD_BYTES = 6
SYMBOLS_PER_BYTE = 2


def airtime(frame: Frame) -> int:
    """On-air duration in symbols: sync preamble plus two symbols per byte."""
    return airtime_bytes(encoded_length(len(frame.payload)))


def airtime_bytes(encoded_len: int) -> int:
    return SYMBOLS_PER_BYTE * (SYNC_OVERHEAD_BYTES + encoded_len)


class SimulationError(Exception):
    pass


class SegmentFailure(SimulationError):
    """More channels failed than the segment tolerates."""


class _Medium:
    __slots__ = ("reserved_until", "pending")

    def __init__(self):
        self.reserved_until = 0
        self.pending = []


class _Epoch:
    __slots__ = ("target", "trigger_time", "pending", "closed")

    def __init__(self, target, trigger_time, pending):
        self.target = target
        self.trigger_time = trigger_time
        self.pending = pending
        self.closed = False


class Simulator:
    """Event queue, per-channel media, fault application and trace emission.

    Node behaviour (monitoring, switching, the broadcast protocol) lives in
    the per-node stacks registered via ``attach``; the engine only moves
    bytes and applies the fault script.
    """

    def __init__(self, segment: WnS, faults: FaultScript | None = None, seed: int = 0):
        problems = validate(segment)
        if problems:
            raise SimulationError("invalid segment: " + "; ".join(problems))
        self.segment = segment
        self.params = segment.params
        self.faults = faults or FaultScript()
        self.rng = random.Random(seed)
        self.now = 0
        self._heap = []
        self._seq = itertools.count()
        self._txids = itertools.count()
        self._index = itertools.count()
        self.records: list[TraceRecord] = []
        self.nodes = {n.id: n for n in segment.members}
        self._media = {c: _Medium() for c in segment.channels}
        self._stacks = {}
        self.declared_failed: set[int] = set()
        self.failure_diagnosis: str | None = None
        self.inaccessible = False
        self._epoch: _Epoch | None = None
        self.switch_blackouts: list[tuple[int, int]] = []
        initial = self._membership_fixpoint()
        self._member_flags = {nid: nid in initial for nid in self.nodes}
        for mv in self.faults.moves:
            self.schedule(mv.time, lambda m=mv: self._apply_scripted_move(m))
        for win in self.faults.inaccessibility:
            self.schedule(win.start, lambda w=win: self._inaccess_start(w))
            self.schedule(win.end, lambda w=win: self._inaccess_end(w))

    # -- scheduling ---------------------------------------------------------

    def schedule(self, time: int, fn, phase: int = 0) -> None:
        if time < self.now:
            raise SimulationError(f"cannot schedule at {time} before now={self.now}")
        heapq.heappush(self._heap, (time, phase, next(self._seq), fn))

    def run_until(self, t: int) -> None:
        if t < self.now:
            raise SimulationError(f"run_until({t}) precedes now={self.now}")
        try:
            while self._heap and self._heap[0][0] <= t:
                time, _phase, _seq, fn = heapq.heappop(self._heap)
                self.now = time
                fn()
        except SegmentFailure as exc:
            self.failure_diagnosis = str(exc)
        self.now = t

    # -- trace --------------------------------------------------------------

    def emit(self, event: str, **fields) -> TraceRecord:
        rec = TraceRecord(next(self._index), self.now, event, fields)
        self.records.append(rec)
        return rec

    def emit_signal(self, signal) -> None:
        self.emit(
            "SignalEmitted",
            observer=signal.observer,
            channel=signal.channel,
            reason=signal.reason,
        )

    # -- membership and geometry --------------------------------------------

    def attach(self, stack) -> None:
        self._stacks[stack.id] = stack

    def _in_domain(self, position, channel: int, member_ids=None) -> bool:
        ids = self.nodes if member_ids is None else member_ids
        return all(point_in_range(position, self.nodes[n].ranges[channel]) for n in ids)

    def _qualifies(self, node_id: int, member_ids) -> bool:
        pos = self.nodes[node_id].position
        return any(self._in_domain(pos, c, member_ids) for c in self.segment.channels)

    def _membership_fixpoint(self, moved: int | None = None) -> set[int]:
        """Largest stable member set, evicting one node per pass.

        A node stays iff its position sits inside the intersection of the
        remaining members' ranges on some channel. The node that just moved
        is evicted first, so one departure does not drag the rest of the
        segment out of the (now displaced) intersection.
        """
        members = set(self.nodes)
        while True:
            outside = [n for n in sorted(members) if not self._qualifies(n, members)]
            if not outside:
                return members
            if moved is not None and moved in outside:
                members.discard(moved)
                moved = None
            else:
                members.discard(outside[0])

    def node_is_member(self, node_id: int) -> bool:
        return self._member_flags.get(node_id, False)

    def current_member_ids(self) -> list[int]:
        return sorted(nid for nid, flag in self._member_flags.items() if flag)

    def apply_move(self, node_id: int, position) -> None:
        if node_id not in self.nodes:
            raise SimulationError(f"unknown node {node_id}")
        self.nodes[node_id] = self.nodes[node_id].moved_to(tuple(position))
        self._refresh_membership(moved=node_id)

    def _apply_scripted_move(self, mv) -> None:
        self.apply_move(mv.node, mv.position)

    def _refresh_membership(self, moved: int | None = None) -> None:
        current = self._membership_fixpoint(moved=moved)
        for nid in sorted(self.nodes):
            flag = nid in current
            if flag != self._member_flags[nid]:
                self._member_flags[nid] = flag
                self.emit("MembershipChange", node=nid, member=flag)
                if self._epoch and not self._epoch.closed and not flag:
                    self._epoch.pending.discard(nid)
                    self._maybe_close_epoch()
                for stack in self._stacks.values():
                    stack.on_membership_change(nid, flag)

    # -- inaccessibility ------------------------------------------------------

    def _inaccess_start(self, win) -> None:
        self.inaccessible = True
        self.emit("InaccessStart", cause="injected")
        for stack in self._stacks.values():
            stack.on_inaccess_start()

    def _inaccess_end(self, win) -> None:
        self.inaccessible = False
        self.emit("InaccessEnd", cause="injected")
        for stack in self._stacks.values():
            stack.on_inaccess_end()

    # -- channel failure bookkeeping ------------------------------------------

    def declare_channel_failed(self, channel: int, node_id: int) -> None:
        if channel in self.declared_failed:
            return
        self.declared_failed.add(channel)
        self.emit("ChannelFailed", channel=channel, node=node_id)
        if len(self.declared_failed) > self.params.failed_channels:
            raise SegmentFailure(
                f"{len(self.declared_failed)} channels failed, segment tolerates "
                f"{self.params.failed_channels}: {sorted(self.declared_failed)}"
            )

    def switch_triggered(self, node_id: int, failed: int, target: int, trigger: str) -> None:
        if self._epoch is None or self._epoch.closed:
            self._epoch = _Epoch(
                target=target,
                trigger_time=self.now,
                pending=set(self.current_member_ids()),
            )
            self.emit("InaccessStart", cause="channel_switch", channel=failed, trigger=trigger)

    def node_tuned(self, node_id: int, channel: int) -> None:
        ep = self._epoch
        if ep and not ep.closed and channel == ep.target:
            ep.pending.discard(node_id)
            self._maybe_close_epoch()

    def _maybe_close_epoch(self) -> None:
        ep = self._epoch
        if ep and not ep.closed and not ep.pending:
            ep.closed = True
            self.switch_blackouts.append((ep.trigger_time, self.now))
            self.emit("InaccessEnd", cause="channel_switch")

    def coordinator_channel(self) -> int:
        return self._stacks[self.segment.coordinator_id].channel

    # -- the medium -----------------------------------------------------------

    def channel_busy(self, channel: int) -> bool:
        return self._media[channel].reserved_until > self.now

    def request_transmit(self, sender: int, frame: Frame, channel: int,
                         loopback: bool = False, on_grant=None) -> None:
        """Queue a transmission request; the grant resolves after all events
        at the current instant so that simultaneous requests serialize by
        (request time, node id, request order)."""
        if channel not in self._media:
            raise SimulationError(f"transmit on unknown channel {channel}")
        if not self.node_is_member(sender):
            raise SimulationError(f"transmit by non-member {sender}")
        medium = self._media[channel]
        medium.pending.append((self.now, sender, next(self._seq), frame, loopback, on_grant))
        self.schedule(self.now, lambda: self._grant(channel), phase=1)

    def _grant(self, channel: int) -> None:
        medium = self._media[channel]
        if not medium.pending:
            return
        medium.pending.sort(key=lambda item: (item[0], item[1], item[2]))
        for requested, sender, _order, frame, loopback, on_grant in medium.pending:
            start = max(self.now, medium.reserved_until)
            end = start + airtime(frame)
            medium.reserved_until = end
            txid = next(self._txids)
            self.schedule(start, lambda tx=txid, s=sender, f=frame, c=channel, r=requested:
                          self._tx_start(tx, s, f, c, r))
            self.schedule(end, lambda tx=txid, s=sender, f=frame, c=channel, st=start,
                          lb=loopback: self._tx_end(tx, s, f, c, st, lb))
            if on_grant is not None:
                on_grant(txid, start, end)
        medium.pending.clear()

    def _tx_start(self, txid, sender, frame, channel, requested) -> None:
        self.emit(
            "TxStart",
            tx=txid, channel=channel, sender=sender, kind=frame.kind.name,
            seq=frame.seq, round=frame.round, requested=requested,
        )

    def _tx_end(self, txid, sender, frame, channel, start, loopback) -> None:
        destroyed_by = None
        for cf in self.faults.channel_failures:
            if cf.channel == channel and cf.interval.overlaps(start, self.now):
                destroyed_by = "channel_failure"
                break
        if destroyed_by is None:
            for win in self.faults.inaccessibility:
                if win.overlaps(start, self.now):
                    destroyed_by = "inaccessibility"
                    break

        members = self.current_member_ids()
        eligible = []
        for nid in members:
            if nid == sender and not loopback:
                continue
            stack = self._stacks.get(nid)
            if stack is not None and stack.listening_channel() != channel:
                continue
            if self._in_domain(self.nodes[nid].position, channel, member_ids=members):
                eligible.append(nid)

        destroyed_for: set[int] = set()
        corrupted_for: set[int] = set()
        if destroyed_by is None:
            for directive in self.faults.omissions:
                if (directive.seq, directive.round, directive.sender) != (
                        frame.seq, frame.round, sender):
                    continue
                victims = eligible if directive.victims is None else [
                    v for v in eligible if v in directive.victims]
                self.emit(
                    "OmissionInjected",
                    tx=txid,
                    victims="all" if directive.victims is None else sorted(directive.victims),
                    mode=directive.mode, channel=channel,
                )
                if directive.mode == "destroy":
                    destroyed_for.update(victims)
                else:
                    corrupted_for.update(victims)

        self.emit(
            "TxEnd",
            tx=txid, channel=channel, sender=sender, kind=frame.kind.name,
            seq=frame.seq, round=frame.round, loopback=loopback,
            eligible=eligible, destroyed_by=destroyed_by,
        )
        if destroyed_by is not None:
            return
        data = encode(frame)
        for nid in eligible:
            if nid in destroyed_for:
                continue
            payload = data
            if nid in corrupted_for:
                flip = self.rng.randrange(len(data) * 8)
                buf = bytearray(data)
                buf[flip // 8] ^= 1 << (flip % 8)
                payload = bytes(buf)
            self.emit("Deliver", receiver=nid, tx=txid, channel=channel,
                      bytes=payload.hex())
            stack = self._stacks.get(nid)
            if stack is not None:
                stack.on_bytes(channel, payload, txid, start)
