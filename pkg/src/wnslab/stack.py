"""Per-node protocol runtime driven exclusively by simulator events.

Each node runs two cooperating layers on top of the medium:

* a monitoring layer that counts per-channel omissions, watches for radio
  silence, and executes the coordinated channel switch, and
* a broadcast layer that sends messages in fixed-length rounds (data frame
  then id-ordered confirm slots) until every member confirmed, bounded by
  omission_bound + max_inaccess + 1 rounds.

The coordinator keeps a beacon heartbeat on the active channel and listens
to its own transmissions, so a channel that dies is noticed even while the
segment is otherwise idle. Members never hop on their own omission counts;
they follow a switch announcement or their silence timer, which keeps every
node's trigger inside one silence window and makes the switch blackout
bound hold.
"""

from collections import deque

from .channels import SwitchConfig, OmissionCounter, observe, channel_failed, next_channel
from .codec import Frame, FrameKind, OmissionSignal, decode, encoded_length
from .engine import Simulator, SimulationError, airtime, airtime_bytes
from .mediator import DeliveryRecord, Message, XmitState, round_limit, wc_bound


class NodeStack:
    def __init__(self, sim: Simulator, node_id: int, cfg: SwitchConfig):
        self.sim = sim
        self.id = node_id
        self.cfg = cfg
        seg = sim.segment
        self.segment = seg
        self.is_coordinator = node_id == seg.coordinator_id
        self.loopback = seg.member(node_id).loopback or self.is_coordinator
        self.channel = seg.channels[0]
        self.mode = "tuned"  # tuned | hopping | awaiting_beacon
        self.counters = {c: OmissionCounter(channel=c) for c in seg.channels}
        self.known_failed: set[int] = set()
        self.last_rx = 0
        self.suspended = False
        self.deliveries: list[DeliveryRecord] = []
        self._dedup: set[tuple[int, int]] = set()
        self._beacon_seq = 0
        self._msg_seq = 0
        self._xmit: XmitState | None = None
        self.outcomes: list[XmitState] = []
        self._sendq: deque[XmitState] = deque()
        self._round_token = 0
        self._round_expected: list[int] = []
        self._silence_token = 0
        self._await_token = 0
        self.slot_width = airtime_bytes(encoded_length(0)) + cfg.slot_guard
        sim.attach(self)

    def start(self) -> None:
        if not self.cfg.enabled:
            return
        if self.is_coordinator:
            self.sim.schedule(self.sim.now, self._beacon_tick)
        self._arm_silence()

    def listening_channel(self):
        return None if self.mode == "hopping" else self.channel

    # -- reception ------------------------------------------------------------

    def on_bytes(self, channel: int, data: bytes, txid: int, tx_start: int) -> None:
        t = self.sim.now
        self.last_rx = t
        result = decode(data, channel, t, self.id)
        if isinstance(result, OmissionSignal):
            self.sim.emit_signal(result)
            self._observe(channel, "omission")
            return
        frame = result
        if frame.wns_id != self.segment.wns_id:
            return
        self._observe(channel, "ok")
        if frame.kind == FrameKind.DATA:
            self._on_data(frame, channel, tx_start)
        elif frame.kind == FrameKind.CONFIRM:
            self._on_confirm(frame)
        elif frame.kind == FrameKind.SWITCH:
            self._on_switch(frame, channel)
        elif frame.kind == FrameKind.BEACON:
            self._on_beacon(channel)

    def _observe(self, channel: int, outcome: str) -> None:
        if self.suspended:
            return
        ctr = observe(self.counters[channel], outcome, self.sim.now,
                      self.segment.params.observation_window)
        self.counters[channel] = ctr
        if outcome == "omission" and self.cfg.enabled and \
                channel not in self.known_failed and \
                channel_failed(ctr, self.segment.params):
            self.known_failed.add(channel)
            self.sim.declare_channel_failed(channel, self.id)
            if self.is_coordinator and self.mode == "tuned" and channel == self.channel:
                self._begin_switch("local_detection")

    # -- heartbeat and silence --------------------------------------------------

    def _beacon_tick(self) -> None:
        if self.mode == "tuned" and not self.suspended:
            if not self.sim.channel_busy(self.channel):
                frame = Frame(FrameKind.BEACON, self._beacon_seq, 0, self.id,
                              self.segment.wns_id)
                self._beacon_seq = (self._beacon_seq + 1) & 0xFF
                self.sim.request_transmit(self.id, frame, self.channel, loopback=True)
        self.sim.schedule(self.sim.now + self.cfg.beacon_cadence, self._beacon_tick)

    def _arm_silence(self) -> None:
        self._silence_token += 1
        token = self._silence_token
        deadline = max(self.last_rx + self.cfg.silence_timeout, self.sim.now)
        self.sim.schedule(deadline, lambda: self._silence_fire(token))

    def _silence_fire(self, token: int) -> None:
        if token != self._silence_token:
            return
        if self.mode != "tuned":
            return  # re-armed when the switch completes
        if self.suspended or not self.sim.node_is_member(self.id):
            self.last_rx = self.sim.now
            self._arm_silence()
            return
        if self.sim.now < self.last_rx + self.cfg.silence_timeout:
            self._arm_silence()
            return
        self._begin_switch("silence_timeout")

    # -- channel switch ----------------------------------------------------------

    def _begin_switch(self, trigger: str, target: int | None = None) -> None:
        if self.mode != "tuned":
            return
        failed = self.channel
        self.known_failed.add(failed)
        if target is None:
            target = next_channel(failed, self.segment.channels)
        self.sim.switch_triggered(self.id, failed, target, trigger)
        self._abort_round()
        if self.is_coordinator:
            # announce on the failed channel (best effort), then hop
            self.mode = "announcing"
            last_end = self.sim.now
            switch_frame = Frame(FrameKind.SWITCH, self._beacon_seq, 0, self.id,
                                 self.segment.wns_id, target.to_bytes(2, "little"))
            self._beacon_seq = (self._beacon_seq + 1) & 0xFF

            def note_end(txid, start, end):
                nonlocal last_end
                last_end = max(last_end, end)

            for _ in range(self.cfg.announce_repeats):
                self.sim.request_transmit(self.id, switch_frame, failed,
                                          loopback=False, on_grant=note_end)
            # grants resolve at phase 1 of this instant; read last_end after
            self.sim.schedule(self.sim.now, lambda: self.sim.schedule(
                last_end, lambda: self._hop(target)), phase=2)
        else:
            self._hop(target)

    def _hop(self, target: int) -> None:
        previous = self.channel
        self.mode = "hopping"
        self._await_token += 1
        self.sim.schedule(self.sim.now + self.cfg.hop_time,
                          lambda: self._arrived(previous, target))

    def _arrived(self, previous: int, target: int) -> None:
        self.channel = target
        self.sim.emit("ChannelSwitch", node=self.id, **{"from": previous, "to": target})
        if self.is_coordinator:
            # first beacon goes out ahead of any resumed data round
            self.mode = "tuned"
            frame = Frame(FrameKind.BEACON, self._beacon_seq, 0, self.id,
                          self.segment.wns_id)
            self._beacon_seq = (self._beacon_seq + 1) & 0xFF
            self.sim.request_transmit(self.id, frame, target, loopback=True)
            self._tuned_again()
        else:
            self.mode = "awaiting_beacon"
            self._await_token += 1
            token = self._await_token
            self.sim.schedule(self.sim.now + self.cfg.beacon_wait,
                              lambda: self._await_timeout(token))

    def _await_timeout(self, token: int) -> None:
        if token != self._await_token or self.mode != "awaiting_beacon":
            return
        self._hop(next_channel(self.channel, self.segment.channels))

    def _on_beacon(self, channel: int) -> None:
        if self.mode == "awaiting_beacon" and channel == self.channel:
            self._tuned_again()

    def _on_switch(self, frame: Frame, channel: int) -> None:
        if self.is_coordinator or self.mode != "tuned" or channel != self.channel:
            return
        target = int.from_bytes(frame.payload[:2], "little")
        self._begin_switch("switch_frame", target=target)

    def _tuned_again(self) -> None:
        self.mode = "tuned"
        self.last_rx = self.sim.now
        self.sim.node_tuned(self.id, self.channel)
        self._arm_silence()
        self._resume_xmit()

    # -- inaccessibility hooks ---------------------------------------------------

    def on_inaccess_start(self) -> None:
        self.suspended = True
        self._abort_round()

    def on_inaccess_end(self) -> None:
        self.suspended = False
        self.last_rx = max(self.last_rx, self.sim.now)
        self._arm_silence()
        self._resume_xmit()

    def on_membership_change(self, node_id: int, member: bool) -> None:
        if node_id == self.id:
            if member:
                # rejoin on the coordinator's current channel
                self.channel = self.sim.coordinator_channel()
                self.mode = "tuned"
                self.last_rx = self.sim.now
                self._arm_silence()
            return
        if not member and self._xmit is not None and self._xmit.outcome == "in_progress":
            self._xmit.pending.discard(node_id)

    # -- broadcast protocol: sender side -------------------------------------------

    def send_message(self, payload: bytes, deadline: int) -> XmitState:
        now = self.sim.now
        if not self.sim.node_is_member(self.id):
            raise SimulationError(f"sender {self.id} is not a segment member")
        bound = wc_bound(self.segment.params)
        if deadline < now + bound:
            raise SimulationError(
                f"deadline {deadline} infeasible: needs at least now+{bound}")
        msg = Message(self.id, self._msg_seq, payload, deadline)
        self._msg_seq = (self._msg_seq + 1) & 0xFF
        state = XmitState(message=msg, round_limit=round_limit(self.segment.params),
                          requested=now)
        self._sendq.append(state)
        self._try_start_next()
        return state

    def _try_start_next(self) -> None:
        if self._xmit is not None and self._xmit.outcome == "in_progress":
            return
        if not self._sendq or self.mode != "tuned" or self.suspended:
            return
        state = self._sendq.popleft()
        self._xmit = state
        state.started = self.sim.now
        state.pending = set(self.sim.current_member_ids()) - {self.id}
        self._round_start()

    def _round_start(self) -> None:
        state = self._xmit
        state.round += 1
        state.paused = False
        self._round_token += 1
        token = self._round_token
        self._round_expected = sorted(state.pending)
        frame = Frame(FrameKind.DATA, state.message.seq, state.round, self.id,
                      self.segment.wns_id, state.message.payload)
        self.sim.request_transmit(
            self.id, frame, self.channel, loopback=self.loopback,
            on_grant=lambda txid, start, end, tok=token: self._data_granted(tok, start))

    def _data_granted(self, token: int, start: int) -> None:
        if token != self._round_token:
            return
        round_end = start + 2 * self.segment.params.tx_delay
        self.sim.schedule(round_end, lambda: self._round_end(token))

    def _round_end(self, token: int) -> None:
        if token != self._round_token:
            return
        state = self._xmit
        if state is None or state.outcome != "in_progress" or state.paused:
            return
        for member in self._round_expected:
            if member in state.pending:
                self.sim.emit_signal(OmissionSignal(
                    channel=self.channel, time=self.sim.now, observer=self.id,
                    reason="missing_expected_frame"))
                self._observe(self.channel, "omission")
        if state.outcome != "in_progress" or state.paused or self.mode != "tuned":
            return  # the omission observations triggered a switch
        if not state.pending:
            self._finish(state, "success")
        elif state.round >= state.round_limit:
            self._finish(state, "failure")
        else:
            self._round_start()

    def _abort_round(self) -> None:
        state = self._xmit
        if state is not None and state.outcome == "in_progress":
            self._round_token += 1
            state.paused = True

    def _resume_xmit(self) -> None:
        if self.mode != "tuned" or self.suspended:
            return
        state = self._xmit
        if state is not None and state.outcome == "in_progress" and state.paused:
            if state.round >= state.round_limit:
                self._finish(state, "failure")
            else:
                self._round_start()
        else:
            self._try_start_next()

    def _finish(self, state: XmitState, outcome: str) -> None:
        state.outcome = outcome
        state.completed = self.sim.now
        self.sim.emit(
            "XmitOutcome",
            sender=self.id, seq=state.message.seq, outcome=outcome,
            rounds=state.round, requested=state.requested,
            started=state.started, completed=state.completed,
        )
        self.outcomes.append(state)
        self._xmit = None
        self._try_start_next()

    def _on_confirm(self, frame: Frame) -> None:
        state = self._xmit
        if state is None or state.outcome != "in_progress":
            return
        if frame.seq != state.message.seq:
            return
        if frame.src in state.pending:
            state.pending.discard(frame.src)
            state.confirmed.add(frame.src)

    # -- broadcast protocol: receiver side ------------------------------------------

    def _on_data(self, frame: Frame, channel: int, tx_start: int) -> None:
        if frame.src == self.id:
            return  # own loopback copy
        mid = (frame.src, frame.seq)
        if mid not in self._dedup:
            self._dedup.add(mid)
            self.deliveries.append(DeliveryRecord(
                receiver=self.id, message_id=mid, time=self.sim.now,
                round_received=frame.round))
        others = [m for m in self.sim.current_member_ids() if m != frame.src]
        if self.id not in others:
            return
        slot = others.index(self.id)
        confirm_time = tx_start + self.segment.params.tx_delay + slot * self.slot_width
        confirm = Frame(FrameKind.CONFIRM, frame.seq, frame.round, self.id,
                        self.segment.wns_id)
        self.sim.schedule(max(confirm_time, self.sim.now),
                          lambda: self._send_confirm(confirm, channel))

    def _send_confirm(self, confirm: Frame, channel: int) -> None:
        if self.mode != "tuned" or self.channel != channel or self.suspended:
            return
        if not self.sim.node_is_member(self.id):
            return
        self.sim.request_transmit(self.id, confirm, channel)


def build_stacks(sim: Simulator, cfg: SwitchConfig) -> dict[int, NodeStack]:
    stacks = {n.id: NodeStack(sim, n.id, cfg) for n in sim.segment.members}
    for stack in stacks.values():
        stack.start()
    return stacks
