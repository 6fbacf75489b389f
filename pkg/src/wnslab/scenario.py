"""Scenario files: strict JSON schema, validation, canonical form.

A scenario fixes the segment (nodes, ranges, channels, parameter block),
the switch procedure constants, a fault script, a workload of timed sends,
a seed and a horizon. Parsing is strict: unknown keys are rejected so that
typos cannot silently disable faults. Defaults, where a key is optional,
are documented next to each reader below.
"""

import json
from dataclasses import dataclass

from .channels import SwitchConfig
from .codec import MAX_PAYLOAD, encoded_length
from .engine import airtime_bytes
from .faults import ChannelFailure, FaultScript, Interval, Move, OmissionDirective
from .mediator import round_limit, wc_bound
from .model import CommRange, Node, WnS, WnSParams, validate


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class WorkloadEntry:
    sender: int
    payload_size: int
    send_time: int
    deadline: int

    def payload(self) -> bytes:
        # deterministic filler so traces do not depend on external content
        return bytes((self.sender + 3 * i) & 0xFF for i in range(self.payload_size))


@dataclass(frozen=True)
class Scenario:
    wns: WnS
    switch: SwitchConfig
    faults: FaultScript
    workload: tuple[WorkloadEntry, ...]
    seed: int
    horizon: int


def _pop(obj: dict, key: str, where: str, default=None, required: bool = False):
    if key in obj:
        return obj.pop(key)
    if required:
        raise ScenarioError(f"{where}: missing required key {key!r}")
    return default


def _reject_extras(obj: dict, where: str) -> None:
    if obj:
        raise ScenarioError(f"{where}: unknown keys {sorted(obj)}")


def _parse_range(obj, where: str) -> CommRange:
    if not isinstance(obj, dict):
        raise ScenarioError(f"{where}: range must be an object")
    obj = dict(obj)
    center = _pop(obj, "center", where, required=True)
    semi_major = _pop(obj, "semi_major", where, required=True)
    semi_minor = _pop(obj, "semi_minor", where, required=True)
    rotation = _pop(obj, "rotation", where, default=0.0)
    _reject_extras(obj, where)
    try:
        return CommRange(center=(float(center[0]), float(center[1])),
                         semi_major=float(semi_major), semi_minor=float(semi_minor),
                         rotation=float(rotation))
    except (ValueError, TypeError, IndexError) as exc:
        raise ScenarioError(f"{where}: {exc}") from None


def _parse_node(obj, channels, where: str) -> Node:
    obj = dict(obj)
    nid = _pop(obj, "id", where, required=True)
    position = _pop(obj, "position", where, required=True)
    single = _pop(obj, "range", where)          # one ellipse reused on all channels
    per_channel = _pop(obj, "ranges", where)    # or an explicit map channel -> ellipse
    loopback = bool(_pop(obj, "loopback", where, default=False))
    _reject_extras(obj, where)
    if (single is None) == (per_channel is None):
        raise ScenarioError(f"{where}: exactly one of 'range' or 'ranges' is required")
    if single is not None:
        rng = _parse_range(single, f"{where}.range")
        ranges = {c: rng for c in channels}
    else:
        ranges = {}
        for key, value in per_channel.items():
            ranges[int(key)] = _parse_range(value, f"{where}.ranges[{key}]")
    try:
        return Node(id=int(nid), position=(float(position[0]), float(position[1])),
                    ranges=ranges, loopback=loopback)
    except (ValueError, TypeError, IndexError) as exc:
        raise ScenarioError(f"{where}: {exc}") from None


def _parse_params(obj, where: str) -> WnSParams:
    obj = dict(obj)
    fields = {}
    for key in ("omission_bound", "max_inaccess", "failed_channels",
                "consecutive_bound", "observation_window", "tx_delay",
                "inaccess_budget"):
        fields[key] = int(_pop(obj, key, where, required=True))
    _reject_extras(obj, where)
    return WnSParams(**fields)


def _parse_faults(obj, where: str) -> FaultScript:
    if obj is None:
        return FaultScript()
    obj = dict(obj)
    omissions = []
    for i, om in enumerate(_pop(obj, "omissions", where, default=[])):
        om = dict(om)
        w = f"{where}.omissions[{i}]"
        victims = _pop(om, "victims", w, default="all")
        entry = OmissionDirective(
            seq=int(_pop(om, "seq", w, required=True)),
            round=int(_pop(om, "round", w, required=True)),
            sender=int(_pop(om, "sender", w, required=True)),
            victims=None if victims == "all" else frozenset(int(v) for v in victims),
            mode=_pop(om, "mode", w, default="destroy"),
        )
        _reject_extras(om, w)
        omissions.append(entry)
    failures = []
    for i, cf in enumerate(_pop(obj, "channel_failures", where, default=[])):
        cf = dict(cf)
        w = f"{where}.channel_failures[{i}]"
        try:
            failures.append(ChannelFailure(
                channel=int(_pop(cf, "channel", w, required=True)),
                interval=Interval(int(_pop(cf, "start", w, required=True)),
                                  int(_pop(cf, "end", w, required=True)))))
        except ValueError as exc:
            raise ScenarioError(f"{w}: {exc}") from None
        _reject_extras(cf, w)
    windows = []
    for i, win in enumerate(_pop(obj, "inaccessibility", where, default=[])):
        win = dict(win)
        w = f"{where}.inaccessibility[{i}]"
        try:
            windows.append(Interval(int(_pop(win, "start", w, required=True)),
                                    int(_pop(win, "end", w, required=True))))
        except ValueError as exc:
            raise ScenarioError(f"{w}: {exc}") from None
        _reject_extras(win, w)
    moves = []
    for i, mv in enumerate(_pop(obj, "moves", where, default=[])):
        mv = dict(mv)
        w = f"{where}.moves[{i}]"
        pos = _pop(mv, "position", w, required=True)
        moves.append(Move(node=int(_pop(mv, "node", w, required=True)),
                          time=int(_pop(mv, "time", w, required=True)),
                          position=(float(pos[0]), float(pos[1]))))
        _reject_extras(mv, w)
    _reject_extras(obj, where)
    try:
        return FaultScript(omissions=tuple(omissions), channel_failures=tuple(failures),
                           inaccessibility=tuple(windows), moves=tuple(moves))
    except ValueError as exc:
        raise ScenarioError(f"{where}: {exc}") from None


def parse_obj(obj: dict) -> Scenario:
    if not isinstance(obj, dict):
        raise ScenarioError("scenario root must be an object")
    obj = dict(obj)
    wns_obj = dict(_pop(obj, "wns", "scenario", required=True))
    switch_obj = _pop(obj, "switch", "scenario")
    faults_obj = _pop(obj, "faults", "scenario")
    workload_obj = _pop(obj, "workload", "scenario", default=[])
    seed = int(_pop(obj, "seed", "scenario", default=0))
    horizon = int(_pop(obj, "horizon", "scenario", required=True))
    _reject_extras(obj, "scenario")

    wns_id = int(_pop(wns_obj, "id", "wns", required=True))
    coordinator = int(_pop(wns_obj, "coordinator", "wns", required=True))
    channels = tuple(int(c) for c in _pop(wns_obj, "channels", "wns", required=True))
    params = _parse_params(dict(_pop(wns_obj, "params", "wns", required=True)), "wns.params")
    nodes = []
    for i, node_obj in enumerate(_pop(wns_obj, "nodes", "wns", required=True)):
        nodes.append(_parse_node(node_obj, channels, f"wns.nodes[{i}]"))
    _reject_extras(wns_obj, "wns")
    members = tuple(
        n if n.id != coordinator else Node(n.id, n.position, n.ranges,
                                           coordinator=True, loopback=True)
        for n in nodes)
    segment = WnS(wns_id=wns_id, members=members, coordinator_id=coordinator,
                  channels=channels, params=params)

    # switch defaults are derived from the parameter block
    if switch_obj is None:
        switch_obj = {}
    switch_obj = dict(switch_obj)
    switch = SwitchConfig(
        silence_timeout=int(_pop(switch_obj, "silence_timeout", "switch",
                                 default=2 * params.tx_delay)),
        beacon_wait=int(_pop(switch_obj, "beacon_wait", "switch",
                             default=2 * params.tx_delay)),
        beacon_cadence=int(_pop(switch_obj, "beacon_cadence", "switch",
                                default=params.tx_delay)),
        announce_repeats=int(_pop(switch_obj, "announce_repeats", "switch",
                                  default=params.omission_bound + 1)),
        hop_time=int(_pop(switch_obj, "hop_time", "switch", default=12)),
        slot_guard=int(_pop(switch_obj, "slot_guard", "switch", default=2)),
        enabled=bool(_pop(switch_obj, "enabled", "switch", default=True)),
    )
    _reject_extras(switch_obj, "switch")

    faults = _parse_faults(faults_obj, "faults")
    workload = []
    for i, entry in enumerate(workload_obj):
        entry = dict(entry)
        w = f"workload[{i}]"
        workload.append(WorkloadEntry(
            sender=int(_pop(entry, "sender", w, required=True)),
            payload_size=int(_pop(entry, "payload_size", w, default=0)),
            send_time=int(_pop(entry, "send_time", w, required=True)),
            deadline=int(_pop(entry, "deadline", w, required=True))))
        _reject_extras(entry, w)

    scenario = Scenario(wns=segment, switch=switch, faults=faults,
                        workload=tuple(workload), seed=seed, horizon=horizon)
    problems = validate_scenario(scenario)
    if problems:
        raise ScenarioError("; ".join(problems))
    return scenario


def parse_file(path) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    return parse_obj(obj)


def validate_scenario(s: Scenario) -> list[str]:
    out = list(validate(s.wns))
    params = s.wns.params
    member_ids = set(n.id for n in s.wns.members)
    if round_limit(params) > 255:
        out.append("round limit omission_bound + max_inaccess + 1 must fit in a byte")
    bound = wc_bound(params)
    beacon_air = airtime_bytes(encoded_length(0))
    slot_width = beacon_air + s.switch.slot_guard
    confirm_phase = (len(s.wns.members) - 1) * slot_width + beacon_air
    if confirm_phase > params.tx_delay:
        out.append(
            f"confirm phase of {confirm_phase} symbols does not fit in tx_delay "
            f"{params.tx_delay}")
    if airtime_bytes(encoded_length(MAX_PAYLOAD)) > params.tx_delay:
        out.append("tx_delay must cover the airtime of a maximum-length frame")
    worst_switch = s.switch.worst_case_switch(params.failed_channels)
    if worst_switch > params.inaccess_budget:
        out.append(
            f"worst-case switch of {worst_switch} symbols exceeds inaccess_budget "
            f"{params.inaccess_budget}")
    if s.switch.beacon_wait < s.switch.beacon_cadence + beacon_air + s.switch.hop_time:
        out.append("beacon_wait must cover one beacon cadence plus airtime and hop")
    if s.switch.silence_timeout < 2 * s.switch.beacon_cadence:
        out.append("silence_timeout must cover at least two beacon cadences")
    for i, entry in enumerate(s.workload):
        if entry.sender not in member_ids:
            out.append(f"workload[{i}]: sender {entry.sender} is not a member")
        if entry.payload_size > MAX_PAYLOAD:
            out.append(f"workload[{i}]: payload exceeds {MAX_PAYLOAD} bytes")
        if entry.send_time > s.horizon:
            out.append(f"workload[{i}]: send_time beyond the horizon")
        if entry.deadline < entry.send_time + bound:
            out.append(
                f"workload[{i}]: deadline infeasible, needs send_time + {bound}")
    for i, cf in enumerate(s.faults.channel_failures):
        if cf.channel not in s.wns.channels:
            out.append(f"faults.channel_failures[{i}]: unknown channel {cf.channel}")
    windows = sorted(s.faults.inaccessibility, key=lambda w: w.start)
    for a, b in zip(windows, windows[1:]):
        if b.start < a.end:
            out.append("faults.inaccessibility: windows must not overlap")
    for i, mv in enumerate(s.faults.moves):
        if mv.node not in member_ids:
            out.append(f"faults.moves[{i}]: unknown node {mv.node}")
    return out


def canonical(s: Scenario) -> dict:
    """Canonical plain-object form; parse_obj(canonical(s)) reproduces s."""

    def range_obj(r: CommRange) -> dict:
        return {"center": [r.center[0], r.center[1]], "semi_major": r.semi_major,
                "semi_minor": r.semi_minor, "rotation": r.rotation}

    nodes = []
    for n in sorted(s.wns.members, key=lambda n: n.id):
        nodes.append({
            "id": n.id,
            "position": [n.position[0], n.position[1]],
            "ranges": {str(c): range_obj(r) for c, r in sorted(n.ranges.items())},
            "loopback": n.loopback,
        })
    params = s.wns.params
    return {
        "wns": {
            "id": s.wns.wns_id,
            "coordinator": s.wns.coordinator_id,
            "channels": list(s.wns.channels),
            "params": {
                "omission_bound": params.omission_bound,
                "max_inaccess": params.max_inaccess,
                "failed_channels": params.failed_channels,
                "consecutive_bound": params.consecutive_bound,
                "observation_window": params.observation_window,
                "tx_delay": params.tx_delay,
                "inaccess_budget": params.inaccess_budget,
            },
            "nodes": nodes,
        },
        "switch": {
            "silence_timeout": s.switch.silence_timeout,
            "beacon_wait": s.switch.beacon_wait,
            "beacon_cadence": s.switch.beacon_cadence,
            "announce_repeats": s.switch.announce_repeats,
            "hop_time": s.switch.hop_time,
            "slot_guard": s.switch.slot_guard,
            "enabled": s.switch.enabled,
        },
        "faults": {
            "omissions": [
                {"seq": om.seq, "round": om.round, "sender": om.sender,
                 "victims": "all" if om.victims is None else sorted(om.victims),
                 "mode": om.mode}
                for om in s.faults.omissions
            ],
            "channel_failures": [
                {"channel": cf.channel, "start": cf.interval.start, "end": cf.interval.end}
                for cf in s.faults.channel_failures
            ],
            "inaccessibility": [
                {"start": w.start, "end": w.end} for w in s.faults.inaccessibility
            ],
            "moves": [
                {"node": m.node, "time": m.time, "position": [m.position[0], m.position[1]]}
                for m in s.faults.moves
            ],
        },
        "workload": [
            {"sender": e.sender, "payload_size": e.payload_size,
             "send_time": e.send_time, "deadline": e.deadline}
            for e in s.workload
        ],
        "seed": s.seed,
        "horizon": s.horizon,
    }


def dump_file(s: Scenario, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(canonical(s), fh, indent=2, sort_keys=True)
        fh.write("\n")
