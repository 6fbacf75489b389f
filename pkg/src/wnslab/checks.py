"""Trace checkers for the seven abstract-channel properties.

Each checker consumes a completed trace plus the scenario that produced it
and returns pass or fail with counterexample trace indices. The report keys
are the property names WnS1..WnS7; informally: identical broadcast content,
pairwise receive order, loopback delivery, corruption signalling, the
per-window omission budget, the per-window inaccessibility budget, and
bounded completion times.
"""

from dataclasses import dataclass

from .codec import FCS_LEN, compute_fcs
from .inaccess import account
from .mediator import wc_bound
from .scenario import Scenario
from .trace import TraceRecord

PROPERTIES = ("WnS1", "WnS2", "WnS3", "WnS4", "WnS5", "WnS6", "WnS7")


@dataclass(frozen=True)
class PropertyVerdict:
    name: str
    passed: bool
    counterexamples: tuple[int, ...] = ()
    detail: str = ""


@dataclass(frozen=True)
class PropertyReport:
    verdicts: dict[str, PropertyVerdict]
    summary: dict[str, int]

    def all_pass(self) -> bool:
        return all(v.passed for v in self.verdicts.values())

    def failed(self) -> list[str]:
        return [name for name, v in self.verdicts.items() if not v.passed]


def _is_corrupted(deliver: TraceRecord) -> bool:
    data = bytes.fromhex(deliver.fields["bytes"])
    body, fcs = data[:-FCS_LEN], data[-FCS_LEN:]
    return compute_fcs(body) != int.from_bytes(fcs, "little")


def check_identical_broadcast(records, scenario) -> PropertyVerdict:
    """WnS1: all uncorrupted copies of one transmission carry the same bytes."""
    seen: dict[int, tuple[str, int]] = {}
    for rec in records:
        if rec.event != "Deliver" or _is_corrupted(rec):
            continue
        tx = rec.fields["tx"]
        payload = rec.fields["bytes"]
        if tx not in seen:
            seen[tx] = (payload, rec.index)
        elif seen[tx][0] != payload:
            return PropertyVerdict(
                "WnS1", False, (seen[tx][1], rec.index),
                f"transmission {tx} delivered with differing content")
    return PropertyVerdict("WnS1", True)


def check_receive_order(records, scenario) -> PropertyVerdict:
    """WnS2: any two nodes see their commonly received frames in one order."""
    per_node: dict[int, list[tuple[int, int]]] = {}
    for rec in records:
        if rec.event != "Deliver" or _is_corrupted(rec):
            continue
        per_node.setdefault(rec.fields["receiver"], []).append(
            (rec.fields["tx"], rec.index))
    nodes = sorted(per_node)
    for i, a in enumerate(nodes):
        for b in nodes[i + 1:]:
            txs_a = [tx for tx, _ in per_node[a]]
            txs_b = [tx for tx, _ in per_node[b]]
            common = set(txs_a) & set(txs_b)
            sub_a = [(tx, idx) for tx, idx in per_node[a] if tx in common]
            sub_b = [(tx, idx) for tx, idx in per_node[b] if tx in common]
            for (tx_a, idx_a), (tx_b, idx_b) in zip(sub_a, sub_b):
                if tx_a != tx_b:
                    return PropertyVerdict(
                        "WnS2", False, (idx_a, idx_b),
                        f"nodes {a} and {b} disagree on receive order")
    return PropertyVerdict("WnS2", True)


def check_loopback(records, scenario) -> PropertyVerdict:
    """WnS3: a sender that requested loopback receives its own frames."""
    omissions: dict[int, list] = {}
    for rec in records:
        if rec.event == "OmissionInjected":
            omissions.setdefault(rec.fields["tx"], []).append(rec.fields)
    self_delivered: set[tuple[int, int]] = set()
    for rec in records:
        if rec.event == "Deliver":
            self_delivered.add((rec.fields["tx"], rec.fields["receiver"]))
    for rec in records:
        if rec.event != "TxEnd" or not rec.fields["loopback"]:
            continue
        if rec.fields["destroyed_by"] is not None:
            continue
        sender = rec.fields["sender"]
        if sender not in rec.fields["eligible"]:
            continue
        destroyed = False
        for om in omissions.get(rec.fields["tx"], []):
            if om["mode"] != "destroy":
                continue
            if om["victims"] == "all" or sender in om["victims"]:
                destroyed = True
        if destroyed:
            continue
        if (rec.fields["tx"], sender) not in self_delivered:
            return PropertyVerdict(
                "WnS3", False, (rec.index,),
                f"no loopback delivery of transmission {rec.fields['tx']} to {sender}")
    return PropertyVerdict("WnS3", True)


def check_corruption_signalled(records, scenario) -> PropertyVerdict:
    """WnS4: every corrupted delivery has a matching omission signal."""
    signals: dict[tuple[int, int, int], int] = {}
    for rec in records:
        if rec.event == "SignalEmitted" and rec.fields["reason"] == "fcs_mismatch":
            key = (rec.fields["observer"], rec.fields["channel"], rec.time)
            signals[key] = signals.get(key, 0) + 1
    for rec in records:
        if rec.event != "Deliver" or not _is_corrupted(rec):
            continue
        key = (rec.fields["receiver"], rec.fields["channel"], rec.time)
        if signals.get(key, 0) <= 0:
            return PropertyVerdict(
                "WnS4", False, (rec.index,),
                f"corrupted delivery to {rec.fields['receiver']} was not signalled")
        signals[key] -= 1
    return PropertyVerdict("WnS4", True)


def check_omission_budget(records, scenario) -> PropertyVerdict:
    """WnS5: per channel, any observation window holds at most omission_bound
    injected omissions, unless the channel was declared failed nearby."""
    params = scenario.wns.params
    window = params.observation_window
    per_channel: dict[int, list[TraceRecord]] = {}
    failed_at: dict[int, list[int]] = {}
    for rec in records:
        if rec.event == "OmissionInjected":
            per_channel.setdefault(rec.fields["channel"], []).append(rec)
        elif rec.event == "ChannelFailed":
            failed_at.setdefault(rec.fields["channel"], []).append(rec.time)
    for channel, recs in sorted(per_channel.items()):
        times = [r.time for r in recs]
        for i, anchor in enumerate(times):
            in_window = [recs[j] for j in range(i, len(times))
                         if times[j] <= anchor + window]
            if len(in_window) <= params.omission_bound:
                continue
            excused = any(anchor <= t <= anchor + 2 * window
                          for t in failed_at.get(channel, []))
            if not excused:
                return PropertyVerdict(
                    "WnS5", False, tuple(r.index for r in in_window),
                    f"channel {channel}: {len(in_window)} omissions in one window "
                    f"without a failure declaration")
    return PropertyVerdict("WnS5", True)


def check_inaccess_budget(records, scenario) -> PropertyVerdict:
    """WnS6: inaccessibility periods stay within count and duration budget."""
    verdict = account(records, scenario.wns.params)
    if verdict.ok:
        return PropertyVerdict("WnS6", True)
    starts = [rec.index for rec in records if rec.event == "InaccessStart"]
    return PropertyVerdict("WnS6", False, tuple(starts) or (records[-1].index,),
                           "; ".join(verdict.violations))


def check_bounded_delay(records, scenario) -> PropertyVerdict:
    """WnS7: workload frames transmit within tx_delay + inaccess_budget of
    the request, and each message completes within the worst-case bound."""
    params = scenario.wns.params
    frame_bound = params.tx_delay + params.inaccess_budget
    requested: dict[int, tuple[int, int]] = {}
    for rec in records:
        if rec.event == "TxStart" and rec.fields["kind"] == "DATA":
            requested[rec.fields["tx"]] = (rec.fields["requested"], rec.index)
    for rec in records:
        if rec.event != "TxEnd" or rec.fields["kind"] != "DATA":
            continue
        if rec.fields["tx"] not in requested:
            continue
        req_time, idx = requested[rec.fields["tx"]]
        if rec.time - req_time > frame_bound:
            return PropertyVerdict(
                "WnS7", False, (idx, rec.index),
                f"frame transmission took {rec.time - req_time} symbols, "
                f"bound is {frame_bound}")
    bound = wc_bound(params)
    outcomes: dict[tuple[int, int], TraceRecord] = {}
    for rec in records:
        if rec.event == "XmitOutcome":
            outcomes[(rec.fields["sender"], rec.fields["requested"])] = rec
    last_index = records[-1].index if records else 0
    for i, entry in enumerate(scenario.workload):
        rec = outcomes.get((entry.sender, entry.send_time))
        if rec is None:
            if scenario.horizon >= entry.send_time + bound:
                return PropertyVerdict(
                    "WnS7", False, (last_index,),
                    f"workload[{i}] from {entry.sender} never completed")
            continue
        if rec.fields["outcome"] != "success":
            return PropertyVerdict(
                "WnS7", False, (rec.index,),
                f"workload[{i}] ended in {rec.fields['outcome']}")
        elapsed = rec.fields["completed"] - rec.fields["requested"]
        if elapsed > bound:
            return PropertyVerdict(
                "WnS7", False, (rec.index,),
                f"workload[{i}] completed in {elapsed} symbols, bound is {bound}")
    return PropertyVerdict("WnS7", True)


_CHECKERS = {
    "WnS1": check_identical_broadcast,
    "WnS2": check_receive_order,
    "WnS3": check_loopback,
    "WnS4": check_corruption_signalled,
    "WnS5": check_omission_budget,
    "WnS6": check_inaccess_budget,
    "WnS7": check_bounded_delay,
}


def check(records: list[TraceRecord], scenario: Scenario) -> PropertyReport:
    verdicts = {name: fn(records, scenario) for name, fn in _CHECKERS.items()}
    summary = {
        "frames": sum(1 for r in records if r.event == "TxEnd"),
        "deliveries": sum(1 for r in records if r.event == "Deliver"),
        "omissions": sum(1 for r in records if r.event == "OmissionInjected"),
        "signals": sum(1 for r in records if r.event == "SignalEmitted"),
        "switches": sum(1 for r in records if r.event == "ChannelSwitch"),
        "periods": sum(1 for r in records if r.event == "InaccessStart"),
    }
    return PropertyReport(verdicts=verdicts, summary=summary)
