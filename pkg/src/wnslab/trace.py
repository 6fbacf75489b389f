"""Globally ordered simulation trace, one JSON object per line.

Records carry ``index`` (strictly increasing), ``time`` (non-decreasing
symbols) and ``event``, plus event-specific fields. Serialization uses
sorted keys and compact separators so identical runs produce byte-identical
files.
"""

import json
from dataclasses import dataclass, field
from typing import Any

EVENTS = (
    "TxStart",
    "TxEnd",
    "Deliver",
    "OmissionInjected",
    "SignalEmitted",
    "InaccessStart",
    "InaccessEnd",
    "ChannelFailed",
    "ChannelSwitch",
    "MembershipChange",
    "XmitOutcome",
)


@dataclass(frozen=True)
class TraceRecord:
    index: int
    time: int
    event: str
    fields: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> str:
        rec = {"index": self.index, "time": self.time, "event": self.event}
        rec.update(self.fields)
        return json.dumps(rec, sort_keys=True, separators=(",", ":"))


class TraceError(ValueError):
    """Malformed trace input."""


def dump(records: list[TraceRecord], path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        for rec in records:
            fh.write(rec.to_json())
            fh.write("\n")


def loads_line(line: str, lineno: int) -> TraceRecord:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise TraceError(f"line {lineno}: {exc}") from None
    try:
        index = obj.pop("index")
        time = obj.pop("time")
        event = obj.pop("event")
    except KeyError as exc:
        raise TraceError(f"line {lineno}: missing field {exc}") from None
    if event not in EVENTS:
        raise TraceError(f"line {lineno}: unknown event {event!r}")
    return TraceRecord(index=index, time=time, event=event, fields=obj)


def load(path) -> list[TraceRecord]:
    records = []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            records.append(loads_line(line, lineno))
    verify_order(records)
    return records


def verify_order(records: list[TraceRecord]) -> None:
    last_index = -1
    last_time = -1
    for rec in records:
        if rec.index <= last_index:
            raise TraceError(f"record index {rec.index} not strictly increasing")
        if rec.time < last_time:
            raise TraceError(f"record time {rec.time} regresses at index {rec.index}")
        last_index, last_time = rec.index, rec.time
