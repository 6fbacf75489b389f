"""Bit-exact frame encoding and decoding with checksum-based error signalling.

Wire layout: byte 0 kind, byte 1 seq, byte 2 round, bytes 3-4 src (LE),
bytes 5-6 segment id (LE), payload, 2-byte FCS (LE) over all preceding
bytes. Encoded length is therefore 9 + payload length, capped at 123.
"""

import enum
import struct
from dataclasses import dataclass

from .kernels import crc16

MAX_PAYLOAD = 114
HEADER_LEN = 7
FCS_LEN = 2
MIN_FRAME = HEADER_LEN + FCS_LEN
MAX_FRAME = MIN_FRAME + MAX_PAYLOAD


class FrameKind(enum.IntEnum):
    DATA = 0
    CONFIRM = 1
    SWITCH = 2
    BEACON = 3


class FrameError(ValueError):
    """Structurally invalid frame (distinct from checksum corruption)."""


@dataclass(frozen=True)
class Frame:
    kind: FrameKind
    seq: int
    round: int
    src: int
    wns_id: int
    payload: bytes = b""

    def __post_init__(self):
        if not 0 <= self.seq <= 0xFF:
            raise FrameError(f"seq {self.seq} out of range")
        if not 0 <= self.round <= 0xFF:
            raise FrameError(f"round {self.round} out of range")
        if not 0 <= self.src <= 0xFFFF:
            raise FrameError(f"src {self.src} out of range")
        if not 0 <= self.wns_id <= 0xFFFF:
            raise FrameError(f"wns_id {self.wns_id} out of range")
        if len(self.payload) > MAX_PAYLOAD:
            raise FrameError(f"payload of {len(self.payload)} bytes exceeds {MAX_PAYLOAD}")


@dataclass(frozen=True)
class OmissionSignal:
    """A locally observed omission, as reported by a correct node."""

    channel: int
    time: int
    observer: int
    reason: str  # fcs_mismatch | missing_expected_frame | inaccessibility

    def __post_init__(self):
        if self.time < 0:
            raise ValueError("signal time must be >= 0")
        if self.reason not in ("fcs_mismatch", "missing_expected_frame", "inaccessibility"):
            raise ValueError(f"unknown omission reason {self.reason!r}")


def compute_fcs(data: bytes) -> int:
    """16-bit frame check sequence over ``data`` (reflected ITU-T CRC)."""
    return crc16(data)


def encode(frame: Frame) -> bytes:
    """Serialize a frame; deterministic byte-for-byte."""
    head = struct.pack(
        "<BBBHH", int(frame.kind), frame.seq, frame.round, frame.src, frame.wns_id
    )
    body = head + frame.payload
    return body + struct.pack("<H", compute_fcs(body))


def decode(data: bytes, channel: int, time: int, observer: int):
    """Deserialize received bytes.

    Returns the Frame when the trailing FCS matches, otherwise an
    OmissionSignal with reason ``fcs_mismatch`` carrying the reception
    context. Undersized or oversized input raises FrameError instead: that
    is a harness misuse, not an on-air corruption.
    """
    if len(data) < MIN_FRAME:
        raise FrameError(f"frame of {len(data)} bytes is below the {MIN_FRAME}-byte minimum")
    if len(data) > MAX_FRAME:
        raise FrameError(f"frame of {len(data)} bytes exceeds the {MAX_FRAME}-byte maximum")
    body, fcs_bytes = data[:-FCS_LEN], data[-FCS_LEN:]
    (received_fcs,) = struct.unpack("<H", fcs_bytes)
    if compute_fcs(body) != received_fcs:
        return OmissionSignal(channel=channel, time=time, observer=observer, reason="fcs_mismatch")
    kind_code, seq, round_, src, wns_id = struct.unpack("<BBBHH", body[:HEADER_LEN])
    try:
        kind = FrameKind(kind_code)
    except ValueError:
        raise FrameError(f"unknown frame kind {kind_code}") from None
    return Frame(kind=kind, seq=seq, round=round_, src=src, wns_id=wns_id, payload=body[HEADER_LEN:])


def encoded_length(payload_len: int) -> int:
    return MIN_FRAME + payload_len
