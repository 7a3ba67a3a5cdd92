"""Per-minute batching, binary wire format, and the append-only record store."""

from .packets import HubPacket, Redirector
from .store import RecordStore
from .wire import decode_packet, decode_packet_stream, encode_packet

__all__ = [
    "HubPacket",
    "Redirector",
    "RecordStore",
    "encode_packet",
    "decode_packet",
    "decode_packet_stream",
]
