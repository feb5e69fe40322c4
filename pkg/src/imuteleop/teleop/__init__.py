from .mapping import Mapping, apply_mapping, engage_clutch, release_clutch
from .protocol import (
    BadMagicError,
    DatagramError,
    NonUnitQuaternionError,
    PoseDatagram,
    ShortBufferError,
    UnsupportedVersionError,
    decode_datagram,
    encode_datagram,
)
from .engine import Phase, SessionConfig, SessionEngine, TickRecord

__all__ = [
    "Mapping",
    "apply_mapping",
    "engage_clutch",
    "release_clutch",
    "PoseDatagram",
    "encode_datagram",
    "decode_datagram",
    "DatagramError",
    "ShortBufferError",
    "BadMagicError",
    "UnsupportedVersionError",
    "NonUnitQuaternionError",
    "Phase",
    "SessionConfig",
    "SessionEngine",
    "TickRecord",
]
